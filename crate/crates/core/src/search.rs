//! Greedy ICL maximisation.
//!
//! A fit alternates label sweeps over rows, columns and intervals. Each
//! element, visited in a freshly shuffled order, moves to whichever other
//! cluster (or a new singleton cluster) improves the ICL most. When a full
//! round of sweeps changes nothing, a merge pass fuses cluster pairs while
//! that helps. The fit stops when neither sweeps nor merges improve, or
//! after `max_sweeps` rounds. Restarts with consecutive seeds run in
//! parallel and the best result wins.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyper::Hyperparams;
use crate::icl::{
    icl_from_stats, merge_blocks_delta, source_delta, target_delta, BlockTerm, IclValue, LabelTerm,
};
use crate::partition::{Dim, TriPartition};
use crate::stats::{block_stats, profile_into, BlockStats};
use crate::tensor::CountTensor;

/// Smallest ICL gain accepted for a move or merge. Gains below this are
/// floating-point noise on moves between equivalent clusters.
pub const MIN_IMPROVEMENT: f64 = 1e-9;

/// Search settings. Cluster counts are indexed by [`Dim::index`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub init_k: usize,
    pub init_g: usize,
    pub init_d: usize,
    /// Upper bound on sweep rounds per fit.
    pub max_sweeps: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Allow single elements to open new clusters.
    pub allow_new_clusters: bool,
    /// Keep the cluster count of an axis at its initial value: no new
    /// clusters, no emptying moves and no merges along that axis.
    pub fixed: [bool; 3],
    pub hyper: Hyperparams,
}

impl SearchConfig {
    /// Defaults for a tensor: at most 10 initial clusters per axis.
    pub fn for_tensor(tensor: &CountTensor) -> Self {
        Self {
            init_k: tensor.n_rows().min(10),
            init_g: tensor.n_cols().min(10),
            init_d: tensor.n_intervals().min(10),
            max_sweeps: 100,
            restarts: 1,
            seed: 0,
            allow_new_clusters: true,
            fixed: [false; 3],
            hyper: Hyperparams::default(),
        }
    }

    pub fn init_counts(&self) -> [usize; 3] {
        [self.init_k, self.init_g, self.init_d]
    }

    pub fn validate(&self, tensor: &CountTensor) -> Result<()> {
        self.hyper.validate()?;
        for dim in Dim::ALL {
            let init = self.init_counts()[dim.index()];
            let n = tensor.len(dim);
            if init == 0 || init > n {
                return Err(Error::Config(format!(
                    "initial {} cluster count {init} must lie in 1..={n}",
                    dim.name()
                )));
            }
        }
        if self.max_sweeps == 0 {
            return Err(Error::Config("max_sweeps must be >= 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be >= 1".into()));
        }
        Ok(())
    }
}

/// Outcome of one fit (or the best of several restarts).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub partition: TriPartition,
    pub icl: IclValue,
    /// `(round, icl_total)` after initialisation (round 0) and after every
    /// improving round.
    pub trace: Vec<(usize, f64)>,
    pub n_sweeps: usize,
    pub restart_index: usize,
}

/// Mutable state of one fit: labels, block totals and cached block terms.
pub struct FitState<'t> {
    tensor: &'t CountTensor,
    part: TriPartition,
    stats: BlockStats,
    hyper: Hyperparams,
    term: BlockTerm,
    terms: Vec<f64>,
    icl: f64,
    allow_new: bool,
    fixed: [bool; 3],
    buf: Vec<u64>,
    audit: Option<Vec<(f64, f64)>>,
}

impl<'t> FitState<'t> {
    pub fn new(tensor: &'t CountTensor, part: TriPartition, hyper: Hyperparams) -> Result<Self> {
        hyper.validate()?;
        let stats = block_stats(tensor, &part)?;
        let icl = icl_from_stats(tensor, &stats, &part, &hyper)?.total;
        let mut state = Self {
            tensor,
            part,
            stats,
            hyper,
            term: BlockTerm::new(&hyper),
            terms: Vec::new(),
            icl,
            allow_new: true,
            fixed: [false; 3],
            buf: Vec::new(),
            audit: None,
        };
        state.rebuild_terms();
        Ok(state)
    }

    pub fn with_new_clusters(mut self, allow: bool) -> Self {
        self.allow_new = allow;
        self
    }

    pub fn with_fixed(mut self, fixed: [bool; 3]) -> Self {
        self.fixed = fixed;
        self
    }

    /// Record `(predicted, realised)` ICL changes for every accepted update.
    /// Each record costs a full re-evaluation; meant for tests.
    pub fn with_audit(mut self) -> Self {
        self.audit = Some(Vec::new());
        self
    }

    pub fn audit_log(&self) -> Option<&[(f64, f64)]> {
        self.audit.as_deref()
    }

    pub fn partition(&self) -> &TriPartition {
        &self.part
    }

    pub fn stats(&self) -> &BlockStats {
        &self.stats
    }

    /// Running ICL total (initial exact value plus accepted deltas).
    pub fn icl_total(&self) -> f64 {
        self.icl
    }

    /// Exact ICL of the current labels from the maintained statistics.
    pub fn icl_exact(&self) -> Result<IclValue> {
        icl_from_stats(self.tensor, &self.stats, &self.part, &self.hyper)
    }

    /// Whether the maintained statistics equal a from-scratch recount.
    pub fn in_sync(&self) -> bool {
        block_stats(self.tensor, &self.part).is_ok_and(|s| s == self.stats)
    }

    fn can_grow(&self, dim: Dim) -> bool {
        self.allow_new && !self.fixed[dim.index()]
    }

    fn rebuild_terms(&mut self) {
        let (ng, nd) = (self.stats.g(), self.stats.d());
        self.terms = self
            .stats
            .as_slice()
            .iter()
            .enumerate()
            .map(|(f, &s)| {
                let (k, g, d) = (f / (ng * nd), (f / nd) % ng, f % nd);
                self.term.eval(s, BlockStats::r(&self.part, k, g, d))
            })
            .collect();
    }

    fn refresh_slice(&mut self, dim: Dim, x: usize) {
        let (np, nq) = self.stats.profile_shape(dim);
        for p in 0..np {
            for q in 0..nq {
                let f = self.stats.flat_along(dim, x, p, q);
                let (k, g, d) = match dim {
                    Dim::Row => (x, p, q),
                    Dim::Col => (p, x, q),
                    Dim::Time => (p, q, x),
                };
                self.terms[f] = self
                    .term
                    .eval(self.stats.as_slice()[f], BlockStats::r(&self.part, k, g, d));
            }
        }
    }

    fn record(&mut self, predicted: f64) {
        if self.audit.is_some() {
            let before = self.icl - predicted;
            let now = self.icl_exact().map(|v| v.total).unwrap_or(f64::NAN);
            // re-anchor so audit entries compare single updates
            self.icl = now;
            if let Some(log) = self.audit.as_mut() {
                log.push((predicted, now - before));
            }
        }
    }

    /// Best improving destination for element `idx`, if any.
    fn best_move(&mut self, dim: Dim, idx: usize) -> Option<(Option<usize>, f64)> {
        let src = self.part.labels(dim)[idx];
        let sizes = self.part.sizes(dim);
        let n_src = sizes[src];
        if n_src == 1 && self.fixed[dim.index()] {
            return None;
        }
        let mut buf = std::mem::take(&mut self.buf);
        profile_into(self.tensor, &self.part, dim, idx, &mut buf);
        let terms = &self.terms;
        let current = |f: usize| terms[f];
        let base = source_delta(dim, src, &buf, &self.stats, &self.part, &self.term, current);
        let labels = LabelTerm::new(self.hyper.concentration(dim), self.part.len(dim));
        let q = sizes.len();

        let mut best: Option<(Option<usize>, f64)> = None;
        let mut consider = |tgt: Option<usize>, delta: f64| {
            if delta > MIN_IMPROVEMENT && best.is_none_or(|(_, b)| delta > b) {
                best = Some((tgt, delta));
            }
        };
        for t in (0..q).filter(|&t| t != src) {
            let delta =
                base + target_delta(
                    dim,
                    Some(t),
                    &buf,
                    &self.stats,
                    &self.part,
                    &self.term,
                    current,
                ) + labels.move_delta(q, n_src, sizes[t]);
            consider(Some(t), delta);
        }
        if n_src > 1 && self.can_grow(dim) {
            let delta =
                base + target_delta(
                    dim,
                    None,
                    &buf,
                    &self.stats,
                    &self.part,
                    &self.term,
                    current,
                ) + labels.move_delta(q, n_src, 0);
            consider(None, delta);
        }
        self.buf = buf;
        best
    }

    /// Applies a move whose profile is in `self.buf`.
    fn apply_move(&mut self, dim: Dim, idx: usize, target: Option<usize>, delta: f64) {
        let src = self.part.labels(dim)[idx];
        let out = self.part.move_element(dim, idx, target);
        if out.created.is_some() {
            self.stats.add_cluster(dim);
        }
        let tgt = target.or(out.created).expect("move has a destination");
        self.stats.apply_move(dim, src, tgt, &self.buf);
        if let Some(r) = out.removed {
            self.stats.swap_remove_cluster(dim, r);
        }
        if out.created.is_some() || out.removed.is_some() {
            self.rebuild_terms();
        } else {
            // sizes along `dim` changed only for src and tgt
            self.refresh_slice(dim, src);
            self.refresh_slice(dim, tgt);
        }
        self.icl += delta;
        self.record(delta);
    }

    fn best_merge(&self, dim: Dim) -> Option<(usize, usize, f64)> {
        let q = self.part.n_clusters(dim);
        let sizes = self.part.sizes(dim);
        let labels = LabelTerm::new(self.hyper.concentration(dim), self.part.len(dim));
        let current = |f: usize| self.terms[f];
        let mut best: Option<(usize, usize, f64)> = None;
        for c1 in 0..q {
            for c2 in c1 + 1..q {
                let delta =
                    merge_blocks_delta(dim, c1, c2, &self.stats, &self.part, &self.term, current)
                        + labels.merge_delta(q, sizes[c1], sizes[c2]);
                if delta > MIN_IMPROVEMENT && best.is_none_or(|(_, _, b)| delta > b) {
                    best = Some((c1, c2, delta));
                }
            }
        }
        best
    }

    fn apply_merge(&mut self, dim: Dim, c1: usize, c2: usize, delta: f64) {
        self.part.merge_clusters(dim, c1, c2);
        self.stats.merge(dim, c1, c2);
        self.rebuild_terms();
        self.icl += delta;
        self.record(delta);
    }

    fn into_result(
        self,
        trace: Vec<(usize, f64)>,
        n_sweeps: usize,
        restart_index: usize,
    ) -> Result<FitResult> {
        let icl = self.icl_exact()?;
        Ok(FitResult {
            partition: self.part,
            icl,
            trace,
            n_sweeps,
            restart_index,
        })
    }
}

/// One pass over every element of `dim` in random order, applying the
/// best strictly improving move for each. Returns whether anything moved.
pub fn greedy_sweep<R: Rng + ?Sized>(
    dim: Dim,
    state: &mut FitState<'_>,
    rng: &mut R,
) -> Result<bool> {
    let mut order: Vec<usize> = (0..state.part.len(dim)).collect();
    order.shuffle(rng);
    let mut improved = false;
    for idx in order {
        if let Some((target, delta)) = state.best_move(dim, idx) {
            state.apply_move(dim, idx, target, delta);
            improved = true;
        }
    }
    Ok(improved)
}

/// Repeatedly applies the best improving merge along each axis until none
/// is left. Returns whether any merge happened.
pub fn merge_pass(state: &mut FitState<'_>) -> Result<bool> {
    let mut improved = false;
    for dim in Dim::ALL {
        if state.fixed[dim.index()] {
            continue;
        }
        while let Some((c1, c2, delta)) = state.best_merge(dim) {
            state.apply_merge(dim, c1, c2, delta);
            improved = true;
        }
    }
    Ok(improved)
}

/// Uniform random labels over `q` clusters with none left empty.
fn random_labels<R: Rng + ?Sized>(n: usize, q: usize, rng: &mut R) -> Vec<usize> {
    let mut labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..q)).collect();
    let mut sizes = vec![0usize; q];
    for &l in &labels {
        sizes[l] += 1;
    }
    for empty in 0..q {
        while sizes[empty] == 0 {
            let i = rng.random_range(0..n);
            if sizes[labels[i]] > 1 {
                sizes[labels[i]] -= 1;
                labels[i] = empty;
                sizes[empty] += 1;
            }
        }
    }
    labels
}

fn fit_seeded(tensor: &CountTensor, cfg: &SearchConfig, restart_index: usize) -> Result<FitResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(restart_index as u64));
    let mut counts = cfg.init_counts();
    if restart_index > 0 {
        // later restarts also vary the starting size of free axes
        for dim in Dim::ALL {
            if !cfg.fixed[dim.index()] {
                counts[dim.index()] = rng.random_range(1..=counts[dim.index()]);
            }
        }
    }
    let c = random_labels(tensor.n_rows(), counts[0], &mut rng);
    let w = random_labels(tensor.n_cols(), counts[1], &mut rng);
    let y = random_labels(tensor.n_intervals(), counts[2], &mut rng);
    let part = TriPartition::from_labels(c, w, y)?;
    let mut state = FitState::new(tensor, part, cfg.hyper)?
        .with_new_clusters(cfg.allow_new_clusters)
        .with_fixed(cfg.fixed);

    let mut trace = vec![(0, state.icl_total())];
    let mut n_sweeps = 0;
    for round in 1..=cfg.max_sweeps {
        n_sweeps = round;
        let mut improved = false;
        for dim in Dim::ALL {
            improved |= greedy_sweep(dim, &mut state, &mut rng)?;
        }
        if !improved {
            improved = merge_pass(&mut state)?;
        }
        if !improved {
            break;
        }
        // re-anchor the running total on the exact value
        state.icl = state.icl_exact()?.total;
        trace.push((round, state.icl));
    }
    state.into_result(trace, n_sweeps, restart_index)
}

/// A single greedy fit from random labels drawn with `cfg.seed`.
pub fn fit(tensor: &CountTensor, cfg: &SearchConfig) -> Result<FitResult> {
    cfg.validate(tensor)?;
    fit_seeded(tensor, cfg, 0)
}

/// Runs `cfg.restarts` fits with seeds `seed, seed + 1, …` in parallel and
/// returns the one with the highest ICL (lowest restart index on ties).
///
/// Restart 0 starts from the configured cluster counts. Every later restart
/// draws the starting count of each non-fixed axis uniformly from
/// `1..=init`, so restarts differ in model size as well as in labels.
pub fn multi_restart(tensor: &CountTensor, cfg: &SearchConfig) -> Result<FitResult> {
    cfg.validate(tensor)?;
    let results = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| fit_seeded(tensor, cfg, r))
        .collect::<Result<Vec<_>>>()?;
    let best = results
        .into_iter()
        .reduce(|best, next| {
            if next.icl.total > best.icl.total {
                next
            } else {
                best
            }
        })
        .expect("restarts >= 1");
    Ok(best)
}
