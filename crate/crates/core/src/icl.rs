//! Exact integrated complete-data log-likelihood (ICL).
//!
//! With a Gamma(a, b) prior on every block rate and symmetric Dirichlet
//! priors on the label proportions, both integrals are closed form:
//!
//! ```text
//! ICL = Σ_blocks [ a·ln b − lnΓ(a) + S·ln Δ + lnΓ(S + a) − (S + a)·ln(Δ·R + b) ]
//!       − Σ_cells ln(N_ij^u!)
//!       + DM(|A|, α) + DM(|B|, δ) + DM(|C|, γ)
//! ```
//!
//! where `DM` is the Dirichlet-multinomial log marginal of a size vector.
//! Moves and merges change only a few blocks, so the search works with
//! incremental differences rather than full re-evaluations.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::hyper::Hyperparams;
use crate::partition::{Dim, TriPartition};
use crate::stats::{block_stats, BlockStats, Profile};
use crate::tensor::CountTensor;

/// An ICL value split into its data and label parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IclValue {
    pub total: f64,
    /// Log of the integrated Poisson–Gamma term, factorial constant included.
    pub likelihood_term: f64,
    /// Log of the integrated Dirichlet–multinomial label term.
    pub prior_term: f64,
}

/// Destination of a single-element move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Cluster(usize),
    /// A fresh singleton cluster.
    New,
}

/// Block term evaluator with the label-independent pieces precomputed.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BlockTerm {
    a: f64,
    b: f64,
    delta_t: f64,
    ln_delta_t: f64,
    offset: f64,
}

impl BlockTerm {
    pub(crate) fn new(h: &Hyperparams) -> Self {
        Self {
            a: h.a,
            b: h.b,
            delta_t: h.delta_t,
            ln_delta_t: h.delta_t.ln(),
            offset: h.a * h.b.ln() - ln_gamma(h.a),
        }
    }

    /// Block contribution; an empty block (`r == 0`) contributes nothing.
    #[inline]
    pub(crate) fn eval(&self, s: u64, r: u64) -> f64 {
        if r == 0 {
            debug_assert_eq!(s, 0);
            return 0.0;
        }
        let s = s as f64;
        self.offset + s * self.ln_delta_t + ln_gamma(s + self.a)
            - (s + self.a) * (self.delta_t * r as f64 + self.b).ln()
    }
}

/// Log integrated Poisson–Gamma term of one block, without the
/// within-block factorial product.
pub fn log_gp_block(s: u64, r: u64, h: &Hyperparams) -> Result<f64> {
    h.validate()?;
    if r == 0 {
        return Err(Error::Contract("block capacity R must be >= 1".into()));
    }
    Ok(BlockTerm::new(h).eval(s, r))
}

/// Pieces of the Dirichlet–multinomial term that a move can change.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LabelTerm {
    conc: f64,
    n: usize,
}

impl LabelTerm {
    pub(crate) fn new(conc: f64, n: usize) -> Self {
        Self { conc, n }
    }

    /// `lnΓ(size + conc)` for a present cluster, 0 for an absent one.
    #[inline]
    fn cluster(&self, size: usize) -> f64 {
        if size == 0 {
            0.0
        } else {
            ln_gamma(size as f64 + self.conc)
        }
    }

    /// Terms that depend only on the number of clusters.
    fn count(&self, q: usize) -> f64 {
        let qc = q as f64 * self.conc;
        ln_gamma(qc) - q as f64 * ln_gamma(self.conc) - ln_gamma(self.n as f64 + qc)
    }

    fn full(&self, sizes: &[usize]) -> f64 {
        self.count(sizes.len()) + sizes.iter().map(|&s| self.cluster(s)).sum::<f64>()
    }

    /// Change when one element leaves a cluster of size `src` and joins one
    /// of size `tgt` (0 for a new cluster), starting from `q` clusters.
    pub(crate) fn move_delta(&self, q: usize, src: usize, tgt: usize) -> f64 {
        let q_after = q + usize::from(tgt == 0) - usize::from(src == 1);
        self.cluster(src - 1) - self.cluster(src) + self.cluster(tgt + 1) - self.cluster(tgt)
            + self.count(q_after)
            - self.count(q)
    }

    /// Change when clusters of sizes `n1` and `n2` are fused.
    pub(crate) fn merge_delta(&self, q: usize, n1: usize, n2: usize) -> f64 {
        self.cluster(n1 + n2) - self.cluster(n1) - self.cluster(n2) + self.count(q - 1)
            - self.count(q)
    }
}

/// Log Dirichlet–multinomial marginal of a vector of cluster sizes under a
/// symmetric Dirichlet(`conc`) prior.
pub fn log_dirichlet_multinomial(sizes: &[usize], conc: f64) -> Result<f64> {
    if sizes.is_empty() {
        return Err(Error::Contract("sizes must be non-empty".into()));
    }
    if sizes.contains(&0) {
        return Err(Error::Contract("cluster sizes must be >= 1".into()));
    }
    if !(conc.is_finite() && conc > 0.0) {
        return Err(Error::InvalidHyperparameter {
            name: "concentration",
            value: conc,
        });
    }
    Ok(LabelTerm::new(conc, sizes.iter().sum()).full(sizes))
}

/// Sum of all block terms for given statistics.
pub(crate) fn likelihood_blocks(stats: &BlockStats, part: &TriPartition, term: &BlockTerm) -> f64 {
    let mut sum = 0.0;
    for k in 0..stats.k() {
        for g in 0..stats.g() {
            for d in 0..stats.d() {
                sum += term.eval(stats.s(k, g, d), BlockStats::r(part, k, g, d));
            }
        }
    }
    sum
}

pub(crate) fn prior(part: &TriPartition, h: &Hyperparams) -> f64 {
    Dim::ALL
        .iter()
        .map(|&dim| LabelTerm::new(h.concentration(dim), part.len(dim)).full(part.sizes(dim)))
        .sum()
}

/// ICL from already computed statistics.
pub fn icl_from_stats(
    tensor: &CountTensor,
    stats: &BlockStats,
    part: &TriPartition,
    h: &Hyperparams,
) -> Result<IclValue> {
    h.validate()?;
    check_stats(stats, part)?;
    let likelihood_term =
        likelihood_blocks(stats, part, &BlockTerm::new(h)) - tensor.log_factorial_constant();
    let prior_term = prior(part, h);
    let total = likelihood_term + prior_term;
    if !total.is_finite() {
        return Err(Error::Numerical(format!(
            "likelihood {likelihood_term}, prior {prior_term}"
        )));
    }
    Ok(IclValue {
        total,
        likelihood_term,
        prior_term,
    })
}

/// Exact ICL of a labelling.
pub fn icl_exact(tensor: &CountTensor, part: &TriPartition, h: &Hyperparams) -> Result<IclValue> {
    let stats = block_stats(tensor, part)?;
    icl_from_stats(tensor, &stats, part, h)
}

fn check_stats(stats: &BlockStats, part: &TriPartition) -> Result<()> {
    for dim in Dim::ALL {
        let expected = part.n_clusters(dim);
        let actual = stats.counts()[dim.index()];
        if expected != actual {
            return Err(Error::DimensionMismatch {
                what: "cluster count",
                expected,
                actual,
            });
        }
    }
    Ok(())
}

/// Block-term change from removing `profile` from cluster `src` along `dim`.
///
/// `current(f)` must return the present term of flat block `f`.
pub(crate) fn source_delta(
    dim: Dim,
    src: usize,
    profile: &[u64],
    stats: &BlockStats,
    part: &TriPartition,
    term: &BlockTerm,
    current: impl Fn(usize) -> f64,
) -> f64 {
    let (o1, o2) = dim.others();
    let (s1, s2) = (part.sizes(o1), part.sizes(o2));
    let n_src = part.sizes(dim)[src] as u64;
    let nq = s2.len();
    let mut sum = 0.0;
    for (p, &sp) in s1.iter().enumerate() {
        for (q, &sq) in s2.iter().enumerate() {
            let w = (sp * sq) as u64;
            let f = stats.flat_along(dim, src, p, q);
            let s = stats.as_slice()[f] - profile[p * nq + q];
            sum += term.eval(s, (n_src - 1) * w) - current(f);
        }
    }
    sum
}

/// Block-term change from adding `profile` to `tgt` (`None`: new cluster).
pub(crate) fn target_delta(
    dim: Dim,
    tgt: Option<usize>,
    profile: &[u64],
    stats: &BlockStats,
    part: &TriPartition,
    term: &BlockTerm,
    current: impl Fn(usize) -> f64,
) -> f64 {
    let (o1, o2) = dim.others();
    let (s1, s2) = (part.sizes(o1), part.sizes(o2));
    let nq = s2.len();
    let mut sum = 0.0;
    match tgt {
        Some(t) => {
            let n_t = part.sizes(dim)[t] as u64;
            for (p, &sp) in s1.iter().enumerate() {
                for (q, &sq) in s2.iter().enumerate() {
                    let w = (sp * sq) as u64;
                    let f = stats.flat_along(dim, t, p, q);
                    let s = stats.as_slice()[f] + profile[p * nq + q];
                    sum += term.eval(s, (n_t + 1) * w) - current(f);
                }
            }
        }
        None => {
            for (p, &sp) in s1.iter().enumerate() {
                for (q, &sq) in s2.iter().enumerate() {
                    sum += term.eval(profile[p * nq + q], (sp * sq) as u64);
                }
            }
        }
    }
    sum
}

/// Block-term change from fusing clusters `c1` and `c2` along `dim`.
pub(crate) fn merge_blocks_delta(
    dim: Dim,
    c1: usize,
    c2: usize,
    stats: &BlockStats,
    part: &TriPartition,
    term: &BlockTerm,
    current: impl Fn(usize) -> f64,
) -> f64 {
    let (o1, o2) = dim.others();
    let (s1, s2) = (part.sizes(o1), part.sizes(o2));
    let n = (part.sizes(dim)[c1] + part.sizes(dim)[c2]) as u64;
    let mut sum = 0.0;
    for (p, &sp) in s1.iter().enumerate() {
        for (q, &sq) in s2.iter().enumerate() {
            let f1 = stats.flat_along(dim, c1, p, q);
            let f2 = stats.flat_along(dim, c2, p, q);
            let s = stats.as_slice()[f1] + stats.as_slice()[f2];
            sum += term.eval(s, n * (sp * sq) as u64) - current(f1) - current(f2);
        }
    }
    sum
}

fn fresh_terms<'a>(
    stats: &'a BlockStats,
    part: &'a TriPartition,
    term: &'a BlockTerm,
) -> impl Fn(usize) -> f64 + 'a {
    let (ng, nd) = (stats.g(), stats.d());
    move |f| {
        let (k, g, d) = (f / (ng * nd), (f / nd) % ng, f % nd);
        term.eval(stats.as_slice()[f], BlockStats::r(part, k, g, d))
    }
}

fn check_cluster(dim: Dim, c: usize, part: &TriPartition) -> Result<()> {
    let bound = part.n_clusters(dim);
    if c >= bound {
        return Err(Error::IndexOutOfRange {
            what: "cluster",
            index: c,
            bound,
        });
    }
    Ok(())
}

/// ICL change from moving element `idx` along `dim` to `target`.
///
/// `profile` is the element's profile under `part` (see
/// [`crate::stats::profile`]); `stats` must be in sync with `part`. Only the
/// blocks of the source and target clusters and one label term are
/// touched.
pub fn delta_move(
    dim: Dim,
    idx: usize,
    target: Target,
    stats: &BlockStats,
    profile: &Profile,
    part: &TriPartition,
    h: &Hyperparams,
) -> Result<f64> {
    h.validate()?;
    check_stats(stats, part)?;
    let bound = part.len(dim);
    if idx >= bound {
        return Err(Error::IndexOutOfRange {
            what: dim.name(),
            index: idx,
            bound,
        });
    }
    if profile.shape() != stats.profile_shape(dim) {
        return Err(Error::Contract(format!(
            "profile shape {:?} does not match {:?}",
            profile.shape(),
            stats.profile_shape(dim)
        )));
    }
    let src = part.labels(dim)[idx];
    let sizes = part.sizes(dim);
    let tgt = match target {
        Target::Cluster(t) => {
            check_cluster(dim, t, part)?;
            if t == src {
                return Err(Error::NoOpMove {
                    dim,
                    index: idx,
                    reason: "target is the current cluster",
                });
            }
            Some(t)
        }
        Target::New if sizes[src] == 1 => {
            return Err(Error::NoOpMove {
                dim,
                index: idx,
                reason: "element is already a singleton",
            })
        }
        Target::New => None,
    };

    let term = BlockTerm::new(h);
    let current = fresh_terms(stats, part, &term);
    let prof = profile.as_slice();
    let blocks = source_delta(dim, src, prof, stats, part, &term, &current)
        + target_delta(dim, tgt, prof, stats, part, &term, &current);
    let labels = LabelTerm::new(h.concentration(dim), part.len(dim)).move_delta(
        sizes.len(),
        sizes[src],
        tgt.map_or(0, |t| sizes[t]),
    );
    Ok(blocks + labels)
}

/// ICL change from replacing clusters `c1` and `c2` along `dim` by their union.
pub fn delta_merge(
    dim: Dim,
    c1: usize,
    c2: usize,
    stats: &BlockStats,
    part: &TriPartition,
    h: &Hyperparams,
) -> Result<f64> {
    h.validate()?;
    check_stats(stats, part)?;
    check_cluster(dim, c1, part)?;
    check_cluster(dim, c2, part)?;
    if c1 == c2 {
        return Err(Error::Contract(format!(
            "cannot merge cluster {c1} with itself"
        )));
    }
    let term = BlockTerm::new(h);
    let current = fresh_terms(stats, part, &term);
    let sizes = part.sizes(dim);
    let blocks = merge_blocks_delta(dim, c1, c2, stats, part, &term, &current);
    let labels = LabelTerm::new(h.concentration(dim), part.len(dim)).merge_delta(
        sizes.len(),
        sizes[c1],
        sizes[c2],
    );
    Ok(blocks + labels)
}
