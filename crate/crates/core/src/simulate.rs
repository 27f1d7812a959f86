//! Sampling from the non-stationary Poisson block model, and partition
//! recovery scoring.

use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Poisson;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::{Dim, TriPartition};
use crate::tensor::{CountTensor, EventRecord};

/// Attempts at drawing a label vector with no empty true cluster.
pub const MAX_LABEL_ATTEMPTS: usize = 100;

/// `K × G × D` block rates.
pub type RateTable = Vec<Vec<Vec<f64>>>;

/// Block rates, either tabulated or as a sum of per-axis effects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Rates {
    Table(RateTable),
    Additive {
        s1: Vec<f64>,
        s2: Vec<f64>,
        s3: Vec<f64>,
    },
}

impl Rates {
    pub fn table(&self) -> Result<RateTable> {
        match self {
            Rates::Table(t) => Ok(t.clone()),
            Rates::Additive { s1, s2, s3 } => lambda_additive(s1, s2, s3),
        }
    }
}

/// Generator settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n_rows: usize,
    pub n_cols: usize,
    pub n_intervals: usize,
    /// Row, column and time cluster proportions; their lengths give K, G, D.
    pub proportions: [Vec<f64>; 3],
    pub lambda: Rates,
    #[serde(default = "one")]
    pub delta_t: f64,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> f64 {
    1.0
}

impl GenSpec {
    /// Equal proportions over the clusters implied by additive effects.
    pub fn additive(
        n_rows: usize,
        n_cols: usize,
        n_intervals: usize,
        s1: Vec<f64>,
        s2: Vec<f64>,
        s3: Vec<f64>,
        seed: u64,
    ) -> Self {
        let uniform = |q: usize| vec![1.0 / q as f64; q];
        Self {
            n_rows,
            n_cols,
            n_intervals,
            proportions: [uniform(s1.len()), uniform(s2.len()), uniform(s3.len())],
            lambda: Rates::Additive { s1, s2, s3 },
            delta_t: 1.0,
            seed,
        }
    }

    /// The 50 × 50 × 24 benchmark with three clusters per axis and rates
    /// `s1[k] + s2[g] + s3[d]`, `s1 = [0, 2, 4]`, `s2 = s3 = [0.5, 1, 1.5]`.
    pub fn benchmark(seed: u64) -> Self {
        Self::additive(
            50,
            50,
            24,
            vec![0.0, 2.0, 4.0],
            vec![0.5, 1.0, 1.5],
            vec![0.5, 1.0, 1.5],
            seed,
        )
    }

    pub fn cluster_counts(&self) -> [usize; 3] {
        [
            self.proportions[0].len(),
            self.proportions[1].len(),
            self.proportions[2].len(),
        ]
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.n_rows, self.n_cols, self.n_intervals]
    }

    /// Checks the spec and returns the rate table.
    pub fn validate(&self) -> Result<RateTable> {
        if !(self.delta_t.is_finite() && self.delta_t > 0.0) {
            return Err(Error::InvalidHyperparameter {
                name: "delta_t",
                value: self.delta_t,
            });
        }
        for dim in Dim::ALL {
            let p = &self.proportions[dim.index()];
            let n = self.shape()[dim.index()];
            if p.is_empty() {
                return Err(Error::Config(format!(
                    "{} proportions are empty",
                    dim.name()
                )));
            }
            if p.len() > n {
                return Err(Error::Config(format!(
                    "{} clusters requested for {} {} elements",
                    p.len(),
                    n,
                    dim.name()
                )));
            }
            if p.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
                return Err(Error::Config(format!(
                    "{} proportions must be > 0",
                    dim.name()
                )));
            }
            let sum: f64 = p.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::Config(format!(
                    "{} proportions sum to {sum}, not 1",
                    dim.name()
                )));
            }
        }
        let table = self.lambda.table()?;
        let [k, g, d] = self.cluster_counts();
        let shape_ok = table.len() == k
            && table
                .iter()
                .all(|m| m.len() == g && m.iter().all(|v| v.len() == d));
        if !shape_ok {
            return Err(Error::Config(format!("lambda must be a {k}x{g}x{d} table")));
        }
        if table
            .iter()
            .flatten()
            .flatten()
            .any(|&l| !(l.is_finite() && l > 0.0))
        {
            return Err(Error::Config("lambda entries must be > 0".into()));
        }
        Ok(table)
    }
}

/// `λ[k][g][d] = s1[k] + s2[g] + s3[d]`; every rate must be positive.
pub fn lambda_additive(s1: &[f64], s2: &[f64], s3: &[f64]) -> Result<RateTable> {
    if s1.is_empty() || s2.is_empty() || s3.is_empty() {
        return Err(Error::Config("additive effects must be non-empty".into()));
    }
    let table: RateTable = s1
        .iter()
        .map(|a| {
            s2.iter()
                .map(|b| s3.iter().map(|c| a + b + c).collect())
                .collect()
        })
        .collect();
    if let Some(bad) = table.iter().flatten().flatten().find(|&&l| !l.is_finite() || l <= 0.0) {
        return Err(Error::Config(format!(
            "additive rate {bad} is not positive"
        )));
    }
    Ok(table)
}

fn draw_labels(
    n: usize,
    proportions: &[f64],
    dim: Dim,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    let dist = WeightedIndex::new(proportions)
        .map_err(|e| Error::Config(format!("{} proportions: {e}", dim.name())))?;
    for _ in 0..MAX_LABEL_ATTEMPTS {
        let labels: Vec<usize> = (0..n).map(|_| dist.sample(rng)).collect();
        let mut seen = vec![false; proportions.len()];
        labels.iter().for_each(|&l| seen[l] = true);
        if seen.iter().all(|&s| s) {
            return Ok(labels);
        }
    }
    Err(Error::EmptyTrueCluster {
        dim,
        attempts: MAX_LABEL_ATTEMPTS,
    })
}

/// Draws labels from the proportions, then every cell from
/// `Poisson(Δ·λ[c_i][w_j][y_u])`. Returns the tensor and the true labels.
pub fn sample(spec: &GenSpec) -> Result<(CountTensor, TriPartition)> {
    let lambda = spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let c = draw_labels(spec.n_rows, &spec.proportions[0], Dim::Row, &mut rng)?;
    let w = draw_labels(spec.n_cols, &spec.proportions[1], Dim::Col, &mut rng)?;
    let y = draw_labels(spec.n_intervals, &spec.proportions[2], Dim::Time, &mut rng)?;

    let [k, g, d] = spec.cluster_counts();
    let mut block_dists = Vec::with_capacity(k * g * d);
    for table in lambda.iter().flatten().flatten() {
        let mean = spec.delta_t * table;
        block_dists.push(
            Poisson::new(mean).map_err(|e| Error::Config(format!("Poisson mean {mean}: {e}")))?,
        );
    }

    let mut records = Vec::new();
    for (i, &ci) in c.iter().enumerate() {
        for (j, &wj) in w.iter().enumerate() {
            for (u, &yu) in y.iter().enumerate() {
                let dist = &block_dists[(ci * g + wj) * d + yu];
                let count = dist.sample(&mut rng) as u64;
                if count > 0 {
                    records.push(EventRecord::new(i, j, u, count));
                }
            }
        }
    }
    let tensor = CountTensor::from_records(spec.n_rows, spec.n_cols, spec.n_intervals, records)?;
    let part = TriPartition::from_labels(c, w, y)?;
    Ok((tensor, part))
}

fn choose2(n: u64) -> f64 {
    (n * n.saturating_sub(1) / 2) as f64
}

/// Adjusted Rand index between two labelings of the same elements.
pub fn adjusted_rand_index(p: &[usize], q: &[usize]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            what: "label vector",
            expected: p.len(),
            actual: q.len(),
        });
    }
    let n = p.len() as u64;
    if n < 2 {
        return Ok(1.0);
    }
    let np = p.iter().max().map_or(0, |m| m + 1);
    let nq = q.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![0u64; np * nq];
    let mut rows = vec![0u64; np];
    let mut cols = vec![0u64; nq];
    for (&a, &b) in p.iter().zip(q) {
        table[a * nq + b] += 1;
        rows[a] += 1;
        cols[b] += 1;
    }
    let index: f64 = table.iter().map(|&x| choose2(x)).sum();
    let sum_rows: f64 = rows.iter().map(|&x| choose2(x)).sum();
    let sum_cols: f64 = cols.iter().map(|&x| choose2(x)).sum();
    let expected = sum_rows * sum_cols / choose2(n);
    let max = 0.5 * (sum_rows + sum_cols);
    if max == expected {
        // both partitions trivial in the same way
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

/// ARI along each axis, `[row, col, time]`.
pub fn partition_ari(fitted: &TriPartition, truth: &TriPartition) -> Result<[f64; 3]> {
    Ok([
        adjusted_rand_index(fitted.c(), truth.c())?,
        adjusted_rand_index(fitted.w(), truth.w())?,
        adjusted_rand_index(fitted.y(), truth.y())?,
    ])
}
