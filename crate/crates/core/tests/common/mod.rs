//! Independent reference implementations shared by the integration tests.
//!
//! Nothing here calls into the crate's ICL code: log-gamma comes from a
//! shifted Stirling series, log-factorials from plain sums, and block
//! statistics from dense loops over every cell.

#![allow(dead_code)]

use dynlbm::hyper::Hyperparams;
use dynlbm::partition::TriPartition;
use dynlbm::tensor::{CountTensor, EventRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `ln Γ(x)` for `x > 0`: recurrence up to `x ≥ 15`, then Stirling.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0);
    let mut z = x;
    let mut shift = 0.0;
    while z < 15.0 {
        shift += z.ln();
        z += 1.0;
    }
    let z2 = z * z;
    let series = 1.0 / (12.0 * z) - 1.0 / (360.0 * z * z2) + 1.0 / (1260.0 * z * z2 * z2)
        - 1.0 / (1680.0 * z * z2 * z2 * z2);
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * std::f64::consts::PI).ln() + series - shift
}

pub fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

fn cluster_sizes(labels: &[usize]) -> Vec<usize> {
    let q = labels.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0; q];
    labels.iter().for_each(|&l| sizes[l] += 1);
    sizes
}

fn dirichlet_multinomial(labels: &[usize], conc: f64) -> f64 {
    let sizes = cluster_sizes(labels);
    let q = sizes.len() as f64;
    let n = labels.len() as f64;
    ln_gamma(conc * q) - q * ln_gamma(conc)
        + sizes
            .iter()
            .map(|&s| ln_gamma(s as f64 + conc))
            .sum::<f64>()
        - ln_gamma(n + conc * q)
}

/// ICL by direct evaluation over a dense tensor. Labels must be compact.
pub fn naive_icl(
    x: &[Vec<Vec<u64>>],
    c: &[usize],
    w: &[usize],
    y: &[usize],
    h: &Hyperparams,
) -> f64 {
    let (sa, sb, sc) = (cluster_sizes(c), cluster_sizes(w), cluster_sizes(y));
    let (k, g, d) = (sa.len(), sb.len(), sc.len());
    let mut s = vec![vec![vec![0u64; d]; g]; k];
    let mut log_fact = 0.0;
    for (i, plane) in x.iter().enumerate() {
        for (j, row) in plane.iter().enumerate() {
            for (u, &v) in row.iter().enumerate() {
                s[c[i]][w[j]][y[u]] += v;
                log_fact += ln_factorial(v);
            }
        }
    }
    let mut lik = -log_fact;
    for kk in 0..k {
        for gg in 0..g {
            for dd in 0..d {
                let r = (sa[kk] * sb[gg] * sc[dd]) as f64;
                let sv = s[kk][gg][dd] as f64;
                lik += h.a * h.b.ln() - ln_gamma(h.a) + sv * h.delta_t.ln() + ln_gamma(sv + h.a)
                    - (sv + h.a) * (h.delta_t * r + h.b).ln();
            }
        }
    }
    lik + dirichlet_multinomial(c, h.alpha)
        + dirichlet_multinomial(w, h.delta)
        + dirichlet_multinomial(y, h.gamma)
}

pub fn naive_icl_part(x: &[Vec<Vec<u64>>], p: &TriPartition, h: &Hyperparams) -> f64 {
    naive_icl(x, p.c(), p.w(), p.y(), h)
}

pub fn dense(t: &CountTensor) -> Vec<Vec<Vec<u64>>> {
    let [n, m, u] = t.shape();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..u).map(|v| t.get(i, j, v)).collect())
                .collect()
        })
        .collect()
}

pub fn tensor_from_dense(x: &[Vec<Vec<u64>>]) -> CountTensor {
    let (n, m, u) = (x.len(), x[0].len(), x[0][0].len());
    let records = (0..n).flat_map(|i| (0..m).flat_map(move |j| (0..u).map(move |v| (i, j, v))));
    CountTensor::from_records(
        n,
        m,
        u,
        records.map(|(i, j, v)| EventRecord::new(i, j, v, x[i][j][v])),
    )
    .unwrap()
}

pub fn random_dense(rng: &mut ChaCha8Rng, shape: [usize; 3], max_count: u64) -> Vec<Vec<Vec<u64>>> {
    let [n, m, u] = shape;
    (0..n)
        .map(|_| {
            (0..m)
                .map(|_| (0..u).map(|_| rng.random_range(0..=max_count)).collect())
                .collect()
        })
        .collect()
}

/// Every labelling of `n` elements into at most `max_q` clusters, in
/// canonical (first-occurrence) form, so each set partition appears once.
pub fn set_partitions(n: usize, max_q: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, n: usize, max_q: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let used = prefix.iter().max().map_or(0, |m| m + 1);
        for l in 0..=used.min(max_q - 1) {
            prefix.push(l);
            go(prefix, n, max_q, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::with_capacity(n), n, max_q, &mut out);
    out
}

/// Canonical form of a labelling: clusters renumbered by first occurrence.
pub fn canonical(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `|a − b| ≤ tol · max(|a|, |b|, 1)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
