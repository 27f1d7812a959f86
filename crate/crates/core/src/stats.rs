//! Block sufficient statistics and per-element count profiles.
//!
//! The integrated likelihood depends on the data only through the block
//! totals `S[k][g][d]` and the block capacities
//! `R[k][g][d] = |A_k|·|B_g|·|C_d|`. A single element's contribution to
//! those totals is its profile: its counts aggregated by the clusters of the
//! two other axes.

use crate::error::{Error, Result};
use crate::partition::{Dim, TriPartition};
use crate::tensor::CountTensor;

/// The `K × G × D` block totals, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockStats {
    counts: [usize; 3],
    s: Vec<u64>,
}

impl BlockStats {
    pub fn zeros(k: usize, g: usize, d: usize) -> Self {
        Self {
            counts: [k, g, d],
            s: vec![0; k * g * d],
        }
    }

    pub fn k(&self) -> usize {
        self.counts[0]
    }

    pub fn g(&self) -> usize {
        self.counts[1]
    }

    pub fn d(&self) -> usize {
        self.counts[2]
    }

    pub fn counts(&self) -> [usize; 3] {
        self.counts
    }

    #[inline]
    fn flat(&self, k: usize, g: usize, d: usize) -> usize {
        (k * self.counts[1] + g) * self.counts[2] + d
    }

    /// `S[k][g][d]`.
    pub fn s(&self, k: usize, g: usize, d: usize) -> u64 {
        self.s[self.flat(k, g, d)]
    }

    /// `R[k][g][d] = |A_k|·|B_g|·|C_d|`.
    pub fn r(part: &TriPartition, k: usize, g: usize, d: usize) -> u64 {
        (part.sizes(Dim::Row)[k] * part.sizes(Dim::Col)[g] * part.sizes(Dim::Time)[d]) as u64
    }

    /// Raw row-major block totals.
    pub fn as_slice(&self) -> &[u64] {
        &self.s
    }

    pub fn total(&self) -> u64 {
        self.s.iter().sum()
    }

    /// Flat index of the block that has cluster `x` on `dim` and clusters
    /// `(p, q)` on `dim.others()`.
    #[inline]
    pub(crate) fn flat_along(&self, dim: Dim, x: usize, p: usize, q: usize) -> usize {
        match dim {
            Dim::Row => self.flat(x, p, q),
            Dim::Col => self.flat(p, x, q),
            Dim::Time => self.flat(p, q, x),
        }
    }

    /// Shape `(P, Q)` of profiles along `dim`.
    pub(crate) fn profile_shape(&self, dim: Dim) -> (usize, usize) {
        let (o1, o2) = dim.others();
        (self.counts[o1.index()], self.counts[o2.index()])
    }

    /// Moves one element's profile from block slice `src` to `tgt`.
    pub(crate) fn apply_move(&mut self, dim: Dim, src: usize, tgt: usize, profile: &[u64]) {
        let (_, nq) = self.profile_shape(dim);
        for (pq, &c) in profile.iter().enumerate().filter(|(_, c)| **c > 0) {
            let (p, q) = (pq / nq, pq % nq);
            let a = self.flat_along(dim, src, p, q);
            let b = self.flat_along(dim, tgt, p, q);
            self.s[a] -= c;
            self.s[b] += c;
        }
    }

    /// Rebuilds storage with a changed cluster count along `dim`; `source`
    /// maps each new index on `dim` to an old index (or `None` for zeros).
    fn reshape(&mut self, dim: Dim, source: &[Option<usize>]) {
        let mut counts = self.counts;
        counts[dim.index()] = source.len();
        let mut next = BlockStats::zeros(counts[0], counts[1], counts[2]);
        let (np, nq) = self.profile_shape(dim);
        for (new_x, old_x) in source.iter().enumerate() {
            let Some(old_x) = *old_x else { continue };
            for p in 0..np {
                for q in 0..nq {
                    let v = self.s[self.flat_along(dim, old_x, p, q)];
                    let f = next.flat_along(dim, new_x, p, q);
                    next.s[f] = v;
                }
            }
        }
        *self = next;
    }

    /// Appends an empty cluster along `dim`.
    pub(crate) fn add_cluster(&mut self, dim: Dim) {
        let n = self.counts[dim.index()];
        let source: Vec<_> = (0..n).map(Some).chain(std::iter::once(None)).collect();
        self.reshape(dim, &source);
    }

    /// Drops cluster `idx` along `dim`, moving the last cluster into its slot
    /// (same convention as the partition).
    pub(crate) fn swap_remove_cluster(&mut self, dim: Dim, idx: usize) {
        let n = self.counts[dim.index()];
        let mut source: Vec<_> = (0..n).map(Some).collect();
        source.swap_remove(idx);
        self.reshape(dim, &source);
    }

    /// Adds the slice of `absorbed` into `kept`, then swap-removes `absorbed`.
    pub(crate) fn merge(&mut self, dim: Dim, kept: usize, absorbed: usize) {
        let (np, nq) = self.profile_shape(dim);
        for p in 0..np {
            for q in 0..nq {
                let a = self.flat_along(dim, absorbed, p, q);
                let b = self.flat_along(dim, kept, p, q);
                self.s[b] += self.s[a];
                self.s[a] = 0;
            }
        }
        self.swap_remove_cluster(dim, absorbed);
    }
}

/// Computes `S` from scratch.
pub fn block_stats(tensor: &CountTensor, part: &TriPartition) -> Result<BlockStats> {
    part.check_shape(tensor.shape())?;
    let mut stats = BlockStats::zeros(part.k(), part.g(), part.d());
    let (c, w, y) = (part.c(), part.w(), part.y());
    for e in tensor.entries() {
        let f = stats.flat(c[e.row], w[e.col], y[e.interval]);
        stats.s[f] += e.count;
    }
    Ok(stats)
}

/// Counts of one element aggregated by the clusters of the two other axes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    shape: (usize, usize),
    data: Vec<u64>,
}

impl Profile {
    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn get(&self, p: usize, q: usize) -> u64 {
        self.data[p * self.shape.1 + q]
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.data
    }

    pub fn total(&self) -> u64 {
        self.data.iter().sum()
    }

    /// Nested rows, convenient for comparisons.
    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        self.data
            .chunks(self.shape.1)
            .map(<[u64]>::to_vec)
            .collect()
    }
}

/// Fills `buf` with the profile of element `idx` along `dim` (row-major over
/// `dim.others()`).
pub(crate) fn profile_into(
    tensor: &CountTensor,
    part: &TriPartition,
    dim: Dim,
    idx: usize,
    buf: &mut Vec<u64>,
) {
    let (o1, o2) = dim.others();
    let nq = part.n_clusters(o2);
    buf.clear();
    buf.resize(part.n_clusters(o1) * nq, 0);
    let (l1, l2) = (part.labels(o1), part.labels(o2));
    for e in tensor.slice(dim, idx) {
        buf[l1[e.coord(o1)] * nq + l2[e.coord(o2)]] += e.count;
    }
}

/// Profile of element `idx` along `dim`.
pub fn profile(tensor: &CountTensor, part: &TriPartition, dim: Dim, idx: usize) -> Result<Profile> {
    part.check_shape(tensor.shape())?;
    let bound = tensor.len(dim);
    if idx >= bound {
        return Err(Error::IndexOutOfRange {
            what: dim.name(),
            index: idx,
            bound,
        });
    }
    let (o1, o2) = dim.others();
    let mut data = Vec::new();
    profile_into(tensor, part, dim, idx, &mut data);
    Ok(Profile {
        shape: (part.n_clusters(o1), part.n_clusters(o2)),
        data,
    })
}

/// `G × D` profile of row node `i`.
pub fn row_profile(tensor: &CountTensor, part: &TriPartition, i: usize) -> Result<Profile> {
    profile(tensor, part, Dim::Row, i)
}

/// `K × D` profile of column node `j`.
pub fn col_profile(tensor: &CountTensor, part: &TriPartition, j: usize) -> Result<Profile> {
    profile(tensor, part, Dim::Col, j)
}

/// `K × G` profile of interval `u`.
pub fn interval_profile(tensor: &CountTensor, part: &TriPartition, u: usize) -> Result<Profile> {
    profile(tensor, part, Dim::Time, u)
}
