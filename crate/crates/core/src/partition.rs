//! Joint labelling of rows, columns and time intervals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the three clustered axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dim {
    Row,
    Col,
    Time,
}

impl Dim {
    pub const ALL: [Dim; 3] = [Dim::Row, Dim::Col, Dim::Time];

    pub fn index(self) -> usize {
        match self {
            Dim::Row => 0,
            Dim::Col => 1,
            Dim::Time => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Dim::Row => "row",
            Dim::Col => "col",
            Dim::Time => "time",
        }
    }

    /// The two remaining axes, in natural order.
    pub fn others(self) -> (Dim, Dim) {
        match self {
            Dim::Row => (Dim::Col, Dim::Time),
            Dim::Col => (Dim::Row, Dim::Time),
            Dim::Time => (Dim::Row, Dim::Col),
        }
    }
}

impl std::str::FromStr for Dim {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "row" => Ok(Dim::Row),
            "col" => Ok(Dim::Col),
            "time" => Ok(Dim::Time),
            other => Err(Error::Config(format!("unknown dimension {other:?}"))),
        }
    }
}

/// Labels `c` (rows), `w` (columns), `y` (intervals) with cluster sizes.
///
/// Clusters are never empty: labels along each axis always cover
/// `0..n_clusters` exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPartition", into = "RawPartition")]
pub struct TriPartition {
    labels: [Vec<usize>; 3],
    sizes: [Vec<usize>; 3],
}

#[derive(Serialize, Deserialize)]
struct RawPartition {
    c: Vec<usize>,
    w: Vec<usize>,
    y: Vec<usize>,
}

impl TryFrom<RawPartition> for TriPartition {
    type Error = Error;

    fn try_from(raw: RawPartition) -> Result<Self> {
        TriPartition::from_labels(raw.c, raw.w, raw.y)
    }
}

impl From<TriPartition> for RawPartition {
    fn from(p: TriPartition) -> Self {
        let [c, w, y] = p.labels;
        RawPartition { c, w, y }
    }
}

/// Relabels so the used labels become `0..q`, preserving their relative order.
fn compact(labels: &mut [usize]) -> Vec<usize> {
    let max = labels.iter().copied().max().unwrap_or(0);
    let mut used = vec![false; max + 1];
    for &l in labels.iter() {
        used[l] = true;
    }
    let map: Vec<usize> = used
        .iter()
        .scan(0, |next, &u| {
            let id = *next;
            *next += usize::from(u);
            Some(id)
        })
        .collect();
    let mut sizes = vec![0usize; used.iter().filter(|&&u| u).count()];
    for l in labels.iter_mut() {
        *l = map[*l];
        sizes[*l] += 1;
    }
    sizes
}

/// Outcome of relocating one element, so block statistics can mirror it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MoveOutcome {
    /// A fresh cluster was appended at this index.
    pub created: Option<usize>,
    /// The source cluster emptied; it was swap-removed at this index.
    pub removed: Option<usize>,
}

impl TriPartition {
    /// Builds a partition from arbitrary non-negative labels. Unused label
    /// values are compacted away.
    pub fn from_labels(c: Vec<usize>, w: Vec<usize>, y: Vec<usize>) -> Result<Self> {
        let mut labels = [c, w, y];
        let mut sizes: [Vec<usize>; 3] = Default::default();
        for dim in Dim::ALL {
            let l = &mut labels[dim.index()];
            if l.is_empty() {
                return Err(Error::Contract(format!("{} labels are empty", dim.name())));
            }
            sizes[dim.index()] = compact(l);
        }
        Ok(Self { labels, sizes })
    }

    /// Every element of every axis in one cluster.
    pub fn single(n_rows: usize, n_cols: usize, n_intervals: usize) -> Result<Self> {
        Self::from_labels(vec![0; n_rows], vec![0; n_cols], vec![0; n_intervals])
    }

    pub fn c(&self) -> &[usize] {
        &self.labels[0]
    }

    pub fn w(&self) -> &[usize] {
        &self.labels[1]
    }

    pub fn y(&self) -> &[usize] {
        &self.labels[2]
    }

    /// Number of row clusters `K`.
    pub fn k(&self) -> usize {
        self.sizes[0].len()
    }

    /// Number of column clusters `G`.
    pub fn g(&self) -> usize {
        self.sizes[1].len()
    }

    /// Number of time clusters `D`.
    pub fn d(&self) -> usize {
        self.sizes[2].len()
    }

    pub fn labels(&self, dim: Dim) -> &[usize] {
        &self.labels[dim.index()]
    }

    pub fn sizes(&self, dim: Dim) -> &[usize] {
        &self.sizes[dim.index()]
    }

    pub fn n_clusters(&self, dim: Dim) -> usize {
        self.sizes[dim.index()].len()
    }

    /// Number of elements along `dim`.
    pub fn len(&self, dim: Dim) -> usize {
        self.labels[dim.index()].len()
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.len(Dim::Row), self.len(Dim::Col), self.len(Dim::Time)]
    }

    /// Cluster counts `[K, G, D]`.
    pub fn counts(&self) -> [usize; 3] {
        [self.k(), self.g(), self.d()]
    }

    pub(crate) fn check_shape(&self, shape: [usize; 3]) -> Result<()> {
        for dim in Dim::ALL {
            let expected = shape[dim.index()];
            let actual = self.len(dim);
            if expected != actual {
                return Err(Error::DimensionMismatch {
                    what: dim.name(),
                    expected,
                    actual,
                });
            }
        }
        Ok(())
    }

    /// Moves element `idx` of `dim` to `target`, or to a new cluster when
    /// `target` is `None`. An emptied source is swap-removed: the last
    /// cluster takes its index.
    pub(crate) fn move_element(
        &mut self,
        dim: Dim,
        idx: usize,
        target: Option<usize>,
    ) -> MoveOutcome {
        let d = dim.index();
        let src = self.labels[d][idx];
        let mut created = None;
        let tgt = match target {
            Some(t) => t,
            None => {
                self.sizes[d].push(0);
                created = Some(self.sizes[d].len() - 1);
                self.sizes[d].len() - 1
            }
        };
        debug_assert_ne!(src, tgt);
        self.labels[d][idx] = tgt;
        self.sizes[d][tgt] += 1;
        self.sizes[d][src] -= 1;
        let removed = if self.sizes[d][src] == 0 {
            self.swap_remove_cluster(dim, src);
            Some(src)
        } else {
            None
        };
        MoveOutcome { created, removed }
    }

    /// Relabels every member of `absorbed` into `kept`, then swap-removes
    /// the emptied `absorbed` cluster.
    pub(crate) fn merge_clusters(&mut self, dim: Dim, kept: usize, absorbed: usize) {
        let d = dim.index();
        for l in self.labels[d].iter_mut().filter(|l| **l == absorbed) {
            *l = kept;
        }
        self.sizes[d][kept] += self.sizes[d][absorbed];
        self.sizes[d][absorbed] = 0;
        self.swap_remove_cluster(dim, absorbed);
    }

    fn swap_remove_cluster(&mut self, dim: Dim, idx: usize) {
        let d = dim.index();
        debug_assert_eq!(self.sizes[d][idx], 0);
        let last = self.sizes[d].len() - 1;
        if idx != last {
            for l in self.labels[d].iter_mut().filter(|l| **l == last) {
                *l = idx;
            }
        }
        self.sizes[d].swap_remove(idx);
    }

    /// Applies `perm[old] = new` to the labels of one axis.
    pub fn relabel(&mut self, dim: Dim, perm: &[usize]) -> Result<()> {
        let d = dim.index();
        let q = self.sizes[d].len();
        let mut seen = vec![false; q];
        if perm.len() != q {
            return Err(Error::DimensionMismatch {
                what: "permutation",
                expected: q,
                actual: perm.len(),
            });
        }
        for &p in perm {
            if p >= q || std::mem::replace(&mut seen[p], true) {
                return Err(Error::Contract(format!("{perm:?} is not a permutation")));
            }
        }
        let mut sizes = vec![0; q];
        for (old, &new) in perm.iter().enumerate() {
            sizes[new] = self.sizes[d][old];
        }
        for l in self.labels[d].iter_mut() {
            *l = perm[*l];
        }
        self.sizes[d] = sizes;
        Ok(())
    }
}
