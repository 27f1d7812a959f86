//! Sparse `N × M × U` interaction count tensor.
//!
//! Cell `(i, j, u)` holds the number of interactions between row node `i`
//! and column node `j` during time interval `u`. Only positive cells are
//! stored. Entries are kept sorted by `(row, col, interval)` and indexed by
//! row, column and interval so the per-element profiles needed by the
//! search can be assembled by touching only that element's own entries.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};
use crate::partition::Dim;

/// One observed interaction cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EventRecord {
    pub row: usize,
    pub col: usize,
    pub interval: usize,
    pub count: u64,
}

impl EventRecord {
    pub fn new(row: usize, col: usize, interval: usize, count: u64) -> Self {
        Self {
            row,
            col,
            interval,
            count,
        }
    }

    fn key(&self) -> (usize, usize, usize) {
        (self.row, self.col, self.interval)
    }

    /// Coordinate of this record along `dim`.
    pub fn coord(&self, dim: Dim) -> usize {
        match dim {
            Dim::Row => self.row,
            Dim::Col => self.col,
            Dim::Time => self.interval,
        }
    }
}

/// Immutable sparse count tensor with cached marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTensor {
    shape: [usize; 3],
    entries: Vec<EventRecord>,
    // Per dimension: CSR offsets into `index`, which holds positions in `entries`.
    offsets: [Vec<usize>; 3],
    index: [Vec<u32>; 3],
    total: u64,
    log_factorial_constant: f64,
}

impl CountTensor {
    /// Builds a tensor from records. Records sharing a cell are summed and
    /// zero counts are dropped.
    pub fn from_records(
        n_rows: usize,
        n_cols: usize,
        n_intervals: usize,
        records: impl IntoIterator<Item = EventRecord>,
    ) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 || n_intervals == 0 {
            return Err(Error::Contract(format!(
                "tensor dimensions must be positive, got {n_rows}x{n_cols}x{n_intervals}"
            )));
        }
        let shape = [n_rows, n_cols, n_intervals];
        let mut entries = Vec::new();
        for r in records {
            for (dim, bound) in Dim::ALL.iter().zip(shape) {
                let index = r.coord(*dim);
                if index >= bound {
                    return Err(Error::IndexOutOfRange {
                        what: dim.name(),
                        index,
                        bound,
                    });
                }
            }
            if r.count > 0 {
                entries.push(r);
            }
        }
        entries.sort_unstable_by_key(EventRecord::key);
        entries.dedup_by(|next, kept| {
            if next.key() == kept.key() {
                kept.count += next.count;
                true
            } else {
                false
            }
        });

        let total = entries.iter().map(|e| e.count).sum();
        let log_factorial_constant = entries.iter().map(|e| ln_factorial(e.count)).sum();

        let build = |dim: Dim| {
            let n = shape[dim.index()];
            let mut offsets = vec![0usize; n + 1];
            for e in &entries {
                offsets[e.coord(dim) + 1] += 1;
            }
            for i in 0..n {
                offsets[i + 1] += offsets[i];
            }
            let mut cursor = offsets.clone();
            let mut index = vec![0u32; entries.len()];
            for (pos, e) in entries.iter().enumerate() {
                let c = e.coord(dim);
                index[cursor[c]] = pos as u32;
                cursor[c] += 1;
            }
            (offsets, index)
        };
        let (o0, i0) = build(Dim::Row);
        let (o1, i1) = build(Dim::Col);
        let (o2, i2) = build(Dim::Time);

        Ok(Self {
            shape,
            entries,
            offsets: [o0, o1, o2],
            index: [i0, i1, i2],
            total,
            log_factorial_constant,
        })
    }

    /// An all-zero tensor of the given shape.
    pub fn zeros(n_rows: usize, n_cols: usize, n_intervals: usize) -> Result<Self> {
        Self::from_records(n_rows, n_cols, n_intervals, std::iter::empty())
    }

    pub fn n_rows(&self) -> usize {
        self.shape[0]
    }

    pub fn n_cols(&self) -> usize {
        self.shape[1]
    }

    pub fn n_intervals(&self) -> usize {
        self.shape[2]
    }

    /// Size along `dim`.
    pub fn len(&self, dim: Dim) -> usize {
        self.shape[dim.index()]
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    /// Sum of all counts.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// `Σ log(n!)` over all cells. Label-invariant.
    pub fn log_factorial_constant(&self) -> f64 {
        self.log_factorial_constant
    }

    /// Positive cells sorted by `(row, col, interval)`.
    pub fn entries(&self) -> &[EventRecord] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Count in one cell (zero when absent).
    pub fn get(&self, row: usize, col: usize, interval: usize) -> u64 {
        self.entries
            .binary_search_by_key(&(row, col, interval), EventRecord::key)
            .map(|p| self.entries[p].count)
            .unwrap_or(0)
    }

    /// All stored entries whose coordinate along `dim` equals `idx`.
    pub fn slice(&self, dim: Dim, idx: usize) -> impl Iterator<Item = &EventRecord> + '_ {
        let d = dim.index();
        let range = self.offsets[d][idx]..self.offsets[d][idx + 1];
        self.index[d][range]
            .iter()
            .map(move |&p| &self.entries[p as usize])
    }

    /// Total count of the slice along `dim` at `idx`.
    pub fn slice_total(&self, dim: Dim, idx: usize) -> u64 {
        self.slice(dim, idx).map(|e| e.count).sum()
    }

    /// Per-interval totals, the aggregated activity curve.
    pub fn interval_totals(&self) -> Vec<u64> {
        (0..self.n_intervals())
            .map(|u| self.slice_total(Dim::Time, u))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CountTensor {
        CountTensor::from_records(
            2,
            3,
            2,
            [
                EventRecord::new(1, 2, 1, 4),
                EventRecord::new(0, 0, 0, 3),
                EventRecord::new(0, 0, 0, 2),
                EventRecord::new(1, 0, 1, 0),
                EventRecord::new(0, 2, 1, 1),
            ],
        )
        .unwrap()
    }

    #[test]
    fn duplicates_are_summed_and_zeros_dropped() {
        let t = sample();
        assert_eq!(t.nnz(), 3);
        assert_eq!(t.get(0, 0, 0), 5);
        assert_eq!(t.get(1, 0, 1), 0);
        assert_eq!(t.total(), 10);
    }

    #[test]
    fn log_factorial_constant_matches_cells() {
        let t = sample();
        let expected = (120f64).ln() + (24f64).ln();
        assert!((t.log_factorial_constant() - expected).abs() < 1e-12);

        let ones = CountTensor::from_records(
            2,
            2,
            1,
            [EventRecord::new(0, 1, 0, 1), EventRecord::new(1, 0, 0, 1)],
        )
        .unwrap();
        assert_eq!(ones.log_factorial_constant(), 0.0);
    }

    #[test]
    fn slices_cover_each_entry_once_per_dimension() {
        let t = sample();
        for dim in Dim::ALL {
            let sum: u64 = (0..t.len(dim)).map(|i| t.slice_total(dim, i)).sum();
            assert_eq!(sum, t.total());
        }
        let row1: Vec<_> = t.slice(Dim::Row, 1).copied().collect();
        assert_eq!(row1, vec![EventRecord::new(1, 2, 1, 4)]);
        assert_eq!(t.interval_totals(), vec![5, 5]);
    }

    #[test]
    fn out_of_bounds_record_is_rejected() {
        let err = CountTensor::from_records(1, 1, 1, [EventRecord::new(0, 0, 1, 1)]).unwrap_err();
        assert!(matches!(err, Error::IndexOutOfRange { what: "time", .. }));
        assert!(CountTensor::zeros(0, 1, 1).is_err());
    }
}
