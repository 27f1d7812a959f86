//! Run reports and label files written by the command-line front end.
//!
//! Time clusters in a report are relabelled by increasing mean posterior
//! intensity, so cluster 0 is the quietest class of intervals and the last
//! cluster the busiest. The ICL does not depend on labels, so this changes
//! nothing but presentation.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyper::Hyperparams;
use crate::icl::IclValue;
use crate::ingest::{BinningSpec, Network, NodeSets};
use crate::partition::{Dim, TriPartition};
use crate::search::{FitResult, SearchConfig};
use crate::stats::{block_stats, BlockStats};

/// Version tag written into every report.
pub const REPORT_SPEC_VERSION: u32 = 1;

/// JSON schema of [`RunReport`].
pub const REPORT_SCHEMA: &str = include_str!("../schema/run_report.schema.json");

/// Echo of the inputs that produced a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub input: String,
    pub format: String,
    pub nodes: NodeSets,
    pub binning: Option<BinningSpec>,
    pub search: SearchConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub round: usize,
    pub icl: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalSummary {
    pub interval: usize,
    pub cluster: usize,
    pub total_count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeClusterSummary {
    pub cluster: usize,
    pub n_intervals: usize,
    pub total_count: u64,
    /// Posterior mean rate `(S + a) / (Δ·R + b)` averaged over all
    /// row-cluster × column-cluster blocks of this time cluster.
    pub mean_intensity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterCounts {
    pub k: usize,
    pub g: usize,
    pub d: usize,
}

/// Everything a fit run reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub spec_version: u32,
    pub config: RunConfig,
    pub shape: [usize; 3],
    pub icl: IclValue,
    pub clusters: ClusterCounts,
    pub n_sweeps: usize,
    pub restart_index: usize,
    pub trace: Vec<TracePoint>,
    pub labels: TriPartition,
    pub intervals: Vec<IntervalSummary>,
    pub time_clusters: Vec<TimeClusterSummary>,
}

/// Mean posterior block rate of each time cluster.
pub fn time_cluster_intensity(
    stats: &BlockStats,
    part: &TriPartition,
    h: &Hyperparams,
) -> Vec<f64> {
    let blocks = (stats.k() * stats.g()) as f64;
    (0..stats.d())
        .map(|d| {
            let mut sum = 0.0;
            for k in 0..stats.k() {
                for g in 0..stats.g() {
                    let r = BlockStats::r(part, k, g, d) as f64;
                    sum += (stats.s(k, g, d) as f64 + h.a) / (h.delta_t * r + h.b);
                }
            }
            sum / blocks
        })
        .collect()
}

/// Relabels time clusters by increasing mean intensity.
pub fn order_time_clusters(
    network: &Network,
    part: &mut TriPartition,
    h: &Hyperparams,
) -> Result<()> {
    let stats = block_stats(&network.tensor, part)?;
    let intensity = time_cluster_intensity(&stats, part, h);
    let mut order: Vec<usize> = (0..intensity.len()).collect();
    order.sort_by(|&x, &y| intensity[x].total_cmp(&intensity[y]).then(x.cmp(&y)));
    let mut perm = vec![0; order.len()];
    for (rank, &old) in order.iter().enumerate() {
        perm[old] = rank;
    }
    part.relabel(Dim::Time, &perm)
}

impl RunReport {
    pub fn build(network: &Network, fit: &FitResult, config: RunConfig) -> Result<Self> {
        let h = config.search.hyper;
        let mut labels = fit.partition.clone();
        order_time_clusters(network, &mut labels, &h)?;
        let stats = block_stats(&network.tensor, &labels)?;
        let intensity = time_cluster_intensity(&stats, &labels, &h);

        let totals = network.tensor.interval_totals();
        let intervals: Vec<_> = totals
            .iter()
            .enumerate()
            .map(|(u, &total_count)| IntervalSummary {
                interval: u,
                cluster: labels.y()[u],
                total_count,
            })
            .collect();
        let time_clusters = intensity
            .iter()
            .enumerate()
            .map(|(d, &mean_intensity)| TimeClusterSummary {
                cluster: d,
                n_intervals: labels.sizes(Dim::Time)[d],
                total_count: intervals
                    .iter()
                    .filter(|i| i.cluster == d)
                    .map(|i| i.total_count)
                    .sum(),
                mean_intensity,
            })
            .collect();

        Ok(Self {
            spec_version: REPORT_SPEC_VERSION,
            config,
            shape: network.tensor.shape(),
            icl: fit.icl,
            clusters: ClusterCounts {
                k: labels.k(),
                g: labels.g(),
                d: labels.d(),
            },
            n_sweeps: fit.n_sweeps,
            restart_index: fit.restart_index,
            trace: fit
                .trace
                .iter()
                .map(|&(round, icl)| TracePoint { round, icl })
                .collect(),
            labels,
            intervals,
            time_clusters,
        })
    }
}

/// Writes `dimension,index,id,cluster` rows for all three axes.
pub fn write_assignments<W: Write>(network: &Network, part: &TriPartition, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["dimension", "index", "id", "cluster"])?;
    for dim in Dim::ALL {
        for (i, &c) in part.labels(dim).iter().enumerate() {
            let id = match dim {
                Dim::Row => network.rows.id(i).to_owned(),
                Dim::Col => network.cols.id(i).to_owned(),
                Dim::Time => i.to_string(),
            };
            w.write_record([dim.name(), &i.to_string(), &id, &c.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct AssignmentRow {
    dimension: Dim,
    index: usize,
    #[allow(dead_code)]
    id: String,
    cluster: usize,
}

/// Reads an assignments file back into a partition of the given shape.
pub fn read_assignments<R: Read>(input: R, shape: [usize; 3]) -> Result<TriPartition> {
    let mut labels: [Vec<Option<usize>>; 3] = shape.map(|n| vec![None; n]);
    for row in csv::Reader::from_reader(input).deserialize() {
        let row: AssignmentRow = row?;
        let slot =
            labels[row.dimension.index()]
                .get_mut(row.index)
                .ok_or(Error::IndexOutOfRange {
                    what: row.dimension.name(),
                    index: row.index,
                    bound: shape[row.dimension.index()],
                })?;
        *slot = Some(row.cluster);
    }
    let [c, w, y] = labels.map(|l| l.into_iter().collect::<Option<Vec<_>>>());
    match (c, w, y) {
        (Some(c), Some(w), Some(y)) => TriPartition::from_labels(c, w, y),
        _ => Err(Error::Contract(
            "assignments do not cover every element".into(),
        )),
    }
}

/// Writes `interval,cluster,total_count`, ready for plotting.
pub fn write_time_clusters<W: Write>(report: &RunReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in &report.intervals {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
