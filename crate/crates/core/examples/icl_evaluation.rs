//! Score partitions of a small tensor and check incremental updates
//! against full evaluations.

use dynlbm::hyper::Hyperparams;
use dynlbm::icl::{delta_merge, delta_move, icl_exact, Target};
use dynlbm::partition::{Dim, TriPartition};
use dynlbm::stats::{block_stats, row_profile};
use dynlbm::tensor::{CountTensor, EventRecord};

fn main() -> dynlbm::error::Result<()> {
    // rows 0 and 1 are busy in interval 0, rows 2 and 3 in interval 1
    let mut records = Vec::new();
    for j in 0..3 {
        for i in 0..2 {
            records.push(EventRecord::new(i, j, 0, 6));
            records.push(EventRecord::new(i + 2, j, 1, 5));
        }
    }
    records.push(EventRecord::new(2, 0, 0, 1));
    let tensor = CountTensor::from_records(4, 3, 2, records)?;
    let h = Hyperparams::default();

    let candidates = [
        ("one cluster", TriPartition::single(4, 3, 2)?),
        (
            "rows split",
            TriPartition::from_labels(vec![0, 0, 1, 1], vec![0; 3], vec![0, 0])?,
        ),
        (
            "rows and intervals split",
            TriPartition::from_labels(vec![0, 0, 1, 1], vec![0; 3], vec![0, 1])?,
        ),
        (
            "all singletons",
            TriPartition::from_labels(vec![0, 1, 2, 3], vec![0, 1, 2], vec![0, 1])?,
        ),
    ];
    for (name, part) in &candidates {
        let v = icl_exact(&tensor, part, &h)?;
        println!(
            "{name:<26} ICL {:>9.4} = likelihood {:>9.4} + prior {:>8.4}",
            v.total, v.likelihood_term, v.prior_term
        );
    }

    let part = &candidates[2].1;
    let stats = block_stats(&tensor, part)?;
    let before = icl_exact(&tensor, part, &h)?.total;

    let profile = row_profile(&tensor, part, 2)?;
    let delta = delta_move(Dim::Row, 2, Target::Cluster(0), &stats, &profile, part, &h)?;
    let moved = TriPartition::from_labels(vec![0, 0, 0, 1], vec![0; 3], vec![0, 1])?;
    let full = icl_exact(&tensor, &moved, &h)?.total - before;
    println!("move row 2 to cluster 0: delta {delta:.6}, full recompute {full:.6}");

    let delta = delta_merge(Dim::Time, 0, 1, &stats, part, &h)?;
    let merged = TriPartition::from_labels(vec![0, 0, 1, 1], vec![0; 3], vec![0, 0])?;
    let full = icl_exact(&tensor, &merged, &h)?.total - before;
    println!("merge the two time clusters: delta {delta:.6}, full recompute {full:.6}");
    Ok(())
}
