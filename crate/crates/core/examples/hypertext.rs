//! First day of a conference contact log (`t<TAB>i<TAB>j`, 20 s records)
//! binned into quarter-hours, fitted, with the time clusters printed per
//! interval as a text chart.
//!
//! `cargo run --release --example hypertext -- <contact_list.dat> [restarts]`

use std::io::BufReader;

use dynlbm::icl::icl_exact;
use dynlbm::ingest::{aggregate, parse_tsv, BinningSpec, NodeSets};
use dynlbm::partition::TriPartition;
use dynlbm::report::{order_time_clusters, time_cluster_intensity};
use dynlbm::search::{multi_restart, SearchConfig};
use dynlbm::stats::block_stats;

fn main() -> dynlbm::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let Some(path) = args.next() else {
        eprintln!("usage: hypertext <contact_list.dat> [restarts]");
        std::process::exit(1);
    };
    let restarts: usize = args.next().map_or(10, |s| s.parse().expect("restarts"));

    let mut log = parse_tsv(
        BufReader::new(std::fs::File::open(&path)?),
        NodeSets::Unipartite,
    )?;
    let spec = BinningSpec::new(0, 86_400, 900)?;
    log.contacts.retain(|c| spec.bin_of(c.t).is_some());
    let network = aggregate(&log, &spec)?;
    println!(
        "{} attendees, {} records on day one",
        log.rows.len(),
        network.tensor.total()
    );

    let mut cfg = SearchConfig::for_tensor(&network.tensor);
    cfg.restarts = restarts;
    let fit = multi_restart(&network.tensor, &cfg)?;
    let [n, m, u] = network.tensor.shape();
    let baseline = icl_exact(&network.tensor, &TriPartition::single(n, m, u)?, &cfg.hyper)?.total;
    println!(
        "ICL {:.1} (one cluster per axis: {baseline:.1}), K={} G={} D={}",
        fit.icl.total,
        fit.partition.k(),
        fit.partition.g(),
        fit.partition.d()
    );

    let mut part = fit.partition.clone();
    order_time_clusters(&network, &mut part, &cfg.hyper)?;
    let stats = block_stats(&network.tensor, &part)?;
    for (d, rate) in time_cluster_intensity(&stats, &part, &cfg.hyper)
        .iter()
        .enumerate()
    {
        println!("time cluster {d}: mean intensity {rate:.4}");
    }
    let totals = network.tensor.interval_totals();
    let scale = totals.iter().copied().max().unwrap_or(1).max(1) as f64 / 60.0;
    for (q, total) in totals.iter().enumerate() {
        let (h, min) = (q / 4, (q % 4) * 15);
        let bar = "#".repeat((*total as f64 / scale).round() as usize);
        println!("{h:02}:{min:02}  C{}  {total:>5} {bar}", part.y()[q]);
    }
    Ok(())
}
