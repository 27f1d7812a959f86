//! Sample the 50 × 50 × 24 benchmark, fit it and compare with the truth.
//!
//! `cargo run --release --example simulate_and_fit -- [seed] [restarts]`

use dynlbm::icl::icl_exact;
use dynlbm::search::{multi_restart, SearchConfig};
use dynlbm::simulate::{partition_ari, sample, GenSpec};

fn main() -> dynlbm::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed"));
    let restarts: usize = args.next().map_or(10, |s| s.parse().expect("restarts"));

    let spec = GenSpec::benchmark(seed);
    let (tensor, truth) = sample(&spec)?;
    println!(
        "sampled {:?} tensor with {} events",
        tensor.shape(),
        tensor.total()
    );

    let mut cfg = SearchConfig::for_tensor(&tensor);
    cfg.restarts = restarts;
    cfg.seed = 1000 + seed;
    let start = std::time::Instant::now();
    let fit = multi_restart(&tensor, &cfg)?;
    let elapsed = start.elapsed();

    let truth_icl = icl_exact(&tensor, &truth, &cfg.hyper)?.total;
    let ari = partition_ari(&fit.partition, &truth)?;
    println!(
        "fitted K={} G={} D={} in {elapsed:.2?}",
        fit.partition.k(),
        fit.partition.g(),
        fit.partition.d()
    );
    println!(
        "ICL fitted {:.1}, at true labels {truth_icl:.1}",
        fit.icl.total
    );
    println!(
        "ARI rows {:.3}, columns {:.3}, intervals {:.3}",
        ari[0], ari[1], ari[2]
    );
    println!(
        "best restart {} after {} rounds",
        fit.restart_index, fit.n_sweeps
    );
    for (round, icl) in &fit.trace {
        println!("  round {round:>3}: {icl:.1}");
    }
    Ok(())
}
