//! How recovery of the row partition degrades as row effects get closer.
//!
//! `cargo run --release --example separation_sensitivity -- [seeds]`

use dynlbm::search::{multi_restart, SearchConfig};
use dynlbm::simulate::{partition_ari, sample, GenSpec};

fn main() -> dynlbm::error::Result<()> {
    let seeds: u64 = std::env::args()
        .nth(1)
        .map_or(10, |s| s.parse().expect("seed count"));
    let s = vec![0.5, 1.0, 1.5];
    println!(
        "{:>6}  {:>9}  {:>9}  {:>9}  exact",
        "scale", "mean ARI", "min ARI", "median"
    );
    for scale in [1.0, 0.3, 0.1, 0.05, 0.03] {
        let s1: Vec<f64> = [0.0, 2.0, 4.0].iter().map(|x| x * scale).collect();
        let mut aris = Vec::new();
        for seed in 0..seeds {
            let spec = GenSpec::additive(50, 50, 24, s1.clone(), s.clone(), s.clone(), seed);
            let (tensor, truth) = sample(&spec)?;
            let mut cfg = SearchConfig::for_tensor(&tensor);
            cfg.restarts = 10;
            cfg.seed = 1000 + seed;
            let fit = multi_restart(&tensor, &cfg)?;
            aris.push(partition_ari(&fit.partition, &truth)?[0]);
        }
        aris.sort_by(f64::total_cmp);
        let mean = aris.iter().sum::<f64>() / aris.len() as f64;
        let n = aris.len();
        let median = if n % 2 == 1 {
            aris[n / 2]
        } else {
            0.5 * (aris[n / 2 - 1] + aris[n / 2])
        };
        let exact = aris.iter().filter(|&&a| a == 1.0).count();
        println!(
            "{scale:>6}  {mean:>9.4}  {:>9.4}  {median:>9.4}  {exact}/{n}",
            aris[0]
        );
    }
    Ok(())
}
