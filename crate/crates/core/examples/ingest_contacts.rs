//! Turn a timestamped contact log into a count tensor and a tensor dump.
//!
//! Without arguments a small synthetic log is used. With arguments:
//! `cargo run --example ingest_contacts -- <log.tsv> <t_start> <t_end> <bin_width> <out.csv>`

use std::io::Cursor;
use std::path::PathBuf;

use dynlbm::ingest::{aggregate, parse_tsv, write_dump, BinningSpec, NodeSets};

fn synthetic_log() -> String {
    let mut log = String::from("# timestamp\tid\tid\n");
    for t in (0..7200).step_by(20) {
        // a morning pair, a pair that meets at a break, and a steady pair
        if t < 1800 && t % 60 == 0 {
            log.push_str(&format!("{t}\t17\t4\n"));
        }
        if (3600..4500).contains(&t) {
            log.push_str(&format!("{t}\t4\t23\n{t}\t23\t9\n"));
        }
        if t % 300 == 0 {
            log.push_str(&format!("{t}\t9\t17\n"));
        }
    }
    log
}

fn main() -> dynlbm::error::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (text, spec, out) = if args.len() == 5 {
        let text = std::fs::read_to_string(&args[0])?;
        let num = |s: &str| s.parse::<i64>().expect("integer");
        (
            text,
            BinningSpec::new(num(&args[1]), num(&args[2]), num(&args[3]))?,
            PathBuf::from(&args[4]),
        )
    } else {
        let out = std::env::temp_dir().join("dynlbm_contacts.csv");
        (synthetic_log(), BinningSpec::new(0, 7200, 900)?, out)
    };

    let mut log = parse_tsv(Cursor::new(text), NodeSets::Unipartite)?;
    let before = log.contacts.len();
    log.contacts.retain(|c| spec.bin_of(c.t).is_some());
    println!(
        "{} records, {} inside the horizon, {} people",
        before,
        log.contacts.len(),
        log.rows.len()
    );

    let network = aggregate(&log, &spec)?;
    println!(
        "tensor {:?}, {} events",
        network.tensor.shape(),
        network.tensor.total()
    );
    for (u, total) in network.tensor.interval_totals().iter().enumerate() {
        let start = spec.t_start + u as i64 * spec.bin_width;
        println!(
            "  interval {u:>3} [{start:>6} s): {total:>5} {}",
            "#".repeat((*total as usize).min(60))
        );
    }
    let sidecar = write_dump(&network, None, &out)?;
    println!("wrote {} and {}", out.display(), sidecar.display());
    Ok(())
}
