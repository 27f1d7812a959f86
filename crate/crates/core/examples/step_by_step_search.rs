//! Drive the greedy search by hand: sweeps over each axis, then merges,
//! printing the ICL after every step.

use dynlbm::hyper::Hyperparams;
use dynlbm::partition::{Dim, TriPartition};
use dynlbm::search::{greedy_sweep, merge_pass, FitState};
use dynlbm::simulate::{partition_ari, sample, GenSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> dynlbm::error::Result<()> {
    let spec = GenSpec::additive(
        30,
        30,
        12,
        vec![0.5, 3.0],
        vec![0.5, 1.5, 3.0],
        vec![0.3, 2.0],
        7,
    );
    let (tensor, truth) = sample(&spec)?;

    // start from singletons everywhere
    let start = TriPartition::from_labels((0..30).collect(), (0..30).collect(), (0..12).collect())?;
    let mut state = FitState::new(&tensor, start, Hyperparams::default())?.with_audit();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    println!(
        "start: ICL {:.2}, clusters {:?}",
        state.icl_total(),
        state.partition().counts()
    );

    for round in 1.. {
        let mut moved = false;
        for dim in Dim::ALL {
            let changed = greedy_sweep(dim, &mut state, &mut rng)?;
            moved |= changed;
            println!(
                "round {round} {:<4} sweep: ICL {:.2}, clusters {:?}{}",
                dim.name(),
                state.icl_total(),
                state.partition().counts(),
                if changed { "" } else { " (no move)" }
            );
        }
        if !moved {
            moved = merge_pass(&mut state)?;
            println!(
                "round {round} merges: ICL {:.2}, clusters {:?}",
                state.icl_total(),
                state.partition().counts()
            );
        }
        if !moved {
            break;
        }
    }

    let worst = state
        .audit_log()
        .unwrap_or_default()
        .iter()
        .map(|(p, r)| (p - r).abs())
        .fold(0.0, f64::max);
    println!(
        "{} accepted updates, largest predicted-vs-realised gap {worst:.2e}",
        state.audit_log().map_or(0, |l| l.len())
    );
    println!("statistics in sync: {}", state.in_sync());
    println!(
        "ARI against truth: {:?}",
        partition_ari(state.partition(), &truth)?
    );
    Ok(())
}
