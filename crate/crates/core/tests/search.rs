mod common;

use dynlbm::hyper::Hyperparams;
use dynlbm::icl::{delta_merge, icl_exact};
use dynlbm::partition::{Dim, TriPartition};
use dynlbm::search::{fit, greedy_sweep, merge_pass, multi_restart, FitState, SearchConfig};
use dynlbm::simulate::{adjusted_rand_index, sample, GenSpec, Rates};
use dynlbm::stats::{block_stats, BlockStats};
use dynlbm::tensor::{CountTensor, EventRecord};

use common::*;

/// Global optimum of a 3×3×3 instance by enumeration with the naive oracle.
fn enumerate_best(x: &[Vec<Vec<u64>>], h: &Hyperparams) -> (f64, TriPartition) {
    let all = set_partitions(3, 3);
    let mut best = (f64::NEG_INFINITY, None);
    for c in &all {
        for w in &all {
            for y in &all {
                let v = naive_icl(x, c, w, y, h);
                if v > best.0 {
                    best = (
                        v,
                        Some(TriPartition::from_labels(c.clone(), w.clone(), y.clone()).unwrap()),
                    );
                }
            }
        }
    }
    (best.0, best.1.unwrap())
}

#[test]
fn global_optimum_is_a_fixed_point() {
    let h = Hyperparams::default();
    let mut r = rng(5);
    for _ in 0..10 {
        let x = random_dense(&mut r, [3, 3, 3], 5);
        let t = tensor_from_dense(&x);
        let (_, best) = enumerate_best(&x, &h);
        let mut state = FitState::new(&t, best.clone(), h).unwrap();
        for dim in Dim::ALL {
            assert!(!greedy_sweep(dim, &mut state, &mut r).unwrap());
        }
        assert!(!merge_pass(&mut state).unwrap());
        assert_eq!(state.partition(), &best);
    }
}

#[test]
fn tiny_instances_reach_the_enumerated_optimum() {
    let h = Hyperparams::default();
    let mut r = rng(6);
    for i in 0..10 {
        let x = random_dense(&mut r, [3, 3, 3], 5);
        let t = tensor_from_dense(&x);
        let (best, _) = enumerate_best(&x, &h);
        let mut cfg = SearchConfig::for_tensor(&t);
        cfg.restarts = 20;
        cfg.seed = i;
        let res = multi_restart(&t, &cfg).unwrap();
        assert!(
            close(res.icl.total, best, 1e-10),
            "{} vs {best}",
            res.icl.total
        );
    }
}

/// Rows 0..3 interact heavily with every column, rows 3..6 never do.
fn planted() -> CountTensor {
    let records = (0..3)
        .flat_map(|i| (0..4).flat_map(move |j| (0..2).map(move |u| EventRecord::new(i, j, u, 8))));
    CountTensor::from_records(6, 4, 2, records).unwrap()
}

#[test]
fn one_row_sweep_restores_a_planted_partition() {
    let t = planted();
    let x = dense(&t);
    let h = Hyperparams::default();
    let truth = vec![0, 0, 0, 1, 1, 1];
    // row 2 starts on the wrong side
    let start = TriPartition::from_labels(vec![0, 0, 1, 1, 1, 1], vec![0; 4], vec![0; 2]).unwrap();
    let fixed = TriPartition::from_labels(truth.clone(), vec![0; 4], vec![0; 2]).unwrap();
    assert!(naive_icl_part(&x, &fixed, &h) > naive_icl_part(&x, &start, &h));

    let mut state = FitState::new(&t, start, h).unwrap();
    assert!(greedy_sweep(Dim::Row, &mut state, &mut rng(1)).unwrap());
    assert_eq!(
        adjusted_rand_index(state.partition().c(), &truth).unwrap(),
        1.0
    );
    assert!(close(
        state.icl_total(),
        naive_icl_part(&x, state.partition(), &h),
        1e-9
    ));
}

#[test]
fn merges_collapse_singletons_on_noise() {
    let spec = GenSpec {
        n_rows: 6,
        n_cols: 6,
        n_intervals: 4,
        proportions: [vec![1.0], vec![1.0], vec![1.0]],
        lambda: Rates::Additive {
            s1: vec![1.0],
            s2: vec![0.5],
            s3: vec![0.5],
        },
        delta_t: 1.0,
        seed: 11,
    };
    let (t, _) = sample(&spec).unwrap();
    let x = dense(&t);
    let h = Hyperparams {
        alpha: 0.1,
        delta: 0.1,
        gamma: 0.1,
        ..Hyperparams::default()
    };
    let singletons =
        TriPartition::from_labels((0..6).collect(), (0..6).collect(), (0..4).collect()).unwrap();
    let before = naive_icl_part(&x, &singletons, &h);
    let mut state = FitState::new(&t, singletons, h).unwrap();
    assert!(merge_pass(&mut state).unwrap());
    let p = state.partition().clone();
    assert!(p.k() < 6 && p.g() < 6 && p.d() < 4);
    let after = naive_icl_part(&x, &p, &h);
    assert!(after > before);
    assert!(close(state.icl_total(), after, 1e-9));

    // no improving merge is left along any axis
    let stats = block_stats(&t, &p).unwrap();
    for dim in Dim::ALL {
        let q = p.n_clusters(dim);
        for c1 in 0..q {
            for c2 in c1 + 1..q {
                assert!(delta_merge(dim, c1, c2, &stats, &p, &h).unwrap() <= 0.0);
            }
        }
    }
}

#[test]
fn merge_pass_on_one_cluster_does_nothing() {
    let t = planted();
    let mut state = FitState::new(
        &t,
        TriPartition::single(6, 4, 2).unwrap(),
        Hyperparams::default(),
    )
    .unwrap();
    assert!(!merge_pass(&mut state).unwrap());
}

#[test]
fn single_restart_equals_fit_and_more_restarts_never_hurt() {
    let (t, _) = sample(&GenSpec::additive(
        12,
        10,
        6,
        vec![0.5, 3.0],
        vec![0.5, 2.0],
        vec![1.0],
        4,
    ))
    .unwrap();
    let mut cfg = SearchConfig::for_tensor(&t);
    cfg.seed = 42;
    assert_eq!(fit(&t, &cfg).unwrap(), multi_restart(&t, &cfg).unwrap());
    let mut last = f64::NEG_INFINITY;
    for restarts in 1..6 {
        cfg.restarts = restarts;
        let res = multi_restart(&t, &cfg).unwrap();
        assert!(res.icl.total >= last);
        assert!(res.restart_index < restarts);
        last = res.icl.total;
    }
}

#[test]
fn maintained_stats_match_a_recount_after_fits() {
    let mut r = rng(8);
    for seed in 0..20 {
        let x = random_dense(&mut r, [5, 4, 6], 3);
        let t = tensor_from_dense(&x);
        let mut cfg = SearchConfig::for_tensor(&t);
        cfg.seed = seed;
        let res = fit(&t, &cfg).unwrap();
        let stats = block_stats(&t, &res.partition).unwrap();
        let mut s = vec![0u64; res.partition.k() * res.partition.g() * res.partition.d()];
        for (i, plane) in x.iter().enumerate() {
            for (j, row) in plane.iter().enumerate() {
                for (u, &v) in row.iter().enumerate() {
                    let p = &res.partition;
                    s[(p.c()[i] * p.g() + p.w()[j]) * p.d() + p.y()[u]] += v;
                }
            }
        }
        assert_eq!(stats.as_slice(), s.as_slice());
        assert!(res.trace.first().unwrap().1 <= res.icl.total + 1e-9);
    }
}

#[test]
#[allow(clippy::needless_range_loop)]
fn sampled_blocks_concentrate_on_their_rates() {
    let spec = GenSpec::benchmark(3);
    let rates = spec.validate().unwrap();
    let (t, truth) = sample(&spec).unwrap();
    let stats = block_stats(&t, &truth).unwrap();
    let mut expected_total = 0.0;
    for k in 0..3 {
        for g in 0..3 {
            for d in 0..3 {
                let r = BlockStats::r(&truth, k, g, d) as f64;
                let mean = spec.delta_t * rates[k][g][d];
                let se = (mean / r).sqrt();
                let got = stats.s(k, g, d) as f64 / r;
                assert!(
                    (got - mean).abs() < 3.0 * se + 1e-12,
                    "block ({k},{g},{d}): {got} vs {mean}"
                );
                expected_total += r * mean;
            }
        }
    }
    let total = t.total() as f64;
    assert!((total - expected_total).abs() < 4.0 * expected_total.sqrt());
    assert_eq!(t.shape(), [50, 50, 24]);

    let (other, _) = sample(&GenSpec::benchmark(4)).unwrap();
    assert_ne!(t, other);
    assert!(icl_exact(&t, &truth, &Hyperparams::default())
        .unwrap()
        .total
        .is_finite());
}
