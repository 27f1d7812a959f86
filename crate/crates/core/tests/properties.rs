mod common;

use dynlbm::hyper::Hyperparams;
use dynlbm::icl::{
    delta_merge, delta_move, icl_exact, log_dirichlet_multinomial, log_gp_block, Target,
};
use dynlbm::ingest::{self, BinningSpec, ContactLog, NodeSets, RawContact};
use dynlbm::partition::{Dim, TriPartition};
use dynlbm::search::{fit, FitState, SearchConfig};
use dynlbm::simulate::adjusted_rand_index;
use dynlbm::stats::{block_stats, profile};
use dynlbm::tensor::CountTensor;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use common::*;

fn hyper() -> impl Strategy<Value = Hyperparams> {
    (
        0.1f64..5.0,
        0.1f64..5.0,
        0.1f64..5.0,
        0.1f64..5.0,
        0.1f64..5.0,
        0.25f64..4.0,
    )
        .prop_map(|(a, b, alpha, delta, gamma, delta_t)| Hyperparams {
            a,
            b,
            alpha,
            delta,
            gamma,
            delta_t,
        })
}

/// Dense counts, their tensor and a random partition with up to 3 clusters per axis.
fn instance() -> impl Strategy<Value = (Vec<Vec<Vec<u64>>>, CountTensor, TriPartition)> {
    (1usize..=6, 1usize..=6, 1usize..=6, any::<u64>()).prop_map(|(n, m, u, seed)| {
        let mut r = rng(seed);
        let x = random_dense(&mut r, [n, m, u], 6);
        let t = tensor_from_dense(&x);
        let mut labels = |len: usize| (0..len).map(|_| r.random_range(0..3)).collect::<Vec<_>>();
        let p = TriPartition::from_labels(labels(n), labels(m), labels(u)).unwrap();
        (x, t, p)
    })
}

fn dim() -> impl Strategy<Value = Dim> {
    prop_oneof![Just(Dim::Row), Just(Dim::Col), Just(Dim::Time)]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn ln_gamma_oracle_agrees_with_closed_forms(n in 1u64..200) {
        prop_assert!(close(ln_gamma(n as f64), ln_factorial(n - 1), 1e-12));
        let half = ln_gamma(0.5) - 0.5 * std::f64::consts::PI.ln();
        prop_assert!(half.abs() < 1e-12);
    }

    #[test]
    fn icl_exact_matches_naive_oracle((x, t, p) in instance(), h in hyper()) {
        let got = icl_exact(&t, &p, &h).unwrap();
        prop_assert!(close(got.total, naive_icl_part(&x, &p, &h), 1e-10));
        prop_assert_eq!(got.total, got.likelihood_term + got.prior_term);
    }

    #[test]
    fn likelihood_decomposes_into_block_terms((_x, t, p) in instance(), h in hyper()) {
        let stats = block_stats(&t, &p).unwrap();
        let mut sum = 0.0;
        for k in 0..p.k() {
            for g in 0..p.g() {
                for d in 0..p.d() {
                    let r = dynlbm::stats::BlockStats::r(&p, k, g, d);
                    sum += log_gp_block(stats.s(k, g, d), r, &h).unwrap();
                }
            }
        }
        let v = icl_exact(&t, &p, &h).unwrap();
        prop_assert!(close(v.likelihood_term + t.log_factorial_constant(), sum, 1e-12));
        let prior = log_dirichlet_multinomial(p.sizes(Dim::Row), h.alpha).unwrap()
            + log_dirichlet_multinomial(p.sizes(Dim::Col), h.delta).unwrap()
            + log_dirichlet_multinomial(p.sizes(Dim::Time), h.gamma).unwrap();
        prop_assert!(close(v.prior_term, prior, 1e-12));
    }

    #[test]
    fn icl_is_invariant_to_relabelling((_x, t, p) in instance(), h in hyper(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut q = p.clone();
        for d in Dim::ALL {
            let mut perm: Vec<usize> = (0..q.n_clusters(d)).collect();
            perm.shuffle(&mut r);
            q.relabel(d, &perm).unwrap();
        }
        let a = icl_exact(&t, &p, &h).unwrap().total;
        let b = icl_exact(&t, &q, &h).unwrap().total;
        prop_assert!(close(a, b, 1e-12));
    }

    #[test]
    fn block_totals_are_conserved((_x, t, p) in instance()) {
        let stats = block_stats(&t, &p).unwrap();
        prop_assert_eq!(stats.total(), t.total());
        let mut cells = 0u64;
        for k in 0..p.k() {
            for g in 0..p.g() {
                for d in 0..p.d() {
                    cells += dynlbm::stats::BlockStats::r(&p, k, g, d);
                }
            }
        }
        prop_assert_eq!(cells as usize, t.n_rows() * t.n_cols() * t.n_intervals());
    }

    #[test]
    fn move_delta_matches_recompute((x, t, p) in instance(), h in hyper(), d in dim(), pick in any::<u64>()) {
        let mut r = rng(pick);
        let idx = r.random_range(0..p.len(d));
        let src = p.labels(d)[idx];
        let q = p.n_clusters(d);
        let stats = block_stats(&t, &p).unwrap();
        let prof = profile(&t, &p, d, idx).unwrap();
        let before = naive_icl_part(&x, &p, &h);
        for target in (0..q).filter(|&c| c != src).map(Target::Cluster).chain([Target::New]) {
            let mut labels = Dim::ALL.map(|e| p.labels(e).to_vec());
            labels[d.index()][idx] = match target { Target::Cluster(c) => c, Target::New => q };
            let [c, w, y] = labels;
            let after = TriPartition::from_labels(c, w, y).unwrap();
            let res = delta_move(d, idx, target, &stats, &prof, &p, &h);
            if target == Target::New && p.sizes(d)[src] == 1 {
                prop_assert!(res.is_err());
                continue;
            }
            let want = naive_icl_part(&x, &after, &h) - before;
            prop_assert!(close(res.unwrap(), want, 1e-9));
        }
    }

    #[test]
    fn merge_delta_is_symmetric_and_matches_recompute((x, t, p) in instance(), h in hyper(), d in dim()) {
        let stats = block_stats(&t, &p).unwrap();
        let before = naive_icl_part(&x, &p, &h);
        let q = p.n_clusters(d);
        for c1 in 0..q {
            for c2 in c1 + 1..q {
                let mut labels = Dim::ALL.map(|e| p.labels(e).to_vec());
                labels[d.index()].iter_mut().filter(|l| **l == c2).for_each(|l| *l = c1);
                let [c, w, y] = labels;
                let after = TriPartition::from_labels(c, w, y).unwrap();
                let want = naive_icl_part(&x, &after, &h) - before;
                let a = delta_merge(d, c1, c2, &stats, &p, &h).unwrap();
                let b = delta_merge(d, c2, c1, &stats, &p, &h).unwrap();
                prop_assert!(close(a, want, 1e-9));
                prop_assert!(close(a, b, 1e-12));
            }
        }
    }

    #[test]
    fn search_updates_match_exact_icl((_x, t, p) in instance(), h in hyper(), seed in any::<u64>()) {
        let mut state = FitState::new(&t, p, h).unwrap().with_audit();
        let mut r = rng(seed);
        for _ in 0..5 {
            let mut moved = false;
            for d in Dim::ALL {
                moved |= dynlbm::search::greedy_sweep(d, &mut state, &mut r).unwrap();
            }
            moved |= dynlbm::search::merge_pass(&mut state).unwrap();
            if !moved {
                break;
            }
        }
        prop_assert!(state.in_sync());
        for &(predicted, realised) in state.audit_log().unwrap() {
            prop_assert!(predicted > 0.0);
            prop_assert!(close(predicted, realised, 1e-9));
        }
    }

    #[test]
    fn fits_are_deterministic_and_increasing((_x, t, _p) in instance(), seed in any::<u64>(), restarts in 1usize..4) {
        let mut cfg = SearchConfig::for_tensor(&t);
        cfg.seed = seed;
        cfg.restarts = restarts;
        let a = dynlbm::search::multi_restart(&t, &cfg).unwrap();
        let b = dynlbm::search::multi_restart(&t, &cfg).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.trace.windows(2).all(|w| w[1].1 > w[0].1));
        prop_assert!(close(a.icl.total, icl_exact(&t, &a.partition, &cfg.hyper).unwrap().total, 1e-9));
        // a single fit is restart 0 of a multi-restart run
        let single = fit(&t, &cfg).unwrap();
        prop_assert!(a.icl.total >= single.icl.total);
    }

    #[test]
    fn ari_is_symmetric_and_relabel_invariant(seed in any::<u64>(), n in 2usize..40) {
        let mut r = rng(seed);
        let p: Vec<usize> = (0..n).map(|_| r.random_range(0..4)).collect();
        let q: Vec<usize> = (0..n).map(|_| r.random_range(0..4)).collect();
        let pq = adjusted_rand_index(&p, &q).unwrap();
        prop_assert!(close(pq, adjusted_rand_index(&q, &p).unwrap(), 1e-12));
        prop_assert!((-1.0..=1.0).contains(&pq));
        let renamed: Vec<usize> = p.iter().map(|&l| 7 - l).collect();
        prop_assert!(close(adjusted_rand_index(&renamed, &q).unwrap(), pq, 1e-12));
        prop_assert!(close(adjusted_rand_index(&p, &renamed).unwrap(), 1.0, 1e-12));
    }

    #[test]
    fn aggregation_ignores_record_order(seed in any::<u64>(), n in 1usize..80) {
        let mut r = rng(seed);
        let contacts: Vec<RawContact> = (0..n)
            .map(|_| {
                let a = r.random_range(0..6);
                let b = (a + r.random_range(1..6)) % 6;
                RawContact::new(r.random_range(0..3600), a.to_string(), b.to_string())
            })
            .collect();
        let spec = BinningSpec::new(0, 3600, 900).unwrap();
        let mut shuffled = contacts.clone();
        shuffled.shuffle(&mut r);
        for nodes in [NodeSets::Bipartite, NodeSets::Unipartite] {
            let a = ingest::aggregate(&ContactLog::from_contacts(contacts.clone(), nodes), &spec).unwrap();
            let b = ingest::aggregate(&ContactLog::from_contacts(shuffled.clone(), nodes), &spec).unwrap();
            let mut ka = a.keyed_cells();
            let mut kb = b.keyed_cells();
            ka.sort();
            kb.sort();
            prop_assert_eq!(ka, kb);
            prop_assert_eq!(a.tensor.total(), n as u64);
        }
    }

    #[test]
    fn csv_quad_round_trips((_x, t, _p) in instance()) {
        let net = ingest::Network::anonymous(t, 1.0);
        let mut buf = Vec::new();
        ingest::write_csv_quad(&net, &mut buf).unwrap();
        let back = ingest::parse_csv_quad(buf.as_slice(), NodeSets::Bipartite)
            .unwrap()
            .into_network(Some(net.tensor.n_intervals()), 1.0)
            .unwrap();
        let mut a = net.keyed_cells();
        let mut b = back.keyed_cells();
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);
    }
}
