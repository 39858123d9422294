mod common;

use acdd_core::dynamics::{InitialCondition, SimConfig};
use acdd_core::graph::Graph;
use acdd_core::threshold::{check_case1, in_xi, verify_transition, Outcome, ThresholdSpec};
use common::{er, poly};
use proptest::prelude::*;

fn spec(tau: f64, alpha: f64) -> ThresholdSpec {
    ThresholdSpec {
        tau1: tau,
        tau2: tau,
        alpha,
        beta: alpha,
        strict: false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn membership_is_monotone(
        base in prop::collection::vec(0.0f64..1.0, 20),
        bump in prop::collection::vec(0.0f64..0.5, 20),
        tau in 0.05f64..0.95,
        seed in 0u64..100,
    ) {
        let g = er(20, 0.25, seed);
        let raised: Vec<f64> = base.iter().zip(&bump).map(|(b, d)| (b + d).min(1.0)).collect();
        for strict in [false, true] {
            if in_xi(&base, &g, tau, strict) {
                prop_assert!(in_xi(&raised, &g, tau, strict));
            }
        }
    }

    #[test]
    fn membership_limits(state in prop::collection::vec(1e-6f64..1.0, 20), seed in 0u64..100) {
        let g = er(20, 0.25, seed);
        prop_assert!(in_xi(&state, &g, 1e-9, true));
        prop_assert!(!in_xi(&state, &g, 1.0, true));
    }

    #[test]
    fn duality_swaps_outcomes(value in prop_oneof![0.15f64..0.4, 0.6f64..0.85], seed in 0u64..50) {
        let b = er(20, 0.3, seed);
        let r = er(20, 0.3, seed + 1000);
        let mut cfg = SimConfig::new(
            b,
            r,
            poly(&[0.0, 0.5, 1.0]),
            poly(&[1.0, -1.0]),
            InitialCondition::Constant { value },
            80.0,
        );
        cfg.record_every = 50;
        let s = spec(0.5, 0.9);
        let direct = verify_transition(&cfg, &s).unwrap();
        let dual = verify_transition(&cfg.dual(), &s.dual()).unwrap();
        prop_assert_ne!(direct.outcome, Outcome::Undecided);
        prop_assert_eq!(dual.outcome, direct.outcome.swapped());
    }
}

#[test]
fn satisfied_case1_implies_convergence_to_one() {
    // f(z) = α(2z − z²) exceeds αz below 1 and peaks at α; g ≡ 0.
    let alpha = 0.9;
    let f = poly(&[0.0, 2.0 * alpha, -alpha]);
    let g = poly(&[0.0]);
    let s = spec(0.6, alpha);
    let reports = check_case1(&f, &g, &s, 1000).unwrap();
    assert!(reports.iter().all(|r| r.satisfied), "{reports:?}");
    for graph in [Graph::complete(5), er(40, 0.2, 3)] {
        for lo in [0.6, 0.7, 0.9] {
            let mut cfg = SimConfig::new(
                graph.clone(),
                graph.clone(),
                f.clone(),
                g.clone(),
                InitialCondition::Uniform { lo, hi: 1.0 },
                60.0,
            );
            cfg.record_every = 100;
            assert!(in_xi(&cfg.initial_state(), &graph, s.tau1, false));
            let rep = verify_transition(&cfg, &s).unwrap();
            assert_eq!(rep.outcome, Outcome::ConvergedToOne);
        }
    }
}
