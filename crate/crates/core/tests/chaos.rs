mod common;

use acdd_core::chaos::{
    bifurcation_sweep, extrema_clusters, lyapunov_spectrum, orthonormalize, LyapunovParams,
    SweepConfig, SweepKind,
};
use acdd_core::dynamics::{InitialCondition, SimConfig};
use acdd_core::equilibrium::analyze;
use acdd_core::graph::Graph;
use acdd_core::power::PowerFunction;
use common::{er, hopf_f};
use proptest::prelude::*;

fn hopf_config(graph: &Graph, nu: f64, t_end: f64) -> SimConfig {
    let mut cfg = SimConfig::new(
        graph.clone(),
        graph.clone(),
        hopf_f(),
        PowerFunction::centered_quadratic(nu),
        InitialCondition::Uniform { lo: 0.6, hi: 0.8 },
        t_end,
    );
    cfg.seed = 4;
    cfg
}

fn stable_params(qr_interval: f64) -> LyapunovParams {
    LyapunovParams {
        k: 2,
        t_transient: 100.0,
        t_total: 600.0,
        qr_interval,
    }
}

#[test]
fn mle_matches_leading_eigenvalue_when_stable() {
    let graph = er(60, 0.1, 7);
    let c = graph.row_normalized().unwrap();
    let g = PowerFunction::centered_quadratic(3.0);
    let interior = analyze(&hopf_f(), &g, &c, &c)
        .unwrap()
        .into_iter()
        .find(|r| r.sigma > 0.0 && r.sigma < 1.0)
        .unwrap();
    let lambda1 = interior.lambda1.unwrap();
    assert!(lambda1.re < 0.0);
    let res = lyapunov_spectrum(&hopf_config(&graph, 3.0, 0.0), &stable_params(1.0)).unwrap();
    assert!((res.mle - lambda1.re).abs() <= 0.05, "{} vs {}", res.mle, lambda1.re);
}

#[test]
fn exponents_do_not_depend_on_qr_interval() {
    let graph = er(60, 0.1, 7);
    let cfg = hopf_config(&graph, 3.0, 0.0);
    let runs: Vec<Vec<f64>> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&q| lyapunov_spectrum(&cfg, &stable_params(q)).unwrap().exponents)
        .collect();
    for r in &runs[1..] {
        for (a, b) in r.iter().zip(&runs[0]) {
            assert!((a - b).abs() <= 0.02, "{r:?} vs {:?}", runs[0]);
        }
    }
}

#[test]
fn chained_and_fixed_sweeps_mostly_agree() {
    let graph = er(80, 0.1, 2);
    let sweep = |chain| {
        bifurcation_sweep(&SweepConfig {
            base: hopf_config(&graph, 3.0, 300.0),
            sweep: SweepKind::Parameter {
                lo: 3.0,
                hi: 6.0,
                step: 0.5,
            },
            window: (150.0, 300.0),
            cluster_tol: 1e-4,
            chain,
        })
        .unwrap()
    };
    let (fixed, chained) = (sweep(false), sweep(true));
    assert_eq!(fixed.rows.len(), chained.rows.len());
    for (a, b) in fixed.rows.iter().zip(&chained.rows) {
        assert_eq!(a.coordinate, b.coordinate);
        if a.cluster_count != b.cluster_count {
            eprintln!(
                "ν = {}: {} clusters from a fixed start, {} when chained",
                a.coordinate, a.cluster_count, b.cluster_count
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn orthonormal_after_qr(
        cols in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 30), 1..6),
        squeeze in 1e-6f64..1.0,
    ) {
        let mut block = cols.clone();
        // Push later columns towards the first to make the block ill-conditioned.
        for c in block.iter_mut().skip(1) {
            for (x, y) in c.iter_mut().zip(&cols[0]) {
                *x = y + squeeze * *x;
            }
        }
        orthonormalize(&mut block);
        for i in 0..block.len() {
            for j in 0..block.len() {
                let d: f64 = block[i].iter().zip(&block[j]).map(|(a, b)| a * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((d - want).abs() <= 1e-10, "({i}, {j}): {d}");
            }
        }
    }

    #[test]
    fn clusters_ignore_small_jitter(
        amp in 0.01f64..0.2,
        period in 5.0f64..20.0,
        jitter in prop::collection::vec(-1.0f64..1.0, 2001),
    ) {
        let tol = 1e-3;
        let times: Vec<f64> = (0..2001).map(|i| i as f64 * 0.1).collect();
        let clean: Vec<f64> = times
            .iter()
            .map(|t| 0.5 + amp * (std::f64::consts::TAU * t / period).sin())
            .collect();
        let noisy: Vec<f64> = clean
            .iter()
            .zip(&jitter)
            .map(|(x, j)| x + j * tol / 10.0 * 0.99)
            .collect();
        let a = extrema_clusters(&times, &clean, (50.0, 200.0), tol).cluster_count;
        let b = extrema_clusters(&times, &noisy, (50.0, 200.0), tol).cluster_count;
        prop_assert_eq!(a, b);
    }
}
