mod common;

use acdd_core::equilibrium::{
    analyze, classify_boundary, classify_spectrum, corollary2_classify, find_h0_roots,
    h0_residual, jacobian_m, Verdict,
};
use acdd_core::graph::{spectrum_extremes, Graph};
use acdd_core::linalg::eigenvalues;
use acdd_core::power::PowerFunction;
use common::{er, hopf_f, poly, scenarios};
use num_complex::Complex64;
use proptest::prelude::*;

fn max_matching_error(mut a: Vec<Complex64>, mut b: Vec<Complex64>) -> f64 {
    let key = |z: &Complex64| (z.re * 1e6).round() as i64 * 1_000_000 + (z.im * 1e6).round() as i64;
    a.sort_by_key(key);
    b.sort_by_key(key);
    a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn shared_graph_spectrum_is_an_affine_image_of_c() {
    let graphs = [Graph::complete(2), Graph::complete(3), Graph::cycle(4, false)];
    let mut pairs = scenarios();
    pairs.push((hopf_f(), PowerFunction::centered_quadratic(3.0)));
    pairs.push((hopf_f(), PowerFunction::centered_quadratic(4.0)));
    for graph in &graphs {
        let c = graph.row_normalized().unwrap();
        let mu = eigenvalues(&c.to_dense()).unwrap();
        for (f, g) in &pairs {
            for sigma in find_h0_roots(f, g) {
                let (fv, df) = f.eval(sigma);
                let (gv, dg) = g.eval(sigma);
                let a = (1.0 - sigma) * df - sigma * dg;
                let predicted: Vec<_> = mu.iter().map(|m| a * m - (fv + gv)).collect();
                let direct = eigenvalues(&jacobian_m(sigma, f, g, &c, &c)).unwrap();
                let err = max_matching_error(predicted, direct);
                assert!(err <= 1e-9, "n = {}, σ = {sigma}: {err:e}", graph.node_count());
            }
        }
    }
}

#[test]
fn boundary_rule_agrees_with_spectrum() {
    let graph = er(40, 0.2, 1);
    let c = graph.row_normalized().unwrap();
    let mut pairs = scenarios();
    pairs.push((poly(&[0.0, 3.0]), poly(&[2.0, -2.0])));
    pairs.push((poly(&[0.0, 0.2]), poly(&[0.5, -0.5])));
    pairs.push((poly(&[0.0, 1.5, 1.0]), poly(&[0.2, 0.3, -0.5])));
    let mut compared = 0;
    for (f, g) in &pairs {
        let (zero, one) = classify_boundary(f, g);
        for r in [zero, one] {
            if matches!(r.verdict, Verdict::Marginal | Verdict::NotEquilibrium) {
                continue;
            }
            let (direct, _) = classify_spectrum(&jacobian_m(r.sigma, f, g, &c, &c)).unwrap();
            assert_eq!(r.verdict, direct, "σ = {}", r.sigma);
            compared += 1;
        }
    }
    assert!(compared >= 8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn roots_have_small_residual(nu in 2.0f64..9.0, c1 in 0.1f64..3.0, c2 in -1.0f64..1.0) {
        let pairs = [
            (hopf_f(), PowerFunction::centered_quadratic(nu)),
            (poly(&[0.0, c1, c2]), poly(&[1.0, -1.0])),
            (PowerFunction::linear_minus_quadratic(c1), poly(&[1.0, -4.0, 4.0])),
        ];
        for (f, g) in &pairs {
            for sigma in find_h0_roots(f, g) {
                prop_assert!(h0_residual(f, g, sigma).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn corollary2_agrees_with_spectrum(nu in 2.5f64..6.0, seed in 0u64..1000) {
        let graph = er(60, 0.12, seed);
        let c = graph.row_normalized().unwrap();
        let (_, mu1) = spectrum_extremes(&c).unwrap();
        let g = PowerFunction::centered_quadratic(nu);
        for r in analyze(&hopf_f(), &g, &c, &c).unwrap() {
            let Ok(cor) = corollary2_classify(r.sigma, &hopf_f(), &g, mu1) else { continue };
            if cor.verdict == Verdict::Marginal || r.verdict == Verdict::Marginal {
                continue;
            }
            prop_assert_eq!(cor.verdict, r.verdict);
        }
    }
}
