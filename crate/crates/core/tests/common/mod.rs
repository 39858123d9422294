#![allow(dead_code)]

use acdd_core::graph::{generate_er, Graph};
use acdd_core::power::PowerFunction;

pub fn poly(c: &[f64]) -> PowerFunction {
    PowerFunction::polynomial(c.to_vec())
}

pub fn hopf_f() -> PowerFunction {
    poly(&[0.0, 4.0, -4.0])
}

pub fn scenarios() -> Vec<(PowerFunction, PowerFunction)> {
    let g = poly(&[1.0, -1.0]);
    vec![
        (poly(&[0.0, 0.0, 1.0]), g.clone()),
        (poly(&[0.0, 1.0, 1.0]), g.clone()),
        (poly(&[0.0, 0.5, 1.0]), g.clone()),
        (poly(&[0.0, 2.0, -2.0]), g),
    ]
}

/// First valid directed ER instance at or after `seed`.
pub fn er(n: usize, p: f64, seed: u64) -> Graph {
    (seed..)
        .find_map(|s| generate_er(n, p, true, s).ok())
        .expect("some seed works")
}
