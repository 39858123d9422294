//! Threshold sets and sufficient conditions for convergence to the all-blue
//! or all-red equilibrium from a given initial state.
//!
//! The conditions quantify over every state in an uncountable set. The grid
//! checks here replace the joint supremum of `f(avg_B) + g(avg_R)` by the sum
//! of the separate suprema, so a pass is sound and a failure is inconclusive.

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{self, DynamicsError, SimConfig, Trajectory};
use crate::graph::Graph;
use crate::power::PowerFunction;

/// Distance from 0 or 1 at which a node counts as converged.
pub const CONVERGENCE_TOL: f64 = 1e-3;
const ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThresholdError {
    #[error("invalid threshold spec: {0}")]
    InvalidSpec(String),
    #[error("grid must have at least 10 points, got {0}")]
    GridTooSmall(usize),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSpec {
    pub tau1: f64,
    pub tau2: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Use `>` instead of `≥` for set membership.
    #[serde(default)]
    pub strict: bool,
}

impl ThresholdSpec {
    pub fn validate(&self) -> Result<(), ThresholdError> {
        let open_unit = |x: f64| x > 0.0 && x < 1.0;
        if !open_unit(self.tau1) || !open_unit(self.tau2) {
            return Err(ThresholdError::InvalidSpec(format!(
                "thresholds must lie in (0, 1), got tau1 = {}, tau2 = {}",
                self.tau1, self.tau2
            )));
        }
        if !(self.alpha > 0.0 && self.beta > 0.0) {
            return Err(ThresholdError::InvalidSpec(format!(
                "alpha and beta must be positive, got {} and {}",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }

    /// The spec seen from the red side.
    pub fn dual(&self) -> ThresholdSpec {
        ThresholdSpec {
            tau1: self.tau2,
            tau2: self.tau1,
            alpha: self.beta,
            beta: self.alpha,
            strict: self.strict,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionId {
    /// `f(0) = 0` and `g(1) = 0`.
    Hypothesis,
    Eq10,
    Eq11,
    /// `g(1 − z) > β·z` on `[τ₂, 1)`.
    Case2Rate,
    Eq12,
    Cor3I,
    Cor3Ii,
    Cor4Sum,
    Cor4Threshold,
}

impl ConditionId {
    pub fn as_str(self) -> &'static str {
        match self {
            ConditionId::Hypothesis => "hypothesis",
            ConditionId::Eq10 => "eq10",
            ConditionId::Eq11 => "eq11",
            ConditionId::Case2Rate => "case2-rate",
            ConditionId::Eq12 => "eq12",
            ConditionId::Cor3I => "cor3-i",
            ConditionId::Cor3Ii => "cor3-ii",
            ConditionId::Cor4Sum => "cor4-sum",
            ConditionId::Cor4Threshold => "cor4-threshold",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    GridSufficient,
    TrajectorySpot,
}

impl CheckKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckKind::GridSufficient => "grid-sufficient",
            CheckKind::TrajectorySpot => "trajectory-spot",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition_id: ConditionId,
    pub satisfied: bool,
    /// Where the margin is smallest.
    pub worst_point: f64,
    /// Positive iff satisfied.
    pub margin: f64,
    pub check_kind: CheckKind,
}

impl ConditionReport {
    fn grid(id: ConditionId, worst: Worst, strict: bool) -> Self {
        Self {
            condition_id: id,
            satisfied: if strict { worst.margin > 0.0 } else { worst.margin >= 0.0 },
            worst_point: worst.point,
            margin: worst.margin,
            check_kind: CheckKind::GridSufficient,
        }
    }

    fn combine(id: ConditionId, parts: &[ConditionReport]) -> Self {
        let worst = parts
            .iter()
            .min_by(|a, b| a.margin.total_cmp(&b.margin))
            .expect("at least one part");
        Self {
            condition_id: id,
            satisfied: parts.iter().all(|p| p.satisfied),
            ..*worst
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Worst {
    point: f64,
    margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Interval {
    /// `[lo, hi]`
    Closed(f64, f64),
    /// `[lo, hi)`
    RightOpen(f64, f64),
    /// `(lo, hi)`
    Open(f64, f64),
    /// `(lo, hi]`
    LeftOpen(f64, f64),
}

impl Interval {
    fn points(self, grid: usize) -> Vec<f64> {
        let (lo, hi, first, last) = match self {
            Interval::Closed(lo, hi) => (lo, hi, 0, grid),
            Interval::RightOpen(lo, hi) => (lo, hi, 0, grid - 1),
            Interval::Open(lo, hi) => (lo, hi, 1, grid - 1),
            Interval::LeftOpen(lo, hi) => (lo, hi, 1, grid),
        };
        (first..=last)
            .map(|i| lo + (hi - lo) * i as f64 / grid as f64)
            .collect()
    }
}

/// Minimum of `margin(z)` over the grid.
fn min_margin(domain: Interval, grid: usize, margin: impl Fn(f64) -> f64) -> Worst {
    domain
        .points(grid)
        .into_iter()
        .map(|z| Worst {
            point: z,
            margin: margin(z),
        })
        .min_by(|a, b| a.margin.total_cmp(&b.margin))
        .expect("non-empty grid")
}

fn sup(phi: &PowerFunction, domain: Interval, grid: usize) -> (f64, f64) {
    let w = min_margin(domain, grid, |x| -phi.value(x));
    (w.point, -w.margin)
}

/// `sup f(x) + sup g(y) ≤ bound` with `x` and `y` ranging independently.
fn decoupled_sum(
    id: ConditionId,
    f: &PowerFunction,
    f_domain: Interval,
    g: &PowerFunction,
    g_domain: Interval,
    bound: f64,
    grid: usize,
) -> ConditionReport {
    let (xf, sf) = sup(f, f_domain, grid);
    let (_, sg) = sup(g, g_domain, grid);
    ConditionReport::grid(
        id,
        Worst {
            point: xf,
            margin: bound - (sf + sg),
        },
        false,
    )
}

fn hypothesis(f: &PowerFunction, g: &PowerFunction) -> ConditionReport {
    let f0 = f.value(0.0).abs();
    let g1 = g.value(1.0).abs();
    let (point, excess) = if f0 >= g1 { (0.0, f0) } else { (1.0, g1) };
    ConditionReport::grid(
        ConditionId::Hypothesis,
        Worst {
            point,
            margin: ZERO_TOL - excess,
        },
        false,
    )
}

fn check_grid(grid: usize) -> Result<(), ThresholdError> {
    if grid < 10 {
        Err(ThresholdError::GridTooSmall(grid))
    } else {
        Ok(())
    }
}

/// Conditions for convergence to all-blue from `Ξ_{G_B, τ₁}`.
pub fn check_case1(
    f: &PowerFunction,
    g: &PowerFunction,
    spec: &ThresholdSpec,
    grid: usize,
) -> Result<Vec<ConditionReport>, ThresholdError> {
    spec.validate()?;
    check_grid(grid)?;
    let (tau, alpha) = (spec.tau1, spec.alpha);
    let eq10 = min_margin(Interval::RightOpen(tau, 1.0), grid, |z| f.value(z) - alpha * z);
    Ok(vec![
        hypothesis(f, g),
        ConditionReport::grid(ConditionId::Eq10, eq10, true),
        decoupled_sum(
            ConditionId::Eq11,
            f,
            Interval::Closed(tau, 1.0),
            g,
            Interval::Closed(0.0, 1.0),
            alpha,
            grid,
        ),
    ])
}

/// Conditions for convergence to all-red when `1 − B(0) ∈ Ξ_{G_R, τ₂}`.
pub fn check_case2(
    f: &PowerFunction,
    g: &PowerFunction,
    spec: &ThresholdSpec,
    grid: usize,
) -> Result<Vec<ConditionReport>, ThresholdError> {
    spec.validate()?;
    check_grid(grid)?;
    let (tau, beta) = (spec.tau2, spec.beta);
    let rate = min_margin(Interval::RightOpen(tau, 1.0), grid, |z| {
        g.value(1.0 - z) - beta * z
    });
    // A red average of at least τ₂ under G_R means a blue average of at most 1 − τ₂.
    Ok(vec![
        hypothesis(f, g),
        ConditionReport::grid(ConditionId::Case2Rate, rate, true),
        decoupled_sum(
            ConditionId::Eq12,
            f,
            Interval::Closed(0.0, 1.0),
            g,
            Interval::Closed(0.0, 1.0 - tau),
            beta,
            grid,
        ),
    ])
}

/// Shared threshold `τ = tau1` and rate `α = alpha` for both directions.
pub fn check_corollary3(
    f: &PowerFunction,
    g: &PowerFunction,
    spec: &ThresholdSpec,
    grid: usize,
) -> Result<Vec<ConditionReport>, ThresholdError> {
    spec.validate()?;
    check_grid(grid)?;
    let (tau, alpha) = (spec.tau1, spec.alpha);
    let rate_i = min_margin(Interval::Open(tau, 1.0), grid, |z| f.value(z) - alpha * z);
    let sum_i = decoupled_sum(
        ConditionId::Cor3I,
        f,
        Interval::LeftOpen(tau, 1.0),
        g,
        Interval::Closed(0.0, 1.0),
        alpha,
        grid,
    );
    let rate_ii = min_margin(Interval::Open(0.0, tau), grid, |z| {
        g.value(z) - alpha * (1.0 - z)
    });
    let sum_ii = decoupled_sum(
        ConditionId::Cor3Ii,
        f,
        Interval::Closed(0.0, 1.0),
        g,
        Interval::RightOpen(0.0, tau),
        alpha,
        grid,
    );
    Ok(vec![
        hypothesis(f, g),
        ConditionReport::combine(
            ConditionId::Cor3I,
            &[ConditionReport::grid(ConditionId::Cor3I, rate_i, true), sum_i],
        ),
        ConditionReport::combine(
            ConditionId::Cor3Ii,
            &[ConditionReport::grid(ConditionId::Cor3Ii, rate_ii, true), sum_ii],
        ),
    ])
}

/// Shared-graph variant: both sums are evaluated at the same average, so the
/// sum condition is checked pointwise rather than by decoupled suprema.
pub fn check_corollary4(
    f: &PowerFunction,
    g: &PowerFunction,
    spec: &ThresholdSpec,
    grid: usize,
) -> Result<Vec<ConditionReport>, ThresholdError> {
    spec.validate()?;
    check_grid(grid)?;
    let (tau, alpha) = (spec.tau1, spec.alpha);
    let sum = min_margin(Interval::Closed(0.0, 1.0), grid, |z| {
        alpha - f.value(z) - g.value(z)
    });
    let above = min_margin(Interval::Open(tau, 1.0), grid, |z| f.value(z) - alpha * z);
    let below = min_margin(Interval::Open(0.0, tau), grid, |z| alpha * z - f.value(z));
    Ok(vec![
        hypothesis(f, g),
        ConditionReport::grid(ConditionId::Cor4Sum, sum, false),
        ConditionReport::combine(
            ConditionId::Cor4Threshold,
            &[
                ConditionReport::grid(ConditionId::Cor4Threshold, above, true),
                ConditionReport::grid(ConditionId::Cor4Threshold, below, true),
            ],
        ),
    ])
}

/// Condition (11) evaluated on the recorded states of an actual orbit that
/// lie in `Ξ_{G_B, τ₁}`. The worst point is the time of the worst margin.
pub fn spot_check_eq11(
    cfg: &SimConfig,
    spec: &ThresholdSpec,
    traj: &Trajectory,
) -> Result<ConditionReport, ThresholdError> {
    spec.validate()?;
    let states = traj.states.as_ref().ok_or_else(|| {
        ThresholdError::InvalidSpec("trajectory spot-check needs recorded states".into())
    })?;
    let model = cfg.model()?;
    let mut worst = Worst {
        point: f64::NAN,
        margin: f64::INFINITY,
    };
    for (state, &t) in states.iter().zip(&traj.times) {
        if !in_xi(state, &cfg.graph_b, spec.tau1, spec.strict) {
            continue;
        }
        for v in 0..model.size() {
            let s = cfg.f.value(model.c_b().average(state, v))
                + cfg.g.value(model.c_r().average(state, v));
            if spec.alpha - s < worst.margin {
                worst = Worst {
                    point: t,
                    margin: spec.alpha - s,
                };
            }
        }
    }
    Ok(ConditionReport {
        condition_id: ConditionId::Eq11,
        satisfied: worst.margin >= 0.0,
        worst_point: worst.point,
        margin: worst.margin,
        check_kind: CheckKind::TrajectorySpot,
    })
}

/// Smallest neighbourhood average of `state` over all nodes of `graph`.
pub fn neighborhood_min_avg(state: &[f64], graph: &Graph) -> f64 {
    (0..graph.node_count())
        .map(|v| {
            let nb = graph.in_neighbors(v);
            nb.iter().map(|&u| state[u]).sum::<f64>() / nb.len() as f64
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn in_xi(state: &[f64], graph: &Graph, tau: f64, strict: bool) -> bool {
    let m = neighborhood_min_avg(state, graph);
    if strict {
        m > tau
    } else {
        m >= tau
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Membership {
    /// `B(0) ∈ Ξ_{G_B, τ₁}`
    XiBlue,
    /// `1 − B(0) ∈ Ξ_{G_R, τ₂}`
    XiRed,
    Both,
    Neither,
}

impl Membership {
    pub fn as_str(self) -> &'static str {
        match self {
            Membership::XiBlue => "xi-blue",
            Membership::XiRed => "xi-red",
            Membership::Both => "both",
            Membership::Neither => "neither",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    ConvergedToOne,
    ConvergedToZero,
    Undecided,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::ConvergedToOne => "converged-to-1",
            Outcome::ConvergedToZero => "converged-to-0",
            Outcome::Undecided => "undecided",
        }
    }

    pub fn swapped(self) -> Outcome {
        match self {
            Outcome::ConvergedToOne => Outcome::ConvergedToZero,
            Outcome::ConvergedToZero => Outcome::ConvergedToOne,
            Outcome::Undecided => Outcome::Undecided,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionReport {
    pub membership: Membership,
    pub outcome: Outcome,
    /// First recorded time at which the outcome criterion held.
    pub t_decide: Option<f64>,
}

pub fn classify_outcome(traj: &Trajectory) -> (Outcome, Option<f64>) {
    let to_one = |i: usize| traj.min_blue[i] >= 1.0 - CONVERGENCE_TOL;
    let to_zero = |i: usize| traj.max_blue[i] <= CONVERGENCE_TOL;
    let last = traj.times.len() - 1;
    let first_time = |hit: &dyn Fn(usize) -> bool| (0..=last).find(|&i| hit(i)).map(|i| traj.times[i]);
    if to_one(last) {
        (Outcome::ConvergedToOne, first_time(&to_one))
    } else if to_zero(last) {
        (Outcome::ConvergedToZero, first_time(&to_zero))
    } else {
        (Outcome::Undecided, None)
    }
}

/// Which of `Ξ_{G_B, τ₁}` and `Ξ_{G_R, τ₂}` (the latter on `R = 1 − B`) the
/// initial state lies in.
pub fn initial_membership(cfg: &SimConfig, spec: &ThresholdSpec) -> Membership {
    let b0 = cfg.initial_state();
    let r0: Vec<f64> = b0.iter().map(|b| 1.0 - b).collect();
    let blue = in_xi(&b0, &cfg.graph_b, spec.tau1, spec.strict);
    let red = in_xi(&r0, &cfg.graph_r, spec.tau2, spec.strict);
    match (blue, red) {
        (true, true) => Membership::Both,
        (true, false) => Membership::XiBlue,
        (false, true) => Membership::XiRed,
        (false, false) => Membership::Neither,
    }
}

pub fn verify_transition(
    cfg: &SimConfig,
    spec: &ThresholdSpec,
) -> Result<TransitionReport, ThresholdError> {
    spec.validate()?;
    cfg.validate()?;
    let membership = initial_membership(cfg, spec);
    let traj = dynamics::integrate(cfg)?;
    let (outcome, t_decide) = classify_outcome(&traj);
    Ok(TransitionReport {
        membership,
        outcome,
        t_decide,
    })
}
