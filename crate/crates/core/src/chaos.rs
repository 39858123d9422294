//! Bifurcation diagrams from extrema of the mean blue probability, and
//! Lyapunov exponents from the variational equation.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{
    self, clamp_unit, stream_rng, DynamicsError, InitialCondition, Model, SimConfig,
    TANGENT_STREAM,
};
use crate::graph::{perturb_edges, Graph, GraphError, ER_RETRY_LIMIT};
use crate::power::PowerError;

pub const DEFAULT_CLUSTER_TOL: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChaosError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Power(#[from] PowerError),
    #[error("invalid sweep config: {0}")]
    Config(String),
    #[error("Lyapunov accumulator became non-finite at t = {0}")]
    NonFinite(f64),
}

/// Extrema found in a window, their single-linkage levels, and the level count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremaSummary {
    pub extrema: Vec<f64>,
    pub levels: Vec<f64>,
    pub cluster_count: usize,
}

/// Strict three-point local extrema of `values` at times inside the open
/// window, refined by a parabola through each extremum and its neighbours,
/// then grouped by single linkage at `cluster_tol`. A series whose range in
/// the window does not exceed `cluster_tol` counts as constant.
pub fn extrema_clusters(
    times: &[f64],
    values: &[f64],
    window: (f64, f64),
    cluster_tol: f64,
) -> ExtremaSummary {
    assert_eq!(times.len(), values.len());
    let inside: Vec<usize> = (0..times.len())
        .filter(|&i| times[i] > window.0 && times[i] < window.1)
        .collect();
    let (lo, hi) = inside
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
            (lo.min(values[i]), hi.max(values[i]))
        });
    let constant = ExtremaSummary {
        extrema: Vec::new(),
        levels: Vec::new(),
        cluster_count: 0,
    };
    if inside.is_empty() || hi - lo <= cluster_tol {
        return constant;
    }
    let mut extrema = Vec::new();
    for &i in &inside {
        if i == 0 || i + 1 == values.len() {
            continue;
        }
        let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
        if (b > a && b > c) || (b < a && b < c) {
            let curvature = a - 2.0 * b + c;
            let vertex = b - (c - a) * (c - a) / (8.0 * curvature);
            extrema.push(vertex.clamp(0.0, 1.0));
        }
    }
    if extrema.is_empty() {
        return constant;
    }
    let mut sorted = extrema.clone();
    sorted.sort_by(f64::total_cmp);
    let mut levels = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || sorted[i] - sorted[i - 1] > cluster_tol {
            let cluster = &sorted[start..i];
            levels.push(cluster.iter().sum::<f64>() / cluster.len() as f64);
            start = i;
        }
    }
    ExtremaSummary {
        extrema,
        cluster_count: levels.len(),
        levels,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SweepKind {
    /// `ν = lo, lo + step, …, hi`.
    Parameter { lo: f64, hi: f64, step: f64 },
    /// The first half of the iterations delete edges from `G_R`, the second
    /// half add the same number back among absent pairs.
    Structural {
        iterations: usize,
        edges_per_iteration: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub base: SimConfig,
    pub sweep: SweepKind,
    pub window: (f64, f64),
    pub cluster_tol: f64,
    /// Start each parameter value from the final state of the previous one.
    pub chain: bool,
}

impl SweepConfig {
    fn validate(&self) -> Result<(), ChaosError> {
        self.base.validate()?;
        let (t_lo, t_hi) = self.window;
        if !(t_lo < t_hi && t_hi <= self.base.t_end) {
            return Err(ChaosError::Config(format!(
                "window ({t_lo}, {t_hi}) must be non-empty and end by t_end = {}",
                self.base.t_end
            )));
        }
        if self.cluster_tol.is_nan() || self.cluster_tol <= 0.0 {
            return Err(ChaosError::Config("cluster_tol must be positive".into()));
        }
        if let SweepKind::Parameter { lo, hi, step } = self.sweep {
            if !(step > 0.0 && lo <= hi) {
                return Err(ChaosError::Config(format!(
                    "parameter grid needs lo <= hi and step > 0, got ({lo}, {hi}) step {step}"
                )));
            }
        }
        Ok(())
    }

    fn nu_grid(&self) -> Result<Vec<f64>, ChaosError> {
        match self.sweep {
            SweepKind::Parameter { lo, hi, step } => Ok(nu_grid(lo, hi, step)),
            SweepKind::Structural { .. } => Err(ChaosError::Config(
                "expected a parameter sweep, got a structural one".into(),
            )),
        }
    }
}

pub fn nu_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|k| lo + k as f64 * step).collect()
}

/// `cfg` with every ν-family function moved to `nu`.
pub fn with_nu(cfg: &SimConfig, nu: f64) -> Result<SimConfig, ChaosError> {
    if cfg.f.nu().is_none() && cfg.g.nu().is_none() {
        return Err(PowerError::NotParameterized(cfg.g.family_name()).into());
    }
    let mut out = cfg.clone();
    out.f = cfg.f.with_nu(nu).unwrap_or_else(|_| cfg.f.clone());
    out.g = cfg.g.with_nu(nu).unwrap_or_else(|_| cfg.g.clone());
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagramRow {
    pub coordinate: f64,
    pub extrema: Vec<f64>,
    pub cluster_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BifurcationDiagram {
    pub rows: Vec<DiagramRow>,
}

fn diagram_row(
    coordinate: f64,
    cfg: &SimConfig,
    window: (f64, f64),
    cluster_tol: f64,
) -> Result<(DiagramRow, Vec<f64>), ChaosError> {
    let traj = dynamics::integrate(cfg)?;
    let s = extrema_clusters(&traj.times, &traj.mean_blue, window, cluster_tol);
    Ok((
        DiagramRow {
            coordinate,
            extrema: s.extrema,
            cluster_count: s.cluster_count,
        },
        traj.final_state,
    ))
}

pub fn bifurcation_sweep(cfg: &SweepConfig) -> Result<BifurcationDiagram, ChaosError> {
    cfg.validate()?;
    let grid = cfg.nu_grid()?;
    let rows = if cfg.chain {
        let mut rows = Vec::with_capacity(grid.len());
        let mut sim = cfg.base.clone();
        for &nu in &grid {
            sim = with_nu(&sim, nu)?;
            let (row, last) = diagram_row(nu, &sim, cfg.window, cfg.cluster_tol)?;
            sim.initial = InitialCondition::Explicit { values: last };
            rows.push(row);
        }
        rows
    } else {
        grid.par_iter()
            .map(|&nu| {
                let sim = with_nu(&cfg.base, nu)?;
                Ok(diagram_row(nu, &sim, cfg.window, cfg.cluster_tol)?.0)
            })
            .collect::<Result<_, ChaosError>>()?
    };
    Ok(BifurcationDiagram { rows })
}

/// Deterministic seed for one perturbation attempt.
fn perturbation_seed(seed: u64, iteration: usize, attempt: usize) -> u64 {
    let mut rng = stream_rng(seed, 1 << 32 | (iteration as u64) << 8 | attempt as u64);
    rng.random()
}

/// Perturbs `G_R` one iteration at a time, redrawing any edge set that
/// would leave a node without in-neighbours.
pub fn structural_graphs(
    graph_r: &Graph,
    iterations: usize,
    edges_per_iteration: usize,
    seed: u64,
) -> Result<Vec<Graph>, ChaosError> {
    let mut graphs = vec![graph_r.clone()];
    let deletes = iterations.div_ceil(2);
    for it in 1..=iterations {
        let current = graphs.last().expect("non-empty");
        let (del, add) = if it <= deletes {
            (edges_per_iteration, 0)
        } else {
            (0, edges_per_iteration)
        };
        let mut attempt = 0;
        let next = loop {
            match perturb_edges(current, del, add, perturbation_seed(seed, it, attempt)) {
                Ok((g, _)) => break g,
                Err(GraphError::IsolatedNode(_)) if attempt + 1 < ER_RETRY_LIMIT => attempt += 1,
                Err(e) => return Err(e.into()),
            }
        };
        graphs.push(next);
    }
    Ok(graphs)
}

/// Row `i` is the diagram after `i` perturbation iterations; row 0 is the
/// unperturbed graph.
pub fn structural_sweep(cfg: &SweepConfig) -> Result<BifurcationDiagram, ChaosError> {
    cfg.validate()?;
    let SweepKind::Structural {
        iterations,
        edges_per_iteration,
    } = cfg.sweep
    else {
        return Err(ChaosError::Config(
            "expected a structural sweep, got a parameter one".into(),
        ));
    };
    let graphs = structural_graphs(&cfg.base.graph_r, iterations, edges_per_iteration, cfg.base.seed)?;
    let rows = graphs
        .into_par_iter()
        .enumerate()
        .map(|(i, g)| {
            let mut sim = cfg.base.clone();
            sim.graph_r = g;
            Ok(diagram_row(i as f64, &sim, cfg.window, cfg.cluster_tol)?.0)
        })
        .collect::<Result<_, ChaosError>>()?;
    Ok(BifurcationDiagram { rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LyapunovParams {
    pub k: usize,
    pub t_transient: f64,
    pub t_total: f64,
    pub qr_interval: f64,
}

impl Default for LyapunovParams {
    fn default() -> Self {
        Self {
            k: 1,
            t_transient: 200.0,
            t_total: 2000.0,
            qr_interval: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovResult {
    /// Descending.
    pub exponents: Vec<f64>,
    pub mle: f64,
    pub t_total: f64,
    pub t_transient: f64,
    pub qr_interval: f64,
    pub k: usize,
}

/// Modified Gram–Schmidt with one reorthogonalization pass. Returns the
/// diagonal of `R`.
pub fn orthonormalize(block: &mut [Vec<f64>]) -> Vec<f64> {
    let mut diag = Vec::with_capacity(block.len());
    for j in 0..block.len() {
        let (done, rest) = block.split_at_mut(j);
        let v = &mut rest[0];
        for _ in 0..2 {
            for q in done.iter() {
                let r: f64 = q.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(x, qi)| *x -= r * qi);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        diag.push(norm);
    }
    diag
}

/// State plus tangent block advanced together by one RK4 step.
struct Variational {
    k: [Vec<f64>; 4],
    l: [Vec<Vec<f64>>; 4],
    y: Vec<f64>,
    e: Vec<Vec<f64>>,
}

impl Variational {
    fn new(n: usize, k: usize) -> Self {
        let block = || vec![vec![0.0; n]; k];
        Self {
            k: std::array::from_fn(|_| vec![0.0; n]),
            l: std::array::from_fn(|_| block()),
            y: vec![0.0; n],
            e: block(),
        }
    }

    fn step(&mut self, model: &Model, state: &mut [f64], tangents: &mut [Vec<f64>], h: f64) {
        let offsets = [0.0, 0.5 * h, 0.5 * h, h];
        for (s, &c) in offsets.iter().enumerate() {
            if s == 0 {
                self.y.copy_from_slice(state);
                for (e, t) in self.e.iter_mut().zip(tangents.iter()) {
                    e.copy_from_slice(t);
                }
            } else {
                for (i, y) in self.y.iter_mut().enumerate() {
                    *y = state[i] + c * self.k[s - 1][i];
                }
                for (j, e) in self.e.iter_mut().enumerate() {
                    for (i, x) in e.iter_mut().enumerate() {
                        *x = tangents[j][i] + c * self.l[s - 1][j][i];
                    }
                }
            }
            model.rhs_into(&self.y, &mut self.k[s]);
            model.jacobian_apply(&self.y, &self.e, &mut self.l[s]);
        }
        let w = h / 6.0;
        for (i, x) in state.iter_mut().enumerate() {
            *x += w * (self.k[0][i] + 2.0 * self.k[1][i] + 2.0 * self.k[2][i] + self.k[3][i]);
        }
        for (j, t) in tangents.iter_mut().enumerate() {
            for (i, x) in t.iter_mut().enumerate() {
                *x += w
                    * (self.l[0][j][i] + 2.0 * self.l[1][j][i] + 2.0 * self.l[2][j][i] + self.l[3][j][i]);
            }
        }
    }
}

fn whole_steps(span: f64, h: f64, what: &str) -> Result<usize, ChaosError> {
    let steps = (span / h).round();
    if (steps * h - span).abs() > 1e-9 * span.max(1.0) {
        return Err(ChaosError::Config(format!(
            "{what} = {span} is not a whole number of steps of {h}"
        )));
    }
    Ok(steps as usize)
}

/// Top-`k` Lyapunov exponents along the orbit of `cfg` from its initial
/// state. Scheduled events are not supported.
pub fn lyapunov_spectrum(
    cfg: &SimConfig,
    params: &LyapunovParams,
) -> Result<LyapunovResult, ChaosError> {
    cfg.validate()?;
    let n = cfg.node_count();
    let LyapunovParams {
        k,
        t_transient,
        t_total,
        qr_interval,
    } = *params;
    if k == 0 || k > n {
        return Err(ChaosError::Config(format!("k = {k} must lie in 1..={n}")));
    }
    if !(t_transient >= 0.0 && t_transient < t_total && qr_interval > 0.0) {
        return Err(ChaosError::Config(format!(
            "need 0 <= t_transient < t_total and qr_interval > 0, got {t_transient}, {t_total}, {qr_interval}"
        )));
    }
    if !cfg.events.is_empty() {
        return Err(ChaosError::Config(
            "Lyapunov exponents are computed without scheduled events".into(),
        ));
    }
    let h = cfg.step;
    let total_steps = whole_steps(t_total, h, "t_total")?;
    let qr_steps = whole_steps(qr_interval, h, "qr_interval")?;

    let model = cfg.model()?;
    let mut state = cfg.initial_state();
    let mut rng = stream_rng(cfg.seed, TANGENT_STREAM);
    let mut tangents: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..n).map(|_| rng.random::<f64>() - 0.5).collect())
        .collect();
    orthonormalize(&mut tangents);

    let mut sums = vec![0.0; k];
    let mut last_qr = 0.0;
    let mut accumulated_from = None;
    let mut stepper = Variational::new(n, k);
    for i in 1..=total_steps {
        stepper.step(&model, &mut state, &mut tangents, h);
        let t = i as f64 * h;
        clamp_unit(&mut state, t)?;
        if i % qr_steps == 0 || i == total_steps {
            let diag = orthonormalize(&mut tangents);
            if t > t_transient + 1e-9 {
                accumulated_from.get_or_insert(last_qr);
                for (s, r) in sums.iter_mut().zip(&diag) {
                    *s += r.ln();
                }
                if sums.iter().any(|s| !s.is_finite()) {
                    return Err(ChaosError::NonFinite(t));
                }
            }
            last_qr = t;
        }
    }
    let span = t_total - accumulated_from.unwrap_or(t_transient);
    let mut exponents: Vec<f64> = sums.iter().map(|s| s / span).collect();
    exponents.sort_by(|a, b| b.total_cmp(a));
    Ok(LyapunovResult {
        mle: exponents[0],
        exponents,
        t_total,
        t_transient,
        qr_interval,
        k,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MlePoint {
    pub nu: f64,
    pub mle: f64,
}

pub fn mle_sweep(
    base: &SimConfig,
    grid: &[f64],
    params: &LyapunovParams,
) -> Result<Vec<MlePoint>, ChaosError> {
    let params = LyapunovParams { k: 1, ..*params };
    grid.par_iter()
        .map(|&nu| {
            let cfg = with_nu(base, nu)?;
            Ok(MlePoint {
                nu,
                mle: lyapunov_spectrum(&cfg, &params)?.mle,
            })
        })
        .collect()
}
