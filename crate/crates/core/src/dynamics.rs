//! Master-equation integration.
//!
//! `dB_v/dt = f(avg_{G_B}(B, v))·(1 − B_v) − g(avg_{G_R}(B, v))·B_v`
//!
//! Only the blue probabilities are stored; red is `1 − B` by construction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError, RowStochastic};
use crate::linalg::Matrix;
use crate::power::PowerFunction;

pub const DEFAULT_STEP: f64 = 0.01;

/// Largest pre-clamp excursion outside `[0, 1]` tolerated after a step.
pub const MAX_EXCURSION: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("step too large: state left [0, 1] by {excursion:e} at t = {time}")]
    StepTooLarge { time: f64, excursion: f64 },
    #[error("non-finite state at t = {0}")]
    NonFinite(f64),
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialCondition {
    Constant { value: f64 },
    /// Independent uniform draws on `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
    Explicit { values: Vec<f64> },
}

impl InitialCondition {
    fn check(&self, n: usize) -> Result<(), DynamicsError> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        let ok = match self {
            Self::Constant { value } => unit(*value),
            Self::Uniform { lo, hi } => unit(*lo) && unit(*hi) && lo <= hi,
            Self::Explicit { values } => {
                if values.len() != n {
                    return Err(DynamicsError::Config(format!(
                        "explicit initial state has {} entries, graphs have {n} nodes",
                        values.len()
                    )));
                }
                values.iter().all(|&x| unit(x))
            }
        };
        if ok {
            Ok(())
        } else {
            Err(DynamicsError::Config(format!(
                "initial condition {self:?} leaves [0, 1]"
            )))
        }
    }

    pub fn materialize(&self, n: usize, rng: &mut impl Rng) -> Vec<f64> {
        match self {
            Self::Constant { value } => vec![*value; n],
            Self::Uniform { lo, hi } => (0..n).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect(),
            Self::Explicit { values } => values.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    fn flipped(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EventAction {
    SwitchFunctions { f: PowerFunction, g: PowerFunction },
    /// `B_v ← clamp(B_v ± ε_v)` with `ε_v` i.i.d. uniform on `[lo, hi]`.
    PerturbState { sign: Sign, lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleEvent {
    pub time: f64,
    #[serde(flatten)]
    pub action: EventAction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub graph_b: Graph,
    pub graph_r: Graph,
    pub f: PowerFunction,
    pub g: PowerFunction,
    pub initial: InitialCondition,
    pub t_end: f64,
    pub step: f64,
    pub record_every: usize,
    pub events: Vec<ScheduleEvent>,
    pub seed: u64,
    pub record_states: bool,
}

impl SimConfig {
    /// Defaults: `h = 0.01`, every step recorded, no events, no snapshots.
    pub fn new(
        graph_b: Graph,
        graph_r: Graph,
        f: PowerFunction,
        g: PowerFunction,
        initial: InitialCondition,
        t_end: f64,
    ) -> Self {
        Self {
            graph_b,
            graph_r,
            f,
            g,
            initial,
            t_end,
            step: DEFAULT_STEP,
            record_every: 1,
            events: Vec::new(),
            seed: 0,
            record_states: false,
        }
    }

    pub fn node_count(&self) -> usize {
        self.graph_b.node_count()
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let n = self.graph_b.node_count();
        if self.graph_r.node_count() != n {
            return Err(DynamicsError::Config(format!(
                "defense graph has {n} nodes, attack graph has {}",
                self.graph_r.node_count()
            )));
        }
        self.graph_b.validate()?;
        self.graph_r.validate()?;
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(DynamicsError::Config(format!("step {} must be > 0", self.step)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(DynamicsError::Config(format!("t_end {} must be >= 0", self.t_end)));
        }
        if self.record_every == 0 {
            return Err(DynamicsError::Config("record_every must be >= 1".into()));
        }
        self.initial.check(n)?;
        let mut last = 0.0;
        for e in &self.events {
            if !(e.time >= last && e.time <= self.t_end) {
                return Err(DynamicsError::Config(format!(
                    "event at t = {} is out of order or outside [0, {}]",
                    e.time, self.t_end
                )));
            }
            if let EventAction::PerturbState { lo, hi, .. } = e.action {
                if !(0.0 <= lo && lo <= hi) {
                    return Err(DynamicsError::Config(format!(
                        "perturbation interval [{lo}, {hi}] is invalid"
                    )));
                }
            }
            last = e.time;
        }
        Ok(())
    }

    pub fn model(&self) -> Result<Model, DynamicsError> {
        Ok(Model::new(
            &self.graph_b,
            &self.graph_r,
            self.f.clone(),
            self.g.clone(),
        )?)
    }

    /// The initial state, drawn from the initial-condition stream of `seed`.
    pub fn initial_state(&self) -> Vec<f64> {
        let mut rng = stream_rng(self.seed, INITIAL_STREAM);
        self.initial.materialize(self.node_count(), &mut rng)
    }

    /// Blue/red duality: swapping the roles of the two colors maps this
    /// system onto one whose trajectory is `1 − B(t)`.
    pub fn dual(&self) -> SimConfig {
        let b0: Vec<f64> = self.initial_state().iter().map(|b| 1.0 - b).collect();
        SimConfig {
            graph_b: self.graph_r.clone(),
            graph_r: self.graph_b.clone(),
            f: self.g.reflected(),
            g: self.f.reflected(),
            initial: InitialCondition::Explicit { values: b0 },
            events: self
                .events
                .iter()
                .map(|e| ScheduleEvent {
                    time: e.time,
                    action: match &e.action {
                        EventAction::SwitchFunctions { f, g } => EventAction::SwitchFunctions {
                            f: g.reflected(),
                            g: f.reflected(),
                        },
                        EventAction::PerturbState { sign, lo, hi } => EventAction::PerturbState {
                            sign: sign.flipped(),
                            lo: *lo,
                            hi: *hi,
                        },
                    },
                })
                .collect(),
            ..self.clone()
        }
    }
}

const INITIAL_STREAM: u64 = 0;
const EVENT_STREAM: u64 = 1;
pub(crate) const TANGENT_STREAM: u64 = 2;

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Right-hand side of the master equation for a fixed pair of functions.
#[derive(Debug, Clone)]
pub struct Model {
    c_b: RowStochastic,
    c_r: RowStochastic,
    shared: bool,
    pub f: PowerFunction,
    pub g: PowerFunction,
}

/// Per-node quantities entering both the vector field and its Jacobian.
struct NodeTerms {
    f: f64,
    df: f64,
    g: f64,
    dg: f64,
}

impl Model {
    pub fn new(
        graph_b: &Graph,
        graph_r: &Graph,
        f: PowerFunction,
        g: PowerFunction,
    ) -> Result<Self, GraphError> {
        let c_b = graph_b.row_normalized()?;
        let c_r = graph_r.row_normalized()?;
        let shared = c_b == c_r;
        Ok(Self {
            c_b,
            c_r,
            shared,
            f,
            g,
        })
    }

    pub fn size(&self) -> usize {
        self.c_b.size()
    }

    pub fn c_b(&self) -> &RowStochastic {
        &self.c_b
    }

    pub fn c_r(&self) -> &RowStochastic {
        &self.c_r
    }

    fn averages(&self, state: &[f64], v: usize) -> (f64, f64) {
        let ab = self.c_b.average(state, v);
        let ar = if self.shared {
            ab
        } else {
            self.c_r.average(state, v)
        };
        (ab, ar)
    }

    fn terms(&self, state: &[f64], v: usize) -> NodeTerms {
        let (ab, ar) = self.averages(state, v);
        let (f, df) = self.f.eval(ab);
        let (g, dg) = self.g.eval(ar);
        NodeTerms { f, df, g, dg }
    }

    pub fn rhs_into(&self, state: &[f64], out: &mut [f64]) {
        for (v, o) in out.iter_mut().enumerate() {
            let (ab, ar) = self.averages(state, v);
            *o = self.f.value(ab) * (1.0 - state[v]) - self.g.value(ar) * state[v];
        }
    }

    pub fn rhs(&self, state: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; state.len()];
        self.rhs_into(state, &mut out);
        out
    }

    /// Dense Jacobian of the vector field at `state`.
    pub fn jacobian(&self, state: &[f64]) -> Matrix {
        let n = state.len();
        let mut j = Matrix::zeros(n, n);
        for v in 0..n {
            let t = self.terms(state, v);
            let wb = t.df * (1.0 - state[v]);
            let wr = t.dg * state[v];
            for (u, w) in self.c_b.row(v) {
                j[(v, u)] += wb * w;
            }
            for (u, w) in self.c_r.row(v) {
                j[(v, u)] -= wr * w;
            }
            j[(v, v)] -= t.f + t.g;
        }
        j
    }

    /// `out_k = J(state)·tangents_k` for each tangent vector, without
    /// forming `J`.
    pub fn jacobian_apply(&self, state: &[f64], tangents: &[Vec<f64>], out: &mut [Vec<f64>]) {
        let n = state.len();
        for v in 0..n {
            let t = self.terms(state, v);
            let wb = t.df * (1.0 - state[v]);
            let wr = t.dg * state[v];
            let diag = t.f + t.g;
            for (e, o) in tangents.iter().zip(out.iter_mut()) {
                let cb = self.c_b.average(e, v);
                let cr = if self.shared { cb } else { self.c_r.average(e, v) };
                o[v] = wb * cb - wr * cr - diag * e[v];
            }
        }
    }
}

pub fn mean_blue(state: &[f64]) -> f64 {
    state.iter().sum::<f64>() / state.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub mean_blue: Vec<f64>,
    pub min_blue: Vec<f64>,
    pub max_blue: Vec<f64>,
    pub states: Option<Vec<Vec<f64>>>,
    pub final_state: Vec<f64>,
    /// Largest pre-clamp excursion outside `[0, 1]` seen over the run.
    pub max_excursion: f64,
}

impl Trajectory {
    fn record(&mut self, t: f64, state: &[f64]) {
        self.times.push(t);
        self.mean_blue.push(mean_blue(state));
        let (lo, hi) = state
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        self.min_blue.push(lo);
        self.max_blue.push(hi);
        if let Some(states) = self.states.as_mut() {
            states.push(state.to_vec());
        }
    }
}

/// One integration step on the event-aligned grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct GridStep {
    pub t0: f64,
    pub t1: f64,
    /// Events whose time equals `t1` fire after this step.
    pub fire_events: bool,
}

/// Fixed-step grid on `[0, t_end]` with a shortened step landing exactly on
/// each breakpoint.
pub(crate) fn step_grid(t_end: f64, h: f64, breakpoints: &[f64]) -> Vec<GridStep> {
    let mut marks: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && t < t_end)
        .collect();
    marks.dedup();
    marks.push(t_end);
    let mut steps = Vec::new();
    let mut start = 0.0;
    for (i, &stop) in marks.iter().enumerate() {
        let span = stop - start;
        if span <= 0.0 {
            continue;
        }
        let count = ((span / h) - 1e-9).ceil().max(1.0) as usize;
        for k in 0..count {
            let t0 = start + k as f64 * h;
            let t1 = if k + 1 == count {
                stop
            } else {
                start + (k + 1) as f64 * h
            };
            steps.push(GridStep {
                t0,
                t1,
                fire_events: k + 1 == count && i + 1 < marks.len(),
            });
        }
        start = stop;
    }
    steps
}

/// Scratch buffers for one classical RK4 step.
pub(crate) struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(n: usize) -> Self {
        Self {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }

    pub fn step(&mut self, model: &Model, state: &mut [f64], dt: f64) {
        model.rhs_into(state, &mut self.k1);
        axpy_into(&mut self.tmp, state, 0.5 * dt, &self.k1);
        model.rhs_into(&self.tmp, &mut self.k2);
        axpy_into(&mut self.tmp, state, 0.5 * dt, &self.k2);
        model.rhs_into(&self.tmp, &mut self.k3);
        axpy_into(&mut self.tmp, state, dt, &self.k3);
        model.rhs_into(&self.tmp, &mut self.k4);
        for (i, x) in state.iter_mut().enumerate() {
            *x += dt / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

fn axpy_into(out: &mut [f64], x: &[f64], a: f64, y: &[f64]) {
    for ((o, xi), yi) in out.iter_mut().zip(x).zip(y) {
        *o = xi + a * yi;
    }
}

/// Clamps into `[0, 1]` and returns the largest excursion removed.
pub(crate) fn clamp_unit(state: &mut [f64], time: f64) -> Result<f64, DynamicsError> {
    let mut excursion: f64 = 0.0;
    for x in state.iter_mut() {
        if !x.is_finite() {
            return Err(DynamicsError::NonFinite(time));
        }
        if *x < 0.0 {
            excursion = excursion.max(-*x);
            *x = 0.0;
        } else if *x > 1.0 {
            excursion = excursion.max(*x - 1.0);
            *x = 1.0;
        }
    }
    if excursion > MAX_EXCURSION {
        return Err(DynamicsError::StepTooLarge { time, excursion });
    }
    Ok(excursion)
}

pub(crate) fn apply_event(
    action: &EventAction,
    model: &mut Model,
    state: &mut [f64],
    rng: &mut ChaCha8Rng,
) {
    match action {
        EventAction::SwitchFunctions { f, g } => {
            model.f = f.clone();
            model.g = g.clone();
        }
        EventAction::PerturbState { sign, lo, hi } => {
            for x in state.iter_mut() {
                let eps = lo + (hi - lo) * rng.random::<f64>();
                *x = (*x + sign.factor() * eps).clamp(0.0, 1.0);
            }
        }
    }
}

/// Classical fixed-step RK4 over `[0, t_end]`.
///
/// Events fire exactly at their scheduled times. After every step the state
/// is clamped into `[0, 1]`; an excursion above [`MAX_EXCURSION`] aborts the
/// run.
pub fn integrate(cfg: &SimConfig) -> Result<Trajectory, DynamicsError> {
    cfg.validate()?;
    let mut model = cfg.model()?;
    let mut state = cfg.initial_state();
    integrate_from(cfg, &mut model, &mut state)
}

pub(crate) fn integrate_from(
    cfg: &SimConfig,
    model: &mut Model,
    state: &mut [f64],
) -> Result<Trajectory, DynamicsError> {
    let n = state.len();
    let mut rng = stream_rng(cfg.seed, EVENT_STREAM);
    let mut traj = Trajectory {
        times: Vec::new(),
        mean_blue: Vec::new(),
        min_blue: Vec::new(),
        max_blue: Vec::new(),
        states: cfg.record_states.then(Vec::new),
        final_state: Vec::new(),
        max_excursion: 0.0,
    };
    let mut events = cfg.events.iter().peekable();
    while let Some(e) = events.next_if(|e| e.time <= 0.0) {
        apply_event(&e.action, model, state, &mut rng);
    }
    traj.record(0.0, state);

    let times: Vec<f64> = cfg.events.iter().map(|e| e.time).collect();
    let grid = step_grid(cfg.t_end, cfg.step, &times);
    let mut rk = Rk4::new(n);
    let last = grid.len();
    for (i, s) in grid.iter().enumerate() {
        rk.step(model, state, s.t1 - s.t0);
        let exc = clamp_unit(state, s.t1)?;
        traj.max_excursion = traj.max_excursion.max(exc);
        if s.fire_events || i + 1 == last {
            while let Some(e) = events.next_if(|e| e.time <= s.t1) {
                apply_event(&e.action, model, state, &mut rng);
            }
        }
        if (i + 1) % cfg.record_every == 0 || i + 1 == last {
            traj.record(s.t1, state);
        }
    }
    traj.final_state = state.to_vec();
    Ok(traj)
}
