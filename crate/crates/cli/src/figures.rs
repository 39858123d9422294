//! Canned experiments reproducing the setups behind each published figure.

use acdd_core::dynamics::{
    self, EventAction, InitialCondition, ScheduleEvent, Sign, SimConfig, Trajectory,
};
use acdd_core::power::PowerFunction;
use acdd_core::spectral::{find_hopf_critical, HopfOptions, NuFamily};
use acdd_core::threshold::{classify_outcome, initial_membership, ThresholdSpec};
use serde::Serialize;

use crate::commands::{self, trajectory_table, Graphs};
use crate::config::{
    Command, ExperimentConfig, GraphSource, HopfSection, LyapunovSection, NuRange, Overrides,
    Scale, Simulation, StructuralSection, SweepSection,
};
use crate::error::CliError;
use crate::output::{Cell, Table};

pub const FIGURES: [&str; 14] = [
    "fig2a", "fig2b", "fig2c", "fig2d", "fig3", "fig4", "fig5b", "fig6a", "fig6b", "fig6c",
    "fig6d", "fig7", "fig8a", "fig8b",
];

const PAPER_NODES: usize = 2000;
const PAPER_P: f64 = 0.005;
/// Mean degrees of the two published structural-churn instances.
const FIG7_DEGREE_B: f64 = 10.0565;
const FIG7_DEGREE_R: f64 = 11.1865;

#[derive(Debug, Clone, Serialize)]
pub struct FigureRecord {
    pub figure: String,
    pub scale: Scale,
    pub seed: u64,
    pub runs: Vec<ExperimentConfig>,
}

pub struct FigureOutput {
    pub record: FigureRecord,
    pub tables: Vec<Table>,
}

struct Ctx {
    scale: Scale,
    seed: u64,
    runs: Vec<ExperimentConfig>,
}

impl Ctx {
    fn desk(&self) -> bool {
        self.scale == Scale::Desk
    }

    fn pick<T>(&self, paper: T, desk: T) -> T {
        if self.desk() {
            desk
        } else {
            paper
        }
    }

    fn er(&self, p: f64, offset: u64) -> GraphSource {
        GraphSource::er(PAPER_NODES, p, self.seed + offset)
    }

    fn base(&self, f: PowerFunction, g: PowerFunction, graph_r: Option<GraphSource>) -> ExperimentConfig {
        ExperimentConfig {
            command: None,
            seed: self.seed + 2,
            out: None,
            graph_b: self.er(PAPER_P, 0),
            graph_r,
            f,
            g,
            simulation: Simulation::default(),
            threshold: None,
            hopf: None,
            sweep: None,
            structural: None,
            lyapunov: None,
            perturb: None,
        }
    }

    fn resolve(&self, cfg: ExperimentConfig, command: Command) -> Result<ExperimentConfig, CliError> {
        cfg.resolve(Overrides {
            command: Some(command),
            seed: None,
            scale: Some(self.scale),
        })
    }

    /// Resolves at the context scale, runs, and keeps the resolved config.
    fn run(&mut self, cfg: ExperimentConfig, command: Command) -> Result<Vec<Table>, CliError> {
        let mut cfg = self.resolve(cfg, command)?;
        let tables = commands::execute(&mut cfg)?;
        self.runs.push(cfg);
        Ok(tables)
    }

    fn integrate(&mut self, cfg: ExperimentConfig) -> Result<(SimConfig, Trajectory), CliError> {
        let cfg = self.resolve(cfg, Command::Simulate)?;
        let sim = commands::sim_config(&cfg, &Graphs::build(&cfg)?);
        let traj = dynamics::integrate(&sim)?;
        self.runs.push(cfg);
        Ok((sim, traj))
    }
}

fn poly(c: &[f64]) -> PowerFunction {
    PowerFunction::polynomial(c.to_vec())
}

fn scenario(id: char) -> PowerFunction {
    match id {
        'a' => poly(&[0.0, 0.0, 1.0]),
        'b' => poly(&[0.0, 1.0, 1.0]),
        'c' => poly(&[0.0, 0.5, 1.0]),
        _ => poly(&[0.0, 2.0, -2.0]),
    }
}

fn g_linear() -> PowerFunction {
    poly(&[1.0, -1.0])
}

fn hopf_f() -> PowerFunction {
    poly(&[0.0, 4.0, -4.0])
}

/// Long-format table of several runs keyed by `keys`.
fn fan(keys: &[&str], runs: &[(Vec<f64>, Trajectory)]) -> Table {
    let header: Vec<&str> = keys.iter().copied().chain(["t", "mean_blue"]).collect();
    let mut out = Table::new("fan.csv", &header);
    for (key, traj) in runs {
        for (&t, &m) in traj.times.iter().zip(&traj.mean_blue) {
            let mut row: Vec<Cell> = key.iter().map(|&k| k.into()).collect();
            row.extend([t.into(), m.into()]);
            out.push(row);
        }
    }
    out
}

const FAN_INITIALS: [f64; 6] = [0.1, 0.3, 0.45, 0.55, 0.7, 0.9];

fn fig2(ctx: &mut Ctx, id: char) -> Result<Vec<Table>, CliError> {
    let main_initial = match id {
        'a' => InitialCondition::Constant { value: 0.9 },
        'b' => InitialCondition::Constant { value: 0.1 },
        'c' => InitialCondition::Constant { value: 0.6 },
        _ => InitialCondition::Uniform { lo: 0.0, hi: 1.0 },
    };
    let mut cfg = ctx.base(scenario(id), g_linear(), None);
    cfg.simulation.initial = main_initial;
    let main = trajectory_table(&ctx.integrate(cfg.clone())?.1);
    let mut runs = Vec::new();
    for value in FAN_INITIALS {
        let mut c = cfg.clone();
        c.simulation.initial = InitialCondition::Constant { value };
        c.simulation.record_every = 10;
        runs.push((vec![value], ctx.integrate(c)?.1));
    }
    Ok(vec![main, fan(&["initial"], &runs)])
}

fn fig3(ctx: &mut Ctx) -> Result<Vec<Table>, CliError> {
    let mut cfg = ctx.base(scenario('b'), g_linear(), None);
    cfg.simulation.initial = InitialCondition::Uniform { lo: 0.0, hi: 0.01 };
    cfg.simulation.t_end = 500.0;
    for (time, f, sign) in [
        (150.0, scenario('a'), Sign::Minus),
        (300.0, scenario('d'), Sign::Plus),
        (400.0, scenario('c'), Sign::Minus),
    ] {
        cfg.simulation.events.push(ScheduleEvent {
            time,
            action: EventAction::SwitchFunctions { f, g: g_linear() },
        });
        cfg.simulation.events.push(ScheduleEvent {
            time,
            action: EventAction::PerturbState {
                sign,
                lo: 0.0,
                hi: 0.01,
            },
        });
    }
    Ok(vec![trajectory_table(&ctx.integrate(cfg)?.1)])
}

fn fig4(ctx: &mut Ctx) -> Result<Vec<Table>, CliError> {
    let g = poly(&[1.0, -4.0, 4.0]);
    let mut runs = Vec::new();
    for nu in [0.5, 0.8, 0.85, 1.0, 1.5, 2.0] {
        for value in FAN_INITIALS {
            let mut cfg = ctx.base(PowerFunction::linear_minus_quadratic(nu), g.clone(), None);
            cfg.graph_b = ctx.er(0.5, 0);
            cfg.simulation.initial = InitialCondition::Constant { value };
            cfg.simulation.t_end = 100.0;
            cfg.simulation.record_every = 10;
            runs.push((vec![nu, value], ctx.integrate(cfg)?.1));
        }
    }
    Ok(vec![fan(&["nu", "initial"], &runs)])
}

fn fig5b(ctx: &mut Ctx) -> Result<Vec<Table>, CliError> {
    let f = PowerFunction::logistic(-10.0, 5.0);
    let g = poly(&[2.0, -4.0, 2.0]);
    let spec = ThresholdSpec {
        tau1: 0.5,
        tau2: 0.5,
        alpha: 0.99,
        beta: 0.99,
        strict: true,
    };
    let mut runs = Vec::new();
    let mut outcomes = Table::new(
        "transition.csv",
        &["initial", "membership", "outcome", "t_decide"],
    );
    for value in [0.1, 0.2, 0.3, 0.4, 0.6, 0.7, 0.8, 0.9] {
        let mut cfg = ctx.base(f.clone(), g.clone(), Some(ctx.er(0.5, 1)));
        cfg.graph_b = ctx.er(0.5, 0);
        cfg.simulation.initial = InitialCondition::Constant { value };
        cfg.simulation.t_end = 100.0;
        cfg.simulation.record_every = 10;
        let (sim, traj) = ctx.integrate(cfg)?;
        let (outcome, t_decide) = classify_outcome(&traj);
        outcomes.push(vec![
            value.into(),
            initial_membership(&sim, &spec).as_str().into(),
            outcome.as_str().into(),
            t_decide.into(),
        ]);
        runs.push((vec![value], traj));
    }
    Ok(vec![fan(&["initial"], &runs), outcomes])
}

fn hopf_base(ctx: &Ctx, nu: f64) -> ExperimentConfig {
    let mut cfg = ctx.base(hopf_f(), PowerFunction::centered_quadratic(nu), None);
    cfg.simulation.t_end = ctx.pick(2000.0, 1000.0);
    cfg
}

/// `ν* + 0.2` from a grid search on the instance in use.
fn above_critical(ctx: &mut Ctx) -> Result<f64, CliError> {
    let mut cfg = hopf_base(ctx, 4.0);
    cfg.hopf = Some(HopfSection::default());
    let cfg = ctx.resolve(cfg, Command::Hopf)?;
    let graphs = Graphs::build(&cfg)?;
    let c = graphs.b.row_normalized()?;
    let h = cfg.hopf.clone().expect("resolved config");
    let family = NuFamily {
        f: &cfg.f,
        g: &cfg.g,
        c_b: &c,
        c_r: &c,
    };
    let res = find_hopf_critical(&family, (h.nu_lo, h.nu_hi), h.step, HopfOptions::default())?;
    ctx.runs.push(cfg);
    Ok(res.nu_star + 0.2)
}

fn fig6_trajectory(ctx: &mut Ctx, nu: f64) -> Result<Vec<Table>, CliError> {
    let mut cfg = hopf_base(ctx, nu);
    cfg.simulation.record_every = 10;
    Ok(vec![trajectory_table(&ctx.integrate(cfg)?.1)])
}

fn fig6_sweep(ctx: &mut Ctx, lo: f64, hi: f64, step: f64) -> Result<Vec<Table>, CliError> {
    let mut cfg = hopf_base(ctx, lo);
    let t_end = cfg.simulation.t_end;
    cfg.sweep = Some(SweepSection {
        nu_lo: lo,
        nu_hi: hi,
        step,
        window: Some((t_end / 2.0, t_end)),
        ..SweepSection::default()
    });
    ctx.run(cfg, Command::Sweep)
}

fn fig7(ctx: &mut Ctx) -> Result<Vec<Table>, CliError> {
    let n1 = PAPER_NODES as f64 - 1.0;
    let mut cfg = hopf_base(ctx, 6.0);
    cfg.graph_b = ctx.er(FIG7_DEGREE_B / n1, 0);
    cfg.graph_r = Some(ctx.er(FIG7_DEGREE_R / n1, 1));
    let t_end = cfg.simulation.t_end;
    cfg.structural = Some(StructuralSection {
        iterations: ctx.pick(100, 40),
        window: Some((t_end / 2.0, t_end)),
        ..StructuralSection::default()
    });
    ctx.run(cfg, Command::StructuralSweep)
}

fn fig8a(ctx: &mut Ctx) -> Result<Vec<Table>, CliError> {
    let mut cfg = hopf_base(ctx, 3.0);
    cfg.lyapunov = Some(LyapunovSection {
        t_total: ctx.pick(2000.0, 1000.0),
        nu_grid: Some(NuRange {
            lo: 3.0,
            hi: 8.0,
            step: ctx.pick(0.1, 0.25),
        }),
        ..LyapunovSection::default()
    });
    ctx.run(cfg, Command::Lyapunov)
}

pub fn emit(figure: &str, scale: Scale, seed: u64) -> Result<FigureOutput, CliError> {
    let mut ctx = Ctx {
        scale,
        seed,
        runs: Vec::new(),
    };
    let tables = match figure {
        "fig2a" | "fig2b" | "fig2c" | "fig2d" => fig2(&mut ctx, figure.chars().last().expect("id"))?,
        "fig3" => fig3(&mut ctx)?,
        "fig4" => fig4(&mut ctx)?,
        "fig5b" => fig5b(&mut ctx)?,
        "fig6a" => {
            let nu = if ctx.desk() { above_critical(&mut ctx)? } else { 4.0 };
            fig6_trajectory(&mut ctx, nu)?
        }
        "fig6b" => fig6_trajectory(&mut ctx, 5.05)?,
        "fig6c" => {
            let step = ctx.pick(0.01, 0.05);
            fig6_sweep(&mut ctx, 3.0, 6.0, step)?
        }
        "fig6d" => {
            let step = ctx.pick(0.005, 0.025);
            fig6_sweep(&mut ctx, 4.75, 5.5, step)?
        }
        "fig7" => fig7(&mut ctx)?,
        "fig8a" => fig8a(&mut ctx)?,
        "fig8b" => fig6_trajectory(&mut ctx, 8.0)?,
        other => {
            return Err(CliError::ConfigValidation(format!(
                "unknown figure `{other}`; expected one of {}",
                FIGURES.join(", ")
            )))
        }
    };
    Ok(FigureOutput {
        record: FigureRecord {
            figure: figure.to_owned(),
            scale,
            seed,
            runs: ctx.runs,
        },
        tables,
    })
}

