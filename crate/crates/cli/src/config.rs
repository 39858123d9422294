//! Experiment configuration: one JSON document per run.

use std::path::{Path, PathBuf};

use acdd_core::dynamics::{InitialCondition, ScheduleEvent};
use acdd_core::graph::{generate_er, Graph};
use acdd_core::power::PowerFunction;
use serde::{Deserialize, Serialize};

use crate::error::{io_error, CliError};

/// Node count of the reduced desk-scale instances.
pub const DESK_NODES: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    Equilibria,
    Threshold,
    Hopf,
    Sweep,
    StructuralSweep,
    Lyapunov,
    PerturbEstimate,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::Equilibria => "equilibria",
            Self::Threshold => "threshold",
            Self::Hopf => "hopf",
            Self::Sweep => "sweep",
            Self::StructuralSweep => "structural-sweep",
            Self::Lyapunov => "lyapunov",
            Self::PerturbEstimate => "perturb-estimate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    Paper,
    Desk,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GraphSource {
    Er {
        n: usize,
        p: f64,
        #[serde(default = "yes")]
        directed: bool,
        /// Defaults to the run seed (`graph_b`) or the run seed plus one
        /// (`graph_r`).
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Complete {
        n: usize,
    },
    Cycle {
        n: usize,
        #[serde(default)]
        directed: bool,
    },
    File {
        path: PathBuf,
    },
}

impl GraphSource {
    pub fn er(n: usize, p: f64, seed: u64) -> Self {
        Self::Er {
            n,
            p,
            directed: true,
            seed: Some(seed),
        }
    }

    /// `n = 500` with the mean degree `p(n − 1)` preserved. Dense instances
    /// whose degree cannot be kept keep their `p`.
    pub fn desk_scaled(&self) -> Self {
        match *self {
            Self::Er {
                n,
                p,
                directed,
                seed,
            } if n != DESK_NODES => {
                let scaled = p * (n as f64 - 1.0) / (DESK_NODES as f64 - 1.0);
                Self::Er {
                    n: DESK_NODES,
                    p: if scaled <= 1.0 { scaled } else { p },
                    directed,
                    seed,
                }
            }
            _ => self.clone(),
        }
    }

    fn with_default_seed(self, default: u64) -> Self {
        match self {
            Self::Er {
                n,
                p,
                directed,
                seed: None,
            } => Self::Er {
                n,
                p,
                directed,
                seed: Some(default),
            },
            other => other,
        }
    }

    pub fn build(&self) -> Result<Graph, CliError> {
        match self {
            Self::Er {
                n,
                p,
                directed,
                seed,
            } => Ok(generate_er(*n, *p, *directed, seed.unwrap_or(0))?),
            Self::Complete { n } => Ok(Graph::complete(*n)),
            Self::Cycle { n, directed } => Ok(Graph::cycle(*n, *directed)),
            Self::File { path } => {
                let text = std::fs::read_to_string(path).map_err(io_error(path))?;
                Ok(Graph::parse(&text)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Simulation {
    pub initial: InitialCondition,
    pub t_end: f64,
    pub step: f64,
    pub record_every: usize,
    pub events: Vec<ScheduleEvent>,
    pub record_states: bool,
}

impl Default for Simulation {
    fn default() -> Self {
        Self {
            initial: InitialCondition::Uniform { lo: 0.0, hi: 1.0 },
            t_end: 200.0,
            step: 0.01,
            record_every: 1,
            events: Vec::new(),
            record_states: false,
        }
    }
}

fn default_grid() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSection {
    pub tau1: f64,
    pub tau2: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub strict: bool,
    #[serde(default = "default_grid")]
    pub grid: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HopfSection {
    pub nu_lo: f64,
    pub nu_hi: f64,
    pub step: f64,
    pub refine: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_guess: Option<f64>,
}

impl Default for HopfSection {
    fn default() -> Self {
        Self {
            nu_lo: 3.0,
            nu_hi: 5.0,
            step: 0.01,
            refine: false,
            sigma_guess: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub nu_lo: f64,
    pub nu_hi: f64,
    pub step: f64,
    /// Defaults to the second half of the run.
    pub window: Option<(f64, f64)>,
    pub cluster_tol: f64,
    pub chain: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            nu_lo: 3.0,
            nu_hi: 6.0,
            step: 0.05,
            window: None,
            cluster_tol: acdd_core::chaos::DEFAULT_CLUSTER_TOL,
            chain: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StructuralSection {
    pub iterations: usize,
    /// Defaults to 1% of `|E_R|`, rounded up.
    pub edges_per_iteration: Option<usize>,
    pub window: Option<(f64, f64)>,
    pub cluster_tol: f64,
}

impl Default for StructuralSection {
    fn default() -> Self {
        Self {
            iterations: 40,
            edges_per_iteration: None,
            window: None,
            cluster_tol: acdd_core::chaos::DEFAULT_CLUSTER_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NuRange {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LyapunovSection {
    pub k: usize,
    pub t_transient: f64,
    pub t_total: f64,
    pub qr_interval: f64,
    /// When given, the MLE is reported for every ν on this grid instead of
    /// the top-k spectrum at the configured functions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_grid: Option<NuRange>,
}

impl Default for LyapunovSection {
    fn default() -> Self {
        let d = acdd_core::chaos::LyapunovParams::default();
        Self {
            k: d.k,
            t_transient: d.t_transient,
            t_total: d.t_total,
            qr_interval: d.qr_interval,
            nu_grid: None,
        }
    }
}

impl LyapunovSection {
    pub fn params(&self) -> acdd_core::chaos::LyapunovParams {
        acdd_core::chaos::LyapunovParams {
            k: self.k,
            t_transient: self.t_transient,
            t_total: self.t_total,
            qr_interval: self.qr_interval,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbSection {
    /// Defaults to the smallest interior H₀ root, else the smallest root.
    pub sigma: Option<f64>,
    pub d_nu: Vec<f64>,
    /// Edges deleted from `G_R`; defaults to 1% of `|E_R|`, rounded up.
    pub delete: Option<usize>,
    pub add: usize,
}

impl Default for PerturbSection {
    fn default() -> Self {
        Self {
            sigma: None,
            d_nu: vec![1e-2, 5e-3, 2.5e-3],
            delete: None,
            add: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub graph_b: GraphSource,
    /// Absent means `G_R = G_B`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph_r: Option<GraphSource>,
    pub f: PowerFunction,
    pub g: PowerFunction,
    #[serde(default)]
    pub simulation: Simulation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<ThresholdSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hopf: Option<HopfSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structural: Option<StructuralSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lyapunov: Option<LyapunovSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturb: Option<PerturbSection>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub command: Option<Command>,
    pub seed: Option<u64>,
    pub scale: Option<Scale>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::ConfigParse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(io_error(path))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for source in std::iter::once(&mut cfg.graph_b).chain(cfg.graph_r.as_mut()) {
            if let GraphSource::File { path } = source {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        }
        Ok(cfg)
    }

    pub fn shared_graph(&self) -> bool {
        self.graph_r.is_none()
    }

    /// Applies command-line overrides and expands every default the chosen
    /// command depends on, so the result can be replayed verbatim.
    pub fn resolve(mut self, overrides: Overrides) -> Result<Self, CliError> {
        let command = match (overrides.command, self.command) {
            (Some(a), Some(b)) if a != b => {
                return Err(CliError::ConfigValidation(format!(
                    "config is for `{}` but `{}` was requested",
                    b.as_str(),
                    a.as_str()
                )))
            }
            (Some(c), _) | (None, Some(c)) => c,
            (None, None) => {
                return Err(CliError::ConfigValidation("no command given".into()));
            }
        };
        self.command = Some(command);
        if let Some(seed) = overrides.seed {
            self.seed = seed;
        }
        if overrides.scale == Some(Scale::Desk) {
            self.graph_b = self.graph_b.desk_scaled();
            self.graph_r = self.graph_r.map(|g| g.desk_scaled());
        }
        self.graph_b = self.graph_b.with_default_seed(self.seed);
        self.graph_r = self
            .graph_r
            .map(|g| g.with_default_seed(self.seed.wrapping_add(1)));
        for source in std::iter::once(&self.graph_b).chain(self.graph_r.as_ref()) {
            if let GraphSource::File { path } = source {
                if !path.is_file() {
                    return Err(CliError::ConfigValidation(format!(
                        "graph file {} does not exist",
                        path.display()
                    )));
                }
            }
        }
        let t_end = self.simulation.t_end;
        let half = (t_end / 2.0, t_end);
        match command {
            Command::Threshold if self.threshold.is_none() => {
                return Err(CliError::ConfigValidation(
                    "the threshold command needs a `threshold` section".into(),
                ));
            }
            Command::Hopf => {
                self.hopf.get_or_insert_with(Default::default);
            }
            Command::Sweep => {
                let s = self.sweep.get_or_insert_with(Default::default);
                s.window.get_or_insert(half);
            }
            Command::StructuralSweep => {
                let s = self.structural.get_or_insert_with(Default::default);
                s.window.get_or_insert(half);
            }
            Command::Lyapunov => {
                self.lyapunov.get_or_insert_with(Default::default);
            }
            Command::PerturbEstimate => {
                self.perturb.get_or_insert_with(Default::default);
            }
            _ => {}
        }
        Ok(self)
    }

    pub fn command(&self) -> Command {
        self.command.expect("resolved config")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "graph_b": {"kind": "er", "n": 2000, "p": 0.005},
        "f": {"family": "polynomial", "coefficients": [0, 0.5, 1]},
        "g": {"family": "polynomial", "coefficients": [1, -1]}
    }"#;

    #[test]
    fn unknown_keys_are_rejected() {
        let typo = MINIMAL.replace("\"graph_b\"", "\"seed\": 1, \"grahp_r\": null, \"graph_b\"");
        assert!(matches!(
            ExperimentConfig::parse(&typo),
            Err(CliError::ConfigParse(_))
        ));
        let nested = MINIMAL.replace("\"p\": 0.005", "\"p\": 0.005, \"prob\": 1");
        assert!(ExperimentConfig::parse(&nested).is_err());
    }

    #[test]
    fn resolution_expands_defaults_and_round_trips() {
        let cfg = ExperimentConfig::parse(MINIMAL).unwrap();
        let resolved = cfg
            .resolve(Overrides {
                command: Some(Command::Sweep),
                seed: Some(7),
                scale: Some(Scale::Desk),
            })
            .unwrap();
        let GraphSource::Er { n, p, seed, .. } = resolved.graph_b else {
            panic!()
        };
        assert_eq!((n, seed), (DESK_NODES, Some(7)));
        assert!((p * 499.0 - 0.005 * 1999.0).abs() < 1e-12);
        assert_eq!(resolved.sweep.as_ref().unwrap().window, Some((100.0, 200.0)));
        let text = serde_json::to_string(&resolved).unwrap();
        let again = ExperimentConfig::parse(&text)
            .unwrap()
            .resolve(Overrides::default())
            .unwrap();
        assert_eq!(again, resolved);
    }

    #[test]
    fn dense_graphs_keep_their_density() {
        let dense = GraphSource::er(2000, 0.5, 1).desk_scaled();
        assert_eq!(dense, GraphSource::er(DESK_NODES, 0.5, 1));
    }

    #[test]
    fn command_conflicts_and_missing_sections() {
        let mut cfg = ExperimentConfig::parse(MINIMAL).unwrap();
        cfg.command = Some(Command::Hopf);
        let err = cfg.clone().resolve(Overrides {
            command: Some(Command::Sweep),
            ..Default::default()
        });
        assert!(matches!(err, Err(CliError::ConfigValidation(_))));
        cfg.command = Some(Command::Threshold);
        assert!(cfg.resolve(Overrides::default()).is_err());
    }
}
