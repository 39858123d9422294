use std::path::PathBuf;

use acdd_core::chaos::ChaosError;
use acdd_core::dynamics::DynamicsError;
use acdd_core::equilibrium::EquilibriumError;
use acdd_core::graph::GraphError;
use acdd_core::linalg::LinalgError;
use acdd_core::power::PowerError;
use acdd_core::spectral::SpectralError;
use acdd_core::threshold::ThresholdError;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot parse config: {0}")]
    ConfigParse(String),
    #[error("invalid config: {0}")]
    ConfigValidation(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Power(#[from] PowerError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
    #[error(transparent)]
    Threshold(#[from] ThresholdError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Chaos(#[from] ChaosError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("refusing to write non-finite value in column `{column}` of {file}")]
    NonFinite { file: String, column: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Config,
    Generation,
    Numerical,
    Io,
}

impl Category {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Config => 2,
            Self::Generation => 3,
            Self::Numerical => 4,
            Self::Io => 5,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorRecord {
    pub error: &'static str,
    pub category: &'static str,
    pub exit_code: i32,
    pub message: String,
}

fn graph_kind(e: &GraphError) -> (&'static str, Category) {
    use GraphError::*;
    match e {
        IsolatedNode(_) => ("IsolatedNode", Category::Generation),
        SelfLoop(_) => ("SelfLoop", Category::Generation),
        DuplicateEdge(..) => ("DuplicateEdge", Category::Generation),
        NodeOutOfRange(..) => ("NodeOutOfRange", Category::Generation),
        InvalidParameters(_) => ("InvalidParameters", Category::Config),
        GenerationFailed(_) => ("GenerationFailed", Category::Generation),
        NotEnoughEdges { .. } => ("NotEnoughEdges", Category::Generation),
        NotEnoughNonEdges { .. } => ("NotEnoughNonEdges", Category::Generation),
        EdgeNotPresent(..) => ("EdgeNotPresent", Category::Generation),
        EdgeAlreadyPresent(..) => ("EdgeAlreadyPresent", Category::Generation),
        Parse { .. } => ("GraphParseError", Category::Config),
        Linalg(e) => linalg_kind(e),
    }
}

fn linalg_kind(e: &LinalgError) -> (&'static str, Category) {
    match e {
        LinalgError::EigenSolverFailure(_) => ("EigenSolverFailure", Category::Numerical),
        LinalgError::NotSquare { .. } => ("NotSquare", Category::Numerical),
    }
}

fn power_kind(e: &PowerError) -> (&'static str, Category) {
    match e {
        PowerError::Domain(_) => ("DomainError", Category::Config),
        PowerError::NotParameterized(_) => ("NotParameterized", Category::Config),
    }
}

fn dynamics_kind(e: &DynamicsError) -> (&'static str, Category) {
    match e {
        DynamicsError::StepTooLarge { .. } => ("StepTooLarge", Category::Numerical),
        DynamicsError::NonFinite(_) => ("NonFinite", Category::Numerical),
        DynamicsError::Config(_) => ("ConfigValidationError", Category::Config),
        DynamicsError::Graph(e) => graph_kind(e),
    }
}

impl CliError {
    pub fn classify(&self) -> (&'static str, Category) {
        match self {
            Self::ConfigParse(_) => ("ConfigParseError", Category::Config),
            Self::ConfigValidation(_) => ("ConfigValidationError", Category::Config),
            Self::Graph(e) => graph_kind(e),
            Self::Power(e) => power_kind(e),
            Self::Dynamics(e) => dynamics_kind(e),
            Self::Equilibrium(e) => match e {
                EquilibriumError::Linalg(e) => linalg_kind(e),
                EquilibriumError::DegenerateCoefficient(_) => {
                    ("DegenerateCoefficient", Category::Numerical)
                }
            },
            Self::Threshold(e) => match e {
                ThresholdError::InvalidSpec(_) => ("InvalidSpec", Category::Config),
                ThresholdError::GridTooSmall(_) => ("GridTooSmall", Category::Config),
                ThresholdError::Dynamics(e) => dynamics_kind(e),
            },
            Self::Spectral(e) => {
                use SpectralError::*;
                match e {
                    Linalg(e) => linalg_kind(e),
                    DegenerateLeading { .. } => ("DegenerateLeading", Category::Numerical),
                    Residual { .. } => ("ResidualTooLarge", Category::Numerical),
                    IllConditioned(_) => ("IllConditioned", Category::Numerical),
                    NoCrossing { .. } => ("NoCrossing", Category::Numerical),
                    RootLost(_) => ("RootLost", Category::Numerical),
                    InvalidRange(_) => ("InvalidRange", Category::Config),
                    Power(e) => power_kind(e),
                }
            }
            Self::Chaos(e) => match e {
                ChaosError::Dynamics(e) => dynamics_kind(e),
                ChaosError::Graph(e) => graph_kind(e),
                ChaosError::Power(e) => power_kind(e),
                ChaosError::Config(_) => ("ConfigValidationError", Category::Config),
                ChaosError::NonFinite(_) => ("NonFinite", Category::Numerical),
            },
            Self::Linalg(e) => linalg_kind(e),
            Self::NonFinite { .. } => ("NonFinite", Category::Numerical),
            Self::Io { .. } => ("IoError", Category::Io),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.classify().1.exit_code()
    }

    pub fn record(&self) -> ErrorRecord {
        let (error, category) = self.classify();
        ErrorRecord {
            error,
            category: match category {
                Category::Config => "config",
                Category::Generation => "generation",
                Category::Numerical => "numerical",
                Category::Io => "io",
            },
            exit_code: category.exit_code(),
            message: self.to_string(),
        }
    }
}

pub fn io_error(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}
