use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported spatial dimension {0}, expected 2 or 3")]
    Dimension(usize),

    #[error("direction vector must have unit length, got |n| = {norm}")]
    Normalization { norm: f64 },

    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("axis {axis} out of range for dimension {dim}")]
    Axis { axis: usize, dim: usize },

    #[error("inadmissible model: {0}")]
    Model(String),

    #[error("invalid data parameters: {0}")]
    Data(String),

    #[error("{0} needs a time derivative that was not supplied")]
    MissingTimeDerivative(String),

    #[error("evolution diverged at step {step} (t = {time})")]
    Divergence { step: usize, time: f64 },

    #[error("reference integrator unstable: norm grew from {before} to {after}")]
    Unstable { before: f64, after: f64 },

    #[error("decay fit: {0}")]
    Fit(String),

    #[error("zero denominator in {0}")]
    ZeroDenominator(&'static str),

    #[error("scattering analysis: {0}")]
    Scatter(String),

    #[error("configuration rejected: {}", format_violations(.0))]
    Config(Vec<ConfigViolation>),

    #[error("snapshot format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One failed validation rule of a run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigViolation {
    pub rule: &'static str,
    pub detail: String,
}

impl ConfigViolation {
    pub fn new(rule: &'static str, detail: impl Into<String>) -> Self {
        ConfigViolation { rule, detail: detail.into() }
    }
}

impl std::fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.rule, self.detail)
    }
}

fn format_violations(v: &[ConfigViolation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}
