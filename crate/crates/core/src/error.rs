use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("resource limit exceeded: {what} needs {needed}, ceiling is {ceiling}")]
    ResourceLimit {
        what: &'static str,
        needed: usize,
        ceiling: usize,
    },

    #[error("numerical failure in {context}: {detail}")]
    NumericalFailure { context: String, detail: String },

    #[error("local oscillator is empty (pump population {0}); depleted-LO regime")]
    DepletedLocalOscillator(f64),

    #[error("degenerate inference: conditioning variance {0} is not positive")]
    DegenerateInference(f64),

    #[error("degenerate variance in {0}")]
    DegenerateVariance(&'static str),

    #[error("EPR criterion undefined: signal/LO ratio {0} leaves the formula's regime")]
    CriterionUndefined(f64),

    #[error("closed-form expression breaks down: {0}")]
    FormulaBreakdown(String),

    #[error("root not found: {0}")]
    RootNotFound(String),

    #[error("no EPR entanglement at vacuum seed (Upsilon_min = {0})")]
    NoEntanglementAtVacuum(f64),

    #[error("backend {backend} cannot handle {seed} seeds")]
    Routing {
        backend: &'static str,
        seed: &'static str,
    },

    #[error("nonzero linear Zeeman term p/g = {0} is not supported")]
    UnsupportedLinearZeeman(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn numerical(context: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::NumericalFailure {
            context: context.into(),
            detail: detail.into(),
        }
    }
}
