use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: non-positive rates, bad grid shape, bad options.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The model is outside the regime the construction covers
    /// (growth ratio, delay ordering, empty feasibility windows).
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Root finding could not certify a root at the requested tolerance.
    #[error("no certified root: {0}")]
    NoRoot(String),

    /// A formula was evaluated outside its domain of validity.
    #[error("domain error: {0}")]
    Domain(String),

    /// Pointwise residual requested exactly at a kink, where the one-sided
    /// derivatives disagree.
    #[error("residual undefined at kink t = {t}")]
    KinkPoint { t: f64 },

    /// Two profiles on different grids, or delays that do not align
    /// with the grid step.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A sampled or computed value came out NaN or infinite.
    #[error("non-finite value in {what} at t = {t}")]
    NonFinite { what: String, t: f64 },

    /// The iteration lost the ordering or monotonicity it is supposed
    /// to preserve; the run is not trustworthy past this step.
    #[error("monotonicity breach at step {step}, t = {t}: {detail}")]
    MonotonicityBreach { step: usize, t: f64, detail: String },

    /// Forward integration left the representable range.
    #[error("integration blew up at t = {t}")]
    BlowUp { t: f64 },

    /// A required hypothesis check failed and the caller did not override.
    #[error("hypothesis gate: {0}")]
    HypothesisGate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// Unreadable config file or CSV.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Process exit code for the CLI: 2 for unusable input (config, IO,
    /// grids, parse), 1 for well-posed but failing runs (infeasible model,
    /// failed checks, broken iteration).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_)
            | Error::Domain(_)
            | Error::KinkPoint { .. }
            | Error::GridMismatch(_)
            | Error::Io(_)
            | Error::Parse(_) => 2,
            Error::Infeasible(_)
            | Error::NoRoot(_)
            | Error::NonFinite { .. }
            | Error::MonotonicityBreach { .. }
            | Error::BlowUp { .. }
            | Error::HypothesisGate(_) => 1,
        }
    }
}
