use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("closed form is singular here (denominator magnitude {denominator:.3e})")]
    DomainSingularity { denominator: f64 },
    #[error("point lies outside the chart domain of {loop_name}")]
    OutOfDomain { loop_name: String },
    #[error("the unique solution leaves the chart domain of {loop_name}")]
    NoSolutionInChart { loop_name: String },
    #[error("unknown loop kind `{0}`")]
    UnknownKind(String),
    #[error("chart map is singular at the pole")]
    PoleSingularity,
    #[error("frame is not invertible (pivot {pivot:.3e})")]
    SingularFrame { pivot: f64 },
    #[error("{steps} steps do not reach tolerance {tol:.1e} (step-halving estimate {estimate:.3e})")]
    StepUnderflow { steps: usize, tol: f64, estimate: f64 },
    #[error("base point is not in the overlap of charts `{from}` and `{to}`")]
    NotInOverlap { from: String, to: String },
    #[error("projection is singular (|z2| = 1)")]
    ProjectionSingular,
    #[error("invalid partition of unity: {0}")]
    PartitionInvalid(String),
    #[error("Newton iteration did not converge (residual {residual:.3e})")]
    NoConvergence { residual: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("unknown loop `{0}`")]
    UnknownLoop(String),
    #[error("unknown atlas `{0}`")]
    UnknownAtlas(String),
    #[error("unknown chart `{0}`")]
    UnknownChart(String),
    #[error("could not write report: {0}")]
    ReportWriteFailure(String),
}
