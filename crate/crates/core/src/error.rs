use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the laboratory can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("point ({x}, {y}) lies outside the domain")]
    PointOutsideDomain { x: f64, y: f64 },

    #[error("point is {dist:e} from the boundary, beyond tolerance {tol:e}")]
    NotNearBoundary { dist: f64, tol: f64 },

    #[error("walk did not reach the absorption shell within {0} steps")]
    StepBudgetExceeded(u64),

    #[error("path entered the origin exclusion radius at the minimum step size")]
    OriginTooClose,

    #[error("invalid sampler configuration: {0}")]
    InvalidSamplerConfig(String),

    #[error("invalid layer specification: {0}")]
    InvalidLayerSpec(String),

    #[error("batch is empty")]
    EmptyBatch,

    #[error("samples carry no exit time (walk-on-spheres batches are position-only)")]
    TimeUnavailable,

    #[error("fit window ({t1}, {t2}) holds {count} samples, need at least {needed}")]
    WindowTooSparse { t1: f64, t2: f64, count: usize, needed: usize },

    #[error("fit window upper end {t2} reaches tMax/2 = {half}")]
    TruncationContamination { t2: f64, half: f64 },

    #[error("only {usable} usable layer counts, need at least 3")]
    InsufficientLayers { usable: usize },

    #[error("mean exit time is infinite: {0}")]
    MeanInfinite(String),

    #[error("quadrature did not reach tolerance {tol:e} (estimated error {err:e}) within {max_intervals} intervals")]
    QuadratureFailure { tol: f64, err: f64, max_intervals: usize },

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("no radius up to {cap} certified stage {stage} against budget {budget}")]
    SearchExhausted { stage: usize, cap: f64, budget: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid config{}: {message}", location.as_ref().map(|l| format!(" at {l}")).unwrap_or_default())]
    ConfigInvalid { location: Option<String>, message: String },

    #[error("unknown experiment '{name}'; available: {}", available.join(", "))]
    ExperimentUnknown { name: String, available: Vec<String> },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn outside(p: crate::geometry::Point) -> Self {
        Error::PointOutsideDomain { x: p.x, y: p.y }
    }

    pub(crate) fn config(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::ConfigInvalid {
            location: Some(location.into()),
            message: message.into(),
        }
    }
}
