use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("scheme has no declared asymptotic tail (missing asymptotic tail)")]
    MissingTail,

    #[error("invalid scheme: {0}")]
    InvalidScheme(String),

    #[error("canonical measurement has no power-law excess noise")]
    NoPowerLaw,

    #[error("h-table line {line}: {msg}")]
    TableParse { line: usize, msg: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("inverse iteration did not converge after {iterations} iterations (residual {residual:e})")]
    Solver { iterations: usize, residual: f64 },

    #[error("photon-number cutoff {required} exceeds the hard maximum {max}; use the continuum solver")]
    CutoffExceeded { required: usize, max: usize },

    #[error(
        "mean photon number is not monotone in mu: nbar({mu_lo:e}) = {nbar_lo}, nbar({mu_hi:e}) = {nbar_hi}"
    )]
    NonMonotone {
        mu_lo: f64,
        nbar_lo: f64,
        mu_hi: f64,
        nbar_hi: f64,
    },

    #[error("could not bracket nbar = {target} within {doublings} doublings of mu")]
    BracketNotFound { target: f64, doublings: usize },

    #[error("mu search stalled at nbar = {nbar} (target {target})")]
    SearchStalled { target: f64, nbar: f64 },

    #[error("state is not normalized: |b|^2 = {norm_sq}")]
    Unnormalized { norm_sq: f64 },

    #[error("squeezed-state amplitudes lost precision: normalization defect {defect:e}")]
    Precision { defect: f64 },

    #[error("{mass:e} of the probability sits at a grid boundary; widen the grid or use the exact solver")]
    BoundaryContamination { mass: f64 },

    #[error("unknown reference curve '{0}'")]
    UnknownCurve(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag, stable across releases.
    pub fn code(&self) -> &'static str {
        match self {
            Self::MissingTail => "missing_tail",
            Self::InvalidScheme(_) => "invalid_scheme",
            Self::NoPowerLaw => "no_power_law",
            Self::TableParse { .. } => "table_parse",
            Self::InvalidArgument(_) => "invalid_argument",
            Self::Solver { .. } => "solver",
            Self::CutoffExceeded { .. } => "cutoff_exceeded",
            Self::NonMonotone { .. } => "non_monotone",
            Self::BracketNotFound { .. } => "bracket_not_found",
            Self::SearchStalled { .. } => "search_stalled",
            Self::Unnormalized { .. } => "unnormalized",
            Self::Precision { .. } => "precision",
            Self::BoundaryContamination { .. } => "boundary_contamination",
            Self::UnknownCurve(_) => "unknown_curve",
            Self::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
