use thiserror::Error;

/// Everything that can go wrong inside the guidance toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GuidanceError {
    #[error("ambiguous projection: closest-point candidates tie within {tolerance} m")]
    AmbiguousProjection { tolerance: f64 },

    #[error("infeasible geometry: 1 + d*kappa = {one_plus_dk} (d = {d}, kappa = {kappa})")]
    InfeasibleGeometry { d: f64, kappa: f64, one_plus_dk: f64 },

    #[error("zero-length vector in heading error")]
    ZeroVector,

    #[error("constant-profile unsaturated fraction is zero, relative gain undefined")]
    DegenerateBaseline,

    #[error("boundary bound undefined: L1 = {l1} reaches 2*R_min = {two_r_min}")]
    BoundUndefined { l1: f64, two_r_min: f64 },

    #[error("runaway divergence at t = {t} s: |d| = {d} exceeds {limit}")]
    RunawayDivergence { t: f64, d: f64, limit: f64 },

    #[error("projection failed at t = {t} s: {source}")]
    ProjectionFailure {
        t: f64,
        #[source]
        source: Box<GuidanceError>,
    },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid value for `{key}`: {message}")]
    Validation { key: String, message: String },
}

impl GuidanceError {
    pub(crate) fn validation(key: impl Into<String>, message: impl Into<String>) -> Self {
        GuidanceError::Validation {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn infeasible(d: f64, kappa: f64) -> Self {
        GuidanceError::InfeasibleGeometry {
            d,
            kappa,
            one_plus_dk: 1.0 + d * kappa,
        }
    }

    /// True for configuration problems (bad input), false for numeric failures.
    pub fn is_input_error(&self) -> bool {
        matches!(self, GuidanceError::Parse { .. } | GuidanceError::Validation { .. })
    }
}

pub type Result<T> = std::result::Result<T, GuidanceError>;
