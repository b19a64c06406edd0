//! Error vocabulary shared by every module.
//!
//! Operations fail closed: geometric queries outside a chart's region,
//! coefficient tables that do not cover the mesh, assembly over meshes that
//! violate a structural precondition, and solver breakdowns all surface as
//! distinct variants rather than poisoned numbers.

use thiserror::Error;

/// All failure modes of the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A point was outside the region a chart is defined on.
    #[error("OUT_OF_REGION: point {point:?} lies outside the chart region")]
    OutOfRegion { point: Vec<f64> },

    /// Chart composition where the first image is not contained in the
    /// second chart's region.
    #[error("REGION_MISMATCH: {detail}")]
    RegionMismatch { detail: String },

    /// A crossing-beams chart was requested at a point that is not one of
    /// the four singular corners.
    #[error("NOT_SINGULAR_CORNER: {point:?} is not a singular corner")]
    NotSingularCorner { point: Vec<f64> },

    /// An unfolding step expected a plain half-cube target.
    #[error("DOMAIN_NOT_HALF_CUBE: {detail}")]
    DomainNotHalfCube { detail: String },

    /// A model set or chart was requested with scale ≤ 0.
    #[error("NONPOSITIVE_SCALE: scale {scale} must be positive")]
    NonpositiveScale { scale: f64 },

    /// A coefficient table leaves part of the domain uncovered.
    #[error("COEFFICIENT_GAP: {detail}")]
    CoefficientGap { detail: String },

    /// A facet or region label violates the labeling convention.
    #[error("LABEL_ERROR: {detail}")]
    LabelError { detail: String },

    /// A surface operation found no facets carrying the requested label.
    #[error("EMPTY_SURFACE: no facets with label {label}")]
    EmptySurface { label: i32 },

    /// Mismatched dimensions between meshes, vectors, or coefficient data.
    #[error("DIMENSION_MISMATCH: {detail}")]
    DimensionMismatch { detail: String },

    /// A linear solve met a singular or numerically indefinite matrix.
    #[error("SINGULAR: {detail}")]
    Singular { detail: String },

    /// Pure-Neumann stiffness has a constant null mode; the requested
    /// operation needs coercivity.
    #[error("ZERO_MODE: {detail}")]
    ZeroMode { detail: String },

    /// An M-matrix / positivity structure check failed.
    #[error("M_MATRIX_VIOLATION: {detail}")]
    MMatrixViolation { detail: String },

    /// Two meshes expected to be compatible (same connectivity or a
    /// reflection pairing) are not.
    #[error("INCOMPATIBLE_MESHES: {detail}")]
    IncompatibleMeshes { detail: String },

    /// A reflection-based operation needs a mirror-symmetric mesh.
    #[error("ASYMMETRIC_MESH: {detail}")]
    AsymmetricMesh { detail: String },

    /// A coefficient tensor is not symmetric positive definite within
    /// tolerance, or an ellipticity bound is violated.
    #[error("DEGENERATE_COEFFICIENT: {detail}")]
    DegenerateCoefficient { detail: String },

    /// A time step was rejected more times than the retry budget allows.
    #[error("STEP_REJECTED: {detail}")]
    StepRejected { detail: String },

    /// The state left the admissible bounds during time stepping.
    #[error("BLOW_UP: {detail}")]
    BlowUp { detail: String },

    /// A time-dependent datum was queried outside its interval of definition.
    #[error("TIME_OUT_OF_RANGE: t = {t} outside [{t0}, {t1}]")]
    TimeOutOfRange { t: f64, t0: f64, t1: f64 },

    /// A state entered a region where a nonlinearity is not defined.
    #[error("ETA_BOUNDS: {detail}")]
    EtaBounds { detail: String },

    /// The auxiliary (thermistor) potential solve failed.
    #[error("AUX_SINGULAR: {detail}")]
    AuxSingular { detail: String },

    /// Malformed configuration or data file.
    #[error("CONFIG_ERROR: {detail}")]
    ConfigError { detail: String },

    /// Underlying I/O failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable name of the variant, used in reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::OutOfRegion { .. } => "OUT_OF_REGION",
            Error::RegionMismatch { .. } => "REGION_MISMATCH",
            Error::NotSingularCorner { .. } => "NOT_SINGULAR_CORNER",
            Error::DomainNotHalfCube { .. } => "DOMAIN_NOT_HALF_CUBE",
            Error::NonpositiveScale { .. } => "NONPOSITIVE_SCALE",
            Error::CoefficientGap { .. } => "COEFFICIENT_GAP",
            Error::LabelError { .. } => "LABEL_ERROR",
            Error::EmptySurface { .. } => "EMPTY_SURFACE",
            Error::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            Error::Singular { .. } => "SINGULAR",
            Error::ZeroMode { .. } => "ZERO_MODE",
            Error::MMatrixViolation { .. } => "M_MATRIX_VIOLATION",
            Error::IncompatibleMeshes { .. } => "INCOMPATIBLE_MESHES",
            Error::AsymmetricMesh { .. } => "ASYMMETRIC_MESH",
            Error::DegenerateCoefficient { .. } => "DEGENERATE_COEFFICIENT",
            Error::StepRejected { .. } => "STEP_REJECTED",
            Error::BlowUp { .. } => "BLOW_UP",
            Error::TimeOutOfRange { .. } => "TIME_OUT_OF_RANGE",
            Error::EtaBounds { .. } => "ETA_BOUNDS",
            Error::AuxSingular { .. } => "AUX_SINGULAR",
            Error::ConfigError { .. } => "CONFIG_ERROR",
            Error::Io(_) => "IO_ERROR",
        }
    }
}
