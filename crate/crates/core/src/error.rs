use crate::matricant::Matricant2;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid profile at {field}: {reason}")]
    InvalidProfile { field: String, reason: String },

    #[error("profile file: {0}")]
    Parse(String),

    #[error("degenerate stiffness at y = {y}: c44·c55 − c45² = {value}")]
    DegenerateStiffness { y: f64, value: f64 },

    #[error("y = {0} lies outside [0, 1)")]
    OutOfDomain(f64),

    #[error("propagation tolerance not reached (error estimate {error:e})")]
    ToleranceNotReached { estimate: Box<Matricant2>, error: f64 },

    #[error("closed-form bilayer propagator needs ω ≠ 0 when k ≠ 0")]
    OmegaZero,

    #[error("point is not in a passband (Δ = {delta})")]
    NotInPassband { delta: f64 },

    #[error("monodromy is ±I within tolerance; first derivatives vanish")]
    ZwsDegenerate,

    #[error("root scan could not certify capture: {0}")]
    ScanIncomplete(String),

    #[error("ω = {omega} is not below the first K = π cutoff {cutoff}")]
    OmegaTooHigh { omega: f64, cutoff: f64 },

    #[error("profile is not piecewise constant")]
    NotPiecewiseConstant,

    #[error("not supersonic: ω² = {omega2} ≤ k²·max(μ₂/ρ) = {threshold}")]
    NotSupersonic { omega2: f64, threshold: f64 },

    #[error("impedance has {0} discontinuities per period; at most one is supported")]
    MultipleJumps(usize),

    #[error("k² = {k2} is below the region k² ≥ ρmax·ω²/μ₂min = {threshold}")]
    PreconditionOutOfRegion { k2: f64, threshold: f64 },

    #[error("(K, λ) is on the spectrum: condition number {condition:e}")]
    OnSpectrum { condition: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Whether the failure comes from user configuration rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidProfile { .. }
                | Error::Parse(_)
                | Error::DegenerateStiffness { .. }
                | Error::OutOfDomain(_)
                | Error::InvalidArgument(_)
                | Error::NotPiecewiseConstant
                | Error::MultipleJumps(_)
        )
    }
}
