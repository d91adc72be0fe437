use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Calibration,
    Simulation,
    Input,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max |A - A^dag| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("TLS site {site} out of range for a register of {n_tls}")]
    SiteOutOfRange { site: usize, n_tls: usize },

    #[error(
        "phase-shift solver did not converge after {iterations} iterations \
         (screening 2eL*E_J/hbar^2 = {screening:.3}, residual {residual:.3e}); \
         the flux relation is multi-valued in this regime"
    )]
    PhaseShiftDivergence {
        iterations: usize,
        screening: f64,
        residual: f64,
    },

    #[error("resonator is unstable at this flux bias: omega_c^2 = {radicand:.3e} < 0")]
    UnstableResonator { radicand: f64 },

    #[error("{quantity} is singular: {denominator} vanishes")]
    Singular {
        quantity: &'static str,
        denominator: &'static str,
    },

    #[error("dispersive condition violated for TLS {site}: g/|Delta_nc| = {ratio:.3} > {limit}")]
    DispersiveValidity { site: usize, ratio: f64, limit: f64 },

    #[error("drive amplitude {epsilon:.4} MHz exceeds the bound {limit:.4} MHz")]
    DriveBound { epsilon: f64, limit: f64 },

    #[error("gate is unreachable: {reason}")]
    UnreachableGate { reason: String },

    #[error("no dressed-energy crossing for TLS pair ({first}, {second}) with epsilon in [0, {limit}] MHz")]
    NoRoot {
        first: usize,
        second: usize,
        limit: f64,
    },

    #[error("TLS pair ({first}, {second}) is resonant at every drive amplitude; the crossing is undetermined")]
    AlwaysResonant { first: usize, second: usize },

    #[error(
        "dressed energies not resonant: E1 = {e1:.6} MHz, E2 = {e2:.6} MHz (tolerance {tolerance})"
    )]
    NotResonant { e1: f64, e2: f64, tolerance: f64 },

    #[error(
        "simulation diagnostic failed at t = {time:.4} ns: {what} = {value:.3e}; \
         retry with step <= {advisory_step:.3e} ns"
    )]
    Diagnostic {
        time: f64,
        what: &'static str,
        value: f64,
        advisory_step: f64,
    },

    #[error("channel is not trace preserving (deviation {deviation:.3e})")]
    NotTracePreserving { deviation: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) | Error::InvalidParameter { .. } => ErrorKind::Config,
            Error::DriveBound { .. }
            | Error::UnreachableGate { .. }
            | Error::NoRoot { .. }
            | Error::AlwaysResonant { .. }
            | Error::NotResonant { .. }
            | Error::DispersiveValidity { .. }
            | Error::Singular { .. }
            | Error::PhaseShiftDivergence { .. }
            | Error::UnstableResonator { .. } => ErrorKind::Calibration,
            Error::Diagnostic { .. } | Error::NotTracePreserving { .. } => ErrorKind::Simulation,
            Error::DimensionMismatch { .. }
            | Error::NotHermitian { .. }
            | Error::SiteOutOfRange { .. }
            | Error::Io(_) => ErrorKind::Input,
        }
    }
}
