use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("delta0 = 0 leaves the reference pulse width undefined")]
    DegenerateBaseline,
    #[error("no closed-form response for the {0} heterogeneity, use the numeric solver")]
    UseNumeric(&'static str),
    #[error("response at the domain boundary deviates from the far field by {0:e}")]
    FarFieldViolation(f64),
    #[error("mass matrix determinant {det:e} at t = {t}")]
    MassMatrixSingular { t: f64, det: f64 },
    #[error("adaptive step size underflow at t = {t}")]
    StiffnessFailure { t: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("interface left the domain through the {side} boundary at t = {t}")]
    DomainExit { side: &'static str, t: f64 },
    #[error("field diverged at t = {t}")]
    Blowup { t: f64 },
    #[error("no stationary pulse: {0}")]
    NoStationaryPulse(String),
    #[error("pitchfork is subcritical (g3 - g3_tilde = {0:e})")]
    SubcriticalRegime(f64),
    #[error("front velocity cubic has a single real root")]
    FoldCollision,
    #[error("no stationary front: {0}")]
    NoStationaryFront(String),
    #[error("no Hopf crossing in [{lo}, {hi}]")]
    NoHopfFound { lo: f64, hi: f64 },
    #[error("trajectory never entered the heterogeneity")]
    NoEntry,
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
    #[error("{0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable identifier.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid-parameter",
            Error::DegenerateBaseline => "degenerate-baseline",
            Error::UseNumeric(_) => "use-response-numeric",
            Error::FarFieldViolation(_) => "far-field-violation",
            Error::MassMatrixSingular { .. } => "mass-matrix-singular",
            Error::StiffnessFailure { .. } => "stiffness-failure",
            Error::NonFinite { .. } => "non-finite-state",
            Error::DomainExit { .. } => "domain-exit",
            Error::Blowup { .. } => "blowup",
            Error::NoStationaryPulse(_) => "no-stationary-pulse",
            Error::SubcriticalRegime(_) => "subcritical-regime",
            Error::FoldCollision => "fold-collision",
            Error::NoStationaryFront(_) => "no-stationary-front",
            Error::NoHopfFound { .. } => "no-hopf-found",
            Error::NoEntry => "no-entry",
            Error::NoConvergence(_) => "no-convergence",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
