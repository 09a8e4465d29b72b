use thiserror::Error;

/// Errors produced anywhere in the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown site label `{0}`")]
    UnknownLabel(String),

    #[error("duplicate site label `{0}`")]
    DuplicateLabel(String),

    #[error("site `{label}` has dimension {expected}, got a {found}x{found} factor")]
    DimensionMismatch { label: String, expected: usize, found: usize },

    #[error("site `{0}` must have dimension >= 2")]
    SiteTooSmall(String),

    #[error("total dimension {dim} exceeds the cap {cap} (set QLIANG_DIM_CAP to raise it)")]
    DimensionCap { dim: usize, cap: usize },

    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NonHermitian(f64),

    #[error("operator is not unitary (max deviation {0:.3e})")]
    NonUnitary(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("operands live on different site registries")]
    RegistryMismatch,

    #[error("partial trace needs at least one site to keep")]
    EmptyKeep,

    #[error("term `{0}` has no Hermitian-conjugate partner")]
    UnpairedTerm(String),

    #[error("unknown gate `{0}`")]
    UnknownGate(String),

    #[error("coupling endpoints must differ (got `{0}` twice)")]
    SelfCoupling(String),

    #[error("target and sources overlap on `{0}`")]
    TargetSourceOverlap(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("scenario config: {0}")]
    Config(String),

    #[error("malformed CSV: {0}")]
    Csv(String),

    #[error("reservoir discretization failed: {0}")]
    Convergence(String),

    #[error("stability bound violated: {0}")]
    Stability(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
