use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("space too large: dimension {dim} exceeds maximum {max}")]
    SpaceTooLarge { dim: usize, max: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("cutoff too small: discarded probability {discarded:.3e} exceeds {threshold:.1e}")]
    CutoffTooSmall { discarded: f64, threshold: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid density operator: {0}")]
    InvalidState(String),

    #[error("zero wavevector")]
    ZeroWavevector,

    #[error("duplicate mode entry n={n:?} pol={pol}")]
    DuplicateMode { n: [i32; 3], pol: u8 },

    #[error("mode-count mismatch: space has {space} modes, mode set has {modes}")]
    ModeCountMismatch { space: usize, modes: usize },

    #[error("normal ordering violated in slot pattern")]
    NormalOrderingViolated,

    #[error("unsupported rank {0}; only 2 and 4 are exposed")]
    UnsupportedRank(usize),

    #[error("term {term} is not transverse in the first index (|q.C|/|q||C| = {ratio:.3e})")]
    NotTransverse { term: usize, ratio: f64 },

    #[error("term {0} has zero wavevector")]
    ZeroWavevectorTerm(usize),

    #[error("too few samples: need at least {need}, got {got}")]
    TooFewSamples { need: usize, got: usize },

    #[error("identity {id} cannot be evaluated under convention {convention}")]
    InvalidPairing { id: String, convention: String },
}

pub type Result<T> = std::result::Result<T, LabError>;
