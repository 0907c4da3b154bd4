use thiserror::Error;

/// Errors raised by lattice construction, the spectral oracle and the
/// experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid tree spec: {0}")]
    InvalidSpec(String),

    #[error("lattice has {n_tot} sites, exceeding the configured cap of {cap}")]
    TooLarge { n_tot: u128, cap: usize },

    #[error("sites {parent} and {child} are not a parent/child pair")]
    NotAdjacent { parent: String, child: String },

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix dimension {dim} exceeds the dense cap of {cap}")]
    DenseCap { dim: usize, cap: usize },

    #[error("eigensolver did not converge (matrix hash {hash:016x})")]
    NoConvergence { hash: u64 },

    #[error("E is within {distance:e} of an eigenvalue of the complementary block")]
    NearSingular { distance: f64 },

    #[error(
        "secular equation for N={generations}, gamma_tilde={gamma_tilde}: expected {expected} roots, found {found}"
    )]
    RootCount {
        generations: usize,
        gamma_tilde: f64,
        expected: usize,
        found: usize,
    },

    #[error("gamma_tilde={gamma_tilde} is not above the exceptional point {ep}")]
    Phase { gamma_tilde: f64, ep: f64 },

    #[error("root does not solve the chain eigenproblem (residual {0:e})")]
    InconsistentRoot(f64),

    #[error("no coalescence in bracket [{lo}, {hi}]")]
    NoCoalescence { lo: f64, hi: f64 },

    #[error("left/right eigenvectors are undefined at the exceptional point")]
    AtExceptionalPoint,

    #[error("energy {0} is outside the open band (-2, 2)")]
    Grazing(f64),

    #[error("config error: {0}")]
    Config(String),

    #[error("schema violation in {table}: {reason}")]
    Schema { table: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
