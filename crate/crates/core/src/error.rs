use thiserror::Error;

/// Errors raised by the field, sum and bound routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("modulus {0} is composite")]
    CompositeModulus(u64),
    #[error("modulus {0} is too small (need an odd prime >= 3)")]
    TooSmall(u64),
    #[error("extension degree must be at least 1")]
    BadDegree,
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("scale factor must be non-zero")]
    ZeroScale,
    #[error("range too large: {0}")]
    RangeTooLarge(String),
    #[error("s must be non-zero")]
    ZeroS,
    #[error("expected s1 != s2, both non-zero")]
    BadPair,
    #[error("shift tuple entries must be pairwise distinct")]
    NotDistinct,
    #[error("operation requires odd k (SL-type), got k = {0}")]
    WrongParity(usize),
    #[error("operation requires a prime field (d = 1)")]
    NeedPrimeField,
    #[error("hypothesis violated: {}", .0.join(", "))]
    HypothesisViolated(Vec<String>),
    #[error("constraint violated: {}", .0.join(", "))]
    ConstraintViolated(Vec<String>),
    #[error("power iteration did not converge after {iterations} steps (last gap {gap:e}, estimate {estimate})")]
    NoConvergence {
        iterations: usize,
        gap: f64,
        estimate: f64,
    },
    #[error("characteristic {q} divides k = {k}")]
    CharDividesK { k: usize, q: u64 },
    #[error("host field F_{{{q}^{d}}} contains no primitive {k}-th roots of unity")]
    NoKthRoots { k: usize, q: u64, d: usize },
    #[error("residue {a} is not invertible mod {q}")]
    BadResidue { a: u64, q: u64 },
    #[error("index {n} outside computed range 1..={n_max}")]
    OutOfRange { n: usize, n_max: usize },
    #[error("k must be at least 2")]
    BadK,
    #[error("cache format error: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;
