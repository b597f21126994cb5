use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid quasipolynomial: {0}")]
    InvalidQuasipolynomial(String),

    #[error("non-finite argument {0}")]
    NonFinite(Complex64),

    #[error("value at {0} exceeds the binary64 range")]
    Overflow(Complex64),

    #[error("argument must be non-zero")]
    ZeroArgument,

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("no solution of the level-curve equation at im = {y}")]
    NoSolution { y: f64 },

    #[error("branch index {nu} is not admissible")]
    InvalidIndex { nu: i64 },

    #[error("iteration did not converge after {iterations} steps (last iterate {last})")]
    NotConverged { iterations: usize, last: Complex64 },

    #[error("derivative vanished at {0}")]
    DerivativeVanished(Complex64),

    #[error("Newton iterate {at} left the trust disk around seed {seed}")]
    Diverged { seed: Complex64, at: Complex64 },

    #[error("zero at {0} is degenerate (|f'| relative below 1e-8)")]
    DegenerateZero(Complex64),

    #[error("refiners disagree for nu = {nu}: |newton - fixed point| = {gap:e}")]
    RefinerDisagreement { nu: i64, gap: f64 },

    #[error("zeros for nu = {first} and nu = {second} are only {distance:e} apart")]
    DuplicateZero { first: i64, second: i64, distance: f64 },

    #[error("records are not consecutive in nu (hole after nu = {after})")]
    NonConsecutive { after: i64 },

    #[error("contour passes through or too close to a zero (|f| relative = {magnitude:e} at {at})")]
    BoundaryZero { at: Complex64, magnitude: f64 },

    #[error("contour subdivision exceeded depth {max_depth}")]
    DepthExceeded { max_depth: usize },

    #[error("accumulated phase {turns} turns is not an integer")]
    NonIntegerWinding { turns: f64 },

    #[error("isolated {isolated} zeros but the certifying contour counts {certified}")]
    CountMismatch { isolated: usize, certified: i64 },

    #[error("sample size must be positive")]
    EmptySample,

    #[error("rejection sampling found no admissible point: {0}")]
    EmptyRegion(String),

    #[error("delta {delta} is too large: nearest zeros are {min_gap} apart")]
    DeltaTooLarge { delta: f64, min_gap: f64 },

    #[error("zero for nu = {nu} lies on a cut line")]
    DegenerateCut { nu: i64 },
}
