use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid bump: inner half-width {inner} must satisfy 0 <= inner < outer = {outer}")]
    InvalidBump { outer: String, inner: String },

    #[error("shrink margin {s} out of range for a cell of side {side} (need 0 < s < {limit})")]
    MarginOutOfRange { s: String, side: String, limit: String },

    #[error("derivative order {0} not supported (0, 1 or 2)")]
    UnsupportedOrder(u8),

    #[error("level index must be at least 1")]
    ZeroLevel,

    #[error("alpha_{n} = {value} is not in (0, 1)")]
    AlphaOutOfRange { n: u64, value: String },

    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),

    #[error("tolerance {tol} is below the resolution {resolution} reachable at depth cap {cap}")]
    ToleranceBelowResolution { tol: f64, resolution: f64, cap: usize },

    #[error("no certified tail bound available for a custom schedule")]
    NoTailBound,

    #[error("digit {digit} out of range for base {base}")]
    DigitOutOfRange { digit: u8, base: u8 },

    #[error("depth {requested} exceeds cap {cap}")]
    DepthCap { requested: usize, cap: usize },

    #[error("point lies outside the unit cell")]
    PointOutsideUnitCell,

    #[error("dimension mismatch: expected {expected}D, got {actual}D")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("operation requires a {0}D construction")]
    WrongDimension(usize),

    #[error("address of length {len} is too short (need at least {needed})")]
    AddressTooShort { len: usize, needed: usize },

    #[error("digit at position {position} is {digit}, expected {expected}")]
    DigitPrecondition {
        position: usize,
        digit: u8,
        expected: &'static str,
    },

    #[error("probe inconclusive: {reason} (needs depth {needed_depth})")]
    Inconclusive { reason: String, needed_depth: usize },

    #[error("finite-difference step {h} too large for depth {depth}: leaves the plateau cell (max {max_step})")]
    StepTooLarge { h: f64, depth: usize, max_step: f64 },

    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidExponent(f64),

    #[error("degenerate sampling: {0}")]
    Degenerate(String),

    #[error("measure has zero total mass")]
    ZeroMass,

    #[error("probe inapplicable: {0}")]
    Inapplicable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
