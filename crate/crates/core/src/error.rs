use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum ZakError {
    #[error("unsupported dimension {0}: grid dimension must lie in 1..=4")]
    UnsupportedDimension(usize),
    #[error("points per axis must be a power of two and at least 8, got {0}")]
    InvalidPointCount(usize),
    #[error("box side length must be positive and finite, got {0}")]
    InvalidLength(f64),
    #[error("sample array has length {got}, grid needs {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("operands live on different grids")]
    GridMismatch,
    #[error("multiplier is not finite at lattice index {index} where the coefficient is nonzero")]
    NonFiniteSymbol { index: usize },
    #[error("ion sound speed alpha must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("zero Fourier mode of n1 must vanish for D^-1 to be defined (found magnitude {0:e})")]
    NonzeroMeanVelocity(f64),
    #[error("frequency gap K = {0} is below 5; pass the nonconforming flag to allow K >= 2")]
    GapTooSmall(u32),
    #[error(
        "resonance denominator {value:e} below floor {floor:e} on shell pair ({first}, {second})"
    )]
    Resonance {
        value: f64,
        floor: f64,
        first: i32,
        second: i32,
    },
    #[error("iteration diverged after {} iterates (last ratio {:?})", differences.len(), ratios.last())]
    Diverged {
        differences: Vec<f64>,
        ratios: Vec<f64>,
    },
    #[error("blow-up detected at t = {t}; last valid time {last_valid}")]
    BlowUp { t: f64, last_valid: f64 },
    #[error("tolerance {eps} unattainable at sampling resolution; best achieved {best}")]
    Unattainable { eps: f64, best: f64 },
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("configuration invalid:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, ZakError>;
