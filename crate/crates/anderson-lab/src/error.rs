use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {left} vs {right} points per dimension")]
    GridMismatch { left: usize, right: usize },

    #[error("cutoff k_max = {k_max} too large for grid n = {n}: need k_max <= n/6 so convolution entries stay resolved")]
    CutoffTooLarge { k_max: usize, n: usize },

    #[error("eigensolve failure: {0}")]
    EigensolveFailure(String),

    #[error("function undefined at shifted eigenvalue {eigenvalue}")]
    DomainError { eigenvalue: f64 },

    #[error("resolvent shift {shift} does not dominate lowest eigenvalues {lambda1_a} / {lambda1_b}")]
    ShiftTooSmall { shift: f64, lambda1_a: f64, lambda1_b: f64 },

    #[error("fixed point failed to contract after {iterations} iterations (last ratio {last_ratio:.3e}); cutoff too small for this noise draw")]
    NoContraction { iterations: usize, last_ratio: f64 },

    #[error("blow-up detected at t = {time}: |u| = {norm:.3e}")]
    BlowupDetected { time: f64, norm: f64 },

    #[error("degenerate importance weights: ESS {ess:.1} below 5% of {n_samples} samples")]
    DegenerateWeights { ess: f64, n_samples: usize },

    #[error("basis mismatch: operators live on different mode sets")]
    BasisMismatch,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("bad container file: {0}")]
    BadContainer(String),
}
