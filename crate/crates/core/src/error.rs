use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("basis of {n_particles} particles on {n_levels} levels is too large to index")]
    BasisTooLarge { n_particles: usize, n_levels: usize },
    #[error("occupation vector is not a member of the basis: {0}")]
    StateNotFound(String),
    #[error("model is for (N={model_n}, M={model_m}) but basis is for (N={basis_n}, M={basis_m})")]
    BasisMismatch {
        model_n: usize,
        model_m: usize,
        basis_n: usize,
        basis_m: usize,
    },
    #[error("dimension {dimension} exceeds the dense diagonalization cap {cap}; raise the cap or reduce N or M")]
    DimensionOverCap { dimension: usize, cap: usize },
    #[error("vector is not normalized (norm² = {norm_sq})")]
    NotNormalized { norm_sq: f64 },
    #[error("target energy {target} is outside the attainable range ({low}, {high})")]
    EnergyOutOfRange { target: f64, low: f64, high: f64 },
    #[error("solver did not converge: {0}")]
    NoConvergence(String),
    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("index {index} out of range for dimension {dimension}")]
    IndexOutOfRange { index: usize, dimension: usize },
}
