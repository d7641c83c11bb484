use thiserror::Error;

/// Errors reported by state construction, estimation, and the annealer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("particle count must be a positive integer, got {0}")]
    InvalidParticleCount(usize),

    #[error("particle count must be even for this state family, got {0}")]
    OddParticleCount(usize),

    #[error("dimension mismatch: operator dim {operator} vs state dim {state}")]
    DimensionMismatch { operator: usize, state: usize },

    #[error("q = {q} out of range 1..={max}")]
    QOutOfRange { q: usize, max: usize },

    #[error("gamma = {0} maps outside the m = -N/2..N/2 range")]
    GammaOutOfRange(f64),

    #[error("sigma_prime must be positive, got {0}")]
    NonPositiveWidth(f64),

    #[error("tri-Fock weights are all zero")]
    ZeroWeights,

    #[error("symmetry projection annihilated the state")]
    ZeroProjection,

    #[error("amplitude vector has zero norm")]
    ZeroNorm,

    #[error("flat signal: |d<Jz>/dphi| below threshold at theta = {0}")]
    FlatSignal(f64),

    #[error("degenerate Jz^2 moments: zero variance denominator")]
    DegenerateMoments,

    #[error("measurement outcome m = {0} outside [-N/2, N/2]")]
    OutcomeOutOfRange(f64),

    #[error("power-law fit needs at least two points, got {0}")]
    UnderdeterminedFit(usize),

    #[error("grid must have at least two points, got {0}")]
    GridTooSmall(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("state file parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
