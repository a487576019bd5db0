use alloc::string::String;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A model parameter violates its constraint; the message names it.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// `∫ |x|^{-exponent}` does not converge near the singularity in dimension `dim`.
    #[error("divergent integral: kernel exponent {exponent} is not below dimension {dim}")]
    DivergentIntegral { exponent: f64, dim: usize },
    #[error("method unsupported: {0}")]
    MethodUnsupported(&'static str),
    /// Two points coincide (index 0 is the pinned origin).
    #[error("degenerate configuration: points {first} and {second} coincide")]
    DegenerateConfiguration { first: usize, second: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    #[error(
        "optimization failed: {starts} starts ({degenerate} degenerate, {escaped} escaped, {unconverged} unconverged)"
    )]
    OptimizationFailed {
        starts: usize,
        degenerate: usize,
        escaped: usize,
        unconverged: usize,
    },
    #[error("no sign change on [{lo}, {hi}] (gap {gap_lo} .. {gap_hi})")]
    BracketFailure {
        lo: f64,
        hi: f64,
        gap_lo: f64,
        gap_hi: f64,
    },
    #[error("stencil failure: evaluation failed around coordinate {coordinate}")]
    StencilFailure { coordinate: usize },
}
