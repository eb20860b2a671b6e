use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Domain(String),

    #[error("quadrature did not reach tolerance {tol:e} (last estimate change {achieved:e}) in {context}")]
    Quadrature {
        context: String,
        tol: f64,
        achieved: f64,
    },

    #[error("precision exhausted: {bits_left:.1} significant bits left at {precision_bits} bits (cap {cap_bits})")]
    PrecisionExhausted {
        precision_bits: u32,
        cap_bits: u32,
        bits_left: f64,
    },

    #[error("loss of orthogonality: max off-diagonal Gram entry {offdiag:e} exceeds {tol:e}")]
    Orthogonality { offdiag: f64, tol: f64 },

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("MCMC tuning failure: acceptance rate {rate:.3} outside [0.1, 0.6]")]
    Tuning { rate: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
