use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} is outside the deformation table (largest index {max})")]
    OutOfRange { index: usize, max: usize },

    #[error("deformation is not invertible: {0}")]
    NotInvertible(String),

    #[error("floating-point saturation; largest finite index is {last_finite}")]
    Saturation { last_finite: usize },

    #[error("dimension {dim} is below the minimum {min}")]
    Dimension { dim: usize, min: usize },

    #[error("state has weight {edge_amplitude:e} on the truncation edge")]
    TruncationUnsafe { edge_amplitude: f64 },

    #[error("{solver} did not converge (last residual {residual:e})")]
    Solver { solver: &'static str, residual: f64 },

    #[error("cutoff {cutoff} is too small; about {required} is needed")]
    CutoffTooSmall { cutoff: usize, required: usize },

    #[error("incompatible operands: {0}")]
    Incompatible(String),

    #[error("degenerate coefficient sequence: C_{index} is zero")]
    Degenerate { index: usize },

    #[error("Cauchy data has a nonzero mean (zero mode magnitude {magnitude:e})")]
    ZeroMode { magnitude: f64 },

    #[error("time step {dt} exceeds the stability bound {bound}")]
    Stability { dt: f64, bound: f64 },

    #[error("malformed input: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by bad inputs, as opposed to numerical failures
    /// of a solver or summation on valid inputs.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Saturation { .. } | Error::Solver { .. } | Error::CutoffTooSmall { .. }
        )
    }
}

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}
