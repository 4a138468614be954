use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VortexError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("size mismatch: expected {expected} entries, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("flux on plaquette {plaquette} at branch cut boundary (angle {angle:.12})")]
    BranchCut { plaquette: usize, angle: f64 },

    #[error("section has zero norm")]
    ZeroSection,

    #[error("dense assembly refused for n = {n} (limit {limit})")]
    AssemblyTooLarge { n: usize, limit: usize },

    #[error("no clear spectral gap (gap {gap:.3e} < {required:.1e}); rerun at a different n")]
    NoSpectralGap { gap: f64, required: f64 },

    #[error("index computation needs a decoupled base point (phi = 0), max |phi| = {0:.3e}")]
    NotDecoupled(f64),

    #[error("divisor degree {found} does not match bundle degree {expected}")]
    DivisorDegree { expected: i64, found: i64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("report is not converged; check `{0}` needs a converged solution")]
    Unconverged(String),
}

pub type Result<T> = std::result::Result<T, VortexError>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(VortexError::ShapeMismatch { expected, found })
    }
}
