use thiserror::Error;

/// Errors raised by the Green's-function, kernel, pumping and oracle code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PumpError {
    #[error("invalid {what}: {reason}")]
    InvalidInput { what: &'static str, reason: String },

    /// The energy sits exactly on a band edge with no broadening, so the
    /// branch of the relative wavevector is undefined.
    #[error("band-edge singularity at E = {energy}")]
    BandEdge { energy: f64 },

    #[error(
        "{what} did not converge: estimate {estimate:e}, error estimate {error:e} after {evaluations} evaluations"
    )]
    NonConvergence {
        what: &'static str,
        estimate: f64,
        error: f64,
        evaluations: usize,
    },

    /// `1/U + G0(0)` vanishes: single-impurity resonance.
    #[error("T-matrix pole for U = {u} at E = {energy}")]
    TMatrixPole { u: f64, energy: f64 },

    /// `|1 - T_- T_+ G0(2m)^2|^2` vanishes: two-impurity bound state.
    #[error(
        "pumping kernel pole at (U-, U+) = ({u_minus}, {u_plus}), E = {energy} (denominator {denominator:e})"
    )]
    KernelPole {
        u_minus: f64,
        u_plus: f64,
        energy: f64,
        denominator: f64,
    },

    #[error("singular resolvent solve at E = {energy}; increase eta")]
    SingularSolve { energy: f64 },

    #[error("orbital {orbital} norm drifted by {deviation:e}")]
    NormDrift { orbital: usize, deviation: f64 },
}

impl PumpError {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        PumpError::InvalidInput {
            what,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, PumpError>;
