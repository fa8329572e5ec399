use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("Hilbert dimension {0} outside supported range 1..=16")]
    UnsupportedDimension(usize),

    #[error("Hamiltonian sample at t = {t} ps is not Hermitian (deviation {deviation:e})")]
    NonHermitian { t: f64, deviation: f64 },

    #[error("state is not normalized: |psi|^2 = {0}")]
    NotNormalized(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("step size underflow at t = {t} ps (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("amplitude of basis state {index} fell to {modulus:.3} (adiabatic return broken)")]
    AdiabaticityBroken { index: usize, modulus: f64 },

    #[error("no sign change for target {target} rad; attainable phase range [{min}, {max}] rad")]
    PhaseUnattainable { target: f64, min: f64, max: f64 },

    #[error("error budget {budget:e} unattainable for E_S in [{lo}, {hi}] meV")]
    BudgetUnattainable { budget: f64, lo: f64, hi: f64 },

    #[error("angular quadrature did not converge (relative change {change:e} at order {order})")]
    QuadratureNotConverged { order: usize, change: f64 },

    #[error("link success probability is zero")]
    ZeroSuccessProbability,

    #[error("pairs ({a_left},{a_right}) and ({b_left},{b_right}) do not share a node")]
    NonAdjacentPairs {
        a_left: usize,
        a_right: usize,
        b_left: usize,
        b_right: usize,
    },
}

impl Error {
    /// True for failures of a numerical procedure (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::StepSizeUnderflow { .. }
                | Error::AdiabaticityBroken { .. }
                | Error::PhaseUnattainable { .. }
                | Error::BudgetUnattainable { .. }
                | Error::QuadratureNotConverged { .. }
                | Error::ZeroSuccessProbability
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
