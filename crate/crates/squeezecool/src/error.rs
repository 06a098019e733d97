//! Error type shared by all modules.

use crate::model::StabilityVerdict;

/// Errors reported by the library.
///
/// Physical "negative" outcomes that a caller is expected to handle as data
/// (heating instead of cooling, validity warnings on closed forms) are encoded in
/// the result types, not here; this enum is for inputs and computations that cannot
/// produce a meaningful result at all.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// A parameter violates its documented range or finiteness requirement.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    /// The χ⁽²⁾ pump exceeds the optical parametric-oscillation threshold
    /// 4|ε|² ≥ κ²/4 + Δ²; the linearized spectrum is unphysical there.
    #[error(
        "pump above parametric threshold: 4|eps|^2 = {pump:.6e} >= kappa^2/4 + delta^2 = {threshold:.6e}"
    )]
    AboveThreshold { pump: f64, threshold: f64 },

    /// The linearized dynamics has an eigenvalue with nonnegative real part, so the
    /// requested quantity (steady state, spectrum, ...) does not exist.
    #[error("dynamics unstable: max Re(eigenvalue) = {}", verdict.margin)]
    Unstable { verdict: StabilityVerdict },

    /// A closed-form expression was evaluated outside the parameter region where it
    /// is derived (e.g. past its own stability bound).
    #[error("outside the validity domain of `{what}`: {reason}")]
    OutsideDomain { what: &'static str, reason: String },

    /// An iterative solver failed to reach its tolerance.
    #[error("`{what}` did not converge: residual {residual:.3e} after {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        residual: f64,
        iterations: usize,
    },

    /// The adaptive integrator's step size collapsed below the resolvable scale.
    #[error("integrator step collapsed to {dt:.3e} at t = {t:.6e}")]
    StepCollapse { t: f64, dt: f64 },

    /// A linear system that should be regular was numerically singular.
    #[error("singular linear system in `{what}` (pivot magnitude {magnitude:.3e})")]
    Singular { what: &'static str, magnitude: f64 },

    /// Two redundant internal computations of the same quantity disagreed beyond
    /// round-off. Indicates a bug, never a bad input.
    #[error("internal consistency check failed in `{what}`: {detail}")]
    Inconsistent { what: &'static str, detail: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            name,
            reason: reason.into(),
        }
    }
}
