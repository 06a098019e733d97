//! Cooling a mechanical resonator with a squeezed cavity field.
//!
//! This crate models a driven optomechanical cavity that hosts a pumped χ⁽²⁾ medium.
//! The pump squeezes the intracavity field, which interferes the two quadratures of
//! the radiation-pressure noise so that the anti-Stokes heating sideband can be
//! cancelled outright. The library covers three drive configurations:
//!
//! * `SB` — conventional sideband cooling (coherent drive, no squeezing),
//! * `SD` — squeezed-vacuum drive injected through the external port,
//! * `IS` — intracavity squeezing from the χ⁽²⁾ pump (complex amplitude ε).
//!
//! Everything is expressed in units of the mechanical frequency (ω_m ≡ 1) and the
//! zero-point length is absorbed into the spectra, so all quantities are
//! dimensionless ratios. The modules:
//!
//! * [`params`] — parameter sets and drive-scheme configuration,
//! * [`model`] — drift/diffusion matrices of the linearized model and stability,
//! * [`noise`] — backaction force spectrum, cooling rates, and the optimal pump,
//! * [`moments`] — second-moment equations of motion, time evolution, steady states,
//! * [`limits`] — closed-form cooling limits and optimal operating points,
//! * [`three_mode`] — the full two-cavity-mode model and its reduction,
//! * [`spectrum`] — output/intracavity quadrature spectra and squeezing measures.
//!
//! # Quick start
//!
//! Compute the final phonon occupancy for a squeezing-enhanced cooling run deep in
//! the unresolved-sideband regime:
//!
//! ```
//! use squeezecool::params::ReducedParams;
//! use squeezecool::limits::analytic_limit;
//!
//! // kappa = 400 omega_m, bad cavity; pump set to the backaction-cancelling value.
//! let mut p = ReducedParams::new(-200.0, 400.0, 0.0, 5.345, 1.0e3, 1.0e5).unwrap();
//! p.eps = squeezecool::noise::optimal_eps(&p);
//! let report = analytic_limit(&p).unwrap();
//! assert!(report.n_f < 1.0, "ground state reached: n_f = {}", report.n_f);
//! ```

pub mod error;
pub mod limits;
pub mod model;
pub mod moments;
pub mod noise;
mod ode;
pub mod params;
pub mod spectrum;
pub mod three_mode;

pub use error::Error;

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

// The guide under book/ doubles as a test suite: rustdoc attaches every fenced Rust
// block in the chapters to the modules below, so `cargo test --doc` compiles and runs
// the whole book. One module per chapter, so a failing snippet names its chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/noise.md")]
    mod noise {}
    #[doc = include_str!("../../../book/src/moments.md")]
    mod moments {}
    #[doc = include_str!("../../../book/src/limits.md")]
    mod limits {}
    #[doc = include_str!("../../../book/src/three_mode.md")]
    mod three_mode {}
    #[doc = include_str!("../../../book/src/spectra.md")]
    mod spectra {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
