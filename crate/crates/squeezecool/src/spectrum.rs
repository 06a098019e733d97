//! Quadrature noise spectra of the intracavity and emitted optical fields.
//!
//! Fourier convention: o(t) = ∫ o(ω) e^{−iωt} dω/2π, so the linearized Langevin
//! system dV/dt = D·V + ξ becomes (D + iωI)·V(ω) = L·(a_in, a_in†, b_in, b_in†)ᵀ
//! with L = diag(√κ, √κ, √γ, √γ).  The first row of the solved system gives the
//! transfer coefficients of the fundamental mode,
//!
//! ```text
//! a₁(ω) = A₁(ω) a_in(ω) + A₂(ω) a_in†(ω) + B₁(ω) b_in(ω) + B₂(ω) b_in†(ω),
//! ```
//!
//! computed here by a direct numerical solve of the 4×4 system — the ground
//! truth that the closed susceptibility expressions are checked against in the
//! integration tests.
//!
//! The emitted field leaves through the single external port as
//! a_out = a_in + √κ a₁ (with the drive convention above this keeps an empty
//! cavity all-pass: |1 − κχ_c| = 1, so its output quadrature spectrum is exactly
//! the shot-noise floor of 1).  For a detection angle θ the quadrature
//! X_θ = e^{iθ} a_out + e^{−iθ} a_out† has the stationary spectrum
//!
//! ```text
//! S_XX(ω; θ) = S₁(ω) + 2 Re[e^{2iθ} W(ω)],
//! S₁ = |c₁(ω)|² + |c₂(−ω)|² + (n_th+1)(|c₃(ω)|² + |c₄(−ω)|²)
//!                            + n_th(|c₄(ω)|² + |c₃(−ω)|²),
//! W  = c₁(ω)c₂(−ω) + (n_th+1) c₃(ω)c₄(−ω) + n_th c₄(ω)c₃(−ω),
//! ```
//!
//! where (c₁…c₄) are the output coefficients (1+√κA₁, √κA₂, √κB₁, √κB₂) and the
//! optical input is vacuum while the mechanical bath is thermal at n_th.  The
//! same assembly with the bare intracavity coefficients (A₁, A₂, B₁, B₂) gives
//! the internal-field spectrum, whose integral over ω/2π equals the stationary
//! variance ⟨X_θ²⟩ of the mode.
//!
//! Minimising over θ is exact: the optimum sits at θ_opt = (π − Arg W)/2 with
//! minimum S₁ − 2|W|, reported logarithmically as r = ln(S₁ − 2|W|); negative r
//! means squeezing below the shot-noise floor.

use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use crate::error::Error;
use crate::model::{build_drift, stability};
use crate::params::ReducedParams;
use crate::Result;

fn im(x: f64) -> Complex64 {
    Complex64::new(0.0, x)
}

/// Frequency-domain transfer coefficients of the fundamental mode at one
/// frequency, together with the response determinant of the two-quadrature
/// system left after eliminating the mechanics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferCoefficients {
    /// Response to the optical vacuum input a_in.
    pub a1_coef: Complex64,
    /// Response to the conjugate optical input a_in†.
    pub a2_coef: Complex64,
    /// Response to the mechanical bath input b_in.
    pub b1_coef: Complex64,
    /// Response to the conjugate mechanical input b_in†.
    pub b2_coef: Complex64,
    /// Determinant M(ω) of the eliminated-mechanics 2×2 system for (a₁, a₁†);
    /// it vanishes exactly at frequencies where the driven response diverges,
    /// which can only happen on marginal or unstable operating points.
    pub m_det: Complex64,
}

/// Quadrature spectra sampled on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpectrum {
    /// The frequency grid the spectra were evaluated on.
    pub omega: Vec<f64>,
    /// S_XX(ω; θ) at the requested detection angle; shot noise is 1.
    pub s_xx: Vec<f64>,
    /// Per-frequency angle minimising S_XX, canonicalised to [0, π).  When the
    /// spectrum is angle-independent (W = 0, e.g. an empty cavity) the value
    /// degenerates to π/2 and carries no information.
    pub theta_opt: Vec<f64>,
    /// r(ω) = ln min_θ S_XX(ω; θ); negative values mean squeezing below the
    /// shot-noise floor.
    pub r_mag: Vec<f64>,
}

/// Mechanical susceptibility χ_m(ω) = [γ/2 − i(ω−ω_m)]⁻¹.
fn chi_m(p: &ReducedParams, w: f64) -> Complex64 {
    Complex64::new(1.0, 0.0) / Complex64::new(p.gamma / 2.0, -(w - p.omega_m))
}

/// Inverse cavity susceptibility χ_c⁻¹(ω) = κ/2 − i(ω+Δ).
fn chi_c_inv(p: &ReducedParams, w: f64) -> Complex64 {
    Complex64::new(p.kappa / 2.0, -(w + p.delta))
}

/// Determinant of the (a₁, a₁†) system after eliminating the mechanics: with
/// the radiation-pressure loop term h(ω) = G²[χ_m(ω) − χ_m*(−ω)],
///
/// ```text
/// M(ω) = [χ_c⁻¹(ω)+h][χ_c⁻¹*(−ω)−h] + [h+2iε][h+2iε*].
/// ```
fn response_determinant(p: &ReducedParams, w: f64) -> Complex64 {
    let h = p.g * p.g * (chi_m(p, w) - chi_m(p, -w).conj());
    let two_i = 2.0 * im(1.0);
    (chi_c_inv(p, w) + h) * (chi_c_inv(p, -w).conj() - h)
        + (h + two_i * p.eps) * (h + two_i * p.eps.conj())
}

fn transfer_from_drift(
    d: &Matrix4<Complex64>,
    p: &ReducedParams,
    omega: f64,
) -> Result<TransferCoefficients> {
    let m_det = response_determinant(p, omega);

    let mut a = *d;
    for k in 0..4 {
        a[(k, k)] += im(omega);
    }
    let sk = Complex64::new(p.kappa.sqrt(), 0.0);
    let sg = Complex64::new(p.gamma.sqrt(), 0.0);
    let l = Matrix4::from_diagonal(&Vector4::new(sk, sk, sg, sg));

    let x = a.lu().solve(&l).ok_or(Error::Singular {
        what: "transfer",
        magnitude: m_det.norm(),
    })?;
    let residual = (a * x - l).norm();
    let scale = l.norm() + a.norm() * x.norm();
    if residual > 1e-10 * scale {
        return Err(Error::Singular {
            what: "transfer",
            magnitude: m_det.norm(),
        });
    }

    Ok(TransferCoefficients {
        a1_coef: x[(0, 0)],
        a2_coef: x[(0, 1)],
        b1_coef: x[(0, 2)],
        b2_coef: x[(0, 3)],
        m_det,
    })
}

/// Transfer coefficients of the fundamental mode at frequency `omega`, from a
/// direct solve of the 4×4 frequency-domain system (residual gated at
/// 10⁻¹⁰ of the problem scale).
///
/// Stability is not required: the coefficients exist for any parameters except
/// at the isolated frequencies of a marginal or unstable system where the
/// response diverges, reported as [`Error::Singular`].
///
/// ```
/// use squeezecool::params::ReducedParams;
/// use squeezecool::spectrum::transfer;
///
/// // An empty cavity responds with its bare susceptibility, A₁ = −√κ χ_c(ω).
/// let p = ReducedParams::new(-1.0, 4.0, 0.0, 0.0, 0.0, 1.0e4)?;
/// let t = transfer(0.3, &p)?;
/// let chi = num_complex::Complex64::new(1.0, 0.0)
///     / num_complex::Complex64::new(p.kappa / 2.0, -(0.3 + p.delta));
/// assert!((t.a1_coef + p.kappa.sqrt() * chi).norm() < 1e-13);
/// # Ok::<(), squeezecool::error::Error>(())
/// ```
pub fn transfer(omega: f64, p: &ReducedParams) -> Result<TransferCoefficients> {
    if !omega.is_finite() {
        return Err(Error::invalid("omega", "frequency must be finite"));
    }
    let d = build_drift(p)?.entries;
    transfer_from_drift(&d, p, omega)
}

#[derive(Clone, Copy)]
enum Field {
    /// The emitted field behind the external port, a_out = a_in + √κ a₁.
    Output,
    /// The intracavity mode a₁ itself.
    Intracavity,
}

fn field_coefficients(
    d: &Matrix4<Complex64>,
    p: &ReducedParams,
    omega: f64,
    field: Field,
) -> Result<[Complex64; 4]> {
    let t = transfer_from_drift(d, p, omega)?;
    Ok(match field {
        Field::Intracavity => [t.a1_coef, t.a2_coef, t.b1_coef, t.b2_coef],
        Field::Output => {
            let sk = p.kappa.sqrt();
            [
                Complex64::new(1.0, 0.0) + sk * t.a1_coef,
                sk * t.a2_coef,
                sk * t.b1_coef,
                sk * t.b2_coef,
            ]
        }
    })
}

fn quadrature_spectrum(
    p: &ReducedParams,
    theta: f64,
    omega: &[f64],
    field: Field,
) -> Result<QuadratureSpectrum> {
    if !theta.is_finite() {
        return Err(Error::invalid("theta", "detection angle must be finite"));
    }
    if omega.is_empty() {
        return Err(Error::invalid("omega", "frequency grid must not be empty"));
    }
    if let Some(bad) = omega.iter().find(|w| !w.is_finite()) {
        return Err(Error::invalid(
            "omega",
            format!("frequency grid holds a non-finite entry {bad}"),
        ));
    }
    if matches!(field, Field::Output) && p.kappa_0 != 0.0 {
        return Err(Error::invalid(
            "kappa_0",
            "the output spectrum assumes a single-port cavity; set the intrinsic loss to zero",
        ));
    }
    let verdict = stability(p)?;
    if !verdict.stable_eig {
        return Err(Error::Unstable { verdict });
    }
    let d = build_drift(p)?.entries;

    let n = p.n_th;
    let rot = Complex64::from_polar(1.0, 2.0 * theta);
    let mut s_xx = Vec::with_capacity(omega.len());
    let mut theta_opt = Vec::with_capacity(omega.len());
    let mut r_mag = Vec::with_capacity(omega.len());
    for &w in omega {
        let cw = field_coefficients(&d, p, w, field)?;
        let cm = field_coefficients(&d, p, -w, field)?;

        let s1 = cw[0].norm_sqr()
            + cm[1].norm_sqr()
            + (n + 1.0) * (cw[2].norm_sqr() + cm[3].norm_sqr())
            + n * (cw[3].norm_sqr() + cm[2].norm_sqr());
        let pair = cw[0] * cm[1] + (n + 1.0) * cw[2] * cm[3] + n * cw[3] * cm[2];

        let s_min = s1 - 2.0 * pair.norm();
        if s_min < -1e-10 * s1.max(1.0) {
            return Err(Error::Inconsistent {
                what: "quadrature spectrum",
                detail: format!(
                    "minimised spectrum {s_min} at frequency {w} is negative beyond round-off"
                ),
            });
        }

        s_xx.push((s1 + 2.0 * (rot * pair).re).max(0.0));
        let mut opt = (PI - pair.arg()) / 2.0;
        if opt >= PI {
            opt -= PI;
        }
        theta_opt.push(opt);
        r_mag.push(s_min.max(0.0).ln());
    }

    Ok(QuadratureSpectrum {
        omega: omega.to_vec(),
        s_xx,
        theta_opt,
        r_mag,
    })
}

/// Stationary quadrature spectrum of the emitted field behind the external
/// port, at detection angle `theta`, on the given frequency grid (evaluated
/// pointwise; the grid may be any finite, non-empty list).
///
/// Shot noise is normalised to 1; an empty cavity returns exactly 1 at every
/// frequency and angle.  Requires a stable working point and a single-port
/// cavity (κ₀ = 0) — with intrinsic loss the detected port would carry only
/// part of the field and the all-pass relation breaks down.
///
/// ```
/// use num_complex::Complex64;
/// use squeezecool::params::ReducedParams;
/// use squeezecool::spectrum::output_quadrature_spectrum;
///
/// let p = ReducedParams::new(-1.0, 4.0, 0.0, 0.2, 1.5, 1.0e4)?
///     .with_eps(Complex64::new(0.0, -1.0)); // backaction-cancelling pump
/// let s = output_quadrature_spectrum(&p, 0.0, &[0.7, 1.0])?;
/// assert!(s.r_mag.iter().all(|r| *r < 0.0)); // squeezed below shot noise
/// # Ok::<(), squeezecool::error::Error>(())
/// ```
pub fn output_quadrature_spectrum(
    p: &ReducedParams,
    theta: f64,
    omega: &[f64],
) -> Result<QuadratureSpectrum> {
    quadrature_spectrum(p, theta, omega, Field::Output)
}

/// Stationary quadrature spectrum of the intracavity field at detection angle
/// `theta`, on the given frequency grid.
///
/// Unlike the output spectrum this is port-agnostic (only the total κ enters)
/// and is not shot-noise-flat even for an empty cavity away from resonance in
/// the sense of absolute normalisation: its integral over ω/2π equals the
/// stationary variance ⟨X_θ²⟩ of the mode, which is 1 for vacuum.
pub fn intracavity_quadrature_spectrum(
    p: &ReducedParams,
    theta: f64,
    omega: &[f64],
) -> Result<QuadratureSpectrum> {
    quadrature_spectrum(p, theta, omega, Field::Intracavity)
}
