//! Full three-mode model — fundamental cavity mode, second-harmonic pump mode, and
//! the mechanical resonator — and its reduction to the single-mode picture.
//!
//! The reduced model in [`crate::model`] treats the χ⁽²⁾ pump amplitude ε as an
//! external knob. Physically it is the intracavity field of a second cavity mode at
//! twice the drive frequency, coupled to the fundamental mode by the χ⁽²⁾ medium
//! and itself subject to radiation-pressure coupling, detuning, and loss. This
//! module models all three modes and quantifies when, and how well, the second mode
//! can be adiabatically eliminated into the single-mode picture.
//!
//! Mean-field equations, in the frame rotating at the drive (ν is the χ⁽²⁾ mode
//! coupling; both optical modes couple dispersively to the mechanical displacement
//! β + β*):
//!
//! ```text
//!   α̇₁ = (iΔ₁ − κ₁/2) α₁ + ν α₁* α₂ − i g₁ (β+β*) α₁ − ε₁
//!   α̇₂ = (iΔ₂ − κ₂/2) α₂ − (ν*/2) α₁² − i g₂ (β+β*) α₂ − ε₂
//!   β̇  = (−iω_m − γ/2) β − i (g₁|α₁|² + g₂|α₂|²)
//! ```
//!
//! Fluctuations around a mean-field point obey dV/dt = D·V + ξ over the ordering
//! V = (δa₁, δa₁†, δa₂, δa₂†, δb, δb†), with the static displacement shift absorbed
//! into effective detunings Δᵢ,eff = Δᵢ − gᵢ(β+β*):
//!
//! ```text
//!   δȧ₁ = (iΔ₁,eff − κ₁/2) δa₁ + ν α₂ δa₁† + ν α₁* δa₂ − i g₁ α₁ (δb + δb†)
//!   δȧ₂ = (iΔ₂,eff − κ₂/2) δa₂ − ν* α₁ δa₁ − i g₂ α₂ (δb + δb†)
//!   δḃ  = (−iω_m − γ/2) δb − i g₁ (α₁* δa₁ + α₁ δa₁†) − i g₂ (α₂* δa₂ + α₂ δa₂†)
//! ```
//!
//! (daggered rows are the conjugates). The noise matrix carries vacuum inputs on
//! both optical modes and the thermal mechanical bath.
//!
//! When the second mode is far detuned — |Δ₂,eff| much larger than both its own
//! backaction rate on the mechanics and the nonlinear mixing rate — δa₂ follows the
//! slow variables instantly and can be eliminated. [`reduce`] performs that
//! elimination and hands back a [`ReducedParams`] for the single-mode machinery,
//! together with the [`EffectiveModel`] bookkeeping: the effective pump
//! ε_eff = iνα₂/2, coupling g_eff, detuning/linewidth shifts, and the residual
//! backaction ε_M of the eliminated mode, which adds ε_M/γ thermal quanta to the
//! bath seen by the reduced model. [`full_occupancy`] solves the un-eliminated
//! six-variable model outright, which is how the quality of the reduction is
//! audited in this crate's tests.

use nalgebra::{DMatrix, DVector, Matrix4, Matrix6, Vector4};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Error;
use crate::model::StabilityVerdict;
use crate::params::ReducedParams;
use crate::Result;

/// Index swap implementing (δa₁ ↔ δa₁†, δa₂ ↔ δa₂†, δb ↔ δb†).
const SWAP: [usize; 6] = [1, 0, 3, 2, 5, 4];

/// Parameters of the full three-mode model, in units of the mechanical frequency.
///
/// Unlike [`ReducedParams`] this set is fully explicit: nothing is derived or
/// stored redundantly. The couplings `g_1`, `g_2` may carry either sign (the sign
/// is a displacement-direction convention); the χ⁽²⁾ coupling `nu` and the drives
/// are complex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeModeParams {
    /// Detuning Δ₁ of the fundamental mode from the drive (units of ω_m).
    pub delta_1: f64,
    /// Detuning Δ₂ of the second-harmonic mode from twice the drive frequency.
    pub delta_2: f64,
    /// χ⁽²⁾ intermode coupling ν (complex).
    pub nu: Complex64,
    /// Radiation-pressure coupling of the fundamental mode to the mechanics.
    pub g_1: f64,
    /// Radiation-pressure coupling of the second-harmonic mode to the mechanics.
    pub g_2: f64,
    /// Linewidth κ₁ > 0 of the fundamental mode.
    pub kappa_1: f64,
    /// Linewidth κ₂ > 0 of the second-harmonic mode.
    pub kappa_2: f64,
    /// Coherent drive amplitude ε₁ on the fundamental mode.
    pub eps_1: Complex64,
    /// Coherent drive amplitude ε₂ on the second-harmonic mode.
    pub eps_2: Complex64,
    /// Mechanical frequency; 1 in the native units of this crate.
    pub omega_m: f64,
    /// Mechanical linewidth γ > 0.
    pub gamma: f64,
    /// Ambient thermal phonon occupancy n_th ≥ 0.
    pub n_th: f64,
}

impl ThreeModeParams {
    /// Checks finiteness and sign constraints; all operations call this on entry.
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("delta_1", self.delta_1),
            ("delta_2", self.delta_2),
            ("nu.re", self.nu.re),
            ("nu.im", self.nu.im),
            ("g_1", self.g_1),
            ("g_2", self.g_2),
            ("kappa_1", self.kappa_1),
            ("kappa_2", self.kappa_2),
            ("eps_1.re", self.eps_1.re),
            ("eps_1.im", self.eps_1.im),
            ("eps_2.re", self.eps_2.re),
            ("eps_2.im", self.eps_2.im),
            ("omega_m", self.omega_m),
            ("gamma", self.gamma),
            ("n_th", self.n_th),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::invalid(name, format!("must be finite, got {v}")));
            }
        }
        if self.omega_m <= 0.0 {
            return Err(Error::invalid("omega_m", "must be > 0"));
        }
        if self.kappa_1 <= 0.0 || self.kappa_2 <= 0.0 {
            return Err(Error::invalid(
                "kappa_1/kappa_2",
                "both cavity linewidths must be > 0",
            ));
        }
        if self.gamma <= 0.0 {
            return Err(Error::invalid("gamma", "must be > 0"));
        }
        if self.n_th < 0.0 {
            return Err(Error::invalid("n_th", "thermal occupancy must be >= 0"));
        }
        Ok(())
    }
}

/// One mean-field fixed point of the three-mode model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalSteadyState {
    /// Fundamental-mode amplitude α₁.
    pub alpha_1: Complex64,
    /// Second-harmonic-mode amplitude α₂.
    pub alpha_2: Complex64,
    /// Mechanical amplitude β = −i(g₁|α₁|² + g₂|α₂|²)/(iω_m + γ/2).
    pub beta: Complex64,
    /// Relative residual of the mean-field equations at this point.
    pub residual: f64,
}

/// Effective single-mode parameters produced by adiabatically eliminating the
/// second-harmonic mode, plus the validity bookkeeping of that elimination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveModel {
    /// Δ₁ − g₁(β+β*): fundamental detuning with the static shift absorbed.
    pub delta_1_eff: f64,
    /// Δ₂ − g₂(β+β*): second-mode detuning with the static shift absorbed.
    pub delta_2_eff: f64,
    /// Reduced-model detuning Δ_eff = Δ₁,eff − Δ₂,eff |ν|²|α₁|²/(Δ₂,eff² + κ₂²/4).
    pub delta_eff: f64,
    /// Reduced-model linewidth κ_eff = κ₁ + κ₂ |ν|²|α₁|²/(Δ₂,eff² + κ₂²/4).
    pub kappa_eff: f64,
    /// Reduced-model coupling g_eff = g₁α₁ − g₂ ν α₁* α₂ / (iΔ₂,eff − κ₂/2).
    pub g_eff: Complex64,
    /// Reduced-model χ⁽²⁾ pump ε_eff = iνα₂/2.
    pub eps_eff: Complex64,
    /// Residual backaction rate ε_M = g₂²|α₂|² κ₂/(Δ₂,eff² + κ₂²/4) of the
    /// eliminated mode on the mechanics.
    pub eps_m: f64,
    /// ε_M/γ: thermal quanta the eliminated mode adds to the bath of the reduced
    /// model ([`reduce`] folds this into `n_th`).
    pub n_add_rate: f64,
    /// ε_M/ω_m: occupancy floor the eliminated mode adds to any cooling limit.
    pub n_f_add: f64,
    /// |Δ₂,eff| over the eliminated mode's backaction rate √(g₂²|α₂|²κ₂/ω_m);
    /// infinite when that rate vanishes. The elimination needs ≳ 10.
    pub margin_backaction: f64,
    /// |Δ₂,eff| over the nonlinear mixing rate √(κ₂/κ₁)|να₁|; infinite when that
    /// rate vanishes. The elimination needs ≳ 10.
    pub margin_nonlinear: f64,
    /// True when both margins are at least 10.
    pub valid: bool,
}

/// Stationary occupancies of the full (un-eliminated) linearized model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeModeOccupancy {
    /// Stationary mechanical occupancy ⟨δb†δb⟩.
    pub n_mech: f64,
    /// Stationary fundamental-mode occupancy ⟨δa₁†δa₁⟩.
    pub n_fund: f64,
    /// Stationary second-harmonic-mode occupancy ⟨δa₂†δa₂⟩.
    pub n_second: f64,
    /// Max real part of the drift eigenvalues; negative means stable.
    pub margin: f64,
}

/// Mean-field equations at a fixed χ⁽²⁾ coupling (the continuation solver walks
/// `nu` from 0 to its target value while the rest of the parameters stay put).
struct MeanField<'a> {
    p: &'a ThreeModeParams,
    nu: Complex64,
}

impl MeanField<'_> {
    fn l1(&self) -> Complex64 {
        Complex64::new(-self.p.kappa_1 / 2.0, self.p.delta_1)
    }

    fn l2(&self) -> Complex64 {
        Complex64::new(-self.p.kappa_2 / 2.0, self.p.delta_2)
    }

    /// Static mechanical response weight: β + β* = w · (g₁|α₁|² + g₂|α₂|²).
    fn w(&self) -> f64 {
        let p = self.p;
        -2.0 * p.omega_m / (p.omega_m * p.omega_m + p.gamma * p.gamma / 4.0)
    }

    /// Residuals (F₁, F₂) of the two optical mean-field equations (the mechanical
    /// one is eliminated exactly) and the summed magnitude of their terms, which
    /// sets the scale for the relative convergence test.
    fn eval(&self, a1: Complex64, a2: Complex64) -> (Complex64, Complex64, f64) {
        let p = self.p;
        let i = Complex64::i();
        let s = self.w() * (p.g_1 * a1.norm_sqr() + p.g_2 * a2.norm_sqr());
        let t11 = self.l1() * a1;
        let t12 = self.nu * a1.conj() * a2;
        let t13 = -i * (p.g_1 * s) * a1;
        let f1 = t11 + t12 + t13 - p.eps_1;
        let t21 = self.l2() * a2;
        let t22 = -self.nu.conj() * 0.5 * a1 * a1;
        let t23 = -i * (p.g_2 * s) * a2;
        let f2 = t21 + t22 + t23 - p.eps_2;
        let scale = t11.norm()
            + t12.norm()
            + t13.norm()
            + p.eps_1.norm()
            + t21.norm()
            + t22.norm()
            + t23.norm()
            + p.eps_2.norm();
        (f1, f2, scale)
    }

    /// Jacobian of (Re F₁, Im F₁, Re F₂, Im F₂) over (Re α₁, Im α₁, Re α₂, Im α₂),
    /// from the analytic ∂F/∂α and ∂F/∂α* derivatives: dF/dx = A + B and
    /// dF/dy = i(A − B) for A = ∂F/∂α, B = ∂F/∂α*.
    fn jacobian(&self, a1: Complex64, a2: Complex64) -> Matrix4<f64> {
        let p = self.p;
        let i = Complex64::i();
        let w = self.w();
        let (g1, g2) = (p.g_1, p.g_2);
        let s = w * (g1 * a1.norm_sqr() + g2 * a2.norm_sqr());
        let a11 = self.l1() + Complex64::new(0.0, -(g1 * s) - g1 * g1 * w * a1.norm_sqr());
        let b11 = self.nu * a2 - i * (g1 * g1 * w) * (a1 * a1);
        let a12 = self.nu * a1.conj() - i * (g1 * g2 * w) * (a1 * a2.conj());
        let b12 = -i * (g1 * g2 * w) * (a1 * a2);
        let a21 = -self.nu.conj() * a1 - i * (g1 * g2 * w) * (a2 * a1.conj());
        let b21 = -i * (g1 * g2 * w) * (a1 * a2);
        let a22 = self.l2() + Complex64::new(0.0, -(g2 * s) - g2 * g2 * w * a2.norm_sqr());
        let b22 = -i * (g2 * g2 * w) * (a2 * a2);

        let mut j = Matrix4::<f64>::zeros();
        let mut put = |r: usize, c: usize, da: Complex64, db: Complex64| {
            let dx = da + db;
            let dy = Complex64::i() * (da - db);
            j[(2 * r, 2 * c)] = dx.re;
            j[(2 * r, 2 * c + 1)] = dy.re;
            j[(2 * r + 1, 2 * c)] = dx.im;
            j[(2 * r + 1, 2 * c + 1)] = dy.im;
        };
        put(0, 0, a11, b11);
        put(0, 1, a12, b12);
        put(1, 0, a21, b21);
        put(1, 1, a22, b22);
        j
    }

    /// Damped Newton iteration from `start`. Returns the converged amplitudes and
    /// the relative residual, or `None` when this start does not converge (a
    /// normal outcome for all but one seed of the multistart).
    fn newton(&self, start: (Complex64, Complex64)) -> Option<(Complex64, Complex64, f64)> {
        const REL_TOL: f64 = 1e-13;
        const MAX_ITER: usize = 120;
        const LAMBDA_MIN: f64 = 1e-10;
        let converged = |normf: f64, scale: f64| normf <= REL_TOL * scale + 1e-300;

        let (mut a1, mut a2) = start;
        let (mut f1, mut f2, mut scale) = self.eval(a1, a2);
        let mut normf = f1.norm() + f2.norm();
        for _ in 0..MAX_ITER {
            if !normf.is_finite() {
                return None;
            }
            if converged(normf, scale) {
                return Some((a1, a2, normf / scale.max(f64::MIN_POSITIVE)));
            }
            let j = self.jacobian(a1, a2);
            let rhs = Vector4::new(-f1.re, -f1.im, -f2.re, -f2.im);
            let step = j.lu().solve(&rhs)?;
            // Backtracking line search: accept the longest step in the Newton
            // direction that still shrinks the residual.
            let mut lambda = 1.0;
            loop {
                let c1 = a1 + lambda * Complex64::new(step[0], step[1]);
                let c2 = a2 + lambda * Complex64::new(step[2], step[3]);
                let (h1, h2, sc) = self.eval(c1, c2);
                let nh = h1.norm() + h2.norm();
                if nh.is_finite() && nh <= (1.0 - 1e-4 * lambda) * normf {
                    (a1, a2) = (c1, c2);
                    (f1, f2, scale, normf) = (h1, h2, sc, nh);
                    break;
                }
                lambda *= 0.5;
                if lambda < LAMBDA_MIN {
                    return None;
                }
            }
        }
        if converged(normf, scale) {
            Some((a1, a2, normf / scale.max(f64::MIN_POSITIVE)))
        } else {
            None
        }
    }
}

/// Walks the χ⁽²⁾ coupling from 0 to its target in stages, converging Newton at
/// each stage. The resulting fixed point is the branch continuously connected to
/// the decoupled (ν = 0) cavity response.
fn continuation(
    p: &ThreeModeParams,
    start: (Complex64, Complex64),
) -> Option<(Complex64, Complex64, f64)> {
    let mut cur = start;
    let mut res = f64::INFINITY;
    for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let eq = MeanField { p, nu: p.nu * t };
        let (a1, a2, r) = eq.newton(cur)?;
        cur = (a1, a2);
        res = r;
    }
    Some((cur.0, cur.1, res))
}

/// Finds mean-field fixed points by a deterministic multistart Newton search.
///
/// The first entry is the branch continuously connected (by walking ν up from 0)
/// to the decoupled cavity response; the remaining deduplicated fixed points
/// follow in a deterministic order. Above the parametric-oscillation threshold the
/// connected branch is the undepleted one (α₁ = 0 when ε₁ = 0) and the
/// symmetry-broken pair appears after it.
///
/// The multistart is heuristic: it reliably finds the connected branch and has
/// enough spread to pick up coexisting branches in the regimes this crate deals
/// with, but it makes no completeness guarantee for arbitrary parameters.
pub fn classical_steady_states(p: &ThreeModeParams) -> Result<Vec<ClassicalSteadyState>> {
    p.validate()?;
    let l1 = Complex64::new(-p.kappa_1 / 2.0, p.delta_1);
    let l2 = Complex64::new(-p.kappa_2 / 2.0, p.delta_2);
    let d1 = p.eps_1 / l1;
    let d2 = p.eps_2 / l2;
    let c0 = 1.0 + d1.norm() + d2.norm();
    let re = |x: f64| Complex64::new(x, 0.0);
    let im = |x: f64| Complex64::new(0.0, x);

    enum Seed {
        Continuation,
        Point(Complex64, Complex64),
    }
    // Offsets (not just scalings) of the decoupled response, so that branches with
    // α₁ = 0 do not trap every start; spread covers sign flips and quadrant turns.
    let seeds = vec![
        Seed::Continuation,
        Seed::Point(d1, d2),
        Seed::Point(-d1 + re(0.5 * c0), d2),
        Seed::Point(d1 + im(0.3 * c0), -d2),
        Seed::Point(2.0 * d1 + re(c0), 2.0 * d2),
        Seed::Point(0.5 * d1 - re(0.7 * c0), 0.5 * d2 + im(0.2 * c0)),
        Seed::Point(d1 + c0 * Complex64::new(0.9, 0.4), d2 * Complex64::new(1.0, 0.5)),
        Seed::Point(-d1 - c0 * Complex64::new(0.6, -0.8), -2.0 * d2),
    ];

    let results: Vec<Option<(Complex64, Complex64, f64)>> = seeds
        .into_par_iter()
        .map(|seed| match seed {
            Seed::Continuation => continuation(p, (d1, d2)),
            Seed::Point(s1, s2) => MeanField { p, nu: p.nu }.newton((s1, s2)),
        })
        .collect();

    let connected = results[0];
    let mut rest: Vec<(Complex64, Complex64, f64)> =
        results[1..].iter().flatten().copied().collect();
    // Deterministic order for the non-connected candidates. When the continuation
    // failed, proximity to the decoupled response is the most useful leading key.
    let tuple_key =
        |t: &(Complex64, Complex64, f64)| (t.0.norm(), t.0.re, t.0.im, t.1.norm(), t.1.re, t.1.im);
    if connected.is_some() {
        rest.sort_by(|a, b| {
            tuple_key(a)
                .partial_cmp(&tuple_key(b))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
    } else {
        let dist_key = |t: &(Complex64, Complex64, f64)| {
            let k = tuple_key(t);
            (
                (t.0 - d1).norm_sqr() + (t.1 - d2).norm_sqr(),
                k.0,
                k.1,
                k.2,
                k.3,
                k.4,
                k.5,
            )
        };
        rest.sort_by(|a, b| {
            dist_key(a)
                .partial_cmp(&dist_key(b))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
    }

    let mut kept: Vec<(Complex64, Complex64, f64)> = Vec::new();
    kept.extend(connected);
    for cand in rest {
        let tol = 1e-6 * (1.0 + cand.0.norm() + cand.1.norm());
        if kept
            .iter()
            .all(|k| (k.0 - cand.0).norm() + (k.1 - cand.1).norm() > tol)
        {
            kept.push(cand);
        }
    }
    if kept.is_empty() {
        return Err(Error::NoConvergence {
            what: "classical_steady_states",
            residual: f64::INFINITY,
            iterations: 120,
        });
    }

    Ok(kept
        .into_iter()
        .map(|(a1, a2, residual)| {
            let x = p.g_1 * a1.norm_sqr() + p.g_2 * a2.norm_sqr();
            let beta = Complex64::new(0.0, -x) / Complex64::new(p.gamma / 2.0, p.omega_m);
            ClassicalSteadyState {
                alpha_1: a1,
                alpha_2: a2,
                beta,
                residual,
            }
        })
        .collect())
}

/// The default mean-field fixed point: the branch continuously connected to the
/// decoupled cavity response (first entry of [`classical_steady_states`]).
pub fn classical_steady_state(p: &ThreeModeParams) -> Result<ClassicalSteadyState> {
    Ok(classical_steady_states(p)?[0])
}

/// Adiabatic elimination of the second-harmonic mode at the given mean-field
/// point: effective single-mode parameters plus validity margins.
///
/// This is pure arithmetic on the supplied linearization point; it does not check
/// that `ss` actually solves the mean-field equations (pass a
/// [`classical_steady_state`] result for the physical answer, or probe arbitrary
/// points deliberately). See [`EffectiveModel`] for the formulas and [`reduce`]
/// for the packaged single-mode parameter set.
pub fn effective_model(p: &ThreeModeParams, ss: &ClassicalSteadyState) -> EffectiveModel {
    let s = 2.0 * ss.beta.re;
    let d1e = p.delta_1 - p.g_1 * s;
    let d2e = p.delta_2 - p.g_2 * s;
    let dd2 = d2e * d2e + p.kappa_2 * p.kappa_2 / 4.0;
    let l2e = Complex64::new(-p.kappa_2 / 2.0, d2e);
    let nu_a1_sq = p.nu.norm_sqr() * ss.alpha_1.norm_sqr();

    let delta_eff = d1e - d2e * nu_a1_sq / dd2;
    let kappa_eff = p.kappa_1 + p.kappa_2 * nu_a1_sq / dd2;
    let g_eff = p.g_1 * ss.alpha_1 - p.g_2 * p.nu * ss.alpha_1.conj() * ss.alpha_2 / l2e;
    let eps_eff = Complex64::i() * p.nu * ss.alpha_2 * 0.5;
    let eps_m = p.g_2 * p.g_2 * ss.alpha_2.norm_sqr() * p.kappa_2 / dd2;

    let t_back = (p.g_2 * p.g_2 * ss.alpha_2.norm_sqr() * p.kappa_2 / p.omega_m).sqrt();
    let t_nl = (p.kappa_2 / p.kappa_1).sqrt() * (p.nu * ss.alpha_1).norm();
    let margin_backaction = if t_back == 0.0 {
        f64::INFINITY
    } else {
        d2e.abs() / t_back
    };
    let margin_nonlinear = if t_nl == 0.0 {
        f64::INFINITY
    } else {
        d2e.abs() / t_nl
    };

    EffectiveModel {
        delta_1_eff: d1e,
        delta_2_eff: d2e,
        delta_eff,
        kappa_eff,
        g_eff,
        eps_eff,
        eps_m,
        n_add_rate: eps_m / p.gamma,
        n_f_add: eps_m / p.omega_m,
        margin_backaction,
        margin_nonlinear,
        valid: margin_backaction >= 10.0 && margin_nonlinear >= 10.0,
    }
}

/// Solves the mean field on the connected branch, eliminates the second mode, and
/// packages the result as a [`ReducedParams`] for the single-mode machinery.
///
/// The reduced coupling must be real and nonnegative, so the residual phase of
/// g_eff is absorbed by the gauge rotation a₁ → a₁ e^{−i arg g_eff}, under which
/// the pump transforms as ε → ε e^{−2i arg g_eff}. The added backaction of the
/// eliminated mode is folded into the thermal occupancy as n_th + ε_M/γ.
///
/// A mean-field point outside the validity regime of the elimination is NOT an
/// error: the returned [`EffectiveModel`] carries `valid = false` and the margins,
/// and the caller decides. Errors are reserved for invalid parameters and a
/// non-converging mean-field search. The parameter set must already be in units of
/// the mechanical frequency (`omega_m = 1`), like every [`ReducedParams`].
pub fn reduce(p: &ThreeModeParams) -> Result<(ReducedParams, EffectiveModel)> {
    p.validate()?;
    if (p.omega_m - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(
            "omega_m",
            format!(
                "the reduced model is expressed in units of the mechanical frequency; \
                 rescale all rates so that omega_m = 1 (got {})",
                p.omega_m
            ),
        ));
    }
    let ss = classical_steady_state(p)?;
    let em = effective_model(p, &ss);
    let phase = Complex64::from_polar(1.0, -2.0 * em.g_eff.arg());
    let rp = ReducedParams::new(
        em.delta_eff,
        em.kappa_eff,
        0.0,
        em.g_eff.norm(),
        p.n_th + em.n_add_rate,
        p.omega_m / p.gamma,
    )?
    .with_eps(em.eps_eff * phase);
    Ok((rp, em))
}

fn validate_state(ss: &ClassicalSteadyState) -> Result<()> {
    let fields = [
        ("alpha_1", ss.alpha_1),
        ("alpha_2", ss.alpha_2),
        ("beta", ss.beta),
    ];
    for (name, v) in fields {
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::invalid(
                "linearization_point",
                format!("{name} must be finite, got {v}"),
            ));
        }
    }
    Ok(())
}

/// Drift matrix of the linearized three-mode model at the given mean-field point,
/// over the ordering (δa₁, δa₁†, δa₂, δa₂†, δb, δb†).
///
/// Rows δa₁, δa₂, δb are written from the equations of motion in the module docs;
/// the daggered rows are their elementwise conjugates under the index swap
/// (0↔1, 2↔3, 4↔5), which IEEE arithmetic makes bit-identical to writing them out.
pub fn fluctuation_drift(
    p: &ThreeModeParams,
    ss: &ClassicalSteadyState,
) -> Result<Matrix6<Complex64>> {
    p.validate()?;
    validate_state(ss)?;
    let i = Complex64::i();
    let s = 2.0 * ss.beta.re;
    let d1e = p.delta_1 - p.g_1 * s;
    let d2e = p.delta_2 - p.g_2 * s;

    let mut m = Matrix6::<Complex64>::zeros();
    m[(0, 0)] = Complex64::new(-p.kappa_1 / 2.0, d1e);
    m[(0, 1)] = p.nu * ss.alpha_2;
    m[(0, 2)] = p.nu * ss.alpha_1.conj();
    m[(0, 4)] = -i * p.g_1 * ss.alpha_1;
    m[(0, 5)] = m[(0, 4)];

    m[(2, 0)] = -p.nu.conj() * ss.alpha_1;
    m[(2, 2)] = Complex64::new(-p.kappa_2 / 2.0, d2e);
    m[(2, 4)] = -i * p.g_2 * ss.alpha_2;
    m[(2, 5)] = m[(2, 4)];

    m[(4, 0)] = -i * p.g_1 * ss.alpha_1.conj();
    m[(4, 1)] = -i * p.g_1 * ss.alpha_1;
    m[(4, 2)] = -i * p.g_2 * ss.alpha_2.conj();
    m[(4, 3)] = -i * p.g_2 * ss.alpha_2;
    m[(4, 4)] = Complex64::new(-p.gamma / 2.0, -p.omega_m);

    for r in [0, 2, 4] {
        for c in 0..6 {
            m[(SWAP[r], SWAP[c])] = m[(r, c)].conj();
        }
    }
    Ok(m)
}

/// Noise-correlation matrix of the three-mode model: vacuum on both optical
/// inputs, thermal bath with occupancy `n_th` on the mechanics.
pub fn fluctuation_diffusion(p: &ThreeModeParams) -> Result<Matrix6<Complex64>> {
    p.validate()?;
    let mut c = Matrix6::<Complex64>::zeros();
    c[(0, 1)] = Complex64::new(p.kappa_1, 0.0);
    c[(2, 3)] = Complex64::new(p.kappa_2, 0.0);
    c[(4, 5)] = Complex64::new(p.gamma * (p.n_th + 1.0), 0.0);
    c[(5, 4)] = Complex64::new(p.gamma * p.n_th, 0.0);
    Ok(c)
}

/// Transform to Hermitian quadratures per mode, where the conjugation-swap
/// symmetry makes the drift real while preserving its spectrum.
fn quadrature_drift6(d: &Matrix6<Complex64>) -> Result<Matrix6<f64>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let r = Complex64::new(s, 0.0);
    let mi = Complex64::new(0.0, -s);
    let pi = Complex64::new(0.0, s);
    let mut t = Matrix6::<Complex64>::zeros();
    let mut t_inv = Matrix6::<Complex64>::zeros();
    for mode in 0..3 {
        let k = 2 * mode;
        t[(k, k)] = r;
        t[(k, k + 1)] = r;
        t[(k + 1, k)] = mi;
        t[(k + 1, k + 1)] = pi;
        t_inv[(k, k)] = r;
        t_inv[(k, k + 1)] = pi;
        t_inv[(k + 1, k)] = r;
        t_inv[(k + 1, k + 1)] = mi;
    }
    let a = t * d * t_inv;
    let scale = a.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
    let max_im = a.iter().map(|z| z.im.abs()).fold(0.0_f64, f64::max);
    if max_im > 1e-9 * scale {
        return Err(Error::Inconsistent {
            what: "quadrature_drift6",
            detail: format!(
                "imaginary residue {max_im:.3e} exceeds 1e-9 x scale {scale:.3e}; \
                 the drift lacks the conjugation-swap symmetry"
            ),
        });
    }
    Ok(a.map(|z| z.re))
}

fn drift_margin6(d: &Matrix6<Complex64>) -> Result<f64> {
    let real = quadrature_drift6(d)?;
    let eigs = real.complex_eigenvalues();
    Ok(eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

/// Stationary occupancies of the full linearized model at the given mean-field
/// point, by direct solution of D·M + M·Dᵀ + C = 0 for the 6×6 second-moment
/// matrix (a 36×36 linear system; verified to a relative residual of 1e−10).
///
/// Rejects dynamically unstable linearization points with the stability margin
/// attached (no closed-form stability test exists for the full model, so the
/// verdict's `stable_closed_form` mirrors the eigenvalue test).
pub fn full_occupancy_at(
    p: &ThreeModeParams,
    ss: &ClassicalSteadyState,
) -> Result<ThreeModeOccupancy> {
    let d = fluctuation_drift(p, ss)?;
    let margin = drift_margin6(&d)?;
    if margin >= 0.0 {
        return Err(Error::Unstable {
            verdict: StabilityVerdict {
                stable_eig: false,
                stable_closed_form: false,
                margin,
            },
        });
    }
    let c = fluctuation_diffusion(p)?;

    // Column-major vec(M): unknown index i + 6j holds M[(i,j)], and the stationary
    // condition reads (I ⊗ D + D ⊗ I) vec(M) = −vec(C).
    let mut a = DMatrix::<Complex64>::zeros(36, 36);
    for i in 0..6 {
        for j in 0..6 {
            for k in 0..6 {
                a[(i + 6 * j, k + 6 * j)] += d[(i, k)];
                a[(i + 6 * j, i + 6 * k)] += d[(j, k)];
            }
        }
    }
    let rhs = DVector::<Complex64>::from_fn(36, |q, _| -c[(q % 6, q / 6)]);
    let x = a.clone().lu().solve(&rhs).ok_or(Error::Singular {
        what: "full_occupancy",
        magnitude: 0.0,
    })?;
    let resid = (&a * &x - &rhs).norm();
    let scale = rhs.norm() + a.norm() * x.norm();
    if resid > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NoConvergence {
            what: "full_occupancy",
            residual: resid / scale,
            iterations: 1,
        });
    }

    let n_mech = x[5 + 6 * 4];
    let n_fund = x[1];
    let n_second = x[3 + 6 * 2];
    let state_scale = x.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
    for (name, v) in [
        ("<b' b>", n_mech),
        ("<a1' a1>", n_fund),
        ("<a2' a2>", n_second),
    ] {
        if v.im.abs() > 1e-8 * state_scale {
            return Err(Error::Inconsistent {
                what: "full_occupancy",
                detail: format!(
                    "{name} has imaginary residue {:.3e} at state scale {:.3e}",
                    v.im, state_scale
                ),
            });
        }
    }
    Ok(ThreeModeOccupancy {
        n_mech: n_mech.re,
        n_fund: n_fund.re,
        n_second: n_second.re,
        margin,
    })
}

/// [`full_occupancy_at`] evaluated at the connected mean-field branch.
pub fn full_occupancy(p: &ThreeModeParams) -> Result<ThreeModeOccupancy> {
    let ss = classical_steady_state(p)?;
    full_occupancy_at(p, &ss)
}
