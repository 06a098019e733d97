//! Second-moment dynamics of the linearized model.
//!
//! For the fluctuation vector V = (a₁, a₁†, b₁, b₁†) the matrix of (unsymmetrized)
//! second moments M_ij = ⟨V_i V_j⟩ obeys the linear equation
//!
//! ```text
//!   dM/dt = D·M + M·Dᵀ + C
//! ```
//!
//! with D and C from [`crate::model`]. Ten moments close the system:
//! ⟨a²⟩, ⟨a†a⟩, ⟨a†²⟩, ⟨ab⟩, ⟨ab†⟩, ⟨a†b⟩, ⟨a†b†⟩, ⟨b²⟩, ⟨b†b⟩, ⟨b†²⟩.
//! Conjugate pairs (⟨a†²⟩ = ⟨a²⟩*, …) are carried explicitly and verified as
//! post-checks after every solve or integration, never projected.

use nalgebra::{Matrix4, SMatrix, SVector};
use num_complex::Complex64;

use crate::error::Error;
use crate::model::{build_diffusion, build_drift, stability};
use crate::ode::{integrate, StepperOpts};
use crate::params::{ReducedParams, SchemeConfig};
use crate::Result;

/// The ten second moments. Number-like moments (`naa`, `nbb`) are real by
/// Hermiticity and stored as such; the explicit conjugate fields (`adad`, …) allow
/// consistency post-checks instead of silent symmetrization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentState {
    /// ⟨a₁²⟩
    pub aa: Complex64,
    /// ⟨a₁†a₁⟩
    pub naa: f64,
    /// ⟨a₁†²⟩ (= ⟨a₁²⟩* for physical states)
    pub adad: Complex64,
    /// ⟨a₁b₁⟩
    pub ab: Complex64,
    /// ⟨a₁b₁†⟩
    pub abd: Complex64,
    /// ⟨a₁†b₁⟩ (= ⟨a₁b₁†⟩*)
    pub adb: Complex64,
    /// ⟨a₁†b₁†⟩ (= ⟨a₁b₁⟩*)
    pub adbd: Complex64,
    /// ⟨b₁²⟩
    pub bb: Complex64,
    /// ⟨b₁†b₁⟩
    pub nbb: f64,
    /// ⟨b₁†²⟩ (= ⟨b₁²⟩*)
    pub bdbd: Complex64,
}

/// Sampled moment evolution.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<MomentState>,
    /// Largest conjugation/realness violation seen at any sample, relative to the
    /// state's own scale; bounded by the post-check tolerance of [`evolve`].
    pub max_conjugation_residual: f64,
}

/// Adaptive integrator settings for [`evolve`].
#[derive(Debug, Clone, Copy)]
pub struct IntegratorSettings {
    /// Relative tolerance per step (default 1e−9).
    pub rtol: f64,
    /// Absolute tolerance per step (default 1e−12).
    pub atol: f64,
    /// Hard cap on accepted+rejected steps.
    pub max_steps: usize,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        IntegratorSettings {
            rtol: 1e-9,
            atol: 1e-12,
            max_steps: 10_000_000,
        }
    }
}

/// Physicality verdict for a moment state: the Heisenberg matrix σ + iΩ/2 built
/// from the symmetrized quadrature covariance σ must be positive semidefinite.
#[derive(Debug, Clone, Copy)]
pub struct PhysicalityReport {
    /// Smallest eigenvalue of σ + iΩ/2 (slightly negative values within round-off
    /// of zero are physical).
    pub min_eig: f64,
    /// Scale used for the tolerance: the largest diagonal of σ, at least 1.
    pub scale: f64,
    /// min_eig ≥ −1e−8 · scale.
    pub ok: bool,
}

impl MomentState {
    /// Both modes in vacuum.
    pub fn vacuum() -> Self {
        Self::thermal(0.0)
    }

    /// Optical vacuum, mechanical thermal state with occupancy `n0`.
    pub fn thermal(n0: f64) -> Self {
        let z = Complex64::new(0.0, 0.0);
        MomentState {
            aa: z,
            naa: 0.0,
            adad: z,
            ab: z,
            abd: z,
            adb: z,
            adbd: z,
            bb: z,
            nbb: n0,
            bdbd: z,
        }
    }

    /// The full 4×4 moment matrix M_ij = ⟨V_i V_j⟩.
    pub fn moment_matrix(&self) -> Matrix4<Complex64> {
        to_matrix(&self.to_vec())
    }

    pub(crate) fn to_vec(&self) -> SVector<Complex64, 10> {
        SVector::<Complex64, 10>::from([
            self.aa,
            Complex64::new(self.naa, 0.0),
            self.adad,
            self.ab,
            self.abd,
            self.adb,
            self.adbd,
            self.bb,
            Complex64::new(self.nbb, 0.0),
            self.bdbd,
        ])
    }

    /// Largest deviation from conjugate symmetry / realness, and the state scale.
    fn conjugation_residual(v: &SVector<Complex64, 10>) -> (f64, f64) {
        let scale = v.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
        let res = [
            (v[2] - v[0].conj()).norm(), // ⟨a†²⟩ vs ⟨a²⟩*
            (v[6] - v[3].conj()).norm(), // ⟨a†b†⟩ vs ⟨ab⟩*
            (v[5] - v[4].conj()).norm(), // ⟨a†b⟩ vs ⟨ab†⟩*
            (v[9] - v[7].conj()).norm(), // ⟨b†²⟩ vs ⟨b²⟩*
            v[1].im.abs(),               // Im⟨a†a⟩
            v[8].im.abs(),               // Im⟨b†b⟩
        ]
        .into_iter()
        .fold(0.0_f64, f64::max);
        (res, scale)
    }

    fn from_vec_checked(
        v: &SVector<Complex64, 10>,
        tol_rel: f64,
        what: &'static str,
    ) -> Result<(Self, f64)> {
        let (res, scale) = Self::conjugation_residual(v);
        if res > tol_rel * scale {
            return Err(Error::Inconsistent {
                what,
                detail: format!(
                    "conjugation residual {res:.3e} exceeds {tol_rel:.1e} x scale {scale:.3e}"
                ),
            });
        }
        Ok((
            MomentState {
                aa: v[0],
                naa: v[1].re,
                adad: v[2],
                ab: v[3],
                abd: v[4],
                adb: v[5],
                adbd: v[6],
                bb: v[7],
                nbb: v[8].re,
                bdbd: v[9],
            },
            res / scale,
        ))
    }
}

/// Moment vector → full matrix M (with ⟨aa†⟩ = ⟨a†a⟩+1 etc. from the commutators).
fn to_matrix(v: &SVector<Complex64, 10>) -> Matrix4<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let (aa, naa, adad, ab, abd, adb, adbd, bb, nbb, bdbd) =
        (v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9]);
    #[rustfmt::skip]
    let m = Matrix4::new(
        aa,  naa + one, ab,  abd,
        naa, adad,      adb, adbd,
        ab,  adb,       bb,  nbb + one,
        abd, adbd,      nbb, bdbd,
    );
    m
}

/// One Lyapunov step: extract the ten independent derivatives from
/// R = D·M + M·Dᵀ + C.
fn rhs_vec(
    d: &Matrix4<Complex64>,
    c: &Matrix4<Complex64>,
    v: &SVector<Complex64, 10>,
) -> SVector<Complex64, 10> {
    let m = to_matrix(v);
    let r = d * m + m * d.transpose() + c;
    SVector::<Complex64, 10>::from([
        r[(0, 0)], // d⟨a²⟩
        r[(1, 0)], // d⟨a†a⟩
        r[(1, 1)], // d⟨a†²⟩
        r[(0, 2)], // d⟨ab⟩
        r[(0, 3)], // d⟨ab†⟩
        r[(1, 2)], // d⟨a†b⟩
        r[(1, 3)], // d⟨a†b†⟩
        r[(2, 2)], // d⟨b²⟩
        r[(3, 2)], // d⟨b†b⟩
        r[(3, 3)], // d⟨b†²⟩
    ])
}

/// Time derivative of the ten moments for the given parameters and scheme.
pub fn moment_rhs(x: &MomentState, p: &ReducedParams, s: &SchemeConfig) -> Result<MomentState> {
    let d = build_drift(p)?.entries;
    let c = build_diffusion(p, s)?.entries;
    let out = rhs_vec(&d, &c, &x.to_vec());
    // The derivative of a conjugate-symmetric state is conjugate-symmetric, so the
    // same folding applies; tolerance is generous since x may be arbitrary.
    let (state, _) = MomentState::from_vec_checked(&out, 1e-9, "moment_rhs")?;
    Ok(state)
}

/// Integrates the moment equations from `x0`, sampling at the given times
/// (strictly increasing, ≥ 0).
///
/// Conjugate-pair symmetry and the realness of ⟨a†a⟩, ⟨b†b⟩ are verified at every
/// sample to within 1e−6 of the state scale (post-checks, not projections); the
/// worst residual is reported on the trajectory.
pub fn evolve(
    x0: &MomentState,
    p: &ReducedParams,
    s: &SchemeConfig,
    sample_times: &[f64],
    settings: &IntegratorSettings,
) -> Result<Trajectory> {
    s.validate_with(p)?;
    if sample_times.is_empty() {
        return Err(Error::invalid("sample_times", "must be nonempty"));
    }
    if sample_times[0] < 0.0 || sample_times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid(
            "sample_times",
            "must be strictly increasing and >= 0",
        ));
    }
    let d = build_drift(p)?.entries;
    let c = build_diffusion(p, s)?.entries;
    let opts = StepperOpts {
        rtol: settings.rtol,
        atol: settings.atol,
        max_steps: settings.max_steps,
    };

    let mut sampled: Vec<SVector<Complex64, 10>> = Vec::with_capacity(sample_times.len());
    integrate(
        |_t, x, dx| {
            let v = SVector::<Complex64, 10>::from_column_slice(x);
            let out = rhs_vec(&d, &c, &v);
            dx.copy_from_slice(out.as_slice());
        },
        0.0,
        x0.to_vec().as_slice(),
        sample_times,
        &opts,
        |_t, x| sampled.push(SVector::<Complex64, 10>::from_column_slice(x)),
    )?;

    let mut states = Vec::with_capacity(sampled.len());
    let mut worst = 0.0_f64;
    for v in &sampled {
        let (state, res) = MomentState::from_vec_checked(v, 1e-6, "evolve")?;
        worst = worst.max(res);
        states.push(state);
    }
    Ok(Trajectory {
        times: sample_times.to_vec(),
        states,
        max_conjugation_residual: worst,
    })
}

/// Solves the stationary moment equations D·M + M·Dᵀ + C = 0.
///
/// Rejects dynamically unstable parameter sets (the stationary solution would not
/// be a physical state) with the stability verdict attached. The 10×10 linear
/// solve is verified to a relative residual of 1e−10.
pub fn steady_state(p: &ReducedParams, s: &SchemeConfig) -> Result<MomentState> {
    s.validate_with(p)?;
    let verdict = stability(p)?;
    if !verdict.stable_eig {
        return Err(Error::Unstable { verdict });
    }
    let d = build_drift(p)?.entries;
    let c = build_diffusion(p, s)?.entries;

    // rhs_vec is affine in the moment vector: rhs(x) = L·x + c0.
    let zero = SVector::<Complex64, 10>::from([Complex64::default(); 10]);
    let c0 = rhs_vec(&d, &c, &zero);
    let mut l = SMatrix::<Complex64, 10, 10>::zeros();
    for j in 0..10 {
        let mut e = zero;
        e[j] = Complex64::new(1.0, 0.0);
        l.set_column(j, &(rhs_vec(&d, &c, &e) - c0));
    }

    let lu = l.lu();
    let x = lu.solve(&(-c0)).ok_or(Error::Singular {
        what: "steady_state",
        magnitude: 0.0,
    })?;

    let resid = (l * x + c0).norm();
    let scale = c0.norm() + l.norm() * x.norm();
    if resid > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NoConvergence {
            what: "steady_state",
            residual: resid / scale,
            iterations: 1,
        });
    }

    let (state, _) = MomentState::from_vec_checked(&x, 1e-8, "steady_state")?;
    Ok(state)
}

/// Checks σ + iΩ/2 ⪰ 0 for the quadrature covariance σ of the state.
///
/// Quadratures are X = (a+a†)/√2, P = −i(a−a†)/√2 per mode, Ω the symplectic form
/// with [X, P] = i. The Hermitian 4×4 matrix is embedded as the real symmetric
/// 8×8 [[Re, −Im], [Im, Re]] whose spectrum equals that of σ + iΩ/2 (doubled), so
/// a plain symmetric eigensolver suffices.
pub fn physicality(x: &MomentState) -> PhysicalityReport {
    let half = 0.5;
    let aa = x.aa;
    let adad = x.adad;
    let naa = Complex64::new(x.naa, 0.0);
    let bb = x.bb;
    let bdbd = x.bdbd;
    let nbb = Complex64::new(x.nbb, 0.0);
    let (ab, abd, adb, adbd) = (x.ab, x.abd, x.adb, x.adbd);
    let one = Complex64::new(1.0, 0.0);

    // Same-mode covariances.
    let xx_a = half * (aa + adad + 2.0 * naa + one);
    let pp_a = half * (-aa - adad + 2.0 * naa + one);
    let xp_a = Complex64::new(0.0, -half) * (aa - adad);
    let xx_b = half * (bb + bdbd + 2.0 * nbb + one);
    let pp_b = half * (-bb - bdbd + 2.0 * nbb + one);
    let xp_b = Complex64::new(0.0, -half) * (bb - bdbd);
    // Cross-mode covariances (operators of different modes commute).
    let xa_xb = half * (ab + abd + adb + adbd);
    let xa_pb = Complex64::new(0.0, -half) * (ab - abd + adb - adbd);
    let pa_xb = Complex64::new(0.0, -half) * (ab + abd - adb - adbd);
    let pa_pb = -half * (ab - abd - adb + adbd);

    #[rustfmt::skip]
    let sigma_c = Matrix4::new(
        xx_a,  xp_a,  xa_xb, xa_pb,
        xp_a,  pp_a,  pa_xb, pa_pb,
        xa_xb, pa_xb, xx_b,  xp_b,
        xa_pb, pa_pb, xp_b,  pp_b,
    );
    // For conjugate-symmetric moments sigma_c is real; keep the real part and let
    // the embedding's symmetrization absorb round-off.
    let sigma = sigma_c.map(|z| z.re);
    #[rustfmt::skip]
    let omega_half = Matrix4::new(
        0.0, 0.5, 0.0, 0.0,
        -0.5, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.5,
        0.0, 0.0, -0.5, 0.0,
    );

    // Real symmetric embedding of H = sigma + i·omega_half.
    let mut e = SMatrix::<f64, 8, 8>::zeros();
    for i in 0..4 {
        for j in 0..4 {
            let re = 0.5 * (sigma[(i, j)] + sigma[(j, i)]);
            e[(i, j)] = re;
            e[(i + 4, j + 4)] = re;
            e[(i, j + 4)] = -omega_half[(i, j)];
            e[(i + 4, j)] = omega_half[(i, j)];
        }
    }
    let eigs = e.symmetric_eigen().eigenvalues;
    let min_eig = eigs.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = (0..4).map(|i| sigma[(i, i)]).fold(1.0_f64, f64::max);
    PhysicalityReport {
        min_eig,
        scale,
        ok: min_eig >= -1e-8 * scale,
    }
}
