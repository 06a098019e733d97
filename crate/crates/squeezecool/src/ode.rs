//! Adaptive Dormand–Prince 5(4) integrator over complex state vectors.
//!
//! Small and self-contained: the moment equations are a fixed-size linear ODE and
//! need exact stepping onto sample times, dense complex states, and a strict
//! step-collapse diagnostic; a bespoke 150-line RK beats pulling in a general ODE
//! stack for that.

use num_complex::Complex64;

use crate::error::Error;
use crate::Result;

// Dormand–Prince coefficients (FSAL pair, 5th order solution, 4th order embedded).
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

pub(crate) struct StepperOpts {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

/// Integrates dx/dt = rhs(t, x) from t0 through each of `samples` (strictly
/// increasing, all ≥ t0), invoking `on_sample` exactly at each sample time.
pub(crate) fn integrate<F, S>(
    mut rhs: F,
    t0: f64,
    x0: &[Complex64],
    samples: &[f64],
    opts: &StepperOpts,
    mut on_sample: S,
) -> Result<()>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
    S: FnMut(f64, &[Complex64]),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut t = t0;

    let mut k: [Vec<Complex64>; 7] = std::array::from_fn(|_| vec![Complex64::default(); n]);
    let mut xs = vec![Complex64::default(); n];
    let mut x5 = vec![Complex64::default(); n];

    rhs(t, &x, &mut k[0]);

    // Initial step from the usual scale heuristic.
    let span = samples.last().copied().unwrap_or(t0) - t0;
    if span <= 0.0 {
        for &ts in samples {
            on_sample(ts, &x);
        }
        return Ok(());
    }
    let d0 = rms_scaled(&x, &x, opts);
    let d1 = rms_scaled(&k[0], &x, opts);
    let mut h = if d1 > 0.0 {
        (0.01 * d0 / d1).clamp(1e-10 * span, 0.1 * span)
    } else {
        1e-6 * span
    };

    let mut err_prev: f64 = 1.0;
    let mut steps = 0usize;

    for &ts in samples {
        if ts < t - 1e-12 * t.abs().max(1.0) {
            return Err(Error::invalid("samples", "must be increasing and >= t0"));
        }
        while t < ts {
            if steps >= opts.max_steps {
                return Err(Error::NoConvergence {
                    what: "integrate",
                    residual: ts - t,
                    iterations: steps,
                });
            }
            let h_try = h.min(ts - t);
            if h_try < 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepCollapse { t, dt: h_try });
            }

            // FSAL: k[0] already holds rhs(t, x).
            for stage in 1..7 {
                for i in 0..n {
                    let mut acc = Complex64::default();
                    for (j, kj) in k.iter().enumerate().take(stage) {
                        let a = A[stage - 1][j];
                        if a != 0.0 {
                            acc += a * kj[i];
                        }
                    }
                    xs[i] = x[i] + h_try * acc;
                }
                let t_stage = t + h_try * [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0][stage - 1];
                rhs(t_stage, &xs, &mut k[stage]);
            }

            // 5th-order solution is the last stage's argument (A row 6 == b5).
            x5.copy_from_slice(&xs);
            // Embedded 4th-order error.
            let mut err_sq = 0.0;
            for i in 0..n {
                let mut acc4 = Complex64::default();
                for (j, kj) in k.iter().enumerate() {
                    if B4[j] != 0.0 {
                        acc4 += B4[j] * kj[i];
                    }
                }
                let x4 = x[i] + h_try * acc4;
                let e = x5[i] - x4;
                let sc = opts.atol + opts.rtol * x[i].norm().max(x5[i].norm());
                err_sq += (e.norm() / sc).powi(2);
            }
            let err = (err_sq / n as f64).sqrt();
            steps += 1;

            if err <= 1.0 {
                t += h_try;
                x.copy_from_slice(&x5);
                let (head, tail) = k.split_at_mut(6);
                head[0].copy_from_slice(&tail[0]); // FSAL reuse
                let e = err.max(1e-10);
                let fac = 0.9 * e.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
                h = h_try * fac.clamp(0.2, 5.0);
                err_prev = e;
            } else {
                h = h_try * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            }
        }
        on_sample(ts, &x);
    }
    Ok(())
}

fn rms_scaled(v: &[Complex64], x: &[Complex64], opts: &StepperOpts) -> f64 {
    let n = v.len().max(1);
    let s: f64 = v
        .iter()
        .zip(x)
        .map(|(vi, xi)| (vi.norm() / (opts.atol + opts.rtol * xi.norm())).powi(2))
        .sum();
    (s / n as f64).sqrt()
}
