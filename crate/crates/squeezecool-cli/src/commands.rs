//! Implementations of the data-producing subcommands.
//!
//! Every command reads its inputs from a [`Settings`] bundle (config file
//! merged with flags), computes through the `squeezecool` library, and
//! returns a [`Table`] carrying the full resolved parameter set in its
//! metadata header.

use num_complex::Complex64;
use rayon::prelude::*;

use squeezecool::limits::{analytic_limit, ground_state_boundary, scheme_min, GroundStateBoundary};
use squeezecool::moments::{evolve, steady_state, IntegratorSettings, MomentState};
use squeezecool::noise::{
    backaction_spectrum, optimal_eps, sd_optimal_squeeze, weak_coupling_report,
    weak_coupling_report_squeezed,
};
use squeezecool::params::{ReducedParams, SchemeConfig, SchemeKind};
use squeezecool::spectrum::{intracavity_quadrature_spectrum, output_quadrature_spectrum};
use squeezecool::three_mode::{classical_steady_state, full_occupancy, reduce, ThreeModeParams};
use squeezecool::Error;

use crate::config::{GridAxis, Settings};
use crate::table::{Cell, Failure, Meta, Table};

/// Parameter keys shared by the single-cavity commands.
pub const POINT_KEYS: &[&str] = &[
    "delta",
    "kappa",
    "kappa_0",
    "g",
    "n_th",
    "q_m",
    "eps_re",
    "eps_im",
    "scheme",
    "squeeze_r",
    "squeeze_phi",
];

/// Keys sweepable by the `sweep` command.
pub const SWEEP_AXES: &[&str] = &[
    "delta",
    "kappa",
    "kappa_0",
    "g",
    "n_th",
    "q_m",
    "eps_re",
    "eps_im",
    "squeeze_r",
    "squeeze_phi",
];

fn meta(command: &str, st: &Settings, grids: Vec<GridAxis>) -> Meta {
    Meta {
        command: command.to_string(),
        params: st.resolved_params(),
        grids,
    }
}

/// Read the six base cavity/mechanics parameters. The CLI takes the *total*
/// linewidth `kappa` plus the intrinsic part `kappa_0`; the external coupling
/// is their difference.
fn base_params(st: &Settings) -> Result<ReducedParams, Failure> {
    let delta = st.f64_req("delta")?;
    let kappa = st.f64_req("kappa")?;
    let kappa_0 = st.f64_or("kappa_0", 0.0)?;
    let g = st.f64_or("g", 0.0)?;
    let n_th = st.f64_req("n_th")?;
    let q_m = st.f64_req("q_m")?;
    Ok(ReducedParams::new(
        delta,
        kappa - kappa_0,
        kappa_0,
        g,
        n_th,
        q_m,
    )?)
}

/// Resolve the χ⁽²⁾ pump for a parameter set: explicit `eps_re`/`eps_im`
/// keys win; otherwise `auto` selects the heating-cancelling pump.
fn resolve_eps(st: &Settings, p: &ReducedParams, auto: bool) -> Result<Complex64, Failure> {
    let re = st.f64_opt("eps_re")?;
    let im = st.f64_opt("eps_im")?;
    if auto && re.is_none() && im.is_none() {
        let eps = optimal_eps(p);
        st.note_auto("eps_re", Settings::canon_f64(eps.re));
        st.note_auto("eps_im", Settings::canon_f64(eps.im));
        return Ok(eps);
    }
    Ok(Complex64::new(re.unwrap_or(0.0), im.unwrap_or(0.0)))
}

/// Attach the drive scheme: parse the `scheme` key, resolve the pump or the
/// input squeezing, and cross-validate.
fn attach_scheme(st: &Settings, p: ReducedParams) -> Result<(ReducedParams, SchemeConfig), Failure> {
    let kind: SchemeKind = st.str_or("scheme", "is")?.parse()?;
    match kind {
        SchemeKind::Sb => {
            let p = p.with_eps(resolve_eps(st, &p, false)?);
            let cfg = SchemeConfig::sideband();
            cfg.validate_with(&p)?;
            Ok((p, cfg))
        }
        SchemeKind::Is => {
            let eps = resolve_eps(st, &p, true)?;
            let p = p.with_eps(eps);
            let cfg = SchemeConfig::intracavity();
            cfg.validate_with(&p)?;
            Ok((p, cfg))
        }
        SchemeKind::Sd => {
            let p = p.with_eps(resolve_eps(st, &p, false)?);
            let (r, phi) = match st.f64_opt("squeeze_r")? {
                Some(r) => (r, st.f64_or("squeeze_phi", 0.0)?),
                None => {
                    let (r, phi) = sd_optimal_squeeze(&p)?;
                    st.note_auto("squeeze_r", Settings::canon_f64(r));
                    st.note_auto("squeeze_phi", Settings::canon_f64(phi));
                    (r, phi)
                }
            };
            let cfg = SchemeConfig::squeezed_drive(r, phi);
            cfg.validate_with(&p)?;
            Ok((p, cfg))
        }
    }
}

/// Default frequency axis for spectra: linear, wide enough for both the
/// mechanical sidebands and the cavity line.
fn default_omega_axis(p: &ReducedParams) -> GridAxis {
    let w = 1.5 * p.kappa.max(4.0 * p.omega_m);
    GridAxis::linear("omega", -w, w, 2001)
}

/// `spectrum`: backaction force spectrum S_FF(ω) of the selected scheme.
pub fn spectrum(st: &Settings) -> Result<Table, Failure> {
    let (p, cfg) = attach_scheme(st, base_params(st)?)?;
    let axis = st
        .grid("omega")
        .cloned()
        .unwrap_or_else(|| default_omega_axis(&p));
    let mut table = Table::new(meta("spectrum", st, vec![axis.clone()]), &["omega", "s_ff"]);
    for w in axis.values() {
        let s = backaction_spectrum(w, &p, &cfg)?;
        table.push_row(vec![Cell::Num(w), Cell::Num(s)]);
    }
    Ok(table)
}

/// `cool`: time-domain relaxation of the mechanical and optical occupancies
/// from a thermal start.
pub fn cool(st: &Settings) -> Result<Table, Failure> {
    let (p, cfg) = attach_scheme(st, base_params(st)?)?;
    let t_max = st.f64_or("t_max", 1000.0)?;
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Failure::config("t_max", "must be > 0"));
    }
    let samples = st.usize_or("samples", 201)?;
    if samples < 2 {
        return Err(Failure::config("samples", "need at least 2 samples"));
    }
    let n0 = st.f64_or("n0", p.n_th)?;
    let settings = IntegratorSettings {
        rtol: st.f64_or("rtol", 1e-9)?,
        atol: st.f64_or("atol", 1e-12)?,
        ..IntegratorSettings::default()
    };
    let times: Vec<f64> = (0..samples)
        .map(|i| t_max * i as f64 / (samples - 1) as f64)
        .collect();
    let x0 = MomentState::thermal(n0);
    let traj = evolve(&x0, &p, &cfg, &times, &settings)?;
    let mut table = Table::new(
        meta("cool", st, Vec::new()),
        &["t", "n_mech", "n_cav"],
    );
    for (t, state) in traj.times.iter().zip(traj.states.iter()) {
        table.push_row(vec![
            Cell::Num(*t),
            Cell::Num(state.nbb),
            Cell::Num(state.naa),
        ]);
    }
    Ok(table)
}

/// `limits`: with a `kappa` axis, the per-scheme minimum occupancy table;
/// otherwise the full analytic cooling report at one (Δ, G) point.
pub fn limits(st: &Settings) -> Result<Table, Failure> {
    if let Some(axis) = st.grid("kappa").cloned() {
        return limits_grid(st, axis);
    }
    // A single-point cooling report needs an actual coupling; defaulting to
    // g = 0 would just report an infinite weak-coupling limit.
    if !st.has("g") {
        return Err(Failure::config("g", "missing required parameter `g`"));
    }
    let p = base_params(st)?;
    let report = analytic_limit(&p)?;
    let mut table = Table::new(
        meta("limits", st, Vec::new()),
        &[
            "delta",
            "g",
            "n_f_wk",
            "n_f_st",
            "n_f",
            "gamma_opt",
            "gamma_1",
            "gamma_opt_prime",
            "cooperativity",
            "stable",
        ],
    );
    table.push_row(vec![
        Cell::Num(p.delta),
        Cell::Num(p.g),
        Cell::Num(report.n_f_wk),
        Cell::Num(report.n_f_st),
        Cell::Num(report.n_f),
        Cell::Num(report.gamma_opt),
        Cell::Num(report.gamma_1),
        Cell::Num(report.gamma_opt_prime),
        Cell::Num(report.cooperativity),
        Cell::Text(if report.stable.stable_eig { "true" } else { "false" }.into()),
    ]);
    Ok(table)
}

fn limits_grid(st: &Settings, axis: GridAxis) -> Result<Table, Failure> {
    let n_th = st.f64_req("n_th")?;
    let q_m = st.f64_req("q_m")?;
    let scheme = st.str_or("scheme", "all")?;
    let kinds: Vec<SchemeKind> = if scheme == "all" {
        vec![SchemeKind::Sb, SchemeKind::Sd, SchemeKind::Is]
    } else {
        vec![scheme.parse()?]
    };
    let mut columns: Vec<String> = vec!["kappa".into(), "kappa_ratio".into()];
    for kind in &kinds {
        columns.push(format!("n_{kind}"));
        columns.push(format!("g_opt_{kind}"));
    }
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut table = Table::new(meta("limits", st, vec![axis.clone()]), &column_refs);
    for kappa in axis.values() {
        let mut row = vec![Cell::Num(kappa), Cell::Num(kappa / 4.0)];
        for kind in &kinds {
            let min = scheme_min(*kind, kappa, n_th, q_m)?;
            row.push(Cell::Num(min.n_min));
            row.push(Cell::Num(min.g_opt));
        }
        table.push_row(row);
    }
    Ok(table)
}

/// `regions`: ground-state boundary κ/(4ω_m) of each scheme versus the bath
/// occupancy, from the closed forms.
pub fn regions(st: &Settings) -> Result<Table, Failure> {
    let q_m = st.f64_or("q_m", 1.0e5)?;
    let axis = st
        .grid("n_th")
        .cloned()
        .unwrap_or_else(|| GridAxis::logarithmic("n_th", 10.0, 1.0e5, 121));
    let mut table = Table::new(
        meta("regions", st, vec![axis.clone()]),
        &["n_th", "sb_kappa_ratio", "sd_kappa_ratio", "is_achievable"],
    );
    for n_th in axis.values() {
        let cell = |kind| -> Result<Cell, Failure> {
            Ok(match ground_state_boundary(kind, n_th, q_m)? {
                GroundStateBoundary::KappaRatio(x) => Cell::Num(x),
                GroundStateBoundary::KappaIndependent { achievable } => {
                    Cell::Num(if achievable { 1.0 } else { 0.0 })
                }
            })
        };
        table.push_row(vec![
            Cell::Num(n_th),
            cell(SchemeKind::Sb)?,
            cell(SchemeKind::Sd)?,
            cell(SchemeKind::Is)?,
        ]);
    }
    Ok(table)
}

/// Outcome of one sweep point.
enum PointOutcome {
    Ok { n_mech: f64, n_cav: f64, gamma_opt: f64 },
    Unstable,
    Error,
}

/// `sweep`: steady-state occupancy over a 1- or 2-axis parameter grid.
/// Unstable or otherwise failing points stay in the output as rows with a
/// non-`ok` status, so the row count always equals the grid cardinality.
pub fn sweep(st: &Settings) -> Result<Table, Failure> {
    let axes: Vec<GridAxis> = st.grids().to_vec();
    if axes.is_empty() || axes.len() > 2 {
        return Err(Failure::config(
            "grid",
            format!("sweep needs 1 or 2 axes, got {}", axes.len()),
        ));
    }
    let swept = |key: &str| axes.iter().any(|a| a.name == key);

    // Base values for everything not swept. Swept keys take their value from
    // the axis at each point; a base value is then neither needed nor read.
    let mut base = std::collections::BTreeMap::<&'static str, f64>::new();
    for (key, default) in [
        ("delta", None),
        ("kappa", None),
        ("kappa_0", Some(0.0)),
        ("g", Some(0.0)),
        ("n_th", None),
        ("q_m", None),
    ] {
        if swept(key) {
            continue;
        }
        let v = match default {
            Some(d) => st.f64_or(key, d)?,
            None => st.f64_req(key)?,
        };
        base.insert(key, v);
    }
    let kind: SchemeKind = st.str_or("scheme", "is")?.parse()?;
    let eps_given =
        st.has("eps_re") || st.has("eps_im") || swept("eps_re") || swept("eps_im");
    let eps_base = Complex64::new(
        if swept("eps_re") { 0.0 } else { st.f64_opt("eps_re")?.unwrap_or(0.0) },
        if swept("eps_im") { 0.0 } else { st.f64_opt("eps_im")?.unwrap_or(0.0) },
    );
    let squeeze_given = st.has("squeeze_r") || swept("squeeze_r") || swept("squeeze_phi");
    let squeeze_base = (
        if swept("squeeze_r") { 0.0 } else { st.f64_opt("squeeze_r")?.unwrap_or(0.0) },
        if swept("squeeze_phi") { 0.0 } else { st.f64_opt("squeeze_phi")?.unwrap_or(0.0) },
    );

    let values: Vec<Vec<f64>> = axes.iter().map(GridAxis::values).collect();
    let index_pairs: Vec<(usize, usize)> = if axes.len() == 2 {
        (0..values[0].len())
            .flat_map(|i| (0..values[1].len()).map(move |j| (i, j)))
            .collect()
    } else {
        (0..values[0].len()).map(|i| (i, 0)).collect()
    };

    let eval_point = |pair: &(usize, usize)| -> (f64, f64, PointOutcome) {
        let (i, j) = *pair;
        let get = |key: &str, fallback: f64| -> f64 {
            if axes[0].name == key {
                values[0][i]
            } else if axes.len() == 2 && axes[1].name == key {
                values[1][j]
            } else {
                base.get(key).copied().unwrap_or(fallback)
            }
        };
        let delta = get("delta", f64::NAN);
        let kappa = get("kappa", f64::NAN);
        let kappa_0 = get("kappa_0", 0.0);
        let g = get("g", 0.0);
        let n_th = get("n_th", f64::NAN);
        let q_m = get("q_m", f64::NAN);
        let eps = Complex64::new(
            get("eps_re", eps_base.re),
            get("eps_im", eps_base.im),
        );
        let squeeze = (
            get("squeeze_r", squeeze_base.0),
            get("squeeze_phi", squeeze_base.1),
        );
        let v1 = values[0][i];
        let v2 = if axes.len() == 2 { values[1][j] } else { f64::NAN };
        let outcome = sweep_point(
            kind, delta, kappa, kappa_0, g, n_th, q_m, eps, eps_given, squeeze, squeeze_given,
        );
        (v1, v2, outcome)
    };

    let results: Vec<(f64, f64, PointOutcome)> =
        index_pairs.par_iter().map(eval_point).collect();

    let mut columns: Vec<&str> = vec![axes[0].name.as_str()];
    if axes.len() == 2 {
        columns.push(axes[1].name.as_str());
    }
    columns.extend(["status", "n_mech", "n_cav", "gamma_opt"]);
    let mut table = Table::new(meta("sweep", st, axes.clone()), &columns);
    for (v1, v2, outcome) in results {
        let mut row = vec![Cell::Num(v1)];
        if axes.len() == 2 {
            row.push(Cell::Num(v2));
        }
        match outcome {
            PointOutcome::Ok {
                n_mech,
                n_cav,
                gamma_opt,
            } => row.extend([
                Cell::Text("ok".into()),
                Cell::Num(n_mech),
                Cell::Num(n_cav),
                Cell::Num(gamma_opt),
            ]),
            PointOutcome::Unstable => row.extend([
                Cell::Text("unstable".into()),
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
            ]),
            PointOutcome::Error => row.extend([
                Cell::Text("error".into()),
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
            ]),
        }
        table.push_row(row);
    }
    Ok(table)
}

#[allow(clippy::too_many_arguments)]
fn sweep_point(
    kind: SchemeKind,
    delta: f64,
    kappa: f64,
    kappa_0: f64,
    g: f64,
    n_th: f64,
    q_m: f64,
    eps: Complex64,
    eps_given: bool,
    squeeze: (f64, f64),
    squeeze_given: bool,
) -> PointOutcome {
    let run = || -> Result<(f64, f64, f64), Error> {
        let p = ReducedParams::new(delta, kappa - kappa_0, kappa_0, g, n_th, q_m)?;
        let (p, cfg) = match kind {
            SchemeKind::Sb => (p.with_eps(eps), SchemeConfig::sideband()),
            SchemeKind::Is => {
                let e = if eps_given { eps } else { optimal_eps(&p) };
                (p.with_eps(e), SchemeConfig::intracavity())
            }
            SchemeKind::Sd => {
                let (r, phi) = if squeeze_given {
                    squeeze
                } else {
                    sd_optimal_squeeze(&p)?
                };
                (p.with_eps(eps), SchemeConfig::squeezed_drive(r, phi))
            }
        };
        cfg.validate_with(&p)?;
        let ss = steady_state(&p, &cfg)?;
        let report = match cfg.kind {
            SchemeKind::Sd => weak_coupling_report_squeezed(&p, &cfg)?,
            _ => weak_coupling_report(&p)?,
        };
        Ok((ss.nbb, ss.naa, report.gamma_opt))
    };
    match run() {
        Ok((n_mech, n_cav, gamma_opt)) => PointOutcome::Ok {
            n_mech,
            n_cav,
            gamma_opt,
        },
        Err(Error::Unstable { .. }) => PointOutcome::Unstable,
        Err(_) => PointOutcome::Error,
    }
}

/// Keys accepted by `reduce3`.
pub const THREE_MODE_KEYS: &[&str] = &[
    "delta_1",
    "delta_2",
    "nu_re",
    "nu_im",
    "g_1",
    "g_2",
    "kappa_1",
    "kappa_2",
    "eps_1_re",
    "eps_1_im",
    "eps_2_re",
    "eps_2_im",
    "omega_m",
    "gamma",
    "n_th",
];

/// `reduce3`: adiabatic elimination of the second-harmonic mode. Emits one
/// row with the mean-field point, the effective single-mode parameters, the
/// elimination audit, and the full-model vs reduced-model occupancies.
pub fn reduce3(st: &Settings) -> Result<Table, Failure> {
    let p3 = ThreeModeParams {
        delta_1: st.f64_req("delta_1")?,
        delta_2: st.f64_req("delta_2")?,
        nu: Complex64::new(st.f64_or("nu_re", 0.0)?, st.f64_or("nu_im", 0.0)?),
        g_1: st.f64_or("g_1", 0.0)?,
        g_2: st.f64_or("g_2", 0.0)?,
        kappa_1: st.f64_req("kappa_1")?,
        kappa_2: st.f64_req("kappa_2")?,
        eps_1: Complex64::new(st.f64_or("eps_1_re", 0.0)?, st.f64_or("eps_1_im", 0.0)?),
        eps_2: Complex64::new(st.f64_or("eps_2_re", 0.0)?, st.f64_or("eps_2_im", 0.0)?),
        omega_m: st.f64_or("omega_m", 1.0)?,
        gamma: st.f64_req("gamma")?,
        n_th: st.f64_req("n_th")?,
    };
    let ss = classical_steady_state(&p3)?;
    let (rp, em) = reduce(&p3)?;
    let full = full_occupancy(&p3);
    let reduced = steady_state(&rp, &SchemeConfig::intracavity());

    let (status, n_full, n_fund, n_second) = match &full {
        Ok(occ) => (
            "ok",
            Cell::Num(occ.n_mech),
            Cell::Num(occ.n_fund),
            Cell::Num(occ.n_second),
        ),
        Err(Error::Unstable { .. }) => ("unstable", Cell::Empty, Cell::Empty, Cell::Empty),
        Err(_) => ("error", Cell::Empty, Cell::Empty, Cell::Empty),
    };
    let n_reduced = match &reduced {
        Ok(state) => Cell::Num(state.nbb),
        Err(_) => Cell::Empty,
    };

    let mut table = Table::new(
        meta("reduce3", st, Vec::new()),
        &[
            "status",
            "alpha_1_re",
            "alpha_1_im",
            "alpha_2_re",
            "alpha_2_im",
            "beta_re",
            "beta_im",
            "residual",
            "delta_eff",
            "kappa_eff",
            "g_eff_re",
            "g_eff_im",
            "eps_eff_re",
            "eps_eff_im",
            "n_add_rate",
            "n_f_add",
            "margin_backaction",
            "margin_nonlinear",
            "valid",
            "n_mech_full",
            "n_fund_full",
            "n_second_full",
            "n_mech_reduced",
        ],
    );
    table.push_row(vec![
        Cell::Text(status.into()),
        Cell::Num(ss.alpha_1.re),
        Cell::Num(ss.alpha_1.im),
        Cell::Num(ss.alpha_2.re),
        Cell::Num(ss.alpha_2.im),
        Cell::Num(ss.beta.re),
        Cell::Num(ss.beta.im),
        Cell::Num(ss.residual),
        Cell::Num(em.delta_eff),
        Cell::Num(em.kappa_eff),
        Cell::Num(em.g_eff.re),
        Cell::Num(em.g_eff.im),
        Cell::Num(em.eps_eff.re),
        Cell::Num(em.eps_eff.im),
        Cell::Num(em.n_add_rate),
        Cell::Num(em.n_f_add),
        Cell::Num(em.margin_backaction),
        Cell::Num(em.margin_nonlinear),
        Cell::Num(if em.valid { 1.0 } else { 0.0 }),
        n_full,
        n_fund,
        n_second,
        n_reduced,
    ]);
    Ok(table)
}

/// Keys accepted by `squeeze`.
pub const SQUEEZE_KEYS: &[&str] = &[
    "delta", "kappa", "kappa_0", "g", "n_th", "q_m", "eps_re", "eps_im", "theta", "port",
];

/// `squeeze`: quadrature noise spectrum of the emitted (or intracavity)
/// field of the pumped cavity, with the per-frequency optimal angle and the
/// squeezing magnitude.
pub fn squeeze(st: &Settings) -> Result<Table, Failure> {
    let p = base_params(st)?;
    let p = p.with_eps(resolve_eps(st, &p, true)?);
    let theta = st.f64_or("theta", 0.0)?;
    let port = st.str_or("port", "output")?;
    let axis = st
        .grid("omega")
        .cloned()
        .unwrap_or_else(|| default_omega_axis(&p));
    let grid = axis.values();
    let qs = match port.as_str() {
        "output" => output_quadrature_spectrum(&p, theta, &grid)?,
        "intracavity" => intracavity_quadrature_spectrum(&p, theta, &grid)?,
        other => {
            return Err(Failure::config(
                "port",
                format!("expected `output` or `intracavity`, got `{other}`"),
            ))
        }
    };
    let mut table = Table::new(
        meta("squeeze", st, vec![axis.clone()]),
        &["omega", "s_xx", "theta_opt", "r_mag"],
    );
    for k in 0..qs.omega.len() {
        table.push_row(vec![
            Cell::Num(qs.omega[k]),
            Cell::Num(qs.s_xx[k]),
            Cell::Num(qs.theta_opt[k]),
            Cell::Num(qs.r_mag[k]),
        ]);
    }
    Ok(table)
}
