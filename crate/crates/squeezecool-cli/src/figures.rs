//! Named figure datasets: fixed parameter bindings, the exact data series,
//! and a JSON manifest describing every column's meaning and units.

use rayon::prelude::*;
use serde_json::json;

use squeezecool::limits::{analytic_limit, ground_state_boundary, numeric_optimum, scheme_min, GroundStateBoundary};
use squeezecool::moments::steady_state;
use squeezecool::noise::{
    backaction_spectrum, optimal_eps, sd_optimal_squeeze, weak_coupling_report,
    weak_coupling_report_squeezed,
};
use squeezecool::params::{ReducedParams, SchemeConfig, SchemeKind};
use squeezecool::Error;

use crate::config::GridAxis;
use crate::table::{Cell, Failure, Meta, Table};

/// The reproducible figure datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FigureId {
    /// Normalized backaction spectra of the three schemes.
    #[value(name = "fig2a")]
    Fig2a,
    /// Normalized weak-coupling cooling rate versus sideband resolution.
    #[value(name = "fig2b")]
    Fig2b,
    /// Weak-coupling occupancy over the (Δ, G) plane.
    #[value(name = "fig3a")]
    Fig3a,
    /// Strong-coupling occupancy over the (Δ, G) plane.
    #[value(name = "fig3b")]
    Fig3b,
    /// Total occupancy over the (Δ, G) plane with the stability boundary.
    #[value(name = "fig3c")]
    Fig3c,
    /// Occupancy versus coupling on a fixed-detuning cut, analytic vs exact.
    #[value(name = "fig3d")]
    Fig3d,
    /// Ground-state boundary versus bath occupancy, closed form vs scan.
    #[value(name = "fig4a")]
    Fig4a,
    /// Minimum occupancy versus linewidth: analytic curves plus numerical markers.
    #[value(name = "fig4b")]
    Fig4b,
}

impl FigureId {
    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig2a => "fig2a",
            FigureId::Fig2b => "fig2b",
            FigureId::Fig3a => "fig3a",
            FigureId::Fig3b => "fig3b",
            FigureId::Fig3c => "fig3c",
            FigureId::Fig3d => "fig3d",
            FigureId::Fig4a => "fig4a",
            FigureId::Fig4b => "fig4b",
        }
    }

    fn default_density(self) -> usize {
        match self {
            FigureId::Fig2a => 1201,
            FigureId::Fig2b => 121,
            FigureId::Fig3a | FigureId::Fig3b | FigureId::Fig3c => 64,
            FigureId::Fig3d => 121,
            FigureId::Fig4a => 121,
            FigureId::Fig4b => 61,
        }
    }
}

/// Column semantics for the manifest.
struct ColumnSpec {
    name: &'static str,
    description: &'static str,
    units: &'static str,
}

/// A figure's data table plus its rendered manifest document.
pub struct FigureOutput {
    pub table: Table,
    pub manifest: String,
}

fn params_to_pairs(params: &[(&str, String)]) -> Vec<(String, String)> {
    let mut pairs: Vec<(String, String)> = params
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect();
    pairs.sort();
    pairs
}

fn build_manifest(
    id: FigureId,
    density: usize,
    params: &[(String, String)],
    grids: &[GridAxis],
    columns: &[ColumnSpec],
) -> String {
    let mut col_map = serde_json::Map::new();
    for c in columns {
        col_map.insert(
            c.name.to_string(),
            json!({ "description": c.description, "units": c.units }),
        );
    }
    let mut param_map = serde_json::Map::new();
    for (k, v) in params {
        param_map.insert(k.clone(), serde_json::Value::String(v.clone()));
    }
    let grid_list: Vec<serde_json::Value> = grids
        .iter()
        .map(|a| {
            json!({
                "count": a.count,
                "max": a.max,
                "min": a.min,
                "name": a.name,
                "spacing": if a.log { "log" } else { "lin" },
            })
        })
        .collect();
    let doc = json!({
        "columns": col_map,
        "figure": id.name(),
        "grid_density": density,
        "grids": grid_list,
        "parameters": param_map,
        "tool": Meta::tool(),
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("manifest serialization");
    text.push('\n');
    text
}

fn assemble(
    id: FigureId,
    density: usize,
    params: Vec<(&str, String)>,
    grids: Vec<GridAxis>,
    columns: Vec<ColumnSpec>,
    rows: Vec<Vec<Cell>>,
) -> FigureOutput {
    let pairs = params_to_pairs(&params);
    let manifest = build_manifest(id, density, &pairs, &grids, &columns);
    let names: Vec<&str> = columns.iter().map(|c| c.name).collect();
    let mut table = Table::new(
        Meta {
            command: format!("figure {}", id.name()),
            params: pairs,
            grids,
        },
        &names,
    );
    for row in rows {
        table.push_row(row);
    }
    FigureOutput { table, manifest }
}

/// Build a figure dataset at the given grid density (default when `None`).
pub fn figure(id: FigureId, density: Option<usize>) -> Result<FigureOutput, Failure> {
    let density = density.unwrap_or_else(|| id.default_density());
    if density < 2 {
        return Err(Failure::config("density", "need at least 2 grid points"));
    }
    match id {
        FigureId::Fig2a => fig2a(density),
        FigureId::Fig2b => fig2b(density),
        FigureId::Fig3a | FigureId::Fig3b | FigureId::Fig3c => fig3_map(id, density),
        FigureId::Fig3d => fig3d(density),
        FigureId::Fig4a => fig4a(density),
        FigureId::Fig4b => fig4b(density),
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

/// Backaction spectra of the three schemes at matched resolved-sideband
/// parameters, normalized by the resonant golden-rule rate 4G²/κ.
fn fig2a(density: usize) -> Result<FigureOutput, Failure> {
    let (kappa, g, n_th, q_m) = (4.0_f64, 0.01, 1.0e3, 1.0e5);
    let delta = -(kappa * kappa / 4.0 + 1.0).sqrt();
    let p = ReducedParams::new(delta, kappa, 0.0, g, n_th, q_m)?;
    let (r, phi) = sd_optimal_squeeze(&p)?;
    let sd = SchemeConfig::squeezed_drive(r, phi);
    let p_is = p.with_eps(optimal_eps(&p));
    let norm = 4.0 * g * g / kappa;
    let axis = GridAxis::linear("omega", -3.0, 3.0, density);
    let mut rows = Vec::with_capacity(density);
    for w in axis.values() {
        rows.push(vec![
            Cell::Num(w),
            Cell::Num(backaction_spectrum(w, &p, &SchemeConfig::sideband())? / norm),
            Cell::Num(backaction_spectrum(w, &p, &sd)? / norm),
            Cell::Num(backaction_spectrum(w, &p_is, &SchemeConfig::intracavity())? / norm),
        ]);
    }
    Ok(assemble(
        FigureId::Fig2a,
        density,
        vec![
            ("delta", num(delta)),
            ("eps", "auto (heating-cancelling pump, IS column)".into()),
            ("g", num(g)),
            ("kappa", num(kappa)),
            ("n_th", num(n_th)),
            ("normalization", "4 g^2 / kappa".into()),
            ("q_m", num(q_m)),
            ("squeeze", format!("auto (R = {r}, phi = {phi}, SD column)")),
        ],
        vec![axis],
        vec![
            ColumnSpec { name: "omega", description: "spectrum frequency", units: "omega_m" },
            ColumnSpec {
                name: "s_sb",
                description: "backaction force spectrum, plain sideband drive, normalized by 4g^2/kappa",
                units: "dimensionless",
            },
            ColumnSpec {
                name: "s_sd",
                description: "backaction force spectrum, squeezed-vacuum drive at its optimal (R, phi), normalized by 4g^2/kappa",
                units: "dimensionless",
            },
            ColumnSpec {
                name: "s_is",
                description: "backaction force spectrum, intracavity-squeezing pump at the heating-cancelling eps; vanishes exactly at omega = -omega_m",
                units: "dimensionless",
            },
        ],
        rows,
    ))
}

/// Weak-coupling cooling rate of each scheme at its own optimal working
/// point, versus the sideband-resolution ratio κ/(4ω_m).
fn fig2b(density: usize) -> Result<FigureOutput, Failure> {
    let (g, n_th, q_m) = (0.01_f64, 1.0e3, 1.0e5);
    let axis = GridAxis::logarithmic("kappa_ratio", 0.1, 100.0, density);
    let mut rows = Vec::with_capacity(density);
    for x in axis.values() {
        let kappa = 4.0 * x;
        let delta = -(kappa * kappa / 4.0 + 1.0).sqrt();
        let p = ReducedParams::new(delta, kappa, 0.0, g, n_th, q_m)?;
        let norm = 4.0 * g * g / kappa;
        let rate_sb = weak_coupling_report(&p)?.gamma_opt / norm;
        let (r, phi) = sd_optimal_squeeze(&p)?;
        let rate_sd = weak_coupling_report_squeezed(&p, &SchemeConfig::squeezed_drive(r, phi))?
            .gamma_opt
            / norm;
        let p_is = p.with_eps(optimal_eps(&p));
        let rate_is = weak_coupling_report(&p_is)?.gamma_opt / norm;
        rows.push(vec![
            Cell::Num(x),
            Cell::Num(rate_sb),
            Cell::Num(rate_sd),
            Cell::Num(rate_is),
        ]);
    }
    Ok(assemble(
        FigureId::Fig2b,
        density,
        vec![
            ("delta", "-sqrt(kappa^2/4 + omega_m^2)".into()),
            ("g", num(g)),
            ("n_th", num(n_th)),
            ("normalization", "4 g^2 / kappa".into()),
            ("q_m", num(q_m)),
        ],
        vec![axis],
        vec![
            ColumnSpec { name: "kappa_ratio", description: "sideband resolution kappa/(4 omega_m)", units: "dimensionless" },
            ColumnSpec { name: "rate_sb", description: "net cooling rate, plain sideband drive, normalized by 4g^2/kappa", units: "dimensionless" },
            ColumnSpec { name: "rate_sd", description: "net cooling rate, squeezed-vacuum drive at optimal (R, phi), normalized by 4g^2/kappa", units: "dimensionless" },
            ColumnSpec { name: "rate_is", description: "net cooling rate, intracavity squeezing at the heating-cancelling pump, normalized by 4g^2/kappa", units: "dimensionless" },
        ],
        rows,
    ))
}

/// Shared (Δ, G)-plane scan behind the three occupancy maps.
fn fig3_map(id: FigureId, density: usize) -> Result<FigureOutput, Failure> {
    let (kappa, n_th, q_m) = (400.0_f64, 1.0e3, 1.0e5);
    let delta_axis = GridAxis::linear("delta", -400.0, -12.5, density);
    let g_axis = GridAxis::logarithmic("g", 0.05, 12.0, density);
    let deltas = delta_axis.values();
    let gs = g_axis.values();
    let points: Vec<(usize, usize)> = (0..deltas.len())
        .flat_map(|i| (0..gs.len()).map(move |j| (i, j)))
        .collect();
    let reports: Vec<Result<squeezecool::limits::CoolingReport, Error>> = points
        .par_iter()
        .map(|&(i, j)| {
            let p = ReducedParams::new(deltas[i], kappa, 0.0, gs[j], n_th, q_m)?;
            analytic_limit(&p)
        })
        .collect();

    let value_col = match id {
        FigureId::Fig3a => ColumnSpec {
            name: "n_f_wk",
            description: "weak-coupling occupancy contribution gamma n_th / Gamma_opt at the heating-cancelling pump",
            units: "quanta",
        },
        FigureId::Fig3b => ColumnSpec {
            name: "n_f_st",
            description: "strong-coupling occupancy contribution at the heating-cancelling pump",
            units: "quanta",
        },
        _ => ColumnSpec {
            name: "n_f",
            description: "total occupancy limit n_f_wk + n_f_st at the heating-cancelling pump",
            units: "quanta",
        },
    };
    let mut columns = vec![
        ColumnSpec { name: "delta", description: "drive detuning", units: "omega_m" },
        ColumnSpec { name: "g", description: "linearized optomechanical coupling", units: "omega_m" },
        value_col,
    ];
    if id == FigureId::Fig3c {
        columns.push(ColumnSpec {
            name: "g_max",
            description: "stability boundary sqrt(-(2 delta + omega_m) omega_m)/2; the map is unstable above it",
            units: "omega_m",
        });
    }
    columns.push(ColumnSpec {
        name: "status",
        description: "ok, or unstable when (delta, g) lies beyond the stability boundary",
        units: "",
    });

    let mut rows = Vec::with_capacity(points.len());
    for (&(i, j), report) in points.iter().zip(reports.iter()) {
        let mut row = vec![Cell::Num(deltas[i]), Cell::Num(gs[j])];
        let (value, status) = match report {
            Ok(rep) => (
                Cell::Num(match id {
                    FigureId::Fig3a => rep.n_f_wk,
                    FigureId::Fig3b => rep.n_f_st,
                    _ => rep.n_f,
                }),
                "ok",
            ),
            Err(Error::Unstable { .. }) => (Cell::Empty, "unstable"),
            Err(_) => (Cell::Empty, "error"),
        };
        row.push(value);
        if id == FigureId::Fig3c {
            let g_max = (-(2.0 * deltas[i] + 1.0)).max(0.0).sqrt() / 2.0;
            row.push(Cell::Num(g_max));
        }
        row.push(Cell::Text(status.into()));
        rows.push(row);
    }
    Ok(assemble(
        id,
        density,
        vec![
            ("eps", "auto (heating-cancelling pump)".into()),
            ("kappa", num(kappa)),
            ("n_th", num(n_th)),
            ("q_m", num(q_m)),
        ],
        vec![delta_axis, g_axis],
        columns,
        rows,
    ))
}

/// Fixed-detuning cut: the analytic occupancy pieces against the exact
/// steady-state solve, across the full stable range of the coupling.
fn fig3d(density: usize) -> Result<FigureOutput, Failure> {
    let (kappa, n_th, q_m, delta) = (400.0_f64, 1.0e3, 1.0e5, -200.0);
    let g_axis = GridAxis::logarithmic("g", 0.1, 20.0, density);
    let gs = g_axis.values();
    let results: Vec<(Result<squeezecool::limits::CoolingReport, Error>, Result<f64, Error>)> = gs
        .par_iter()
        .map(|&g| {
            // The bindings are fixed constants and the axis is positive, so
            // construction cannot fail.
            let p = ReducedParams::new(delta, kappa, 0.0, g, n_th, q_m)
                .expect("fixed figure bindings are valid");
            let analytic = analytic_limit(&p);
            let p_pumped = p.with_eps(optimal_eps(&p));
            let numeric =
                steady_state(&p_pumped, &SchemeConfig::intracavity()).map(|state| state.nbb);
            (analytic, numeric)
        })
        .collect();
    let mut rows = Vec::with_capacity(density);
    for (g, (analytic, numeric)) in gs.iter().zip(results) {
        let (wk, st_, tot, status) = match &analytic {
            Ok(rep) => (
                Cell::Num(rep.n_f_wk),
                Cell::Num(rep.n_f_st),
                Cell::Num(rep.n_f),
                "ok",
            ),
            Err(Error::Unstable { .. }) => (Cell::Empty, Cell::Empty, Cell::Empty, "unstable"),
            Err(_) => (Cell::Empty, Cell::Empty, Cell::Empty, "error"),
        };
        let numeric_cell = match numeric {
            Ok(n) => Cell::Num(n),
            Err(_) => Cell::Empty,
        };
        rows.push(vec![
            Cell::Num(*g),
            wk,
            st_,
            tot,
            numeric_cell,
            Cell::Text(status.into()),
        ]);
    }
    Ok(assemble(
        FigureId::Fig3d,
        density,
        vec![
            ("delta", num(delta)),
            ("eps", "auto (heating-cancelling pump)".into()),
            ("kappa", num(kappa)),
            ("n_th", num(n_th)),
            ("q_m", num(q_m)),
        ],
        vec![g_axis],
        vec![
            ColumnSpec { name: "g", description: "linearized optomechanical coupling", units: "omega_m" },
            ColumnSpec { name: "n_f_wk", description: "weak-coupling occupancy contribution", units: "quanta" },
            ColumnSpec { name: "n_f_st", description: "strong-coupling occupancy contribution", units: "quanta" },
            ColumnSpec { name: "n_f", description: "total analytic occupancy limit", units: "quanta" },
            ColumnSpec { name: "n_f_numeric", description: "exact steady-state occupancy from the moment equations at the heating-cancelling pump", units: "quanta" },
            ColumnSpec { name: "status", description: "ok, or unstable beyond the stability boundary", units: "" },
        ],
        rows,
    ))
}

/// Bisection of `scheme_min(kind) = 1` in x = κ/(4ω_m), bracketed around the
/// closed-form boundary; the curves are monotone in κ so the root is unique.
fn boundary_scan(kind: SchemeKind, n_th: f64, q_m: f64, x_closed: f64) -> Cell {
    let f = |x: f64| -> Option<f64> {
        scheme_min(kind, 4.0 * x, n_th, q_m)
            .ok()
            .map(|m| m.n_min - 1.0)
    };
    let (mut lo, mut hi) = (x_closed * 0.25, x_closed * 4.0);
    let (flo, fhi) = match (f(lo), f(hi)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Cell::Empty,
    };
    if !(flo < 0.0 && fhi > 0.0) {
        return Cell::Empty;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        match f(mid) {
            Some(v) if v < 0.0 => lo = mid,
            Some(_) => hi = mid,
            None => return Cell::Empty,
        }
    }
    Cell::Num(0.5 * (lo + hi))
}

/// Ground-state boundary of each scheme versus the bath occupancy: the
/// closed forms next to an independent bisection of the occupancy curves.
fn fig4a(density: usize) -> Result<FigureOutput, Failure> {
    let q_m = 1.0e5_f64;
    let axis = GridAxis::logarithmic("n_th", 10.0, 1.0e5, density);
    let mut rows = Vec::with_capacity(density);
    for n_th in axis.values() {
        let sb_closed = match ground_state_boundary(SchemeKind::Sb, n_th, q_m)? {
            GroundStateBoundary::KappaRatio(x) => x,
            GroundStateBoundary::KappaIndependent { .. } => f64::NAN,
        };
        let sd_closed = match ground_state_boundary(SchemeKind::Sd, n_th, q_m)? {
            GroundStateBoundary::KappaRatio(x) => x,
            GroundStateBoundary::KappaIndependent { .. } => f64::NAN,
        };
        let is_achievable = match ground_state_boundary(SchemeKind::Is, n_th, q_m)? {
            GroundStateBoundary::KappaIndependent { achievable } => {
                if achievable {
                    1.0
                } else {
                    0.0
                }
            }
            GroundStateBoundary::KappaRatio(_) => f64::NAN,
        };
        rows.push(vec![
            Cell::Num(n_th),
            Cell::Num(sb_closed),
            boundary_scan(SchemeKind::Sb, n_th, q_m, sb_closed),
            Cell::Num(sd_closed),
            boundary_scan(SchemeKind::Sd, n_th, q_m, sd_closed),
            Cell::Num(is_achievable),
        ]);
    }
    Ok(assemble(
        FigureId::Fig4a,
        density,
        vec![("q_m", num(q_m))],
        vec![axis],
        vec![
            ColumnSpec { name: "n_th", description: "ambient thermal phonon occupancy", units: "quanta" },
            ColumnSpec { name: "sb_closed", description: "largest kappa/(4 omega_m) reaching n_f < 1 with the plain sideband drive, closed form", units: "dimensionless" },
            ColumnSpec { name: "sb_scan", description: "same boundary found by bisecting the occupancy curve", units: "dimensionless" },
            ColumnSpec { name: "sd_closed", description: "largest kappa/(4 omega_m) reaching n_f < 1 with the squeezed-vacuum drive, closed form", units: "dimensionless" },
            ColumnSpec { name: "sd_scan", description: "same boundary found by bisecting the occupancy curve", units: "dimensionless" },
            ColumnSpec { name: "is_achievable", description: "1 when intracavity squeezing reaches n_f < 1 (kappa-independent: n_th/q_m < 1/4), else 0", units: "boolean" },
        ],
        rows,
    ))
}

/// Minimum occupancy of each scheme versus linewidth: closed-form curves at
/// every grid point, exact numerical optima at sparse marker points.
fn fig4b(density: usize) -> Result<FigureOutput, Failure> {
    let (n_th, q_m) = (1.0e3_f64, 1.0e5);
    let axis = GridAxis::logarithmic("kappa", 4.0, 4000.0, density);
    let kappas = axis.values();
    let stride = ((density - 1) / 6).max(1);
    let marker_idx: Vec<usize> = (0..density)
        .filter(|i| i % stride == 0 || *i == density - 1)
        .collect();

    // Exact optima are expensive; evaluate only the sparse marker set, in
    // parallel. The squeezed-drive marker re-solves the closed form's own
    // operating point (detuning -kappa/2, the optimizing g, the optimal
    // squeezing) through the exact steady state: an unconstrained numerical
    // search instead drifts to a reservoir-engineering corner of the search
    // domain near delta = -omega_m/2 and would not validate the curve.
    let markers: Vec<(usize, Cell, Cell, Cell)> = marker_idx
        .par_iter()
        .map(|&i| {
            let kappa = kappas[i];
            let sb = numeric_optimum(kappa, n_th, q_m, SchemeKind::Sb)
                .map(|o| Cell::Num(o.n_f))
                .unwrap_or(Cell::Empty);
            let is = numeric_optimum(kappa, n_th, q_m, SchemeKind::Is)
                .map(|o| Cell::Num(o.n_f))
                .unwrap_or(Cell::Empty);
            let sd = (|| -> Result<Cell, Error> {
                let g = scheme_min(SchemeKind::Sd, kappa, n_th, q_m)?.g_opt;
                let p = ReducedParams::new(-kappa / 2.0, kappa, 0.0, g, n_th, q_m)?;
                let (r, phi) = sd_optimal_squeeze(&p)?;
                let state = steady_state(&p, &SchemeConfig::squeezed_drive(r, phi))?;
                Ok(Cell::Num(state.nbb))
            })()
            .unwrap_or(Cell::Empty);
            (i, sb, sd, is)
        })
        .collect();

    let mut rows = Vec::with_capacity(density);
    for (i, kappa) in kappas.iter().enumerate() {
        let curve_sb = scheme_min(SchemeKind::Sb, *kappa, n_th, q_m)?.n_min;
        let curve_sd = scheme_min(SchemeKind::Sd, *kappa, n_th, q_m)?.n_min;
        let curve_is = scheme_min(SchemeKind::Is, *kappa, n_th, q_m)?.n_min;
        let (m_sb, m_sd, m_is) = markers
            .iter()
            .find(|(j, _, _, _)| *j == i)
            .map(|(_, a, b, c)| (a.clone(), b.clone(), c.clone()))
            .unwrap_or((Cell::Empty, Cell::Empty, Cell::Empty));
        rows.push(vec![
            Cell::Num(*kappa),
            Cell::Num(kappa / 4.0),
            Cell::Num(curve_sb),
            Cell::Num(curve_sd),
            Cell::Num(curve_is),
            m_sb,
            m_sd,
            m_is,
        ]);
    }
    Ok(assemble(
        FigureId::Fig4b,
        density,
        vec![("n_th", num(n_th)), ("q_m", num(q_m))],
        vec![axis],
        vec![
            ColumnSpec { name: "kappa", description: "total cavity linewidth", units: "omega_m" },
            ColumnSpec { name: "kappa_ratio", description: "sideband resolution kappa/(4 omega_m)", units: "dimensionless" },
            ColumnSpec { name: "curve_sb", description: "closed-form minimum occupancy, plain sideband drive", units: "quanta" },
            ColumnSpec { name: "curve_sd", description: "closed-form minimum occupancy, squeezed-vacuum drive", units: "quanta" },
            ColumnSpec { name: "curve_is", description: "closed-form minimum occupancy, intracavity squeezing (kappa-independent)", units: "quanta" },
            ColumnSpec { name: "marker_sb", description: "exact optimum from the full numerical search (sparse marker rows only)", units: "quanta" },
            ColumnSpec { name: "marker_sd", description: "exact steady-state occupancy at the closed form's operating point (sparse marker rows only)", units: "quanta" },
            ColumnSpec { name: "marker_is", description: "exact optimum from the full numerical search (sparse marker rows only)", units: "quanta" },
        ],
        rows,
    ))
}
