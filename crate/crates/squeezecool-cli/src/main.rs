//! `squeezecool` — command-line harness for the cavity-cooling toolkit.
//!
//! Every subcommand reads parameters from an optional flat config file plus
//! command-line flags (flags win), computes through the `squeezecool`
//! library, and writes a deterministic CSV or JSON table whose header
//! records the tool version and the full resolved parameter set.
//!
//! Exit codes: 0 on success, 2 for configuration errors (the message names
//! the offending key), 3 for numerical failures.

mod commands;
mod config;
mod figures;
mod table;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Settings;
use figures::FigureId;
use table::{default_out, resolve_out, write_output, Failure, Format, Table};

/// Simulation and analysis toolkit for ground-state laser cooling of a
/// mechanical resonator with an intracavity-squeezing cavity.
#[derive(Parser)]
#[command(name = "squeezecool", version, about, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct IoArgs {
    /// Config file: flat UTF-8 `key = value` lines plus repeated
    /// `grid = name,min,max,count,lin|log` entries; flags override the file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output file (stdout when absent). Relative paths land under
    /// $SQUEEZECOOL_OUT_DIR when that variable is set.
    #[arg(long, value_name = "PATH")]
    out: Option<String>,
    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Worker threads for sweeps and figure grids (default: all cores).
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
}

/// Parameters of the single-cavity model plus the drive scheme.
#[derive(Args, Default)]
struct PointArgs {
    /// Drive detuning Δ (units of ω_m).
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    /// Total cavity linewidth κ.
    #[arg(long)]
    kappa: Option<f64>,
    /// Intrinsic (undetected) part of the linewidth (default 0).
    #[arg(long = "kappa-0")]
    kappa_0: Option<f64>,
    /// Linearized optomechanical coupling G.
    #[arg(long)]
    g: Option<f64>,
    /// Ambient thermal phonon occupancy.
    #[arg(long = "n-th", visible_alias = "nth")]
    n_th: Option<f64>,
    /// Mechanical quality factor.
    #[arg(long = "q-m", visible_alias = "qm")]
    q_m: Option<f64>,
    /// χ⁽²⁾ pump amplitude, real part (IS scheme; default: auto).
    #[arg(long = "eps-re", allow_hyphen_values = true)]
    eps_re: Option<f64>,
    /// χ⁽²⁾ pump amplitude, imaginary part (IS scheme; default: auto).
    #[arg(long = "eps-im", allow_hyphen_values = true)]
    eps_im: Option<f64>,
    /// Drive scheme: sb, sd, or is (default is).
    #[arg(long)]
    scheme: Option<String>,
    /// Input squeezing magnitude R (SD scheme; default: auto).
    #[arg(long = "squeeze-r")]
    squeeze_r: Option<f64>,
    /// Input squeezing phase φ in radians (SD scheme).
    #[arg(long = "squeeze-phi", allow_hyphen_values = true)]
    squeeze_phi: Option<f64>,
    /// Sweep axis `name,min,max,count,lin|log` (repeatable).
    #[arg(long)]
    grid: Vec<String>,
}

fn push_f64(out: &mut Vec<(&'static str, String)>, key: &'static str, value: &Option<f64>) {
    if let Some(x) = value {
        out.push((key, format!("{x}")));
    }
}

impl PointArgs {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut o = Vec::new();
        push_f64(&mut o, "delta", &self.delta);
        push_f64(&mut o, "kappa", &self.kappa);
        push_f64(&mut o, "kappa_0", &self.kappa_0);
        push_f64(&mut o, "g", &self.g);
        push_f64(&mut o, "n_th", &self.n_th);
        push_f64(&mut o, "q_m", &self.q_m);
        push_f64(&mut o, "eps_re", &self.eps_re);
        push_f64(&mut o, "eps_im", &self.eps_im);
        push_f64(&mut o, "squeeze_r", &self.squeeze_r);
        push_f64(&mut o, "squeeze_phi", &self.squeeze_phi);
        if let Some(s) = &self.scheme {
            o.push(("scheme", s.clone()));
        }
        o
    }
}

/// Time-domain integration controls for `cool`.
#[derive(Args, Default)]
struct CoolArgs {
    /// Trajectory end time (units of 1/ω_m; default 1000).
    #[arg(long = "t-max")]
    t_max: Option<f64>,
    /// Number of samples including t = 0 (default 201).
    #[arg(long)]
    samples: Option<usize>,
    /// Initial mechanical occupancy (default: n_th).
    #[arg(long)]
    n0: Option<f64>,
    /// Integrator relative tolerance (default 1e-9).
    #[arg(long)]
    rtol: Option<f64>,
    /// Integrator absolute tolerance (default 1e-12).
    #[arg(long)]
    atol: Option<f64>,
}

impl CoolArgs {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut o = Vec::new();
        push_f64(&mut o, "t_max", &self.t_max);
        if let Some(n) = self.samples {
            o.push(("samples", format!("{n}")));
        }
        push_f64(&mut o, "n0", &self.n0);
        push_f64(&mut o, "rtol", &self.rtol);
        push_f64(&mut o, "atol", &self.atol);
        o
    }
}

/// Parameters for the quadrature-spectrum command (pump only; no drive scheme).
#[derive(Args, Default)]
struct SqueezeArgs {
    /// Drive detuning Δ (units of ω_m).
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    /// Total cavity linewidth κ (must be fully detected for the output port).
    #[arg(long)]
    kappa: Option<f64>,
    /// Intrinsic (undetected) part of the linewidth (default 0).
    #[arg(long = "kappa-0")]
    kappa_0: Option<f64>,
    /// Linearized optomechanical coupling G.
    #[arg(long)]
    g: Option<f64>,
    /// Ambient thermal phonon occupancy.
    #[arg(long = "n-th", visible_alias = "nth")]
    n_th: Option<f64>,
    /// Mechanical quality factor.
    #[arg(long = "q-m", visible_alias = "qm")]
    q_m: Option<f64>,
    /// χ⁽²⁾ pump amplitude, real part (default: auto heating-cancelling pump).
    #[arg(long = "eps-re", allow_hyphen_values = true)]
    eps_re: Option<f64>,
    /// χ⁽²⁾ pump amplitude, imaginary part.
    #[arg(long = "eps-im", allow_hyphen_values = true)]
    eps_im: Option<f64>,
    /// Detection quadrature angle θ in radians (default 0).
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    /// Field to analyze: output (default) or intracavity.
    #[arg(long)]
    port: Option<String>,
    /// Frequency axis `omega,min,max,count,lin|log` (repeatable form).
    #[arg(long)]
    grid: Vec<String>,
}

impl SqueezeArgs {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut o = Vec::new();
        push_f64(&mut o, "delta", &self.delta);
        push_f64(&mut o, "kappa", &self.kappa);
        push_f64(&mut o, "kappa_0", &self.kappa_0);
        push_f64(&mut o, "g", &self.g);
        push_f64(&mut o, "n_th", &self.n_th);
        push_f64(&mut o, "q_m", &self.q_m);
        push_f64(&mut o, "eps_re", &self.eps_re);
        push_f64(&mut o, "eps_im", &self.eps_im);
        push_f64(&mut o, "theta", &self.theta);
        if let Some(p) = &self.port {
            o.push(("port", p.clone()));
        }
        o
    }
}

/// Parameters of the full three-mode model for `reduce3`.
#[derive(Args, Default)]
struct ThreeModeArgs {
    /// Fundamental-mode detuning Δ₁.
    #[arg(long = "delta-1", allow_hyphen_values = true)]
    delta_1: Option<f64>,
    /// Second-harmonic-mode detuning Δ₂.
    #[arg(long = "delta-2", allow_hyphen_values = true)]
    delta_2: Option<f64>,
    /// χ⁽²⁾ intermode coupling ν, real part.
    #[arg(long = "nu-re", allow_hyphen_values = true)]
    nu_re: Option<f64>,
    /// χ⁽²⁾ intermode coupling ν, imaginary part.
    #[arg(long = "nu-im", allow_hyphen_values = true)]
    nu_im: Option<f64>,
    /// Radiation-pressure coupling of the fundamental mode.
    #[arg(long = "g-1", allow_hyphen_values = true)]
    g_1: Option<f64>,
    /// Radiation-pressure coupling of the second-harmonic mode.
    #[arg(long = "g-2", allow_hyphen_values = true)]
    g_2: Option<f64>,
    /// Fundamental-mode linewidth κ₁.
    #[arg(long = "kappa-1")]
    kappa_1: Option<f64>,
    /// Second-harmonic-mode linewidth κ₂.
    #[arg(long = "kappa-2")]
    kappa_2: Option<f64>,
    /// Drive amplitude ε₁ on the fundamental mode, real part.
    #[arg(long = "eps-1-re", allow_hyphen_values = true)]
    eps_1_re: Option<f64>,
    /// Drive amplitude ε₁, imaginary part.
    #[arg(long = "eps-1-im", allow_hyphen_values = true)]
    eps_1_im: Option<f64>,
    /// Drive amplitude ε₂ on the second-harmonic mode, real part.
    #[arg(long = "eps-2-re", allow_hyphen_values = true)]
    eps_2_re: Option<f64>,
    /// Drive amplitude ε₂, imaginary part.
    #[arg(long = "eps-2-im", allow_hyphen_values = true)]
    eps_2_im: Option<f64>,
    /// Mechanical frequency (must be 1: the toolkit works in units of ω_m).
    #[arg(long = "omega-m")]
    omega_m: Option<f64>,
    /// Mechanical linewidth γ.
    #[arg(long)]
    gamma: Option<f64>,
    /// Ambient thermal phonon occupancy.
    #[arg(long = "n-th", visible_alias = "nth")]
    n_th: Option<f64>,
}

impl ThreeModeArgs {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut o = Vec::new();
        push_f64(&mut o, "delta_1", &self.delta_1);
        push_f64(&mut o, "delta_2", &self.delta_2);
        push_f64(&mut o, "nu_re", &self.nu_re);
        push_f64(&mut o, "nu_im", &self.nu_im);
        push_f64(&mut o, "g_1", &self.g_1);
        push_f64(&mut o, "g_2", &self.g_2);
        push_f64(&mut o, "kappa_1", &self.kappa_1);
        push_f64(&mut o, "kappa_2", &self.kappa_2);
        push_f64(&mut o, "eps_1_re", &self.eps_1_re);
        push_f64(&mut o, "eps_1_im", &self.eps_1_im);
        push_f64(&mut o, "eps_2_re", &self.eps_2_re);
        push_f64(&mut o, "eps_2_im", &self.eps_2_im);
        push_f64(&mut o, "omega_m", &self.omega_m);
        push_f64(&mut o, "gamma", &self.gamma);
        push_f64(&mut o, "n_th", &self.n_th);
        o
    }
}

#[derive(Subcommand)]
enum Command {
    /// Backaction force spectrum S_FF(ω) of the selected drive scheme.
    Spectrum {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        point: PointArgs,
    },
    /// Time-domain cooling trajectory n_mech(t), n_cav(t) from a thermal start.
    Cool {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        cool: CoolArgs,
    },
    /// Analytic cooling limits: a single-point report, or per-scheme minima
    /// over a κ grid (via --grid kappa,... or --kappa-grid).
    Limits {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        point: PointArgs,
        /// Shorthand for a logarithmic κ axis: LO..HI or LO..HIxN (N defaults to 61).
        #[arg(long = "kappa-grid", value_name = "LO..HI[xN]")]
        kappa_grid: Option<String>,
    },
    /// Ground-state boundary κ/(4ω_m) of each scheme versus bath occupancy.
    Regions {
        #[command(flatten)]
        io: IoArgs,
        /// Mechanical quality factor (default 1e5).
        #[arg(long = "q-m", visible_alias = "qm")]
        q_m: Option<f64>,
        /// Occupancy axis `n_th,min,max,count,lin|log` (default log 10..1e5 x121).
        #[arg(long)]
        grid: Vec<String>,
    },
    /// Steady-state occupancy over a 1- or 2-axis parameter sweep; unstable
    /// points stay in the output with a status column.
    Sweep {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        point: PointArgs,
    },
    /// Adiabatic elimination of the second-harmonic mode of the three-mode
    /// model: effective single-mode parameters plus the full-model audit.
    Reduce3 {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        three: ThreeModeArgs,
    },
    /// Quadrature noise spectrum of the emitted (or intracavity) field, with
    /// the per-frequency optimal angle and squeezing magnitude.
    Squeeze {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        point: SqueezeArgs,
    },
    /// Reproduce a named figure dataset together with a JSON manifest
    /// describing every column.
    Figure {
        #[command(flatten)]
        io: IoArgs,
        /// Which figure to build.
        #[arg(long, value_enum)]
        id: FigureId,
        /// Grid density (points per axis; each figure has its own default).
        #[arg(long)]
        density: Option<usize>,
    },
}

fn parse_kappa_grid(text: &str) -> Result<String, Failure> {
    let (range, count) = match text.split_once('x') {
        Some((r, n)) => (
            r,
            n.parse::<usize>().map_err(|_| {
                Failure::config("kappa-grid", format!("invalid point count in `{text}`"))
            })?,
        ),
        None => (text, 61),
    };
    let (lo, hi) = range.split_once("..").ok_or_else(|| {
        Failure::config("kappa-grid", format!("expected LO..HI[xN], got `{text}`"))
    })?;
    Ok(format!("kappa,{lo},{hi},{count},log"))
}

const COOL_KEYS: &[&str] = &["t_max", "samples", "n0", "rtol", "atol"];
const LIMITS_KEYS: &[&str] = &["delta", "kappa", "kappa_0", "g", "n_th", "q_m", "scheme"];

fn with_pool<T: Send>(
    jobs: Option<usize>,
    f: impl FnOnce() -> Result<T, Failure> + Send,
) -> Result<T, Failure> {
    if jobs == Some(0) {
        return Err(Failure::config("jobs", "must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Failure::numeric(format!("cannot build thread pool: {e}")))?;
    pool.install(f)
}

fn emit(io: &IoArgs, table: &Table) -> Result<(), Failure> {
    let rendered = table.render(io.format);
    let out = resolve_out(io.out.as_deref());
    write_output(&rendered, out.as_deref())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Spectrum { io, point } => {
            let st = Settings::load(
                io.config.as_deref(),
                point.overrides(),
                &point.grid,
                commands::POINT_KEYS,
                &["omega"],
            )?;
            let table = with_pool(io.jobs, || commands::spectrum(&st))?;
            emit(&io, &table)
        }
        Command::Cool { io, point, cool } => {
            let mut overrides = point.overrides();
            overrides.extend(cool.overrides());
            let allowed: Vec<&str> = [commands::POINT_KEYS, COOL_KEYS].concat();
            let st = Settings::load(
                io.config.as_deref(),
                overrides,
                &point.grid,
                &allowed,
                &[],
            )?;
            let table = with_pool(io.jobs, || commands::cool(&st))?;
            emit(&io, &table)
        }
        Command::Limits {
            io,
            point,
            kappa_grid,
        } => {
            let mut grids = point.grid.clone();
            if let Some(text) = &kappa_grid {
                grids.push(parse_kappa_grid(text)?);
            }
            let st = Settings::load(
                io.config.as_deref(),
                point.overrides(),
                &grids,
                LIMITS_KEYS,
                &["kappa"],
            )?;
            let table = with_pool(io.jobs, || commands::limits(&st))?;
            emit(&io, &table)
        }
        Command::Regions { io, q_m, grid } => {
            let mut overrides = Vec::new();
            push_f64(&mut overrides, "q_m", &q_m);
            let st = Settings::load(io.config.as_deref(), overrides, &grid, &["q_m"], &["n_th"])?;
            let table = with_pool(io.jobs, || commands::regions(&st))?;
            emit(&io, &table)
        }
        Command::Sweep { io, point } => {
            let st = Settings::load(
                io.config.as_deref(),
                point.overrides(),
                &point.grid,
                commands::POINT_KEYS,
                commands::SWEEP_AXES,
            )?;
            let table = with_pool(io.jobs, || commands::sweep(&st))?;
            emit(&io, &table)
        }
        Command::Reduce3 { io, three } => {
            let st = Settings::load(
                io.config.as_deref(),
                three.overrides(),
                &[],
                commands::THREE_MODE_KEYS,
                &[],
            )?;
            let table = with_pool(io.jobs, || commands::reduce3(&st))?;
            emit(&io, &table)
        }
        Command::Squeeze { io, point } => {
            let st = Settings::load(
                io.config.as_deref(),
                point.overrides(),
                &point.grid,
                commands::SQUEEZE_KEYS,
                &["omega"],
            )?;
            let table = with_pool(io.jobs, || commands::squeeze(&st))?;
            emit(&io, &table)
        }
        Command::Figure { io, id, density } => {
            let output = with_pool(io.jobs, || figures::figure(id, density))?;
            let data_path = resolve_out(io.out.as_deref()).unwrap_or_else(|| {
                default_out(&format!("{}.{}", id.name(), io.format.extension()))
            });
            let manifest_path = manifest_path_for(&data_path);
            write_output(&output.table.render(io.format), Some(&data_path))?;
            write_output(&output.manifest, Some(&manifest_path))?;
            println!(
                "wrote {} and {}",
                data_path.display(),
                manifest_path.display()
            );
            Ok(())
        }
    }
}

/// `<stem>.manifest.json` next to the data file.
fn manifest_path_for(data_path: &Path) -> PathBuf {
    data_path.with_extension("manifest.json")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
