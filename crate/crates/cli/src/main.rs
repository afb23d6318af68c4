/// `println!` that reports write failures instead of panicking.
macro_rules! outln {
    ($($arg:tt)*) => {
        writeln!(std::io::stdout().lock(), $($arg)*)?
    };
}

mod figdata;
mod sweep;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use lindho::classicality::{classicality_window, metrics, metrics_csv, Thresholds};
use lindho::config::{RawConfig, RunConfig, TempInput};
use lindho::decoherence::DecoherenceReport;
use lindho::fpe::{covering_domain, evolve_wigner, l2_distance, linf_distance, max_stable_dt, FpeRunSpec, Scheme};
use lindho::io::{csv_row, fmt_f64, trajectory_csv, TRAJECTORY_HEADER};
use lindho::model::{initial_state, thermal_coefficients, validate, DiffusionCoefficients};
use lindho::propagate::{asymptotic_covariance, covariance_lyapunov, max_relative_deviation, trajectory, Route};
use lindho::states::render_grid;

#[derive(Parser)]
#[command(
    name = "lindho",
    version,
    about = "Lindblad-damped harmonic oscillator: Gaussian dynamics, decoherence and classicality"
)]
struct Cli {
    #[command(flatten)]
    params: ParamArgs,
    #[command(subcommand)]
    cmd: Command,
}

/// Configuration file plus overrides; flags win over file values.
#[derive(Args, Clone, Default)]
pub struct ParamArgs {
    /// Key-value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    lambda: Option<f64>,
    #[arg(long, global = true)]
    mu: Option<f64>,
    /// Initial squeezing δ.
    #[arg(long = "delta-sq", global = true)]
    delta_sq: Option<f64>,
    /// Initial correlation coefficient r.
    #[arg(long = "corr-r", global = true)]
    corr_r: Option<f64>,
    /// Temperature as C = coth(ħω/2kT).
    #[arg(long, global = true)]
    coth: Option<f64>,
}

impl ParamArgs {
    pub fn raw(&self) -> anyhow::Result<RawConfig> {
        let mut raw = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                RawConfig::parse(&text)?
            }
            None => RawConfig::default(),
        };
        raw.lambda = self.lambda.or(raw.lambda);
        raw.mu = self.mu.or(raw.mu);
        raw.delta = self.delta_sq.or(raw.delta);
        raw.r = self.corr_r.or(raw.r);
        if let Some(c) = self.coth {
            raw.temp = Some(TempInput::Coth(c));
        }
        Ok(raw)
    }

    fn load(&self) -> anyhow::Result<RunConfig> {
        Ok(self.raw()?.build()?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the diffusion coefficients.
    Coeffs,
    /// Check positivity and regime constraints.
    Validate,
    /// Emit a moment trajectory as CSV.
    Trajectory {
        #[arg(long = "t-end", default_value_t = 14.0)]
        t_end: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long, default_value = "lyapunov")]
        route: RouteArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the classicality metrics along a trajectory as CSV.
    Metrics {
        #[arg(long = "t-end", default_value_t = 20.0)]
        t_end: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long, default_value = "lyapunov")]
        route: RouteArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report the time windows where δ_QD < qd and δ_CC < cc.
    Window {
        #[arg(long, default_value_t = 0.99)]
        qd: f64,
        #[arg(long, default_value_t = 10.0)]
        cc: f64,
        #[arg(long = "t-end", default_value_t = 20.0)]
        t_end: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
    },
    /// Decoherence, statistical and relaxation time scales.
    Deco {
        #[arg(long)]
        json: bool,
    },
    /// Write the data behind a figure (1, 2a, 2b, 3a, 3b, 3c, 4a, 4b or all).
    Figdata {
        figure: String,
        #[arg(long, default_value = "figdata")]
        out: PathBuf,
    },
    /// Evaluate quantities over a parameter grid.
    Sweep {
        /// `name:min:max:count[:log]`, name ∈ {lambda, mu, delta, r, C, t}; repeatable.
        #[arg(long = "axis", required = true)]
        axes: Vec<String>,
        /// Comma-separated subset of delta_qd, delta_cc, sigma_det, gamma, s_qq, s_pp, s_pq, t_deco.
        #[arg(long, default_value = "delta_qd,delta_cc")]
        quantities: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the Wigner Fokker–Planck equation on a grid.
    Fpe {
        #[arg(long, default_value_t = 256)]
        n: usize,
        /// Step size; defaults to 0.9 of the stability limit.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long = "t-end", default_value_t = 0.5)]
        t_end: f64,
        /// Comma-separated snapshot times.
        #[arg(long)]
        snapshots: Option<String>,
        /// Start from the stationary state instead of the configured initial state.
        #[arg(long)]
        stationary: bool,
        #[arg(long, value_enum, default_value = "central")]
        scheme: SchemeArg,
        #[arg(long, default_value = "fpe_out")]
        out: PathBuf,
    },
    /// Run the acceptance suite.
    Selftest,
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Closed,
    Lyapunov,
    Rk4,
    All,
}

impl RouteArg {
    fn single(self) -> Option<Route> {
        match self {
            RouteArg::Closed => Some(Route::ClosedForm),
            RouteArg::Lyapunov => Some(Route::Lyapunov),
            RouteArg::Rk4 => Some(Route::Rk4),
            RouteArg::All => None,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Central,
    Upwind,
}

/// Raised when a report is produced but a hard check fails.
#[derive(Debug)]
struct ValidationFailed;

impl std::fmt::Display for ValidationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("validation failed")
    }
}

impl std::error::Error for ValidationFailed {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<std::io::Error>().is_some() {
        return 3;
    }
    match err.downcast_ref::<lindho::Error>() {
        Some(e) if e.is_numeric() => 2,
        _ => 1,
    }
}

fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.downcast_ref::<std::io::Error>()
        .is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // usage errors share the validation exit status; 2 is reserved for numeric failures
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            if e.downcast_ref::<ValidationFailed>().is_none() {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(exit_code(&e))
        }
    }
}

pub fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

pub fn write_file(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn coefficients(cfg: &RunConfig) -> anyhow::Result<DiffusionCoefficients> {
    Ok(thermal_coefficients(&cfg.oscillator)?)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.cmd {
        Command::Coeffs => cmd_coeffs(&cli.params),
        Command::Validate => cmd_validate(&cli.params),
        Command::Trajectory { t_end, dt, route, out } => cmd_trajectory(&cli.params, t_end, dt, route, out.as_deref()),
        Command::Metrics { t_end, dt, route, out } => cmd_metrics(&cli.params, t_end, dt, route, out.as_deref()),
        Command::Window { qd, cc, t_end, dt } => cmd_window(&cli.params, qd, cc, t_end, dt),
        Command::Deco { json } => cmd_deco(&cli.params, json),
        Command::Figdata { figure, out } => figdata::run(&figure, &out),
        Command::Sweep { axes, quantities, out } => sweep::run(&cli.params, &axes, &quantities, out.as_deref()),
        Command::Fpe {
            n,
            dt,
            t_end,
            snapshots,
            stationary,
            scheme,
            out,
        } => cmd_fpe(
            &cli.params,
            n,
            dt,
            t_end,
            snapshots.as_deref(),
            stationary,
            scheme,
            &out,
        ),
        Command::Selftest => cmd_selftest(),
    }
}

fn print_report(cfg: &RunConfig) -> anyhow::Result<bool> {
    let d = match thermal_coefficients(&cfg.oscillator) {
        Ok(d) => d,
        Err(e @ lindho::Error::Constraint(_)) => {
            outln!("FAIL lambda_exceeds_mu: {e}");
            return Ok(false);
        }
        Err(e) => return Err(e.into()),
    };
    let report = validate(&cfg.oscillator, &d);
    for c in &report.checks {
        let verdict = match (c.passed, c.fatal) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "WARN",
        };
        outln!("{verdict} {}: {}", c.name, c.detail);
    }
    Ok(report.is_ok())
}

fn cmd_coeffs(params: &ParamArgs) -> anyhow::Result<()> {
    let cfg = params.load()?;
    if let Ok(d) = thermal_coefficients(&cfg.oscillator) {
        outln!("d_pp = {}", fmt_f64(d.d_pp));
        outln!("d_qq = {}", fmt_f64(d.d_qq));
        outln!("d_pq = {}", fmt_f64(d.d_pq));
    }
    if print_report(&cfg)? {
        Ok(())
    } else {
        Err(ValidationFailed.into())
    }
}

fn cmd_validate(params: &ParamArgs) -> anyhow::Result<()> {
    let cfg = params.load()?;
    if print_report(&cfg)? {
        outln!("valid");
        Ok(())
    } else {
        outln!("invalid");
        Err(ValidationFailed.into())
    }
}

fn cmd_trajectory(params: &ParamArgs, t_end: f64, dt: f64, route: RouteArg, out: Option<&Path>) -> anyhow::Result<()> {
    let cfg = params.load()?;
    let d = coefficients(&cfg)?;
    if let Some(r) = route.single() {
        let traj = trajectory(r, &cfg.initial, &cfg.oscillator, &d, t_end, dt)?;
        return emit(out, &trajectory_csv(&traj));
    }
    let trajs = Route::ALL
        .iter()
        .map(|&r| trajectory(r, &cfg.initial, &cfg.oscillator, &d, t_end, dt))
        .collect::<lindho::Result<Vec<_>>>()?;
    let n = trajs[0].len();
    let dev: Vec<f64> = (0..n)
        .map(|k| {
            let s: Vec<_> = trajs.iter().map(|t| &t.samples()[k]).collect();
            max_relative_deviation(s[0], s[1])
                .max(max_relative_deviation(s[0], s[2]))
                .max(max_relative_deviation(s[1], s[2]))
        })
        .collect();
    let mut text = format!("route,{TRAJECTORY_HEADER},max_dev\n");
    for traj in &trajs {
        for (s, dv) in traj.samples().iter().zip(&dev) {
            let row = csv_row(&[s.t, s.mean_q, s.mean_p, s.s_qq, s.s_pp, s.s_pq, s.sigma_det(), *dv]);
            text.push_str(traj.route().name());
            text.push(',');
            text.push_str(&row);
            text.push('\n');
        }
    }
    emit(out, &text)
}

fn cmd_metrics(params: &ParamArgs, t_end: f64, dt: f64, route: RouteArg, out: Option<&Path>) -> anyhow::Result<()> {
    let cfg = params.load()?;
    let d = coefficients(&cfg)?;
    let Some(r) = route.single() else {
        bail!("metrics takes a single route");
    };
    let traj = trajectory(r, &cfg.initial, &cfg.oscillator, &d, t_end, dt)?;
    let rows: Vec<_> = traj.samples().iter().map(|s| metrics(s, cfg.oscillator.hbar)).collect();
    emit(out, &metrics_csv(&rows))
}

fn cmd_window(params: &ParamArgs, qd: f64, cc: f64, t_end: f64, dt: f64) -> anyhow::Result<()> {
    let cfg = params.load()?;
    let d = coefficients(&cfg)?;
    let thresholds = Thresholds::new(qd, cc)?;
    let traj = trajectory(Route::Lyapunov, &cfg.initial, &cfg.oscillator, &d, t_end, dt)?;
    let s0 = initial_state(&cfg.initial, &cfg.oscillator)?;
    let windows = classicality_window(&traj, cfg.oscillator.hbar, thresholds, |t| {
        covariance_lyapunov(&s0, &cfg.oscillator, &d, t)
    })?;
    outln!("thresholds: delta_qd < {}, delta_cc < {}", fmt_f64(qd), fmt_f64(cc));
    if windows.is_empty() {
        outln!("window: empty");
    }
    for w in &windows {
        outln!("window: [{}, {}]", fmt_f64(w.start), fmt_f64(w.end));
    }
    Ok(())
}

fn cmd_deco(params: &ParamArgs, json: bool) -> anyhow::Result<()> {
    let cfg = params.load()?;
    let report = DecoherenceReport::new(&cfg.initial, &cfg.oscillator)?;
    if json {
        outln!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        std::io::stdout().lock().write_all(report.to_key_values().as_bytes())?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_fpe(
    params: &ParamArgs,
    n: usize,
    dt: Option<f64>,
    t_end: f64,
    snapshots: Option<&str>,
    stationary: bool,
    scheme: SchemeArg,
    out: &Path,
) -> anyhow::Result<()> {
    let cfg = params.load()?;
    let osc = &cfg.oscillator;
    let d = coefficients(&cfg)?;
    let asym = asymptotic_covariance(osc).ok();
    let s0 = if stationary {
        asym.context("--stationary needs a damped system (lambda > 0)")?
    } else {
        initial_state(&cfg.initial, osc)?
    };
    let grid = covering_domain(&s0, asym.as_ref(), 6.0, n, n)?;
    let w0 = render_grid(&s0, grid)?;
    let mut run = FpeRunSpec::new(dt.unwrap_or_else(|| 0.9 * max_stable_dt(&grid, osc, &d)), t_end);
    run.scheme = match scheme {
        SchemeArg::Central => Scheme::Central,
        SchemeArg::Upwind => Scheme::Upwind,
    };
    if let Some(list) = snapshots {
        run.snapshot_times = list
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .with_context(|| format!("bad snapshot time `{s}`"))
            })
            .collect::<anyhow::Result<_>>()?;
    }
    let outcome = evolve_wigner(&w0, osc, &d, &run)?;

    let exact = render_grid(&covariance_lyapunov(&s0, osc, &d, t_end)?, grid)?;
    let l2 = l2_distance(&outcome.grid, &exact);
    let linf = linf_distance(&outcome.grid, &exact);
    let drift = stationary.then(|| linf_distance(&outcome.grid, &w0));

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut files = Vec::new();
    for (k, (t, g)) in outcome.snapshots.iter().enumerate() {
        let name = format!("snapshot_{k:03}.csv");
        write_file(&out.join(&name), &g.to_csv())?;
        files.push(serde_json::json!({ "t": t, "file": name }));
    }
    write_file(&out.join("final.csv"), &outcome.grid.to_csv())?;
    let manifest = serde_json::json!({
        "config": osc,
        "initial": cfg.initial,
        "stationary_start": stationary,
        "diffusion": d,
        "grid": grid,
        "run": run,
        "telemetry": outcome.telemetry,
        "l2_vs_analytic": l2,
        "linf_vs_analytic": linf,
        "linf_drift": drift,
        "snapshots": files,
        "final": "final.csv",
    });
    write_file(
        &out.join("manifest.json"),
        &(serde_json::to_string_pretty(&manifest)? + "\n"),
    )?;

    let tm = &outcome.telemetry;
    outln!("steps = {}", tm.steps);
    outln!("dt = {}", fmt_f64(tm.dt));
    outln!("mass_loss = {}", fmt_f64(tm.mass_loss));
    outln!("min_value = {}", fmt_f64(tm.min_value));
    outln!("l2_vs_analytic = {}", fmt_f64(l2));
    outln!("linf_vs_analytic = {}", fmt_f64(linf));
    if let Some(v) = drift {
        outln!("linf_drift = {}", fmt_f64(v));
    }
    Ok(())
}

fn cmd_selftest() -> anyhow::Result<()> {
    let mut all = true;
    for id in 1..=lindho::acceptance::CRITERIA.len() as u8 {
        let r = lindho::acceptance::run_one(id).expect("criterion ids are contiguous");
        outln!("{r}");
        all &= r.passed;
    }
    if all {
        outln!("selftest: all criteria passed");
        Ok(())
    } else {
        outln!("selftest: FAILED");
        Err(ValidationFailed.into())
    }
}
