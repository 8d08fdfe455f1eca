//! `siba`: trap potentials, trajectories and figure sweeps from JSON configs.

mod output;

use std::f64::consts::PI;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use output::{write_atomic, write_json, ConfigInput, Run};
use siba_core::dynamics::{full_model_timestep, rescale_kappa, simulate, suggest_timestep};
use siba_core::experiments::*;
use siba_core::trap::{force, photon_number, potential, trap_depth, trap_metrics};
use siba_core::validation::{run_all, run_criterion, DEFAULT_SEED};
use siba_core::{validate_configuration, SibaError, SimulationOptions, StopRule, TrapConfiguration};

const REFERENCE_CONFIG: &str = include_str!("../configs/reference.json");

#[derive(Parser)]
#[command(name = "siba", version, about = "Self-induced back-action trap simulations")]
struct Cli {
    /// Worker threads for sweeps
    #[arg(long, global = true, env = "SIBA_THREADS")]
    threads: Option<usize>,

    /// Recorded in the run manifest; the computations are deterministic
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Where to write the run manifest when the outputs do not fix a location
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Back-action parameter with scattering losses against particle size
    EtaScan(EtaScanArgs),
    /// Potential, force and photon numbers on a grid
    Potential(PotentialArgs),
    /// Trap metrics as JSON
    Metrics(MetricsArgs),
    /// Integrate one trajectory
    Simulate(SimulateArgs),
    /// Potential and experienced intensity across back-action regimes
    Fig2(FigArgs),
    /// Experienced intensity against eta at fixed depth
    Fig3(FigArgs),
    /// Two-mode traps across wall separations and powers
    Fig5(FigArgs),
    /// Back-action parameter against particle size
    #[command(name = "figS1")]
    FigS1(FigArgs),
    /// Fixed-depth sweep with the laser resonant near the node
    #[command(name = "figS3")]
    FigS3(FigArgs),
    /// Run the acceptance criteria
    Validate(ValidateArgs),
}

#[derive(Args)]
struct EtaScanArgs {
    /// Empty-cavity quality factors
    #[arg(long, value_delimiter = ',', default_value = "1e4,1e5,1e6")]
    q: Vec<f64>,
    /// Mode volume in units of (lambda/2)^3
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    /// Polarizability ratio alpha/(eps0 V)
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    #[arg(long, default_value_t = 1e-2)]
    kr_min: f64,
    #[arg(long, default_value_t = 1.0)]
    kr_max: f64,
    #[arg(long, default_value_t = 200)]
    points: usize,
    /// CSV path; standard output if omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PotentialArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 1001)]
    grid: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    config: PathBuf,
    /// Kinetic energy as a fraction of the trap depth
    #[arg(long, default_value_t = 0.1)]
    ekin: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Adiabatic,
    Full,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Kinetic energy as a fraction of the trap depth
    #[arg(long, default_value_t = 0.1)]
    ekin: f64,
    #[arg(long, value_enum, default_value_t = Mode::Adiabatic)]
    mode: Mode,
    /// Time step; chosen from the estimated period if omitted
    #[arg(long)]
    dt: Option<f64>,
    /// Number of estimated periods to integrate
    #[arg(long, default_value_t = 10)]
    periods: usize,
    /// Full mode only: rescale every linewidth to this multiple of omega0
    #[arg(long)]
    kappa_over_omega0: Option<f64>,
    /// Keep every k-th step
    #[arg(long, default_value_t = 1)]
    record_every: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FigArgs {
    /// Sweep settings as JSON; missing fields take their defaults
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Trap configuration to check before the criteria run; the bundled reference if omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run a single criterion
    #[arg(long)]
    criterion: Option<u8>,
    /// Print every check, not only those of failed criteria
    #[arg(long)]
    verbose: bool,
}

/// Acceptance criteria or other numeric outcomes that did not hold.
#[derive(Debug)]
struct NumericFailure(String);

impl fmt::Display for NumericFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for NumericFailure {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<SibaError>() {
            return if e.is_input_error() { 2 } else { 3 };
        }
        if cause.downcast_ref::<NumericFailure>().is_some() {
            return 3;
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let seed = cli.seed;
    let manifest = cli.manifest.as_deref();
    match cli.command {
        Command::EtaScan(a) => eta_scan(a, Run::start("eta-scan", seed), manifest),
        Command::Potential(a) => potential_grid(a, Run::start("potential", seed), manifest),
        Command::Metrics(a) => metrics(a, Run::start("metrics", seed), manifest),
        Command::Simulate(a) => simulate_cmd(a, Run::start("simulate", seed), manifest),
        Command::Fig2(a) => figure(a, Fig::Fig2, Run::start("fig2", seed)),
        Command::Fig3(a) => figure(a, Fig::Fig3, Run::start("fig3", seed)),
        Command::Fig5(a) => figure(a, Fig::Fig5, Run::start("fig5", seed)),
        Command::FigS1(a) => figure(a, Fig::FigS1, Run::start("figS1", seed)),
        Command::FigS3(a) => figure(a, Fig::FigS3, Run::start("figS3", seed)),
        Command::Validate(a) => validate(a, seed, Run::start("validate", seed), manifest),
    }
}

fn load_trap(path: &Path, run: &mut Run) -> Result<TrapConfiguration> {
    let input = ConfigInput::read(path)?;
    run.config(&input);
    let cfg: TrapConfiguration = input.parse()?;
    validate_configuration(&cfg).with_context(|| format!("config {}", input.path))
}

fn csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{v:?}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// `traj.csv` -> `traj.manifest.json`.
fn manifest_beside(path: &Path) -> PathBuf {
    path.with_extension("manifest.json")
}

/// Writes text to `out` or standard output, then the manifest to `--manifest`,
/// beside `out`, or standard error.
fn emit(text: &str, out: Option<&Path>, mut run: Run, manifest: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => {
            write_atomic(p, text.as_bytes())?;
            run.output(p);
        }
        None => print!("{text}"),
    }
    let target = manifest.map(Path::to_path_buf).or_else(|| out.map(manifest_beside));
    match target {
        Some(m) => write_json(&m, &run.manifest()),
        None => {
            eprintln!("{}", serde_json::to_string(&run.manifest())?);
            Ok(())
        }
    }
}

fn eta_scan(a: EtaScanArgs, run: Run, manifest: Option<&Path>) -> Result<()> {
    let s = EtaSizeSweep { q_list: a.q, nu: a.nu, eps: a.eps, kr_min: a.kr_min, kr_max: a.kr_max, points: a.points };
    let t = sweep_eta_vs_size(&s)?;
    let rows: Vec<Vec<f64>> = t.rows.iter().map(|r| r[..3].to_vec()).collect();
    emit(&csv(&["q", "kr", "eta"], &rows), a.out.as_deref(), run, manifest)
}

fn potential_grid(a: PotentialArgs, mut run: Run, manifest: Option<&Path>) -> Result<()> {
    let cfg = load_trap(&a.config, &mut run)?;
    if a.grid < 2 {
        return Err(SibaError::Range(format!("--grid needs at least 2 points, got {}", a.grid)).into());
    }
    let two = cfg.modes.len() == 2;
    let header: &[&str] = if two { &["x", "f1", "f2", "n1", "n2", "U_tot", "F"] } else { &["x", "f1", "n1", "U_tot", "F"] };
    let (lo, hi) = cfg.domain();
    let rows: Vec<Vec<f64>> = siba_core::numerics::linspace(lo, hi, a.grid)
        .into_iter()
        .map(|x| {
            let mut row = vec![x];
            row.extend(cfg.modes.iter().map(|m| m.profile.value(x)));
            row.extend(cfg.modes.iter().map(|m| photon_number(m, x)));
            row.push(potential(&cfg, x));
            row.push(force(&cfg, x));
            row
        })
        .collect();
    emit(&csv(header, &rows), a.out.as_deref(), run, manifest)
}

fn energy_from_fraction(cfg: &TrapConfiguration, frac: f64) -> Result<f64> {
    if !(frac > 0.0 && frac < 1.0) {
        return Err(SibaError::Range(format!("--ekin is a fraction of the depth in (0, 1), got {frac}")).into());
    }
    Ok(frac * trap_depth(cfg)?)
}

fn metrics(a: MetricsArgs, mut run: Run, manifest: Option<&Path>) -> Result<()> {
    let cfg = load_trap(&a.config, &mut run)?;
    let m = trap_metrics(&cfg, energy_from_fraction(&cfg, a.ekin)?)?;
    let mut text = serde_json::to_string_pretty(&m)?;
    text.push('\n');
    emit(&text, a.out.as_deref(), run, manifest)
}

fn simulate_cmd(a: SimulateArgs, mut run: Run, manifest: Option<&Path>) -> Result<()> {
    let cfg = load_trap(&a.config, &mut run)?;
    let e_kin = energy_from_fraction(&cfg, a.ekin)?;
    let m = trap_metrics(&cfg, e_kin)?;
    let (dt_suggested, t_est) = suggest_timestep(&cfg, &m)?;
    let opts = match a.mode {
        Mode::Adiabatic => {
            if a.kappa_over_omega0.is_some() {
                return Err(SibaError::Range("--kappa-over-omega0 applies to --mode full only".into()).into());
            }
            let dt = a.dt.unwrap_or(dt_suggested);
            if dt > t_est / 200.0 {
                return Err(SibaError::Stability(format!("dt = {dt} exceeds T/200 = {} for the estimated period {t_est}", t_est / 200.0)).into());
            }
            SimulationOptions::adiabatic(dt, StopRule::Steps(0))
        }
        Mode::Full => {
            let dt = match a.dt {
                Some(dt) => dt,
                None => full_model_timestep(&rescale_kappa(&cfg, a.kappa_over_omega0)?).min(dt_suggested),
            };
            SimulationOptions::full(dt, StopRule::Steps(0), a.kappa_over_omega0)
        }
    };
    let steps = (a.periods as f64 * t_est / opts.dt).ceil() as usize;
    let opts = SimulationOptions { stop: StopRule::Steps(steps), ..opts }.record_every(a.record_every);
    let tr = simulate(&cfg, m.minimum_position, e_kin, &opts)?;
    let mut header = vec!["t".to_string(), "x".into(), "p".into()];
    header.extend((1..=cfg.modes.len()).map(|i| format!("n_{i}")));
    header.extend(["U".into(), "H_eff".into()]);
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<f64>> = tr
        .states
        .iter()
        .zip(&tr.energy)
        .map(|(s, &h)| {
            let mut row = vec![s.t, s.x, s.p];
            row.extend(s.photon_numbers());
            row.push(potential(&cfg, s.x));
            row.push(h);
            row
        })
        .collect();
    emit(&csv(&header, &rows), Some(&a.out), run, manifest)
}

#[derive(Clone, Copy)]
enum Fig {
    Fig2,
    Fig3,
    Fig5,
    FigS1,
    FigS3,
}

impl Fig {
    fn name(self) -> &'static str {
        match self {
            Fig::Fig2 => "fig2",
            Fig::Fig3 => "fig3",
            Fig::Fig5 => "fig5",
            Fig::FigS1 => "figS1",
            Fig::FigS3 => "figS3",
        }
    }
}

fn settings<S: serde::de::DeserializeOwned + Default>(input: Option<&ConfigInput>) -> Result<S> {
    input.map_or_else(|| Ok(S::default()), ConfigInput::parse)
}

#[derive(Serialize)]
struct Fig5Summary {
    fits: Option<RegimeFits>,
    fit_error: Option<String>,
    design: HarmonicDesign,
    comparison: HarmonicComparison,
}

fn figure(a: FigArgs, fig: Fig, mut run: Run) -> Result<()> {
    let input = a.config.as_deref().map(ConfigInput::read).transpose()?;
    if let Some(i) = &input {
        run.config(i);
    }
    let name = fig.name();
    let mut extra: Option<(PathBuf, serde_json::Value)> = None;
    let mut table = match fig {
        Fig::Fig2 => sweep_regimes(&settings::<RegimeSweep>(input.as_ref())?)?,
        Fig::Fig3 => sweep_eta_fixed_depth(&settings::<EtaDepthSweep>(input.as_ref())?)?,
        Fig::FigS3 => {
            let mut v: serde_json::Value = match &input {
                Some(i) => i.parse()?,
                None => json!({}),
            };
            let obj = v.as_object_mut().context("figS3 config must be a JSON object")?;
            obj.entry("x_r").or_insert(json!(PI / 10.0));
            let s: EtaDepthSweep = serde_json::from_value(v).context("cannot parse figS3 config")?;
            sweep_eta_fixed_depth(&s)?
        }
        Fig::FigS1 => sweep_eta_vs_size(&settings::<EtaSizeSweep>(input.as_ref())?)?,
        Fig::Fig5 => {
            let s: TwoModeSweep = settings(input.as_ref())?;
            let t = sweep_two_mode(&s)?;
            let (fits, fit_error) = match fit_regimes(&t) {
                Ok(f) => (Some(f), None),
                Err(e) => (None, Some(e.to_string())),
            };
            let design = optimize_harmonic(&wall_geometry(&s.base, s.eta, 0.0, s.x0), s.x0)?;
            let comparison = compare_with_tweezer(&design, 0.01, 0.01)?;
            let summary = Fig5Summary { fits, fit_error, design, comparison };
            extra = Some((a.out.join("fig5_summary.json"), serde_json::to_value(&summary)?));
            t
        }
    };
    table.name = name.to_string();
    let csv_path = a.out.join(format!("{name}.csv"));
    write_atomic(&csv_path, table.to_csv().as_bytes())?;
    run.output(&csv_path);
    if let Some((path, value)) = &extra {
        write_json(path, value)?;
        run.output(path);
    }
    let meta_path = a.out.join(format!("{name}.meta.json"));
    run.output(&meta_path);
    write_json(&meta_path, &json!({ "provenance": table.provenance, "manifest": run.manifest() }))?;
    eprintln!("wrote {} ({} rows)", csv_path.display(), table.rows.len());
    Ok(())
}

fn validate(a: ValidateArgs, seed: u64, mut run: Run, manifest: Option<&Path>) -> Result<()> {
    let input = match &a.config {
        Some(p) => ConfigInput::read(p)?,
        None => ConfigInput::bundled("reference.json", REFERENCE_CONFIG),
    };
    run.config(&input);
    let cfg: TrapConfiguration = input.parse()?;
    validate_configuration(&cfg).with_context(|| format!("config {}", input.path))?;
    let reports = match a.criterion {
        Some(id) => vec![run_criterion(id, seed).with_context(|| format!("unknown criterion {id}"))?],
        None => run_all(seed),
    };
    let mut text = String::new();
    for r in &reports {
        let status = if r.passed { "PASS" } else { "FAIL" };
        writeln!(text, "criterion {}: {status} ({}, {:.2} s)", r.id, r.name, r.runtime_s).unwrap();
    }
    for r in reports.iter().filter(|r| a.verbose || !r.passed) {
        writeln!(text, "{r}").unwrap();
    }
    emit(&text, None, run, manifest)?;
    let failed = reports.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(NumericFailure(format!("{failed} of {} criteria failed", reports.len())).into());
    }
    Ok(())
}
