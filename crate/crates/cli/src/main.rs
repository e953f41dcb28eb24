use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use spinkerr::analytic::AnalyticCorrelations;
use spinkerr::observables::CorrelationResult;
use spinkerr::presets;
use spinkerr::steadystate;
use spinkerr::sweep::{self, Axis, Format, Observable, Oracle, Overrides, Parameter, SweepResult, SweepSpec};
use spinkerr::{DerivedParams, FockSpace, Mode, PhysicalParams};

/// Photon statistics of a spinning two-mode Kerr resonator.
#[derive(Parser)]
#[command(name = "spinkerr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the model rates implied by the physical parameters.
    DeriveParams {
        #[command(flatten)]
        params: ParamArgs,
        /// Also write `<preset>_derive-params.json` here.
        #[arg(long, env = "SPINKERR_OUT")]
        out: Option<PathBuf>,
    },
    /// Solve one parameter point and print its correlation report.
    Solve {
        #[command(flatten)]
        params: ParamArgs,
        /// Also write `<preset>_solve.json` here.
        #[arg(long, env = "SPINKERR_OUT")]
        out: Option<PathBuf>,
    },
    /// Run a sweep described by a JSON spec file.
    Sweep {
        /// Sweep spec (JSON).
        spec: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Compare weak-drive and master-equation g2 over a detuning scan.
    Validate {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Number of detuning points.
        #[arg(long, default_value_t = presets::SCAN_POINTS)]
        points: usize,
        /// Relative deviation reported as a disagreement.
        #[arg(long, default_value_t = 0.1)]
        tolerance: f64,
    },
    /// Write the datasets behind the named figure panels.
    FigureData {
        /// Panels to produce (fig1b, fig2a, fig2b, fig2c, fig3a, fig3b, fig3c, fig3d, fig3e).
        names: Vec<String>,
        /// Produce every panel.
        #[arg(long)]
        all: bool,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Units {
    /// rad/s
    #[value(name = "rad-s")]
    RadPerSecond,
    /// 10⁶ rad/s, the figure-axis convention
    #[value(name = "MHz", alias = "mhz")]
    Mega,
}

impl Units {
    fn scale(self) -> f64 {
        match self {
            Units::RadPerSecond => 1.0,
            Units::Mega => 1e6,
        }
    }
}

#[derive(Args, Clone)]
struct ParamArgs {
    /// Parameter preset.
    #[arg(long, default_value = "paper")]
    preset: String,
    /// JSON file of physical parameters (SI units) overlaid on the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Units of --delta0, --J and --xi.
    #[arg(long, value_enum, default_value = "rad-s")]
    units: Units,
    /// Angular velocity Ω (rad/s).
    #[arg(long, allow_negative_numbers = true)]
    omega: Option<f64>,
    /// Detuning Δ₀.
    #[arg(long, allow_negative_numbers = true)]
    delta0: Option<f64>,
    /// Backscattering coupling J.
    #[arg(long = "J", allow_negative_numbers = true)]
    j: Option<f64>,
    /// Drive amplitude ξ, replacing the value implied by the input power.
    #[arg(long, allow_negative_numbers = true)]
    xi: Option<f64>,
    /// Kerr coefficient as a multiple of γ, replacing the material value.
    #[arg(long, allow_negative_numbers = true)]
    chi_over_gamma: Option<f64>,
    /// Driven mode (cw or ccw).
    #[arg(long)]
    drive: Option<Mode>,
    /// Photon cutoff per mode.
    #[arg(long, default_value_t = sweep::DEFAULT_CUTOFF)]
    cutoff: usize,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Output directory.
    #[arg(long, env = "SPINKERR_OUT", default_value = ".")]
    out: PathBuf,
    /// Worker threads (defaults to the number of cores).
    #[arg(long)]
    workers: Option<usize>,
}

impl RunArgs {
    fn workers(&self) -> usize {
        self.workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Config(String),
    Solver(String),
    Io(String),
}

impl Failure {
    fn category(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Config(_) => "config",
            Failure::Solver(_) => "solver",
            Failure::Io(_) => "io",
        }
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Config(_) => 3,
            Failure::Solver(_) => 4,
            Failure::Io(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Config(m) | Failure::Solver(m) | Failure::Io(m) => m,
        }
    }
}

impl From<sweep::SweepError> for Failure {
    fn from(e: sweep::SweepError) -> Self {
        use sweep::SweepError as E;
        match e {
            E::Invalid(_) | E::Params(_) => Failure::Config(e.to_string()),
            E::Io { .. } => Failure::Io(e.to_string()),
            E::Format { .. } => Failure::Io(e.to_string()),
            E::AllUndefined { .. } | E::Pool(_) => Failure::Solver(e.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, Failure>;

/// Fully resolved parameter point.
struct Point {
    label: String,
    physical: PhysicalParams,
    overrides: Overrides,
    derived: DerivedParams,
    cutoff: usize,
}

fn preset_params(name: &str) -> Result<PhysicalParams> {
    match name {
        "paper" => Ok(presets::paper()),
        other => Err(Failure::Usage(format!("unknown preset `{other}` (available: paper)"))),
    }
}

fn read_config(path: &Path, base: &PhysicalParams) -> Result<PhysicalParams> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let overlay: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let serde_json::Value::Object(overlay) = overlay else {
        return Err(Failure::Config(format!("{}: expected a JSON object", path.display())));
    };
    let mut merged = serde_json::to_value(base).expect("plain struct");
    let obj = merged.as_object_mut().expect("struct serializes to an object");
    obj.extend(overlay);
    serde_json::from_value(merged).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn resolve(args: &ParamArgs) -> Result<Point> {
    let mut physical = preset_params(&args.preset)?;
    let mut label = args.preset.clone();
    if let Some(path) = &args.config {
        physical = read_config(path, &physical)?;
        label = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("config")
            .to_string();
    }
    let unit = args.units.scale();
    if let Some(v) = args.omega {
        physical.angular_velocity = v;
    }
    if let Some(v) = args.delta0 {
        physical.detuning = v * unit;
    }
    if let Some(v) = args.j {
        physical.backscattering = v * unit;
    }
    if let Some(m) = args.drive {
        physical.drive_direction = m;
    }
    let mut derived = physical.derive().map_err(|e| Failure::Config(e.to_string()))?;
    let mut overrides = Overrides::default();
    if let Some(v) = args.xi {
        overrides.xi = Some(v * unit);
    }
    if let Some(v) = args.chi_over_gamma {
        overrides.chi = Some(v * derived.gamma);
    }
    let mut bad = Vec::new();
    for (name, v) in [("xi", overrides.xi), ("chi", overrides.chi)] {
        match v {
            Some(v) if !(v.is_finite() && v >= 0.0) => bad.push(format!("{name} must be finite and >= 0 (got {v})")),
            _ => {}
        }
    }
    if args.cutoff < 3 {
        bad.push(format!("cutoff must be at least 3 (got {})", args.cutoff));
    }
    if !bad.is_empty() {
        return Err(Failure::Config(bad.join("; ")));
    }
    derived.xi = overrides.xi.unwrap_or(derived.xi);
    derived.chi = overrides.chi.unwrap_or(derived.chi);
    Ok(Point {
        label,
        physical,
        overrides,
        derived,
        cutoff: args.cutoff,
    })
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, bytes).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data");
    s.push('\n');
    s
}

fn export_both(result: &SweepResult, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    let mut paths = Vec::new();
    for format in [Format::Csv, Format::Json] {
        let path = dir.join(format!("{stem}.{}", format.extension()));
        sweep::export(result, format, &path)?;
        paths.push(path);
    }
    Ok(paths)
}

#[derive(Serialize)]
struct DeriveReport<'a> {
    label: &'a str,
    physical: &'a PhysicalParams,
    derived: &'a DerivedParams,
    chi_over_gamma: f64,
    xi_over_gamma: f64,
    sagnac_over_gamma: f64,
    backscattering_over_gamma: f64,
    params_hash: String,
}

fn derive_params(args: &ParamArgs, out: Option<&Path>) -> Result<()> {
    let p = resolve(args)?;
    let d = &p.derived;
    let report = DeriveReport {
        label: &p.label,
        physical: &p.physical,
        derived: d,
        chi_over_gamma: d.chi_over_gamma(),
        xi_over_gamma: d.xi_over_gamma(),
        sagnac_over_gamma: d.sagnac / d.gamma,
        backscattering_over_gamma: d.backscattering / d.gamma,
        params_hash: d.hash(),
    };
    let json = to_json(&report);
    print!("{json}");
    if let Some(dir) = out {
        write(&dir.join(format!("{}_derive-params.json", p.label)), json.as_bytes())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SolveReport<'a> {
    label: &'a str,
    physical: &'a PhysicalParams,
    derived: &'a DerivedParams,
    cutoff: usize,
    numeric: CorrelationResult,
    analytic: Option<AnalyticCorrelations>,
    analytic_error: Option<String>,
}

fn solve(args: &ParamArgs, out: Option<&Path>) -> Result<()> {
    let p = resolve(args)?;
    let space = FockSpace::symmetric(p.cutoff).map_err(|e| Failure::Config(e.to_string()))?;
    let rho = steadystate::steady_state(&p.derived, space).map_err(|e| {
        Failure::Solver(format!(
            "{e} (Δ₀ = {:.6e}, Ω = {:.6e}, J = {:.6e}, params {})",
            p.derived.detuning,
            p.physical.angular_velocity,
            p.derived.backscattering,
            p.derived.hash()
        ))
    })?;
    let (analytic, analytic_error) = match AnalyticCorrelations::compute(&p.derived) {
        Ok(a) => (Some(a), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let report = SolveReport {
        label: &p.label,
        physical: &p.physical,
        derived: &p.derived,
        cutoff: p.cutoff,
        numeric: CorrelationResult::compute(&rho, &p.derived),
        analytic,
        analytic_error,
    };
    let json = to_json(&report);
    print!("{json}");
    if let Some(dir) = out {
        write(&dir.join(format!("{}_solve.json", p.label)), json.as_bytes())?;
    }
    Ok(())
}

fn run_sweep(spec_path: &Path, run: &RunArgs) -> Result<()> {
    let text = fs::read_to_string(spec_path).map_err(|e| Failure::Io(format!("{}: {e}", spec_path.display())))?;
    let spec: SweepSpec =
        serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", spec_path.display())))?;
    let result = sweep::run(&spec, run.workers())?;
    let failed = result.records.iter().filter(|r| !r.failures.is_empty()).count();
    for path in export_both(&result, &run.out, &format!("{}_sweep", spec.name))? {
        println!("{}", path.display());
    }
    eprintln!("{} points, {failed} with failures", result.records.len());
    Ok(())
}

fn validate(args: &ParamArgs, run: &RunArgs, points: usize, tolerance: f64) -> Result<()> {
    let p = resolve(args)?;
    let mut spec = SweepSpec::new(
        &p.label,
        p.physical.clone(),
        vec![Axis::new(
            Parameter::Detuning,
            presets::DETUNING_RANGE.0,
            presets::DETUNING_RANGE.1,
            points,
        )],
    );
    spec.overrides = p.overrides.clone();
    spec.oracle = Oracle::Both;
    spec.cutoff = p.cutoff;
    let result = sweep::run(&spec, run.workers())?;
    export_both(&result, &run.out, &format!("{}_validate", p.label))?;

    for mode in Mode::BOTH {
        let mut compared = 0;
        let mut above = 0;
        let mut worst = (0.0, f64::NAN);
        for rec in &result.records {
            let (Some(a), Some(n)) = (rec.value(Observable::G2Analytic, mode), rec.value(Observable::G2, mode)) else {
                continue;
            };
            compared += 1;
            let dev = (a - n).abs() / n;
            if dev >= tolerance {
                above += 1;
            }
            if dev > worst.0 {
                worst = (dev, rec.detuning);
            }
        }
        println!(
            "g2_{mode}: {compared} points compared, {above} above {:.0}%, worst {:.3}% at Δ₀ = {:.4e}",
            100.0 * tolerance,
            100.0 * worst.0,
            worst.1
        );
    }
    Ok(())
}

fn figure_data(names: &[String], all: bool, run: &RunArgs) -> Result<()> {
    let names: Vec<String> = if all {
        presets::FIGURES.iter().map(|s| s.to_string()).collect()
    } else if names.is_empty() {
        return Err(Failure::Usage("name at least one figure or pass --all".into()));
    } else {
        names.to_vec()
    };
    let mut specs = Vec::new();
    for name in &names {
        let s = presets::figure(name).ok_or_else(|| {
            Failure::Usage(format!(
                "unknown figure `{name}` (available: {})",
                presets::FIGURES.join(", ")
            ))
        })?;
        specs.extend(s);
    }
    for spec in specs {
        let result = sweep::run(&spec, run.workers())?;
        for path in export_both(&result, &run.out, &format!("{}_figure-data", spec.name))? {
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::DeriveParams { params, out } => derive_params(&params, out.as_deref()),
        Command::Solve { params, out } => solve(&params, out.as_deref()),
        Command::Sweep { spec, run } => run_sweep(&spec, &run),
        Command::Validate {
            params,
            run,
            points,
            tolerance,
        } => {
            if points < 2 {
                return Err(Failure::Usage("--points must be at least 2".into()));
            }
            validate(&params, &run, points, tolerance)
        }
        Command::FigureData { names, all, run } => figure_data(&names, all, &run),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.category(), e.message());
            ExitCode::from(e.code())
        }
    }
}
