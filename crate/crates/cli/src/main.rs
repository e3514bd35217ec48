use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use singular_fbm::fbm::{
    generate_fbm, read_path_archive, write_path_archive, write_path_csv, FbmPath, GeneratorTag,
    HurstParam, SeedRecord, TimeGrid,
};
use singular_fbm::harness::{
    run_campaign, ExperimentConfig, VerificationReport, DEFAULT_OUTPUT_DIR, OUTPUT_DIR_ENV,
};
use singular_fbm::limit::{build_family, write_family_csv, EpsilonLadder};
use singular_fbm::sde::{solve_regularized_with, write_solution_csv, SdeSpec, StepScheme};

/// Exit status for usage errors and unreadable configuration.
const USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "sfbm",
    version,
    about = "Singular SDE driven by rough fBm: sampling, solving and verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one fBm path and write it as CSV (or a path archive).
    Fbm(FbmArgs),
    /// Solve the regularised equation for one epsilon.
    Solve(SolveArgs),
    /// Solve a whole epsilon ladder on shared noise.
    Ladder(LadderArgs),
    /// Run a verification campaign from a JSON config.
    Verify(VerifyArgs),
    /// Print a stored JSON report as a table.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Cholesky,
    Hosking,
    Circulant,
}

impl From<Method> for GeneratorTag {
    fn from(m: Method) -> Self {
        match m {
            Method::Cholesky => GeneratorTag::Cholesky,
            Method::Hosking => GeneratorTag::Hosking,
            Method::Circulant => GeneratorTag::Circulant,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Implicit,
    FrozenLeft,
}

impl From<Scheme> for StepScheme {
    fn from(s: Scheme) -> Self {
        match s {
            Scheme::Implicit => StepScheme::ImplicitSingular,
            Scheme::FrozenLeft => StepScheme::FrozenLeft,
        }
    }
}

#[derive(Args)]
struct NoiseArgs {
    /// Hurst parameter in (0, 1/2).
    #[arg(long)]
    hurst: Option<f64>,
    /// Number of grid steps.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    path_index: u64,
    #[arg(long, value_enum, default_value_t = Method::Circulant)]
    method: Method,
    /// Read the noise from a path archive instead of sampling it.
    #[arg(long, conflicts_with_all = ["steps", "horizon", "seed", "path_index", "method"])]
    noise: Option<PathBuf>,
}

#[derive(Args)]
struct FbmArgs {
    #[command(flatten)]
    noise: NoiseArgs,
    /// Write the text path archive instead of CSV.
    #[arg(long)]
    archive: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpecArgs {
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, value_enum, default_value_t = Scheme::Implicit)]
    scheme: Scheme,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    noise: NoiseArgs,
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LadderArgs {
    #[command(flatten)]
    noise: NoiseArgs,
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long)]
    eps0: Option<f64>,
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long)]
    depth: Option<usize>,
    /// Zero noise with X0 = a = 1, b = 0, H = 1/4 and a ladder deep enough
    /// to match the closed-form solution; explicit flags still override.
    #[arg(long)]
    deterministic: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config and the environment).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Stored report; defaults to report.json in the output directory.
    #[arg(long)]
    input: Option<PathBuf>,
}

fn output_dir() -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

fn target(out: Option<PathBuf>, default_name: &str) -> Result<PathBuf> {
    let path = out.unwrap_or_else(|| output_dir().join(default_name));
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("creating {}", parent.display()))?;
    }
    Ok(path)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// Noise from an archive, or sampled from the flags (`zero` forces a zero path).
fn noise(args: &NoiseArgs, defaults: (f64, usize, f64), zero: bool) -> Result<FbmPath<f64>> {
    if let Some(path) = &args.noise {
        let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        return Ok(read_path_archive(std::io::BufReader::new(f))?);
    }
    let hurst = HurstParam::new(args.hurst.unwrap_or(defaults.0)).context("--hurst")?;
    let grid = TimeGrid::new(
        args.horizon.unwrap_or(defaults.2),
        args.steps.unwrap_or(defaults.1),
    )
    .context("--steps/--horizon")?;
    if zero {
        return Ok(FbmPath::zero(grid, hurst));
    }
    let seed = SeedRecord::new(args.seed, args.path_index);
    Ok(generate_fbm(grid, hurst, seed, args.method.into())?)
}

fn spec(args: &SpecArgs, hurst: HurstParam<f64>, defaults: [f64; 4]) -> Result<SdeSpec<f64>> {
    Ok(SdeSpec::new(
        args.x0.unwrap_or(defaults[0]),
        args.a.unwrap_or(defaults[1]),
        args.b.unwrap_or(defaults[2]),
        args.sigma.unwrap_or(defaults[3]),
        hurst,
    )?)
}

/// `fbm --noise` re-exports an existing archive.
fn copy_archive(args: &FbmArgs) -> Result<ExitCode> {
    let path = noise(&args.noise, (0.25, 1, 1.0), false)?;
    write_fbm(&path, args.archive, args.out.clone())?;
    Ok(ExitCode::SUCCESS)
}

fn write_fbm(path: &FbmPath<f64>, archive: bool, out: Option<PathBuf>) -> Result<()> {
    let name = if archive { "fbm.path" } else { "fbm.csv" };
    let out = target(out, name)?;
    let mut w = create(&out)?;
    if archive {
        write_path_archive(path, &mut w)?;
    } else {
        write_path_csv(path, &mut w)?;
    }
    w.flush()?;
    eprintln!("wrote {} ({} nodes)", out.display(), path.values.len());
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Fbm(args) => {
            let (Some(hurst), Some(steps)) = (args.noise.hurst, args.noise.steps) else {
                if args.noise.noise.is_none() {
                    eprintln!("error: fbm needs --hurst and --steps (or --noise)");
                    return Ok(ExitCode::from(USAGE));
                }
                return copy_archive(&args);
            };
            let path = noise(&args.noise, (hurst, steps, 1.0), false)?;
            write_fbm(&path, args.archive, args.out)?;
        }
        Command::Solve(args) => {
            let b = noise(&args.noise, (0.25, 1024, 1.0), false)?;
            let spec = spec(&args.spec, b.hurst, [1.0, 1.0, 0.0, 1.0])?;
            let sol = solve_regularized_with(&spec, args.eps, &b, args.spec.scheme.into())?;
            let out = target(args.out, "solution.csv")?;
            let mut w = create(&out)?;
            let extra = [
                ("steps", b.grid.steps().to_string()),
                ("horizon", b.grid.horizon().to_string()),
                ("generator", b.generator.to_string()),
            ];
            write_solution_csv(&sol, &b, &extra, &mut w)?;
            w.flush()?;
            eprintln!("wrote {}", out.display());
        }
        Command::Ladder(args) => {
            let (noise_defaults, ladder_defaults) = if args.deterministic {
                ((0.25, 4096, 1.0), (0.1, 0.25, 12))
            } else {
                ((0.25, 1024, 1.0), (0.1, 0.5, 10))
            };
            let b = noise(&args.noise, noise_defaults, args.deterministic)?;
            let spec = spec(&args.spec, b.hurst, [1.0, 1.0, 0.0, 1.0])?;
            let ladder = EpsilonLadder::new(
                args.eps0.unwrap_or(ladder_defaults.0),
                args.ratio.unwrap_or(ladder_defaults.1),
                args.depth.unwrap_or(ladder_defaults.2),
            )?;
            let family = build_family(&spec, &b, ladder)?;
            let out = target(args.out, "family.csv")?;
            let mut w = create(&out)?;
            write_family_csv(&family, &mut w)?;
            w.flush()?;
            eprintln!(
                "wrote {} (cauchy gap {:.3e}, {} ordering violations)",
                out.display(),
                family.cauchy_gap,
                family.monotonicity.violations
            );
        }
        Command::Verify(args) => {
            let config = match ExperimentConfig::load(&args.config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return Ok(ExitCode::from(USAGE));
                }
            };
            let dir = args.out.unwrap_or_else(|| config.resolve_output_dir());
            let report = run_campaign(&config, Some(&dir))?;
            print!("{}", report.render_table());
            eprintln!("report written to {}", dir.join("report.json").display());
            if !report.passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Report(args) => {
            let path = args
                .input
                .unwrap_or_else(|| output_dir().join("report.json"));
            let report = VerificationReport::load(&path)
                .with_context(|| format!("reading {}", path.display()))?;
            print!("{}", report.render_table());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
