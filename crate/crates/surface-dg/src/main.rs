use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use surface_dg::assembly::Variant;
use surface_dg::harness::{by_name, run_sweep, write_csv, write_json, write_svg, SweepRequest};
use surface_dg::multipatch::{topology_report, GeometryFile, MultipatchSurface};

#[derive(Parser)]
#[command(
    name = "surface-dg",
    about = "Multipatch discontinuous-Galerkin isogeometric solver for lap^2 u + u = f on NURBS surfaces",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a refinement sweep and report errors and convergence rates
    Run(RunArgs),
    /// Validate a multipatch geometry file and print its topology report
    ValidateGeometry {
        /// Geometry JSON file
        file: PathBuf,
        /// Refinement level for the mesh report
        #[arg(long, default_value_t = 0)]
        level: usize,
    },
    /// Print benchmark information
    Info {
        /// quarter-cylinder | torus | flat-patch
        #[arg(long)]
        benchmark: String,
        /// Also write the benchmark geometry to a JSON file
        #[arg(long)]
        emit_geometry: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Default, Clone)]
struct RunArgs {
    /// quarter-cylinder | torus | flat-patch
    #[arg(long)]
    benchmark: Option<String>,
    /// sipg | nipg | ssipg1 | ssipg2 | all
    #[arg(long)]
    method: Option<String>,
    /// Comma-separated solution degrees, e.g. 2,3,4
    #[arg(long)]
    degree: Option<String>,
    /// Number of meshes (levels 0..L-1); rates need at least 2
    #[arg(long)]
    levels: Option<usize>,
    /// Penalty for the gradient-jump term (default (p+1)(p+3)/3)
    #[arg(long)]
    delta0: Option<f64>,
    /// Penalty for the value-jump term (default (p+1)(p+3)/3)
    #[arg(long)]
    delta1: Option<f64>,
    /// Output directory (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Also write a log-log error plot (requires --out)
    #[arg(long)]
    plot: bool,
    /// Record wall times (makes outputs nondeterministic)
    #[arg(long)]
    timing: bool,
    /// Permit degrees above 4 (long runtimes)
    #[arg(long)]
    allow_high_degree: bool,
    /// JSON config file mirroring these flags; explicit flags win
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum OutputFormat {
    Csv,
    Json,
}

/// Config-file schema: every `run` flag, all optional.
#[derive(serde::Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RunConfigFile {
    benchmark: Option<String>,
    method: Option<String>,
    degree: Option<String>,
    levels: Option<usize>,
    delta0: Option<f64>,
    delta1: Option<f64>,
    out: Option<PathBuf>,
    format: Option<String>,
    plot: Option<bool>,
    timing: Option<bool>,
    allow_high_degree: Option<bool>,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run() -> Result<ExitCode, Box<dyn std::error::Error>> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => run_command(args),
        Command::ValidateGeometry { file, level } => validate_command(&file, level),
        Command::Info {
            benchmark,
            emit_geometry,
        } => info_command(&benchmark, emit_geometry.as_deref()),
    }
}

fn parse_methods(s: &str) -> Result<Vec<Variant>, Box<dyn std::error::Error>> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(Variant::ALL.to_vec());
    }
    let mut out = Vec::new();
    for part in s.split(',') {
        out.push(part.trim().parse::<Variant>()?);
    }
    Ok(out)
}

fn parse_degrees(s: &str) -> Result<Vec<usize>, Box<dyn std::error::Error>> {
    let mut out = Vec::new();
    for part in s.split(',') {
        out.push(part.trim().parse::<usize>()?);
    }
    if out.is_empty() {
        return Err("at least one degree required".into());
    }
    Ok(out)
}

fn run_command(args: RunArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let file: RunConfigFile = match &args.config {
        Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
        None => RunConfigFile::default(),
    };
    let benchmark = args
        .benchmark
        .or(file.benchmark)
        .unwrap_or_else(|| "quarter-cylinder".into());
    let method = args.method.or(file.method).unwrap_or_else(|| "all".into());
    let degree = args.degree.or(file.degree).unwrap_or_else(|| "2,3,4".into());
    let levels = args.levels.or(file.levels).unwrap_or(4);
    let delta0 = args.delta0.or(file.delta0);
    let delta1 = args.delta1.or(file.delta1);
    let out = args.out.or(file.out);
    let format = match (args.format, file.format.as_deref()) {
        (Some(f), _) => f,
        (None, Some("json")) => OutputFormat::Json,
        (None, Some("csv")) | (None, None) => OutputFormat::Csv,
        (None, Some(other)) => return Err(format!("unknown format '{other}' in config").into()),
    };
    let plot = args.plot || file.plot.unwrap_or(false);
    let timing = args.timing || file.timing.unwrap_or(false);
    let allow_high_degree = args.allow_high_degree || file.allow_high_degree.unwrap_or(false);

    let degrees = parse_degrees(&degree)?;
    if !allow_high_degree {
        if let Some(&p) = degrees.iter().find(|&&p| p > 4) {
            return Err(format!(
                "degree {p} exceeds the desk-scale default cap of 4; pass --allow-high-degree to run it"
            )
            .into());
        }
    }
    let request = SweepRequest {
        benchmark,
        variants: parse_methods(&method)?,
        degrees,
        levels,
        delta0,
        delta1,
        timing,
    };

    let result = run_sweep::<f64>(&request)?;
    match &out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let stem = dir.join(&request.benchmark);
            match format {
                OutputFormat::Csv => write_csv(&result, &stem.with_extension("csv"))?,
                OutputFormat::Json => write_json(&result, &stem.with_extension("json"))?,
            }
            if plot {
                write_svg(&result, &stem.with_extension("svg"))?;
            }
            eprintln!(
                "wrote {} rows to {}",
                result.rows.len(),
                dir.display()
            );
        }
        None => match format {
            OutputFormat::Csv => print!("{}", surface_dg::harness::csv_string(&result)),
            OutputFormat::Json => println!("{}", serde_json::to_string_pretty(&result)?),
        },
    }

    let failures = result.failures();
    if failures > 0 {
        eprintln!("{failures} tuple(s) failed");
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn validate_command(file: &Path, level: usize) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let geometry = GeometryFile::read(file)?;
    let mp = MultipatchSurface::<f64>::from_geometry(&geometry)?;
    let mesh = mp.refined_mesh(level)?;
    let report = topology_report(&mp, &mesh);
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(ExitCode::SUCCESS)
}

fn info_command(
    benchmark: &str,
    emit_geometry: Option<&Path>,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let bench = by_name::<f64>(benchmark, 2)?;
    let mp = MultipatchSurface::<f64>::from_geometry(&bench.geometry)?;
    let mesh = mp.refined_mesh(0)?;
    println!("benchmark: {}", bench.name);
    println!("{}", bench.description);
    println!("closed: {}", bench.closed);
    println!("{}", serde_json::to_string_pretty(&topology_report(&mp, &mesh))?);
    if let Some(path) = emit_geometry {
        bench.geometry.write(path)?;
        eprintln!("geometry written to {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}
