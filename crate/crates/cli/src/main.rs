use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use einstein_deform::error::Error;
use einstein_deform::geometry::{classify_background, curvature_pack};
use einstein_deform::harness::sampling::{sample_points, stream};
use einstein_deform::harness::suites::CLASSIFY_TOLERANCE;
use einstein_deform::harness::{
    emit_classifications, emit_report, resolve_backgrounds, run_suite, ClassificationDump, CurvatureDump, Format,
    OracleConfig,
};
use einstein_deform::metric_dsl::{builtin_catalog, default_params, documented_status, MetricSpec, Params, BUILTIN_NAMES};

const EXIT_ERROR: u8 = 2;
const EXIT_USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "eindef", version, about = "Verify Killing, Calabi and Einstein-deformation operators on explicit metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and emit a report.
    Verify(VerifyArgs),
    /// Dump metric, connection and curvature at one point.
    Curvature(CurvatureArgs),
    /// Decide whether a background is Einstein or of constant curvature.
    Classify(ClassifyArgs),
    /// List the builtin backgrounds.
    ListBackgrounds,
}

#[derive(Args)]
struct BackgroundArgs {
    /// Builtin name, `all`, or a path to a `.metric` file.
    #[arg(long, default_value = "all")]
    background: String,
    #[arg(long)]
    dim: Option<usize>,
    /// Parameter override, e.g. `--param r=2`. Repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
}

impl BackgroundArgs {
    fn resolve(&self) -> Result<Vec<MetricSpec>, Error> {
        let overrides: Params = self.params.iter().cloned().collect();
        resolve_backgrounds(&self.background, self.dim, &overrides)
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// complex, dichotomy, perturbation, kernel, internal, gauge or all.
    #[arg(long, default_value = "all")]
    suite: String,
    #[command(flatten)]
    background: BackgroundArgs,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    points: usize,
    #[arg(long, default_value_t = 4)]
    jet_order: usize,
    /// Strictly decreasing, comma separated.
    #[arg(long, value_delimiter = ',')]
    epsilons: Option<Vec<f64>>,
    /// Number of the smallest epsilons used in slope fits.
    #[arg(long)]
    slope_window: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct CurvatureArgs {
    #[command(flatten)]
    background: BackgroundArgs,
    /// Comma separated coordinates.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    point: Vec<f64>,
    #[arg(long, default_value_t = 4)]
    jet_order: usize,
    #[arg(long, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    background: BackgroundArgs,
    #[arg(long, default_value_t = 20)]
    points: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "json")]
    format: Format,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected name=value")?;
    let v: f64 = v.trim().parse().map_err(|e| format!("bad value `{v}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

/// Errors caused by what the user asked for rather than by evaluation.
fn is_usage(e: &Error) -> bool {
    matches!(
        e,
        Error::UnknownBackground(_)
            | Error::BadDimension { .. }
            | Error::MissingParam { .. }
            | Error::Syntax { .. }
            | Error::Semantic { .. }
            | Error::UnknownSymbol(_)
            | Error::UnknownSuite(_)
            | Error::InvalidConfig(_)
            | Error::Io(_)
    )
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("eindef: {e}");
    ExitCode::from(if is_usage(e) { EXIT_USAGE } else { EXIT_ERROR })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Verify(a) => verify(a),
        Command::Curvature(a) => curvature(a),
        Command::Classify(a) => classify(a),
        Command::ListBackgrounds => {
            print!("{}", list_backgrounds());
            Ok(ExitCode::SUCCESS)
        }
    };
    result.unwrap_or_else(|e| fail(&e))
}

fn write_out(text: &str, output: Option<&PathBuf>) -> Result<(), Error> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verify(a: VerifyArgs) -> Result<ExitCode, Error> {
    let mut config = OracleConfig {
        seed: a.seed,
        points_per_background: a.points,
        jet_order: a.jet_order,
        slope_window: a.slope_window,
        ..OracleConfig::default()
    };
    if let Some(e) = a.epsilons {
        config.epsilons = e;
    }
    config.validate()?;
    let backgrounds = a.background.resolve()?;
    let bundle = run_suite(&a.suite, &config, &backgrounds)?;
    write_out(&emit_report(&bundle, a.format), a.output.as_ref())?;
    if a.output.is_some() {
        eprintln!(
            "{}: {} reports, {}",
            a.suite,
            bundle.reports.len(),
            bundle.status().label()
        );
    }
    Ok(ExitCode::from(bundle.exit_code()))
}

fn curvature(a: CurvatureArgs) -> Result<ExitCode, Error> {
    let specs = a.background.resolve()?;
    let [spec] = specs.as_slice() else {
        eprintln!("eindef: --background must name exactly one metric (add --dim)");
        return Ok(ExitCode::from(EXIT_USAGE));
    };
    if a.point.len() != spec.dim {
        eprintln!("eindef: --point needs {} coordinates, got {}", spec.dim, a.point.len());
        return Ok(ExitCode::from(EXIT_USAGE));
    }
    let pack = curvature_pack::<f64>(spec, &a.point, a.jet_order)?;
    print!("{}", CurvatureDump::new(&spec.name, &pack).emit(a.format));
    Ok(ExitCode::SUCCESS)
}

fn classify(a: ClassifyArgs) -> Result<ExitCode, Error> {
    let specs = a.background.resolve()?;
    let mut dumps = Vec::with_capacity(specs.len());
    for spec in &specs {
        let mut rng = stream(a.seed, &spec.name, "points");
        let points = sample_points(spec, &mut rng, a.points);
        dumps.push(ClassificationDump {
            background: spec.name.clone(),
            dim: spec.dim,
            seed: a.seed,
            certificate: classify_background(spec, &points, CLASSIFY_TOLERANCE)?,
        });
    }
    let text = emit_classifications(&dumps, a.format);
    print!("{text}");
    Ok(ExitCode::SUCCESS)
}

fn list_backgrounds() -> String {
    let mut s = format!("{:<18} {:<8} {:<14} {}\n", "name", "dims", "params", "class");
    for name in BUILTIN_NAMES {
        let dims: Vec<String> = builtin_catalog()
            .into_iter()
            .filter(|(n, _)| *n == name)
            .map(|(_, d)| d.to_string())
            .collect();
        let params: Vec<String> = default_params(name)
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        let class = match documented_status(name) {
            Some(d) if d.constant_curvature => "constant curvature",
            Some(d) if d.einstein => "Einstein",
            _ => "",
        };
        s.push_str(&format!(
            "{:<18} {:<8} {:<14} {}\n",
            name,
            dims.join(","),
            if params.is_empty() { "-".into() } else { params.join(",") },
            class
        ));
    }
    s
}
