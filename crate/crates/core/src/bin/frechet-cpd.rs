//! Command-line front end: `detect` on a dataset, `simulate` a power study.
//!
//! Exit codes: 0 success, 2 invalid input (flags, files, formats),
//! 3 degenerate data, 1 failure to write outputs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use frechet_cpd::inference::{DEFAULT_BOOTSTRAP_REPLICATES, DEFAULT_BRIDGE_REPLICATES};
use frechet_cpd::io::{self, DataFormat, DatasetManifest};
use frechet_cpd::segmentation::default_min_len;
use frechet_cpd::{
    binary_segmentation, run_study, run_test, BootstrapSize, CalibrationConfig, CalibrationMethod,
    CpdError, Family, ScenarioSpec, SegmentationOptions, Space,
};

#[derive(Parser)]
#[command(name = "frechet-cpd", version, about = "Change-point tests for sequences of metric-space objects")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test a dataset for a change point (or segment it).
    Detect(DetectArgs),
    /// Estimate power and change-point accuracy on synthetic scenarios.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct Calibration {
    /// Trimming fraction: splits are restricted to [c, 1 - c].
    #[arg(long, default_value_t = 0.1)]
    c: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value = "bootstrap", value_parser = ["bootstrap", "asymptotic"])]
    method: String,
    /// Bootstrap resamples or bridge paths [default: 1000 bootstrap, 100000 asymptotic].
    #[arg(long)]
    replicates: Option<usize>,
    /// Bootstrap resample size [default: sequence length].
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Calibration {
    fn config(&self) -> Result<CalibrationConfig, CpdError> {
        let method: CalibrationMethod = self.method.parse()?;
        let mut config = match method {
            CalibrationMethod::Bootstrap => CalibrationConfig::bootstrap(),
            CalibrationMethod::Asymptotic => CalibrationConfig::asymptotic(),
        };
        config.c = self.c;
        config.alpha = self.alpha;
        config.seed = self.seed;
        config.num_replicates = self.replicates.unwrap_or(match method {
            CalibrationMethod::Bootstrap => DEFAULT_BOOTSTRAP_REPLICATES,
            CalibrationMethod::Asymptotic => DEFAULT_BRIDGE_REPLICATES,
        });
        if let Some(m) = self.m {
            if method == CalibrationMethod::Asymptotic {
                return Err(CpdError::InvalidInput("--m applies to --method bootstrap only".into()));
            }
            config.bootstrap_m = BootstrapSize::Fixed(m);
        }
        config.validate().map_err(|e| flag_error("--c/--alpha/--replicates/--m", e))?;
        Ok(config)
    }
}

#[derive(Args)]
struct DetectArgs {
    /// Input file(s), read in order and concatenated.
    #[arg(long, num_args = 1.., required_unless_present = "manifest")]
    input: Vec<PathBuf>,
    /// JSON dataset manifest (alternative to --input/--format).
    #[arg(long, conflicts_with_all = ["input", "format"])]
    manifest: Option<PathBuf>,
    /// quantile_csv, histogram_csv, samples_csv, matrix_json or vector_csv.
    #[arg(long, required_unless_present = "manifest")]
    format: Option<String>,
    /// wasserstein, frobenius or euclidean; checked against the format.
    #[arg(long)]
    space: Option<String>,
    /// Expected shape; for histogram/samples input the quantile grid size.
    #[arg(long)]
    shape: Option<usize>,
    /// Clip quantiles to LO:HI instead of the observed range.
    #[arg(long, value_name = "LO:HI")]
    support: Option<String>,
    /// Convert adjacency matrices to graph Laplacians.
    #[arg(long)]
    laplacian: bool,
    #[command(flatten)]
    calibration: Calibration,
    /// Run binary segmentation for multiple change points.
    #[arg(long)]
    segment: bool,
    /// Shortest interval tested during segmentation [default: ceil(2/c) + 2].
    #[arg(long, requires = "segment")]
    min_len: Option<usize>,
    /// Halve the level at each segmentation depth.
    #[arg(long, requires = "segment")]
    bonferroni: bool,
    /// Also write the calibration replicates.
    #[arg(long)]
    dump_replicates: bool,
    #[arg(long, default_value = "frechet-cpd-out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    family: String,
    /// `start:stop:step` or a comma-separated list.
    #[arg(long)]
    param_grid: String,
    #[arg(long, default_value_t = 100)]
    runs: usize,
    #[arg(long, default_value_t = 100)]
    n1: usize,
    #[arg(long, default_value_t = 200)]
    n2: usize,
    /// Grid size, node count or dimension [default: per family].
    #[arg(long)]
    shape: Option<usize>,
    #[command(flatten)]
    calibration: Calibration,
    #[arg(long, default_value = "frechet-cpd-out")]
    out_dir: PathBuf,
}

fn flag_error(flag: &str, e: CpdError) -> CpdError {
    match e {
        CpdError::InvalidInput(msg) => CpdError::InvalidInput(format!("{flag}: {msg}")),
        other => other,
    }
}

fn parse_support(text: &str) -> Result<(f64, f64), CpdError> {
    let bad = || CpdError::InvalidInput(format!("--support: expected LO:HI, got '{text}'"));
    let (lo, hi) = text.split_once([':', ',']).ok_or_else(bad)?;
    Ok((lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?))
}

fn parse_grid(text: &str) -> Result<Vec<f64>, CpdError> {
    let bad = |why: &str| CpdError::InvalidInput(format!("--param-grid '{text}': {why}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
                return Err(bad("need start <= stop and step > 0"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| start + i as f64 * step).collect())
        }
        [list] => list.split(',').map(num).collect(),
        _ => Err(bad("expected start:stop:step or a comma-separated list")),
    }
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    io::write_text(path, text).map_err(Failure::Output)
}

enum Failure {
    Input(CpdError),
    Output(CpdError),
}

impl From<CpdError> for Failure {
    fn from(e: CpdError) -> Self {
        Failure::Input(e)
    }
}

fn detect(args: &DetectArgs) -> Result<(), Failure> {
    let config = args.calibration.config()?;
    let mut manifest = match &args.manifest {
        Some(path) => DatasetManifest::from_json_file(path)?,
        None => {
            let format: DataFormat =
                args.format.as_deref().unwrap_or_default().parse().map_err(|e| flag_error("--format", e))?;
            DatasetManifest::new(format, args.input.clone())
        }
    };
    if let Some(space) = &args.space {
        manifest.space = Some(space.parse::<Space>().map_err(|e| flag_error("--space", e))?);
    }
    if args.shape.is_some() {
        manifest.shape = args.shape;
    }
    if let Some(support) = &args.support {
        manifest.support = Some(parse_support(support)?);
    }
    manifest.laplacian |= args.laplacian;
    let dataset = io::ingest(&manifest)?;
    let seq = &dataset.sequence;

    let report = run_test(seq, &config)?;
    let out = &args.out_dir;
    let mut summary = io::report_summary(&report, &dataset);
    let json = io::to_json_string(&report)?;
    write(&out.join("report.json"), &json)?;
    write(&out.join("scan.csv"), &io::scan_csv(&report))?;
    if args.dump_replicates {
        write(&out.join("replicates.csv"), &io::replicates_csv(&report.replicates))?;
    }

    if args.segment {
        let options = SegmentationOptions {
            min_len: args.min_len.unwrap_or_else(|| default_min_len(config.c)),
            bonferroni: args.bonferroni,
        };
        let result = binary_segmentation(seq, &config, &options).map_err(|e| flag_error("--min-len", e))?;
        write(&out.join("segmentation.json"), &io::to_json_string(&result)?)?;
        write(&out.join("change_points.csv"), &io::change_points_csv(&result))?;
        summary.push_str("\nbinary segmentation: ");
        summary.push_str(&io::segmentation_summary(&result, &dataset));
    }
    write(&out.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(())
}

fn simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let config = args.calibration.config()?;
    let family: Family = args.family.parse().map_err(|e| flag_error("--family", e))?;
    if args.runs == 0 {
        return Err(CpdError::InvalidInput("--runs must be at least 1".into()).into());
    }
    let specs: Vec<ScenarioSpec> = parse_grid(&args.param_grid)?
        .into_iter()
        .map(|param| ScenarioSpec {
            family,
            n1: args.n1,
            n2: args.n2,
            param,
            shape: args.shape,
            seed: args.calibration.seed,
        })
        .collect();
    for spec in &specs {
        spec.validate().map_err(|e| flag_error("--param-grid/--n1/--n2/--shape", e))?;
    }
    let study = run_study(&specs, &config, args.runs)?;
    let csv = io::study_csv(&study);
    write(&args.out_dir.join("study.json"), &io::to_json_string(&study)?)?;
    write(&args.out_dir.join("study.csv"), &csv)?;
    print!("{csv}");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Detect(args) => detect(args),
        Command::Simulate(args) => simulate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Output(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_degenerate() { 3 } else { 2 })
        }
    }
}
