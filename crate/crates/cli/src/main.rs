//! Binary entry point: argument parsing, dispatch, and exit-code policy.
//! Exit codes: 0 success, 1 invalid input, 2 runtime failure.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use seqab_cli::analyze::{analyze, render_csv, render_text};
use seqab_cli::config::parse_config;
use seqab_cli::csvio;
use seqab_cli::manifest::{timestamp, RunManifest};
use seqab_cli::Failure;
use seqab_core::engine::{aggregate, run_trials, ExperimentConfig, Method};

#[derive(Parser)]
#[command(
    name = "seqab",
    version,
    about = "Sequentially monitored multi-arm experiments: simulation and interim analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation campaign and write metrics, trajectories, and a manifest.
    Simulate {
        /// Campaign config file (key=value lines).
        #[arg(long)]
        config: PathBuf,
        /// Output directory, created if absent.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads for the trial pool (default: machine parallelism).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Report per-arm evidence and decisions for an observed outcome file.
    Analyze {
        /// Outcome file with header arm,outcome.
        #[arg(long)]
        data: PathBuf,
        /// Test level for the stopping decision.
        #[arg(long)]
        alpha: f64,
        /// Label of the control arm in the data.
        #[arg(long)]
        control: String,
        /// Report format.
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run both decision methods on shared seeds and write side-by-side metrics.
    Compare {
        /// Campaign config file (key=value lines).
        #[arg(long)]
        config: PathBuf,
        /// Output directory, created if absent.
        #[arg(long)]
        out: PathBuf,
    },
    /// Average a trajectories file per look and arm for plotting.
    PlotData {
        /// trajectories.csv from a simulate run.
        #[arg(long)]
        trajectories: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    if let Err(failure) = run(cli.command) {
        eprintln!("error: {failure}");
        std::process::exit(failure.exit_code());
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Simulate { config, out, workers } => simulate(&config, &out, workers),
        Command::Analyze { data, alpha, control, format } => {
            run_analyze(&data, alpha, &control, format)
        }
        Command::Compare { config, out } => compare(&config, &out),
        Command::PlotData { trajectories, out } => plot_data(&trajectories, &out),
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|err| Failure::Runtime(format!("{}: {err}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|err| Failure::Runtime(format!("{}: {err}", path.display())))
}

fn create_dir(path: &Path) -> Result<(), Failure> {
    fs::create_dir_all(path).map_err(|err| Failure::Runtime(format!("{}: {err}", path.display())))
}

fn load_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    parse_config(&read_file(path)?).map_err(|err| Failure::Invalid(err.to_string()))
}

fn invalid(err: impl std::fmt::Display) -> Failure {
    Failure::Invalid(err.to_string())
}

fn in_pool<T: Send>(
    workers: Option<usize>,
    job: impl FnOnce() -> T + Send,
) -> Result<T, Failure> {
    match workers {
        None => Ok(job()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|err| Failure::Runtime(err.to_string()))
            .map(|pool| pool.install(job)),
    }
}

fn simulate(config_path: &Path, out: &Path, workers: Option<usize>) -> Result<(), Failure> {
    let started_at = timestamp();
    let config = load_config(config_path)?;
    let results = in_pool(workers, || run_trials(&config))?.map_err(invalid)?;
    let metrics = aggregate(&results, &config);

    create_dir(out)?;
    let metrics_path = out.join("metrics.csv");
    let trajectories_path = out.join("trajectories.csv");
    write_file(&metrics_path, &csvio::metrics_csv(&metrics, config.p0))?;
    write_file(&trajectories_path, &csvio::trajectories_csv(&results))?;

    let manifest = RunManifest::new(
        "simulate",
        config,
        started_at,
        timestamp(),
        vec![
            metrics_path.display().to_string(),
            trajectories_path.display().to_string(),
        ],
    );
    write_file(&out.join("manifest.json"), &manifest.to_json())
}

fn run_analyze(data: &Path, alpha: f64, control: &str, format: Format) -> Result<(), Failure> {
    let text = read_file(data)?;
    let reports = analyze(&text, alpha, control).map_err(invalid)?;
    let rendered = match format {
        Format::Text => render_text(&reports),
        Format::Csv => render_csv(&reports),
    };
    print!("{rendered}");
    Ok(())
}

fn compare(config_path: &Path, out: &Path) -> Result<(), Failure> {
    let started_at = timestamp();
    let config = load_config(config_path)?;

    create_dir(out)?;
    let mut summary_rows = Vec::new();
    let mut outputs = Vec::new();
    for method in [Method::Proposed, Method::Jpw] {
        let mut run_config = config.clone();
        run_config.method = method;
        let results = run_trials(&run_config).map_err(invalid)?;
        let metrics = aggregate(&results, &run_config);

        let path = out.join(format!("metrics_{method}.csv"));
        write_file(&path, &csvio::metrics_csv(&metrics, run_config.p0))?;
        outputs.push(path.display().to_string());

        let nonnull: Vec<f64> =
            metrics.arms.iter().filter(|a| !a.is_null).map(|a| a.n_bar).collect();
        let avg_n_nonnull =
            (!nonnull.is_empty()).then(|| nonnull.iter().sum::<f64>() / nonnull.len() as f64);
        summary_rows.push((method, metrics.overall_error_rate, avg_n_nonnull));
    }
    let summary_path = out.join("summary.csv");
    write_file(&summary_path, &csvio::summary_csv(&summary_rows))?;
    outputs.push(summary_path.display().to_string());

    let manifest = RunManifest::new("compare", config, started_at, timestamp(), outputs);
    write_file(&out.join("manifest.json"), &manifest.to_json())
}

fn plot_data(trajectories: &Path, out: &Path) -> Result<(), Failure> {
    let rows = csvio::parse_trajectories_csv(&read_file(trajectories)?).map_err(invalid)?;
    write_file(out, &csvio::plot_data_csv(&rows))
}
