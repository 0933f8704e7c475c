use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use metastab_cli::eval::{evaluate, presets, EvalArgs};
use metastab_cli::{run, write_reports, ExperimentConfig, Overrides};

#[derive(Parser)]
#[command(name = "metastab", version, about = "Check rates of metastability against sequences and Picard orbits")]
struct Cli {
    /// Worker threads for parallel cells.
    #[arg(long, env = "METASTAB_WORKERS", global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write CSV/JSON reports.
    Run {
        config: PathBuf,
        #[arg(long)]
        orbit_cap: Option<u64>,
        #[arg(long)]
        scan_cap: Option<u64>,
        /// Report directory; overrides the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate one rate exactly.
    Eval(EvalArgs),
    /// List counterfunction presets.
    ListPresets,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match cli.command {
        Command::Run {
            config,
            orbit_cap,
            scan_cap,
            out,
        } => run_config(&config, Overrides { orbit_cap, scan_cap }, out),
        Command::Eval(args) => match evaluate(&args) {
            Ok(v) => {
                println!("{v}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
        },
        Command::ListPresets => {
            for (name, meaning) in presets() {
                println!("{name:<12} {meaning}");
            }
            ExitCode::SUCCESS
        }
    }
}

fn run_config(path: &Path, ov: Overrides, out: Option<PathBuf>) -> ExitCode {
    let outcome = ExperimentConfig::load(path)
        .map_err(anyhow::Error::from)
        .and_then(|cfg| {
            let report = run(&cfg, ov)?;
            let dir = out
                .or_else(|| cfg.output.clone())
                .unwrap_or_else(|| PathBuf::from("reports").join(&cfg.name));
            write_reports(&report, &dir)?;
            Ok((report, dir))
        });
    match outcome {
        Ok((report, dir)) => {
            let c = report.counts();
            println!(
                "{}: {} pass, {} fail, {} inconclusive; reports in {}",
                report.name,
                c.pass,
                c.fail,
                c.inconclusive,
                dir.display()
            );
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
