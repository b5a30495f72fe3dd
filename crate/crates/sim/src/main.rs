use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use eqf_sim::checks::run_checks;
use eqf_sim::export::{write_charts, write_rows, write_summary};
use eqf_sim::runner::{aggregate, monte_carlo, FilterKind, RunRecord, Summary};
use eqf_sim::{SimConfig, SimError};

#[derive(Parser)]
#[command(name = "eqf", version, about = "Equivariant filter simulations for bearing and range tracking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One noise realization; writes run.csv and charts.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte-Carlo comparison; writes runs.csv, summary.csv and charts.
    Compare {
        #[arg(long, value_delimiter = ',')]
        filters: Option<Vec<FilterKind>>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Runs the property checks and prints residual maxima.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

fn load(config: Option<&Path>, seed: Option<u64>) -> Result<SimConfig, SimError> {
    let mut cfg = match config {
        Some(p) => SimConfig::load(p)?,
        None => SimConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn create_dir(out: &Path) -> Result<(), SimError> {
    std::fs::create_dir_all(out).map_err(|e| SimError::io(out, e))
}

fn write_outputs(out: &Path, records: &[RunRecord], summary: &Summary) -> Result<(), SimError> {
    create_dir(out)?;
    let rows: Vec<_> = records.iter().flat_map(|r| r.rows.iter().cloned()).collect();
    let runs_path = out.join("runs.csv");
    let file = File::create(&runs_path).map_err(|e| SimError::io(&runs_path, e))?;
    write_rows(&rows, BufWriter::new(file))?;
    let summary_path = out.join("summary.csv");
    let file = File::create(&summary_path).map_err(|e| SimError::io(&summary_path, e))?;
    write_summary(summary, BufWriter::new(file))?;
    write_charts(summary, out)
}

fn report(summary: &Summary, duration: f64) {
    println!("{} runs", summary.runs);
    println!(
        "{:<12} {:>12} {:>12} {:>14} {:>12} {:>12} {:>14}",
        "filter", "pos[0,1]", "vel[0,1]", "energy[0,1]", "pos[5,T]", "vel[5,T]", "t(pos<1m)"
    );
    for (kind, c) in &summary.curves {
        let below = c
            .first_below(&c.mean_pos_err, 1.0)
            .map_or_else(|| "never".to_string(), |t| format!("{t:.2}"));
        println!(
            "{:<12} {:>12.4} {:>12.4} {:>14.4} {:>12.4} {:>12.4} {:>14}",
            kind.name(),
            c.window_mean(&c.mean_pos_err, 0.0, 1.0),
            c.window_mean(&c.mean_vel_err, 0.0, 1.0),
            c.window_mean(&c.mean_energy, 0.0, 1.0),
            c.window_mean(&c.mean_pos_err, 5.0, duration),
            c.window_mean(&c.mean_vel_err, 5.0, duration),
            below
        );
    }
    if !summary.failures.is_empty() {
        println!("{} filter runs stopped early:", summary.failures.len());
        for f in summary.failures.iter().take(10) {
            println!("  run {} {} at t={:.2}: {}", f.run, f.filter, f.t, f.message);
        }
    }
}

fn run(cli: Cli) -> Result<bool, SimError> {
    match cli.command {
        Command::Simulate { config, seed, out } => {
            let cfg = load(config.as_deref(), seed)?;
            let records = monte_carlo(&cfg, 1, &cfg.filters)?;
            let summary = aggregate(&records, &cfg.filters);
            write_outputs(&out, &records, &summary)?;
            report(&summary, cfg.duration);
            Ok(true)
        }
        Command::Compare { filters, runs, config, seed, out } => {
            let mut cfg = load(config.as_deref(), seed)?;
            if let Some(f) = filters {
                cfg.filters = f;
            }
            if let Some(n) = runs {
                cfg.runs = n;
            }
            cfg.validate()?;
            let records = monte_carlo(&cfg, cfg.runs, &cfg.filters)?;
            let summary = aggregate(&records, &cfg.filters);
            write_outputs(&out, &records, &summary)?;
            report(&summary, cfg.duration);
            Ok(true)
        }
        Command::Check { seed, samples } => {
            let results = run_checks(seed, samples)?;
            let mut ok = true;
            for r in &results {
                ok &= r.passed();
                println!(
                    "{} {:<38} max residual {:.3e} (tolerance {:.0e}, {} samples)",
                    if r.passed() { "PASS" } else { "FAIL" },
                    r.name,
                    r.max_residual,
                    r.tolerance,
                    r.samples
                );
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
