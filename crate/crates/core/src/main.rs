use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gbs_core::bench::{self, BenchError, ExperimentConfig};

/// Generalized binary search: geometry reports, single searches, and
/// seeded Monte Carlo checks of the query and error bounds.
#[derive(Parser)]
#[command(name = "gbs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coherence, neighborliness and rate constants of the configured space.
    Geometry(Common),
    /// One simulated search; writes transcript.csv and summary.json.
    Run(Common),
    /// Independent seeded trials checked against the configured bound.
    Montecarlo(Common),
    /// One search answered on standard input.
    Interactive(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to the config's output_dir, then ./gbs-out.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Print nothing but errors.
    #[arg(long)]
    quiet: bool,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, BenchError> {
        let mut config = ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(trials) = self.trials {
            config.trials = trials;
        }
        config.validate()?;
        Ok(config)
    }

    fn out_dir(&self, config: &ExperimentConfig) -> Option<PathBuf> {
        self.out.clone().or_else(|| config.output_dir.as_ref().map(|d| config.base_dir.join(d)))
    }
}

fn print_json<T: serde::Serialize>(value: &T) {
    // A closed pipe (`gbs geometry ... | head`) is not an error.
    let _ = writeln!(io::stdout().lock(), "{}", serde_json::to_string_pretty(value).expect("reports serialize"));
}

fn execute(command: &Command) -> Result<bool, BenchError> {
    match command {
        Command::Geometry(c) => {
            let config = c.load()?;
            let out = c.out_dir(&config);
            let report = bench::geometry_to(config, out.as_deref())?;
            if !c.quiet {
                print_json(&report);
            }
            Ok(true)
        }
        Command::Run(c) => {
            let config = c.load()?;
            let out = c.out_dir(&config).unwrap_or_else(|| PathBuf::from("gbs-out"));
            let summary = bench::cmd_run(config, &out)?;
            if !c.quiet {
                print_json(&summary);
            }
            Ok(true)
        }
        Command::Montecarlo(c) => {
            let config = c.load()?;
            let out = c.out_dir(&config).unwrap_or_else(|| PathBuf::from("gbs-out"));
            let start = std::time::Instant::now();
            let report = bench::cmd_montecarlo(config, &out)?;
            if !c.quiet {
                print_json(&report);
                eprintln!("{} runs in {:.2} s; outputs in {}", report.runs, start.elapsed().as_secs_f64(), out.display());
            }
            Ok(report.pass)
        }
        Command::Interactive(c) => {
            let config = c.load()?;
            let out = c.out_dir(&config);
            // Prompts go to stderr so stdout carries only the summary.
            let stdin = io::stdin();
            let summary = bench::cmd_interactive(config, stdin.lock(), io::stderr(), out.as_deref())?;
            if !c.quiet {
                print_json(&summary);
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("bound violated");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
