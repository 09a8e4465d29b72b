use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qliang::output::{plot, write_outputs};
use qliang::scenario::{evaluate, exit_code, ScenarioConfig};
use qliang::validate::{run_suite, ValidationSettings};
use qliang::Error;

/// Quantum Liang information flow simulator.
#[derive(Parser)]
#[command(name = "qliang", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write one CSV per flow.
    Run {
        /// Scenario JSON file.
        config: PathBuf,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the built-in self-check suite; prints one JSON object per check.
    Validate {
        /// Eigenvalue clip used inside entropies (sensitivity probe).
        #[arg(long)]
        entropy_clip: Option<f64>,
        /// Keep terms acting only on frozen sites (sensitivity probe).
        #[arg(long)]
        retain_frozen_local: bool,
    },
    /// Plot a CSV (first column time) as an SVG line chart.
    Plot {
        /// CSV with a header row; first column is time.
        input: PathBuf,
        /// SVG file to write.
        output: PathBuf,
    },
}

fn fail(err: &Error) -> ExitCode {
    eprintln!("qliang: {err}");
    ExitCode::from(exit_code(err) as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out } => {
            let result = ScenarioConfig::load(&config).and_then(|cfg| {
                let res = evaluate(&cfg)?;
                write_outputs(&cfg, &res, &out)
            });
            match result {
                Ok(paths) => {
                    for p in paths {
                        println!("{}", p.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::Validate { entropy_clip, retain_frozen_local } => {
            let mut settings = ValidationSettings { retain_frozen_local, ..Default::default() };
            if let Some(clip) = entropy_clip {
                settings.entropy_clip = clip;
            }
            let results = run_suite(&settings);
            for r in &results {
                println!("{}", serde_json::to_string(r).expect("plain struct serializes"));
            }
            if results.iter().all(|r| r.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Plot { input, output } => match plot(&input, &output) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(&e),
        },
    }
}
