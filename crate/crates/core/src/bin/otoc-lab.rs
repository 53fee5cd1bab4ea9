use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use otoc_lab::experiments::{self, exit, RunConfig, RunOptions, OUTPUT_ROOT_ENV};
use otoc_lab::hilbert::DEFAULT_MEMORY_CAP;

/// Runs OTOC experiments from TOML configs.
#[derive(Parser)]
#[command(version, about, after_help = format!(
    "Output goes to --output-dir, else the config's output.dir, else ${OUTPUT_ROOT_ENV}/<experiment>.\n\
     Exit codes: 0 ok, 2 config error, 3 resource refusal, 4 numerical validation failure,\n\
     5 file i/o error, 6 invalid model spec."
))]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Overrides {
    /// Directory for CSV files and report.json.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Largest dense matrix allowed, in bytes; accepts K, M and G suffixes (powers of 1024).
    #[arg(long, value_parser = parse_bytes)]
    memory_cap: Option<u128>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Runs the experiment described by a config file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Lists the available experiments.
    List,
    /// Checks a config and the memory it would need, without running it.
    Validate {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn parse_bytes(text: &str) -> Result<u128, String> {
    let text = text.trim();
    let (digits, shift) = match text.chars().last().map(|c| c.to_ascii_uppercase()) {
        Some('K') => (&text[..text.len() - 1], 10),
        Some('M') => (&text[..text.len() - 1], 20),
        Some('G') => (&text[..text.len() - 1], 30),
        _ => (text, 0),
    };
    let value: u128 = digits.parse().map_err(|_| format!("'{text}' is not a byte count"))?;
    Ok(value << shift)
}

impl Overrides {
    fn options(&self) -> RunOptions {
        RunOptions {
            output_dir: self.output_dir.clone(),
            seed: self.seed,
            memory_cap: self.memory_cap.unwrap_or(DEFAULT_MEMORY_CAP),
        }
    }

    fn install_threads(&self) {
        if let Some(n) = self.threads {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("could not size the thread pool: {e}");
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::List => {
            print!("{}", experiments::list_experiments());
            Ok(())
        }
        Command::Validate { config, overrides } => RunConfig::from_path(config)
            .and_then(|cfg| experiments::validate(&cfg, &overrides.options()))
            .map(|diag| println!("{diag}")),
        Command::Run { config, overrides } => {
            overrides.install_threads();
            RunConfig::from_path(config).and_then(|cfg| {
                let opts = overrides.options();
                let dir = opts.resolve_output(&cfg);
                let report = experiments::run(&cfg, &opts);
                if let Ok(report) = &report {
                    println!("{}: {} -> {}", report.experiment, report.status, dir.display());
                    for check in report.checks.iter().filter(|c| !c.passed) {
                        println!(
                            "  soft check '{}' did not pass ({:.3e} vs {:.3e})",
                            check.name, check.value, check.threshold
                        );
                    }
                }
                report.map(|_| ())
            })
        }
    };
    match outcome {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(experiments::exit_code(&e) as u8)
        }
    }
}
