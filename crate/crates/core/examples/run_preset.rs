//! Runs a shipped preset through the experiment runner and prints the report
//! summary. Files land in a temporary directory unless one is given.
//!
//! `cargo run --release --example run_preset -- single_qubit_check [out-dir]`

use std::path::PathBuf;

use otoc_lab::experiments::{self, presets_dir, RunConfig, RunOptions};

fn main() -> otoc_lab::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "single_qubit_check".into());
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("otoc-lab-example").join(&name));

    let cfg = RunConfig::from_path(&presets_dir().join(format!("{name}.toml")))?;
    let opts = RunOptions {
        output_dir: Some(out.clone()),
        ..RunOptions::default()
    };
    println!("{}", experiments::validate(&cfg, &opts)?);
    let report = experiments::run(&cfg, &opts)?;
    println!("status {} -> {}", report.status, out.display());
    for file in &report.files {
        let cols: Vec<String> = file
            .columns
            .iter()
            .map(|c| format!("{} [{}]", c.name, c.unit))
            .collect();
        println!("  {}: {}", file.name, cols.join(", "));
    }
    for check in &report.checks {
        println!(
            "  check {:<28} {} ({:.3e} vs {:.3e})",
            check.name,
            if check.passed { "pass" } else { "FAIL" },
            check.value,
            check.threshold
        );
    }
    if let Some(fit) = report.growth_fit {
        println!(
            "  growth rate {:.4} over [{:.2}, {:.2}]",
            fit.rate, fit.t_start, fit.t_end
        );
    }
    Ok(())
}
