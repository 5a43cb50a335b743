use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use supercurves::cli;

/// Exact verification of Serre duality, Abel's theorem, and effectivity on
/// 1|q supercurves over a thick superpoint.
#[derive(Parser)]
#[command(name = "supercurves", version)]
struct Args {
    /// Scenario file to run.
    #[arg(long, conflicts_with = "catalog")]
    scenario: Option<PathBuf>,

    /// Run the built-in catalog instead of a scenario file.
    #[arg(long)]
    catalog: bool,

    /// Seed for the randomized suites.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Multiplier applied to every truncation parameter.
    #[arg(long, default_value_t = 1)]
    bounds_scale: i64,

    /// Also write the JSON report to this path.
    #[arg(long)]
    json: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let outcome = if args.catalog {
        cli::run_catalog(args.seed, args.bounds_scale)
    } else if let Some(path) = &args.scenario {
        std::fs::read_to_string(path)
            .map_err(|e| supercurves::Error::Precondition(format!("cannot read {path:?}: {e}")))
            .and_then(|text| {
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "scenario".to_string());
                let sc = cli::parse_scenario(&name, &text)?;
                cli::run(&sc, args.seed, args.bounds_scale)
            })
    } else {
        eprintln!("error: pass --scenario <path> or --catalog");
        return ExitCode::from(2);
    };
    match outcome {
        Ok((report, falsified)) => {
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            println!("{text}");
            if let Some(path) = &args.json {
                if let Err(e) = std::fs::write(path, format!("{text}\n")) {
                    eprintln!("error: cannot write {path:?}: {e}");
                    return ExitCode::from(2);
                }
            }
            if falsified {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
