//! Command-line driver: JSON run configs in, CSV/JSON artifacts out.
//! Exit codes: 0 success, 2 config error, 3 numerical error, 4 resource
//! error. Every failure also emits a one-line JSON diagnostic on stderr.

use clap::Parser;
use lifshitz_lab::config::load_config;
use lifshitz_lab::parallel::with_workers;
use lifshitz_lab::runner;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "lifshitz-lab",
    about = "Spectral statistics of randomly displaced lattice Schrödinger operators",
    version
)]
struct Args {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,

    /// Dotted-path overrides, e.g. --set params.theta=2 --set ids.replicates=50
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output directory for CSV/JSON artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Master seed override (shorthand for --set params.seed=N).
    #[arg(long)]
    seed: Option<u64>,

    /// Worker-thread override (shorthand for --set params.workers=N).
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut overrides = args.set.clone();
    if let Some(seed) = args.seed {
        overrides.push(format!("params.seed={seed}"));
    }
    if let Some(workers) = args.workers {
        overrides.push(format!("params.workers={workers}"));
    }
    let config = match load_config(&args.config, &overrides) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let workers = config.params.workers;
    let result = with_workers(workers, || runner::run(&config, &args.out));
    match result {
        Ok(arts) => {
            let files: Vec<String> = arts
                .files
                .iter()
                .map(|p| p.display().to_string())
                .collect();
            println!(
                "{}",
                serde_json::json!({
                    "status": "ok",
                    "resumed": arts.resumed,
                    "files": files,
                    "summary": arts.summary,
                })
            );
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &lifshitz_lab::Error) -> ExitCode {
    eprintln!(
        "{}",
        serde_json::json!({"status": "error", "kind": e.kind(), "message": e.to_string()})
    );
    ExitCode::from(e.exit_code() as u8)
}
