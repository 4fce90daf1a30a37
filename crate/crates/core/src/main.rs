use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use divcurl_lab::config::parse_config;
use divcurl_lab::runner;

/// Spectral measurement bench for div-curl products of orthonormal vector
/// fields on the periodic torus.
#[derive(Parser)]
#[command(name = "divcurl-lab", version)]
struct Cli {
    /// run the experiment described by this TOML config
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// output directory override (default: config [output].dir, else runs/<experiment>)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// master seed override
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,

    /// worker thread count for parallel builds (default: all cores)
    #[arg(long, value_name = "INT")]
    jobs: Option<usize>,

    /// list available experiments and exit
    #[arg(long)]
    list_experiments: bool,

    /// aggregate a directory of record.json files into a CSV table on stdout
    #[arg(long, value_name = "DIR")]
    report: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    #[cfg(feature = "parallel")]
    if let Some(jobs) = cli.jobs {
        // a later global-pool init is a no-op, so ignore the error
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    if cli.jobs.is_some() {
        eprintln!("note: built without the `parallel` feature; --jobs is ignored");
    }

    if cli.list_experiments {
        for name in runner::list_experiments() {
            println!("{name}");
        }
        return ExitCode::SUCCESS;
    }

    if let Some(dir) = &cli.report {
        return match runner::report(dir) {
            Ok(csv) => {
                print!("{csv}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("report failed: {e}");
                ExitCode::from(2)
            }
        };
    }

    let Some(config_path) = &cli.config else {
        eprintln!("error: --config PATH is required (or use --list-experiments / --report)");
        return ExitCode::from(2);
    };
    let text = match std::fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", config_path.display());
            return ExitCode::from(2);
        }
    };
    let config = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    match runner::run_config(&config, cli.out.as_deref(), cli.seed) {
        Ok(outcome) => {
            println!(
                "{} -> {} ({} ms)",
                outcome.record.name,
                outcome.out_dir.display(),
                outcome.record.wall_clock_ms
            );
            for gate in &outcome.record.gates {
                println!(
                    "  {} {}: value {} threshold {:?}",
                    if gate.passed { "PASS" } else { "FAIL" },
                    gate.name,
                    gate.value.map_or("absent".into(), |v| format!("{v:.6}")),
                    gate.threshold
                );
            }
            if outcome.gates_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("run failed: {e}");
            ExitCode::from(1)
        }
    }
}
