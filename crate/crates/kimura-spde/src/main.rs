//! Thin experiment CLI:
//!
//!   kimura-spde <command> --config <path> [--out <dir>] [--seed <u64>] [--threads <n>]
//!
//! Commands: identities | chaos | mc | ratio | holder | bounds | all.
//! Exit status 0 iff every asserted bound holds within the configured slack.

use kimura_spde::cli::{parse_config, write_artifacts, Command, ExperimentConfig};
use std::path::PathBuf;
use std::process::ExitCode;

fn usage() -> ! {
    eprintln!(
        "usage: kimura-spde <identities|chaos|mc|ratio|holder|bounds|all> \
         --config <path> [--out <dir>] [--seed <u64>] [--threads <n>]"
    );
    std::process::exit(2);
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() {
        usage();
    }
    let command = match Command::parse(&args[0]) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            usage();
        }
    };
    let mut config_path: Option<PathBuf> = None;
    let mut out_dir = PathBuf::from("out");
    let mut seed_override: Option<u64> = None;
    let mut threads: Option<usize> = None;
    let mut it = args[1..].iter();
    while let Some(flag) = it.next() {
        let mut value = || it.next().cloned().unwrap_or_else(|| usage());
        match flag.as_str() {
            "--config" => config_path = Some(PathBuf::from(value())),
            "--out" => out_dir = PathBuf::from(value()),
            "--seed" => match value().parse() {
                Ok(s) => seed_override = Some(s),
                Err(_) => usage(),
            },
            "--threads" => match value().parse() {
                Ok(n) => threads = Some(n),
                Err(_) => usage(),
            },
            _ => usage(),
        }
    }

    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("thread pool: {e}");
            return ExitCode::from(2);
        }
    }

    let text = match &config_path {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("reading {}: {e}", path.display());
                return ExitCode::from(2);
            }
        },
        None => String::new(),
    };
    let mut config: ExperimentConfig = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = seed_override {
        config.seed = seed;
    }

    match kimura_spde::cli::run(command, &config) {
        Ok(artifacts) => {
            if let Err(e) = write_artifacts(&out_dir, &artifacts) {
                eprintln!("{e}");
                return ExitCode::from(2);
            }
            let failed: Vec<_> = artifacts
                .ledger
                .iter()
                .filter(|r| r.margin < 0.0)
                .collect();
            println!(
                "{}: {} ledger rows, {} failed; artifacts in {}",
                command.name(),
                artifacts.ledger.len(),
                failed.len(),
                out_dir.display()
            );
            for row in failed.iter().take(10) {
                println!(
                    "  FAIL {} at (z = {:.6}, t = {:.6}): value {:.6e} vs bound {:.6e}",
                    row.bound_name, row.z, row.t, row.value, row.bound_with_slack
                );
            }
            if artifacts.exit_ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}
