//! Thin command-line front end: loads a JSON config, applies flag overrides,
//! dispatches to the library commands, writes the report (JSON, plus CSV for
//! sweeps), and exits 0 iff every check passed.

use clap::{Parser, Subcommand};
use std::process::ExitCode;
use tcgame::cli::{
    cmd_code_info, cmd_extract, cmd_value, cmd_verify, render_checks, sweep_csv, Report,
    RunConfig,
};

#[derive(Parser)]
#[command(
    name = "tcgame",
    about = "Tensor-code nonlocal games: evaluation, extraction, verification"
)]
struct Cli {
    /// JSON configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<String>,
    /// RNG seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Pasting method override (1 or 2).
    #[arg(long, global = true)]
    method: Option<u8>,
    /// Method-2 repetition count override.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Monte-Carlo round count override.
    #[arg(long, global = true)]
    rounds: Option<u64>,
    /// Report output path override (CSV sweep goes to the .csv sibling).
    #[arg(long, global = true)]
    out: Option<String>,
    /// Reject unknown config fields.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Code parameters, distance, interpolability, γ table.
    CodeInfo,
    /// Exact and Monte-Carlo game value plus goodness.
    Value,
    /// Full extraction pipeline (single run or ρ sweep).
    Extract,
    /// Run the invariant suite and print the pass/fail matrix.
    Verify,
}

fn load_config(cli: &Cli) -> Result<RunConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {path}: {e}"))?;
            RunConfig::from_json(&text, cli.strict).map_err(|e| e.to_string())?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(method) = cli.method {
        cfg.extract.method = method;
    }
    if let Some(k) = cli.k {
        cfg.extract.k = Some(k);
    }
    if let Some(rounds) = cli.rounds {
        cfg.rounds = rounds;
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn emit(report: &Report) -> Result<(), String> {
    let json = report.to_json().map_err(|e| e.to_string())?;
    match &report.config.out {
        Some(path) => {
            std::fs::write(path, &json).map_err(|e| format!("cannot write {path}: {e}"))?;
            if let Some(rows) = &report.sweep {
                let csv_path = format!("{}.csv", path.trim_end_matches(".json"));
                std::fs::write(&csv_path, sweep_csv(rows))
                    .map_err(|e| format!("cannot write {csv_path}: {e}"))?;
            }
            eprintln!("report written to {path}");
        }
        None => println!("{json}"),
    }
    if let Some(rows) = &report.sweep {
        if report.config.out.is_none() {
            print!("{}", sweep_csv(rows));
        }
    }
    eprint!("{}", render_checks(report));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::CodeInfo => cmd_code_info(&cfg),
        Command::Value => cmd_value(&cfg),
        Command::Extract => cmd_extract(&cfg),
        Command::Verify => cmd_verify(&cfg),
    };
    match result {
        Ok(report) => {
            if let Err(e) = emit(&report) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if report.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
