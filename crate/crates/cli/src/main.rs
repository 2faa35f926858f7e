//! `bia`: runs the rate and block-length experiments, dumps and verifies BIA schedules.
//!
//! Exit status: 0 on success, 1 on invalid input or a failed verification, 2 on I/O errors.

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bia_core::harness::{
    load_config, run_fig5, run_fig6, run_scenario, write_block_lengths, write_experiment, HarnessError, ScenarioConfig,
};
use bia_core::{build_schedule, verify_decodability};
use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "bia", version, about = "Blind interference alignment simulator for indoor optical wireless networks")]
struct Cli {
    /// Scenario file of `key = value` lines; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory for CSV files.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Monte Carlo drops, overriding the config.
    #[arg(long, global = true, value_name = "N")]
    drops: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mean user rate versus number of groups (G = 1 ..= fig5_groups_max).
    Fig5,
    /// Transmission block length versus number of users (K = 1 ..= fig6_users_max).
    Fig6,
    /// Single evaluation of the configured topology and group count.
    Run,
    /// Prints the slot-by-slot mode schedule for L APs and K users.
    DumpSchedule {
        #[arg(long, value_name = "L")]
        aps: usize,
        #[arg(long, value_name = "K")]
        users: usize,
    },
    /// Checks the structural decodability conditions for every L in 2..=max-aps and K in 1..=max-users.
    Verify {
        #[arg(long, value_name = "L", default_value_t = 6)]
        max_aps: usize,
        #[arg(long, value_name = "K", default_value_t = 5)]
        max_users: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn config(cli: &Cli) -> Result<ScenarioConfig, HarnessError> {
    let mut cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(drops) = cli.drops {
        cfg.drops = drops;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn stdout_error(source: io::Error) -> HarnessError {
    HarnessError::Io { context: "cannot write to stdout".into(), source }
}

fn report(paths: &[PathBuf], notes: &[String]) -> Result<(), HarnessError> {
    for note in notes {
        eprintln!("note: {note}");
    }
    let mut out = io::stdout().lock();
    for p in paths {
        writeln!(out, "{}", p.display()).map_err(stdout_error)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, HarnessError> {
    let out: &Path = &cli.out;
    match &cli.command {
        Command::Fig5 => {
            let cfg = config(&cli)?;
            let result = run_fig5(&cfg, 1..=cfg.fig5_groups_max)?;
            report(&write_experiment(out, "fig5", &result)?, &result.notes)?;
        }
        Command::Fig6 => {
            let cfg = config(&cli)?;
            let result = run_fig6(&cfg, 1..=cfg.fig6_users_max)?;
            report(&[write_block_lengths(out, "fig6", &result)?], &result.notes)?;
        }
        Command::Run => {
            let cfg = config(&cli)?;
            let result = run_scenario(&cfg)?;
            report(&write_experiment(out, "run", &result)?, &result.notes)?;
        }
        Command::DumpSchedule { aps, users } => {
            let schedule = build_schedule(*aps, *users)?;
            let mut stdout = io::BufWriter::new(io::stdout().lock());
            schedule.write_dump(&mut stdout).and_then(|()| stdout.flush()).map_err(stdout_error)?;
        }
        Command::Verify { max_aps, max_users } => {
            let mut all_passed = true;
            let mut stdout = io::stdout().lock();
            for l in 2..=*max_aps {
                for k in 1..=*max_users {
                    let verdict = verify_decodability(&build_schedule(l, k)?);
                    all_passed &= verdict.all_passed();
                    write!(stdout, "{verdict}").map_err(stdout_error)?;
                }
            }
            if !all_passed {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
