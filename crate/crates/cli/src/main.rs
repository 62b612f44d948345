//! `qfreq`: frequency, Hopf and oscillation diagnostics for Q-valued maps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use crate::config::{parse_grid, parse_tol, Command, RunConfig};
use crate::output::OutDir;

/// A malformed invocation or configuration; exits with status 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Parser)]
#[command(name = "qfreq", version, about = "Frequency, Hopf and oscillation diagnostics for Q-valued maps")]
struct Cli {
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed of the random corpus; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Quadrature grid as `angular,radial`; overrides `grid` in the config.
    #[arg(long, value_name = "A,R", value_parser = parse_grid)]
    grid: Option<(usize, usize)>,
    /// Tolerance override `name=value`; repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE", value_parser = parse_tol)]
    tol: Vec<(String, f64)>,
}

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(outcome) if outcome.passed => ExitCode::SUCCESS,
        Ok(outcome) => {
            for row in &outcome.failures {
                eprintln!(
                    "FAIL [{}] {}: measured {:?}, bound {}{}",
                    row.anchor,
                    row.check,
                    row.measured,
                    row.bound.map(|b| format!("{b:?}")).unwrap_or_else(|| "-".into()),
                    row.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default()
                );
            }
            eprintln!("{} check(s) failed", outcome.failures.len());
            ExitCode::from(EXIT_FAIL)
        }
        Err(e) => {
            match e.downcast_ref::<UsageError>() {
                Some(u) => eprintln!("usage error: {u}"),
                None => eprintln!("error: {e:#}"),
            }
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<commands::Outcome> {
    let mut cfg = RunConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    if let Some((a, r)) = cli.grid {
        cfg.grid.angular = Some(a);
        cfg.grid.radial = Some(r);
    }
    for (name, value) in &cli.tol {
        cfg.tolerances.insert(name.clone(), *value);
    }
    let settings = cfg.suite_settings()?;
    let out_dir = match (&cli.out, &cfg.out) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => cfg.resolve(p),
        (None, None) => PathBuf::from("qfreq-out"),
    };
    let out = OutDir::create(&out_dir)?;
    match cli.command {
        Command::Analyze => commands::analyze(&cfg, &settings, &out),
        Command::Verify => commands::verify(&cfg, &settings, &out),
        Command::Blowup => commands::blowup(&cfg, &settings, &out),
        Command::Scan => commands::scan(&cfg, &settings, &out),
        Command::Export => commands::export(&cfg, &out),
    }
}
