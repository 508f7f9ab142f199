//! `pframe`: certify, construct and analyze periodic wavelet frames.

mod config;
mod report;
mod run;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use periodic_frames::Verdict;

use config::{Mode, Overrides};
use run::CliError;

const EXIT_CONFIG: u8 = 64;

#[derive(Debug, Parser)]
#[command(name = "pframe", version, about = "Certify, construct and analyze periodic wavelet tight frames")]
struct Args {
    /// `[MODE] [CONFIG]`: mode name and/or TOML configuration file.
    #[arg(value_name = "MODE|CONFIG", num_args = 0..=2)]
    positional: Vec<String>,
    /// TOML configuration file.
    #[arg(long = "config", value_name = "PATH")]
    config_flag: Option<PathBuf>,
    #[arg(long = "mode", value_enum, value_name = "MODE")]
    mode_flag: Option<Mode>,
    /// Truncation horizon J.
    #[arg(long)]
    horizon: Option<u32>,
    /// Equality tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Seed for every random draw.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for reports.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code(v: Verdict) -> u8 {
    match v {
        Verdict::Pass | Verdict::Skipped => 0,
        Verdict::Fail => 1,
        Verdict::Inconclusive => 2,
    }
}

/// A leading positional that names a mode is the mode; the rest is the config path.
fn split_positional(args: &[String]) -> Result<(Option<Mode>, Option<PathBuf>), CliError> {
    let parse_mode = |s: &str| <Mode as clap::ValueEnum>::from_str(s, false).ok();
    match args {
        [] => Ok((None, None)),
        [one] => Ok(match parse_mode(one) {
            Some(m) => (Some(m), None),
            None => (None, Some(PathBuf::from(one))),
        }),
        [mode, path, ..] => match parse_mode(mode) {
            Some(m) => Ok((Some(m), Some(PathBuf::from(path)))),
            None => Err(CliError::Config(config::ConfigError(format!(
                "unknown mode `{mode}` (construct, certify, analyze, example1, example2)"
            )))),
        },
    }
}

fn execute(args: Args) -> Result<Verdict, CliError> {
    let (pos_mode, pos_config) = split_positional(&args.positional)?;
    if args.mode_flag.is_some() && pos_mode.is_some() {
        return Err(CliError::Config(config::ConfigError("mode given twice".into())));
    }
    if args.config_flag.is_some() && pos_config.is_some() {
        return Err(CliError::Config(config::ConfigError("config given twice".into())));
    }
    let path = args.config_flag.or(pos_config);
    let (raw, base_dir) = config::load(path.as_deref())?;
    let over = Overrides {
        mode: args.mode_flag.or(pos_mode),
        horizon: args.horizon,
        tol: args.tol,
        seed: args.seed,
        out: args.out,
    };
    let cfg = config::resolve(raw, base_dir, over)?;
    let outcome = run::run(&cfg)?;
    let verdict = outcome.verdict.unwrap_or(Verdict::Inconclusive);

    if let Some(dir) = &cfg.out {
        fs::create_dir_all(dir).map_err(|e| CliError::Failed(format!("cannot create {}: {e}", dir.display())))?;
        for (name, content) in &outcome.artifacts {
            let p = dir.join(name);
            fs::write(&p, content).map_err(|e| CliError::Failed(format!("cannot write {}: {e}", p.display())))?;
        }
    }
    println!("mode {}, horizon {}, seed {}", cfg.mode, cfg.horizon, cfg.seed);
    for line in &outcome.summary {
        println!("{line}");
    }
    match &cfg.out {
        Some(dir) => {
            for (name, _) in &outcome.artifacts {
                println!("wrote {}", dir.join(name).display());
            }
        }
        None => println!("no output directory given (--out); reports not written"),
    }
    println!("verdict {verdict}");
    Ok(verdict)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(args) {
        Ok(v) => ExitCode::from(exit_code(v)),
        Err(CliError::Config(e)) => {
            eprintln!("pframe: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(CliError::Failed(msg)) => {
            eprintln!("pframe: {msg}");
            ExitCode::from(1)
        }
    }
}
