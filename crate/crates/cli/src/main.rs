mod args;
mod commands;
mod config;
mod error;

use std::ffi::OsString;

use clap::Parser;
use serde::Serialize;

use crate::args::Cli;
use crate::commands::{dispatch, write_file, Ctx};
use crate::config::{merge_config, resolve_out_dir, ConfigFile, OutDirSource, OUT_DIR_ENV};
use crate::error::CliError;

#[derive(Serialize)]
struct ResolvedConfig<'a> {
    version: &'static str,
    command: &'a args::Command,
    out_dir: String,
    out_dir_source: OutDirSource,
    config_file: Option<String>,
    workers: usize,
}

fn main() {
    std::process::exit(run(std::env::args_os().collect()));
}

fn run(argv: Vec<OsString>) -> i32 {
    let outcome = merge_config(argv).and_then(|(argv, cfg)| match Cli::try_parse_from(argv) {
        Ok(cli) => execute(&cli, &cfg).map(|()| 0),
        Err(e) => {
            // --help and --version print to stdout and succeed.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            Ok(code)
        }
    });
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("gtgbm: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli, cfg: &ConfigFile) -> Result<(), CliError> {
    if cli.workers == Some(0) {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    let (out_dir, source) = resolve_out_dir(cli.out_dir.as_deref(), std::env::var_os(OUT_DIR_ENV), cfg);
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", out_dir.display())))?;
    let ctx = Ctx { out_dir };
    gtgbm::boosting::with_workers(cli.workers, || {
        let echo = ResolvedConfig {
            version: env!("CARGO_PKG_VERSION"),
            command: &cli.command,
            out_dir: ctx.out_dir.display().to_string(),
            out_dir_source: source,
            config_file: cfg.path.as_ref().map(|p| p.display().to_string()),
            workers: gtgbm::boosting::current_workers(),
        };
        let text = serde_json::to_string_pretty(&echo).expect("config serializes") + "\n";
        write_file(&ctx.out_dir.join(format!("{}.config.json", command_name(&cli.command))), &text)?;
        dispatch(&cli.command, &ctx)
    })?
}

/// `train`, `experiment-timing`, ...
fn command_name(cmd: &args::Command) -> &'static str {
    use args::{Command as C, Experiment as E};
    match cmd {
        C::Train(_) => "train",
        C::Predict(_) => "predict",
        C::Evaluate(_) => "evaluate",
        C::Select(_) => "select",
        C::Experiment { which } => match which {
            E::PhaseGrid(_) => "experiment-phase-grid",
            E::Isolation(_) => "experiment-isolation",
            E::Timing(_) => "experiment-timing",
            E::Topk(_) => "experiment-topk",
            E::Correlations(_) => "experiment-correlations",
        },
    }
}
