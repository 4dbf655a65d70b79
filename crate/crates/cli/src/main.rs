mod args;
mod config;
mod error;
mod experiments;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use error::{CliError, CliResult};
use output::Output;

fn parse(argv: Vec<String>) -> CliResult<Option<Cli>> {
    match Cli::try_parse_from(argv) {
        Ok(cli) => Ok(Some(cli)),
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            e.print()?;
            Ok(None)
        }
        Err(e) => Err(CliError::usage(e.render().to_string().trim_end())),
    }
}

/// Re-parses an experiment file; flags given on the command line win.
fn from_config(cli: &Cli, path: &std::path::Path) -> CliResult<Option<Cli>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let mut argv = config::argv_from_config(&text)?;
    if let Some(t) = cli.threads {
        argv.extend(["--threads".into(), t.to_string()]);
    }
    if let Some(out) = &cli.out {
        argv.extend(["--out".into(), out.display().to_string()]);
    }
    if cli.summary {
        argv.push("--summary".into());
    }
    parse(argv)
}

fn run() -> CliResult<()> {
    let Some(mut cli) = parse(std::env::args().collect())? else {
        return Ok(());
    };
    if let Command::Run(r) = &cli.command {
        match from_config(&cli, &r.config.clone())? {
            Some(c) => cli = c,
            None => return Ok(()),
        }
    }
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::usage(e.to_string()))?;
    }

    let dir = output::resolve_dir(cli.out.as_deref());
    let mut out = Output::new(dir, cli.command.name(), experiments::config_of(&cli.command)?)?;
    let outcome = experiments::dispatch(&cli.command, &mut out)?;
    out.json(&format!("{}.json", outcome.stem), &outcome.results)?;

    if cli.summary {
        println!("{}", serde_json::to_string_pretty(&out.summary_document(&outcome.results))?);
    } else {
        for line in &outcome.lines {
            println!("{line}");
        }
        for path in out.written() {
            println!("wrote {}", path.display());
        }
    }
    match outcome.failed {
        Some(msg) => Err(CliError::checks_failed(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            e.report();
            ExitCode::from(e.code)
        }
    }
}
