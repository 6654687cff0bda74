//! `cheeger`: closed forms, sampled certificates and a voxel oracle for
//! Cheeger constants of tubes and spherical shells.

mod args;
mod report;
mod run;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, FileConfig};
use run::{Context_, Failure, Output};

const EXIT_USAGE: u8 = 1;
const EXIT_COMPUTE: u8 = 2;
const EXIT_VIOLATED: u8 = 3;

fn execute(cli: Cli) -> Result<Output, Failure> {
    let mut command = cli.command;
    if let Some(path) = &cli.config {
        let file = FileConfig::load(path).map_err(Failure::Usage)?;
        command.merge(&file);
    }
    let ctx = Context_ { out_dir: cli.out_dir.clone(), timings: cli.timings };
    let output = match &command {
        Command::Tube(a) => run::tube(a, &ctx)?,
        Command::Shell(a) => run::shell(a, &ctx)?,
        Command::Certify(a) => run::certify(a, &ctx)?,
        Command::Oracle(a) => run::oracle(a, &ctx)?,
        Command::Report(a) => run::report(a, &ctx)?,
    };
    let target = match (&cli.out, &cli.out_dir) {
        (Some(p), _) => Some(ctx_path(&ctx, p)),
        (None, Some(dir)) => Some(dir.join(format!("{}.toml", command.name()))),
        (None, None) => None,
    };
    if let Some(path) = target {
        if let Some(parent) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)
                .map_err(|e| Failure::Compute(anyhow::anyhow!("creating {}: {e}", parent.display())))?;
        }
        std::fs::write(&path, &output.report)
            .map_err(|e| Failure::Compute(anyhow::anyhow!("writing {}: {e}", path.display())))?;
    }
    if !cli.quiet {
        let mut out = std::io::stdout().lock();
        let _ = out.write_all(output.report.as_bytes());
    }
    Ok(output)
}

fn ctx_path(ctx: &Context_, p: &std::path::Path) -> std::path::PathBuf {
    match &ctx.out_dir {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p.to_path_buf(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(out) if out.violated => ExitCode::from(EXIT_VIOLATED),
        Ok(_) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_COMPUTE)
        }
    }
}
