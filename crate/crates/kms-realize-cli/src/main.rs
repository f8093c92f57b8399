use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use kms_realize_cli::commands::{cmd_build_spectrum, cmd_growth, cmd_padic, cmd_verify, load_config};
use kms_realize_cli::config::GridOverride;
use kms_realize_cli::pipeline::threads_from_env;
use kms_realize_cli::report::Manifest;

/// Build group actions with a prescribed KMS spectrum and certify them.
///
/// Set KMS_REALIZE_THREADS to bound the worker count.
#[derive(Parser)]
#[command(name = "kms-realize", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    grid_n: Option<usize>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    range: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Wreath or free-product construction for a closed set.
    BuildSpectrum(RunArgs),
    /// Replay a stored run from its manifest.
    Verify { manifest: PathBuf },
    /// Growth classifier and measure-net certificates.
    Growth(RunArgs),
    /// Freeness and closure certificates for the matrix group.
    Padic(RunArgs),
}

fn report(m: &Manifest) -> ExitCode {
    for c in &m.certificates {
        println!("{} {}", if c.pass { "pass" } else { "FAIL" }, c.name);
    }
    if m.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let threads = threads_from_env();
    let go = |a: &RunArgs| -> Result<_> {
        let o = GridOverride {
            n: a.grid_n,
            tol: a.tol.clone(),
            range: a.range.clone(),
        };
        load_config(&a.config, &o)
    };
    Ok(match cli.cmd {
        Cmd::BuildSpectrum(a) => report(&cmd_build_spectrum(&go(&a)?, &a.out, threads)?),
        Cmd::Growth(a) => report(&cmd_growth(&go(&a)?, &a.out, threads)?),
        Cmd::Padic(a) => report(&cmd_padic(&go(&a)?, &a.out, threads)?),
        Cmd::Verify { manifest } => {
            let v = cmd_verify(&manifest, threads)?;
            for c in &v.checks {
                println!("{} {}: {}", if c.pass { "pass" } else { "FAIL" }, c.name, c.detail);
            }
            match v.first_failure() {
                None => ExitCode::SUCCESS,
                Some(c) => {
                    eprintln!("verification failed at {}", c.name);
                    ExitCode::from(1)
                }
            }
        }
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
