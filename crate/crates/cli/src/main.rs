//! `charext`: decide, construct and verify σ-determinacy of characteristic
//! functions from the command line.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use crate::commands::Status;
use crate::config::{Command, DensityRef, RunArgs, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "charext", version, about = "Extension problems for characteristic functions")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Search for a lattice certificate of determinacy
    Decide(RunArgs),
    /// Build a second density whose characteristic function agrees outside the cube
    Construct {
        #[command(flatten)]
        args: RunArgs,
        /// Also write fhat_axis_k.csv with f and the alternative along each axis
        #[arg(long)]
        dump_fhat: bool,
    },
    /// Re-run the verification on a construct output directory
    Verify {
        /// Directory written by construct
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a small built-in tour
    Demo {
        #[arg(long, default_value = "charext-demo")]
        out: PathBuf,
    },
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn check_command(cfg: &RunConfig, expected: Command) -> Result<()> {
    match cfg.command {
        Some(c) if c != expected => bail!("config is for {c:?}, not {expected:?}"),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> Result<Status> {
    match cli.command {
        Cmd::Decide(args) => {
            let cfg = args.merged()?;
            check_command(&cfg, Command::Decide)?;
            let run = cfg.resolve()?;
            let (report, status) = commands::decide(&run)?;
            if args.out.is_some() || cfg.output_dir.is_some() {
                report.write(&run.output_dir)?;
            }
            print_json(&report)?;
            Ok(status)
        }
        Cmd::Construct { args, dump_fhat } => {
            let cfg = args.merged()?;
            check_command(&cfg, Command::Construct)?;
            let run = cfg.resolve()?;
            let (report, status) = commands::construct(&run, dump_fhat)?;
            eprintln!("{}: {}", run.output_dir.display(), report.outcome);
            if let Some(c) = &report.construct {
                for f in &c.verification.failures {
                    eprintln!("  {f}");
                }
            }
            print_json(&report)?;
            Ok(status)
        }
        Cmd::Verify { out } => {
            let (v, status) = commands::verify(&out)?;
            for f in &v.recomputed.failures {
                eprintln!("{f}");
            }
            if !v.matches() {
                eprintln!("verdict changed: stored {:?}, recomputed {:?}", v.stored.verdict, v.recomputed.verdict);
            }
            print_json(&serde_json::json!({
                "storedVerdict": v.stored.verdict,
                "recomputed": v.recomputed,
                "verdictsMatch": v.matches(),
            }))?;
            Ok(status)
        }
        Cmd::Demo { out } => demo(out),
    }
}

fn demo(out: PathBuf) -> Result<Status> {
    let mut all_ok = true;
    let named = |density: &str, n: usize, sigma: f64, dir: &str| RunConfig {
        density: Some(DensityRef::Named(density.to_string())),
        n: Some(n),
        sigma: Some(sigma),
        output_dir: Some(out.join(dir)),
        ..RunConfig::default()
    };
    for (sigma, expected) in [(3.0, Status::Ok), (3.2, Status::Inconclusive)] {
        let run = named("triangular", 1, sigma, "decide").resolve()?;
        let (report, status) = commands::decide(&run)?;
        println!("decide triangular σ={sigma}: {}", report.outcome);
        all_ok &= status == expected;
    }
    let run = named("ball", 2, 4.0, "decide").resolve()?;
    let (report, status) = commands::decide(&run)?;
    println!("decide ball n=2 σ=4: {}", report.outcome);
    all_ok &= status == Status::Ok;

    let run = named("ball", 1, 4.0, "construct").resolve()?;
    let (report, status) = commands::construct(&run, false).context("construct ball n=1 σ=4")?;
    println!("construct ball n=1 σ=4: {}", report.outcome);
    all_ok &= status == Status::Ok;
    let (v, status) = commands::verify(&run.output_dir)?;
    println!("verify {}: {}", run.output_dir.display(), v.recomputed.verdict);
    all_ok &= status == Status::Ok;
    Ok(if all_ok { Status::Ok } else { Status::Failed })
}

fn main() -> ExitCode {
    // clap's own usage errors exit with 2, which is reserved for "inconclusive"
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Status::Error as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(Status::Error as u8)
        }
    }
}
