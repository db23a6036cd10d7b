//! `mpsd`: analytic Markov-chain power spectra, scaling fits and Gillespie
//! cross-checks from the command line.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 invalid input.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Settings;

#[derive(Parser)]
#[command(name = "mpsd", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Eigenstructure and analytic PSD of a model chain
    Spectrum(RunArgs),
    /// Gillespie ensemble, averaged periodogram and slope fits
    Simulate(RunArgs),
    /// Power-law exponents of the eigenstructure and the predicted PSD slope
    Fit(FitArgs),
    /// Run the acceptance checks
    Verify(VerifyArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Config file (`key = value` lines); flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model: mm1, ring or star
    #[arg(long)]
    model: Option<String>,
    /// Number of states (mm1 truncation / ring size / star leaves)
    #[arg(long)]
    n: Option<usize>,
    /// Heavy-traffic parameter (mm1 only; sets lambda=1, mu=1+eps)
    #[arg(long)]
    eps: Option<f64>,
    /// Up / clockwise jump rate
    #[arg(long)]
    lambda: Option<f64>,
    /// Down / counter-clockwise jump rate
    #[arg(long)]
    mu: Option<f64>,
    /// RNG seed (required for simulate)
    #[arg(long)]
    seed: Option<u64>,
    /// Ensemble size
    #[arg(long)]
    realizations: Option<usize>,
    /// Time horizon (rounded up so the grid is a power of two)
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Sampling interval
    #[arg(long)]
    dt: Option<f64>,
    /// Run directory (default runs/<command>-<model>)
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Fit an eigenstructure CSV (k,omega,gamma_sq) instead of a model
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Small-n subset, runs in seconds
    #[arg(long)]
    quick: bool,
    /// Where to write the JSON report
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
}

impl RunArgs {
    fn settings(&self) -> markov_psd::Result<Settings> {
        let flags = Settings {
            model: self.model.clone(),
            n: self.n,
            eps: self.eps,
            lambda: self.lambda,
            mu: self.mu,
            seed: self.seed,
            realizations: self.realizations,
            t_end: self.t_end,
            dt: self.dt,
        };
        Ok(match &self.config {
            Some(path) => Settings::from_file(path)?.overlaid_with(flags),
            None => flags,
        })
    }

    /// Resolve the config, create the run directory and snapshot the
    /// effective settings into it.
    fn prepare(&self, need_seed: bool, cmd: &str) -> markov_psd::Result<(config::RunConfig, PathBuf)> {
        let cfg = self.settings()?.resolve(need_seed)?;
        let out = self
            .out_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("runs/{cmd}-{}", cfg.model.name())));
        std::fs::create_dir_all(&out)?;
        std::fs::write(out.join("config.txt"), cfg.snapshot())?;
        Ok((cfg, out))
    }
}

fn run(cli: Cli) -> markov_psd::Result<ExitCode> {
    match cli.cmd {
        Cmd::Spectrum(args) => {
            let (cfg, out) = args.prepare(false, "spectrum")?;
            commands::spectrum(&cfg, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Simulate(args) => {
            let (cfg, out) = args.prepare(true, "simulate")?;
            commands::simulate_cmd(&cfg, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Fit(args) => {
            match &args.input {
                Some(path) => {
                    let out = args.run.out_dir.clone().unwrap_or_else(|| PathBuf::from("runs/fit"));
                    std::fs::create_dir_all(&out)?;
                    commands::fit(commands::FitSource::File(path), &out)?;
                }
                None => {
                    let (cfg, out) = args.run.prepare(false, "fit")?;
                    commands::fit(commands::FitSource::Model(&cfg), &out)?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify(args) => {
            let all_passed = commands::verify(args.quick, args.out_dir.as_deref())?;
            Ok(if all_passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
