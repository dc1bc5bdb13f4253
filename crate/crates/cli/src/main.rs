use std::path::PathBuf;
use std::process::ExitCode;

use biharmonic_cli::commands::{probe_green, solve, ProbeOptions, SolveOptions};
use biharmonic_cli::suites::{verify, VerifyOptions};
use biharmonic_cli::{exit, CliError};
use clap::{Parser, Subcommand, ValueEnum};

/// Positive solutions of Δ²u = u^{-α} with clamped boundary conditions.
#[derive(Parser)]
#[command(name = "biharm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Dense,
    Subsample,
}

#[derive(Subcommand)]
enum Command {
    /// Solve on a unit ball; writes report.json, field.csv and manifest.json.
    Solve {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Domain as JSON, e.g. '{"kind":"unit_ball","n":3}'.
        #[arg(long)]
        domain: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Scan a planar Green function for negative entries; writes sign_report.json.
    ProbeGreen {
        /// Domain as JSON, e.g. '{"kind":"ellipse","a":1,"b":0.5}'.
        #[arg(long)]
        domain: String,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long, value_enum, default_value = "dense")]
        mode: Mode,
        /// Source columns in subsample mode.
        #[arg(long, default_value_t = 400)]
        columns: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run a verification suite: bounds, rate, uniqueness, regularity or all.
    Verify {
        #[arg(long)]
        suite: String,
        /// Directory written by `solve`.
        #[arg(long)]
        fixture: Option<PathBuf>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Sampled pairs per kernel bound.
        #[arg(long, default_value_t = 10_000)]
        pairs: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Solve { config, domain, alpha, out } => {
            let r = solve(&SolveOptions { config, domain, alpha, out })?;
            println!(
                "converged in {} iterations, residual {:e}, c1 = {:.4}, c2 = {:.4}",
                r.iterations, r.fixed_point_residual, r.c1, r.c2
            );
            Ok(exit::OK)
        }
        Command::ProbeGreen { domain, h, mode, columns, seed, out } => {
            let r = probe_green(&ProbeOptions {
                domain,
                h,
                dense: matches!(mode, Mode::Dense),
                columns,
                seed,
                out,
            })?;
            println!(
                "min entry {:e}, negative fraction {:.4}, {} unknowns ({})",
                r.min, r.negative_fraction, r.unknowns, r.kernel
            );
            Ok(exit::OK)
        }
        Command::Verify { suite, fixture, seed, pairs, out } => {
            let s = verify(&VerifyOptions { suite, fixture, seed, pairs, out })?;
            for c in &s.checks {
                println!("{:<36} {:?} {:e}", c.name, c.verdict, c.statistic);
            }
            if !s.failed.is_empty() {
                eprintln!("failed: {}", s.failed.join(", "));
            }
            Ok(s.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { exit::OK });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
