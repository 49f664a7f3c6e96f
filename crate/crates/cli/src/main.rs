use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use maxbound_cli::commands::{self, Outcome};
use maxbound_cli::{RunConfig, UsageError};

/// Lower bounds for the centered maximal operator on the real line.
///
/// Settings come from a `key = value` config file (--config or
/// $MAXBOUND_CONFIG) and are overridden by flags. Exit status: 0 on
/// success, 1 when `verify` finds a violation, 2 on usage errors, 3 on
/// other failures.
#[derive(Parser, Debug)]
#[command(name = "maxbound", version, about, long_about = None)]
struct Cli {
    /// Config file with `key = value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Base grid width for certified envelopes, e.g. 1/256.
    #[arg(long, global = true, value_name = "RATIONAL")]
    grid_width: Option<String>,
    /// Largest n (table length, or iteration cap for ε_p).
    #[arg(long, global = true)]
    n_max: Option<usize>,
    /// Weak-(1,1) constant used in the A_p upper bound.
    #[arg(long, global = true)]
    c1: Option<f64>,
    /// Exponent, or comma-separated exponents.
    #[arg(long, global = true, value_name = "P[,P...]")]
    p: Option<String>,
    /// Output directory; stdout when absent.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// csv or json (where both exist).
    #[arg(long, global = true)]
    format: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Table of γ_n with series terms and a closed-form cross-check.
    Gamma,
    /// g_n(t) and h_n(t) on a t grid, for plotting.
    GnTable {
        #[arg(long, allow_negative_numbers = true)]
        t_min: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        t_max: Option<f64>,
        #[arg(long)]
        t_points: Option<usize>,
    },
    /// ε_p for every n and the best choice per p.
    Constants,
    /// Run a verification suite; exits 1 on any violation.
    Verify {
        /// lemma5, growth, lemma7, thm2 or main.
        #[arg(long)]
        suite: Option<String>,
        #[arg(long)]
        functions: Option<usize>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        max_refinements: Option<u32>,
    },
    /// Empirical search for small ‖Mf‖_p / ‖f‖_p.
    Search {
        #[arg(long)]
        pieces: Option<usize>,
        #[arg(long)]
        iterations: Option<usize>,
        /// Relative quadrature tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn overlay(cfg: &mut RunConfig, key: &str, value: Option<impl ToString>) -> Result<()> {
    if let Some(v) = value {
        cfg.set(key, &v.to_string())?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<Outcome> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    overlay(&mut cfg, "seed", cli.seed)?;
    overlay(&mut cfg, "grid_width", cli.grid_width)?;
    overlay(&mut cfg, "n_max", cli.n_max)?;
    overlay(&mut cfg, "c1", cli.c1)?;
    overlay(&mut cfg, "p", cli.p)?;
    overlay(&mut cfg, "out", cli.out.map(|p| p.display().to_string()))?;
    overlay(&mut cfg, "format", cli.format)?;
    let outcome = match cli.command {
        Command::Gamma => commands::gamma(&cfg),
        Command::GnTable {
            t_min,
            t_max,
            t_points,
        } => {
            overlay(&mut cfg, "t_min", t_min)?;
            overlay(&mut cfg, "t_max", t_max)?;
            overlay(&mut cfg, "t_points", t_points)?;
            commands::gn_table(&cfg)
        }
        Command::Constants => commands::constants(&cfg),
        Command::Verify {
            suite,
            functions,
            points,
            max_refinements,
        } => {
            overlay(&mut cfg, "suite", suite)?;
            overlay(&mut cfg, "functions", functions)?;
            overlay(&mut cfg, "points", points)?;
            overlay(&mut cfg, "max_refinements", max_refinements)?;
            commands::verify(&cfg)
        }
        Command::Search {
            pieces,
            iterations,
            tol,
        } => {
            overlay(&mut cfg, "pieces", pieces)?;
            overlay(&mut cfg, "iterations", iterations)?;
            overlay(&mut cfg, "tol", tol)?;
            commands::search(&cfg)
        }
    }?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    match cfg.raw("out") {
        Some(dir) => {
            let path = outcome.artifact.write_to(dir.as_ref())?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{}", outcome.artifact.render()?),
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(outcome) => ExitCode::from(outcome.exit_code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.downcast_ref::<UsageError>().is_some() {
                2
            } else {
                3
            })
        }
    }
}
