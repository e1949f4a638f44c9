//! `helix`: experiments on the distribution of the maximum in hierarchical
//! Bernoulli summation schemes and in maxima of independent lattice sums.
//!
//! Exit codes: 0 success; 2 invalid arguments or configuration; 3 unwritable
//! output path; 4 operation budget exceeded.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::{ConfigMap, Format, Interval, LevelList};
use helix_core::{OpBudget, DEFAULT_OP_BUDGET};

/// Cap on dynamic-program and joint-law operation counts.
pub const BUDGET_ENV: &str = "HELIX_BUDGET_OPS";

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Key-value config file; command-line flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

impl CommonArgs {
    fn config(&self) -> Result<ConfigMap> {
        match &self.config {
            Some(path) => ConfigMap::load(path),
            None => Ok(ConfigMap::default()),
        }
    }

    fn budget(&self) -> Result<OpBudget> {
        match std::env::var(BUDGET_ENV) {
            Err(_) => Ok(OpBudget::new(DEFAULT_OP_BUDGET)),
            Ok(raw) => {
                let limit: u64 = raw
                    .parse()
                    .map_err(|e| anyhow::anyhow!("{BUDGET_ENV}={raw}: {e}"))?;
                Ok(OpBudget::new(limit))
            }
        }
    }
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format for tabular commands.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Parser)]
#[command(name = "helix", version, about = "Maxima of hierarchical Bernoulli summation schemes")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact tail of the normalized maximum at level n.
    Evolve {
        #[command(flatten)]
        out: OutArgs,
        /// Level to evolve to.
        #[arg(long)]
        n: Option<u32>,
        /// Up-step probability (default 0.5).
        #[arg(long)]
        p: Option<f64>,
    },
    /// Distance of the evolved tail to its median-anchored invariant element.
    Cyclic {
        #[command(flatten)]
        out: OutArgs,
        /// Comma-separated ascending levels, e.g. 100,1000,10000.
        #[arg(long)]
        levels: Option<LevelList>,
        #[arg(long)]
        p: Option<f64>,
    },
    /// Subsequence of levels approaching one invariant element after shifts.
    LimitPoint {
        #[command(flatten)]
        out: OutArgs,
        /// Parameter of the target element (its value at x = 0).
        #[arg(long)]
        a: Option<f64>,
        /// Number of witnesses to produce (default 3).
        #[arg(long)]
        count: Option<u32>,
    },
    /// Invariant limit profile of a supercritical scheme (p > 1/2).
    FixedPoint {
        #[command(flatten)]
        out: OutArgs,
        #[arg(long)]
        p: Option<f64>,
        /// Number of profile values to emit (default 50).
        #[arg(long)]
        n: Option<u32>,
    },
    /// Linear speed of the maximum for p < 1/2 from the drift equation.
    Drift {
        #[command(flatten)]
        out: OutArgs,
        #[arg(long)]
        p: Option<f64>,
    },
    /// Critical tilt of the +-1 progeny law and the tilted spec.
    Critical {
        #[command(flatten)]
        out: OutArgs,
        #[arg(long)]
        p: Option<f64>,
    },
    /// Hypothesis report for the fixed-tilt limit theorem.
    Aidekon {
        #[command(flatten)]
        out: OutArgs,
        #[arg(long)]
        p: Option<f64>,
        /// Check the critically tilted law instead of the raw one.
        #[arg(long)]
        tilted: bool,
    },
    /// Double-exponential helix parameters of the {0,1} step law.
    Gumbel {
        #[command(flatten)]
        out: OutArgs,
        #[arg(long)]
        p: Option<f64>,
        /// Optionally evaluate the centering a_n at this n.
        #[arg(long)]
        n: Option<u32>,
    },
    /// Exact vs asymptotic -ln P(max < m) over a window of m.
    VerifyBound {
        #[command(flatten)]
        out: OutArgs,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        n: Option<u32>,
        /// Window lo,hi around the centering (default -3,3).
        #[arg(long, allow_hyphen_values = true)]
        interval: Option<Interval>,
    },
    /// Monte Carlo branching walk: per-level maxima and argmax counts.
    Simulate {
        #[command(flatten)]
        out: OutArgs,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        replicas: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Restarted critical branching chain: empirical law at time n.
    Gw {
        #[command(flatten)]
        out: OutArgs,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        replicas: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Exact joint law of the maximum and its argmax count.
    Joint {
        #[command(flatten)]
        out: OutArgs,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        k_max: Option<u32>,
    },
}

fn dispatch(cli: &Cli) -> Result<()> {
    let c = &cli.common;
    match &cli.command {
        Command::Evolve { out, n, p } => commands::evolve_cmd(c, out, *n, *p),
        Command::Cyclic { out, levels, p } => commands::cyclic_cmd(c, out, levels.clone(), *p),
        Command::LimitPoint { out, a, count } => commands::limit_point_cmd(c, out, *a, *count),
        Command::FixedPoint { out, p, n } => commands::fixed_point_cmd(c, out, *p, *n),
        Command::Drift { out, p } => commands::drift_cmd(c, out, *p),
        Command::Critical { out, p } => commands::critical_cmd(c, out, *p),
        Command::Aidekon { out, p, tilted } => commands::aidekon_cmd(c, out, *p, *tilted),
        Command::Gumbel { out, p, n } => commands::gumbel_cmd(c, out, *p, *n),
        Command::VerifyBound {
            out,
            p,
            n,
            interval,
        } => commands::verify_bound_cmd(c, out, *p, *n, *interval),
        Command::Simulate {
            out,
            n,
            p,
            replicas,
            seed,
        } => commands::simulate_cmd(c, out, *n, *p, *replicas, *seed),
        Command::Gw {
            out,
            n,
            replicas,
            seed,
        } => commands::gw_cmd(c, out, *n, *replicas, *seed),
        Command::Joint { out, n, p, k_max } => commands::joint_cmd(c, out, *n, *p, *k_max),
    }
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<helix_core::Error>() {
            if matches!(e, helix_core::Error::BudgetExceeded { .. }) {
                return 4;
            }
        }
        if cause.downcast_ref::<output::OutputError>().is_some() {
            return 3;
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = Cli::parse(); // parse failures exit 2 with a diagnostic
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
