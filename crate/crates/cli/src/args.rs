//! Command-line surface.

use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use mbas_core::inner::InnerSolver;
use mbas_core::params::AlphaPolicy;
use mbas_core::{Method, Mode};

use crate::{
    alpha_table, export_matrices, output, run_single, run_sweep, Format, Result, RunSpec, DEFAULT_NUS, DEFAULT_OMEGAS,
};

#[derive(Debug, Parser)]
#[command(name = "mbas", version, about = "MBAS/BAS/ASSS solvers for time-periodic control systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve every (nu, omega) cell and print a table.
    Sweep {
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long, default_value = "markdown")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a single cell and print its report.
    Single {
        #[command(flatten)]
        solve: SolveArgs,
        /// Write one relative residual per line.
        #[arg(long)]
        history: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the resolved iteration parameter on a grid.
    Alpha {
        #[arg(long, default_value_t = 7)]
        k: u32,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_NUS)]
        nu: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_OMEGAS)]
        omega: Vec<f64>,
        #[arg(long, default_value = "est")]
        alpha: AlphaPolicy,
        #[arg(long, default_value = "markdown")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write M, K (Matrix Market) and the target vector.
    Export {
        #[arg(long, default_value_t = 7)]
        k: u32,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Mesh level; h = 2^-k.
    #[arg(long, default_value_t = 7)]
    pub k: u32,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_NUS)]
    pub nu: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_OMEGAS)]
    pub omega: Vec<f64>,
    #[arg(long, default_value = "mbas")]
    pub method: Method,
    #[arg(long, default_value = "stationary")]
    pub mode: Mode,
    /// est | bas-iter | bas-prec | asss | alpha1 | alpha2 | custom:<value>
    #[arg(long)]
    pub alpha: Option<AlphaPolicy>,
    /// direct | cg | cg:<tol>
    #[arg(long, default_value = "direct")]
    pub inner: InnerSolver,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 500)]
    pub maxit: usize,
}

impl SolveArgs {
    pub fn spec(&self) -> RunSpec {
        RunSpec {
            k: self.k,
            nus: self.nu.clone(),
            omegas: self.omega.clone(),
            method: self.method,
            mode: self.mode,
            alpha: self.alpha,
            inner: self.inner,
            tol: self.tol,
            maxit: self.maxit,
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep { solve, format, out } => {
            let table = run_sweep(&solve.spec())?;
            table.write(format, output(out.as_deref())?)
        }
        Command::Single { solve, history, out } => {
            let mut rep = run_single(&solve.spec(), history.as_deref())?;
            let mut w = output(out.as_deref())?;
            rep.residual_history.clear();
            serde_json::to_writer_pretty(&mut w, &rep)?;
            writeln!(w)?;
            Ok(())
        }
        Command::Alpha { k, nu, omega, alpha, format, out } => {
            alpha_table(k, &nu, &omega, alpha)?.write(format, output(out.as_deref())?)
        }
        Command::Export { k, out } => {
            for p in export_matrices(k, &out)? {
                eprintln!("wrote {}", p.display());
            }
            Ok(())
        }
    }
}
