//! Experiment driver behind the `mbas` binary.
//!
//! A sweep solves every `(nu, omega)` cell on one shared discretization and
//! lays the counts out as a `nu` by `omega` table.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use mbas_core::inner::InnerSolver;
use mbas_core::krylov::GmresConfig;
use mbas_core::meshfem::Grid;
use mbas_core::params::{alpha_est, resolve_alpha, AlphaPolicy};
use mbas_core::precond::{passs_gmres, pbas_gmres, pmbas_gmres, PrecondConfig};
use mbas_core::sparse::mmio::{write_matrix, write_vector, Symmetry};
use mbas_core::splittings::{asss_solve, bas_solve, mbas_solve, IterConfig};
use mbas_core::systems::{Discretization, ProblemParams, SystemBundle};
use mbas_core::{Method, Mode, SolveReport};

pub mod args;

/// Default regularization grid.
pub const DEFAULT_NUS: [f64; 4] = [1e-2, 1e-4, 1e-6, 1e-8];
/// Default frequency grid.
pub const DEFAULT_OMEGAS: [f64; 9] = [1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Solver(#[from] mbas_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for bad input, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Solver(mbas_core::Error::InvalidParameter(_)) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Markdown,
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "markdown" | "md" => Ok(Format::Markdown),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}'")),
        }
    }
}

/// Everything needed to run one grid of solves.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub k: u32,
    pub nus: Vec<f64>,
    pub omegas: Vec<f64>,
    pub method: Method,
    pub mode: Mode,
    /// `None` picks the usual policy for the method and mode.
    pub alpha: Option<AlphaPolicy>,
    pub inner: InnerSolver,
    pub tol: f64,
    pub maxit: usize,
}

impl RunSpec {
    pub fn new(k: u32, method: Method, mode: Mode) -> Self {
        Self {
            k,
            nus: DEFAULT_NUS.to_vec(),
            omegas: DEFAULT_OMEGAS.to_vec(),
            method,
            mode,
            alpha: None,
            inner: InnerSolver::Direct,
            tol: 1e-6,
            maxit: 500,
        }
    }

    pub fn policy(&self) -> AlphaPolicy {
        self.alpha.unwrap_or_else(|| AlphaPolicy::default_for(self.method, self.mode))
    }

    pub fn validate(&self) -> Result<()> {
        if self.nus.is_empty() || self.omegas.is_empty() {
            return Err(CliError::Usage("nu and omega lists must be nonempty".into()));
        }
        if let Some(nu) = self.nus.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(CliError::Usage(format!("nu must be positive, got {nu}")));
        }
        if let Some(om) = self.omegas.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(CliError::Usage(format!("omega must be nonnegative, got {om}")));
        }
        if !(self.tol > 0.0) || self.maxit == 0 {
            return Err(CliError::Usage("tol must be positive and maxit at least 1".into()));
        }
        Grid::new(self.k).map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(())
    }

    pub fn discretization(&self) -> Result<Arc<Discretization>> {
        Ok(Arc::new(Discretization::assemble(Grid::new(self.k)?)))
    }
}

/// Runs one `(nu, omega)` cell on a shared discretization.
pub fn solve_cell(disc: &Arc<Discretization>, spec: &RunSpec, nu: f64, omega: f64) -> Result<SolveReport> {
    let s = SystemBundle::new(disc.clone(), ProblemParams::new(nu, omega)?);
    let policy = spec.policy();
    let alpha = resolve_alpha(policy, &s)?;
    let mut rep = match spec.mode {
        Mode::Stationary => {
            let cfg = IterConfig { alpha, tol: spec.tol, maxit: spec.maxit, inner: spec.inner };
            match spec.method {
                Method::Mbas => mbas_solve(&s, &cfg)?.1,
                Method::Bas => bas_solve(&s, &cfg)?.1,
                Method::Asss => asss_solve(&s, &cfg)?.1,
            }
        }
        Mode::Gmres => {
            let cfg =
                PrecondConfig { alpha, gmres: GmresConfig { tol: spec.tol, maxit: spec.maxit }, inner: spec.inner };
            match spec.method {
                Method::Mbas => pmbas_gmres(&s, &cfg)?.1,
                Method::Bas => pbas_gmres(&s, &cfg)?.1,
                Method::Asss => passs_gmres(&s, &cfg)?.1,
            }
        }
    };
    rep.alpha_policy = policy.to_string();
    Ok(rep)
}

/// A finished sweep; `reports[i][j]` belongs to `nus[i]`, `omegas[j]`.
#[derive(Debug, Clone)]
pub struct SweepTable {
    pub spec: RunSpec,
    pub reports: Vec<Vec<SolveReport>>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    method: Method,
    mode: Mode,
    k: u32,
    nu: f64,
    omega: f64,
    alpha_policy: &'a str,
    alpha: f64,
    iterations: usize,
    converged: bool,
    final_residual: f64,
    elapsed_s: f64,
}

fn label(v: f64) -> String {
    format!("{v:e}")
}

impl SweepTable {
    pub fn iterations(&self) -> Vec<Vec<Option<usize>>> {
        self.reports.iter().map(|row| row.iter().map(|r| r.converged.then_some(r.iterations)).collect()).collect()
    }

    pub fn to_markdown(&self) -> String {
        let sp = &self.spec;
        let mut out = String::new();
        let _ = writeln!(out, "{} {} (alpha = {}), k = {}\n", sp.method, sp.mode, sp.policy(), sp.k);
        let _ = write!(out, "| nu \\ omega |");
        for om in &sp.omegas {
            let _ = write!(out, " {} |", label(*om));
        }
        let _ = write!(out, "\n|---|");
        for _ in &sp.omegas {
            out.push_str("---|");
        }
        out.push('\n');
        for (nu, row) in sp.nus.iter().zip(&self.reports) {
            let _ = write!(out, "| {} |", label(*nu));
            for r in row {
                let _ = write!(out, " {} |", r.cell());
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for r in self.reports.iter().flatten() {
            wr.serialize(CsvRow {
                method: r.method,
                mode: r.mode,
                k: self.spec.k,
                nu: r.nu,
                omega: r.omega,
                alpha_policy: &r.alpha_policy,
                alpha: r.alpha,
                iterations: r.iterations,
                converged: r.converged,
                final_residual: r.final_residual,
                elapsed_s: r.elapsed_s,
            })?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn write<W: Write>(&self, format: Format, mut w: W) -> Result<()> {
        match format {
            Format::Markdown => w.write_all(self.to_markdown().as_bytes())?,
            Format::Csv => self.write_csv(w)?,
            Format::Json => {
                let flat: Vec<&SolveReport> = self.reports.iter().flatten().collect();
                serde_json::to_writer_pretty(&mut w, &flat)?;
                writeln!(w)?;
            }
        }
        Ok(())
    }
}

/// Solves every cell of the grid. Cells run in parallel; the result keeps
/// grid order.
pub fn run_sweep(spec: &RunSpec) -> Result<SweepTable> {
    spec.validate()?;
    let disc = spec.discretization()?;
    // warm the eigenvalue caches before fanning out
    if matches!(spec.policy(), AlphaPolicy::AsssDefault | AlphaPolicy::ChiOptimal) {
        disc.mass_extremes()?;
    }
    if spec.policy() == AlphaPolicy::VarthetaOptimal {
        disc.stiffness_extremes()?;
    }
    let cells: Vec<(f64, f64)> = spec.nus.iter().flat_map(|&nu| spec.omegas.iter().map(move |&om| (nu, om))).collect();
    let flat: Vec<SolveReport> =
        cells.par_iter().map(|&(nu, om)| solve_cell(&disc, spec, nu, om)).collect::<Result<_>>()?;
    let reports = flat.chunks(spec.omegas.len()).map(|c| c.to_vec()).collect();
    Ok(SweepTable { spec: spec.clone(), reports })
}

/// One solve; with `history` the relative residuals are written one per line.
pub fn run_single(spec: &RunSpec, history: Option<&Path>) -> Result<SolveReport> {
    spec.validate()?;
    if spec.nus.len() != 1 || spec.omegas.len() != 1 {
        return Err(CliError::Usage("a single run takes exactly one nu and one omega".into()));
    }
    let disc = spec.discretization()?;
    let rep = solve_cell(&disc, spec, spec.nus[0], spec.omegas[0])?;
    if let Some(path) = history {
        let mut w = BufWriter::new(File::create(path)?);
        for v in &rep.residual_history {
            writeln!(w, "{v:e}")?;
        }
        w.flush()?;
    }
    Ok(rep)
}

/// Writes `M.mtx`, `K.mtx` and `yd.txt` for level `k` into `dir`.
pub fn export_matrices(k: u32, dir: &Path) -> Result<Vec<PathBuf>> {
    let grid = Grid::new(k).map_err(|e| CliError::Usage(e.to_string()))?;
    let disc = Discretization::assemble(grid);
    std::fs::create_dir_all(dir)?;
    let paths = vec![dir.join("M.mtx"), dir.join("K.mtx"), dir.join("yd.txt")];
    let mut w = BufWriter::new(File::create(&paths[0])?);
    write_matrix(&mut w, disc.mass(), Symmetry::Symmetric)?;
    w.flush()?;
    let mut w = BufWriter::new(File::create(&paths[1])?);
    write_matrix(&mut w, disc.stiffness(), Symmetry::Symmetric)?;
    w.flush()?;
    let mut w = BufWriter::new(File::create(&paths[2])?);
    write_vector(&mut w, disc.target())?;
    w.flush()?;
    Ok(paths)
}

/// Grid of resolved `alpha` values.
#[derive(Debug, Clone, Serialize)]
pub struct AlphaTable {
    pub k: u32,
    pub policy: String,
    pub nus: Vec<f64>,
    pub omegas: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

pub fn alpha_table(k: u32, nus: &[f64], omegas: &[f64], policy: AlphaPolicy) -> Result<AlphaTable> {
    if nus.is_empty() || omegas.is_empty() {
        return Err(CliError::Usage("nu and omega lists must be nonempty".into()));
    }
    let disc = Arc::new(Discretization::assemble(Grid::new(k).map_err(|e| CliError::Usage(e.to_string()))?));
    let mut values = Vec::with_capacity(nus.len());
    for &nu in nus {
        let mut row = Vec::with_capacity(omegas.len());
        for &om in omegas {
            let s = SystemBundle::new(disc.clone(), ProblemParams::new(nu, om)?);
            row.push(match policy {
                AlphaPolicy::Estimated => alpha_est(&s),
                p => resolve_alpha(p, &s)?,
            });
        }
        values.push(row);
    }
    Ok(AlphaTable { k, policy: policy.to_string(), nus: nus.to_vec(), omegas: omegas.to_vec(), values })
}

impl AlphaTable {
    pub fn to_markdown(&self) -> String {
        let mut out = format!("alpha ({}), k = {}\n\n| nu \\ omega |", self.policy, self.k);
        for om in &self.omegas {
            let _ = write!(out, " {} |", label(*om));
        }
        out.push_str("\n|---|");
        for _ in &self.omegas {
            out.push_str("---|");
        }
        out.push('\n');
        for (nu, row) in self.nus.iter().zip(&self.values) {
            let _ = write!(out, "| {} |", label(*nu));
            for v in row {
                let _ = write!(out, " {v:.6} |");
            }
            out.push('\n');
        }
        out
    }

    pub fn write<W: Write>(&self, format: Format, mut w: W) -> Result<()> {
        match format {
            Format::Markdown => w.write_all(self.to_markdown().as_bytes())?,
            Format::Json => {
                serde_json::to_writer_pretty(&mut w, self)?;
                writeln!(w)?;
            }
            Format::Csv => {
                let mut wr = csv::Writer::from_writer(w);
                wr.write_record(["k", "nu", "omega", "alpha_policy", "alpha"])?;
                for (nu, row) in self.nus.iter().zip(&self.values) {
                    for (om, v) in self.omegas.iter().zip(row) {
                        wr.write_record([
                            self.k.to_string(),
                            label(*nu),
                            label(*om),
                            self.policy.clone(),
                            format!("{v:e}"),
                        ])?;
                    }
                }
                wr.flush()?;
            }
        }
        Ok(())
    }
}

/// Opens `path` for writing, or stdout when absent.
pub fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}
