//! Solve reports shared by the stationary and Krylov drivers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mbas,
    Bas,
    Asss,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Mbas, Method::Bas, Method::Asss];

    pub fn name(self) -> &'static str {
        match self {
            Method::Mbas => "mbas",
            Method::Bas => "bas",
            Method::Asss => "asss",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "mbas" => Ok(Method::Mbas),
            "bas" => Ok(Method::Bas),
            "asss" => Ok(Method::Asss),
            other => Err(Error::InvalidParameter(format!("unknown method '{other}'"))),
        }
    }
}

/// Stationary iteration or preconditioned full GMRES.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Stationary,
    Gmres,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Stationary => "stationary",
            Mode::Gmres => "gmres",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "stationary" => Ok(Mode::Stationary),
            "gmres" => Ok(Mode::Gmres),
            other => Err(Error::InvalidParameter(format!("unknown mode '{other}'"))),
        }
    }
}

/// Outcome of one solve.
///
/// `residual_history[0]` is the initial relative residual (1 for the zero
/// start) and there is one further entry per iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: Method,
    pub mode: Mode,
    pub nu: f64,
    pub omega: f64,
    pub alpha_policy: String,
    pub alpha: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Relative residual of the returned iterate on the system it solves.
    pub final_residual: f64,
    pub elapsed_s: f64,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub residual_history: Vec<f64>,
}

impl SolveReport {
    /// Table cell in the `iterations(seconds)` style, `†` when not converged.
    pub fn cell(&self) -> String {
        if self.converged {
            format!("{}({:.2})", self.iterations, self.elapsed_s)
        } else {
            "\u{2020}".to_string()
        }
    }
}
