//! Q1 (bilinear quadrilateral) finite elements on a uniform mesh of the unit
//! square with homogeneous Dirichlet conditions.
//!
//! Unknowns are the interior nodes in lexicographic (row, column) order.
//! Element matrices come from exact integration of the bilinear basis; the
//! local node order is counter-clockwise from the lower-left corner.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Largest supported refinement level.
pub const MAX_LEVEL: u32 = 12;

/// Uniform `2^k x 2^k` mesh of the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    level: u32,
}

impl Grid {
    pub fn new(level: u32) -> Result<Self> {
        if level == 0 || level > MAX_LEVEL {
            return Err(Error::InvalidParameter(format!("mesh level must lie in 1..={MAX_LEVEL}, got {level}")));
        }
        Ok(Self { level })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Cells per side.
    pub fn cells(&self) -> usize {
        1 << self.level
    }

    /// Mesh size `2^-k`, exact in binary floating point.
    pub fn h(&self) -> f64 {
        1.0 / self.cells() as f64
    }

    /// Interior nodes per side.
    pub fn side(&self) -> usize {
        self.cells() - 1
    }

    /// Number of unknowns.
    pub fn m(&self) -> usize {
        self.side() * self.side()
    }

    /// Unknown index of grid node `(row, col)`, `None` on the boundary.
    pub fn dof(&self, row: usize, col: usize) -> Option<usize> {
        let n = self.cells();
        (row > 0 && row < n && col > 0 && col < n).then(|| (row - 1) * self.side() + (col - 1))
    }

    /// Coordinates `(x, y)` of unknown `i`.
    pub fn coords(&self, i: usize) -> (f64, f64) {
        let (r, c) = (i / self.side() + 1, i % self.side() + 1);
        (c as f64 * self.h(), r as f64 * self.h())
    }

    /// True when every one of the eight neighbours of unknown `i` is also interior.
    pub fn is_fully_interior(&self, i: usize) -> bool {
        let (r, c) = (i / self.side() + 1, i % self.side() + 1);
        r >= 2 && c >= 2 && r + 2 <= self.cells() && c + 2 <= self.cells()
    }
}

const Q1_MASS: [[f64; 4]; 4] = [[4.0, 2.0, 1.0, 2.0], [2.0, 4.0, 2.0, 1.0], [1.0, 2.0, 4.0, 2.0], [2.0, 1.0, 2.0, 4.0]];

const Q1_STIFF: [[f64; 4]; 4] =
    [[4.0, -1.0, -2.0, -1.0], [-1.0, 4.0, -1.0, -2.0], [-2.0, -1.0, 4.0, -1.0], [-1.0, -2.0, -1.0, 4.0]];

/// Loops over all cells and scatters `scale * local` into the interior unknowns.
fn assemble(grid: &Grid, local: &[[f64; 4]; 4], scale: f64) -> CsrMatrix {
    let n = grid.cells();
    let mut trip = Vec::with_capacity(16 * n * n);
    for r in 0..n {
        for c in 0..n {
            let nodes = [grid.dof(r, c), grid.dof(r, c + 1), grid.dof(r + 1, c + 1), grid.dof(r + 1, c)];
            for (a, na) in nodes.iter().enumerate() {
                let Some(i) = na else { continue };
                for (b, nb) in nodes.iter().enumerate() {
                    if let Some(j) = nb {
                        trip.push((*i, *j, scale * local[a][b]));
                    }
                }
            }
        }
    }
    CsrMatrix::from_triplets(grid.m(), grid.m(), &trip).expect("assembly indices are in range")
}

/// Consistent Q1 mass matrix.
pub fn assemble_mass(grid: &Grid) -> CsrMatrix {
    let h = grid.h();
    assemble(grid, &Q1_MASS, h * h / 36.0)
}

/// Q1 stiffness matrix (discrete Dirichlet Laplacian); entries do not depend on `h` in 2D.
pub fn assemble_stiffness(grid: &Grid) -> CsrMatrix {
    assemble(grid, &Q1_STIFF, 1.0 / 6.0)
}

/// Target state `(2x-1)^2 (2y-1)^2` on the open quadrant `(0, 1/2)^2`, zero elsewhere.
pub fn target_state(x: f64, y: f64) -> f64 {
    if x > 0.0 && x < 0.5 && y > 0.0 && y < 0.5 {
        (2.0 * x - 1.0).powi(2) * (2.0 * y - 1.0).powi(2)
    } else {
        0.0
    }
}

/// Nodal interpolant of [`target_state`] on the interior unknowns.
pub fn assemble_target(grid: &Grid) -> Vec<f64> {
    (0..grid.m())
        .map(|i| {
            let (x, y) = grid.coords(i);
            target_state(x, y)
        })
        .collect()
}
