//! Box-domain discretization.
//!
//! Cells are uniform and values live at cell centers. The homogeneous Neumann
//! condition is encoded by reflecting ghost cells, which means every boundary
//! face carries zero flux. Vector quantities such as `∇v` are stored on the
//! interior faces of the mesh (see [`VectorField`]), so that the discrete
//! divergence of a discrete gradient is exactly the compact Laplacian.

mod field;
mod ops;
mod spectrum;

pub use field::{Field, VectorField};
pub use ops::{bochner_sides, divergence, gradient, interior_mask, laplacian};
pub use spectrum::{
    embedding_constant_estimate, embedding_ratio, neumann_eigenpairs, poincare_constant, AxisBasis,
    DomainConstants, Spectrum, EMBEDDING_MODES,
};

use crate::error::{Error, Result};

/// Smallest admissible per-axis cell count.
pub const MIN_CELLS: usize = 4;

/// Uniform tensor mesh on the box `(0, L_0) × … × (0, L_{dim-1})`.
///
/// Unused trailing axes are stored with one cell of unit length so that index
/// arithmetic is the same in every dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    extents: [f64; 3],
    cells: [usize; 3],
    h: [f64; 3],
}

impl Grid {
    pub fn new(dim: usize, extents: &[f64], cells: &[usize]) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if extents.len() != dim || cells.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "expected {dim} extents and cell counts, got {} and {}",
                extents.len(),
                cells.len()
            )));
        }
        let mut g = Grid {
            dim,
            extents: [1.0; 3],
            cells: [1; 3],
            h: [1.0; 3],
        };
        for d in 0..dim {
            let (l, n) = (extents[d], cells[d]);
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!("extent {l} on axis {d} must be positive")));
            }
            if n < MIN_CELLS {
                return Err(Error::InvalidGrid(format!(
                    "axis {d} has {n} cells, need at least {MIN_CELLS}"
                )));
            }
            g.extents[d] = l;
            g.cells[d] = n;
            g.h[d] = l / n as f64;
        }
        Ok(g)
    }

    /// Cube `(0, L)^dim` with `n` cells per axis.
    pub fn cube(dim: usize, extent: f64, n: usize) -> Result<Self> {
        Self::new(dim, &vec![extent; dim], &vec![n; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents[..self.dim]
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells[..self.dim]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.h[axis]
    }

    pub fn spacings(&self) -> &[f64] {
        &self.h[..self.dim]
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacings().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `|Ω|`, the product of the extents.
    pub fn volume(&self) -> f64 {
        self.extents().iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacings().iter().product()
    }

    /// Total number of cells.
    pub fn len(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lexicographic stride of `axis` (the last axis varies fastest).
    pub fn stride(&self, axis: usize) -> usize {
        self.cells[axis + 1..].iter().product()
    }

    /// Split a flat cell index into per-axis indices.
    pub fn unravel(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for d in (0..3).rev() {
            out[d] = idx % self.cells[d];
            idx /= self.cells[d];
        }
        out
    }

    pub fn ravel(&self, ijk: [usize; 3]) -> usize {
        (ijk[0] * self.cells[1] + ijk[1]) * self.cells[2] + ijk[2]
    }

    /// Physical coordinates of the center of cell `idx`.
    pub fn center(&self, idx: usize) -> [f64; 3] {
        let ijk = self.unravel(idx);
        let mut x = [0.0; 3];
        for d in 0..self.dim {
            x[d] = (ijk[d] as f64 + 0.5) * self.h[d];
        }
        x
    }

    /// Short identifier used in reports, e.g. `2d-64x64-L1x1`.
    pub fn id(&self) -> String {
        let cells: Vec<String> = self.cells().iter().map(|n| n.to_string()).collect();
        let ext: Vec<String> = self.extents().iter().map(|l| format!("{l}")).collect();
        format!("{}d-{}-L{}", self.dim, cells.join("x"), ext.join("x"))
    }
}
