//! Spectrum of the discrete Neumann Laplacian.
//!
//! The stencil is a sum of 1D operators acting on separate axes, so its
//! eigenpairs are tensor products of the 1D ones. Each 1D operator is
//! diagonalized densely; everything else is index bookkeeping.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::field::axis_layout;
use super::{gradient, laplacian, Field, Grid};
use crate::error::{Error, Result};

/// Eigen-decomposition of the 1D Neumann operator `-Δ_h` on `n` cells.
#[derive(Debug, Clone)]
pub struct AxisBasis {
    h: f64,
    eigenvalues: Vec<f64>,
    /// Column `j` is the unit-norm (unweighted) eigenvector of eigenvalue `j`.
    vectors: DMatrix<f64>,
}

impl AxisBasis {
    pub fn new(n: usize, h: f64) -> Self {
        let inv_h2 = 1.0 / (h * h);
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            let mut diag = 0.0;
            if i > 0 {
                m[(i, i - 1)] = -inv_h2;
                diag += inv_h2;
            }
            if i + 1 < n {
                m[(i, i + 1)] = -inv_h2;
                diag += inv_h2;
            }
            m[(i, i)] = diag;
        }
        let eig = SymmetricEigen::new(m);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let mut vectors = DMatrix::<f64>::zeros(n, n);
        let mut eigenvalues = Vec::with_capacity(n);
        for (j, &src) in order.iter().enumerate() {
            let col = eig.eigenvectors.column(src);
            // fix the sign by the first entry of non-negligible size
            let pivot = col.iter().copied().find(|v| v.abs() > 1e-8).unwrap_or(1.0);
            let s = if pivot < 0.0 { -1.0 } else { 1.0 };
            for i in 0..n {
                vectors[(i, j)] = s * col[i];
            }
            eigenvalues.push(eig.eigenvalues[src].max(0.0));
        }
        // the constant mode is exact
        eigenvalues[0] = 0.0;
        let c = 1.0 / (n as f64).sqrt();
        for i in 0..n {
            vectors[(i, 0)] = c;
        }
        AxisBasis {
            h,
            eigenvalues,
            vectors,
        }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }
}

/// Full tensor-product spectrum of a grid.
#[derive(Debug, Clone)]
pub struct Spectrum {
    grid: Grid,
    axes: Vec<AxisBasis>,
}

impl Spectrum {
    pub fn new(grid: &Grid) -> Self {
        let axes = (0..grid.dim())
            .map(|d| AxisBasis::new(grid.cells()[d], grid.spacing(d)))
            .collect();
        Spectrum { grid: *grid, axes }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn axis(&self, d: usize) -> &AxisBasis {
        &self.axes[d]
    }

    /// Eigenvalue of the mode with per-axis indices `modes`.
    pub fn eigenvalue(&self, modes: [usize; 3]) -> f64 {
        self.axes
            .iter()
            .enumerate()
            .map(|(d, a)| a.eigenvalues[modes[d]])
            .sum()
    }

    /// Smallest positive eigenvalue.
    pub fn lambda1(&self) -> f64 {
        self.axes
            .iter()
            .map(|a| a.eigenvalues[1])
            .fold(f64::INFINITY, f64::min)
    }

    /// Eigenvalue of every mode in the flat (lexicographic) mode ordering.
    pub fn eigenvalues_flat(&self) -> Vec<f64> {
        (0..self.grid.len())
            .map(|i| self.eigenvalue(self.grid.unravel(i)))
            .collect()
    }

    /// The `k` smallest modes, ascending, ties broken by mode index.
    pub fn lowest_modes(&self, k: usize) -> Vec<([usize; 3], f64)> {
        let mut all: Vec<(usize, f64)> = self.eigenvalues_flat().into_iter().enumerate().collect();
        all.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        all.truncate(k);
        all.into_iter()
            .map(|(i, l)| (self.grid.unravel(i), l))
            .collect()
    }

    /// Eigenfield normalized so that `∫ e² = 1`.
    pub fn mode_field(&self, modes: [usize; 3]) -> Field {
        let g = self.grid;
        let scale = 1.0 / g.cell_volume().sqrt();
        let values = (0..g.len())
            .map(|idx| {
                let ijk = g.unravel(idx);
                (0..g.dim())
                    .map(|d| self.axes[d].vectors[(ijk[d], modes[d])])
                    .product::<f64>()
                    * scale
            })
            .collect();
        Field::new(g, values).expect("sizes match")
    }

    /// Coefficients in the orthonormal (unweighted) eigenbasis.
    pub fn forward(&self, f: &Field) -> Vec<f64> {
        let mut data = f.values().to_vec();
        for d in 0..self.grid.dim() {
            data = apply_axis(&self.grid, d, &data, &self.axes[d].vectors, true);
        }
        data
    }

    pub fn inverse(&self, coeffs: &[f64]) -> Field {
        let mut data = coeffs.to_vec();
        for d in 0..self.grid.dim() {
            data = apply_axis(&self.grid, d, &data, &self.axes[d].vectors, false);
        }
        Field::new(self.grid, data).expect("sizes match")
    }

    /// `Σ_j m(λ_j) ⟨f, e_j⟩ e_j`.
    pub fn apply_multiplier(&self, f: &Field, m: impl Fn(f64) -> f64) -> Field {
        let mut c = self.forward(f);
        for (ci, lam) in c.iter_mut().zip(self.eigenvalues_flat()) {
            *ci *= m(lam);
        }
        self.inverse(&c)
    }

    /// Solve `(c0 − a·Δ_h) x = rhs` exactly.
    ///
    /// Axes `1..dim` are diagonalized; along axis 0 each mode leaves a
    /// tridiagonal system that is solved directly.
    pub fn solve_shifted(&self, rhs: &Field, c0: f64, a: f64) -> Field {
        let g = self.grid;
        let mut data = rhs.values().to_vec();
        for d in 1..g.dim() {
            data = apply_axis(&g, d, &data, &self.axes[d].vectors, true);
        }
        let (_, n, inner) = axis_layout(&g, 0);
        // eigenvalue sum over the transformed axes, per inner index
        let lam_inner: Vec<f64> = (0..inner)
            .map(|k| {
                let ijk = g.unravel(k);
                (1..g.dim()).map(|d| self.axes[d].eigenvalues[ijk[d]]).sum()
            })
            .collect();
        let w = a / (g.spacing(0) * g.spacing(0));
        let mut cp = vec![0.0; n * inner];
        // forward sweep
        for i in 0..n {
            let off_lo = if i > 0 { -w } else { 0.0 };
            let off_hi = if i + 1 < n { -w } else { 0.0 };
            let nb = (i > 0) as u8 as f64 + (i + 1 < n) as u8 as f64;
            for k in 0..inner {
                let diag = c0 + a * lam_inner[k] + nb * w;
                let idx = i * inner + k;
                if i == 0 {
                    cp[idx] = off_hi / diag;
                    data[idx] /= diag;
                } else {
                    let denom = diag - off_lo * cp[idx - inner];
                    cp[idx] = off_hi / denom;
                    data[idx] = (data[idx] - off_lo * data[idx - inner]) / denom;
                }
            }
        }
        for i in (0..n - 1).rev() {
            for k in 0..inner {
                let idx = i * inner + k;
                data[idx] -= cp[idx] * data[idx + inner];
            }
        }
        for d in 1..g.dim() {
            data = apply_axis(&g, d, &data, &self.axes[d].vectors, false);
        }
        Field::new(g, data).expect("sizes match")
    }
}

/// Multiply along `axis` by `Q^T` (`transpose`) or `Q`.
fn apply_axis(grid: &Grid, axis: usize, data: &[f64], q: &DMatrix<f64>, transpose: bool) -> Vec<f64> {
    let (outer, n, inner) = axis_layout(grid, axis);
    let mut out = vec![0.0; data.len()];
    for o in 0..outer {
        for i in 0..n {
            let dst = (o * n + i) * inner;
            for j in 0..n {
                let m = if transpose { q[(j, i)] } else { q[(i, j)] };
                if m == 0.0 {
                    continue;
                }
                let src = (o * n + j) * inner;
                for k in 0..inner {
                    out[dst + k] += m * data[src + k];
                }
            }
        }
    }
    out
}

/// The `k` smallest eigenpairs of `-Δ_h`, ascending, with eigenfields
/// orthonormal under `∫ f g`. The first pair is `(0, constant)`.
pub fn neumann_eigenpairs(grid: &Grid, k: usize) -> Result<Vec<(f64, Field)>> {
    if k > grid.len() {
        return Err(Error::InvalidArgument(format!(
            "requested {k} eigenpairs on a grid with {} cells",
            grid.len()
        )));
    }
    let s = Spectrum::new(grid);
    Ok(s.lowest_modes(k)
        .into_iter()
        .map(|(m, l)| (l, s.mode_field(m)))
        .collect())
}

/// `C_P = 1/λ₁`.
pub fn poincare_constant(grid: &Grid) -> f64 {
    1.0 / Spectrum::new(grid).lambda1()
}

/// Number of eigenfields spanning the random fields of the `C_Ω` estimate.
pub const EMBEDDING_MODES: usize = 20;

/// Sampled lower bound for the constant in `∫|∇w|⁴ ≤ C_Ω ∫(w² + |Δw|²)`.
///
/// Fields are standard-normal combinations of the lowest
/// [`EMBEDDING_MODES`] eigenfields; the result is the running maximum of
/// the ratio, so it never decreases as `samples` grows.
pub fn embedding_constant_estimate(grid: &Grid, samples: usize, seed: u64) -> Result<f64> {
    if grid.dim() != 3 {
        return Err(Error::InvalidArgument(format!(
            "embedding constant is defined for 3D grids, got dim {}",
            grid.dim()
        )));
    }
    let modes = neumann_eigenpairs(grid, EMBEDDING_MODES.min(grid.len()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let mut w = Field::zeros(*grid);
        for (_, e) in &modes {
            let z: f64 = StandardNormal.sample(&mut rng);
            w.axpy(z, e);
        }
        best = best.max(embedding_ratio(&w));
    }
    Ok(best)
}

/// `∫|∇w|⁴ / ∫(w² + |Δw|²)`, zero for a vanishing denominator.
pub fn embedding_ratio(w: &Field) -> f64 {
    let g4 = gradient(w).cell_norm_sq().map(|s| s * s).integrate();
    let lap = laplacian(w);
    let den = w.inner(w) + lap.inner(&lap);
    if den > 0.0 {
        g4 / den
    } else {
        0.0
    }
}

/// Domain constants used by the threshold chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainConstants {
    pub lambda1: f64,
    /// Poincaré constant `1/λ₁`.
    pub c_p: f64,
    /// Sampled lower-bound estimate of `C_Ω` (3D only).
    pub c_omega: Option<f64>,
}

impl DomainConstants {
    pub fn compute(grid: &Grid, samples: usize, seed: u64) -> Result<Self> {
        let lambda1 = Spectrum::new(grid).lambda1();
        let c_omega = if grid.dim() == 3 {
            Some(embedding_constant_estimate(grid, samples, seed)?)
        } else {
            None
        };
        Ok(DomainConstants {
            lambda1,
            c_p: 1.0 / lambda1,
            c_omega,
        })
    }
}
