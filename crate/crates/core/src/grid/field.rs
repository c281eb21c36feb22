use super::Grid;
use crate::error::{Error, Result};

/// Scalar cell-centered values on a [`Grid`], indexed lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values, grid has {} cells",
                values.len(),
                grid.len()
            )));
        }
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Field {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Sample `f` at every cell center.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.center(i))).collect();
        Field { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Midpoint quadrature `Σ values · cell volume`.
    pub fn integrate(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn mean(&self) -> f64 {
        self.integrate() / self.grid.volume()
    }

    /// `‖f‖_{L^p(Ω)}`; `p = f64::INFINITY` gives the maximum modulus.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidArgument(format!("L^p norm needs p >= 1, got {p}")));
        }
        if p.is_infinite() {
            return Ok(self.sup_norm());
        }
        let s: f64 = self.values.iter().map(|v| v.abs().powf(p)).sum();
        Ok((s * self.grid.cell_volume()).powf(1.0 / p))
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `∫ f g`.
    pub fn inner(&self, other: &Field) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.grid.cell_volume()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        debug_assert_eq!(self.grid, other.grid);
        Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// `self += a · other`.
    pub fn axpy(&mut self, a: f64, other: &Field) {
        debug_assert_eq!(self.grid, other.grid);
        for (s, o) in self.values.iter_mut().zip(&other.values) {
            *s += a * o;
        }
    }

    pub fn scale(&mut self, a: f64) {
        self.values.iter_mut().for_each(|v| *v *= a);
    }

    /// Maximum absolute pointwise difference.
    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Vector field stored on interior faces.
///
/// Component `d` holds one value per interior face normal to axis `d`, laid
/// out like the cell array with `cells[d] - 1` entries along that axis.
/// Boundary faces are not stored; their normal component is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    comps: Vec<Vec<f64>>,
}

/// Iteration helper: `(outer, n, inner)` such that a cell index is
/// `(o * n + i) * inner + k` for the given axis.
pub(crate) fn axis_layout(grid: &Grid, axis: usize) -> (usize, usize, usize) {
    let n = grid.cells[axis];
    let inner = grid.stride(axis);
    let outer = grid.len() / (n * inner);
    (outer, n, inner)
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        let comps = (0..grid.dim())
            .map(|d| vec![0.0; Self::face_count(&grid, d)])
            .collect();
        VectorField { grid, comps }
    }

    pub fn face_count(grid: &Grid, axis: usize) -> usize {
        let (outer, n, inner) = axis_layout(grid, axis);
        outer * (n - 1) * inner
    }

    pub fn from_components(grid: Grid, comps: Vec<Vec<f64>>) -> Result<Self> {
        if comps.len() != grid.dim() {
            return Err(Error::InvalidArgument(format!(
                "expected {} components, got {}",
                grid.dim(),
                comps.len()
            )));
        }
        for (d, c) in comps.iter().enumerate() {
            if c.len() != Self::face_count(&grid, d) {
                return Err(Error::InvalidArgument(format!(
                    "component {d} has {} faces, expected {}",
                    c.len(),
                    Self::face_count(&grid, d)
                )));
            }
        }
        Ok(VectorField { grid, comps })
    }

    /// Sample `f(axis, x)` at the center of every interior face.
    pub fn from_fn(grid: Grid, f: impl Fn(usize, [f64; 3]) -> f64) -> Self {
        let mut out = Self::zeros(grid);
        for d in 0..grid.dim() {
            let (outer, n, inner) = axis_layout(&grid, d);
            let comp = &mut out.comps[d];
            for o in 0..outer {
                for i in 0..n - 1 {
                    for k in 0..inner {
                        let mut x = grid.center((o * n + i) * inner + k);
                        x[d] += 0.5 * grid.h[d];
                        comp[(o * (n - 1) + i) * inner + k] = f(d, x);
                    }
                }
            }
        }
        out
    }

    /// Arithmetic mean of the two cells adjacent to each interior face.
    pub fn face_average(f: &Field) -> Self {
        let grid = f.grid;
        let mut out = Self::zeros(grid);
        for d in 0..grid.dim() {
            let (outer, n, inner) = axis_layout(&grid, d);
            let comp = &mut out.comps[d];
            for o in 0..outer {
                for i in 0..n - 1 {
                    for k in 0..inner {
                        let lo = (o * n + i) * inner + k;
                        comp[(o * (n - 1) + i) * inner + k] = 0.5 * (f.values[lo] + f.values[lo + inner]);
                    }
                }
            }
        }
        out
    }

    /// Facewise combination of two fields on the same grid.
    pub fn zip_map(&self, other: &VectorField, f: impl Fn(f64, f64) -> f64) -> VectorField {
        debug_assert_eq!(self.grid, other.grid);
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect())
            .collect();
        VectorField {
            grid: self.grid,
            comps,
        }
    }

    /// `Σ_faces g(w) · cell volume`.
    pub fn face_integral(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.comps.iter().flatten().map(|&w| g(w)).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn component(&self, axis: usize) -> &[f64] {
        &self.comps[axis]
    }

    pub fn component_mut(&mut self, axis: usize) -> &mut [f64] {
        &mut self.comps[axis]
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().flatten().all(|v| v.is_finite())
    }

    /// Face-based inner product `Σ_faces a·b · cell volume`.
    pub fn inner(&self, other: &VectorField) -> f64 {
        let s: f64 = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>())
            .sum();
        s * self.grid.cell_volume()
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// Per-cell `|w|²`: each adjacent face contributes half of its square.
    ///
    /// Its integral equals the face inner product `⟨w, w⟩`.
    pub fn cell_norm_sq(&self) -> Field {
        let mut out = vec![0.0; self.grid.len()];
        for (d, comp) in self.comps.iter().enumerate() {
            let (outer, n, inner) = axis_layout(&self.grid, d);
            for o in 0..outer {
                for i in 0..n - 1 {
                    for k in 0..inner {
                        let lo = (o * n + i) * inner + k;
                        let half = 0.5 * comp[(o * (n - 1) + i) * inner + k].powi(2);
                        out[lo] += half;
                        out[lo + inner] += half;
                    }
                }
            }
        }
        Field {
            grid: self.grid,
            values: out,
        }
    }

    /// Cell-centered components: average of the two adjacent faces, with
    /// zero on boundary faces (centered differences for gradients).
    pub fn cell_components(&self) -> Vec<Field> {
        self.comps
            .iter()
            .enumerate()
            .map(|(d, comp)| {
                let (outer, n, inner) = axis_layout(&self.grid, d);
                let mut out = vec![0.0; self.grid.len()];
                for o in 0..outer {
                    for i in 0..n - 1 {
                        for k in 0..inner {
                            let lo = (o * n + i) * inner + k;
                            let half = 0.5 * comp[(o * (n - 1) + i) * inner + k];
                            out[lo] += half;
                            out[lo + inner] += half;
                        }
                    }
                }
                Field {
                    grid: self.grid,
                    values: out,
                }
            })
            .collect()
    }

    /// `max_cells sqrt(cell_norm_sq)`.
    pub fn sup_norm(&self) -> f64 {
        self.cell_norm_sq().max().max(0.0).sqrt()
    }

    /// Largest face value in modulus.
    pub fn max_face_abs(&self) -> f64 {
        self.comps
            .iter()
            .flatten()
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}
