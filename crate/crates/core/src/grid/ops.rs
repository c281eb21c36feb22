use super::field::axis_layout;
use super::{Field, Grid, VectorField};

/// Discrete gradient on interior faces: `(f[i+1] - f[i]) / h`, a centered
/// difference about each face. Boundary faces are zero (reflected ghosts).
pub fn gradient(f: &Field) -> VectorField {
    let grid = *f.grid();
    let vals = f.values();
    let mut out = VectorField::zeros(grid);
    for d in 0..grid.dim() {
        let (outer, n, inner) = axis_layout(&grid, d);
        let inv_h = 1.0 / grid.spacing(d);
        let comp = out.component_mut(d);
        for o in 0..outer {
            for i in 0..n - 1 {
                let base = (o * n + i) * inner;
                let fbase = (o * (n - 1) + i) * inner;
                for k in 0..inner {
                    comp[fbase + k] = (vals[base + k + inner] - vals[base + k]) * inv_h;
                }
            }
        }
    }
    out
}

/// Flux-form divergence of a face field with zero flux through the boundary.
///
/// `divergence(&gradient(f))` is the compact Laplacian, and the integral of
/// any divergence telescopes to zero.
pub fn divergence(vf: &VectorField) -> Field {
    let grid = *vf.grid();
    let mut out = vec![0.0; grid.len()];
    for d in 0..grid.dim() {
        let (outer, n, inner) = axis_layout(&grid, d);
        let inv_h = 1.0 / grid.spacing(d);
        let comp = vf.component(d);
        for o in 0..outer {
            for i in 0..n - 1 {
                let base = (o * n + i) * inner;
                let fbase = (o * (n - 1) + i) * inner;
                for k in 0..inner {
                    let flux = comp[fbase + k] * inv_h;
                    out[base + k] += flux;
                    out[base + k + inner] -= flux;
                }
            }
        }
    }
    Field::new(grid, out).expect("sizes match by construction")
}

/// Compact `(2·dim+1)`-point Neumann Laplacian.
pub fn laplacian(f: &Field) -> Field {
    let grid = *f.grid();
    let vals = f.values();
    let mut out = vec![0.0; grid.len()];
    for d in 0..grid.dim() {
        let (outer, n, inner) = axis_layout(&grid, d);
        let inv_h2 = 1.0 / (grid.spacing(d) * grid.spacing(d));
        for o in 0..outer {
            for i in 0..n {
                let base = (o * n + i) * inner;
                for k in 0..inner {
                    let c = vals[base + k];
                    let mut acc = 0.0;
                    if i > 0 {
                        acc += vals[base + k - inner] - c;
                    }
                    if i + 1 < n {
                        acc += vals[base + k + inner] - c;
                    }
                    out[base + k] += acc * inv_h2;
                }
            }
        }
    }
    Field::new(grid, out).expect("sizes match by construction")
}

/// Centered cell difference along `axis` with reflected ghosts.
fn centered_diff(f: &Field, axis: usize) -> Field {
    let grid = *f.grid();
    let vals = f.values();
    let (outer, n, inner) = axis_layout(&grid, axis);
    let inv_2h = 0.5 / grid.spacing(axis);
    let mut out = vec![0.0; grid.len()];
    for o in 0..outer {
        for i in 0..n {
            let base = (o * n + i) * inner;
            for k in 0..inner {
                let lo = if i > 0 { vals[base + k - inner] } else { vals[base + k] };
                let hi = if i + 1 < n { vals[base + k + inner] } else { vals[base + k] };
                out[base + k] = (hi - lo) * inv_2h;
            }
        }
    }
    Field::new(grid, out).expect("sizes match by construction")
}

fn second_diff(f: &Field, axis: usize) -> Field {
    let grid = *f.grid();
    let vals = f.values();
    let (outer, n, inner) = axis_layout(&grid, axis);
    let inv_h2 = 1.0 / (grid.spacing(axis) * grid.spacing(axis));
    let mut out = vec![0.0; grid.len()];
    for o in 0..outer {
        for i in 0..n {
            let base = (o * n + i) * inner;
            for k in 0..inner {
                let c = vals[base + k];
                let lo = if i > 0 { vals[base + k - inner] } else { c };
                let hi = if i + 1 < n { vals[base + k + inner] } else { c };
                out[base + k] = (hi - 2.0 * c + lo) * inv_h2;
            }
        }
    }
    Field::new(grid, out).expect("sizes match by construction")
}

/// Both sides of `Δ|∇w|² = 2∇w·∇Δw + 2|D²w|²` with centered differences.
///
/// Only cells at least two cells away from every boundary face are
/// meaningful; [`interior_mask`] selects them.
pub fn bochner_sides(w: &Field) -> (Field, Field) {
    let grid = *w.grid();
    let dim = grid.dim();
    let grads: Vec<Field> = (0..dim).map(|d| centered_diff(w, d)).collect();
    let grad_sq = grads
        .iter()
        .fold(Field::zeros(grid), |acc, g| acc.zip_map(g, |a, b| a + b * b));
    let lhs = laplacian(&grad_sq);

    let lap_w = laplacian(w);
    let mut rhs = Field::zeros(grid);
    for (d, g) in grads.iter().enumerate() {
        let dl = centered_diff(&lap_w, d);
        rhs = rhs.zip_map(&g.zip_map(&dl, |a, b| a * b), |r, t| r + 2.0 * t);
        for e in 0..dim {
            let h = if d == e {
                second_diff(w, d)
            } else {
                centered_diff(&grads[e], d)
            };
            rhs = rhs.zip_map(&h, |r, t| r + 2.0 * t * t);
        }
    }
    (lhs, rhs)
}

/// Cells at least `margin` cells from every boundary face.
pub fn interior_mask(grid: &Grid, margin: usize) -> Vec<bool> {
    (0..grid.len())
        .map(|idx| {
            let ijk = grid.unravel(idx);
            (0..grid.dim()).all(|d| ijk[d] >= margin && ijk[d] + margin < grid.cells()[d])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_field(grid: Grid, rng: &mut ChaCha8Rng) -> Field {
        Field::new(grid, (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn constant_field_has_zero_gradient() {
        let g = Grid::new(2, &[1.0, 3.0], &[8, 5]).unwrap();
        let grad = gradient(&Field::constant(g, 4.2));
        assert_eq!(grad.max_face_abs(), 0.0);
        assert_eq!(divergence(&VectorField::zeros(g)).sup_norm(), 0.0);
    }

    #[test]
    fn gradient_of_cosine() {
        let l = 2.0;
        let n = 128;
        let g = Grid::new(1, &[l], &[n]).unwrap();
        let f = Field::from_fn(g, |x| (PI * x[0] / l).cos());
        let grad = gradient(&f);
        let h = l / n as f64;
        let mut err: f64 = 0.0;
        for (i, gv) in grad.component(0).iter().enumerate() {
            let xf = (i + 1) as f64 * h;
            err = err.max((gv + PI / l * (PI * xf / l).sin()).abs());
        }
        assert!(err < 2.0 * h * h, "err {err}");
    }

    #[test]
    fn symmetric_field_gives_antisymmetric_gradient() {
        let g = Grid::new(1, &[1.0], &[16]).unwrap();
        let f = Field::from_fn(g, |x| (x[0] - 0.5).powi(2));
        let c = gradient(&f).cell_components().remove(0);
        let v = c.values();
        for i in 0..16 {
            assert!((v[i] + v[15 - i]).abs() < 1e-14);
        }
    }

    #[test]
    fn laplacian_of_linear_is_zero_inside() {
        let g = Grid::new(1, &[1.0], &[32]).unwrap();
        let f = Field::from_fn(g, |x| 3.0 * x[0] - 1.0);
        let l = laplacian(&f);
        for i in 1..31 {
            assert!(l.values()[i].abs() < 1e-10);
        }
    }

    #[test]
    fn laplacian_of_neumann_cosine() {
        let l = 3.0;
        let g = Grid::new(1, &[l], &[256]).unwrap();
        let f = Field::from_fn(g, |x| (PI * x[0] / l).cos());
        let lap = laplacian(&f);
        let k2 = (PI / l).powi(2);
        let h = g.spacing(0);
        let err = lap.zip_map(&f, |a, b| a + k2 * b).sup_norm();
        assert!(err < h * h, "err {err}");
    }

    #[test]
    fn div_grad_is_laplacian() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for g in [
            Grid::new(1, &[1.0], &[17]).unwrap(),
            Grid::new(2, &[1.0, 0.5], &[9, 6]).unwrap(),
            Grid::new(3, &[1.0, 2.0, 1.5], &[5, 6, 7]).unwrap(),
        ] {
            let f = random_field(g, &mut rng);
            let a = divergence(&gradient(&f));
            let b = laplacian(&f);
            assert!(a.max_abs_diff(&b) < 1e-12 * b.sup_norm().max(1.0));
            assert!(b.integrate().abs() <= 1e-12 * b.lp_norm(1.0).unwrap());
        }
    }

    #[test]
    fn bochner_quadratic_exact() {
        let g = Grid::new(1, &[1.0], &[32]).unwrap();
        let w = Field::from_fn(g, |x| x[0] * x[0]);
        let (lhs, rhs) = bochner_sides(&w);
        let mask = interior_mask(&g, 2);
        for i in 0..g.len() {
            if mask[i] {
                assert!((lhs.values()[i] - 8.0).abs() < 1e-9, "lhs {}", lhs.values()[i]);
                assert!((rhs.values()[i] - 8.0).abs() < 1e-9, "rhs {}", rhs.values()[i]);
            }
        }
    }

    #[test]
    fn bochner_cubic_first_order() {
        // the gap between the two sides shrinks under refinement
        let gap = |n: usize| {
            let g = Grid::new(2, &[1.0, 1.0], &[n, n]).unwrap();
            let w = Field::from_fn(g, |x| x[0].powi(3) + x[0] * x[1] * x[1] - 0.5 * x[1].powi(2));
            let (lhs, rhs) = bochner_sides(&w);
            let mask = interior_mask(&g, 3);
            (0..g.len())
                .filter(|&i| mask[i])
                .map(|i| (lhs.values()[i] - rhs.values()[i]).abs())
                .fold(0.0, f64::max)
        };
        let (a, b) = (gap(16), gap(32));
        assert!(b <= a * 0.6 + 1e-9, "{a} {b}");
    }
}
