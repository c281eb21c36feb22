use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{gradient, Field, Grid, VectorField};

use super::trace::Trace;

/// Separable test function `φ(x, t) = ψ(t) · Σ_m a_m Π_d cos(k_{m,d} π x_d / L_d)`.
///
/// The spatial part satisfies the Neumann condition. The time profile
/// `ψ(t) = 1 − s + sin(2πs)/(2π)` with `s = (t − t0)/T` runs smoothly from
/// `ψ = 1` to `ψ = 0` with `ψ' = 0` at both ends and vanishes for `s ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub modes: Vec<([u32; 3], f64)>,
    /// Support length `T`.
    pub support: f64,
}

impl TestFunction {
    pub fn new(modes: Vec<([u32; 3], f64)>, support: f64) -> Result<Self> {
        if !(support > 0.0) {
            return Err(Error::InvalidArgument(format!("support {support} must be positive")));
        }
        Ok(TestFunction { modes, support })
    }

    /// `ψ(s)` on the normalized time `s = (t − t0)/T`.
    pub fn psi(&self, s: f64) -> f64 {
        if s >= 1.0 {
            0.0
        } else {
            1.0 - s + (2.0 * PI * s).sin() / (2.0 * PI)
        }
    }

    /// `dψ/dt`.
    pub fn psi_t(&self, s: f64) -> f64 {
        if s >= 1.0 {
            0.0
        } else {
            -(1.0 - (2.0 * PI * s).cos()) / self.support
        }
    }

    fn wavenumbers(grid: &Grid, k: &[u32; 3]) -> [f64; 3] {
        let mut w = [0.0; 3];
        for d in 0..grid.dim() {
            w[d] = k[d] as f64 * PI / grid.extents()[d];
        }
        w
    }

    fn term(grid: &Grid, k: &[u32; 3], x: [f64; 3]) -> f64 {
        let w = Self::wavenumbers(grid, k);
        (0..grid.dim()).map(|d| (w[d] * x[d]).cos()).product()
    }

    /// Spatial part `χ(x)` at cell centers.
    pub fn space(&self, grid: &Grid) -> Field {
        Field::from_fn(*grid, |x| {
            self.modes
                .iter()
                .map(|(k, a)| a * Self::term(grid, k, x))
                .sum()
        })
    }

    /// Exact `Δχ` at cell centers.
    pub fn space_laplacian(&self, grid: &Grid) -> Field {
        Field::from_fn(*grid, |x| {
            self.modes
                .iter()
                .map(|(k, a)| {
                    let w = Self::wavenumbers(grid, k);
                    let k2: f64 = w.iter().map(|v| v * v).sum();
                    -a * k2 * Self::term(grid, k, x)
                })
                .sum()
        })
    }

    /// Exact `∇χ` at face centers (normal component).
    pub fn space_gradient(&self, grid: &Grid) -> VectorField {
        VectorField::from_fn(*grid, |axis, x| {
            self.modes
                .iter()
                .map(|(k, a)| {
                    let w = Self::wavenumbers(grid, k);
                    let mut prod = -a * w[axis] * (w[axis] * x[axis]).sin();
                    for d in 0..grid.dim() {
                        if d != axis {
                            prod *= (w[d] * x[d]).cos();
                        }
                    }
                    prod
                })
                .sum()
        })
    }
}

/// Residuals of the two weak identities plus the discretization scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakResidual {
    pub r_u: f64,
    pub r_v: f64,
    /// Smallest grid spacing.
    pub h: f64,
    /// Step cap of the run.
    pub dt: f64,
    /// Spacing of the snapshots used for the time quadrature.
    pub cadence: f64,
}

/// Evaluate
///
/// ```text
/// r_u = | −∫∫uφ_t − ∫u₀φ(0) − ∫∫uΔφ − ∫∫u∇v·∇φ − κ∫∫uφ + μ∫∫u²φ + ε∫∫u^θφ |
/// r_v = | −∫∫vφ_t − ∫v₀φ(0) + ∫∫∇v·∇φ + ∫∫vφ − ∫∫uφ |
/// ```
///
/// over the stored snapshots, with the midpoint rule in space, the trapezoid
/// rule in time and `∇v·∇φ` evaluated on faces. The time origin of `φ` is
/// the first snapshot, and `φ` must vanish by the last one.
pub fn weak_residual(tr: &Trace, phi: &TestFunction) -> Result<WeakResidual> {
    let snaps = tr.snapshots();
    if snaps.len() < 2 {
        return Err(Error::MissingData("weak residual needs at least two snapshots".into()));
    }
    let t0 = snaps[0].t;
    let t_last = snaps[snaps.len() - 1].t;
    if t_last - t0 < phi.support * (1.0 - 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "test function with support {} does not vanish by the final time {}",
            phi.support,
            t_last - t0
        )));
    }
    let g = tr.meta.grid;
    let p = tr.meta.params;
    let chi = phi.space(&g);
    let lap_chi = phi.space_laplacian(&g);
    let grad_chi = phi.space_gradient(&g);

    // per-snapshot integrands, split into ψ_t- and ψ-weighted parts
    let mut fu = Vec::with_capacity(snaps.len());
    let mut fv = Vec::with_capacity(snaps.len());
    for sn in snaps {
        let s = (sn.t - t0) / phi.support;
        let (psi, psi_t) = (phi.psi(s), phi.psi_t(s));
        let gv = gradient(&sn.v);
        let u_face = VectorField::face_average(&sn.u);
        let cross = gv.zip_map(&grad_chi, |a, b| a * b);
        let u_cross = cross.zip_map(&u_face, |c, uf| c * uf).face_integral(|x| x);
        let v_cross = cross.face_integral(|x| x);

        let u_chi = sn.u.inner(&chi);
        let u_lap = sn.u.inner(&lap_chi);
        let u2_chi = sn.u.map(|x| x * x).inner(&chi);
        let ueps = if p.eps > 0.0 {
            p.eps * sn.u.map(|x| x.max(0.0).powf(p.theta)).inner(&chi)
        } else {
            0.0
        };
        let v_chi = sn.v.inner(&chi);

        fu.push(-u_chi * psi_t - psi * (u_lap + u_cross + p.kappa * u_chi - p.mu * u2_chi - ueps));
        fv.push(-v_chi * psi_t - psi * (-v_cross - v_chi + u_chi));
    }
    let trap = |f: &[f64]| -> f64 {
        snaps
            .windows(2)
            .zip(f.windows(2))
            .map(|(s, y)| 0.5 * (s[1].t - s[0].t) * (y[0] + y[1]))
            .sum()
    };
    let r_u = trap(&fu) - snaps[0].u.inner(&chi) * phi.psi(0.0);
    let r_v = trap(&fv) - snaps[0].v.inner(&chi) * phi.psi(0.0);
    let cadence = (t_last - t0) / (snaps.len() - 1) as f64;
    Ok(WeakResidual {
        r_u: r_u.abs(),
        r_v: r_v.abs(),
        h: g.min_spacing(),
        dt: tr.meta.dt,
        cadence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::trace_run;
    use crate::solver::{ModelParams, State, Stepper, StepperConfig};

    fn phi() -> TestFunction {
        TestFunction::new(vec![([0, 0, 0], 0.5), ([1, 0, 0], 1.0), ([2, 1, 0], -0.3)], 1.0).unwrap()
    }

    #[test]
    fn profile_endpoints() {
        let f = phi();
        assert_eq!(f.psi(0.0), 1.0);
        assert!(f.psi(1.0).abs() < 1e-15 && f.psi(2.0) == 0.0);
        assert!(f.psi_t(0.0).abs() < 1e-15);
        let h = 1e-6;
        assert!(((f.psi(0.3 + h) - f.psi(0.3 - h)) / (2.0 * h) - f.psi_t(0.3)).abs() < 1e-8);
    }

    #[test]
    fn analytic_derivatives() {
        let g = Grid::new(2, &[1.0, 2.0], &[64, 64]).unwrap();
        let f = phi();
        let num = crate::grid::laplacian(&f.space(&g));
        let exact = f.space_laplacian(&g);
        // compare away from the boundary, where the stencil is consistent
        let mask = crate::grid::interior_mask(&g, 1);
        let err = (0..g.len())
            .filter(|&i| mask[i])
            .map(|i| (num.values()[i] - exact.values()[i]).abs())
            .fold(0.0, f64::max);
        // stencil truncation: |w² − (4/h²)sin²(wh/2)| ≤ w⁴h²/12 per axis
        let bound: f64 = f
            .modes
            .iter()
            .map(|(k, a)| {
                (0..2)
                    .map(|d| (k[d] as f64 * PI / g.extents()[d]).powi(4) * g.spacing(d).powi(2) / 12.0)
                    .sum::<f64>()
                    * a.abs()
            })
            .sum();
        assert!(err <= bound, "{err} > {bound}");
        let gn = gradient(&f.space(&g));
        let ge = f.space_gradient(&g);
        let d = gn.zip_map(&ge, |a, b| a - b).max_face_abs();
        assert!(d < 1e-3, "{d}");
    }

    fn traced(u: Field, v: Field, p: ModelParams, t_end: f64, cadence: f64) -> Trace {
        let g = *u.grid();
        let st = Stepper::new(&g, StepperConfig { dt: 1e-3, ..Default::default() }).unwrap();
        let s0 = State::new(u, v, 0.0, p).unwrap();
        trace_run(&st, s0, t_end, cadence, 1).unwrap().trace
    }

    #[test]
    fn zero_trajectory_has_zero_residual() {
        let g = Grid::new(1, &[2.0], &[16]).unwrap();
        let tr = traced(Field::zeros(g), Field::zeros(g), ModelParams::limit(1.0, 1.0, 1).unwrap(), 1.0, 0.1);
        let r = weak_residual(&tr, &phi()).unwrap();
        assert_eq!((r.r_u, r.r_v), (0.0, 0.0));
    }

    #[test]
    fn steady_constants() {
        let g = Grid::new(2, &[2.0, 1.0], &[16, 8]).unwrap();
        let (k, mu) = (0.6, 1.5);
        let c = Field::constant(g, k / mu);
        let tr = traced(c.clone(), c, ModelParams::limit(k, mu, 2).unwrap(), 1.0, 0.05);
        let r = weak_residual(&tr, &phi()).unwrap();
        assert!(r.r_u < 1e-10 && r.r_v < 1e-10, "{r:?}");
    }

    #[test]
    fn rejects_long_support() {
        let g = Grid::new(1, &[2.0], &[16]).unwrap();
        let tr = traced(Field::zeros(g), Field::zeros(g), ModelParams::limit(1.0, 1.0, 1).unwrap(), 0.5, 0.1);
        assert!(weak_residual(&tr, &phi()).is_err());
    }
}
