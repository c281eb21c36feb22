use crate::error::{Error, Result};
use crate::grid::{gradient, laplacian, Field, Grid, Spectrum, VectorField};

use super::params::{ModelParams, State, StepperConfig};

/// Counters collected during [`Stepper::run`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunStats {
    pub steps: usize,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Most negative value of [`State::undershoot`] over accepted steps.
    pub worst_undershoot: f64,
}

impl Default for RunStats {
    fn default() -> Self {
        RunStats {
            steps: 0,
            dt_min: f64::INFINITY,
            dt_max: 0.0,
            worst_undershoot: 0.0,
        }
    }
}

/// IMEX integrator for a fixed grid and parameter set.
///
/// Each step treats `Δu` and `Δv − v` by backward Euler, the chemotactic
/// flux `u∇v` explicitly with donor-cell face densities, and the reaction
/// `κu − μu² − εu^θ` explicitly:
///
/// ```text
/// (1 − dtΔ) u⁺ = u + dt(−∇·(u∇v) + κu − μu² − εu^θ)
/// ((1 + dt) − dtΔ) v⁺ = v + dt·u
/// ```
///
/// The flux divergence integrates to zero, so `∫u⁺ = ∫u + dt∫(κu − μu² − εu^θ)`
/// up to rounding.
#[derive(Debug, Clone)]
pub struct Stepper {
    grid: Grid,
    spectrum: Spectrum,
    cfg: StepperConfig,
}

impl Stepper {
    pub fn new(grid: &Grid, cfg: StepperConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Stepper {
            grid: *grid,
            spectrum: Spectrum::new(grid),
            cfg,
        })
    }

    pub fn config(&self) -> &StepperConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// Largest step for which the explicit part keeps `u ≥ 0`, scaled by the
    /// configured safety factor.
    pub fn suggest_dt(&self, s: &State) -> f64 {
        suggest_dt(s, &self.cfg)
    }

    pub fn step(&self, s: &State, dt: f64) -> Result<State> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt = {dt}")));
        }
        let p = s.params;
        let grad_v = gradient(&s.v);
        let flux_div = upwind_flux_divergence(&s.u, &grad_v);

        let mut rhs_u = s.u.clone();
        for ((r, &u), &fd) in rhs_u
            .values_mut()
            .iter_mut()
            .zip(s.u.values())
            .zip(flux_div.values())
        {
            *r = u + dt * (-fd + reaction(u, &p));
        }
        let mut rhs_v = s.v.clone();
        rhs_v.axpy(dt, &s.u);

        let u = self.solve(&rhs_u, 1.0, dt)?;
        let v = self.solve(&rhs_v, 1.0 + dt, dt)?;

        let max_u = u.max();
        if !u.is_finite() || !v.is_finite() || max_u > self.cfg.blowup_ceiling {
            return Err(Error::BlowUp {
                max_u: if max_u.is_nan() { f64::INFINITY } else { max_u },
                ceiling: self.cfg.blowup_ceiling,
            });
        }
        Ok(State {
            u,
            v,
            t: s.t + dt,
            params: p,
        })
    }

    fn solve(&self, rhs: &Field, c0: f64, a: f64) -> Result<Field> {
        let x = self.spectrum.solve_shifted(rhs, c0, a);
        let res = relative_residual(&x, rhs, c0, a);
        if res > self.cfg.solver_tol || res.is_nan() {
            return Err(Error::SolverFailure {
                residual: res,
                tolerance: self.cfg.solver_tol,
            });
        }
        Ok(x)
    }

    /// Integrate from `s0` to `t_end`.
    ///
    /// `observer` is called with the state at `t0 + k·cadence` for
    /// `k = 0..=floor((t_end − t0)/cadence)`; steps are shortened to land on
    /// those times exactly. Pass `cadence = None` to observe only the start.
    pub fn run<F>(&self, s0: State, t_end: f64, cadence: Option<f64>, mut observer: F) -> Result<(State, RunStats)>
    where
        F: FnMut(&State) -> Result<()>,
    {
        if !(t_end >= s0.t) {
            return Err(Error::InvalidArgument(format!(
                "t_end = {t_end} precedes t0 = {}",
                s0.t
            )));
        }
        if let Some(c) = cadence {
            if !(c > 0.0) {
                return Err(Error::InvalidArgument(format!("cadence = {c}")));
            }
        }
        let t0 = s0.t;
        let n_obs = match cadence {
            Some(c) => ((t_end - t0) / c + 1e-9).floor() as usize + 1,
            None => 1,
        };
        let sample_time = |k: usize| (t0 + k as f64 * cadence.unwrap_or(0.0)).min(t_end);

        let mut stats = RunStats::default();
        let mut s = s0;
        stats.worst_undershoot = s.undershoot().min(0.0);
        observer(&s).map_err(|e| wrap(s.t, e))?;
        let mut next_obs = 1;

        while t_end - s.t > 1e-12 * t_end.abs().max(1.0) {
            let mut target = t_end;
            if next_obs < n_obs {
                target = target.min(sample_time(next_obs));
            }
            let dt_cap = self.cfg.dt.min(self.suggest_dt(&s));
            let (dt, land) = if s.t + dt_cap >= target - 1e-12 * target.abs().max(1.0) {
                (target - s.t, true)
            } else {
                (dt_cap, false)
            };
            let mut next = self.step(&s, dt).map_err(|e| wrap(s.t, e))?;
            if land {
                next.t = target;
            }
            s = next;
            stats.steps += 1;
            stats.dt_min = stats.dt_min.min(dt);
            stats.dt_max = stats.dt_max.max(dt);
            stats.worst_undershoot = stats.worst_undershoot.min(s.undershoot());
            if next_obs < n_obs && land && target == sample_time(next_obs) {
                observer(&s).map_err(|e| wrap(s.t, e))?;
                next_obs += 1;
            }
        }
        Ok((s, stats))
    }
}

fn wrap(t: f64, e: Error) -> Error {
    match e {
        e @ Error::RunFailed { .. } => e,
        e => Error::RunFailed {
            t,
            source: Box::new(e),
        },
    }
}

#[inline]
fn reaction(u: f64, p: &ModelParams) -> f64 {
    let mut r = p.kappa * u - p.mu * u * u;
    if p.eps > 0.0 {
        r -= p.eps * u.max(0.0).powf(p.theta);
    }
    r
}

/// `∇·(u∇v)` with the donor cell chosen by the sign of the face gradient.
fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// `∇·(u∇v)` with donor-side face densities reconstructed by a minmod-limited
/// slope. The face value stays in `[u/2, 3u/2]` of the donor cell.
fn upwind_flux_divergence(u: &Field, grad_v: &VectorField) -> Field {
    let grid = *u.grid();
    let uv = u.values();
    let mut comps = Vec::with_capacity(grid.dim());
    let mut slope = vec![0.0; grid.len()];
    for d in 0..grid.dim() {
        let n = grid.cells()[d];
        let inner = grid.stride(d);
        let gc = grad_v.component(d);
        let mut flux = vec![0.0; gc.len()];
        let outer = grid.len() / (n * inner);
        for o in 0..outer {
            for i in 0..n {
                let base = (o * n + i) * inner;
                for k in 0..inner {
                    let c = uv[base + k];
                    // reflected ghosts give zero slope in the boundary cells
                    slope[base + k] = if i == 0 || i == n - 1 {
                        0.0
                    } else {
                        minmod(uv[base + k + inner] - c, c - uv[base + k - inner])
                    };
                }
            }
            for i in 0..n - 1 {
                let base = (o * n + i) * inner;
                let fbase = (o * (n - 1) + i) * inner;
                for k in 0..inner {
                    let g = gc[fbase + k];
                    let face = if g > 0.0 {
                        uv[base + k] + 0.5 * slope[base + k]
                    } else {
                        uv[base + k + inner] - 0.5 * slope[base + k + inner]
                    };
                    flux[fbase + k] = face * g;
                }
            }
        }
        comps.push(flux);
    }
    let vf = VectorField::from_components(grid, comps).expect("face counts match");
    crate::grid::divergence(&vf)
}

fn relative_residual(x: &Field, rhs: &Field, c0: f64, a: f64) -> f64 {
    let lap = laplacian(x);
    let mut num: f64 = 0.0;
    for ((&xi, &li), &bi) in x.values().iter().zip(lap.values()).zip(rhs.values()) {
        num = num.max((c0 * xi - a * li - bi).abs());
    }
    num / rhs.sup_norm().max(f64::MIN_POSITIVE)
}

/// Safety-scaled minimum of the diffusion, advection and reaction bounds:
///
/// ```text
/// safety · min( h²/(2n), h/(3n·max|∇v|), 1/(|κ| + 2μ max u + εθ (max u)^{θ−1} + 1) )
/// ```
///
/// `h` is the smallest spacing and `max|∇v|` the largest face gradient.
pub fn suggest_dt(s: &State, cfg: &StepperConfig) -> f64 {
    let g = s.u.grid();
    let n = g.dim() as f64;
    let h = g.min_spacing();
    let p = &s.params;
    let diff = h * h / (2.0 * n);
    let gmax = gradient(&s.v).max_face_abs();
    let adv = if gmax > 0.0 {
        h / (3.0 * n * gmax)
    } else {
        f64::INFINITY
    };
    let umax = s.u.max().max(0.0);
    let mut rate = p.kappa.abs() + 2.0 * p.mu * umax + 1.0;
    if p.eps > 0.0 {
        rate += p.eps * p.theta * umax.powf(p.theta - 1.0);
    }
    cfg.safety * diff.min(adv).min(1.0 / rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::NONNEGATIVITY_TOL;
    use std::f64::consts::PI;

    fn state(u: Field, v: Field, kappa: f64, mu: f64) -> State {
        let dim = u.grid().dim();
        State::new(u, v, 0.0, ModelParams::limit(kappa, mu, dim).unwrap()).unwrap()
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let g = Grid::new(2, &[1.0, 1.0], &[8, 8]).unwrap();
        let st = Stepper::new(&g, StepperConfig::default()).unwrap();
        let s = state(Field::zeros(g), Field::zeros(g), 1.0, 1.0);
        let n = st.step(&s, 1e-3).unwrap();
        assert_eq!(n.u.sup_norm(), 0.0);
        assert_eq!(n.v.sup_norm(), 0.0);
    }

    #[test]
    fn constant_u_follows_logistic_update() {
        let g = Grid::new(1, &[1.0], &[16]).unwrap();
        let st = Stepper::new(&g, StepperConfig::default()).unwrap();
        let (c, mu, dt) = (2.0, 1.5, 1e-3);
        let s = state(Field::constant(g, c), Field::zeros(g), 0.0, mu);
        let n = st.step(&s, dt).unwrap();
        let expect = c - dt * mu * c * c;
        assert!(n.u.max_abs_diff(&Field::constant(g, expect)) < 1e-13);
    }

    #[test]
    fn eigenfield_decays_by_backward_euler_factor() {
        let g = Grid::new(1, &[2.0], &[32]).unwrap();
        let st = Stepper::new(&g, StepperConfig::default()).unwrap();
        let sp = Spectrum::new(&g);
        let e1 = sp.mode_field([1, 0, 0]);
        let lam = sp.lambda1();
        let dt = 0.01;
        let s = state(Field::zeros(g), e1.clone(), 0.0, 1.0);
        let n = st.step(&s, dt).unwrap();
        let mut expect = e1;
        expect.scale(1.0 / (1.0 + dt * (1.0 + lam)));
        assert!(n.v.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn suggest_dt_formula() {
        let g = Grid::new(1, &[1.0], &[64]).unwrap();
        let cfg = StepperConfig {
            safety: 1.0,
            ..Default::default()
        };
        let s = state(Field::zeros(g), Field::zeros(g), 0.0, 1.0);
        let h = 1.0 / 64.0;
        assert!((suggest_dt(&s, &cfg) - h * h / 2.0).abs() < 1e-18);
        let half = StepperConfig { safety: 0.5, ..cfg };
        assert!((suggest_dt(&s, &half) - h * h / 4.0).abs() < 1e-18);

        // advection binds for a steep v; doubling it halves dt
        let v = Field::from_fn(g, |x| 100.0 * x[0]);
        let s1 = state(Field::zeros(g), v.clone(), 0.0, 1.0);
        let s2 = state(Field::zeros(g), v.map(|x| 2.0 * x), 0.0, 1.0);
        let (a, b) = (suggest_dt(&s1, &cfg), suggest_dt(&s2, &cfg));
        assert!((a / b - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mass_identity_and_v_mean() {
        let g = Grid::new(2, &[3.0, 2.0], &[24, 16]).unwrap();
        let st = Stepper::new(&g, StepperConfig::default()).unwrap();
        let u = Field::from_fn(g, |x| 1.0 + 0.8 * (PI * x[0] / 3.0).cos() * (PI * x[1] / 2.0).cos());
        let v = Field::from_fn(g, |x| 1.0 + 0.5 * (2.0 * PI * x[1] / 2.0).cos());
        let p = ModelParams::new(0.3, 0.7, 0.01, 5.0, 2).unwrap();
        let mut s = State::new(u, v, 0.0, p).unwrap();
        for _ in 0..20 {
            let dt = st.suggest_dt(&s);
            let n = st.step(&s, dt).unwrap();
            let react = s.u.map(|u| reaction(u, &p)).integrate();
            let expect = s.u.integrate() + dt * react;
            assert!((n.u.integrate() - expect).abs() <= 1e-12 * expect.abs().max(1.0));
            let mv = (s.v.mean() + dt * s.u.mean()) / (1.0 + dt);
            assert!((n.v.mean() - mv).abs() <= 1e-12 * mv.abs().max(1.0));
            assert!(n.undershoot() >= -NONNEGATIVITY_TOL);
            s = n;
        }
    }

    #[test]
    fn blowup_ceiling() {
        let g = Grid::new(1, &[1.0], &[8]).unwrap();
        let cfg = StepperConfig {
            blowup_ceiling: 1.5,
            ..Default::default()
        };
        let st = Stepper::new(&g, cfg).unwrap();
        let s = state(Field::constant(g, 1.4), Field::zeros(g), 100.0, 1.0);
        let e = st.step(&s, 0.01).unwrap_err();
        assert!(e.is_blowup());
    }

    #[test]
    fn run_observer_cadence() {
        let g = Grid::new(1, &[1.0], &[8]).unwrap();
        let st = Stepper::new(&g, StepperConfig::default()).unwrap();
        let s0 = state(Field::constant(g, 1.0), Field::zeros(g), -1.0, 1.0);
        let mut times = Vec::new();
        let (s, stats) = st
            .run(s0.clone(), 1.05, Some(0.1), |s| {
                times.push(s.t);
                Ok(())
            })
            .unwrap();
        assert_eq!(times.len(), 11);
        assert!((s.t - 1.05).abs() < 1e-14);
        for (k, t) in times.iter().enumerate() {
            assert!((t - 0.1 * k as f64).abs() < 1e-12);
        }
        assert!(stats.steps > 0);

        let mut count = 0;
        let (s, stats) = st
            .run(s0.clone(), 0.0, Some(0.1), |_| {
                count += 1;
                Ok(())
            })
            .unwrap();
        assert_eq!((count, stats.steps), (1, 0));
        assert_eq!(s, s0);
    }

    #[test]
    fn reflection_symmetry_preserved() {
        let g = Grid::new(1, &[1.0], &[32]).unwrap();
        let st = Stepper::new(&g, StepperConfig::default()).unwrap();
        let u = Field::from_fn(g, |x| (-40.0 * (x[0] - 0.5).powi(2)).exp() * 3.0);
        let s0 = state(u, Field::constant(g, 0.2), 0.5, 1.0);
        let (s, _) = st.run(s0, 0.5, None, |_| Ok(())).unwrap();
        let v = s.u.values();
        for i in 0..16 {
            assert!((v[i] - v[31 - i]).abs() <= 1e-12 * s.u.max());
        }
    }
}
