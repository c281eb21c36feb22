//! Spectral Neumann heat semigroup: `e^{t(Δ−s)}` on grids, the `L^q → W^{1,∞}`
//! smoothing-rate fit and the variation-of-constants reconstruction of `v`.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::Trace;
use crate::grid::{gradient, Field, Grid, Spectrum};

/// Eigen-expansion of the discrete Neumann Laplacian, complete or truncated
/// to the `K` smallest eigenvalues.
#[derive(Debug, Clone)]
pub struct SpectralKernel {
    spectrum: Spectrum,
    /// Eigenvalues above this are dropped; `INFINITY` for a complete kernel.
    cutoff: f64,
    kept: usize,
}

impl SpectralKernel {
    pub fn new(grid: &Grid) -> Self {
        SpectralKernel {
            spectrum: Spectrum::new(grid),
            cutoff: f64::INFINITY,
            kept: grid.len(),
        }
    }

    /// Keep the `k` lowest modes (ties at the cutoff are kept).
    pub fn truncated(grid: &Grid, k: usize) -> Result<Self> {
        if k == 0 || k > grid.len() {
            return Err(Error::InvalidArgument(format!(
                "mode count {k} must lie in 1..={}",
                grid.len()
            )));
        }
        let spectrum = Spectrum::new(grid);
        let mut ev = spectrum.eigenvalues_flat();
        ev.sort_by(f64::total_cmp);
        let cutoff = ev[k - 1];
        let kept = ev.iter().filter(|&&l| l <= cutoff).count();
        Ok(SpectralKernel { spectrum, cutoff, kept })
    }

    pub fn grid(&self) -> &Grid {
        self.spectrum.grid()
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn is_complete(&self) -> bool {
        self.kept == self.grid().len()
    }

    pub fn modes(&self) -> usize {
        self.kept
    }

    /// `Σ_j e^{−(λ_j + shift)t}⟨f, e_j⟩e_j`.
    pub fn apply(&self, t: f64, f: &Field, shift: f64) -> Result<Field> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidArgument(format!("semigroup time {t} must be >= 0")));
        }
        if t == 0.0 && self.is_complete() {
            return Ok(f.clone());
        }
        let cut = self.cutoff;
        Ok(self
            .spectrum
            .apply_multiplier(f, |l| if l <= cut { (-(l + shift) * t).exp() } else { 0.0 }))
    }
}

/// `e^{tΔ}f` (`shift = 0`) or `e^{t(Δ−1)}f` (`shift = 1`).
pub fn semigroup_apply(k: &SpectralKernel, t: f64, f: &Field, shift: f64) -> Result<Field> {
    k.apply(t, f, shift)
}

/// Exponent `(−1/2 − n/(2q))·q/(q−1)` of the time integrand behind `C₄`.
pub fn c4_exponent(n: usize, q: f64) -> f64 {
    (-0.5 - n as f64 / (2.0 * q)) * q / (q - 1.0)
}

/// Whether `∫₀ᵀ (1 + (T−s)^{−1/2−n/(2q)})^{q/(q−1)} ds` is finite, which is
/// the case exactly for `q > n + 2`.
pub fn c4_finite(n: usize, q: f64) -> bool {
    q > 1.0 && c4_exponent(n, q) > -1.0
}

/// Continuum smoothing exponent `1/2 + n/(2q)`.
pub fn expected_alpha(n: usize, q: f64) -> f64 {
    0.5 + n as f64 / (2.0 * q)
}

/// Number of log-spaced τ values in a fit.
pub const FIT_TAUS: usize = 12;
/// Smallest admissible τ in units of `h²`.
pub const TAU_MIN_H2: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothingFit {
    pub n: usize,
    pub q: f64,
    pub alpha_expected: f64,
    pub alpha_fit: f64,
    pub c_fit: f64,
    pub rel_err: f64,
    /// Largest `‖∇e^{τΔ}w‖_∞/‖∇w‖_∞` over the samples.
    pub contraction: f64,
    pub c4_finite: bool,
    #[serde(skip)]
    pub taus: Vec<f64>,
    #[serde(skip)]
    pub ratios: Vec<f64>,
}

/// Fit `sup_w ‖∇e^{τΔ}w‖_∞/‖w‖_q ≈ C τ^{−α}` over log-spaced `τ ∈ [10h², 1]`.
///
/// For each `τ` the supremum runs over `trials` Gaussian bumps with random
/// centers and widths `σ = s√τ`, `s` log-uniform in `[1/4, 4]`: the family on
/// which the continuum rate is attained. `α` and `log C` come from a least
/// squares line through `(log τ, log ratio)`.
pub fn smoothing_fit(k: &SpectralKernel, q: f64, trials: usize, seed: u64) -> Result<SmoothingFit> {
    if !(q >= 1.0) {
        return Err(Error::InvalidArgument(format!("q = {q} must be >= 1")));
    }
    if trials < 10 {
        return Err(Error::InvalidArgument(format!("need at least 10 trials, got {trials}")));
    }
    let g = *k.grid();
    let h = g.min_spacing();
    let tau_min = TAU_MIN_H2 * h * h;
    if tau_min >= 0.1 {
        return Err(Error::InvalidArgument(format!(
            "grid too coarse: 10h^2 = {tau_min} leaves no tau range below 1"
        )));
    }
    let n = g.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ln_min = tau_min.ln();
    let taus: Vec<f64> = (0..FIT_TAUS)
        .map(|i| (ln_min + (0.0 - ln_min) * i as f64 / (FIT_TAUS - 1) as f64).exp())
        .collect();
    let mut ratios = Vec::with_capacity(FIT_TAUS);
    let mut contraction: f64 = 0.0;
    for &tau in &taus {
        let mut best: f64 = 0.0;
        for _ in 0..trials {
            let s = (rng.gen_range((0.25f64).ln()..(4.0f64).ln())).exp();
            let sigma = s * tau.sqrt();
            let mut c = [0.0; 3];
            for (d, cd) in c.iter_mut().enumerate().take(n) {
                *cd = rng.gen_range(0.0..g.extents()[d]);
            }
            let w = Field::from_fn(g, |x| {
                let r2: f64 = (0..n).map(|d| (x[d] - c[d]).powi(2)).sum();
                (-r2 / (2.0 * sigma * sigma)).exp()
            });
            let sw = k.apply(tau, &w, 0.0)?;
            let grad = gradient(&sw).max_face_abs();
            best = best.max(grad / w.lp_norm(q)?);
            let gw = gradient(&w).max_face_abs();
            if gw > 0.0 {
                contraction = contraction.max(grad / gw);
            }
        }
        ratios.push(best);
    }
    let (slope, icept) = least_squares(
        &taus.iter().map(|t| t.ln()).collect::<Vec<_>>(),
        &ratios.iter().map(|r| r.ln()).collect::<Vec<_>>(),
    );
    let alpha_fit = -slope;
    let alpha_expected = expected_alpha(n, q);
    Ok(SmoothingFit {
        n,
        q,
        alpha_expected,
        alpha_fit,
        c_fit: icept.exp(),
        rel_err: (alpha_fit - alpha_expected).abs() / alpha_expected,
        contraction,
        c4_finite: c4_finite(n, q),
        taus,
        ratios,
    })
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

pub fn write_fit_csv(path: impl AsRef<Path>, fits: &[SmoothingFit]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_fit_to(file, fits)
}

pub fn write_fit_to<W: std::io::Write>(w: W, fits: &[SmoothingFit]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for f in fits {
        wr.serialize(f)?;
    }
    wr.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DuhamelReport {
    /// `max_k ‖V_k − v_k‖_∞ / max(1, ‖v_k‖_∞)`.
    pub max_deviation: f64,
    /// Deviation at every snapshot time.
    pub deviations: Vec<(f64, f64)>,
}

/// Rebuild `v` from the `u` snapshots through
/// `v(t) = e^{t(Δ−1)}v₀ + ∫₀ᵗ e^{(t−s)(Δ−1)}u(s) ds`, with the trapezoid rule
/// on each snapshot interval:
///
/// ```text
/// V_{k+1} = S(τ)V_k + (τ/2)(S(τ)u_k + u_{k+1}),   S(τ) = e^{τ(Δ−1)}
/// ```
pub fn duhamel_check(k: &SpectralKernel, tr: &Trace) -> Result<DuhamelReport> {
    let snaps = tr.snapshots();
    if snaps.is_empty() {
        return Err(Error::MissingData("Duhamel check needs snapshots".into()));
    }
    if snaps[0].u.grid() != k.grid() {
        return Err(Error::InvalidArgument("kernel and trace grids differ".into()));
    }
    let mut v = snaps[0].v.clone();
    let mut deviations = vec![(snaps[0].t, 0.0)];
    for w in snaps.windows(2) {
        let tau = w[1].t - w[0].t;
        let mut next = k.apply(tau, &v, 1.0)?;
        let mut src = k.apply(tau, &w[0].u, 1.0)?;
        src.axpy(1.0, &w[1].u);
        next.axpy(0.5 * tau, &src);
        v = next;
        let dev = v.max_abs_diff(&w[1].v) / w[1].v.sup_norm().max(1.0);
        deviations.push((w[1].t, dev));
    }
    let max_deviation = deviations.iter().map(|d| d.1).fold(0.0, f64::max);
    Ok(DuhamelReport {
        max_deviation,
        deviations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::trace_run;
    use crate::grid::neumann_eigenpairs;
    use crate::solver::{ModelParams, State, Stepper, StepperConfig};
    use proptest::prelude::*;

    #[test]
    fn orthonormal_eigenfields() {
        let g = Grid::new(2, &[1.0, 2.0], &[5, 6]).unwrap();
        let pairs = neumann_eigenpairs(&g, g.len()).unwrap();
        for (i, (_, a)) in pairs.iter().enumerate() {
            for (j, (_, b)) in pairs.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((a.inner(b) - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn identity_and_constants() {
        let g = Grid::new(2, &[2.0, 1.0], &[12, 8]).unwrap();
        let k = SpectralKernel::new(&g);
        let f = Field::from_fn(g, |x| x[0] * x[1] + 0.3);
        assert_eq!(k.apply(0.0, &f, 0.0).unwrap(), f);
        let c = Field::constant(g, 2.5);
        for t in [0.1, 1.0, 10.0] {
            assert!(k.apply(t, &c, 0.0).unwrap().max_abs_diff(&c) < 1e-12);
        }
        assert!(k.apply(-1.0, &f, 0.0).is_err());
    }

    #[test]
    fn single_mode() {
        let g = Grid::cube(1, 3.0, 32).unwrap();
        let k = SpectralKernel::new(&g);
        let e = k.spectrum().mode_field([1, 0, 0]);
        let lam = k.spectrum().lambda1();
        let out = k.apply(1.0, &e, 1.0).unwrap();
        let mut expect = e.clone();
        expect.scale((-(lam + 1.0)).exp());
        assert!(out.max_abs_diff(&expect) < 1e-13);
    }

    #[test]
    fn mass_is_preserved() {
        let g = Grid::cube(2, 1.0, 10).unwrap();
        let k = SpectralKernel::new(&g);
        let f = Field::from_fn(g, |x| (7.0 * x[0]).sin().abs() + x[1]);
        let out = k.apply(0.37, &f, 0.0).unwrap();
        assert!((out.integrate() - f.integrate()).abs() < 1e-13 * f.integrate());
    }

    #[test]
    fn truncation_keeps_low_modes() {
        let g = Grid::cube(1, 1.0, 16).unwrap();
        let k = SpectralKernel::truncated(&g, 3).unwrap();
        assert_eq!(k.modes(), 3);
        assert!(!k.is_complete());
        let e2 = k.spectrum().mode_field([2, 0, 0]);
        let e5 = k.spectrum().mode_field([5, 0, 0]);
        assert!(k.apply(0.0, &e5, 0.0).unwrap().sup_norm() < 1e-12);
        assert!(k.apply(0.0, &e2, 0.0).unwrap().max_abs_diff(&e2) < 1e-12);
        assert!(SpectralKernel::truncated(&g, 17).is_err());
    }

    #[test]
    fn c4_predicate() {
        for n in 1..=3 {
            for qi in 2..40 {
                let q = qi as f64 * 0.5;
                assert_eq!(c4_finite(n, q), q > n as f64 + 2.0, "n={n} q={q}");
            }
        }
    }

    #[test]
    fn fit_rejects_bad_input() {
        let g = Grid::cube(1, 1.0, 8).unwrap();
        let k = SpectralKernel::new(&g);
        assert!(smoothing_fit(&k, 2.0, 20, 0).is_err());
        let g = Grid::cube(1, 10.0, 256).unwrap();
        let k = SpectralKernel::new(&g);
        assert!(smoothing_fit(&k, 0.5, 20, 0).is_err());
        assert!(smoothing_fit(&k, 2.0, 5, 0).is_err());
    }

    #[test]
    fn fit_1d_exponent() {
        let g = Grid::cube(1, 10.0, 512).unwrap();
        let k = SpectralKernel::new(&g);
        let f = smoothing_fit(&k, 2.0, 12, 1).unwrap();
        assert!(f.rel_err < 0.15, "{f:?}");
        assert!(f.contraction <= 1.1, "{f:?}");
    }

    fn traced(u: Field, v: Field, p: ModelParams, dt: f64, t_end: f64, cadence: f64) -> Trace {
        let g = *u.grid();
        let st = Stepper::new(&g, StepperConfig { dt, ..Default::default() }).unwrap();
        trace_run(&st, State::new(u, v, 0.0, p).unwrap(), t_end, cadence, 1)
            .unwrap()
            .trace
    }

    #[test]
    fn duhamel_pure_decay() {
        // u ≡ 0: the reconstruction is exact, so the deviation is the
        // backward Euler error (1 + dt(1+λ))^{-n} vs e^{-(1+λ)n dt}
        let g = Grid::cube(1, 2.0, 16).unwrap();
        let k = SpectralKernel::new(&g);
        let e = k.spectrum().mode_field([1, 0, 0]);
        let lam = k.spectrum().lambda1();
        let dt = 1e-3;
        let tr = traced(Field::zeros(g), e.clone(), ModelParams::limit(0.0, 1.0, 1).unwrap(), dt, 0.5, 0.05);
        let rep = duhamel_check(&k, &tr).unwrap();
        let sup_e = e.sup_norm();
        for &(t, dev) in &rep.deviations {
            let n = (t / dt).round() as i32;
            let solver = (1.0 + dt * (1.0 + lam)).powi(-n);
            let exact = (-(1.0 + lam) * t).exp();
            let expect = (solver - exact).abs() * sup_e / (solver * sup_e).max(1.0);
            assert!((dev - expect).abs() < 1e-12, "t={t} {dev} {expect}");
        }
    }

    #[test]
    fn duhamel_steady_constants() {
        let g = Grid::cube(2, 1.0, 8).unwrap();
        let k = SpectralKernel::new(&g);
        let c = 0.5;
        let (t_end, cad) = (1.0, 0.05);
        let tr = traced(Field::constant(g, c), Field::constant(g, c), ModelParams::limit(0.5, 1.0, 2).unwrap(), 1e-2, t_end, cad);
        let rep = duhamel_check(&k, &tr).unwrap();
        // trapezoid error of ∫e^{-(τ-s)}c ds is cτ³/12 per interval
        let bound = c * cad.powi(3) / 12.0 * (t_end / cad) * 1.01;
        assert!(rep.max_deviation <= bound, "{} > {bound}", rep.max_deviation);
        assert!(rep.max_deviation > 0.0);
    }

    #[test]
    fn duhamel_refinement_halves() {
        let g = Grid::cube(1, 2.0, 32).unwrap();
        let k = SpectralKernel::new(&g);
        let u = Field::from_fn(g, |x| 1.0 + 0.5 * (std::f64::consts::PI * x[0] / 2.0).cos());
        let v = Field::from_fn(g, |x| 0.5 + 0.2 * (std::f64::consts::PI * x[0]).cos());
        let p = ModelParams::limit(0.5, 1.0, 1).unwrap();
        let dev = |dt: f64| {
            let tr = traced(u.clone(), v.clone(), p, dt, 0.5, 10.0 * dt);
            duhamel_check(&k, &tr).unwrap().max_deviation
        };
        let (a, b) = (dev(5e-4), dev(2.5e-4));
        assert!(a / b >= 1.8, "{a} {b}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn semigroup_property(vals in prop::collection::vec(0.0f64..1.0, 48), t in 0.0f64..1.0, s in 0.0f64..1.0, shift in 0.0f64..2.0) {
            let g = Grid::new(2, &[1.5, 1.0], &[8, 6]).unwrap();
            let k = SpectralKernel::new(&g);
            let f = Field::new(g, vals).unwrap();
            let both = k.apply(t + s, &f, shift).unwrap();
            let comp = k.apply(t, &k.apply(s, &f, shift).unwrap(), shift).unwrap();
            prop_assert!(both.max_abs_diff(&comp) <= 1e-10 * f.sup_norm().max(1e-300));
            // order preservation and contraction
            let heat = k.apply(t, &f, 0.0).unwrap();
            prop_assert!(heat.min() >= -1e-12 * f.sup_norm());
            prop_assert!(heat.sup_norm() <= f.sup_norm() * (1.0 + 1e-12));
        }
    }
}
