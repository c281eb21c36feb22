use crate::error::{Error, Result};

use super::poly::OdiPolynomial;

/// Solution of `y' = p(y)` sampled at every RK4 step.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTrajectory {
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    /// Time at which `y` exceeded `10·upper`, if it did.
    pub escaped: Option<f64>,
}

impl ComparisonTrajectory {
    pub fn sup(&self) -> f64 {
        self.y.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn last(&self) -> f64 {
        *self.y.last().expect("trajectory has its initial point")
    }
}

/// Classical RK4 for `y' = p(y)` on `[0, t_end]` with `dt = 10⁻³/η`, the
/// linear relaxation time of `p` scaled down.
pub fn comparison_solve(p: &OdiPolynomial, y0: f64, t_end: f64) -> Result<ComparisonTrajectory> {
    if !(y0 >= 0.0 && y0.is_finite()) {
        return Err(Error::InvalidArgument(format!("y0 = {y0} must be nonnegative")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!("t_end = {t_end}")));
    }
    let dt_max = 1e-3 / p.eta;
    let steps = (t_end / dt_max).ceil() as usize;
    let dt = if steps > 0 { t_end / steps as f64 } else { 0.0 };
    let escape = 10.0 * p.upper();
    let f = |y: f64| p.eval(y);

    let mut t = Vec::with_capacity(steps + 1);
    let mut ys = Vec::with_capacity(steps + 1);
    t.push(0.0);
    ys.push(y0);
    let mut y = y0;
    for k in 0..steps {
        let k1 = f(y);
        let k2 = f(y + 0.5 * dt * k1);
        let k3 = f(y + 0.5 * dt * k2);
        let k4 = f(y + dt * k3);
        y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let tk = (k + 1) as f64 * dt;
        t.push(tk);
        ys.push(y);
        if !(y <= escape) {
            return Ok(ComparisonTrajectory { t, y: ys, escaped: Some(tk) });
        }
    }
    Ok(ComparisonTrajectory { t, y: ys, escaped: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p() -> OdiPolynomial {
        OdiPolynomial::new(0.01, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn root_is_equilibrium() {
        let p = p();
        let d = p.largest_root().unwrap();
        let tr = comparison_solve(&p, d, 5.0).unwrap();
        assert!(tr.y.iter().all(|y| (y - d).abs() < 1e-8));
        assert!(tr.escaped.is_none());
    }

    #[test]
    fn below_root_relaxes_to_stable_root() {
        let p = p();
        let d = p.largest_root().unwrap();
        let s = p.smaller_root().unwrap();
        let tr = comparison_solve(&p, 0.5 * d, 40.0).unwrap();
        assert!(tr.sup() <= d);
        assert!((tr.last() - s).abs() < 1e-8, "{} vs {s}", tr.last());
    }

    #[test]
    fn escapes_without_root() {
        let p = p().with_kappa_hat(1.0);
        assert_eq!(p.largest_root(), None);
        let tr = comparison_solve(&p, 1.5 * p.upper(), 50.0).unwrap();
        assert!(tr.escaped.is_some());
    }

    #[test]
    fn linear_decay_oracle() {
        // with a tiny cubic term the flow is y' ≈ ν − ηy
        let p = OdiPolynomial::new(0.5, 2.0, 1e-12, 0.0, 1.0, 1.0, 1.0).unwrap();
        let tr = comparison_solve(&p, 1.0, 1.0).unwrap();
        let exact = 0.25 + 0.75 * (-2.0f64).exp();
        assert!((tr.last() - exact).abs() < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        // below δ every ODI-compliant trajectory stays below δ
        #[test]
        fn barrier(nu in 1e-3f64..0.05, a in 0.2f64..5.0, kh in 0.0f64..0.02, frac in 0.0f64..1.0, slack in 0.0f64..1.0) {
            let p = OdiPolynomial::new(nu, 1.0, a, kh, 1.0, 1.0, 1.0).unwrap();
            prop_assume!(p.largest_root().is_some());
            let d = p.largest_root().unwrap();
            let tr = comparison_solve(&p, frac * d, 10.0).unwrap();
            prop_assert!(tr.sup() <= d * (1.0 + 1e-9));
            // p increases with κ̂, so the flow at smaller κ̂ is a subsolution
            let sub = p.with_kappa_hat(kh * (1.0 - slack));
            let tr = comparison_solve(&sub, d, 10.0).unwrap();
            prop_assert!(tr.sup() <= d * (1.0 + 1e-9));
        }
    }
}
