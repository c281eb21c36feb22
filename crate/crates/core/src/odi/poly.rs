use crate::error::{Error, Result};

/// The cubic `p(x) = ν − ηx + A(1 + 1/(4ν))x³ + 4κ̂²|Ω|/(C_P μ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdiPolynomial {
    pub nu: f64,
    pub eta: f64,
    pub a_const: f64,
    pub kappa_hat: f64,
    pub c_p: f64,
    pub mu: f64,
    pub omega_vol: f64,
}

/// Absolute bisection tolerance for roots.
pub const ROOT_TOL: f64 = 1e-12;

impl OdiPolynomial {
    pub fn new(nu: f64, eta: f64, a_const: f64, kappa_hat: f64, c_p: f64, mu: f64, omega_vol: f64) -> Result<Self> {
        let ok = nu > 0.0
            && eta > 0.0
            && eta <= 4.0
            && a_const > 0.0
            && kappa_hat >= 0.0
            && c_p > 0.0
            && mu > 0.0
            && omega_vol > 0.0
            && [nu, eta, a_const, kappa_hat, c_p, mu, omega_vol].iter().all(|x| x.is_finite());
        if !ok {
            return Err(Error::InvalidParams(format!(
                "odi polynomial needs nu, A, C_P, mu, |Omega| > 0, eta in (0,4], kappa_hat >= 0 \
                 (got nu={nu}, eta={eta}, A={a_const}, kappa_hat={kappa_hat}, C_P={c_p}, mu={mu}, |Omega|={omega_vol})"
            )));
        }
        Ok(OdiPolynomial {
            nu,
            eta,
            a_const,
            kappa_hat,
            c_p,
            mu,
            omega_vol,
        })
    }

    pub fn with_kappa_hat(mut self, kappa_hat: f64) -> Self {
        self.kappa_hat = kappa_hat;
        self
    }

    /// Cubic coefficient `A(1 + 1/(4ν))`.
    pub fn cubic(&self) -> f64 {
        self.a_const * (1.0 + 1.0 / (4.0 * self.nu))
    }

    /// `4κ̂²|Ω|/(C_P μ²)`.
    pub fn kappa_term(&self) -> f64 {
        4.0 * self.kappa_hat * self.kappa_hat * self.omega_vol / (self.c_p * self.mu * self.mu)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.nu - self.eta * x + self.cubic() * x * x * x + self.kappa_term()
    }

    pub fn derivative(&self, x: f64) -> f64 {
        -self.eta + 3.0 * self.cubic() * x * x
    }

    /// Abscissa of the local minimum, `√(η/(3A(1+1/(4ν))))`.
    pub fn local_min(&self) -> f64 {
        (self.eta / (3.0 * self.cubic())).sqrt()
    }

    /// `√(4/(A(1+1/(4ν))))`, beyond which `p > 0`.
    pub fn upper(&self) -> f64 {
        (4.0 / self.cubic()).sqrt()
    }

    /// Largest positive root, if `p(x_m) < 0`.
    pub fn largest_root(&self) -> Option<f64> {
        let xm = self.local_min();
        if self.eval(xm) >= 0.0 {
            return None;
        }
        let (mut lo, mut hi) = (xm, self.upper());
        // p(upper) > 0 because η ≤ 4; bisect on the sign change
        while hi - lo > ROOT_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }

    /// Smaller positive root (the stable equilibrium of `y' = p(y)`), if any.
    pub fn smaller_root(&self) -> Option<f64> {
        let xm = self.local_min();
        if self.eval(xm) >= 0.0 || self.eval(0.0) <= 0.0 {
            return None;
        }
        let (mut lo, mut hi) = (0.0, xm);
        while hi - lo > ROOT_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn simple(nu: f64, kh: f64) -> OdiPolynomial {
        OdiPolynomial::new(nu, 1.0, 1.0, kh, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn worked_values() {
        let p = simple(0.01, 0.0);
        assert_eq!(p.eval(0.0), 0.01);
        assert!((p.eval(0.1) + 0.064).abs() < 1e-15);
        assert!((p.local_min() - (1.0f64 / 78.0).sqrt()).abs() < 1e-15);
        assert!((p.local_min() - 0.11323).abs() < 1e-5);
        assert!(p.derivative(p.local_min()).abs() < 1e-12);
        assert!((p.upper() - 0.39223).abs() < 1e-5);
        let d = p.largest_root().unwrap();
        assert!(p.eval(0.19) < 0.0 && p.eval(0.192) > 0.0);
        assert!((0.19..0.192).contains(&d));
        assert!(p.eval(d).abs() <= 1e-10 && p.derivative(d) > 0.0);
    }

    #[test]
    fn constant_term() {
        let p = OdiPolynomial::new(0.2, 2.0, 3.0, 0.5, 0.25, 2.0, 8.0).unwrap();
        assert!((p.eval(0.0) - (0.2 + 4.0 * 0.25 * 8.0 / (0.25 * 4.0))).abs() < 1e-14);
    }

    #[test]
    fn no_root_when_minimum_positive() {
        let p = simple(1.0, 0.0);
        assert!((p.local_min() - (1.0f64 / 3.75).sqrt()).abs() < 1e-15);
        assert!((p.eval(p.local_min()) - 0.6557).abs() < 1e-4);
        assert_eq!(p.largest_root(), None);
    }

    #[test]
    fn eta_scaling() {
        let p = simple(0.01, 0.0);
        let q = OdiPolynomial { eta: 4.0, ..p };
        assert!((q.local_min() - 2.0 * p.local_min()).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(OdiPolynomial::new(0.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0).is_err());
        assert!(OdiPolynomial::new(0.1, 4.5, 1.0, 0.0, 1.0, 1.0, 1.0).is_err());
        assert!(OdiPolynomial::new(0.1, 1.0, 1.0, -0.1, 1.0, 1.0, 1.0).is_err());
    }

    fn poly() -> impl Strategy<Value = OdiPolynomial> {
        (1e-4f64..1.0, 0.05f64..4.0, 0.1f64..100.0, 0.0f64..0.5, 0.05f64..2.0, 0.1f64..5.0, 0.1f64..10.0)
            .prop_map(|(nu, eta, a, kh, cp, mu, om)| OdiPolynomial::new(nu, eta, a, kh, cp, mu, om).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn root_is_certified(p in poly()) {
            if let Some(d) = p.largest_root() {
                let scale = p.nu + p.kappa_term() + p.eta * d + p.cubic() * d.powi(3);
                prop_assert!(p.eval(d).abs() <= 1e-10 * scale.max(1.0));
                prop_assert!(p.derivative(d) > 0.0);
                prop_assert!(p.local_min() < d && d <= p.upper());
                if d - 1e-6 > p.local_min() {
                    prop_assert!(p.eval(d - 1e-6) < 0.0);
                }
                prop_assert!(p.eval(d + 1e-6) > 0.0);
            } else {
                prop_assert!(p.eval(p.local_min()) >= 0.0);
            }
        }

        #[test]
        fn convex_on_positive_axis(p in poly(), x in 0.0f64..2.0) {
            let h = 1e-3;
            let x = x + h;
            let second = p.eval(x + h) - 2.0 * p.eval(x) + p.eval(x - h);
            prop_assert!(second >= -1e-12 * p.eval(x).abs().max(1.0));
        }

        #[test]
        fn root_nonincreasing_in_kappa_hat(p in poly(), f in 0.0f64..1.0) {
            if let Some(d_lo) = p.with_kappa_hat(0.0).largest_root() {
                let k_hi = p.kappa_hat;
                if let Some(d_hi) = p.with_kappa_hat(k_hi).largest_root() {
                    let d_mid = p.with_kappa_hat(f * k_hi).largest_root();
                    prop_assert!(d_mid.is_some());
                    let d_mid = d_mid.unwrap();
                    prop_assert!(d_hi <= d_mid + 2.0 * ROOT_TOL);
                    prop_assert!(d_mid <= d_lo + 2.0 * ROOT_TOL);
                }
            }
        }

        #[test]
        fn root_vanishes_once_minimum_positive(p in poly()) {
            // p(x_m) = ν − (2/3)η x_m + 4κ̂²|Ω|/(C_P μ²); pick κ̂ making it ≥ ν + 1
            let target = 2.0 / 3.0 * p.eta * p.local_min() + 1.0;
            let kh = (target * p.c_p * p.mu * p.mu / (4.0 * p.omega_vol)).sqrt();
            prop_assert_eq!(p.with_kappa_hat(kh).largest_root(), None);
        }
    }
}
