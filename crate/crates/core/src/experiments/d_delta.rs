use statrs::function::beta::beta;

use crate::error::{Error, Result};
use crate::semigroup::{smoothing_fit, SpectralKernel};

use super::config::RunConfig;
use super::report::{ExperimentReport, Provenance, RunSummary, Verdict};
use super::FittedConstants;

fn check_p(p: f64) -> Result<()> {
    if p > 3.0 && p < 4.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("p = {p} must lie in (3, 4)")))
    }
}

/// `D(δ) = sup{ξ ≥ 0 : ξ − C₄δ^{1/p}ξ^β ≤ C₃√δ}` with `β = 1 − (4−p)/(2p)`.
///
/// `ξ ↦ ξ − aξ^β` is convex, vanishes at 0 and grows without bound, so the
/// sublevel set is an interval; its right end is found by bisection to the
/// last representable bit.
pub fn d_delta_eval(delta: f64, p: f64, c3: f64, c4: f64) -> Result<f64> {
    check_p(p)?;
    if !(delta >= 0.0 && c3 >= 0.0 && c4 >= 0.0) || ![delta, c3, c4].iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "delta = {delta}, C3 = {c3}, C4 = {c4} must be finite and nonnegative"
        )));
    }
    let beta = 1.0 - (4.0 - p) / (2.0 * p);
    let a = c4 * delta.powf(1.0 / p);
    let b = c3 * delta.sqrt();
    if a == 0.0 && b == 0.0 {
        return Ok(0.0);
    }
    let g = |x: f64| x - a * x.powf(beta);
    // minimum of g; g(lo) ≤ 0 ≤ b
    let mut lo = if a > 0.0 { (a * beta).powf(1.0 / (1.0 - beta)) } else { 0.0 };
    let mut hi = lo.max(b).max(f64::MIN_POSITIVE) * 2.0;
    while g(hi) <= b {
        hi *= 2.0;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) <= b {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Constants of the bound `K(δ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KConstants {
    pub c3: f64,
    pub c4: f64,
    /// Gradient smoothing constant of `e^{t(Δ−1)}`.
    pub c5: f64,
    /// `(1 + (4 + 8C_Ω)^{−1/2})|Ω|^{−1/2}`.
    pub c7: f64,
    /// `L²→L^∞` smoothing constant of `e^{t(Δ−1)}`.
    pub c8: f64,
    pub c_p: f64,
    pub omega_vol: f64,
}

impl KConstants {
    pub fn c7_formula(c_omega: f64, omega_vol: f64) -> f64 {
        (1.0 + 1.0 / (4.0 + 8.0 * c_omega).sqrt()) / omega_vol.sqrt()
    }
}

/// `K(δ) = (3 + C₅(1+√π))D(δ) + (C₅ + 2C₈C_P|Ω|^{1/4})δ^{1/4} + C₇√δ`,
/// which dominates both `‖u‖_∞ + ‖∇v‖_∞` and the non-decaying part of
/// `‖v‖_∞`.
pub fn k_delta(delta: f64, p: f64, k: &KConstants) -> Result<f64> {
    let d = d_delta_eval(delta, p, k.c3, k.c4)?;
    let sqrt_pi = std::f64::consts::PI.sqrt();
    Ok((3.0 + k.c5 * (1.0 + sqrt_pi)) * d
        + (k.c5 + 2.0 * k.c8 * k.c_p * k.omega_vol.powf(0.25)) * delta.powf(0.25)
        + k.c7 * delta.sqrt())
}

/// `(C₃, C₄)` of the bootstrap from a smoothing constant `c`, valid for
/// `τ ∈ (0, 2]`:
///
/// ```text
/// C₃ = (2c(1 + 2^{3/4}) + 2^{3/4}|Ω|^{−1/2}) / (1 − 8κ₀)
/// C₄ = c (2^{7/4−b}/(1−b) + 2^{1/8} B(1−a, 1−b)) / (1 − 8κ₀)
/// ```
///
/// with `a = 1/2 + 3/(2p)`, `b = 3/4 − 3(4−p)/(8p)`.
pub fn bootstrap_constants(c: f64, p: f64, kappa0: f64, omega_vol: f64) -> Result<(f64, f64)> {
    check_p(p)?;
    if !(c > 0.0 && omega_vol > 0.0 && (0.0..0.125).contains(&kappa0)) {
        return Err(Error::InvalidArgument(format!(
            "c = {c}, |Omega| = {omega_vol} must be positive and kappa0 = {kappa0} in [0, 1/8)"
        )));
    }
    let a = 0.5 + 1.5 / p;
    let b = 0.75 - 3.0 * (4.0 - p) / (8.0 * p);
    let damp = 1.0 - 8.0 * kappa0;
    let c3 = (2.0 * c * (1.0 + 2f64.powf(0.75)) + 2f64.powf(0.75) / omega_vol.sqrt()) / damp;
    let j = 2f64.powf(1.75 - b) / (1.0 - b) + 2f64.powf(0.125) * beta(1.0 - a, 1.0 - b);
    Ok((c3, c * j / damp))
}

impl KConstants {
    /// Constants from the config: `c3`/`c4` when both are set, otherwise a
    /// 3D smoothing fit at `q = p` supplies `c` for `C₃, C₄, C₅, C₈`.
    pub fn from_config(cfg: &RunConfig) -> Result<(Self, Provenance)> {
        let fc = FittedConstants::for_config(cfg)?;
        let grid = cfg.grid()?;
        let om = grid.volume();
        let c7 = Self::c7_formula(fc.thresholds.c_omega, om);
        if cfg.c3 > 0.0 && cfg.c4 > 0.0 {
            return Ok((
                KConstants {
                    c3: cfg.c3,
                    c4: cfg.c4,
                    c5: cfg.c3,
                    c7,
                    c8: cfg.c3,
                    c_p: fc.domain.c_p,
                    omega_vol: om,
                },
                Provenance::Config("c3,c4".into()),
            ));
        }
        let kernel = SpectralKernel::new(&grid);
        let fit = smoothing_fit(&kernel, cfg.p_exp, cfg.trials, cfg.seed)?;
        let (c3, c4) = bootstrap_constants(fit.c_fit, cfg.p_exp, fc.thresholds.kappa0, om)?;
        Ok((
            KConstants {
                c3,
                c4,
                c5: fit.c_fit,
                c7,
                c8: fit.c_fit,
                c_p: fc.domain.c_p,
                omega_vol: om,
            },
            Provenance::Fitted(format!("smoothing_q{}_{}", cfg.p_exp, fc.fit_id)),
        ))
    }
}

/// `D` and `K` on `δ = 10^{−k}`, `k = k_min..=k_max`.
///
/// Verdicts: `D` and `K` nondecreasing in `δ`; `D(10^{−k_max})` below
/// `10^{−3} D(10^{−k_min})`; the `C₄ = 0` case equal to `C₃√δ` within 1e−12.
pub fn run_d_delta(cfg: &RunConfig, k: &KConstants, prov: Provenance) -> Result<ExperimentReport> {
    if cfg.k_min >= cfg.k_max {
        return Err(Error::InvalidArgument(format!("k_min = {} must be below k_max = {}", cfg.k_min, cfg.k_max)));
    }
    let p = cfg.p_exp;
    let mut rep = ExperimentReport::new("d_delta");
    rep.notes.push(format!(
        "C3 = {:.4e}, C4 = {:.4e}, C5 = {:.4e}, C7 = {:.4e}, C8 = {:.4e} ({prov})",
        k.c3, k.c4, k.c5, k.c7, k.c8
    ));
    let mut rows = Vec::new();
    let mut closed_err: f64 = 0.0;
    for e in cfg.k_min..=cfg.k_max {
        let delta = 10f64.powi(-(e as i32));
        let d = d_delta_eval(delta, p, k.c3, k.c4)?;
        let kd = k_delta(delta, p, k)?;
        let d0 = d_delta_eval(delta, p, k.c3, 0.0)?;
        closed_err = closed_err.max((d0 - k.c3 * delta.sqrt()).abs());
        let mut s = RunSummary::new(format!("k{e}"));
        s.push("delta", delta).push("D", d).push("K", kd);
        rep.runs.push(s);
        rows.push((delta, d, kd));
    }
    for w in rows.windows(2) {
        let ((d_hi, dd_hi, k_hi), (d_lo, dd_lo, k_lo)) = (w[0], w[1]);
        let subject = format!("delta{d_lo:e}<delta{d_hi:e}");
        rep.verdicts.push(Verdict::new("d_delta.monotone_D", &subject, dd_lo, dd_hi, 0.0, dd_lo <= dd_hi, prov.clone()));
        rep.verdicts.push(Verdict::new("d_delta.monotone_K", &subject, k_lo, k_hi, 0.0, k_lo <= k_hi, prov.clone()));
    }
    let (first, last) = (rows[0].1, rows[rows.len() - 1].1);
    rep.verdicts.push(Verdict::new(
        "d_delta.vanishing",
        format!("D(1e-{})/D(1e-{})", cfg.k_max, cfg.k_min),
        last / first,
        1e-3,
        0.0,
        last < 1e-3 * first,
        prov.clone(),
    ));
    rep.verdicts.push(Verdict::new(
        "d_delta.closed_form",
        "C4=0",
        closed_err,
        1e-12,
        0.0,
        closed_err <= 1e-12,
        Provenance::Formula("D = C3 sqrt(delta)".into()),
    ));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_delta_gives_zero() {
        assert_eq!(d_delta_eval(0.0, 3.5, 2.0, 5.0).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_without_c4() {
        for delta in [1e-1, 1e-4, 1e-8, 0.37] {
            let d = d_delta_eval(delta, 3.3, 1.7, 0.0).unwrap();
            assert!((d - 1.7 * delta.sqrt()).abs() <= 1e-12 * (1.7 * delta.sqrt()).max(1.0));
        }
    }

    #[test]
    fn p_outside_range_rejected() {
        assert!(d_delta_eval(0.1, 3.0, 1.0, 1.0).is_err());
        assert!(d_delta_eval(0.1, 4.0, 1.0, 1.0).is_err());
        assert!(bootstrap_constants(1.0, 2.5, 0.01, 1.0).is_err());
    }

    #[test]
    fn boundary_of_sublevel_set() {
        // p = 3.5: β = 13/14; check g(D) = b and g slightly beyond exceeds b
        let (delta, p, c3, c4) = (0.01, 3.5, 2.0, 3.0);
        let d = d_delta_eval(delta, p, c3, c4).unwrap();
        let beta = 1.0 - (4.0 - p) / (2.0 * p);
        let g = |x: f64| x - c4 * delta.powf(1.0 / p) * x.powf(beta);
        let b = c3 * delta.sqrt();
        assert!((g(d) - b).abs() < 1e-12 * d.max(1.0));
        assert!(g(d * (1.0 + 1e-9)) > b);
    }

    #[test]
    fn beta_values() {
        assert!((beta(0.5, 0.5) - PI).abs() < 1e-12);
        assert!((beta(1.0, 0.25) - 4.0).abs() < 1e-12);
        assert!((beta(0.5, 1.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bootstrap_integral_matches_quadrature() {
        // C₄/c·(1−8κ₀) = sup_{τ≤2} τ^{3/4}∫₀^τ (1 + (τ−s)^{−a}) s^{−b} ds, attained at τ = 2
        let p = 3.5;
        let a = 0.5 + 1.5 / p;
        let b = 0.75 - 3.0 * (4.0 - p) / (8.0 * p);
        let (_, c4) = bootstrap_constants(1.0, p, 0.0, 1.0).unwrap();
        // substitutions s = 2x^{1/(1−b)} on [0,1] and s = 2 − 2y^{1/(1−a)} on [1,2]
        let m = 200_000;
        let mut i = 0.0;
        for k in 0..m {
            let x = (k as f64 + 0.5) / m as f64;
            let e = 1.0 / (1.0 - b);
            let s = x.powf(e);
            let ds = e * x.powf(e - 1.0);
            // ∫₀¹ over s∈[0,1] of the integrand for τ = 2 scaled: s' = s
            i += ds * (1.0 + (2.0 - s).powf(-a)) * s.powf(-b) / m as f64;
            let ea = 1.0 / (1.0 - a);
            let r = x.powf(ea);
            let dr = ea * x.powf(ea - 1.0);
            let s2 = 2.0 - r;
            i += dr * (1.0 + r.powf(-a)) * s2.powf(-b) / m as f64;
        }
        let expect = 2f64.powf(0.75) * i;
        assert!((c4 - expect).abs() < 1e-4 * expect, "{c4} vs {expect}");
    }

    #[test]
    fn ladder_report_passes() {
        let cfg = RunConfig::default();
        let k = KConstants {
            c3: 3.0,
            c4: 10.0,
            c5: 2.0,
            c7: 0.5,
            c8: 2.0,
            c_p: 1.0,
            omega_vol: 31.0,
        };
        let rep = run_d_delta(&cfg, &k, Provenance::Config("test".into())).unwrap();
        assert!(rep.all_pass(), "{rep}");
        assert_eq!(rep.runs.len(), 8);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn d_monotone_in_delta(p in 3.01f64..3.99, c3 in 0.01f64..10.0, c4 in 0.0f64..50.0, d1 in 1e-10f64..1.0, f in 0.0f64..1.0) {
            let d2 = d1 * f;
            let a = d_delta_eval(d1, p, c3, c4).unwrap();
            let b = d_delta_eval(d2, p, c3, c4).unwrap();
            prop_assert!(b <= a * (1.0 + 1e-12));
            prop_assert!(a >= c3 * d1.sqrt() * (1.0 - 1e-12));
        }
    }
}
