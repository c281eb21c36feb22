use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::grid::{gradient, neumann_eigenpairs, Field, Grid, EMBEDDING_MODES};

use super::poly::{OdiPolynomial, ROOT_TOL};

/// Young's inequality constant: `ab ≤ εa^p + C(ε)b^q` with
/// `C(ε) = (pε)^{−q/p}/q`, `1/p + 1/q = 1`.
pub fn young_constant(p: f64, eps: f64) -> f64 {
    let q = p / (p - 1.0);
    (p * eps).powf(-q / p) / q
}

/// Sampled Gagliardo–Nirenberg constants for
/// `‖w‖₃ ≤ C₁‖∇w‖₂^{1/2}‖w‖₂^{1/2} + C₂‖w‖₂` on a 3D grid.
///
/// `C₂ = |Ω|^{−1/6}` is the constant-function ratio; `C₁` is the largest
/// remaining ratio over random band-limited fields `w` and squared gradient
/// moduli `|∇φ|²` (the case the inequality is used for).
pub fn fit_gn_constants(grid: &Grid, samples: usize, seed: u64) -> Result<(f64, f64)> {
    if grid.dim() != 3 {
        return Err(Error::InvalidArgument(format!(
            "Gagliardo-Nirenberg fit is defined for 3D grids, got dim {}",
            grid.dim()
        )));
    }
    let c2 = grid.volume().powf(-1.0 / 6.0);
    let modes = neumann_eigenpairs(grid, EMBEDDING_MODES.min(grid.len()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c1: f64 = 0.0;
    for _ in 0..samples {
        let mut phi = Field::zeros(*grid);
        for (_, e) in &modes {
            let z: f64 = StandardNormal.sample(&mut rng);
            phi.axpy(z, e);
        }
        let w2 = gradient(&phi).cell_norm_sq();
        for w in [&phi, &w2] {
            c1 = c1.max(gn_ratio(w, c2));
        }
    }
    Ok((c1, c2))
}

fn gn_ratio(w: &Field, c2: f64) -> f64 {
    let l2 = w.l2_norm();
    let g = gradient(w).l2_norm();
    if !(l2 > 0.0 && g > 1e-12 * l2) {
        return 0.0;
    }
    let l3 = w.lp_norm(3.0).expect("p = 3");
    (l3 - c2 * l2) / (g.sqrt() * l2.sqrt())
}

/// The assembled chain of constants leading to `A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantChain {
    pub c1: f64,
    pub c2: f64,
    pub mu: f64,
    /// `C(1/2)` of the `∫|∇v|⁶` estimate.
    pub c_half: f64,
    /// `C(1/8)` of the same estimate.
    pub c_eighth: f64,
    /// Constant of the `∫u∇u·∇v` estimate: `(4/(27μ²))·C(1/2)`.
    pub c_cross: f64,
    /// `A^{1/2} = max{2C + 8C(1/8), 1}`.
    pub a_sqrt: f64,
    pub a: f64,
}

impl ConstantChain {
    pub fn assemble(c1: f64, c2: f64, mu: f64) -> Result<Self> {
        if !(c1 >= 0.0 && c2 > 0.0 && mu > 0.0) {
            return Err(Error::InvalidParams(format!("C1={c1}, C2={c2}, mu={mu}")));
        }
        let mut chain = ConstantChain {
            c1,
            c2,
            mu,
            c_half: 0.0,
            c_eighth: 0.0,
            c_cross: 0.0,
            a_sqrt: 0.0,
            a: 0.0,
        };
        chain.c_half = chain.sixth_power_constant(0.5);
        chain.c_eighth = chain.sixth_power_constant(0.125);
        // u²|∇v|² ≤ μu³ + C|∇v|⁶ is Young with p = 3/2
        chain.c_cross = young_constant(1.5, mu) * chain.c_half;
        chain.a_sqrt = (2.0 * chain.c_cross + 8.0 * chain.c_eighth).max(1.0);
        chain.a = chain.a_sqrt * chain.a_sqrt;
        Ok(chain)
    }

    /// `C̃(a) = (8C₁³)⁴ (4a/3)^{−3}/4`, Young with `p = 4/3`.
    pub fn tilde(&self, a: f64) -> f64 {
        (8.0 * self.c1.powi(3)).powi(4) * young_constant(4.0 / 3.0, a)
    }

    /// `C(a) = max{8C₂³, C̃(a)}`.
    pub fn sixth_power_constant(&self, a: f64) -> f64 {
        (8.0 * self.c2.powi(3)).max(self.tilde(a))
    }
}

/// `RHS − LHS` of the admissibility condition
/// `(ν + 4|Ω|κ̂²/(μ²C_P))² < 4 min{(1/C_P − 2κ̂)³, 4³} / (27A(1 + 1/(4ν)))`.
pub fn admissibility_margin(nu: f64, kappa_hat: f64, a: f64, c_p: f64, omega_vol: f64, mu: f64) -> f64 {
    let lhs = (nu + 4.0 * omega_vol * kappa_hat * kappa_hat / (mu * mu * c_p)).powi(2);
    let base = (1.0 / c_p - 2.0 * kappa_hat).max(0.0);
    let rhs = 4.0 * base.powi(3).min(64.0) / (27.0 * a * (1.0 + 1.0 / (4.0 * nu)));
    rhs - lhs
}

/// Fraction of the admissibility crossing used for `κ̃`.
pub const KAPPA_TILDE_FRACTION: f64 = 0.99;
/// Safety factor inside the `κ₀` minimum.
pub const KAPPA0_SAFETY: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSet {
    /// Positive solution of `ν² + ν/4 = min{4/(27AC_P³), 256/(27A)}`.
    pub nu0: f64,
    /// `ν = ν₀/2`, strictly inside the admissible range.
    pub nu: f64,
    pub eta: f64,
    /// Crossing point of the admissibility condition.
    pub kappa_star: f64,
    pub kappa_tilde: f64,
    pub kappa0: f64,
    /// `δ_ν(κ̃)`.
    pub delta: f64,
    pub x_m: f64,
    pub upper: f64,
    pub a: f64,
    pub c_p: f64,
    pub c_omega: f64,
    pub omega_vol: f64,
    pub mu: f64,
}

impl ThresholdSet {
    /// The polynomial at `κ̂`.
    pub fn polynomial(&self, kappa_hat: f64) -> Result<OdiPolynomial> {
        OdiPolynomial::new(self.nu, self.eta, self.a, kappa_hat, self.c_p, self.mu, self.omega_vol)
    }

    /// `δ_ν(κ̂)`, if the root exists.
    pub fn delta_at(&self, kappa_hat: f64) -> Option<f64> {
        self.polynomial(kappa_hat).ok()?.largest_root()
    }
}

pub fn select_thresholds(a: f64, c_p: f64, c_omega: f64, omega_vol: f64, mu: f64) -> Result<ThresholdSet> {
    if ![a, c_p, c_omega, omega_vol, mu].iter().all(|x| *x > 0.0 && x.is_finite()) {
        return Err(Error::Thresholds(format!(
            "inputs must be positive and finite (A={a}, C_P={c_p}, C_Omega={c_omega}, |Omega|={omega_vol}, mu={mu})"
        )));
    }
    let m = (4.0 / (27.0 * a * c_p.powi(3))).min(256.0 / (27.0 * a));
    let nu0 = 0.5 * (-0.25 + (0.0625 + 4.0 * m).sqrt());
    if !(nu0 > 0.0) {
        return Err(Error::Thresholds(format!("no positive nu0 for bound {m}")));
    }
    let nu = 0.5 * nu0;
    let margin = |k: f64| admissibility_margin(nu, k, a, c_p, omega_vol, mu);
    if !(margin(0.0) > 0.0) {
        return Err(Error::Thresholds("admissibility fails at kappa_hat = 0".into()));
    }
    // margin is decreasing in κ̂ and negative at 1/(2C_P)
    let (mut lo, mut hi) = (0.0, 0.5 / c_p);
    while hi - lo > ROOT_TOL * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if margin(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let kappa_star = lo;
    let kappa_tilde = KAPPA_TILDE_FRACTION * kappa_star;
    let eta = (1.0 / c_p - 2.0 * kappa_tilde).min(4.0);
    let p = OdiPolynomial::new(nu, eta, a, kappa_tilde, c_p, mu, omega_vol)?;
    let delta = p.largest_root().ok_or_else(|| {
        Error::Thresholds(format!(
            "no root at kappa_tilde = {kappa_tilde}; p(x_m) = {}",
            p.eval(p.local_min())
        ))
    })?;
    let kappa_delta = (delta * mu * mu / ((4.0 + 8.0 * c_omega) * omega_vol)).sqrt();
    let kappa0 = KAPPA0_SAFETY * kappa_tilde.min(kappa_delta).min(0.125);
    Ok(ThresholdSet {
        nu0,
        nu,
        eta,
        kappa_star,
        kappa_tilde,
        kappa0,
        delta,
        x_m: p.local_min(),
        upper: p.upper(),
        a,
        c_p,
        c_omega,
        omega_vol,
        mu,
    })
}

/// One row of the threshold report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdRow {
    pub chain: ConstantChain,
    pub set: ThresholdSet,
}

impl ThresholdRow {
    pub const COLUMNS: [&'static str; 22] = [
        "c1", "c2", "mu", "c_half", "c_eighth", "c_cross", "a_sqrt", "a", "c_p", "c_omega", "omega_vol", "nu0", "nu",
        "eta", "kappa_star", "kappa_tilde", "kappa0", "delta", "x_m", "upper", "delta_at_kappa0", "delta_at_zero",
    ];

    fn values(&self) -> [f64; 22] {
        let (c, s) = (&self.chain, &self.set);
        [
            c.c1,
            c.c2,
            c.mu,
            c.c_half,
            c.c_eighth,
            c.c_cross,
            c.a_sqrt,
            c.a,
            s.c_p,
            s.c_omega,
            s.omega_vol,
            s.nu0,
            s.nu,
            s.eta,
            s.kappa_star,
            s.kappa_tilde,
            s.kappa0,
            s.delta,
            s.x_m,
            s.upper,
            s.delta_at(s.kappa0).unwrap_or(f64::NAN),
            s.delta_at(0.0).unwrap_or(f64::NAN),
        ]
    }
}

pub fn write_thresholds_csv(path: impl AsRef<Path>, rows: &[ThresholdRow]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_thresholds_to(file, rows)
}

pub fn write_thresholds_to<W: std::io::Write>(w: W, rows: &[ThresholdRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(ThresholdRow::COLUMNS)?;
    for r in rows {
        wr.write_record(r.values().iter().map(|v| format!("{v:e}")))?;
    }
    wr.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}
