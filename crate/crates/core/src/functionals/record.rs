use serde::{Deserialize, Serialize};

use crate::grid::{gradient, laplacian, VectorField};
use crate::solver::State;

/// Every tracked integral of one state.
///
/// Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalRecord {
    pub t: f64,
    /// `∫u`
    pub mass_u: f64,
    /// `∫v`
    pub mass_v: f64,
    /// `∫u²`
    pub u_l2sq: f64,
    /// `∫v²`
    pub v_l2sq: f64,
    /// `∫|∇v|²`
    pub grad_v_l2sq: f64,
    /// `∫|Δv|²`
    pub lap_v_l2sq: f64,
    /// `∫|∇v|⁴`
    pub grad_v_l4: f64,
    /// `∫|∇v|⁶`, 3D only.
    pub grad_v_l6: Option<f64>,
    /// `∫u² + ∫|∇v|⁴`
    pub y: f64,
    /// `∫(1+u)log(1+u)`
    pub entropy: f64,
    /// `∫|∇u|²/(1+u)`
    pub dissipation: f64,
    /// `∫u²log(1+u)`
    pub u2log: f64,
    /// `ε∫u^θ`
    pub eps_theta: f64,
    pub sup_u: f64,
    pub sup_v: f64,
    pub sup_grad_v: f64,
    /// `∫|∇v|² + (1/μ)∫u`
    pub energy: f64,
    /// `ε∫u^θ log(1+u)`; not part of the CSV schema.
    #[serde(skip)]
    pub eps_theta_log: Option<f64>,
}

impl FunctionalRecord {
    pub const COLUMNS: [&'static str; 18] = [
        "t",
        "mass_u",
        "mass_v",
        "u_l2sq",
        "v_l2sq",
        "grad_v_l2sq",
        "lap_v_l2sq",
        "grad_v_l4",
        "grad_v_l6",
        "y",
        "entropy",
        "dissipation",
        "u2log",
        "eps_theta",
        "sup_u",
        "sup_v",
        "sup_grad_v",
        "energy",
    ];

    pub fn is_finite(&self) -> bool {
        [
            self.t,
            self.mass_u,
            self.mass_v,
            self.u_l2sq,
            self.v_l2sq,
            self.grad_v_l2sq,
            self.lap_v_l2sq,
            self.grad_v_l4,
            self.grad_v_l6.unwrap_or(0.0),
            self.y,
            self.entropy,
            self.dissipation,
            self.u2log,
            self.eps_theta,
            self.sup_u,
            self.sup_v,
            self.sup_grad_v,
            self.energy,
        ]
        .iter()
        .all(|x| x.is_finite())
    }
}

/// Evaluate every functional of `s`.
///
/// Gradient quantities use face differences: `∫|∇v|²` is the face inner
/// product, pointwise `|∇v|²` is [`VectorField::cell_norm_sq`], and the
/// dissipation divides each face square by `1 + ū` with `ū` the face mean.
pub fn compute_record(s: &State) -> FunctionalRecord {
    let g = *s.u.grid();
    let p = &s.params;
    let u = &s.u;
    let v = &s.v;

    let gv = gradient(v);
    let gv_sq = gv.cell_norm_sq();
    let lap_v = laplacian(v);
    let gu = gradient(u);
    let u_face = VectorField::face_average(u);
    let dissipation = gu
        .zip_map(&u_face, |du, uf| du * du / (1.0 + uf))
        .face_integral(|x| x);

    let mass_u = u.integrate();
    let u_l2sq = u.inner(u);
    let grad_v_l2sq = gv.inner(&gv);
    let grad_v_l4 = gv_sq.inner(&gv_sq);
    let grad_v_l6 = (g.dim() == 3).then(|| gv_sq.map(|x| x * x * x).integrate());

    let (eps_theta, eps_theta_log) = if p.eps > 0.0 {
        let up = u.map(|x| x.max(0.0).powf(p.theta));
        let ul = up.zip_map(u, |a, b| a * b.ln_1p());
        (p.eps * up.integrate(), p.eps * ul.integrate())
    } else {
        (0.0, 0.0)
    };

    FunctionalRecord {
        t: s.t,
        mass_u,
        mass_v: v.integrate(),
        u_l2sq,
        v_l2sq: v.inner(v),
        grad_v_l2sq,
        lap_v_l2sq: lap_v.inner(&lap_v),
        grad_v_l4,
        grad_v_l6,
        y: u_l2sq + grad_v_l4,
        entropy: u.map(|x| (1.0 + x) * x.ln_1p()).integrate(),
        dissipation,
        u2log: u.map(|x| x * x * x.ln_1p()).integrate(),
        eps_theta,
        sup_u: u.sup_norm(),
        sup_v: v.sup_norm(),
        sup_grad_v: gv.sup_norm(),
        energy: grad_v_l2sq + mass_u / p.mu,
        eps_theta_log: Some(eps_theta_log),
    }
}
