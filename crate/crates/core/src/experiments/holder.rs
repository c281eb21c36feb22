use crate::error::{Error, Result};
use crate::functionals::Trace;
use crate::grid::Field;

/// Largest discrete Hölder quotients over dyadic separations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderQuotients {
    pub alpha: f64,
    pub space_u: f64,
    pub space_v: f64,
    /// Time quotients use the parabolic exponent `α/2`.
    pub time_u: f64,
    pub time_v: f64,
    pub snapshots: usize,
}

fn space_quotient(f: &Field, alpha: f64) -> f64 {
    let g = *f.grid();
    let x = f.values();
    let mut best: f64 = 0.0;
    for d in 0..g.dim() {
        let n = g.cells()[d];
        let stride = g.stride(d);
        let h = g.spacing(d);
        let mut s = 1;
        while s < n {
            let denom = (s as f64 * h).powf(alpha);
            for idx in 0..g.len() {
                if g.unravel(idx)[d] + s < n {
                    best = best.max((x[idx + s * stride] - x[idx]).abs() / denom);
                }
            }
            s *= 2;
        }
    }
    best
}

/// Hölder quotients of the snapshots with `t ≥ t_from`: in space over cell
/// separations `1, 2, 4, …` along each axis, in time over snapshot
/// separations `1, 2, 4, …` with exponent `α/2`.
pub fn holder_quotients(tr: &Trace, t_from: f64, alpha: f64) -> Result<HolderQuotients> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} must lie in (0, 1]")));
    }
    let snaps: Vec<_> = tr.snapshots().iter().filter(|s| s.t >= t_from).collect();
    if snaps.is_empty() {
        return Err(Error::MissingData(format!("no snapshots after t = {t_from}")));
    }
    let mut q = HolderQuotients {
        alpha,
        space_u: 0.0,
        space_v: 0.0,
        time_u: 0.0,
        time_v: 0.0,
        snapshots: snaps.len(),
    };
    for s in &snaps {
        q.space_u = q.space_u.max(space_quotient(&s.u, alpha));
        q.space_v = q.space_v.max(space_quotient(&s.v, alpha));
    }
    let mut m = 1;
    while m < snaps.len() {
        for k in 0..snaps.len() - m {
            let (a, b) = (snaps[k], snaps[k + m]);
            let denom = (b.t - a.t).powf(alpha / 2.0);
            q.time_u = q.time_u.max(b.u.max_abs_diff(&a.u) / denom);
            q.time_v = q.time_v.max(b.v.max_abs_diff(&a.v) / denom);
        }
        m *= 2;
    }
    Ok(q)
}
