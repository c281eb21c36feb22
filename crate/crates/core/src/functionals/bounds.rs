use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

use super::record::FunctionalRecord;
use super::trace::Trace;

/// Default relative tolerance for the bound checks.
pub const DEFAULT_REL_TOL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    /// Counts toward the verdict.
    Checked,
    /// Reported only (hypotheses not met or data too short).
    Informational,
}

/// One inequality `observed ≤ theoretical` evaluated on a trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundItem {
    pub name: String,
    /// Time of the reported record, measured from the first record.
    pub t: f64,
    pub theoretical: f64,
    pub observed: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub status: Status,
}

impl BoundItem {
    pub fn new(name: impl Into<String>, t: f64, theoretical: f64, observed: f64, tolerance: f64) -> Self {
        let margin = theoretical - observed;
        BoundItem {
            name: name.into(),
            t,
            theoretical,
            observed,
            margin,
            tolerance,
            pass: margin >= -tolerance,
            status: Status::Checked,
        }
    }

    pub fn informational(mut self) -> Self {
        self.status = Status::Informational;
        self
    }

    /// Slack relative to the tolerance; negative means failure.
    pub fn slack(&self) -> f64 {
        self.margin + self.tolerance
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BoundReport {
    pub items: Vec<BoundItem>,
    pub notes: Vec<String>,
}

impl BoundReport {
    /// Whether every checked item passes.
    pub fn all_pass(&self) -> bool {
        self.items
            .iter()
            .filter(|i| i.status == Status::Checked)
            .all(|i| i.pass)
    }

    pub fn get(&self, name: &str) -> Option<&BoundItem> {
        self.items.iter().find(|i| i.name == name)
    }

    pub fn failures(&self) -> Vec<&BoundItem> {
        self.items
            .iter()
            .filter(|i| i.status == Status::Checked && !i.pass)
            .collect()
    }

    pub fn extend(&mut self, other: BoundReport) {
        self.items.extend(other.items);
        self.notes.extend(other.notes);
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut wr = csv::Writer::from_path(path)?;
        for it in &self.items {
            wr.serialize(it)?;
        }
        wr.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for it in &self.items {
            let tag = match (it.status, it.pass) {
                (Status::Informational, _) => "info",
                (_, true) => "pass",
                (_, false) => "FAIL",
            };
            writeln!(
                f,
                "{tag:4} {:<28} t={:<10.4} observed={:<12.6e} bound={:<12.6e} margin={:+.3e} (tol {:.2e})",
                it.name, it.t, it.observed, it.theoretical, it.margin, it.tolerance
            )?;
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}

/// Cumulative trapezoid integral of `y` over `t`, starting at 0.
pub fn cumulative_trapezoid(t: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.len());
    let mut acc = 0.0;
    for i in 0..t.len() {
        if i > 0 {
            acc += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
        }
        out.push(acc);
    }
    out
}

/// Record with the least slack.
fn worst(name: &str, t: &[f64], theo: &[f64], obs: &[f64], rel: f64) -> BoundItem {
    (0..t.len())
        .map(|k| BoundItem::new(name, t[k], theo[k], obs[k], rel * theo[k].abs()))
        .min_by(|a, b| a.slack().total_cmp(&b.slack()))
        .expect("nonempty trace")
}

/// Final record of a bound that grows with `t`, or the worst record if any
/// record fails.
fn at_end(name: &str, t: &[f64], theo: &[f64], obs: &[f64], rel: f64) -> BoundItem {
    let w = worst(name, t, theo, obs, rel);
    if !w.pass {
        return w;
    }
    let k = t.len() - 1;
    BoundItem::new(name, t[k], theo[k], obs[k], rel * theo[k].abs())
}

/// Check the a-priori estimates (a)–(g) along a trace.
///
/// With `M₀ = max{∫u(0), κ₊|Ω|/μ}` and all time integrals by the trapezoid
/// rule from the first record:
///
/// * (a) `∫u(t) ≤ M₀`; for `κ ≤ 0` additionally `∫u` is nonincreasing
/// * (b) `∫₀ᵗ∫u² + (1/μ)∫₀ᵗ ε∫u^θ ≤ (κ₊/μ)M₀t + ∫u(0)/μ`
/// * (c) `∫v(t) ≤ max{M₀, ∫v(0)}`
/// * (d) `∫v²(t) + ∫₀ᵗ∫v² ≤ (κ₊/μ)M₀t + ∫u(0)/μ + ∫v²(0)`
/// * (e) `E(t) ≤ max{E(0), (κ₊+1)M₀/μ}` with `E = ∫|∇v|² + (1/μ)∫u`
/// * (f) `∫₀ᵗ∫|Δv|² ≤ (κ₊/μ)M₀t + E(0)`
/// * (g) `½∫₀ᵗ∫|∇u|²/(1+u) + μ∫₀ᵗ∫u²log(1+u) + ε∫₀ᵗ∫u^θlog(1+u) ≤ C(t)`,
///   where `C(t)` collects (a), (b), (e), (f) as
///   `(κ₊+½)(κ₊M₀t + ∫u(0))/μ + M₀ + ½((κ₊/μ)M₀t + E(0)) + ½t·max{E(0), (κ₊+1)M₀/μ} + ∫(1+u(0))log(1+u(0))`.
///
/// Items with a constant bound report the record with the least slack; the
/// growing bounds (b), (d), (f), (g) report the final record unless an
/// earlier one fails. The tolerance is
/// `rel_tol·|bound|` at that record.
pub fn verify_apriori_bounds(tr: &Trace, rel_tol: f64) -> Result<BoundReport> {
    let recs = tr.records();
    let r0 = recs
        .first()
        .ok_or_else(|| Error::MissingData("trace has no records".into()))?;
    let p = tr.meta.params;
    let omega = tr.meta.grid.volume();
    let kp = p.kappa_plus();
    let mu = p.mu;
    let m0 = r0.mass_u;
    let big_m = m0.max(kp * omega / mu);
    let e0 = r0.energy;

    let t0 = r0.t;
    let t: Vec<f64> = recs.iter().map(|r| r.t - t0).collect();
    let col = |f: fn(&FunctionalRecord) -> f64| -> Vec<f64> { recs.iter().map(f).collect() };
    let int = |f: fn(&FunctionalRecord) -> f64| cumulative_trapezoid(&t, &col(f));

    let mut rep = BoundReport::default();
    let n = t.len();
    let lin = |slope: f64, c: f64| -> Vec<f64> { t.iter().map(|&s| slope * s + c).collect() };

    // (a)
    rep.items.push(worst("a: mass_u <= M0", &t, &vec![big_m; n], &col(|r| r.mass_u), rel_tol));
    if p.kappa <= 0.0 {
        let rise = recs
            .windows(2)
            .map(|w| w[1].mass_u - w[0].mass_u)
            .fold(0.0, f64::max);
        rep.items
            .push(BoundItem::new("a: mass_u nonincreasing", t[n - 1], 0.0, rise, rel_tol * big_m));
    }

    // (b)
    let iu2 = int(|r| r.u_l2sq);
    let ieps = int(|r| r.eps_theta);
    let obs_b: Vec<f64> = iu2.iter().zip(&ieps).map(|(a, b)| a + b / mu).collect();
    rep.items
        .push(at_end("b: int u^2 + eps/mu int u^th", &t, &lin(kp / mu * big_m, m0 / mu), &obs_b, rel_tol));

    // (c)
    let theo_c = big_m.max(r0.mass_v);
    rep.items.push(worst("c: mass_v", &t, &vec![theo_c; n], &col(|r| r.mass_v), rel_tol));

    // (d)
    let iv2 = int(|r| r.v_l2sq);
    let obs_d: Vec<f64> = recs.iter().zip(&iv2).map(|(r, i)| r.v_l2sq + i).collect();
    rep.items.push(at_end(
        "d: v_l2sq + int v^2",
        &t,
        &lin(kp / mu * big_m, m0 / mu + r0.v_l2sq),
        &obs_d,
        rel_tol,
    ));

    // (e)
    let theo_e = e0.max((kp + 1.0) * big_m / mu);
    rep.items.push(worst("e: energy", &t, &vec![theo_e; n], &col(|r| r.energy), rel_tol));

    // (f)
    let ilap = int(|r| r.lap_v_l2sq);
    rep.items
        .push(at_end("f: int lap_v^2", &t, &lin(kp / mu * big_m, e0), &ilap, rel_tol));

    // (g)
    let idiss = int(|r| r.dissipation);
    let iu2log = int(|r| r.u2log);
    let has_log = recs.iter().all(|r| r.eps_theta_log.is_some());
    let ilog = if has_log {
        cumulative_trapezoid(&t, &recs.iter().map(|r| r.eps_theta_log.unwrap()).collect::<Vec<_>>())
    } else {
        if p.eps > 0.0 {
            rep.notes.push(
                "g: eps*int u^theta log(1+u) is not stored in CSV traces; the check omits this nonnegative term".into(),
            );
        }
        vec![0.0; n]
    };
    let obs_g: Vec<f64> = (0..n)
        .map(|k| 0.5 * idiss[k] + mu * iu2log[k] + ilog[k])
        .collect();
    let theo_g: Vec<f64> = t
        .iter()
        .map(|&s| {
            (kp + 0.5) / mu * (kp * big_m * s + m0)
                + big_m
                + 0.5 * (kp / mu * big_m * s + e0)
                + 0.5 * s * theo_e
                + r0.entropy
        })
        .collect();
    rep.items.push(at_end("g: entropy dissipation", &t, &theo_g, &obs_g, rel_tol));
    rep.notes.push(
        "g: the constant is assembled from the coarser estimates (a), (b), (e), (f) and is not sharp".into(),
    );
    Ok(rep)
}
