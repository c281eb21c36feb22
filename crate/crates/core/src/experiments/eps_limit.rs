use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::functionals::{cumulative_trapezoid, trace_run, Trace};

use super::config::RunConfig;
use super::report::{ExperimentReport, Provenance, RunSummary, Verdict};

/// `(∫₀ᵀ ‖u₁ − u₂‖² + ‖v₁ − v₂‖² dt)^{1/2}` over matching snapshots.
pub fn space_time_distance(a: &Trace, b: &Trace) -> Result<f64> {
    let (sa, sb) = (a.snapshots(), b.snapshots());
    if sa.len() < 2 || sa.len() != sb.len() {
        return Err(Error::MissingData(format!(
            "distance needs matching snapshot series (got {} and {})",
            sa.len(),
            sb.len()
        )));
    }
    let mut t = Vec::with_capacity(sa.len());
    let mut d2 = Vec::with_capacity(sa.len());
    for (x, y) in sa.iter().zip(sb) {
        if (x.t - y.t).abs() > 1e-9 * x.t.abs().max(1.0) {
            return Err(Error::MissingData(format!("snapshot times {} and {} differ", x.t, y.t)));
        }
        let du = x.u.zip_map(&y.u, |p, q| p - q);
        let dv = x.v.zip_map(&y.v, |p, q| p - q);
        t.push(x.t);
        d2.push(du.inner(&du) + dv.inner(&dv));
    }
    Ok(cumulative_trapezoid(&t, &d2).last().copied().unwrap_or(0.0).sqrt())
}

/// Runs with `ε_j = 2^{−j}`, `j = 0..=j_max`, on identical grids and data.
/// The data are prepared once at the finest `ε` and shared by every run.
///
/// Verdicts: `d_j` (distance between runs `j` and `j+1`) strictly
/// decreasing; the last `d_j` below `eps_tol`; `ε∫∫u^θ` halving from one
/// run to the next within 20%.
pub fn run_eps_limit(base: &RunConfig) -> Result<ExperimentReport> {
    if base.j_max < 2 {
        return Err(Error::InvalidArgument(format!("j_max = {} must be at least 2", base.j_max)));
    }
    let cfgs: Vec<RunConfig> = (0..=base.j_max)
        .map(|j| RunConfig {
            eps: 0.5f64.powi(j as i32),
            ..base.clone()
        })
        .collect();
    let s0 = cfgs.last().expect("j_max >= 2").initial_state()?;
    let runs: Vec<Result<Trace>> = cfgs
        .par_iter()
        .map(|c| {
            let run = trace_run(&c.stepper()?, c.state_from(s0.u.clone(), s0.v.clone())?, c.t_end, c.cadence, 1)?;
            match run.escaped {
                Some(e) => Err(e),
                None => Ok(run.trace),
            }
        })
        .collect();

    let mut rep = ExperimentReport::new("eps_limit");
    let mut traces = Vec::new();
    for (c, r) in cfgs.iter().zip(runs) {
        match r {
            Ok(tr) => traces.push(tr),
            Err(e) if e.is_blowup() => {
                rep.notes.push(format!("eps = {}: {e}", c.eps));
                rep.verdicts.push(Verdict::new(
                    "eps.blowup",
                    format!("eps{}", c.eps),
                    f64::INFINITY,
                    c.blowup_ceiling,
                    0.0,
                    false,
                    Provenance::Config("blowup_ceiling".into()),
                ));
                return Ok(rep);
            }
            Err(e) => return Err(e),
        }
    }

    let integrals: Vec<f64> = traces
        .iter()
        .map(|tr| {
            let t = tr.times();
            let y = tr.column(|r| r.eps_theta);
            cumulative_trapezoid(&t, &y).last().copied().unwrap_or(0.0)
        })
        .collect();
    let mut d = Vec::new();
    for j in 0..base.j_max {
        d.push(space_time_distance(&traces[j], &traces[j + 1])?);
    }
    for (j, c) in cfgs.iter().enumerate() {
        let mut s = RunSummary::new(format!("j{j}"));
        s.push("eps", c.eps).push("eps_theta_integral", integrals[j]);
        if j < d.len() {
            s.push("d", d[j]);
        }
        rep.runs.push(s);
    }
    for j in 1..d.len() {
        rep.verdicts.push(Verdict::new(
            "eps.distance_decreasing",
            format!("d{j}<d{}", j - 1),
            d[j],
            d[j - 1],
            0.0,
            d[j] < d[j - 1],
            Provenance::Config("j_max".into()),
        ));
    }
    let last = *d.last().expect("j_max >= 2");
    rep.verdicts.push(Verdict::new(
        "eps.distance_small",
        format!("d{}", d.len() - 1),
        last,
        base.eps_tol,
        0.0,
        last <= base.eps_tol,
        Provenance::Config("eps_tol".into()),
    ));
    for j in 0..base.j_max {
        let ratio = integrals[j] / integrals[j + 1];
        rep.verdicts.push(Verdict::new(
            "eps.integral_halving",
            format!("I{j}/I{}", j + 1),
            ratio,
            2.0,
            0.2,
            (ratio / 2.0 - 1.0).abs() <= 0.2,
            Provenance::Formula("eps_j = 2^-j".into()),
        ));
    }
    Ok(rep)
}
