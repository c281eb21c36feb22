use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::functionals::{trace_run, Trace};
use crate::solver::Profile;

use super::config::RunConfig;
use super::report::{ExperimentReport, Provenance, RunSummary, Verdict};

/// `max(sup u + sup|∇v|)` over the last quarter of the trace.
pub fn absorbing_radius(tr: &Trace) -> Option<f64> {
    let t_end = tr.last()?.t;
    let t0 = tr.first()?.t;
    let start = t0 + 0.75 * (t_end - t0);
    tr.records()
        .iter()
        .filter(|r| r.t >= start)
        .map(|r| r.sup_u + r.sup_grad_v)
        .reduce(f64::max)
}

/// κ ladder and ensemble of one absorbing-set experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorbingPlan {
    /// Reference κ₀ the fractions refer to.
    pub kappa0: f64,
    pub provenance: Provenance,
    pub fractions: Vec<f64>,
    pub ensemble: usize,
}

impl AbsorbingPlan {
    pub fn from_config(cfg: &RunConfig, kappa0: f64, provenance: Provenance) -> Self {
        AbsorbingPlan {
            kappa0,
            provenance,
            fractions: cfg.kappa_fractions.clone(),
            ensemble: cfg.ensemble,
        }
    }

    /// Member `i` at growth rate κ: random low-mode fields with mean κ/μ and
    /// amplitude κ/(2μ).
    fn member(&self, base: &RunConfig, kappa: f64, i: usize) -> RunConfig {
        let m = kappa / base.mu;
        let seed = base.seed.wrapping_mul(1009).wrapping_add(i as u64);
        RunConfig {
            kappa,
            u0: Profile::Random {
                base: m,
                amp: 0.5 * m,
                modes: 8,
                seed,
            }
            .to_string(),
            v0: Profile::Random {
                base: m,
                amp: 0.5 * m,
                modes: 8,
                seed: seed ^ 0x5a5a,
            }
            .to_string(),
            ..base.clone()
        }
    }
}

/// R(κ) over the ladder and the ensemble.
///
/// Verdicts: every R finite; the relative ensemble spread at each κ within
/// `spread_tol`; the ensemble mean of R nonincreasing as κ decreases, up to
/// the same tolerance.
pub fn run_absorbing_experiment(base: &RunConfig, plan: &AbsorbingPlan) -> Result<ExperimentReport> {
    if plan.ensemble == 0 || plan.fractions.is_empty() {
        return Err(Error::InvalidArgument("absorbing experiment needs a ladder and an ensemble".into()));
    }
    if plan.fractions.iter().any(|f| !(*f > 0.0 && *f < 1.0)) {
        return Err(Error::InvalidArgument(format!(
            "kappa fractions {:?} must lie in (0, 1)",
            plan.fractions
        )));
    }
    let mut fractions = plan.fractions.clone();
    fractions.sort_by(|a, b| b.total_cmp(a));
    let jobs: Vec<(f64, usize)> = fractions
        .iter()
        .flat_map(|&f| (0..plan.ensemble).map(move |i| (f, i)))
        .collect();
    let radii: Vec<Result<(Option<f64>, Option<String>)>> = jobs
        .par_iter()
        .map(|&(f, i)| {
            let c = plan.member(base, f * plan.kappa0, i);
            let run = trace_run(&c.stepper()?, c.initial_state()?, c.t_end, c.cadence, 0)?;
            let escaped = run.escaped.map(|e| e.to_string());
            Ok((absorbing_radius(&run.trace), escaped))
        })
        .collect();

    let mut rep = ExperimentReport::new("absorbing");
    rep.notes.push(format!("kappa0 = {:.6e} ({})", plan.kappa0, plan.provenance));
    let tol = base.spread_tol;
    let mut means: Vec<(f64, f64)> = Vec::new();
    for (k, &f) in fractions.iter().enumerate() {
        let kappa = f * plan.kappa0;
        let mut rs = Vec::new();
        for i in 0..plan.ensemble {
            let (r, escaped) = match &radii[k * plan.ensemble + i] {
                Ok(v) => v.clone(),
                Err(e) => return Err(Error::InvalidArgument(format!("member {i} at kappa {kappa}: {e}"))),
            };
            if let Some(e) = escaped {
                rep.notes.push(format!("kappa {kappa:.4e} member {i}: {e}"));
            }
            rs.push(r.unwrap_or(f64::INFINITY));
        }
        let label = format!("kappa{kappa:.4e}");
        let finite = rs.iter().all(|r| r.is_finite());
        let hi = rs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = rs.iter().copied().fold(f64::INFINITY, f64::min);
        let spread = if hi > 0.0 { (hi - lo) / hi } else { 0.0 };
        let mean = rs.iter().sum::<f64>() / rs.len() as f64;
        let mut sum = RunSummary::new(&label);
        sum.push("kappa", kappa)
            .push("fraction", f)
            .push("r_mean", mean)
            .push("r_min", lo)
            .push("r_max", hi)
            .push("spread", spread)
            .push("r_over_kappa_mu", mean / (kappa / base.mu));
        rep.runs.push(sum);
        rep.verdicts.push(Verdict::new(
            "absorbing.finite",
            &label,
            hi,
            base.blowup_ceiling,
            0.0,
            finite,
            Provenance::Config("blowup_ceiling".into()),
        ));
        rep.verdicts.push(Verdict::new(
            "absorbing.spread",
            &label,
            spread,
            tol,
            0.0,
            finite && spread <= tol,
            Provenance::Config("spread_tol".into()),
        ));
        means.push((kappa, mean));
    }
    for w in means.windows(2) {
        let ((k_hi, r_hi), (k_lo, r_lo)) = (w[0], w[1]);
        rep.verdicts.push(Verdict::new(
            "absorbing.monotone",
            format!("kappa{k_lo:.4e}<kappa{k_hi:.4e}"),
            r_lo,
            r_hi,
            tol,
            r_lo <= r_hi * (1.0 + tol),
            plan.provenance.clone(),
        ));
    }
    Ok(rep)
}
