use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::functionals::{trace_run, Trace};
use crate::solver::Profile;

use super::config::RunConfig;
use super::report::{ExperimentReport, Provenance, RunSummary, Verdict};

/// Solution of the spatially homogeneous system
/// `u' = κu − μu² − εu^θ`, `v' = −v + u` by RK4 with step `dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousOde {
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl HomogeneousOde {
    #[allow(clippy::too_many_arguments)]
    pub fn solve(kappa: f64, mu: f64, eps: f64, theta: f64, u0: f64, v0: f64, t_end: f64, dt: f64) -> Self {
        let f = |u: f64, v: f64| {
            let mut du = kappa * u - mu * u * u;
            if eps > 0.0 {
                du -= eps * u.max(0.0).powf(theta);
            }
            (du, u - v)
        };
        let steps = (t_end / dt).ceil().max(1.0) as usize;
        let h = t_end / steps as f64;
        let (mut t, mut uu, mut vv) = (vec![0.0], vec![u0], vec![v0]);
        let (mut u, mut v) = (u0, v0);
        for k in 0..steps {
            let (a1, b1) = f(u, v);
            let (a2, b2) = f(u + 0.5 * h * a1, v + 0.5 * h * b1);
            let (a3, b3) = f(u + 0.5 * h * a2, v + 0.5 * h * b2);
            let (a4, b4) = f(u + h * a3, v + h * b3);
            u += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
            v += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
            t.push((k + 1) as f64 * h);
            uu.push(u);
            vv.push(v);
        }
        HomogeneousOde { t, u: uu, v: vv }
    }

    pub fn sum(&self) -> Vec<f64> {
        self.u.iter().zip(&self.v).map(|(a, b)| a + b).collect()
    }
}

/// First time `s` drops to `level`, linearly interpolated between samples.
pub fn crossing_time(t: &[f64], s: &[f64], level: f64) -> Option<f64> {
    if s.first()? <= &level {
        return Some(t[0]);
    }
    for k in 1..s.len() {
        if s[k] <= level {
            let (s0, s1) = (s[k - 1], s[k]);
            let w = if s0 > s1 { (s0 - level) / (s0 - s1) } else { 1.0 };
            return Some(t[k - 1] + w * (t[k] - t[k - 1]));
        }
    }
    None
}

fn constant_of(p: &str) -> Option<f64> {
    match p.parse::<Profile>().ok()? {
        Profile::Constant(c) => Some(c),
        _ => None,
    }
}

fn label(cfg: &RunConfig) -> String {
    format!("dim{}_kappa{}_mu{}", cfg.dim, cfg.kappa, cfg.mu)
}

/// Decay ladder for κ ≤ 0: `sup u + sup v` must fall below every level of
/// the ladder and stay below the smallest one. Runs with constant initial
/// data are also timed against [`HomogeneousOde`].
pub fn run_decay_experiment(cfgs: &[RunConfig]) -> Result<ExperimentReport> {
    for c in cfgs {
        if c.kappa > 0.0 {
            return Err(Error::InvalidParams(format!("decay experiment needs kappa <= 0, got {}", c.kappa)));
        }
    }
    let traces: Vec<Result<(Trace, Option<Error>)>> = cfgs
        .par_iter()
        .map(|c| {
            let run = trace_run(&c.stepper()?, c.initial_state()?, c.t_end, c.cadence, 0)?;
            Ok((run.trace, run.escaped))
        })
        .collect();

    let mut rep = ExperimentReport::new("decay");
    for (c, res) in cfgs.iter().zip(traces) {
        let (tr, escaped) = res?;
        let name = label(c);
        if let Some(e) = escaped {
            rep.verdicts.push(Verdict::new(
                "decay.blowup",
                &name,
                f64::INFINITY,
                c.blowup_ceiling,
                0.0,
                false,
                Provenance::Config("blowup_ceiling".into()),
            ));
            rep.notes.push(format!("{name}: {e}"));
            continue;
        }
        let t = tr.times();
        let s = tr.column(|r| r.sup_u + r.sup_v);
        let su = tr.column(|r| r.sup_u);
        let mut sum = RunSummary::new(&name);
        let mut ladder = c.ladder.clone();
        ladder.sort_by(|a, b| b.total_cmp(a));
        for &lv in &ladder {
            sum.push(format!("cross_{lv}"), crossing_time(&t, &s, lv).unwrap_or(f64::NAN));
        }
        sum.push("final_sup_sum", *s.last().unwrap_or(&f64::NAN));

        if let Some(&smallest) = ladder.last() {
            let tc = crossing_time(&t, &s, smallest);
            let after = match tc {
                Some(tc) => t
                    .iter()
                    .zip(&s)
                    .filter(|(ti, _)| **ti >= tc)
                    .map(|(_, si)| *si)
                    .fold(f64::NEG_INFINITY, f64::max),
                None => f64::INFINITY,
            };
            rep.verdicts.push(Verdict::new(
                "decay.reached",
                &name,
                after,
                smallest,
                0.0,
                tc.is_some() && after <= smallest * (1.0 + 1e-12),
                Provenance::Config("ladder".into()),
            ));
        }

        if let (Some(u0), Some(v0)) = (constant_of(&c.u0), constant_of(&c.v0)) {
            let p = c.params()?;
            let ode = HomogeneousOde::solve(p.kappa, p.mu, p.eps, p.theta, u0, v0, c.t_end, 1e-4);
            let os = ode.sum();
            for &lv in &ladder {
                let observed = crossing_time(&t, &s, lv);
                let oracle = crossing_time(&ode.t, &os, lv);
                if let Some(o) = oracle {
                    let obs = observed.unwrap_or(f64::INFINITY);
                    let rel = if o > 0.0 { (obs - o).abs() / o } else { (obs - o).abs() };
                    rep.verdicts.push(Verdict::new(
                        "decay.oracle",
                        format!("{name}_level{lv}"),
                        obs,
                        o,
                        c.crossing_tol,
                        rel <= c.crossing_tol,
                        Provenance::Oracle("homogeneous RK4, dt 1e-4".into()),
                    ));
                }
                let ou = crossing_time(&ode.t, &ode.u, lv);
                sum.push(format!("cross_u_{lv}"), crossing_time(&t, &su, lv).unwrap_or(f64::NAN));
                sum.push(format!("oracle_u_{lv}"), ou.unwrap_or(f64::NAN));
                sum.push(format!("oracle_sum_{lv}"), oracle.unwrap_or(f64::NAN));
            }
        }
        rep.runs.push(sum);
    }
    Ok(rep)
}

/// The runs of a decay config: one per entry of `kappa_sweep`, or just the
/// config itself.
pub fn decay_sweep(base: &RunConfig) -> Vec<RunConfig> {
    if base.kappa_sweep.is_empty() {
        return vec![base.clone()];
    }
    base.kappa_sweep
        .iter()
        .map(|&k| RunConfig {
            kappa: k,
            ..base.clone()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ode_matches_logistic_closed_forms() {
        // κ = −1: u = 1/(2eᵗ − 1); κ = 0: u = 1/(1 + t)
        let o = HomogeneousOde::solve(-1.0, 1.0, 0.0, 4.0, 1.0, 0.0, 3.0, 1e-3);
        for (t, u) in o.t.iter().zip(&o.u) {
            assert!((u - 1.0 / (2.0 * t.exp() - 1.0)).abs() < 1e-10);
        }
        let tc = crossing_time(&o.t, &o.u, 0.1).unwrap();
        assert!((tc - 5.5f64.ln()).abs() < 1e-4, "{tc}");
        let o = HomogeneousOde::solve(0.0, 1.0, 0.0, 4.0, 1.0, 0.0, 12.0, 1e-3);
        let tc = crossing_time(&o.t, &o.u, 0.1).unwrap();
        assert!((tc - 9.0).abs() < 1e-4, "{tc}");
    }

    #[test]
    fn ode_linear_v_decay() {
        let o = HomogeneousOde::solve(-1.0, 1.0, 0.0, 4.0, 0.0, 2.0, 2.0, 1e-3);
        let tc = crossing_time(&o.t, &o.v, 2.0 / std::f64::consts::E).unwrap();
        assert!((tc - 1.0).abs() < 1e-4);
    }

    #[test]
    fn crossing_interpolates() {
        let t = [0.0, 1.0, 2.0];
        let s = [1.0, 0.5, 0.0];
        assert_eq!(crossing_time(&t, &s, 0.25), Some(1.5));
        assert_eq!(crossing_time(&t, &s, 2.0), Some(0.0));
        assert_eq!(crossing_time(&t, &s, -1.0), None);
    }

    #[test]
    fn homogeneous_decay_runs_match_oracle() {
        let base = RunConfig {
            dim: 1,
            cells: 16,
            mu: 1.0,
            u0: "const:1".into(),
            v0: "const:0".into(),
            t_end: 25.0,
            ladder: vec![0.5, 0.1],
            ..Default::default()
        };
        let cfgs = decay_sweep(&RunConfig {
            kappa_sweep: vec![-1.0, 0.0],
            ..base
        });
        let rep = run_decay_experiment(&cfgs).unwrap();
        assert_eq!(rep.verdicts_for("decay.oracle").count(), 4);
        assert!(rep.all_pass(), "{rep}");
        let r = rep.run("dim1_kappa-1_mu1").unwrap();
        assert!((r.get("oracle_u_0.1").unwrap() - 5.5f64.ln()).abs() < 1e-3);
    }

    #[test]
    fn rejects_positive_kappa() {
        let c = RunConfig {
            kappa: 0.1,
            ..Default::default()
        };
        assert!(run_decay_experiment(&[c]).is_err());
    }
}
