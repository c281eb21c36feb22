//! A-priori bound report for one run.

use kslab::experiments::RunConfig;
use kslab::functionals::{trace_run, verify_apriori_bounds};

fn main() -> kslab::Result<()> {
    let cfg = RunConfig {
        kappa: 0.1,
        mu: 0.2,
        u0: "cos:1,0.8,2".into(),
        t_end: 20.0,
        ..Default::default()
    };
    let run = trace_run(&cfg.stepper()?, cfg.initial_state()?, cfg.t_end, cfg.cadence, 0)?;
    let rep = verify_apriori_bounds(&run.trace, cfg.rel_tol)?;
    print!("{rep}");
    println!("all pass: {}", rep.all_pass());
    Ok(())
}
