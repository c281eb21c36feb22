//! A 1D run of the limit system with functionals sampled along the way.
//!
//! `cargo run --release --example simulate_1d -- [kappa] [mu]`

use kslab::experiments::RunConfig;
use kslab::functionals::trace_run;

fn main() -> kslab::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let cfg = RunConfig {
        kappa: args.first().copied().unwrap_or(0.5),
        mu: args.get(1).copied().unwrap_or(1.0),
        u0: "bump:0.2,3,0.5".into(),
        t_end: 10.0,
        cadence: 1.0,
        ..Default::default()
    };
    let run = trace_run(&cfg.stepper()?, cfg.initial_state()?, cfg.t_end, cfg.cadence, 0)?;
    println!("{:>5} {:>10} {:>10} {:>10} {:>10}", "t", "mass_u", "sup_u", "sup_v", "energy");
    for r in run.trace.records() {
        println!(
            "{:>5.1} {:>10.5} {:>10.5} {:>10.5} {:>10.5}",
            r.t, r.mass_u, r.sup_u, r.sup_v, r.energy
        );
    }
    if let Some(st) = run.stats {
        println!("{} steps, kappa/mu = {}", st.steps, cfg.kappa / cfg.mu);
    }
    Ok(())
}
