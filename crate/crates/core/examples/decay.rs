//! Decay for κ ≤ 0: crossing times of sup u + sup v against the scalar ODE.

use kslab::experiments::{decay_sweep, run_decay_experiment, RunConfig};

fn main() -> kslab::Result<()> {
    let cfg = RunConfig {
        cells: 16,
        kappa_sweep: vec![-1.0, -0.5, 0.0],
        t_end: 30.0,
        cadence: 0.02,
        u0: "const:1".into(),
        v0: "const:0".into(),
        ladder: vec![0.5, 0.1],
        ..Default::default()
    };
    print!("{}", run_decay_experiment(&decay_sweep(&cfg))?);
    Ok(())
}
