//! Time to smallness on a 3D run at κ = κ₀/2, with the ODI ledger.

use kslab::experiments::{run_smallness_time, FittedConstants, RunConfig};

fn main() -> kslab::Result<()> {
    let base = RunConfig {
        dim: 3,
        extent: std::f64::consts::PI,
        cells: 12,
        mu: 5.0,
        t_end: 6.0,
        cadence: 0.05,
        u0: "cos:0.015,0.005,1,1,1".into(),
        v0: "const:0.015".into(),
        fit_samples: 32,
        ..Default::default()
    };
    let fc = FittedConstants::for_config(&base)?;
    let cfg = RunConfig {
        kappa: 0.5 * fc.thresholds.kappa0,
        ..base
    };
    print!("{}", run_smallness_time(&cfg, &fc)?);
    Ok(())
}
