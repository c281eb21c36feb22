//! Radius of the absorbing set against κ on a small 1D ensemble.
//!
//! The 3D version with fitted κ₀ is `kslab experiment absorbing`.

use kslab::experiments::{run_absorbing_experiment, AbsorbingPlan, Provenance, RunConfig};

fn main() -> kslab::Result<()> {
    let cfg = RunConfig {
        extent: 4.0,
        cells: 32,
        t_end: 10.0,
        ..Default::default()
    };
    let plan = AbsorbingPlan {
        kappa0: 0.2,
        provenance: Provenance::Config("kappa0".into()),
        fractions: vec![0.125, 0.25, 0.5],
        ensemble: 3,
    };
    print!("{}", run_absorbing_experiment(&cfg, &plan)?);
    Ok(())
}
