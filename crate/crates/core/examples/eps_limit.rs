//! Distances between runs with ε = 2^{-j} and the vanishing of ε∫∫u^θ.

use kslab::experiments::{run_eps_limit, RunConfig};

fn main() -> kslab::Result<()> {
    let cfg = RunConfig {
        extent: 4.0,
        cells: 64,
        kappa: 0.05,
        t_end: 2.0,
        cadence: 0.05,
        u0: "cos:0.5,0.2".into(),
        v0: "const:0.3".into(),
        j_max: 7,
        ..Default::default()
    };
    print!("{}", run_eps_limit(&cfg)?);
    Ok(())
}
