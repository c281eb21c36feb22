//! D(δ) and K(δ) of the ε-independent bootstrap on δ = 10^{-k}.

use kslab::experiments::{d_delta_eval, run_d_delta, KConstants, RunConfig};

fn main() -> kslab::Result<()> {
    let cfg = RunConfig {
        dim: 3,
        extent: 3.0,
        cells: 32,
        ..Default::default()
    };
    let (k, prov) = KConstants::from_config(&cfg)?;
    print!("{}", run_d_delta(&cfg, &k, prov)?);
    // with C₄ = 0 the map is C₃√δ
    println!("D(1e-4) with C4 = 0: {:.6e}", d_delta_eval(1e-4, cfg.p_exp, k.c3, 0.0)?);
    Ok(())
}
