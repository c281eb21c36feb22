//! Fitted constants, the threshold chain and the ODI polynomial at κ̂ = κ₀.

use kslab::experiments::{FittedConstants, RunConfig};
use kslab::odi::comparison_solve;

fn main() -> kslab::Result<()> {
    let cfg = RunConfig {
        dim: 3,
        extent: std::f64::consts::PI,
        cells: 16,
        mu: 5.0,
        ..Default::default()
    };
    let fc = FittedConstants::for_config(&cfg)?;
    let t = &fc.thresholds;
    println!("fit {}", fc.fit_id);
    println!("A = {:.4e}, C_P = {:.4}, C_Omega = {:.4}", t.a, t.c_p, t.c_omega);
    println!("nu = {:.4e}, eta = {:.4}, kappa0 = {:.4e}", t.nu, t.eta, t.kappa0);

    let p = t.polynomial(t.kappa0)?;
    let delta = p.largest_root().expect("root at kappa0");
    println!("delta = {delta:.6e}, p(delta) = {:.2e}, x_m = {:.4e}", p.eval(delta), p.local_min());
    // the comparison solution started just below δ stays below it
    let traj = comparison_solve(&p, 0.99 * delta, 50.0)?;
    println!("comparison from 0.99 delta: sup {:.6e}, final {:.6e}", traj.sup(), traj.last());
    Ok(())
}
