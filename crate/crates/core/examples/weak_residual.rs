//! Weak-form residuals of a 1D run under simultaneous (h, dt) halving.

use std::f64::consts::PI;

use kslab::functionals::{trace_run, weak_residual, TestFunction};
use kslab::grid::{Field, Grid};
use kslab::solver::{ModelParams, State, Stepper, StepperConfig};

fn main() -> kslab::Result<()> {
    let l = 2.0;
    let phi = TestFunction::new(vec![([0, 0, 0], 0.5), ([1, 0, 0], 1.0), ([2, 0, 0], 0.3)], 1.0)?;
    let mut prev = None;
    for lvl in 0..4 {
        let n = 16 << lvl;
        let dt = 1e-3 / (1 << lvl) as f64;
        let g = Grid::cube(1, l, n)?;
        let st = Stepper::new(&g, StepperConfig { dt, ..Default::default() })?;
        let u = Field::from_fn(g, |x| 1.0 + 0.5 * (PI * x[0] / l).cos());
        let v = Field::from_fn(g, |x| 0.5 + 0.3 * (2.0 * PI * x[0] / l).cos());
        let s0 = State::new(u, v, 0.0, ModelParams::limit(0.5, 1.0, 1)?)?;
        let tr = trace_run(&st, s0, 1.0, 8.0 * dt, 1)?.trace;
        let r = weak_residual(&tr, &phi)?;
        print!("n = {n:>3}, dt = {dt:.2e}: r_u = {:.3e}, r_v = {:.3e}", r.r_u, r.r_v);
        if let Some((pu, pv)) = prev {
            print!("  ratios {:.2} {:.2}", pu / r.r_u, pv / r.r_v);
        }
        println!();
        prev = Some((r.r_u, r.r_v));
    }
    Ok(())
}
