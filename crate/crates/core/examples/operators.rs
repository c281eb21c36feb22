//! Discrete Neumann operators: gradient on faces, flux divergence, Laplacian.
//!
//! Prints the summation-by-parts defect and the total flux for a few fields.

use std::f64::consts::PI;

use kslab::grid::{divergence, gradient, laplacian, Field, Grid};

fn main() -> kslab::Result<()> {
    let g = Grid::new(2, &[2.0, 1.0], &[32, 16])?;
    let f = Field::from_fn(g, |x| (PI * x[0] / 2.0).cos() * (PI * x[1]).cos());
    let h = Field::from_fn(g, |x| x[0] * x[0] + x[1]);

    let lap = laplacian(&f);
    let sbp = h.inner(&lap) + gradient(&f).inner(&gradient(&h));
    println!("int h lap f + int grad f . grad h = {sbp:.3e}");
    println!("int lap f                        = {:.3e}", lap.integrate());
    println!("int div(grad h)                  = {:.3e}", divergence(&gradient(&h)).integrate());

    // f is an eigenfield of the continuous Laplacian with eigenvalue -(π/2)² - π²
    let exact = -(PI / 2.0).powi(2) - PI * PI;
    let ratio = lap.inner(&f) / f.inner(&f);
    println!("Rayleigh quotient {ratio:.6} vs continuum {exact:.6}");
    Ok(())
}
