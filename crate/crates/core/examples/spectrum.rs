//! Neumann spectrum, Poincaré constant and the embedding constant estimate.

use std::f64::consts::PI;

use kslab::grid::{poincare_constant, DomainConstants, Grid, Spectrum};

fn main() -> kslab::Result<()> {
    let g = Grid::cube(1, PI, 256)?;
    let s = Spectrum::new(&g);
    let h = g.spacing(0);
    println!("j   lambda_j        (4/h^2) sin^2(j pi / 2N)");
    for j in 0..6 {
        let closed = 4.0 / (h * h) * (j as f64 * PI / 512.0).sin().powi(2);
        println!("{j}   {:<14.10} {closed:.10}", s.axis(0).eigenvalues()[j]);
    }
    println!("C_P on (0, pi), 256 cells: {:.6}", poincare_constant(&g));

    let g3 = Grid::cube(3, PI, 16)?;
    let dc = DomainConstants::compute(&g3, 64, 1)?;
    println!(
        "16^3 box of side pi: lambda1 = {:.5}, C_P = {:.5}, C_Omega ~ {:?}",
        dc.lambda1, dc.c_p, dc.c_omega
    );
    Ok(())
}
