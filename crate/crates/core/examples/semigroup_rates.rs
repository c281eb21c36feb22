//! Smoothing exponents of the Neumann heat semigroup against 1/2 + n/(2q).

use kslab::grid::Grid;
use kslab::semigroup::{smoothing_fit, SpectralKernel};

fn main() -> kslab::Result<()> {
    for (dim, cells) in [(1, 128), (2, 64)] {
        let k = SpectralKernel::new(&Grid::cube(dim, 3.0, cells)?);
        for q in [2.0, 4.0, 8.0] {
            let f = smoothing_fit(&k, q, 12, 3)?;
            println!(
                "n = {dim}, q = {q}: alpha {:.4} (expected {:.4}, rel err {:.3}), C = {:.3e}",
                f.alpha_fit, f.alpha_expected, f.rel_err, f.c_fit
            );
        }
    }
    Ok(())
}
