//! Initial-data profiles and their preparation for the regularized runs.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::grid::{gradient, Field, Grid, Spectrum};

/// Closed-form or sampled initial profile.
///
/// Textual forms (used by config files):
///
/// | text | profile |
/// |------|---------|
/// | `const:c` | `c` |
/// | `cos:base,amp[,k0,k1,k2]` | `base + amp·Π cos(k_d π x_d / L_d)` (default `k = 1`) |
/// | `bump:base,amp,width` | Gaussian bump at the box center |
/// | `step:base,amp,radius` | `base + amp` inside the centered ball, `base` outside |
/// | `random:base,amp,modes,seed` | `base + amp·w/‖w‖_∞`, `w` a random mix of the lowest nonconstant modes |
/// | `snapshot:path` | field loaded from a snapshot file |
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Constant(f64),
    Cosine { base: f64, amp: f64, k: [u32; 3] },
    Bump { base: f64, amp: f64, width: f64 },
    Step { base: f64, amp: f64, radius: f64 },
    Random { base: f64, amp: f64, modes: usize, seed: u64 },
    Snapshot(String),
    Sampled(Field),
}

impl Profile {
    pub fn sample(&self, grid: &Grid) -> Result<Field> {
        let ext = grid.extents().to_vec();
        let dim = grid.dim();
        let center = |x: [f64; 3]| -> f64 {
            (0..dim)
                .map(|d| (x[d] - 0.5 * ext[d]).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        Ok(match self {
            Profile::Constant(c) => Field::constant(*grid, *c),
            Profile::Cosine { base, amp, k } => Field::from_fn(*grid, |x| {
                base + amp
                    * (0..dim)
                        .map(|d| (k[d] as f64 * PI * x[d] / ext[d]).cos())
                        .product::<f64>()
            }),
            Profile::Bump { base, amp, width } => Field::from_fn(*grid, |x| {
                base + amp * (-0.5 * (center(x) / width).powi(2)).exp()
            }),
            Profile::Step { base, amp, radius } => Field::from_fn(*grid, |x| {
                if center(x) < *radius {
                    base + amp
                } else {
                    *base
                }
            }),
            Profile::Random {
                base,
                amp,
                modes,
                seed,
            } => {
                let sp = Spectrum::new(grid);
                let lowest = sp.lowest_modes((modes + 1).min(grid.len()));
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut w = Field::zeros(*grid);
                for (m, _) in lowest.iter().skip(1) {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    w.axpy(z, &sp.mode_field(*m));
                }
                let s = w.sup_norm();
                if s > 0.0 {
                    w.scale(amp / s);
                }
                w.map(|x| x + base)
            }
            Profile::Snapshot(path) => {
                let (f, _) = super::snapshot::read_field(path, grid.extents())?;
                if f.grid() != grid {
                    return Err(Error::InvalidArgument(format!(
                        "snapshot {path} does not match grid {}",
                        grid.id()
                    )));
                }
                f
            }
            Profile::Sampled(f) => {
                if f.grid() != grid {
                    return Err(Error::InvalidArgument("sampled field is on another grid".into()));
                }
                f.clone()
            }
        })
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("cannot parse profile '{s}'"));
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        if kind == "snapshot" {
            return Ok(Profile::Snapshot(rest.to_string()));
        }
        let nums: Vec<f64> = rest
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        let p = match (kind, nums.as_slice()) {
            ("const", [c]) => Profile::Constant(*c),
            ("cos", [b, a]) => Profile::Cosine {
                base: *b,
                amp: *a,
                k: [1, 1, 1],
            },
            ("cos", [b, a, ks @ ..]) if !ks.is_empty() && ks.len() <= 3 => {
                let mut k = [0u32; 3];
                for (d, v) in ks.iter().enumerate() {
                    k[d] = *v as u32;
                }
                Profile::Cosine {
                    base: *b,
                    amp: *a,
                    k,
                }
            }
            ("bump", [b, a, w]) => Profile::Bump {
                base: *b,
                amp: *a,
                width: *w,
            },
            ("step", [b, a, r]) => Profile::Step {
                base: *b,
                amp: *a,
                radius: *r,
            },
            ("random", [b, a, m, seed]) => Profile::Random {
                base: *b,
                amp: *a,
                modes: *m as usize,
                seed: *seed as u64,
            },
            _ => return Err(bad()),
        };
        Ok(p)
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Constant(c) => write!(f, "const:{c}"),
            Profile::Cosine { base, amp, k } => {
                write!(f, "cos:{base},{amp},{},{},{}", k[0], k[1], k[2])
            }
            Profile::Bump { base, amp, width } => write!(f, "bump:{base},{amp},{width}"),
            Profile::Step { base, amp, radius } => write!(f, "step:{base},{amp},{radius}"),
            Profile::Random {
                base,
                amp,
                modes,
                seed,
            } => write!(f, "random:{base},{amp},{modes},{seed}"),
            Profile::Snapshot(p) => write!(f, "snapshot:{p}"),
            Profile::Sampled(_) => write!(f, "sampled"),
        }
    }
}

/// Spectral truncation of `f` to its `k` lowest modes.
fn truncate(sp: &Spectrum, coeffs_by_rank: &[(usize, f64)], k: usize) -> Field {
    let mut c = vec![0.0; sp.grid().len()];
    for &(idx, val) in coeffs_by_rank.iter().take(k) {
        c[idx] = val;
    }
    sp.inverse(&c)
}

/// Shift a field up so that its minimum is zero (no-op if already ≥ 0).
fn lift_nonnegative(mut f: Field) -> Field {
    let m = f.min();
    if m < 0.0 {
        f.values_mut().iter_mut().for_each(|x| *x -= m);
    }
    f
}

fn ranked_coefficients(sp: &Spectrum, f: &Field) -> Vec<(usize, f64)> {
    let coeffs = sp.forward(f);
    let g = sp.grid();
    sp.lowest_modes(g.len())
        .into_iter()
        .map(|(m, _)| {
            let idx = g.ravel(m);
            (idx, coeffs[idx])
        })
        .collect()
}

/// Sample the initial profiles and smooth them for a run with regularization
/// `eps`.
///
/// The returned `u0ε` satisfies `‖u0ε − u0‖₂ ≤ min{ε, 1}` and `v0ε` satisfies
/// the same bound in `W^{1,2}`. Both are built from the lowest spectral modes;
/// the number of retained modes doubles until the bound holds. For `eps = 0`
/// the sampled data is returned unchanged.
pub fn make_initial_data(grid: &Grid, u0: &Profile, v0: &Profile, eps: f64) -> Result<(Field, Field)> {
    let u = u0.sample(grid)?;
    let v = v0.sample(grid)?;
    for (name, f) in [("u0", &u), ("v0", &v)] {
        if !f.is_finite() {
            return Err(Error::InvalidArgument(format!("{name} has non-finite values")));
        }
        if f.min() < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "{name} takes the negative value {}",
                f.min()
            )));
        }
    }
    if eps == 0.0 {
        return Ok((u, v));
    }
    let tol = eps.min(1.0);
    let sp = Spectrum::new(grid);
    let n = grid.len();

    let ranked_u = ranked_coefficients(&sp, &u);
    let ranked_v = ranked_coefficients(&sp, &v);
    let u_err = |f: &Field| f.zip_map(&u, |a, b| a - b).l2_norm();
    let v_err = |f: &Field| {
        let d = f.zip_map(&v, |a, b| a - b);
        let gd = gradient(&d);
        (d.inner(&d) + gd.inner(&gd)).sqrt()
    };

    let prepare = |ranked: &[(usize, f64)], err: &dyn Fn(&Field) -> f64, orig: &Field| {
        let mut k = 1;
        loop {
            let cand = lift_nonnegative(truncate(&sp, ranked, k));
            if err(&cand) <= tol {
                return cand;
            }
            if k >= n {
                // full expansion reproduces the sampled data up to rounding
                return orig.clone();
            }
            k = (2 * k).min(n);
        }
    };
    Ok((prepare(&ranked_u, &u_err, &u), prepare(&ranked_v, &v_err, &v)))
}
