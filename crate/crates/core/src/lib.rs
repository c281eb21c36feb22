//! Numerical laboratory for the logistic Keller–Segel system
//!
//! ```text
//! u_t = Δu − ∇·(u∇v) + κu − μu² − εu^θ,    v_t = Δv − v + u
//! ```
//!
//! on boxes with homogeneous Neumann boundary conditions, together with the
//! machinery to check its a-priori bounds, the cubic differential inequality
//! for `y = ∫u² + ∫|∇v|⁴`, the heat-semigroup smoothing rates and the
//! long-time behaviour at desk scale.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod odi;
pub mod semigroup;
pub mod functionals;
pub mod solver;

pub use error::{Error, Result};
