//! The scalar layer: the cubic `p`, its roots and thresholds, comparison
//! solves and the trajectory-side inequality ledger.

mod comparison;
mod ledger;
mod poly;
mod thresholds;

pub use comparison::{comparison_solve, ComparisonTrajectory};
pub use ledger::{dt_u2_item, mass_entry_time, odi_ledger_check, window_length, LedgerConfig, LEDGER_REL_TOL, ROUNDOFF_FLOOR};
pub use poly::{OdiPolynomial, ROOT_TOL};
pub use thresholds::{
    admissibility_margin, fit_gn_constants, select_thresholds, write_thresholds_csv, write_thresholds_to,
    young_constant, ConstantChain, ThresholdRow, ThresholdSet, KAPPA0_SAFETY, KAPPA_TILDE_FRACTION,
};
