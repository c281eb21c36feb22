//! Tracked integrals, traces, the a-priori bound ledger and the weak residual.

mod bounds;
mod record;
mod trace;
mod weak;

pub use bounds::{cumulative_trapezoid, verify_apriori_bounds, BoundItem, BoundReport, Status, DEFAULT_REL_TOL};
pub use record::{compute_record, FunctionalRecord};
pub use trace::{trace_run, Snapshot, Trace, TraceMeta, TracedRun};
pub use weak::{weak_residual, TestFunction, WeakResidual};
