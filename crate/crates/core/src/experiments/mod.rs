//! Configuration, run orchestration and the headline experiments.

mod absorbing;
mod config;
mod d_delta;
mod decay;
mod eps_limit;
mod holder;
pub mod plot;
mod report;
mod smallness;

pub use absorbing::{absorbing_radius, run_absorbing_experiment, AbsorbingPlan};
pub use config::RunConfig;
pub use d_delta::{bootstrap_constants, d_delta_eval, k_delta, run_d_delta, KConstants};
pub use decay::{crossing_time, decay_sweep, run_decay_experiment, HomogeneousOde};
pub use eps_limit::{run_eps_limit, space_time_distance};
pub use holder::{holder_quotients, HolderQuotients};
pub use report::{ExperimentReport, Provenance, RunSummary, Verdict};
pub use smallness::run_smallness_time;

use crate::error::{Error, Result};
use crate::functionals::BoundReport;
use crate::grid::{DomainConstants, Grid};
use crate::odi::{fit_gn_constants, select_thresholds, ConstantChain, ThresholdSet};

/// Fitted constant chain and thresholds of one 3D grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedConstants {
    pub chain: ConstantChain,
    pub domain: DomainConstants,
    pub thresholds: ThresholdSet,
    /// Identifies the fit: grid, sample count and seed.
    pub fit_id: String,
}

impl FittedConstants {
    pub fn fit(grid: &Grid, mu: f64, samples: usize, seed: u64) -> Result<Self> {
        if grid.dim() != 3 {
            return Err(Error::InvalidArgument(format!(
                "constant fits need a 3D grid, got dim {}",
                grid.dim()
            )));
        }
        let (c1, c2) = fit_gn_constants(grid, samples, seed)?;
        let domain = DomainConstants::compute(grid, samples, seed)?;
        let c_omega = domain.c_omega.expect("3D grid has C_Omega");
        let chain = ConstantChain::assemble(c1, c2, mu)?;
        let thresholds = select_thresholds(chain.a, domain.c_p, c_omega, grid.volume(), mu)?;
        Ok(FittedConstants {
            chain,
            domain,
            thresholds,
            fit_id: format!("{}_n{samples}_seed{seed}", grid.id()),
        })
    }

    pub fn for_config(cfg: &RunConfig) -> Result<Self> {
        Self::fit(&cfg.grid()?, cfg.mu, cfg.fit_samples, cfg.seed)
    }
}

/// Copy the items of a bound report into verdicts under `criterion`.
/// Informational items always pass.
pub(crate) fn push_bound_items(rep: &mut ExperimentReport, criterion: &str, subject: &str, b: &BoundReport, prov: Provenance) {
    use crate::functionals::Status;
    for it in &b.items {
        rep.verdicts.push(Verdict::new(
            criterion,
            format!("{subject}:{}", it.name),
            it.observed,
            it.theoretical,
            it.tolerance,
            it.pass || it.status == Status::Informational,
            prov.clone(),
        ));
    }
}
