//! Monte Carlo drivers for exact-recovery probability, noisy-measurement
//! error and the RegModCS weight sweep, plus synthetic sequence runs.
//!
//! Every trial draws from its own counter-keyed random stream, so reports
//! are identical whatever the thread count. Timing never enters a report.

mod config;
mod experiments;
mod report;
mod sequence;

pub use config::{round_half_up, ExperimentConfig, SignalPrior};
pub use experiments::{exact_recon_probability, noisy_nrmse, regmodcs_sweep};
pub use report::{CellResult, ExperimentReport, MethodStats};
pub use sequence::{run_dynamic, DynamicRun, DynamicRunConfig};

/// Maps `f` over `0..count`, in parallel when enabled; output order is the
/// index order either way.
pub(crate) fn map_indexed<T: Send, F: Fn(usize) -> T + Sync + Send>(count: usize, f: F) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}
