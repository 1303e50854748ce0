//! Running many independent simulations at once.
//!
//! A single run is strictly sequential, but seeds, protocols and sweep
//! points are independent of each other. With the `parallel` feature (on by
//! default) they are spread over the rayon thread pool; without it they run
//! one after another. Output order always matches input order.

use super::{simulate, Metrics};
use crate::model::{ConfigError, ScenarioConfig};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Applies `f` to every item, in parallel when the feature is enabled.
pub fn map_runs<I, O, F>(items: &[I], f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

pub fn run_batch(configs: &[ScenarioConfig]) -> Vec<Result<Metrics, ConfigError>> {
    map_runs(configs, simulate)
}

pub fn run_batch_sequential(configs: &[ScenarioConfig]) -> Vec<Result<Metrics, ConfigError>> {
    configs.iter().map(simulate).collect()
}

#[cfg(feature = "parallel")]
pub fn run_batch_parallel(configs: &[ScenarioConfig]) -> Vec<Result<Metrics, ConfigError>> {
    configs.par_iter().map(simulate).collect()
}

/// `base` repeated over consecutive seeds starting at its own.
pub fn seed_range(base: &ScenarioConfig, count: u64) -> Vec<ScenarioConfig> {
    (0..count)
        .map(|i| ScenarioConfig { rng_seed: base.rng_seed.wrapping_add(i), ..base.clone() })
        .collect()
}
