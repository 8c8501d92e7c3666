//! Search primitives used by the identification algorithms.

mod halving;
mod quantile;
mod sampler;

use rand::Rng;

pub use halving::{sequential_halving_min, HalvingOutcome};
pub use quantile::{eighth_quarter_ranks, range_quantile, range_quantile_18, QuantileEstimate};
pub use sampler::{ArmSampler, BernoulliArms, DuelArms};

use crate::env::DuelOracle;
use crate::error::{invalid, Result};

/// `wins(i over j) / n - 1/2` over `n` fresh duels.
pub fn empirical_gap<R: Rng + ?Sized>(
    oracle: &mut DuelOracle<'_>,
    i: usize,
    j: usize,
    n_samples: u64,
    rng: &mut R,
) -> Result<f64> {
    if n_samples == 0 {
        return Err(invalid("empirical_gap needs at least one sample"));
    }
    let wins = oracle.sample_wins(i, j, n_samples, rng)?;
    Ok(wins as f64 / n_samples as f64 - 0.5)
}
