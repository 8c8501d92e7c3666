use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{log_8_7, test_cw_with_horizon, ArmScore, IdentificationResult, RoundTrace};
use crate::env::DuelOracle;
use crate::error::{invalid, Error, Result};
use crate::subroutines::{empirical_gap, range_quantile_18, sequential_halving_min, DuelArms};

pub const DEFAULT_C_STOP: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FbConfig {
    pub t_budget: u64,
    pub delta: f64,
    pub c_stop: f64,
    /// Maximum queries of the final sign test.
    pub testcw_cap: u64,
}

impl FbConfig {
    /// Default stopping constant and a sign-test cap of `ceil(T/2)`.
    pub fn new(t_budget: u64, delta: f64) -> Self {
        Self {
            t_budget,
            delta,
            c_stop: DEFAULT_C_STOP,
            testcw_cap: t_budget.div_ceil(2),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_budget < 1 {
            return Err(invalid("t_budget must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid(format!("delta = {} outside (0, 1)", self.delta)));
        }
        if self.c_stop.is_nan() || self.c_stop <= 0.0 {
            return Err(invalid(format!(
                "c_stop = {} must be positive",
                self.c_stop
            )));
        }
        Ok(())
    }
}

/// Smallest budget accepted by [`fb_cwi`] on `k` arms: `ceil(8 K log_{8/7} K)`.
pub fn min_budget(k: usize) -> u64 {
    (8.0 * k as f64 * log_8_7(k)).ceil() as u64
}

/// Fixed-budget elimination with certification.
///
/// Each round gives every active arm `B = floor(T / (|A| log_{8/7} K))`:
/// a quarter to find its strongest opponent among all arms by sequential
/// halving, a quarter to re-estimate that gap, and half to estimate a
/// lower-tail quantile of its gaps against the other active arms. Arms are
/// ranked by `min(z_strong, 0) + z_weak` and the bottom `ceil(|A|/8)` are
/// dropped. `phi1` holds if every round's best eliminated score is below the
/// negativity threshold; `phi2` runs the sign test on the survivor.
pub fn fb_cwi<R: Rng + ?Sized>(
    oracle: &mut DuelOracle<'_>,
    cfg: &FbConfig,
    rng: &mut R,
) -> Result<IdentificationResult> {
    cfg.validate()?;
    let k = oracle.k();
    let lk = log_8_7(k);
    let t = cfg.t_budget;
    let tf = t as f64;
    if tf < 8.0 * k as f64 * lk {
        return Err(Error::Underbudget {
            budget: t,
            minimum: min_budget(k),
            k,
        });
    }
    let start = oracle.total();
    let n = (tf / (2.0 * k as f64 * lk)).log2();
    // the union-bound term log(n(n+1)) is only meaningful for n > 1
    let mut phi1 = n > 1.0;
    let confidence_log = (8.0 * (k * k) as f64 * lk * tf.ln() * n * (n + 1.0) / cfg.delta).ln();

    let mut active: Vec<usize> = (0..k).collect();
    let mut rounds = Vec::new();
    while active.len() > 1 {
        let round_start = oracle.total();
        let size = active.len();
        let per_arm = (tf / (size as f64 * lk)).floor() as u64;
        let quarter = per_arm.div_ceil(4);
        let half = per_arm.div_ceil(2);

        let mut scores = Vec::with_capacity(size);
        for &alpha in &active {
            let everyone: Vec<usize> = (0..k).filter(|&b| b != alpha).collect();
            let mut arms = DuelArms::new(oracle, alpha, everyone);
            let found = sequential_halving_min(&mut arms, quarter, rng)?;
            let strong_opponent = arms.opponent(found.arm);
            let z_strong = empirical_gap(oracle, alpha, strong_opponent, quarter, rng)?;

            let rivals: Vec<usize> = active.iter().copied().filter(|&b| b != alpha).collect();
            let mut arms = DuelArms::new(oracle, alpha, rivals);
            let z_weak = range_quantile_18(&mut arms, half, rng)?.value;

            scores.push(ArmScore {
                arm: alpha,
                strong_opponent,
                z_strong,
                z_weak,
                score: z_strong.min(0.0) + z_weak,
            });
        }

        // best first; lower index wins ties
        let mut ranked: Vec<&ArmScore> = scores.iter().collect();
        ranked.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.arm.cmp(&b.arm)));
        let keep = size - size.div_ceil(8);
        let frontier = ranked[keep].score;
        let threshold = -(2.0 * cfg.c_stop * tf.ln() / quarter as f64 * confidence_log).sqrt();
        let phi1_term = frontier < threshold;
        phi1 = phi1 && phi1_term;

        let mut survivors: Vec<usize> = ranked[..keep].iter().map(|s| s.arm).collect();
        let mut eliminated: Vec<usize> = ranked[keep..].iter().map(|s| s.arm).collect();
        survivors.sort_unstable();
        eliminated.sort_unstable();

        rounds.push(RoundTrace {
            round: rounds.len() + 1,
            active: std::mem::replace(&mut active, survivors),
            per_arm_budget: per_arm,
            scores,
            eliminated,
            phi1_term,
            threshold,
            spent: oracle.total() - round_start,
        });
    }

    let recommended = active[0];
    let test = test_cw_with_horizon(oracle, recommended, cfg.delta, cfg.testcw_cap, t, rng)?;
    Ok(IdentificationResult {
        recommended,
        certified: phi1 || test.certified,
        phi1,
        phi2: test.certified,
        budget_used: oracle.total() - start,
        rounds,
    })
}
