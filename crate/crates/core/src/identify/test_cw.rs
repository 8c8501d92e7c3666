use rand::Rng;

use super::log_8_7;
use crate::env::DuelOracle;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TestCwOutcome {
    pub certified: bool,
    pub spent: u64,
    /// Stopped because some gap was found significantly negative.
    pub aborted: bool,
}

/// [`test_cw_with_horizon`] with the cap doubling as the horizon.
pub fn test_cw<R: Rng + ?Sized>(
    oracle: &mut DuelOracle<'_>,
    candidate: usize,
    delta: f64,
    t_cap: u64,
    rng: &mut R,
) -> Result<TestCwOutcome> {
    test_cw_with_horizon(oracle, candidate, delta, t_cap, t_cap, rng)
}

/// Sequential sign test that every gap of `candidate` is positive.
///
/// Always samples the least-sampled undecided opponent (lowest index on
/// ties). An opponent is cleared once the empirical gap reaches
/// `sqrt(log(K N^2 n(n+1) / delta) / N)` after `N` duels, where
/// `n = log2(horizon / (4 K log_{8/7} K))`; the test aborts as soon as some
/// empirical gap falls to minus that threshold. Certifies iff every opponent
/// is cleared within `t_cap` duels.
pub fn test_cw_with_horizon<R: Rng + ?Sized>(
    oracle: &mut DuelOracle<'_>,
    candidate: usize,
    delta: f64,
    t_cap: u64,
    horizon: u64,
    rng: &mut R,
) -> Result<TestCwOutcome> {
    let k = oracle.k();
    if candidate >= k {
        return Err(invalid(format!(
            "candidate {candidate} out of range for {k} arms"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("delta = {delta} outside (0, 1)")));
    }
    if t_cap < 1 {
        return Err(invalid("Test-CW needs t_cap >= 1"));
    }
    let n = (horizon as f64 / (4.0 * k as f64 * log_8_7(k))).log2();
    let mut out = TestCwOutcome {
        certified: false,
        spent: 0,
        aborted: false,
    };
    if n.is_nan() || n <= 0.0 {
        return Ok(out);
    }
    let log_const = (k as f64 * n * (n + 1.0) / delta).ln();

    // (opponent, duels, wins) for undecided opponents
    let mut open: Vec<(usize, u64, u64)> = (0..k)
        .filter(|&j| j != candidate)
        .map(|j| (j, 0, 0))
        .collect();
    while !open.is_empty() && out.spent < t_cap {
        let pos = open
            .iter()
            .enumerate()
            .min_by_key(|(_, p)| (p.1, p.0))
            .map(|(pos, _)| pos)
            .expect("open is nonempty");
        let entry = &mut open[pos];
        entry.1 += 1;
        entry.2 += u64::from(oracle.duel(candidate, entry.0, rng));
        out.spent += 1;

        let duels = entry.1 as f64;
        let gap = entry.2 as f64 / duels - 0.5;
        let radius = ((log_const + 2.0 * duels.ln()).max(0.0) / duels).sqrt();
        if gap >= radius {
            open.remove(pos);
        } else if gap <= -radius {
            out.aborted = true;
            return Ok(out);
        }
    }
    out.certified = open.is_empty();
    Ok(out)
}
