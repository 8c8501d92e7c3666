use rand::Rng;
use serde::Serialize;

use super::ArmSampler;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantileEstimate {
    pub value: f64,
    /// Level picked by the stability rule; `None` on the uniform-allocation path.
    pub level_selected: Option<u32>,
    /// Levels that actually sampled arms.
    pub levels_run: usize,
    pub budget_spent: u64,
}

struct Level {
    level: u32,
    eps: f64,
    low: f64,
    mid: f64,
    high: f64,
}

/// Returns a value between the `d`-th and `u`-th smallest arm means (1-based
/// ranks), adaptively in the accuracy, using at most `budget` draws.
///
/// Small budgets (and `d == u`) spread the budget uniformly and average the
/// empirical means ranked `d..=u`. Larger budgets run a multi-level scheme:
/// level `l` samples a multiset of arms with replacement, estimates each to
/// accuracy `eps_l`, and records three empirical order statistics bracketing
/// the target ranks; the returned level is the coarsest whose middle
/// statistic lies inside every finer level's widened bracket.
pub fn range_quantile<S, R>(
    sampler: &mut S,
    d: usize,
    u: usize,
    budget: u64,
    rng: &mut R,
) -> Result<QuantileEstimate>
where
    S: ArmSampler + ?Sized,
    R: Rng + ?Sized,
{
    let n = sampler.n_arms();
    if d < 1 || d > u || u > n {
        return Err(invalid(format!(
            "quantile ranks ({d}, {u}) invalid for {n} arms"
        )));
    }
    if budget < 1 {
        return Err(invalid("range_quantile needs a positive budget"));
    }
    if u == d {
        return Ok(uniform_allocation(sampler, d, u, budget, rng));
    }
    let spread = (u - d) as f64;
    let nf = n as f64;
    let small = 128.0 * nf / spread;
    let t = budget as f64;
    if t <= small * small.log2() {
        return Ok(uniform_allocation(sampler, d, u, budget, rng));
    }

    let log2_t = t.log2();
    let top = (t / log2_t).log2().floor() as i64;
    let bottom = (16.0 * nf / spread).log2().ceil() as i64;
    let lg = (16.0 * nf / spread).ln();

    let mut levels: Vec<Level> = Vec::new();
    let mut spent = 0u64;
    for level in bottom..top {
        let eps = 2.0 * 2f64.powf(-((top - level) as f64) / 2.0);
        let size = (eps * eps * t / (lg * log2_t)).floor() as usize;
        let pulls = (lg / (2.0 * eps * eps)).ceil() as u64;
        // skip empty levels, and never exceed the budget
        if size == 0 || spent + size as u64 * pulls > budget {
            continue;
        }
        let mut sample: Vec<(f64, usize)> = (0..size)
            .map(|_| {
                let arm = rng.gen_range(0..n);
                (sampler.mean_of(arm, pulls, rng), arm)
            })
            .collect();
        spent += size as u64 * pulls;
        sample.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let at = |num: usize, den: usize| {
            let rank = (num * size).div_ceil(den).clamp(1, size);
            sample[rank - 1].0
        };
        levels.push(Level {
            level: level as u32,
            eps,
            low: at(3 * d + u, 4 * n),
            mid: at(d + u, 2 * n),
            high: at(d + 3 * u, 4 * n),
        });
    }
    if levels.is_empty() {
        let mut est = uniform_allocation(sampler, d, u, budget, rng);
        est.budget_spent += spent;
        return Ok(est);
    }

    let chosen = (0..levels.len())
        .find(|&a| {
            let mid = levels[a].mid;
            levels[a..]
                .iter()
                .all(|b| mid >= b.low - 2.0 * b.eps && mid <= b.high + 2.0 * b.eps)
        })
        .expect("the finest level always brackets its own middle statistic");
    debug_assert!(spent <= budget);
    Ok(QuantileEstimate {
        value: levels[chosen].mid,
        level_selected: Some(levels[chosen].level),
        levels_run: levels.len(),
        budget_spent: spent,
    })
}

/// Spread the budget evenly (remainder to the lowest indices) and average
/// the empirical means ranked `d..=u` among the sampled arms.
fn uniform_allocation<S, R>(
    sampler: &mut S,
    d: usize,
    u: usize,
    budget: u64,
    rng: &mut R,
) -> QuantileEstimate
where
    S: ArmSampler + ?Sized,
    R: Rng + ?Sized,
{
    let n = sampler.n_arms() as u64;
    let (base, rem) = (budget / n, budget % n);
    let mut means: Vec<(f64, usize)> = (0..n)
        .filter_map(|a| {
            let pulls = base + u64::from(a < rem);
            (pulls > 0).then(|| (sampler.mean_of(a as usize, pulls, rng), a as usize))
        })
        .collect();
    means.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let m = means.len();
    let (lo, hi) = (d.min(m), u.min(m));
    let value = means[lo - 1..hi].iter().map(|p| p.0).sum::<f64>() / (hi - lo + 1) as f64;
    QuantileEstimate {
        value,
        level_selected: None,
        levels_run: 0,
        budget_spent: budget,
    }
}

/// [`range_quantile`] at ranks `(ceil(n/8), ceil(n/4))`.
pub fn range_quantile_18<S, R>(
    sampler: &mut S,
    budget: u64,
    rng: &mut R,
) -> Result<QuantileEstimate>
where
    S: ArmSampler + ?Sized,
    R: Rng + ?Sized,
{
    let (d, u) = eighth_quarter_ranks(sampler.n_arms());
    range_quantile(sampler, d, u, budget, rng)
}

pub fn eighth_quarter_ranks(n: usize) -> (usize, usize) {
    (n.div_ceil(8), n.div_ceil(4))
}
