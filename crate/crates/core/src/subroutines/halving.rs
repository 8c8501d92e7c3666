use rand::Rng;

use super::ArmSampler;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HalvingOutcome {
    pub arm: usize,
    pub spent: u64,
    /// The budget was below the arm count and the arm was drawn at random.
    pub degenerate: bool,
}

pub(crate) fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

/// Sequential halving towards the arm with the smallest mean.
///
/// Runs `ceil(log2 n)` phases. Each phase spends `floor(budget / phases)`
/// fresh draws spread evenly over the survivors (remainders to the lowest
/// indices) and keeps the `ceil(|S|/2)` survivors with the smallest empirical
/// means, ties going to the lower index.
pub fn sequential_halving_min<S, R>(
    sampler: &mut S,
    budget: u64,
    rng: &mut R,
) -> Result<HalvingOutcome>
where
    S: ArmSampler + ?Sized,
    R: Rng + ?Sized,
{
    let n = sampler.n_arms();
    if n == 0 {
        return Err(invalid("sequential halving needs at least one arm"));
    }
    if n == 1 {
        return Ok(HalvingOutcome {
            arm: 0,
            spent: 0,
            degenerate: false,
        });
    }
    if budget < n as u64 {
        return Ok(HalvingOutcome {
            arm: rng.gen_range(0..n),
            spent: 0,
            degenerate: true,
        });
    }
    let phases = ceil_log2(n) as u64;
    let per_phase = budget / phases;
    let mut survivors: Vec<usize> = (0..n).collect();
    let mut spent = 0;
    while survivors.len() > 1 {
        let m = survivors.len() as u64;
        let (base, rem) = (per_phase / m, per_phase % m);
        let mut scored: Vec<(f64, usize)> = survivors
            .iter()
            .enumerate()
            .map(|(pos, &arm)| {
                let pulls = base + u64::from((pos as u64) < rem);
                spent += pulls;
                (sampler.mean_of(arm, pulls, rng), arm)
            })
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        scored.truncate(survivors.len().div_ceil(2));
        survivors = scored.into_iter().map(|(_, arm)| arm).collect();
        survivors.sort_unstable();
    }
    debug_assert!(spent <= budget);
    Ok(HalvingOutcome {
        arm: survivors[0],
        spent,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::subroutines::BernoulliArms;

    #[test]
    fn ceil_log2_values() {
        let v: Vec<u32> = [1, 2, 3, 4, 5, 8, 9, 16, 17]
            .iter()
            .map(|&n| ceil_log2(n))
            .collect();
        assert_eq!(v, vec![0, 1, 2, 2, 3, 3, 4, 4, 5]);
    }

    #[test]
    fn finds_deterministic_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in [2usize, 3, 7, 8, 13] {
            for target in [0, n / 2, n - 1] {
                let mut means = vec![0.5; n];
                means[target] = -0.5;
                let mut arms = BernoulliArms::new(means);
                let budget = 4 * n as u64 * ceil_log2(n) as u64;
                let out = sequential_halving_min(&mut arms, budget, &mut rng).unwrap();
                assert_eq!(out.arm, target);
                assert!(!out.degenerate);
                assert_eq!(out.spent, arms.draws());
                assert!(out.spent <= budget);
            }
        }
    }

    #[test]
    fn single_arm() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut arms = BernoulliArms::new(vec![0.1]);
        let out = sequential_halving_min(&mut arms, 10, &mut rng).unwrap();
        assert_eq!(out.arm, 0);
        assert!(out.spent <= 10);
    }

    #[test]
    fn degenerate_budget() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut arms = BernoulliArms::new(vec![0.0; 5]);
        let out = sequential_halving_min(&mut arms, 4, &mut rng).unwrap();
        assert!(out.degenerate);
        assert!(out.arm < 5);
        assert_eq!(arms.draws(), 0);
    }

    #[test]
    fn zero_arms_is_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut arms = BernoulliArms::new(vec![]);
        assert!(sequential_halving_min(&mut arms, 4, &mut rng).is_err());
    }

    #[test]
    fn success_improves_with_budget() {
        // two arms at -0.25 among six at +0.25; 1000 replicates per budget
        let means = [0.25, -0.25, 0.25, 0.25, 0.25, -0.25, 0.25, 0.25];
        let mut rates = Vec::new();
        for budget in [24u64, 96, 2000] {
            let mut rng = ChaCha8Rng::seed_from_u64(budget);
            let hits = (0..1000)
                .filter(|_| {
                    let mut arms = BernoulliArms::new(means.to_vec());
                    let out = sequential_halving_min(&mut arms, budget, &mut rng).unwrap();
                    means[out.arm] <= -0.25
                })
                .count();
            rates.push(hits as f64 / 1000.0);
        }
        assert!(rates[0] < rates[1] && rates[1] <= rates[2], "{rates:?}");
        assert!(rates[2] >= 0.9, "{rates:?}");
    }
}
