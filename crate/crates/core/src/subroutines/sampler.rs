use rand::Rng;

use crate::env::DuelOracle;

/// A finite set of stochastic arms with rewards in `[-1/2, 1/2]`.
pub trait ArmSampler {
    fn n_arms(&self) -> usize;

    fn draw<R: Rng + ?Sized>(&mut self, arm: usize, rng: &mut R) -> f64;

    /// Empirical mean of `n` fresh draws of `arm`; `0` when `n == 0`.
    fn mean_of<R: Rng + ?Sized>(&mut self, arm: usize, n: u64, rng: &mut R) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let sum: f64 = (0..n).map(|_| self.draw(arm, rng)).sum();
        sum / n as f64
    }
}

/// Duels of one player against a list of opponents, seen from the player's
/// side: arm `a` returns `outcome - 1/2` for the duel `(player, opponents[a])`,
/// so its mean is the player's gap against that opponent.
#[derive(Debug)]
pub struct DuelArms<'o, 'm> {
    oracle: &'o mut DuelOracle<'m>,
    player: usize,
    opponents: Vec<usize>,
}

impl<'o, 'm> DuelArms<'o, 'm> {
    /// `opponents` must be distinct from `player` and in range; this is the
    /// caller's contract and is checked in debug builds.
    pub fn new(oracle: &'o mut DuelOracle<'m>, player: usize, opponents: Vec<usize>) -> Self {
        debug_assert!(player < oracle.k());
        debug_assert!(opponents.iter().all(|&j| j != player && j < oracle.k()));
        Self {
            oracle,
            player,
            opponents,
        }
    }

    pub fn opponent(&self, arm: usize) -> usize {
        self.opponents[arm]
    }
}

impl ArmSampler for DuelArms<'_, '_> {
    fn n_arms(&self) -> usize {
        self.opponents.len()
    }

    #[inline]
    fn draw<R: Rng + ?Sized>(&mut self, arm: usize, rng: &mut R) -> f64 {
        let won = self.oracle.duel(self.player, self.opponents[arm], rng);
        if won {
            0.5
        } else {
            -0.5
        }
    }

    fn mean_of<R: Rng + ?Sized>(&mut self, arm: usize, n: u64, rng: &mut R) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let j = self.opponents[arm];
        let wins = (0..n)
            .filter(|_| self.oracle.duel(self.player, j, rng))
            .count();
        wins as f64 / n as f64 - 0.5
    }
}

/// Standalone centered Bernoulli arms: arm `a` returns `+1/2` with
/// probability `1/2 + means[a]` and `-1/2` otherwise.
#[derive(Debug, Clone)]
pub struct BernoulliArms {
    means: Vec<f64>,
    draws: u64,
}

impl BernoulliArms {
    pub fn new(means: Vec<f64>) -> Self {
        assert!(
            means.iter().all(|m| (-0.5..=0.5).contains(m)),
            "means must lie in [-1/2, 1/2]"
        );
        Self { means, draws: 0 }
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// Draws taken so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }
}

impl ArmSampler for BernoulliArms {
    fn n_arms(&self) -> usize {
        self.means.len()
    }

    #[inline]
    fn draw<R: Rng + ?Sized>(&mut self, arm: usize, rng: &mut R) -> f64 {
        self.draws += 1;
        if rng.gen::<f64>() < 0.5 + self.means[arm] {
            0.5
        } else {
            -0.5
        }
    }
}
