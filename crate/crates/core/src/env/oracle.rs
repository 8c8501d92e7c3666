use rand::Rng;

use crate::env::GapMatrix;
use crate::error::{Error, Result};

/// Bernoulli duel sampler with per-pair query accounting.
#[derive(Debug, Clone)]
pub struct DuelOracle<'m> {
    matrix: &'m GapMatrix,
    counts: Vec<u64>,
    total: u64,
}

impl<'m> DuelOracle<'m> {
    /// Wraps a well-formed matrix. Malformed matrices are rejected.
    pub fn new(matrix: &'m GapMatrix) -> Result<Self> {
        matrix.require_valid()?;
        let k = matrix.k();
        Ok(Self {
            matrix,
            counts: vec![0; k * k],
            total: 0,
        })
    }

    pub fn matrix(&self) -> &'m GapMatrix {
        self.matrix
    }

    pub fn k(&self) -> usize {
        self.matrix.k()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Queries issued on the ordered pair `(i, j)`.
    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.k() + j]
    }

    /// Queries issued on the unordered pair `{i, j}`.
    pub fn pair_count(&self, i: usize, j: usize) -> u64 {
        self.count(i, j) + self.count(j, i)
    }

    fn check(&self, i: usize, j: usize) -> Result<()> {
        let k = self.k();
        if i == j || i >= k || j >= k {
            return Err(Error::InvalidQuery { i, j, k });
        }
        Ok(())
    }

    /// Duels `i` against `j`; `true` means `i` won.
    pub fn sample_duel<R: Rng + ?Sized>(
        &mut self,
        i: usize,
        j: usize,
        rng: &mut R,
    ) -> Result<bool> {
        self.check(i, j)?;
        Ok(self.duel(i, j, rng))
    }

    /// Number of wins of `i` over `n` independent duels against `j`.
    pub fn sample_wins<R: Rng + ?Sized>(
        &mut self,
        i: usize,
        j: usize,
        n: u64,
        rng: &mut R,
    ) -> Result<u64> {
        self.check(i, j)?;
        Ok((0..n).filter(|_| self.duel(i, j, rng)).count() as u64)
    }

    #[inline]
    pub(crate) fn duel<R: Rng + ?Sized>(&mut self, i: usize, j: usize, rng: &mut R) -> bool {
        let k = self.k();
        self.counts[i * k + j] += 1;
        self.total += 1;
        rng.gen::<f64>() < self.matrix.win_probability(i, j)
    }
}
