//! Condorcet-winner identification: the fixed-budget elimination procedure
//! with its two certificates, the pairwise sign test, the doubling
//! fixed-confidence wrapper and a row-certification baseline.

mod doubling;
mod fixed_budget;
mod test_cw;

use serde::Serialize;

pub use doubling::{
    baseline_row_certify, fc_cwi, initial_budget, CertifiedOutcome, FcConfig, StageRecord,
};
pub use fixed_budget::{fb_cwi, min_budget, FbConfig, DEFAULT_C_STOP};
pub use test_cw::{test_cw, test_cw_with_horizon, TestCwOutcome};

/// `log_{8/7}(k)`.
pub fn log_8_7(k: usize) -> f64 {
    (k as f64).ln() / (8.0f64 / 7.0).ln()
}

/// Scores of one active arm in one elimination round.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmScore {
    pub arm: usize,
    /// Opponent returned by the strong-opponent search.
    pub strong_opponent: usize,
    pub z_strong: f64,
    pub z_weak: f64,
    /// `min(z_strong, 0) + z_weak`.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundTrace {
    pub round: usize,
    pub active: Vec<usize>,
    pub per_arm_budget: u64,
    pub scores: Vec<ArmScore>,
    pub eliminated: Vec<usize>,
    /// Whether this round's elimination frontier passed the negativity check.
    pub phi1_term: bool,
    pub threshold: f64,
    /// Queries issued during the round.
    pub spent: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentificationResult {
    pub recommended: usize,
    pub certified: bool,
    pub phi1: bool,
    pub phi2: bool,
    pub budget_used: u64,
    pub rounds: Vec<RoundTrace>,
}
