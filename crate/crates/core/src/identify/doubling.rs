use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    fb_cwi, log_8_7, test_cw_with_horizon, FbConfig, IdentificationResult, DEFAULT_C_STOP,
};
use crate::env::DuelOracle;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FcConfig {
    pub delta: f64,
    pub c_stop: f64,
    /// Sign-test cap of each stage as a fraction of the stage budget.
    pub testcw_fraction: f64,
    pub max_stages: usize,
}

impl FcConfig {
    pub fn new(delta: f64) -> Self {
        Self {
            delta,
            c_stop: DEFAULT_C_STOP,
            testcw_fraction: 0.5,
            max_stages: 40,
        }
    }
}

/// One doubling stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageRecord {
    pub t_budget: u64,
    pub recommended: usize,
    pub phi1: bool,
    pub phi2: bool,
    pub budget: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifiedOutcome {
    /// Result of the last stage, with `budget_used` summed over all stages.
    pub result: IdentificationResult,
    pub stages: Vec<StageRecord>,
}

/// First stage budget: `max(ceil(8 K ln K), ceil(8 K log_{8/7} K), 16)`, so
/// that the first stage is always runnable.
pub fn initial_budget(k: usize) -> u64 {
    let kf = k as f64;
    let natural = (8.0 * kf * kf.ln()).ceil() as u64;
    let elimination = (8.0 * kf * log_8_7(k)).ceil() as u64;
    natural.max(elimination).max(16)
}

fn nontermination(stages: Vec<StageRecord>) -> Error {
    let budget_used = stages.iter().map(|s| s.budget).sum();
    Error::Nontermination {
        stages,
        budget_used,
    }
}

/// Fixed-confidence identification: runs [`fb_cwi`] on a doubling budget
/// schedule until one of its certificates holds.
pub fn fc_cwi<R: Rng + ?Sized>(
    oracle: &mut DuelOracle<'_>,
    cfg: &FcConfig,
    rng: &mut R,
) -> Result<CertifiedOutcome> {
    if !(cfg.delta > 0.0 && cfg.delta < 1.0 / 6.0) {
        return Err(invalid(format!("delta = {} outside (0, 1/6)", cfg.delta)));
    }
    if cfg.testcw_fraction.is_nan() || cfg.testcw_fraction <= 0.0 {
        return Err(invalid("testcw_fraction must be positive"));
    }
    let k = oracle.k();
    let start = oracle.total();
    let mut t = initial_budget(k);
    let mut stages = Vec::new();
    for _ in 0..cfg.max_stages {
        let fb = FbConfig {
            t_budget: t,
            delta: cfg.delta,
            c_stop: cfg.c_stop,
            testcw_cap: ((t as f64 * cfg.testcw_fraction).ceil() as u64).max(1),
        };
        let mut result = fb_cwi(oracle, &fb, rng)?;
        stages.push(StageRecord {
            t_budget: t,
            recommended: result.recommended,
            phi1: result.phi1,
            phi2: result.phi2,
            budget: result.budget_used,
        });
        if result.certified {
            result.budget_used = oracle.total() - start;
            return Ok(CertifiedOutcome { result, stages });
        }
        t = t
            .checked_mul(2)
            .ok_or_else(|| invalid("stage budget overflow"))?;
    }
    Err(nontermination(stages))
}

/// Baseline that ignores the elimination structure: each stage runs the sign
/// test on every arm in turn (at level `delta / K`, cap `ceil(T/2)`) and
/// returns the first arm it certifies; `T` doubles between stages.
pub fn baseline_row_certify<R: Rng + ?Sized>(
    oracle: &mut DuelOracle<'_>,
    delta: f64,
    max_stages: usize,
    rng: &mut R,
) -> Result<CertifiedOutcome> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("delta = {delta} outside (0, 1)")));
    }
    let k = oracle.k();
    let start = oracle.total();
    let per_arm_delta = delta / k as f64;
    let mut t = initial_budget(k);
    let mut stages = Vec::new();
    for _ in 0..max_stages {
        let stage_start = oracle.total();
        let cap = t.div_ceil(2);
        let mut winner = None;
        for arm in 0..k {
            if test_cw_with_horizon(oracle, arm, per_arm_delta, cap, t, rng)?.certified {
                winner = Some(arm);
                break;
            }
        }
        stages.push(StageRecord {
            t_budget: t,
            recommended: winner.unwrap_or(0),
            phi1: false,
            phi2: winner.is_some(),
            budget: oracle.total() - stage_start,
        });
        if let Some(arm) = winner {
            return Ok(CertifiedOutcome {
                result: IdentificationResult {
                    recommended: arm,
                    certified: true,
                    phi1: false,
                    phi2: true,
                    budget_used: oracle.total() - start,
                    rounds: Vec::new(),
                },
                stages,
            });
        }
        t = t
            .checked_mul(2)
            .ok_or_else(|| invalid("stage budget overflow"))?;
    }
    Err(nontermination(stages))
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::env::{gen_total_order, GapMatrix};

    fn sure(k: usize) -> GapMatrix {
        GapMatrix::from_upper(k, |_, _| 0.5).unwrap()
    }

    #[test]
    fn initial_budgets() {
        assert_eq!(initial_budget(2), 84);
        assert!(initial_budget(8) >= (64.0 * log_8_7(8)) as u64);
    }

    #[test]
    fn two_arm_deterministic_fc() {
        let m = sure(2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // a full-budget sign test certifies in the first stage
        let mut o = DuelOracle::new(&m).unwrap();
        let cfg = FcConfig {
            testcw_fraction: 1.0,
            ..FcConfig::new(0.1)
        };
        let out = fc_cwi(&mut o, &cfg, &mut rng).unwrap();
        assert_eq!(out.result.recommended, 0);
        assert_eq!(out.stages.len(), 1);
        assert_eq!(out.result.budget_used, o.total());

        // the default half-budget cap needs one doubling
        let mut o = DuelOracle::new(&m).unwrap();
        let out = fc_cwi(&mut o, &FcConfig::new(0.1), &mut rng).unwrap();
        assert_eq!(out.result.recommended, 0);
        assert!(out.stages.len() <= 2);
        let total: u64 = out.stages.iter().map(|s| s.budget).sum();
        assert_eq!(total, out.result.budget_used);
        assert_eq!(total, o.total());
    }

    #[test]
    fn stage_budgets_double() {
        let m = gen_total_order(&[0.0, 0.1, 0.1, 0.1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut o = DuelOracle::new(&m).unwrap();
        let out = fc_cwi(&mut o, &FcConfig::new(0.1), &mut rng).unwrap();
        for w in out.stages.windows(2) {
            assert_eq!(w[1].t_budget, 2 * w[0].t_budget);
        }
        let last = out.stages.last().unwrap();
        assert!(out.result.budget_used >= last.budget);
        assert!(last.phi1 || last.phi2);
        assert!(out.stages[..out.stages.len() - 1]
            .iter()
            .all(|s| !s.phi1 && !s.phi2));
    }

    #[test]
    fn nontermination_reports_trace() {
        // a near tie cannot be certified in two stages
        let m = gen_total_order(&[0.0, 0.001, 0.001]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut o = DuelOracle::new(&m).unwrap();
        let cfg = FcConfig {
            max_stages: 2,
            ..FcConfig::new(0.1)
        };
        match fc_cwi(&mut o, &cfg, &mut rng) {
            Err(Error::Nontermination {
                stages,
                budget_used,
            }) => {
                assert_eq!(stages.len(), 2);
                assert_eq!(budget_used, o.total());
            }
            other => panic!("expected nontermination, got {other:?}"),
        }
    }

    #[test]
    fn fc_delta_range() {
        let m = sure(3);
        let mut o = DuelOracle::new(&m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!(fc_cwi(&mut o, &FcConfig::new(0.2), &mut rng).is_err());
        assert!(baseline_row_certify(&mut o, 1.0, 10, &mut rng).is_err());
    }

    #[test]
    fn baseline_certifies_deterministic_winner() {
        let m = GapMatrix::from_upper(4, |i, _| if i == 2 { -0.5 } else { 0.5 }).unwrap();
        let m = crate::env::lift_row(&m, 2, 0.5).unwrap();
        assert_eq!(m.condorcet_winner(), Some(2));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut o = DuelOracle::new(&m).unwrap();
        let out = baseline_row_certify(&mut o, 0.1, 40, &mut rng).unwrap();
        assert_eq!(out.result.recommended, 2);
        assert_eq!(out.result.budget_used, o.total());
    }
}
