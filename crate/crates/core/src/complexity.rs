//! Instance-hardness quantities computed from a gap matrix.
//!
//! All logarithms are natural. Sparsity vectors have one entry per arm; the
//! entry of the Condorcet winner is ignored (and reported as `0`).

use serde::Serialize;

use crate::env::GapMatrix;
use crate::error::{invalid, Error, Result};

/// Default cap on the per-row sparsity, as a fraction of `K`.
pub const DEFAULT_CAP_FRACTION: f64 = 1.0 / 8.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowStats {
    pub arm: usize,
    /// Off-diagonal gaps of the row, ascending; ties keep column order.
    pub ordered_gaps: Vec<f64>,
    /// Number of strictly negative gaps.
    pub k_neg: usize,
    /// Sum of squares of the strictly negative gaps.
    pub neg_norm_sq: f64,
}

impl RowStats {
    /// `s`-th smallest gap, 1-based.
    pub fn order_stat(&self, s: usize) -> f64 {
        self.ordered_gaps[s - 1]
    }
}

pub fn row_stats(matrix: &GapMatrix, i: usize) -> RowStats {
    let mut ordered_gaps: Vec<f64> = matrix.off_diagonal(i).map(|(_, v)| v).collect();
    ordered_gaps.sort_by(f64::total_cmp);
    let k_neg = ordered_gaps.iter().take_while(|&&v| v < 0.0).count();
    let neg_norm_sq = ordered_gaps[..k_neg].iter().map(|v| v * v).sum();
    RowStats {
        arm: i,
        ordered_gaps,
        k_neg,
        neg_norm_sq,
    }
}

fn log_inv(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(invalid(format!("delta = {delta} outside (0, 1]")));
    }
    Ok((1.0 / delta).ln())
}

fn suboptimal(matrix: &GapMatrix, cw: usize) -> impl Iterator<Item = usize> {
    (0..matrix.k()).filter(move |&i| i != cw)
}

/// `log(1/delta) * sum_i 1 / gap(cw, i)^2`.
pub fn h_cw(matrix: &GapMatrix, delta: f64) -> Result<f64> {
    let cw = matrix.require_cw()?;
    let l = log_inv(delta)?;
    let s: f64 = suboptimal(matrix, cw)
        .map(|i| 1.0 / matrix.get(cw, i).powi(2))
        .sum();
    Ok(l * s)
}

/// Certification and exploration costs at a fixed sparsity vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HardnessTerms {
    pub h_certify: f64,
    pub h_explore0: f64,
    pub h_explore1: f64,
    pub h_explore: f64,
}

impl HardnessTerms {
    pub fn total(&self) -> f64 {
        self.h_certify + self.h_explore
    }
}

pub fn hardness(matrix: &GapMatrix, s: &[usize], delta: f64) -> Result<HardnessTerms> {
    let cw = matrix.require_cw()?;
    let l = log_inv(delta)?;
    if s.len() != matrix.k() {
        return Err(invalid(format!(
            "{} sparsities for {} arms",
            s.len(),
            matrix.k()
        )));
    }
    let stats: Vec<RowStats> = (0..matrix.k()).map(|i| row_stats(matrix, i)).collect();
    for i in suboptimal(matrix, cw) {
        if s[i] < 1 || s[i] > stats[i].k_neg {
            return Err(Error::InvalidSparsity {
                arm: i,
                s: s[i],
                max: stats[i].k_neg,
            });
        }
    }
    Ok(evaluate(&stats, cw, s, l))
}

fn evaluate(stats: &[RowStats], cw: usize, s: &[usize], l: f64) -> HardnessTerms {
    let k = stats.len() as f64;
    let mut certify = 0.0;
    let mut explore0 = 0.0;
    let mut explore1 = 0.0_f64;
    for (i, row) in stats.iter().enumerate() {
        if i == cw {
            continue;
        }
        let g2 = row.order_stat(s[i]).powi(2);
        let e = k / (s[i] as f64 * g2);
        certify += l / g2;
        explore0 += e;
        explore1 = explore1.max(e);
    }
    HardnessTerms {
        h_certify: certify,
        h_explore0: explore0,
        h_explore1: explore1,
        h_explore: l * explore1 + explore0,
    }
}

/// Admissible upper limit on `s_i` for a row with `k_neg` negative entries.
pub fn sparsity_cap(k: usize, k_neg: usize, cap_fraction: f64) -> usize {
    let cap = ((cap_fraction * k as f64).floor() as usize).max(1);
    k_neg.min(cap)
}

/// Minimizer of `h_certify + h_explore` over the sparsity box.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparsityOptimum {
    pub s_star: Vec<usize>,
    pub rhs_min: f64,
    pub terms: HardnessTerms,
}

/// Exact minimization of `h_certify(s) + h_explore(s)` over
/// `1 <= s_i <= min(K_neg(i), max(floor(cap_fraction * K), 1))`.
///
/// The objective is separable except for the max term, so every candidate
/// value `t` of that max is tried: each row then independently minimizes its
/// own part among the choices whose max-term contribution is at most `t`.
/// Ties are broken towards the lexicographically smallest vector.
pub fn optimal_sparsity(
    matrix: &GapMatrix,
    delta: f64,
    cap_fraction: f64,
) -> Result<SparsityOptimum> {
    let cw = matrix.require_cw()?;
    let l = log_inv(delta)?;
    if cap_fraction.is_nan() || cap_fraction <= 0.0 {
        return Err(invalid(format!(
            "cap_fraction = {cap_fraction} must be positive"
        )));
    }
    let k = matrix.k();
    let kf = k as f64;
    let stats: Vec<RowStats> = (0..k).map(|i| row_stats(matrix, i)).collect();

    // per row: (s, separable part, max-term part)
    let mut choices: Vec<Vec<(usize, f64, f64)>> = vec![Vec::new(); k];
    for i in suboptimal(matrix, cw) {
        let max_s = sparsity_cap(k, stats[i].k_neg, cap_fraction);
        if max_s == 0 {
            return Err(Error::DegenerateInstance(i));
        }
        choices[i] = (1..=max_s)
            .map(|s| {
                let g2 = stats[i].order_stat(s).powi(2);
                let e = kf / (s as f64 * g2);
                (s, l / g2 + e, e)
            })
            .collect();
    }

    let mut thresholds: Vec<f64> = choices.iter().flatten().map(|c| c.2).collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();

    let mut best: Option<(f64, Vec<usize>, HardnessTerms)> = None;
    for &t in &thresholds {
        let mut s = vec![0usize; k];
        let feasible = suboptimal(matrix, cw).all(|i| {
            let pick = choices[i].iter().filter(|c| c.2 <= t).fold(
                None::<&(usize, f64, f64)>,
                |acc, c| match acc {
                    Some(a) if a.1 <= c.1 => Some(a),
                    _ => Some(c),
                },
            );
            match pick {
                Some(c) => {
                    s[i] = c.0;
                    true
                }
                None => false,
            }
        });
        if !feasible {
            continue;
        }
        let terms = evaluate(&stats, cw, &s, l);
        let value = terms.total();
        let better = match &best {
            None => true,
            Some((v, bs, _)) => value < *v || (value == *v && s < *bs),
        };
        if better {
            best = Some((value, s, terms));
        }
    }
    let (rhs_min, s_star, terms) = best.expect("the largest threshold is always feasible");
    Ok(SparsityOptimum {
        s_star,
        rhs_min,
        terms,
    })
}

fn check_delta_below(delta: f64, bound: f64, strict: bool) -> Result<()> {
    let ok = delta > 0.0
        && if strict {
            delta < bound
        } else {
            delta <= bound
        };
    if !ok {
        let rel = if strict { "<" } else { "<=" };
        return Err(invalid(format!(
            "delta = {delta} must satisfy 0 < delta {rel} {bound}"
        )));
    }
    Ok(())
}

/// Expected-budget lower bound: `(1/4) sum_i log(1/(4 delta)) / gap(i,(1))^2`.
pub fn lb_certify(matrix: &GapMatrix, delta: f64) -> Result<f64> {
    let cw = matrix.require_cw()?;
    check_delta_below(delta, 0.25, true)?;
    let l = (1.0 / (4.0 * delta)).ln();
    let sum: f64 = suboptimal(matrix, cw)
        .map(|i| l / row_stats(matrix, i).order_stat(1).powi(2))
        .sum();
    Ok(0.25 * sum)
}

/// Quantile form of [`lb_certify`]:
/// `(1/3) sum_i log(1/(6 delta)) / gap(i,(1))^2`, for `delta < 1/6`.
pub fn lb_certify_quantile(matrix: &GapMatrix, delta: f64) -> Result<f64> {
    let cw = matrix.require_cw()?;
    check_delta_below(delta, 1.0 / 6.0, true)?;
    let l = (1.0 / (6.0 * delta)).ln();
    let sum: f64 = suboptimal(matrix, cw)
        .map(|i| l / row_stats(matrix, i).order_stat(1).powi(2))
        .sum();
    Ok(sum / 3.0)
}

/// High-probability exploration lower bound, the larger of
/// `(1/3) max_i K_neg(i)/|gap_i^-|^2 log(1/(6 delta))` and
/// `sum_i K_neg(i)/|gap_i^-|^2 / (37 log(2K))`. Requires `delta <= 1/12`.
pub fn lb_explore(matrix: &GapMatrix, delta: f64) -> Result<f64> {
    let cw = matrix.require_cw()?;
    check_delta_below(delta, 1.0 / 12.0, false)?;
    let ratios: Vec<f64> = suboptimal(matrix, cw)
        .map(|i| {
            let r = row_stats(matrix, i);
            if r.k_neg == 0 {
                f64::INFINITY
            } else {
                r.k_neg as f64 / r.neg_norm_sq
            }
        })
        .collect();
    let max = ratios.iter().copied().fold(0.0, f64::max);
    let sum: f64 = ratios.iter().sum();
    let first = max * (1.0 / (6.0 * delta)).ln() / 3.0;
    let second = sum / (37.0 * (2.0 * matrix.k() as f64).ln());
    Ok(first.max(second))
}

/// Every hardness value for one instance and confidence level. Values whose
/// preconditions fail (delta outside a lower bound's range, a degenerate
/// row) are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardnessProfile {
    pub h_cw: f64,
    pub s_star: Option<Vec<usize>>,
    pub h_certify: Option<f64>,
    pub h_explore0: Option<f64>,
    pub h_explore1: Option<f64>,
    pub h_explore: Option<f64>,
    pub rhs_min: Option<f64>,
    pub lb_certify: Option<f64>,
    pub lb_certify_quantile: Option<f64>,
    pub lb_explore: Option<f64>,
    pub delta: f64,
    pub cap_fraction: f64,
}

pub fn profile(matrix: &GapMatrix, delta: f64, cap_fraction: f64) -> Result<HardnessProfile> {
    let h_cw = h_cw(matrix, delta)?;
    let opt = match optimal_sparsity(matrix, delta, cap_fraction) {
        Ok(o) => Some(o),
        Err(Error::DegenerateInstance(_)) => None,
        Err(e) => return Err(e),
    };
    let terms = opt.as_ref().map(|o| o.terms);
    Ok(HardnessProfile {
        h_cw,
        s_star: opt.as_ref().map(|o| o.s_star.clone()),
        h_certify: terms.map(|t| t.h_certify),
        h_explore0: terms.map(|t| t.h_explore0),
        h_explore1: terms.map(|t| t.h_explore1),
        h_explore: terms.map(|t| t.h_explore),
        rhs_min: opt.map(|o| o.rhs_min),
        lb_certify: lb_certify(matrix, delta).ok(),
        lb_certify_quantile: lb_certify_quantile(matrix, delta).ok(),
        lb_explore: lb_explore(matrix, delta).ok(),
        delta,
        cap_fraction,
    })
}
