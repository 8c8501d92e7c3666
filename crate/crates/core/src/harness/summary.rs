use std::fs;
use std::path::Path;

use serde::Serialize;
use statrs::distribution::{Beta, ContinuousCDF};

use super::config::{Algorithm, ExperimentConfig};
use super::run::RunTable;
use crate::complexity::{profile, DEFAULT_CAP_FRACTION};
use crate::env::GapMatrix;
use crate::error::{invalid, Error, Result};

/// Aggregates of one `(instance, algorithm, param)` group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub instance_id: String,
    pub algorithm: Algorithm,
    pub param: f64,
    pub replicates: usize,
    pub errors: usize,
    pub uncertified: usize,
    pub error_rate: f64,
    pub clopper_pearson_95_upper: f64,
    pub budget_median: u64,
    pub budget_q90: u64,
    /// `None` when no confidence level applies to the group.
    pub budget_quantile_1_minus_delta: Option<u64>,
    pub delta: Option<f64>,
    pub h_cw: Option<f64>,
    pub rhs_min: Option<f64>,
    pub lb_certify: Option<f64>,
    pub lb_explore: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
}

/// One-sided 95% Clopper–Pearson upper bound for `failures` out of `n`.
pub fn clopper_pearson_upper(failures: usize, n: usize) -> f64 {
    assert!(n > 0 && failures <= n, "need 0 <= failures <= n, n > 0");
    if failures == n {
        return 1.0;
    }
    Beta::new((failures + 1) as f64, (n - failures) as f64)
        .expect("positive shape parameters")
        .inverse_cdf(0.95)
}

/// Nearest-rank `q`-quantile of sorted values: the element of rank
/// `ceil(q n)`, clamped to `[1, n]`.
pub fn nearest_rank(sorted: &[u64], q: f64) -> u64 {
    assert!(!sorted.is_empty());
    let n = sorted.len();
    // the slack absorbs products such as 0.9 * 10 = 9.000000000000002
    let rank = (q * n as f64 - 1e-9).ceil().clamp(1.0, n as f64) as usize;
    sorted[rank - 1]
}

/// Groups the table by `(instance, algorithm, param)` in order of first
/// appearance. Hardness values need `matrix`; the confidence level of a group
/// is `delta` if given, else the swept value for fixed-confidence algorithms.
pub fn summarize(
    table: &RunTable,
    matrix: Option<&GapMatrix>,
    delta: Option<f64>,
) -> Result<Summary> {
    if table.records.is_empty() {
        return Err(invalid("cannot summarize an empty run table"));
    }
    let mut groups: Vec<(&str, Algorithm, f64, Vec<usize>)> = Vec::new();
    for (idx, r) in table.records.iter().enumerate() {
        let key = (r.instance_id.as_str(), r.algorithm, r.param.to_bits());
        match groups.iter_mut().find(|g| (g.0, g.1, g.2.to_bits()) == key) {
            Some(g) => g.3.push(idx),
            None => groups.push((key.0, key.1, r.param, vec![idx])),
        }
    }
    let rows = groups
        .into_iter()
        .map(|(instance_id, algorithm, param, idx)| {
            let recs: Vec<_> = idx.iter().map(|&i| &table.records[i]).collect();
            let n = recs.len();
            let errors = recs.iter().filter(|r| !r.correct).count();
            let mut budgets: Vec<u64> = recs.iter().map(|r| r.budget).collect();
            budgets.sort_unstable();
            let group_delta = delta.or(match algorithm {
                Algorithm::FbCwi => None,
                _ => Some(param),
            });
            let hard = match (matrix, group_delta) {
                (Some(m), Some(d)) => profile(m, d, DEFAULT_CAP_FRACTION).ok(),
                _ => None,
            };
            SummaryRow {
                instance_id: instance_id.to_owned(),
                algorithm,
                param,
                replicates: n,
                errors,
                uncertified: recs.iter().filter(|r| !r.certified).count(),
                error_rate: errors as f64 / n as f64,
                clopper_pearson_95_upper: clopper_pearson_upper(errors, n),
                budget_median: nearest_rank(&budgets, 0.5),
                budget_q90: nearest_rank(&budgets, 0.9),
                budget_quantile_1_minus_delta: group_delta
                    .filter(|d| *d > 0.0 && *d < 1.0)
                    .map(|d| nearest_rank(&budgets, 1.0 - d)),
                delta: group_delta,
                h_cw: hard.as_ref().map(|h| h.h_cw),
                rhs_min: hard.as_ref().and_then(|h| h.rhs_min),
                lb_certify: hard.as_ref().and_then(|h| h.lb_certify),
                lb_explore: hard.as_ref().and_then(|h| h.lb_explore),
            }
        })
        .collect();
    Ok(Summary { rows })
}

/// JSON report: summary, echoed config and toolkit version.
#[derive(Debug, Clone, Serialize)]
pub struct Report<'a> {
    pub version: &'static str,
    pub config: Option<&'a ExperimentConfig>,
    pub summary: &'a Summary,
}

impl<'a> Report<'a> {
    pub fn new(summary: &'a Summary, config: Option<&'a ExperimentConfig>) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION"),
            config,
            summary,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_owned(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(path, bytes).map_err(io)
}

/// Writes the run table as CSV and the report as JSON. Either path may be
/// omitted.
pub fn emit(
    table: &RunTable,
    summary: &Summary,
    config: Option<&ExperimentConfig>,
    csv_path: Option<&Path>,
    json_path: Option<&Path>,
) -> Result<()> {
    if let Some(p) = csv_path {
        write_file(p, table.to_csv_string()?.as_bytes())?;
    }
    if let Some(p) = json_path {
        write_file(p, Report::new(summary, config).to_json()?.as_bytes())?;
    }
    Ok(())
}
