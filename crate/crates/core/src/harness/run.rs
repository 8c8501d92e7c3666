use std::collections::HashSet;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Algorithm, ExperimentConfig, Sweep};
use crate::env::{DuelOracle, GapMatrix};
use crate::error::{Error, Result};
use crate::identify::{
    baseline_row_certify, fb_cwi, fc_cwi, min_budget, CertifiedOutcome, FbConfig, FcConfig,
};

/// Environment variable overriding the worker count.
pub const THREADS_ENV: &str = "CONDORCET_THREADS";

pub const CSV_HEADER: [&str; 10] = [
    "instance_id",
    "algorithm",
    "param",
    "replicate",
    "seed",
    "recommended",
    "correct",
    "certified",
    "budget",
    "wall_ms",
];

/// One replicate. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance_id: String,
    pub algorithm: Algorithm,
    pub param: f64,
    pub replicate: u32,
    pub seed: u64,
    pub recommended: usize,
    pub correct: bool,
    pub certified: bool,
    pub budget: u64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunTable {
    pub records: Vec<RunRecord>,
}

impl RunTable {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        if self.records.is_empty() {
            w.write_record(CSV_HEADER)?;
        }
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Parses a run table. The header must match [`CSV_HEADER`] exactly.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?;
        if header.iter().ne(CSV_HEADER) {
            return Err(Error::InvalidConfig(format!(
                "unexpected run table header: {}",
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let records = r.deserialize().collect::<std::result::Result<_, _>>()?;
        Ok(Self { records })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::read_csv(file)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one replicate, a hash of `(base_seed, param_idx, replicate)`.
pub fn derive_seed(base_seed: u64, param_idx: usize, replicate: u32) -> u64 {
    let h = splitmix64(base_seed);
    let h = splitmix64(h ^ param_idx as u64);
    splitmix64(h ^ u64::from(replicate))
}

/// All replicate seeds of a config in `(param, replicate)` order, checked to
/// be pairwise distinct.
pub fn replicate_seeds(cfg: &ExperimentConfig) -> Result<Vec<(usize, u32, u64)>> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(cfg.sweep.len() * cfg.replicates as usize);
    for p in 0..cfg.sweep.len() {
        for r in 0..cfg.replicates {
            let seed = derive_seed(cfg.base_seed, p, r);
            if !seen.insert(seed) {
                return Err(Error::InvalidConfig(format!(
                    "seed collision at param {p}, replicate {r}"
                )));
            }
            out.push((p, r, seed));
        }
    }
    Ok(out)
}

/// Worker count from [`THREADS_ENV`], if set.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::InvalidConfig(format!(
                "{THREADS_ENV}={v:?} is not a positive integer"
            ))),
        },
    }
}

/// Builds the instance and runs every `(param, replicate)` pair, using the
/// worker count from the environment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunTable> {
    let matrix = cfg.instance.build()?;
    run_on(cfg, &matrix, threads_from_env()?)
}

/// Runs `cfg` against an already built instance on `threads` workers
/// (`None` for the default pool size).
pub fn run_on(
    cfg: &ExperimentConfig,
    matrix: &GapMatrix,
    threads: Option<usize>,
) -> Result<RunTable> {
    cfg.validate()?;
    let cw = matrix.require_cw()?;
    if let Sweep::Budget(ts) = &cfg.sweep {
        let min = min_budget(matrix.k());
        if let Some(t) = ts.iter().find(|&&t| t < min) {
            return Err(Error::InvalidConfig(format!(
                "budget {t} below the minimum {min} for {} arms",
                matrix.k()
            )));
        }
    }
    let jobs = replicate_seeds(cfg)?;
    let run = || -> Result<Vec<RunRecord>> {
        jobs.par_iter()
            .map(|&(p, r, seed)| run_one(cfg, matrix, cw, p, r, seed))
            .collect()
    };
    let records = match threads {
        None => run()?,
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?
            .install(run)?,
    };
    Ok(RunTable { records })
}

fn run_one(
    cfg: &ExperimentConfig,
    matrix: &GapMatrix,
    cw: usize,
    p: usize,
    replicate: u32,
    seed: u64,
) -> Result<RunRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut oracle = DuelOracle::new(matrix)?;
    let start = Instant::now();
    let (recommended, certified, budget) =
        match (&cfg.algorithm, &cfg.sweep) {
            (Algorithm::FbCwi, Sweep::Budget(ts)) => {
                let t = ts[p];
                let fb = FbConfig {
                    t_budget: t,
                    delta: cfg.delta,
                    c_stop: cfg.c_stop,
                    testcw_cap: ((t as f64 * cfg.testcw_fraction).ceil() as u64).max(1),
                };
                let res = fb_cwi(&mut oracle, &fb, &mut rng)?;
                (res.recommended, res.certified, res.budget_used)
            }
            (Algorithm::FcCwi, Sweep::Delta(ds)) => {
                let fc = FcConfig {
                    delta: ds[p],
                    c_stop: cfg.c_stop,
                    testcw_fraction: cfg.testcw_fraction,
                    max_stages: cfg.max_stages,
                };
                certified_row(fc_cwi(&mut oracle, &fc, &mut rng))?
            }
            (Algorithm::BaselineRowCertify, Sweep::Delta(ds)) => certified_row(
                baseline_row_certify(&mut oracle, ds[p], cfg.max_stages, &mut rng),
            )?,
            _ => unreachable!("sweep kind checked by validate"),
        };
    let wall_ms = if cfg.record_wall_time {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    };
    Ok(RunRecord {
        instance_id: cfg.instance_id.clone(),
        algorithm: cfg.algorithm,
        param: cfg.sweep.value(p),
        replicate,
        seed,
        recommended,
        correct: recommended == cw,
        certified,
        budget,
        wall_ms,
    })
}

/// A run that hits the stage cap becomes an uncertified row carrying the last
/// stage's recommendation.
fn certified_row(out: Result<CertifiedOutcome>) -> Result<(usize, bool, u64)> {
    match out {
        Ok(o) => Ok((o.result.recommended, true, o.result.budget_used)),
        Err(Error::Nontermination {
            stages,
            budget_used,
        }) => {
            let last = stages.last().map_or(0, |s| s.recommended);
            Ok((last, false, budget_used))
        }
        Err(e) => Err(e),
    }
}
