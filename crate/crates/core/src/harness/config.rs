use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{gen_block_minimax, gen_random_cw, gen_total_order, GapMatrix};
use crate::error::{Error, Result};
use crate::identify::DEFAULT_C_STOP;

/// How to build the instance of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSpec {
    TotalOrder {
        deltas: Vec<f64>,
    },
    BlockMinimax {
        deltas: Vec<f64>,
        sparsities: Vec<usize>,
        epsilon: f64,
    },
    RandomCw {
        k: usize,
        lo: f64,
        hi: f64,
        seed: u64,
    },
    File {
        path: PathBuf,
    },
}

impl InstanceSpec {
    pub fn build(&self) -> Result<GapMatrix> {
        match self {
            Self::TotalOrder { deltas } => gen_total_order(deltas),
            Self::BlockMinimax {
                deltas,
                sparsities,
                epsilon,
            } => gen_block_minimax(deltas, sparsities, *epsilon),
            Self::RandomCw { k, lo, hi, seed } => {
                gen_random_cw(*k, *lo, *hi, &mut ChaCha8Rng::seed_from_u64(*seed))
            }
            Self::File { path } => GapMatrix::load(path),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    FbCwi,
    FcCwi,
    BaselineRowCertify,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Self::FbCwi => "fb_cwi",
            Self::FcCwi => "fc_cwi",
            Self::BaselineRowCertify => "baseline_row_certify",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        [Self::FbCwi, Self::FcCwi, Self::BaselineRowCertify]
            .into_iter()
            .find(|a| a.name() == name)
    }
}

/// Swept parameter: budgets for the fixed-budget algorithm, confidence
/// levels for the fixed-confidence ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Sweep {
    Budget(Vec<u64>),
    Delta(Vec<f64>),
}

impl Sweep {
    pub fn len(&self) -> usize {
        match self {
            Self::Budget(v) => v.len(),
            Self::Delta(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn value(&self, idx: usize) -> f64 {
        match self {
            Self::Budget(v) => v[idx] as f64,
            Self::Delta(v) => v[idx],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

fn default_c_stop() -> f64 {
    DEFAULT_C_STOP
}

fn default_delta() -> f64 {
    0.1
}

fn default_testcw_fraction() -> f64 {
    0.5
}

fn default_max_stages() -> usize {
    40
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance_id: String,
    pub instance: InstanceSpec,
    pub algorithm: Algorithm,
    pub sweep: Sweep,
    pub replicates: u32,
    pub base_seed: u64,
    #[serde(default = "default_c_stop")]
    pub c_stop: f64,
    /// Confidence level of budget sweeps; ignored for confidence sweeps.
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_testcw_fraction")]
    pub testcw_fraction: f64,
    #[serde(default = "default_max_stages")]
    pub max_stages: usize,
    #[serde(default = "default_true")]
    pub record_wall_time: bool,
    #[serde(default)]
    pub output: OutputPaths,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config file. Relative paths inside it are
    /// resolved against the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut cfg = Self::from_json(&text)?;
        if let Some(dir) = path.parent() {
            cfg.rebase(dir);
        }
        Ok(cfg)
    }

    fn rebase(&mut self, dir: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        if let InstanceSpec::File { path } = &mut self.instance {
            fix(path);
        }
        self.output.csv.as_mut().map(fix);
        self.output.json.as_mut().map(fix);
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(bad("replicates must be at least 1"));
        }
        if self.sweep.is_empty() {
            return Err(bad("sweep must be nonempty"));
        }
        if !(self.c_stop > 0.0 && self.c_stop.is_finite()) {
            return Err(bad(format!("c_stop = {} must be positive", self.c_stop)));
        }
        if !(self.testcw_fraction > 0.0 && self.testcw_fraction.is_finite()) {
            return Err(bad("testcw_fraction must be positive"));
        }
        if self.max_stages == 0 {
            return Err(bad("max_stages must be at least 1"));
        }
        let delta_ok = |d: f64, hi: f64| d > 0.0 && d < hi;
        match (&self.algorithm, &self.sweep) {
            (Algorithm::FbCwi, Sweep::Budget(ts)) => {
                if ts.contains(&0) {
                    return Err(bad("budgets must be positive"));
                }
                if !delta_ok(self.delta, 1.0) {
                    return Err(bad(format!("delta = {} outside (0, 1)", self.delta)));
                }
            }
            (Algorithm::FcCwi, Sweep::Delta(ds)) => {
                if let Some(d) = ds.iter().find(|&&d| !delta_ok(d, 1.0 / 6.0)) {
                    return Err(bad(format!("delta = {d} outside (0, 1/6)")));
                }
            }
            (Algorithm::BaselineRowCertify, Sweep::Delta(ds)) => {
                if let Some(d) = ds.iter().find(|&&d| !delta_ok(d, 1.0)) {
                    return Err(bad(format!("delta = {d} outside (0, 1)")));
                }
            }
            (a, _) => {
                let want = if *a == Algorithm::FbCwi {
                    "budget"
                } else {
                    "delta"
                };
                return Err(bad(format!("{} needs a {want} sweep", a.name())));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
