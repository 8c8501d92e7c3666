use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance accepted on `g[i][j] + g[j][i]` when loading a matrix file.
pub const LOAD_SKEW_TOLERANCE: f64 = 1e-12;

/// Skew-symmetric matrix of centered duel gaps.
///
/// Entry `(i, j)` is `P(i beats j) - 1/2`. Arms are 0-based.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixFile", into = "MatrixFile")]
pub struct GapMatrix {
    k: usize,
    gaps: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixFile {
    k: usize,
    gaps: Vec<Vec<f64>>,
}

impl TryFrom<MatrixFile> for GapMatrix {
    type Error = Error;

    fn try_from(file: MatrixFile) -> Result<Self> {
        if file.gaps.len() != file.k {
            return Err(Error::MalformedMatrix(format!(
                "declared k = {} but {} rows present",
                file.k,
                file.gaps.len()
            )));
        }
        let raw = GapMatrix::from_rows(file.gaps)?;
        raw.antisymmetrized(LOAD_SKEW_TOLERANCE)
    }
}

impl From<GapMatrix> for MatrixFile {
    fn from(m: GapMatrix) -> Self {
        MatrixFile {
            k: m.k,
            gaps: m.rows(),
        }
    }
}

impl GapMatrix {
    /// Builds a matrix from rows, checking only shape and finiteness.
    ///
    /// Structural properties (skew-symmetry, range, Condorcet winner) are
    /// reported by [`validate`](Self::validate) rather than enforced here.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.len();
        if k < 2 {
            return Err(Error::MalformedMatrix(format!(
                "need at least 2 arms, got {k}"
            )));
        }
        let mut gaps = Vec::with_capacity(k * k);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != k {
                return Err(Error::MalformedMatrix(format!(
                    "row {i} has {} entries, expected {k}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::MalformedMatrix(format!(
                    "row {i} has non-finite entry {v}"
                )));
            }
            gaps.extend(row);
        }
        Ok(Self { k, gaps })
    }

    /// Builds a `k × k` matrix from its strict upper triangle, mirroring every
    /// entry so that skew-symmetry holds bit-exactly.
    pub fn from_upper(k: usize, mut upper: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        if k < 2 {
            return Err(Error::MalformedMatrix(format!(
                "need at least 2 arms, got {k}"
            )));
        }
        let mut gaps = vec![0.0; k * k];
        for i in 0..k {
            for j in i + 1..k {
                let v = upper(i, j);
                gaps[i * k + j] = v;
                gaps[j * k + i] = -v;
            }
        }
        Ok(Self { k, gaps })
    }

    pub(crate) fn from_flat_unchecked(k: usize, gaps: Vec<f64>) -> Self {
        debug_assert_eq!(gaps.len(), k * k);
        Self { k, gaps }
    }

    /// Replaces the matrix by `(G - Gᵀ) / 2` after checking that `G` is
    /// skew-symmetric within `tol` and that every entry lies in `[-1/2, 1/2]`.
    pub fn antisymmetrized(&self, tol: f64) -> Result<Self> {
        let k = self.k;
        let mut gaps = vec![0.0; k * k];
        for i in 0..k {
            if self.get(i, i).abs() > tol {
                return Err(Error::MalformedMatrix(format!(
                    "diagonal entry ({i}, {i}) = {} is not zero",
                    self.get(i, i)
                )));
            }
            for j in 0..k {
                if i == j {
                    continue;
                }
                let (a, b) = (self.get(i, j), self.get(j, i));
                if (a + b).abs() > tol {
                    return Err(Error::MalformedMatrix(format!(
                        "entries ({i}, {j}) = {a} and ({j}, {i}) = {b} are not skew-symmetric"
                    )));
                }
                gaps[i * k + j] = (a - b) / 2.0;
            }
        }
        let out = Self { k, gaps };
        if !out.validate().in_range {
            return Err(Error::MalformedMatrix("entries outside [-1/2, 1/2]".into()));
        }
        Ok(out)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.gaps[i * self.k + j]
    }

    /// Probability that `i` wins a duel against `j`.
    #[inline]
    pub fn win_probability(&self, i: usize, j: usize) -> f64 {
        0.5 + self.get(i, j)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.gaps[i * self.k..(i + 1) * self.k]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.gaps.chunks(self.k).map(<[f64]>::to_vec).collect()
    }

    pub(crate) fn as_flat(&self) -> &[f64] {
        &self.gaps
    }

    /// Off-diagonal entries of row `i`, as `(column, gap)` pairs.
    pub fn off_diagonal(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.row(i)
            .iter()
            .copied()
            .enumerate()
            .filter(move |&(j, _)| j != i)
    }

    pub fn validate(&self) -> ValidationReport {
        let k = self.k;
        let mut skew_symmetric = true;
        let mut in_range = true;
        for i in 0..k {
            for j in 0..k {
                let v = self.get(i, j);
                if v.abs() > 0.5 {
                    in_range = false;
                }
                if v != -self.get(j, i) {
                    skew_symmetric = false;
                }
            }
        }
        let strict: Vec<usize> = (0..k)
            .filter(|&i| self.off_diagonal(i).all(|(_, v)| v > 0.0))
            .collect();
        let weak_cws: Vec<usize> = (0..k)
            .filter(|&i| self.off_diagonal(i).all(|(_, v)| v >= 0.0))
            .collect();
        let cw_unique = strict.len() == 1;
        ValidationReport {
            skew_symmetric,
            in_range,
            cw: if cw_unique { Some(strict[0]) } else { None },
            cw_unique,
            weak_cws,
        }
    }

    /// The strict Condorcet winner, if the matrix is well formed and has one.
    pub fn condorcet_winner(&self) -> Option<usize> {
        let report = self.validate();
        if report.skew_symmetric && report.in_range {
            report.cw
        } else {
            None
        }
    }

    pub(crate) fn require_cw(&self) -> Result<usize> {
        self.condorcet_winner().ok_or(Error::NoCondorcetWinner)
    }

    pub(crate) fn require_valid(&self) -> Result<()> {
        let report = self.validate();
        if !report.skew_symmetric {
            return Err(Error::MalformedMatrix("not skew-symmetric".into()));
        }
        if !report.in_range {
            return Err(Error::MalformedMatrix("entries outside [-1/2, 1/2]".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()? + "\n").map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })
    }
}

impl fmt::Debug for GapMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GapMatrix")
            .field("k", &self.k)
            .field("gaps", &self.rows())
            .finish()
    }
}

/// Structural summary of a gap matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub skew_symmetric: bool,
    pub in_range: bool,
    /// The unique arm whose off-diagonal row is strictly positive.
    pub cw: Option<usize>,
    pub cw_unique: bool,
    /// Arms whose off-diagonal row is nonnegative.
    pub weak_cws: Vec<usize>,
}
