//! Instance generators: the total-order and block hard instances, the
//! row-lift and negative-permutation transforms, and random instances with a
//! planted Condorcet winner.

use rand::Rng;

use crate::env::GapMatrix;
use crate::error::{invalid, Error, Result};

/// Total-order instance: arm 0 wins every duel and is the strongest opponent
/// of every other arm.
///
/// `deltas[0]` must be `0` and `deltas[1..]` nondecreasing in `(0, 1/2]`.
/// Entry `(i, j)` is `deltas[j]` for `i < j`.
pub fn gen_total_order(deltas: &[f64]) -> Result<GapMatrix> {
    let k = deltas.len();
    if k < 2 {
        return Err(invalid(format!("need at least 2 arms, got {k}")));
    }
    check_opponent_gaps(deltas, |d| d > 0.0 && d <= 0.5, "(0, 1/2]")?;
    if deltas[1..].windows(2).any(|w| w[0] > w[1]) {
        return Err(invalid("deltas[1..] must be sorted nondecreasing"));
    }
    GapMatrix::from_upper(k, |_, j| deltas[j])
}

fn check_opponent_gaps(deltas: &[f64], ok: impl Fn(f64) -> bool, range: &str) -> Result<()> {
    if deltas[0] != 0.0 {
        return Err(invalid(format!("deltas[0] must be 0, got {}", deltas[0])));
    }
    if let Some((i, d)) = deltas.iter().enumerate().skip(1).find(|(_, &d)| !ok(d)) {
        return Err(invalid(format!("deltas[{i}] = {d} outside {range}")));
    }
    Ok(())
}

/// How [`gen_block_minimax`] places the planted strong opponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockLayout {
    /// Four-block tournament on the bottom half; needs `s_i <= K/8` for every
    /// bottom-half arm.
    Blocks,
    /// Circulant placement: arm `p` (among the `K-1` suboptimal arms) is
    /// beaten by `p+1, ..., p+s_p` (mod `K-1`). Used when some sparsity
    /// exceeds what the block layout can host.
    Circulant,
}

/// Layout [`gen_block_minimax`] will use for these sparsities.
pub fn block_layout(sparsities: &[usize]) -> BlockLayout {
    let k = sparsities.len();
    if sparsities[k / 2..].iter().all(|&s| s <= k / 8) {
        BlockLayout::Blocks
    } else {
        BlockLayout::Circulant
    }
}

/// Block instance in which row `i >= 1` holds exactly `sparsities[i]` entries
/// equal to `-deltas[i]` and every other negative entry equals `-epsilon`.
/// Arm 0 beats every arm by `epsilon`.
pub fn gen_block_minimax(deltas: &[f64], sparsities: &[usize], epsilon: f64) -> Result<GapMatrix> {
    let k = deltas.len();
    if k == 0 || !k.is_multiple_of(8) {
        return Err(invalid(format!(
            "arm count {k} is not a positive multiple of 8"
        )));
    }
    if sparsities.len() != k {
        return Err(invalid(format!(
            "{} sparsities for {k} arms",
            sparsities.len()
        )));
    }
    check_opponent_gaps(deltas, |d| d > 0.0 && d < 0.25, "(0, 1/4)")?;
    if sparsities[0] != 0 {
        return Err(invalid("sparsities[0] must be 0"));
    }
    if let Some((i, &s)) = sparsities
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, &s)| s < 1 || s > k / 4)
    {
        return Err(Error::InvalidSparsity {
            arm: i,
            s,
            max: k / 4,
        });
    }
    let min_gap = deltas[1..].iter().copied().fold(f64::INFINITY, f64::min);
    if !(epsilon > 0.0 && epsilon < min_gap) {
        return Err(invalid(format!(
            "epsilon = {epsilon} must lie in (0, {min_gap})"
        )));
    }

    let mut b = Builder::new(k);
    match block_layout(sparsities) {
        BlockLayout::Blocks => {
            let d = k / 2;
            let q = d / 4;
            // top-left: arm 0 beats everyone, lower index wins by epsilon
            for i in 0..d {
                for j in i + 1..d {
                    b.set(i, j, epsilon);
                }
            }
            // top-right: planted strong opponents of the top half
            for c in 0..d {
                b.set(0, d + c, epsilon);
            }
            for i in 1..d {
                for c in 0..d {
                    let v = if c < sparsities[i] {
                        -deltas[i]
                    } else {
                        -epsilon
                    };
                    b.set(i, d + c, v);
                }
            }
            // bottom-right: four blocks in a cyclic tournament
            let arm = |block: usize, a: usize| d + block * q + a;
            for blk in 0..4 {
                for a in 0..q {
                    let r = arm(blk, a);
                    for a2 in a + 1..q {
                        b.set(r, arm(blk, a2), epsilon);
                    }
                    for c in 0..q {
                        let v = if c < sparsities[r] {
                            -deltas[r]
                        } else {
                            -epsilon
                        };
                        b.set(r, arm((blk + 1) % 4, c), v);
                    }
                    if blk < 2 {
                        for c in 0..q {
                            b.set(r, arm(blk + 2, c), epsilon);
                        }
                    }
                }
            }
        }
        BlockLayout::Circulant => {
            let m = k - 1;
            for j in 1..k {
                b.set(0, j, epsilon);
            }
            for p in 0..m {
                for q in p + 1..m {
                    b.set(p + 1, q + 1, epsilon);
                }
            }
            for p in 0..m {
                for t in 1..=sparsities[p + 1] {
                    b.set(p + 1, (p + t) % m + 1, -deltas[p + 1]);
                }
            }
        }
    }
    Ok(b.finish())
}

/// Mutable skew-symmetric scratch matrix.
struct Builder {
    k: usize,
    gaps: Vec<f64>,
}

impl Builder {
    fn new(k: usize) -> Self {
        Self {
            k,
            gaps: vec![0.0; k * k],
        }
    }

    fn from(matrix: &GapMatrix) -> Self {
        Self {
            k: matrix.k(),
            gaps: matrix.as_flat().to_vec(),
        }
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.gaps[i * self.k + j] = v;
        self.gaps[j * self.k + i] = -v;
    }

    fn finish(self) -> GapMatrix {
        GapMatrix::from_flat_unchecked(self.k, self.gaps)
    }
}

/// Makes arm `k` a Condorcet winner by raising every nonpositive entry of
/// its row to `epsilon` (and mirroring the column).
///
/// With `epsilon = 0` the row becomes nonnegative, i.e. `k` is a weak winner.
pub fn lift_row(matrix: &GapMatrix, k: usize, epsilon: f64) -> Result<GapMatrix> {
    matrix.require_valid()?;
    if k >= matrix.k() {
        return Err(invalid(format!(
            "arm {k} out of range for {} arms",
            matrix.k()
        )));
    }
    if !(0.0..=0.5).contains(&epsilon) {
        return Err(invalid(format!("epsilon = {epsilon} outside [0, 1/2]")));
    }
    let mut b = Builder::from(matrix);
    for (j, v) in matrix.off_diagonal(k) {
        if v <= 0.0 {
            b.set(k, j, epsilon);
        }
    }
    Ok(b.finish())
}

/// Sign convention used to decide which zero gaps count as losses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TieRule {
    /// Ties are never counted as losses and never permuted.
    #[default]
    Ignore,
    /// On a tie the higher-indexed arm is treated as the loser.
    ///
    /// Under this rule [`permute_negatives`] keeps the losing entries of each
    /// row but may turn the tie winner's zero into a positive entry, so only
    /// [`TieRule::Ignore`] preserves every row's nonpositive entries.
    HigherIndexLoses,
}

impl TieRule {
    fn sign(self, i: usize, j: usize) -> i8 {
        match self {
            TieRule::Ignore => 0,
            TieRule::HigherIndexLoses => {
                if i > j {
                    -1
                } else {
                    1
                }
            }
        }
    }
}

/// `sigma(i, j)`: the sign of the gap, with `rule` deciding ties.
pub fn sign_pattern(matrix: &GapMatrix, i: usize, j: usize, rule: TieRule) -> i8 {
    let v = matrix.get(i, j);
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else if i == j {
        0
    } else {
        rule.sign(i, j)
    }
}

/// Columns `j` with `sigma(i, j) = -1`, ascending.
pub fn losing_set(matrix: &GapMatrix, i: usize, rule: TieRule) -> Vec<usize> {
    (0..matrix.k())
        .filter(|&j| sign_pattern(matrix, i, j, rule) == -1)
        .collect()
}

/// Per-row permutations of the losing sets.
///
/// `images[i][t]` is where the `t`-th column of [`losing_set`]`(i)` is sent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowPermutations {
    pub images: Vec<Vec<usize>>,
}

impl RowPermutations {
    pub fn identity(matrix: &GapMatrix, rule: TieRule) -> Self {
        Self {
            images: (0..matrix.k())
                .map(|i| losing_set(matrix, i, rule))
                .collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(matrix: &GapMatrix, rule: TieRule, rng: &mut R) -> Self {
        use rand::seq::SliceRandom;
        let mut p = Self::identity(matrix, rule);
        for row in &mut p.images {
            row.shuffle(rng);
        }
        p
    }
}

/// Permutes, in every row, the positions of the losing entries while
/// preserving skew-symmetry. Each row keeps the same multiset of nonpositive
/// entries.
pub fn permute_negatives(
    matrix: &GapMatrix,
    perms: &RowPermutations,
    rule: TieRule,
) -> Result<GapMatrix> {
    matrix.require_valid()?;
    let k = matrix.k();
    if perms.images.len() != k {
        return Err(invalid(format!(
            "{} row permutations for {k} arms",
            perms.images.len()
        )));
    }
    // pi[i][j] = image of j under row i's permutation
    let mut pi = vec![vec![usize::MAX; k]; k];
    for (i, (row, image)) in pi.iter_mut().zip(&perms.images).enumerate() {
        let domain = losing_set(matrix, i, rule);
        let mut sorted = image.clone();
        sorted.sort_unstable();
        if sorted != domain {
            return Err(invalid(format!(
                "permutation of row {i} is not a bijection on its losing set {domain:?}"
            )));
        }
        for (&from, &to) in domain.iter().zip(image) {
            row[from] = to;
        }
    }
    let mut gaps = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            gaps[i * k + j] = match sign_pattern(matrix, i, j, rule) {
                -1 => matrix.get(i, pi[i][j]),
                1 if i != j => -matrix.get(j, pi[j][i]),
                _ => matrix.get(i, j),
            };
        }
    }
    Ok(GapMatrix::from_flat_unchecked(k, gaps))
}

/// Random instance with arm 0 as planted Condorcet winner.
///
/// Arm 0 beats every arm by a gap drawn from `[lo, hi]`; every other
/// upper-triangle entry is uniform on `[-hi, hi]`.
pub fn gen_random_cw<R: Rng + ?Sized>(
    k: usize,
    lo: f64,
    hi: f64,
    rng: &mut R,
) -> Result<GapMatrix> {
    if k < 2 {
        return Err(invalid(format!("need at least 2 arms, got {k}")));
    }
    if !(lo > 0.0 && lo <= hi && hi <= 0.25) {
        return Err(invalid(format!(
            "gap range [{lo}, {hi}] must satisfy 0 < lo <= hi <= 1/4"
        )));
    }
    let m = GapMatrix::from_upper(k, |i, _| {
        if i == 0 {
            rng.gen_range(lo..=hi)
        } else {
            rng.gen_range(-hi..=hi)
        }
    })?;
    debug_assert_eq!(m.condorcet_winner(), Some(0));
    m.require_cw()?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn total_order_rows() {
        let m = gen_total_order(&[0.0, 0.2, 0.3]).unwrap();
        assert_eq!(m.row(2), &[-0.3, -0.3, 0.0]);
        assert_eq!(m.row(0), &[0.0, 0.2, 0.3]);
        assert_eq!(m.condorcet_winner(), Some(0));

        let m = gen_total_order(&[0.0, 0.1]).unwrap();
        assert_eq!(m.rows(), vec![vec![0.0, 0.1], vec![-0.1, 0.0]]);
    }

    #[test]
    fn total_order_strongest_opponent() {
        let m = gen_total_order(&[0.0, 0.05, 0.1, 0.1, 0.2, 0.24]).unwrap();
        for i in 1..m.k() {
            let min = m
                .off_diagonal(i)
                .map(|(_, v)| v)
                .fold(f64::INFINITY, f64::min);
            assert_eq!(m.get(i, 0), min);
        }
    }

    #[test]
    fn total_order_rejects_bad_deltas() {
        assert!(gen_total_order(&[0.0, 0.3, 0.1]).is_err());
        assert!(gen_total_order(&[0.0, 0.2, 0.1]).is_err());
        assert!(gen_total_order(&[0.1, 0.2]).is_err());
        assert!(gen_total_order(&[0.0, 0.0]).is_err());
        assert!(gen_total_order(&[0.0]).is_err());
    }

    fn count_eq(row: &[f64], v: f64) -> usize {
        row.iter().filter(|&&x| x == v).count()
    }

    fn check_block(m: &GapMatrix, deltas: &[f64], s: &[usize], eps: f64) {
        let r = m.validate();
        assert!(r.skew_symmetric && r.in_range);
        assert_eq!(r.cw, Some(0));
        assert!(m.off_diagonal(0).all(|(_, v)| v == eps));
        for i in 1..m.k() {
            assert_eq!(
                count_eq(m.row(i), -deltas[i]),
                s[i],
                "row {i}: {:?}",
                m.row(i)
            );
            assert!(m
                .off_diagonal(i)
                .all(|(_, v)| v >= 0.0 || v == -deltas[i] || v == -eps));
        }
    }

    #[test]
    fn block_minimax_k8_s2_circulant() {
        let deltas = [0.0, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2];
        let s = [0, 2, 2, 2, 2, 2, 2, 2];
        assert_eq!(block_layout(&s), BlockLayout::Circulant);
        let m = gen_block_minimax(&deltas, &s, 0.01).unwrap();
        check_block(&m, &deltas, &s, 0.01);
    }

    #[test]
    fn block_minimax_block_layout() {
        let k = 32;
        let mut deltas = vec![0.0];
        let mut s = vec![0];
        for i in 1..k {
            deltas.push(0.05 + 0.005 * i as f64);
            s.push(1 + i % 4);
        }
        assert_eq!(block_layout(&s), BlockLayout::Blocks);
        let m = gen_block_minimax(&deltas, &s, 0.01).unwrap();
        check_block(&m, &deltas, &s, 0.01);
    }

    #[test]
    fn block_minimax_errors() {
        let d = [0.0, 0.2, 0.2, 0.2, 0.2, 0.2];
        assert!(gen_block_minimax(&d, &[0, 1, 1, 1, 1, 1], 0.01).is_err());
        let d = [0.0, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2];
        assert!(matches!(
            gen_block_minimax(&d, &[0, 3, 1, 1, 1, 1, 1, 1], 0.01),
            Err(Error::InvalidSparsity {
                arm: 1,
                s: 3,
                max: 2
            })
        ));
        assert!(gen_block_minimax(&d, &[0, 0, 1, 1, 1, 1, 1, 1], 0.01).is_err());
        assert!(gen_block_minimax(&d, &[0, 1, 1, 1, 1, 1, 1, 1], 0.2).is_err());
    }

    #[test]
    fn lift_row_example() {
        let m = GapMatrix::from_rows(vec![
            vec![0.0, 0.2, 0.15],
            vec![-0.2, 0.0, 0.1],
            vec![-0.15, -0.1, 0.0],
        ])
        .unwrap();
        let l = lift_row(&m, 1, 0.05).unwrap();
        assert_eq!(l.get(1, 0), 0.05);
        assert_eq!(l.get(1, 2), 0.1);
        assert_eq!(l.get(0, 1), -0.05);
        assert_eq!(l.condorcet_winner(), Some(1));
        // lifting the current winner changes nothing
        assert_eq!(lift_row(&m, 0, 0.05).unwrap(), m);
        // epsilon = 0 gives a weak winner
        let w = lift_row(&m, 2, 0.0).unwrap();
        assert!(w.validate().weak_cws.contains(&2));
        assert!(lift_row(&m, 3, 0.05).is_err());
    }

    #[test]
    fn identity_permutation_is_noop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = gen_random_cw(7, 0.05, 0.25, &mut rng).unwrap();
        let id = RowPermutations::identity(&m, TieRule::Ignore);
        assert_eq!(permute_negatives(&m, &id, TieRule::Ignore).unwrap(), m);
    }

    #[test]
    fn swapping_two_negatives_keeps_sorted_row() {
        let m = gen_total_order(&[0.0, 0.1, 0.15, 0.2, 0.22]).unwrap();
        // row 4 loses to every arm; swap the first two losses
        let mut p = RowPermutations::identity(&m, TieRule::Ignore);
        p.images[4].swap(0, 1);
        let out = permute_negatives(&m, &p, TieRule::Ignore).unwrap();
        assert!(out.validate().skew_symmetric);
        let sorted = |r: &[f64]| {
            let mut v: Vec<f64> = r.iter().copied().filter(|&x| x <= 0.0).collect();
            v.sort_by(f64::total_cmp);
            v
        };
        for i in 1..m.k() {
            assert_eq!(sorted(out.row(i)), sorted(m.row(i)));
        }
    }

    #[test]
    fn permutation_must_be_bijection() {
        let m = gen_total_order(&[0.0, 0.1, 0.15, 0.2]).unwrap();
        let mut p = RowPermutations::identity(&m, TieRule::Ignore);
        p.images[3][0] = p.images[3][1];
        assert!(permute_negatives(&m, &p, TieRule::Ignore).is_err());
        let mut p = RowPermutations::identity(&m, TieRule::Ignore);
        p.images[2].push(3);
        assert!(permute_negatives(&m, &p, TieRule::Ignore).is_err());
    }

    #[test]
    fn ties_are_fixed_by_default() {
        let m = GapMatrix::from_rows(vec![
            vec![0.0, 0.1, 0.1, 0.1],
            vec![-0.1, 0.0, 0.0, -0.2],
            vec![-0.1, 0.0, 0.0, 0.1],
            vec![-0.1, 0.2, -0.1, 0.0],
        ])
        .unwrap();
        assert_eq!(losing_set(&m, 1, TieRule::Ignore), vec![0, 3]);
        assert_eq!(losing_set(&m, 2, TieRule::HigherIndexLoses), vec![0, 1]);
        let mut p = RowPermutations::identity(&m, TieRule::Ignore);
        p.images[1].swap(0, 1);
        let out = permute_negatives(&m, &p, TieRule::Ignore).unwrap();
        assert_eq!(out.get(1, 2), 0.0);
        assert_eq!(out.get(1, 0), -0.2);
        assert_eq!(out.get(1, 3), -0.1);
        assert!(out.validate().skew_symmetric);
    }

    #[test]
    fn random_cw_contract() {
        let mut a = ChaCha8Rng::seed_from_u64(11);
        let mut b = ChaCha8Rng::seed_from_u64(11);
        let m1 = gen_random_cw(8, 0.05, 0.2, &mut a).unwrap();
        let m2 = gen_random_cw(8, 0.05, 0.2, &mut b).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(m1.condorcet_winner(), Some(0));
        let two = gen_random_cw(2, 0.1, 0.2, &mut a).unwrap();
        assert!((0.1..=0.2).contains(&two.get(0, 1)));
        assert!(gen_random_cw(4, 0.0, 0.2, &mut a).is_err());
        assert!(gen_random_cw(4, 0.2, 0.1, &mut a).is_err());
        assert!(gen_random_cw(4, 0.1, 0.3, &mut a).is_err());
    }

    #[test]
    fn tie_winner_can_lose_a_zero_under_index_rule() {
        let m = GapMatrix::from_rows(vec![
            vec![0.0, -0.1, 0.1, -0.2],
            vec![0.1, 0.0, 0.0, 0.4],
            vec![-0.1, 0.0, 0.0, 0.4],
            vec![0.2, -0.4, -0.4, 0.0],
        ])
        .unwrap();
        let rule = TieRule::HigherIndexLoses;
        assert_eq!(losing_set(&m, 2, rule), vec![0, 1]);
        let mut perms = RowPermutations::identity(&m, rule);
        perms.images[2] = vec![1, 0];
        let p = permute_negatives(&m, &perms, rule).unwrap();
        // arm 2 keeps its losses; arm 1 now beats arm 2 strictly
        assert_eq!(p.get(2, 0), 0.0);
        assert_eq!(p.get(2, 1), -0.1);
        assert_eq!(p.get(1, 2), 0.1);
        assert!(p.validate().skew_symmetric);
    }
}
