//! Gap-matrix environments, duel sampling and instance generators.

mod generate;
mod matrix;
mod oracle;

pub use generate::{
    block_layout, gen_block_minimax, gen_random_cw, gen_total_order, lift_row, losing_set,
    permute_negatives, sign_pattern, BlockLayout, RowPermutations, TieRule,
};
pub use matrix::{GapMatrix, ValidationReport, LOAD_SKEW_TOLERANCE};
pub use oracle::DuelOracle;
