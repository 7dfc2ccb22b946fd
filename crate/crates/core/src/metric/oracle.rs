// SPDX-License-Identifier: MIT
//! Brute-force reference for match sizes, used only to validate the kernels.
//!
//! The search walks chains pair by pair, trying every admissible next pair.
//! States `(last pair, row count, column count)` are memoised so that the
//! exponential walk finishes at the sizes the tests use (|a|+|b| ≤ 24).

use std::collections::HashMap;

use super::Sym;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleMode {
    Exact,
    Approximate,
}

pub const ORACLE_CAP: usize = 24;

pub(crate) fn oracle_size(a: &[Sym], b: &[Sym], mode: OracleMode) -> usize {
    let pairs: Vec<(usize, usize)> = (0..a.len())
        .flat_map(|i| (0..b.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| a[i] == b[j])
        .collect();
    let mut memo: HashMap<(usize, u8, u8), usize> = HashMap::new();
    let mut best = 0;
    for p in 0..pairs.len() {
        best = best.max(extend(&pairs, p, 1, 1, mode, &mut memo));
    }
    best
}

/// Longest chain starting at `pairs[p]`, given how many chain pairs already sit in its row/column.
fn extend(
    pairs: &[(usize, usize)],
    p: usize,
    rows: u8,
    cols: u8,
    mode: OracleMode,
    memo: &mut HashMap<(usize, u8, u8), usize>,
) -> usize {
    if let Some(&v) = memo.get(&(p, rows, cols)) {
        return v;
    }
    let (i, j) = pairs[p];
    let mut best = 1;
    for (q, &(k, l)) in pairs.iter().enumerate() {
        let next = match mode {
            OracleMode::Exact => (k > i && l > j).then_some((1, 1)),
            OracleMode::Approximate => {
                if k == i && l > j {
                    (rows < 3).then_some((rows + 1, 1))
                } else if l == j && k > i {
                    (cols < 3).then_some((1, cols + 1))
                } else if k > i && l > j {
                    Some((1, 1))
                } else {
                    None
                }
            }
        };
        if let Some((r, c)) = next {
            best = best.max(1 + extend(pairs, q, r, c, mode, memo));
        }
    }
    memo.insert((p, rows, cols), best);
    best
}
