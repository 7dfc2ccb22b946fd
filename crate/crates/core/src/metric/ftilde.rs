// SPDX-License-Identifier: MIT
//! Approximate matches: chains of equal-symbol pairs, increasing in the product
//! order, where every index of either string has at most three partners.
//!
//! Inside a chain all pairs sharing a first index form a contiguous run (and
//! likewise for second indices), so the "consecutive partners" requirement
//! holds automatically and only the per-index cap of three remains.

use super::Sym;

const NEG: i32 = i32::MIN / 4;

/// Largest approximate match, `O(|a|·|b|)` time and `O(|b|)` memory.
///
/// A chain ending at pair `(i,j)` is in one of five states, by how many of its
/// pairs share row `i` and column `j`: single, two or three in the row, two or
/// three in the column (one of the two counts is always 1).
pub fn approx_match_size(a: &[Sym], b: &[Sym]) -> usize {
    let m = b.len();
    if a.is_empty() || m == 0 {
        return 0;
    }
    // Prefix maxima of the best chain ending anywhere in rows < i, columns ≤ j.
    let mut prev = vec![0i32; m + 1];
    let mut cur = vec![0i32; m + 1];
    // Column maxima over earlier rows: (states with column count 1, state V2).
    let mut col_one = vec![NEG; m];
    let mut col_two = vec![NEG; m];
    for &x in a {
        let mut row_one = NEG; // earlier in this row, row count 1
        let mut row_two = NEG; // earlier in this row, row count 2
        cur[0] = 0;
        for j in 0..m {
            let mut best_here = NEG;
            if x == b[j] {
                let s = 1 + prev[j];
                let h2 = 1 + row_one;
                let h3 = 1 + row_two;
                let v2 = 1 + col_one[j];
                let v3 = 1 + col_two[j];
                best_here = s.max(h2).max(h3).max(v2).max(v3);
                row_one = row_one.max(s).max(v2).max(v3);
                row_two = row_two.max(h2);
                col_one[j] = col_one[j].max(s).max(h2).max(h3);
                col_two[j] = col_two[j].max(v2);
            }
            cur[j + 1] = prev[j + 1].max(cur[j]).max(best_here);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m].max(0) as usize
}

/// Checks a pair list (0-based) against the approximate-match definition.
pub fn is_approx_match(a: &[Sym], b: &[Sym], pairs: &[(usize, usize)]) -> bool {
    for w in pairs.windows(2) {
        let ((i, j), (k, l)) = (w[0], w[1]);
        if !(i <= k && j <= l && (i, j) != (k, l)) {
            return false;
        }
    }
    let mut rows = std::collections::HashMap::<usize, usize>::new();
    let mut cols = std::collections::HashMap::<usize, usize>::new();
    for &(i, j) in pairs {
        if i >= a.len() || j >= b.len() || a[i] != b[j] {
            return false;
        }
        *rows.entry(i).or_default() += 1;
        *cols.entry(j).or_default() += 1;
    }
    // Partners of one index are consecutive chain positions (contiguity is checked, not assumed).
    let contiguous = |key: &dyn Fn(&(usize, usize)) -> usize| {
        let mut seen_end = std::collections::HashSet::new();
        let mut last: Option<usize> = None;
        for p in pairs {
            let k = key(p);
            if last != Some(k) {
                if !seen_end.insert(k) {
                    return false;
                }
                last = Some(k);
            }
        }
        true
    };
    rows.values().all(|&c| c <= 3)
        && cols.values().all(|&c| c <= 3)
        && contiguous(&|p| p.0)
        && contiguous(&|p| p.1)
}

/// Checks a pair list (0-based) against the exact-match definition.
pub fn is_match(a: &[Sym], b: &[Sym], pairs: &[(usize, usize)]) -> bool {
    pairs.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1)
        && pairs.iter().all(|&(i, j)| i < a.len() && j < b.len() && a[i] == b[j])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> Vec<Sym> {
        x.bytes().map(|c| c as Sym).collect()
    }

    #[test]
    fn anchor_chain() {
        // 1s: (0,0)(0,1)(1,1)(1,2); 0s: (2,3)(3,3)(3,4)(4,4), eight pairs.
        assert_eq!(approx_match_size(&s("11000"), &s("11100")), 8);
        let w = [(0, 0), (0, 1), (1, 1), (1, 2), (2, 3), (3, 3), (3, 4), (4, 4)];
        assert!(is_approx_match(&s("11000"), &s("11100"), &w));
    }

    #[test]
    fn cap_of_three() {
        assert_eq!(approx_match_size(&s("a"), &s("aaaaa")), 3);
        assert_eq!(approx_match_size(&s("aa"), &s("aaaaa")), 6);
        assert!(!is_approx_match(&s("a"), &s("aaaa"), &[(0, 0), (0, 1), (0, 2), (0, 3)]));
    }

    #[test]
    fn never_below_lcs() {
        let a = s("abcabcab");
        let b = s("bcabca");
        assert!(approx_match_size(&a, &b) >= super::super::lcs::lcs_dp(&a, &b));
        // Partners need not be adjacent positions: a_0 pairs with b_2 and b_5.
        assert_eq!(approx_match_size(&s("a"), &s("bcabca")), 2);
    }
}
