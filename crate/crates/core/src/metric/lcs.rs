// SPDX-License-Identifier: MIT
//! Longest-common-subsequence kernels.
//!
//! Three exact kernels live here: the quadratic reference DP, a word-parallel
//! kernel in the style of Allison–Dix / Hyyrö, and a kernel for a text given
//! as symbol runs. Every kernel returns the same number; tests hold them to it.

use std::collections::HashMap;

use super::Sym;

/// Quadratic reference: two-row dynamic program.
pub fn lcs_dp(a: &[Sym], b: &[Sym]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0u32; b.len() + 1];
    let mut cur = vec![0u32; b.len() + 1];
    for &x in a {
        for (j, &y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()] as usize
}

/// Match masks of a fixed pattern, one bit per pattern position.
#[derive(Clone, Debug)]
pub struct BitPattern {
    n: usize,
    words: usize,
    slot: HashMap<Sym, usize>,
    masks: Vec<u64>,
}

impl BitPattern {
    pub fn new(pattern: &[Sym]) -> Self {
        let n = pattern.len();
        let words = n.div_ceil(64).max(1);
        let mut slot = HashMap::new();
        let mut masks = Vec::new();
        for (i, &s) in pattern.iter().enumerate() {
            let k = *slot.entry(s).or_insert_with(|| {
                masks.resize(masks.len() + words, 0u64);
                masks.len() / words - 1
            });
            masks[k * words + i / 64] |= 1u64 << (i % 64);
        }
        BitPattern { n, words, slot, masks }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn words(&self) -> usize {
        self.words
    }

    /// Fresh state: every pattern position unused.
    pub fn start(&self) -> Vec<u64> {
        vec![!0u64; self.words]
    }

    /// Consumes one text symbol. Symbols absent from the pattern leave the state unchanged.
    #[inline]
    pub fn step(&self, v: &mut [u64], s: Sym) {
        let Some(&k) = self.slot.get(&s) else { return };
        let m = &self.masks[k * self.words..(k + 1) * self.words];
        let mut carry = 0u64;
        for (vk, &mk) in v.iter_mut().zip(m) {
            let x = *vk;
            let u = x & mk;
            let (s1, c1) = x.overflowing_add(u);
            let (s2, c2) = s1.overflowing_add(carry);
            carry = (c1 | c2) as u64;
            *vk = s2 | (x & !mk);
        }
    }

    /// Current LCS: zero bits among the first `n` positions.
    pub fn lcs(&self, v: &[u64]) -> usize {
        let mut ones = 0usize;
        for (k, &w) in v.iter().enumerate() {
            let lo = k * 64;
            if lo >= self.n {
                break;
            }
            let valid = (self.n - lo).min(64);
            let w = if valid == 64 { w } else { w & ((1u64 << valid) - 1) };
            ones += w.count_ones() as usize;
        }
        self.n - ones
    }
}

/// Word-parallel LCS. The shorter input is encoded as bit masks, the longer one streamed.
pub fn lcs_bitparallel(a: &[Sym], b: &[Sym]) -> usize {
    let (p, t) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if p.is_empty() {
        return 0;
    }
    let bp = BitPattern::new(p);
    let mut v = bp.start();
    for &s in t {
        bp.step(&mut v, s);
    }
    bp.lcs(&v)
}

/// Word operations the word-parallel kernel performs on this pair.
pub fn bitparallel_cost(n: u64, m: u64) -> u64 {
    let (p, t) = if n <= m { (n, m) } else { (m, n) };
    p.div_ceil(64).max(1).saturating_mul(t)
}

/// Maximal runs `(symbol, length)` of a string.
pub fn runs(s: &[Sym]) -> Vec<(Sym, u64)> {
    let mut out: Vec<(Sym, u64)> = Vec::new();
    for &x in s {
        match out.last_mut() {
            Some((y, r)) if *y == x => *r += 1,
            _ => out.push((x, 1)),
        }
    }
    out
}

/// LCS of an explicit string `x` against a string given by its runs.
///
/// Runs are absorbed one at a time. With `C` the prefix count of the run symbol in `x`,
/// `L'[i] = max_{i'≤i} L[i'] + min(r, C[i]−C[i'])`; the `r`-capped part is a monotone
/// pointer into `L`, the uncapped part a sliding-window maximum of `L − C`.
pub fn lcs_rle(x: &[Sym], y_runs: &[(Sym, u64)]) -> u64 {
    let n = x.len();
    if n == 0 || y_runs.is_empty() {
        return 0;
    }
    let mut occ: HashMap<Sym, Vec<usize>> = HashMap::new();
    for (i, &s) in x.iter().enumerate() {
        occ.entry(s).or_default().push(i);
    }
    let mut l = vec![0u64; n + 1];
    let mut nl = vec![0u64; n + 1];
    let mut cnt = vec![0u64; n + 1];
    let mut dq: std::collections::VecDeque<usize> = std::collections::VecDeque::with_capacity(n + 1);
    for &(c, r) in y_runs {
        let Some(pos) = occ.get(&c) else { continue };
        for i in 0..n {
            cnt[i + 1] = cnt[i] + (x[i] == c) as u64;
        }
        let d = |i: usize, l: &[u64], cnt: &[u64]| l[i] as i128 - cnt[i] as i128;
        dq.clear();
        for i in 0..=n {
            while let Some(&back) = dq.back() {
                if d(back, &l, &cnt) <= d(i, &l, &cnt) {
                    dq.pop_back();
                } else {
                    break;
                }
            }
            dq.push_back(i);
            let mut best = l[i];
            if cnt[i] >= r {
                // Largest i' with cnt[i'] ≤ cnt[i] − r sits at the (t+1)-th occurrence.
                let t = (cnt[i] - r) as usize;
                let p = pos[t];
                best = best.max(l[p] + r);
                while let Some(&front) = dq.front() {
                    if front <= p {
                        dq.pop_front();
                    } else {
                        break;
                    }
                }
            }
            if let Some(&front) = dq.front() {
                let v = d(front, &l, &cnt) + cnt[i] as i128;
                best = best.max(v as u64);
            }
            nl[i] = best;
        }
        std::mem::swap(&mut l, &mut nl);
    }
    l[n]
}

/// Cost of [`lcs_rle`] in elementary steps.
pub fn rle_cost(n: u64, runs: u64) -> u64 {
    n.saturating_mul(runs)
}

/// A longest common subsequence as index pairs, lexicographically smallest among all
/// optimal index sequences. Uses a full suffix table, so callers bound `|a|·|b|`.
pub fn lcs_witness(a: &[Sym], b: &[Sym]) -> Vec<(usize, usize)> {
    let (n, m) = (a.len(), b.len());
    let w = m + 1;
    let mut t = vec![0u32; (n + 1) * w];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            t[i * w + j] = if a[i] == b[j] {
                t[(i + 1) * w + j + 1] + 1
            } else {
                t[(i + 1) * w + j].max(t[i * w + j + 1])
            };
        }
    }
    let mut out = Vec::with_capacity(t[0] as usize);
    let (mut i, mut j) = (0usize, 0usize);
    let mut r = t[0];
    'outer: while r > 0 {
        for ii in i..n {
            if t[ii * w + j] < r {
                break;
            }
            let mut jj = j;
            while jj < m && t[(ii + 1) * w + jj + 1] + 1 >= r {
                if a[ii] == b[jj] {
                    out.push((ii, jj));
                    i = ii + 1;
                    j = jj + 1;
                    r -= 1;
                    continue 'outer;
                }
                jj += 1;
            }
        }
        unreachable!("suffix table promised a completion");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> Vec<Sym> {
        x.bytes().map(|c| c as Sym).collect()
    }

    #[test]
    fn small_values() {
        assert_eq!(lcs_dp(&s("11000"), &s("11100")), 4);
        assert_eq!(lcs_bitparallel(&s("11000"), &s("11100")), 4);
        assert_eq!(lcs_dp(&s("abcbdab"), &s("bdcaba")), 4);
        assert_eq!(lcs_bitparallel(&s("abcbdab"), &s("bdcaba")), 4);
        assert_eq!(lcs_bitparallel(&s(""), &s("abc")), 0);
    }

    #[test]
    fn rle_matches_dp() {
        assert_eq!(lcs_rle(&s("aab"), &runs(&s("abab"))), 3);
        assert_eq!(lcs_rle(&s("abcbdab"), &runs(&s("bdcaba"))), 4);
        assert_eq!(lcs_rle(&s("aaaa"), &[(b'a' as Sym, 2)]), 2);
    }

    #[test]
    fn witness_is_lexicographically_first() {
        let w = lcs_witness(&s("aa"), &s("aa"));
        assert_eq!(w, vec![(0, 0), (1, 1)]);
        let w = lcs_witness(&s("ab"), &s("ba"));
        assert_eq!(w, vec![(0, 1)]);
        let w = lcs_witness(&s("11000"), &s("11100"));
        assert_eq!(w.len(), 4);
        assert_eq!(w[0], (0, 0));
    }

    #[test]
    fn long_patterns_cross_word_boundaries() {
        let a: Vec<Sym> = (0..300).map(|i| (i * 7 % 5) as Sym).collect();
        let b: Vec<Sym> = (0..257).map(|i| (i * 3 % 4) as Sym).collect();
        assert_eq!(lcs_bitparallel(&a, &b), lcs_dp(&a, &b));
        assert_eq!(lcs_rle(&a, &runs(&b)) as usize, lcs_dp(&a, &b));
    }
}
