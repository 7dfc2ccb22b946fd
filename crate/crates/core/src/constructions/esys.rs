// SPDX-License-Identifier: MIT
//! The positive-entropy block system: random free sections with a per-symbol cap,
//! a deterministic equalising section, and a closing marker run.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::prob::{DistributionTable, JointTable};
use crate::error::{domain, Error, Result};
use crate::metric::Sym;
use crate::rational::{q, qi, qu, Q};
use crate::words::{WordExpr, WordRef};

/// Largest `(N−1)^{k'}` that `e_enumerate_blocks` will walk.
pub const ENUMERATION_CAP: u64 = 20_000_000;
const MAX_REDRAWS: u64 = 1_000_000;

/// Parameters of one level: `N` words in, `k` words per new block, and `ε`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ELevel {
    pub n_blocks: u64,
    pub k: u64,
    #[serde(with = "crate::rational::serde_q")]
    pub eps: Q,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EParams {
    pub levels: Vec<ELevel>,
}

/// Which of the nominal parameter constraints hold at a level.
#[derive(Clone, Debug, Serialize)]
pub struct EFlags {
    pub eps_tiny: bool,
    pub eps_n_gt_2: bool,
    pub k_multiple_of_n: bool,
    pub eps_k_integral: bool,
    /// `Σ N²/(ε²k) < 1/8` over all configured levels.
    pub chebyshev_sum: bool,
}

impl EFlags {
    pub fn all(&self) -> bool {
        self.eps_tiny && self.eps_n_gt_2 && self.k_multiple_of_n && self.eps_k_integral && self.chebyshev_sum
    }
}

impl ELevel {
    pub fn new(n_blocks: u64, k: u64, eps: Q) -> Result<Self> {
        let lv = ELevel { n_blocks, k, eps };
        lv.validate()?;
        Ok(lv)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_blocks < 2 {
            return domain("need at least two blocks (one of them the marker)");
        }
        if !self.eps.is_positive() || self.eps >= Q::one() {
            return domain(format!("ε = {} must lie in (0,1)", self.eps));
        }
        if !(&self.eps * qi(self.k as i64)).is_integer() {
            return domain(format!("ε·k = {}·{} is not an integer", self.eps, self.k));
        }
        if self.k % self.n_blocks != 0 {
            return domain(format!("k = {} is not a multiple of N = {}", self.k, self.n_blocks));
        }
        if self.eps_k() < self.cap() {
            return domain(format!("ε·k = {} leaves no room for a marker run of {}", self.eps_k(), self.cap()));
        }
        Ok(())
    }

    pub fn eps_k(&self) -> u64 {
        (&self.eps * qi(self.k as i64)).to_integer().to_u64().unwrap_or(0)
    }

    /// `k' = (1−ε)k`, the length of the free section.
    pub fn k_free(&self) -> u64 {
        self.k - self.eps_k()
    }

    /// `k/N`, the common count of every symbol in a finished block.
    pub fn cap(&self) -> u64 {
        self.k / self.n_blocks
    }

    pub fn marker(&self) -> Sym {
        (self.n_blocks - 1) as Sym
    }
}

impl EParams {
    pub fn level(&self, n: usize) -> Result<&ELevel> {
        self.levels.get(n).ok_or_else(|| Error::Domain(format!("level {n} is not configured")))
    }

    pub fn flags(&self, n: usize) -> Result<EFlags> {
        let lv = self.level(n)?;
        let tiny = Q::new(1.into(), num_bigint::BigInt::one() << (n + 12));
        let sum: Q = self.levels.iter().map(|l| qi((l.n_blocks * l.n_blocks) as i64) / (&l.eps * &l.eps * qi(l.k as i64))).sum();
        Ok(EFlags {
            eps_tiny: lv.eps < tiny,
            eps_n_gt_2: &lv.eps * qi(lv.n_blocks as i64) > qi(2),
            k_multiple_of_n: lv.k % lv.n_blocks == 0,
            eps_k_integral: (&lv.eps * qi(lv.k as i64)).is_integer(),
            chebyshev_sum: sum < q(1, 8),
        })
    }
}

/// `4N²/(ε²k)`.
pub fn tau_chebyshev_bound(params: &EParams, n: usize) -> Result<Q> {
    let lv = params.level(n)?;
    Ok(qi(4 * (lv.n_blocks * lv.n_blocks) as i64) / (&lv.eps * &lv.eps * qi(lv.k as i64)))
}

/// Completes a free section: the ascending equalising run, then the marker run.
fn complete(lv: &ELevel, free: &[Sym]) -> Vec<Sym> {
    let mut counts = vec![0u64; lv.n_blocks as usize];
    for &s in free {
        counts[s as usize] += 1;
    }
    let mut out = free.to_vec();
    for s in 0..lv.marker() {
        for _ in counts[s as usize]..lv.cap() {
            out.push(s);
        }
    }
    out.extend(std::iter::repeat(lv.marker()).take(lv.cap() as usize));
    out
}

fn within_cap(lv: &ELevel, free: &[Sym]) -> bool {
    let mut counts = vec![0u64; lv.n_blocks as usize];
    free.iter().all(|&s| {
        counts[s as usize] += 1;
        counts[s as usize] <= lv.cap()
    })
}

#[derive(Clone, Debug)]
pub struct ESample {
    /// Indices into `W_n`.
    pub layout: Vec<Sym>,
    pub word: WordRef,
    pub redraws: u64,
}

/// Draws one level-`(n+1)` block over `words` (which must have `N(n)` entries, the last being the marker).
pub fn e_sample_block(params: &EParams, n: usize, words: &[WordRef], seed: u64) -> Result<ESample> {
    let lv = params.level(n)?;
    lv.validate()?;
    if words.len() as u64 != lv.n_blocks {
        return domain(format!("expected {} words, got {}", lv.n_blocks, words.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut free = vec![0 as Sym; lv.k_free() as usize];
    let mut redraws = 0;
    loop {
        for s in free.iter_mut() {
            *s = rng.gen_range(0..lv.marker());
        }
        if within_cap(lv, &free) {
            break;
        }
        redraws += 1;
        if redraws >= MAX_REDRAWS {
            return Err(Error::Budget(format!("no admissible free section after {MAX_REDRAWS} draws")));
        }
    }
    let layout = complete(lv, &free);
    let word = WordExpr::concat(layout.iter().map(|&s| words[s as usize].clone()));
    Ok(ESample { layout, word, redraws })
}

/// Every admissible free section at one level, with the exact rejection probability.
#[derive(Clone, Debug)]
pub struct EEnumeration {
    pub level: ELevel,
    /// Admissible free sections, `k'` symbols each, flattened in lexicographic order.
    pub valid: Vec<Sym>,
    pub valid_count: u64,
    /// `(N−1)^{k'}`.
    pub total: u64,
    pub tau: Q,
    /// `Σ |Pr − ~Pr|` over all free sections, summed class by class.
    pub tv_distance: Q,
}

impl EEnumeration {
    pub fn k_free(&self) -> usize {
        self.level.k_free() as usize
    }

    pub fn string(&self, i: usize) -> &[Sym] {
        let k = self.k_free();
        &self.valid[i * k..(i + 1) * k]
    }

    /// `Pr(E)` for an admissible `E`.
    pub fn pr(&self) -> Q {
        q(1, self.valid_count as i64)
    }

    /// `~Pr(E)` for any free section.
    pub fn pr_tilde(&self) -> Q {
        q(1, self.total as i64)
    }

    /// The conditioned distribution on admissible free sections.
    pub fn pr_table(&self) -> DistributionTable {
        let p = self.pr();
        DistributionTable {
            outcomes: (0..self.valid_count as usize).map(|i| self.string(i).to_vec()).collect(),
            probs: vec![p; self.valid_count as usize],
        }
    }

    /// Completed level-`(n+1)` layouts, one per admissible free section.
    pub fn blocks(&self) -> Vec<Vec<Sym>> {
        (0..self.valid_count as usize).map(|i| complete(&self.level, self.string(i))).collect()
    }

    /// Joint law of (positions `0..a`, positions `a..a+b`) under `Pr`.
    pub fn position_joint(&self, a: usize, b: usize) -> Result<JointTable> {
        if a == 0 || b == 0 || a + b > self.k_free() {
            return domain(format!("need 0 < a, 0 < b, a + b ≤ {}", self.k_free()));
        }
        let mut rows: BTreeMap<&[Sym], usize> = BTreeMap::new();
        let mut cols: BTreeMap<&[Sym], usize> = BTreeMap::new();
        let mut cells: BTreeMap<(usize, usize), u64> = BTreeMap::new();
        for i in 0..self.valid_count as usize {
            let s = self.string(i);
            let nr = rows.len();
            let r = *rows.entry(&s[..a]).or_insert(nr);
            let nc = cols.len();
            let c = *cols.entry(&s[a..a + b]).or_insert(nc);
            *cells.entry((r, c)).or_default() += 1;
        }
        let mut p = vec![vec![Q::zero(); cols.len()]; rows.len()];
        for ((r, c), m) in cells {
            p[r][c] = q(m as i64, self.valid_count as i64);
        }
        Ok(JointTable::new(p))
    }
}

/// Walks all `(N−1)^{k'}` free sections and keeps the admissible ones.
pub fn e_enumerate_blocks(params: &EParams, n: usize) -> Result<EEnumeration> {
    let lv = params.level(n)?.clone();
    lv.validate()?;
    let base = lv.n_blocks - 1;
    let kf = lv.k_free() as u32;
    let total = base.checked_pow(kf).filter(|&t| t <= ENUMERATION_CAP).ok_or_else(|| {
        Error::Budget(format!("{base}^{kf} free sections exceed the enumeration cap {ENUMERATION_CAP}"))
    })?;
    let mut cur = vec![0 as Sym; kf as usize];
    let mut valid = Vec::new();
    let mut valid_count = 0u64;
    for _ in 0..total {
        if within_cap(&lv, &cur) {
            valid.extend_from_slice(&cur);
            valid_count += 1;
        }
        // odometer increment, last position fastest
        for s in cur.iter_mut().rev() {
            *s += 1;
            if u64::from(*s) < base {
                break;
            }
            *s = 0;
        }
    }
    if valid_count == 0 {
        return domain("no admissible free section");
    }
    let tilde = q(1, total as i64);
    let pr = q(1, valid_count as i64);
    let tv = qi((total - valid_count) as i64) * &tilde + qi(valid_count as i64) * (&pr - &tilde).abs();
    let tau = q((total - valid_count) as i64, total as i64);
    Ok(EEnumeration { level: lv, valid, valid_count, total, tau, tv_distance: tv })
}

/// `N(n+1) ≥ N(n)^{(1−2ε)k}`: the per-level entropy floor, decided on integers.
#[derive(Clone, Debug, Serialize)]
pub struct EntropyFloor {
    pub next_count: u64,
    /// `(1−2ε)k`, possibly negative.
    pub exponent: i64,
    pub floor: BigUint,
    pub holds: bool,
    pub hypotheses_met: bool,
}

pub fn entropy_floor(params: &EParams, n: usize, en: &EEnumeration) -> Result<EntropyFloor> {
    let lv = params.level(n)?;
    let exponent = lv.k as i64 - 2 * lv.eps_k() as i64;
    let floor = if exponent <= 0 { BigUint::one() } else { BigUint::from(lv.n_blocks).pow(exponent as u32) };
    let f = params.flags(n)?;
    Ok(EntropyFloor {
        next_count: en.valid_count,
        exponent,
        holds: BigUint::from(en.valid_count) >= floor,
        floor,
        hypotheses_met: f.eps_n_gt_2 && f.k_multiple_of_n,
    })
}

/// The ratio `log N(n+1)/h_{n+1}` over `log N(n)/h_n` is `log N(n+1) / (k log N(n))`; returned as `f64` for display.
pub fn entropy_ratio(lv: &ELevel, next_count: u64) -> f64 {
    (next_count as f64).ln() / (lv.k as f64 * (lv.n_blocks as f64).ln())
}

/// Exact `τ` compared with the Chebyshev bound, plus the total-variation identity.
#[derive(Clone, Debug, Serialize)]
pub struct TauReport {
    #[serde(with = "crate::rational::serde_q")]
    pub tau: Q,
    #[serde(with = "crate::rational::serde_q")]
    pub bound: Q,
    pub tau_within_bound: bool,
    pub tv_identity: bool,
}

pub fn tau_report(params: &EParams, n: usize, en: &EEnumeration) -> Result<TauReport> {
    let bound = tau_chebyshev_bound(params, n)?;
    Ok(TauReport {
        tau_within_bound: en.tau <= bound,
        tv_identity: en.tv_distance == qi(2) * &en.tau,
        tau: en.tau.clone(),
        bound,
    })
}

/// `N(n)^{k'}(1−τ)` as written for the next block count; with the marker excluded from
/// the free section the true count is `(N−1)^{k'}(1−τ)`, which is what enumeration returns.
pub fn nominal_next_count(lv: &ELevel, tau: &Q) -> Q {
    qu(&BigUint::from(lv.n_blocks).pow(lv.k_free() as u32)) * (Q::one() - tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::symbol_level;

    fn params(n: u64, k: u64, eps: Q) -> EParams {
        EParams { levels: vec![ELevel::new(n, k, eps).unwrap()] }
    }

    #[test]
    fn two_free_symbols() {
        let p = params(3, 3, q(1, 3));
        let en = e_enumerate_blocks(&p, 0).unwrap();
        assert_eq!(en.valid, vec![0, 1, 1, 0]);
        assert_eq!(en.tau, q(1, 2));
        assert_eq!(en.tv_distance, Q::one());
        assert_eq!(en.blocks(), vec![vec![0, 1, 2], vec![1, 0, 2]]);
    }

    #[test]
    fn no_rejection_when_cap_is_loose() {
        let p = params(2, 4, q(1, 2));
        let en = e_enumerate_blocks(&p, 0).unwrap();
        assert_eq!(en.tau, Q::zero());
        assert_eq!(en.pr(), en.pr_tilde());
    }

    #[test]
    fn chebyshev_formula() {
        assert_eq!(tau_chebyshev_bound(&params(3, 4 * 3, q(1, 2)), 0).unwrap(), qi(12));
        let raw = EParams { levels: vec![ELevel { n_blocks: 3, k: 4, eps: q(1, 2) }] };
        assert_eq!(tau_chebyshev_bound(&raw, 0).unwrap(), qi(36));
    }

    #[test]
    fn sampled_blocks_are_uniform() {
        let p = params(3, 6, q(1, 2));
        let w = symbol_level(3);
        for seed in 0..50 {
            let s = e_sample_block(&p, 0, &w, seed).unwrap();
            assert_eq!(s.layout.len(), 6);
            for y in 0..3 {
                assert_eq!(s.layout.iter().filter(|&&x| x == y).count(), 2);
            }
            assert_eq!(&s.layout[4..], &[2, 2]);
            assert_eq!(s.layout, e_sample_block(&p, 0, &w, seed).unwrap().layout);
        }
    }

    #[test]
    fn rejects_impossible_parameters() {
        assert!(ELevel::new(3, 4, q(1, 2)).is_err());
        assert!(ELevel::new(4, 8, q(1, 8)).is_err());
    }
}
