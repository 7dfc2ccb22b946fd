// SPDX-License-Identifier: MIT
//! Distance from a string to the finite substrings of a periodic word.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::lcs::BitPattern;
use super::{MatchResult, SymbolString};
use crate::error::{domain, Result};
use crate::rational::{q, Q};

/// Outcome of [`fbar_to_cyclic`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CyclicDistance {
    /// The infimum, below the threshold, with the best candidate's length and start offset.
    Value { result: MatchResult, length: usize, offset: usize },
    /// Every candidate is at least this far away.
    AtLeast(Q),
}

/// `inf { f̄(a, c) : c a finite substring of …bbb… }` when it is below `threshold`.
///
/// Candidates whose length falls outside `[(1−t)/(1+t)|a|, (1+t)/(1−t)|a|]` are
/// at distance > t by the length bound, so only that window is searched: for each
/// of the `|b|` phases, one streaming pass of the word-parallel kernel reads off
/// the LCS against every candidate length at once.
pub fn fbar_to_cyclic(a: &SymbolString, b: &SymbolString, threshold: &Q) -> Result<CyclicDistance> {
    if a.is_empty() || b.is_empty() {
        return domain("cyclic distance needs non-empty strings");
    }
    if *threshold > q(1, 2) {
        return domain("threshold above 1/2 leaves the length window unbounded");
    }
    if *threshold <= Q::zero() {
        return Ok(CyclicDistance::AtLeast(threshold.clone()));
    }
    let n = a.len();
    let t = threshold;
    let nq = Q::from_integer(n.into());
    let lo = ((Q::one() - t) / (Q::one() + t) * &nq).ceil().to_integer();
    let hi = ((Q::one() + t) / (Q::one() - t) * &nq).floor().to_integer();
    let lo: usize = lo.try_into().unwrap_or(1usize).max(1);
    let hi: usize = hi.try_into().map_err(|_| crate::error::Error::Budget("window too long".into()))?;
    let bp = BitPattern::new(a.symbols());
    let period = b.symbols();
    let mut best: Option<(Q, usize, usize, usize)> = None;
    for start in 0..period.len() {
        let mut v = bp.start();
        for len in 1..=hi {
            bp.step(&mut v, period[(start + len - 1) % period.len()]);
            if len < lo {
                continue;
            }
            let l = bp.lcs(&v);
            let val = Q::one() - q(2 * l as i64, (n + len) as i64);
            if best.as_ref().is_none_or(|(bv, ..)| val < *bv) {
                best = Some((val, l, len, start));
            }
        }
    }
    match best {
        Some((val, l, len, offset)) if val < *t => Ok(CyclicDistance::Value {
            result: MatchResult { value: val, match_size: BigUint::from(l), witness: None, exact: true },
            length: len,
            offset,
        }),
        _ => Ok(CyclicDistance::AtLeast(t.clone())),
    }
}
