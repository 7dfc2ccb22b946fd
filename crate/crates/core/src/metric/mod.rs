// SPDX-License-Identifier: MIT
//! String metrics: f̄ through longest common subsequences, the approximate
//! variant f̃, the distance to cyclic names, and certified bounds for words
//! too long to materialise.

pub mod bounds;
pub mod cyclic;
pub mod ftilde;
pub mod lcs;
pub mod oracle;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rational::{ratio, Q};

pub use bounds::{fbar_bounds, FbarBounds, LcsEngine, LeafModel, UnitLeaves};
pub use cyclic::{fbar_to_cyclic, CyclicDistance};
pub use oracle::OracleMode;

/// Symbol identifier. Spacers use the two largest values.
pub type Sym = u32;
pub const SPACER_B: Sym = u32::MAX - 1;
pub const SPACER_E: Sym = u32::MAX;

pub fn is_spacer(s: Sym) -> bool {
    s >= SPACER_B
}

/// A concrete word over `{0, …, alphabet_size−1} ∪ {b, e}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolString {
    symbols: Vec<Sym>,
    alphabet_size: u32,
}

impl SymbolString {
    pub fn new(symbols: Vec<Sym>, alphabet_size: u32) -> Result<Self> {
        if let Some(bad) = symbols.iter().find(|&&s| !is_spacer(s) && s >= alphabet_size) {
            return domain(format!("symbol {bad} outside alphabet of size {alphabet_size}"));
        }
        Ok(SymbolString { symbols, alphabet_size })
    }

    /// Bytes as symbols over a 256-letter alphabet; handy for literals such as `"11000"`.
    pub fn from_bytes(s: &str) -> Self {
        SymbolString { symbols: s.bytes().map(Sym::from).collect(), alphabet_size: 256 }
    }

    pub fn symbols(&self) -> &[Sym] {
        &self.symbols
    }

    pub fn alphabet_size(&self) -> u32 {
        self.alphabet_size
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn into_symbols(self) -> Vec<Sym> {
        self.symbols
    }
}

/// A metric value with the matching that produced it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    #[serde(with = "crate::rational::serde_q")]
    pub value: Q,
    pub match_size: BigUint,
    pub witness: Option<Vec<(usize, usize)>>,
    pub exact: bool,
}

/// `max(0, 1 − 2·size/total)`.
pub fn value_from_size(size: &BigUint, total: &BigUint) -> Q {
    let v = Q::one() - ratio(&(size * 2u32), total);
    if v < Q::zero() {
        Q::zero()
    } else {
        v
    }
}

/// Above this many table cells a witness is refused rather than silently dropped.
pub const WITNESS_CELL_CAP: usize = 50_000_000;
/// Cell cap for the quadratic f̃ program.
pub const FTILDE_CELL_CAP: usize = 400_000_000;

/// Exact LCS through whichever exact kernel is cheapest for the pair.
pub fn lcs_exact(a: &[Sym], b: &[Sym]) -> usize {
    let bp = lcs::bitparallel_cost(a.len() as u64, b.len() as u64);
    let ra = lcs::runs(a);
    let rb = lcs::runs(b);
    let rle_a = lcs::rle_cost(b.len() as u64, ra.len() as u64);
    let rle_b = lcs::rle_cost(a.len() as u64, rb.len() as u64);
    if rle_b.min(rle_a) < bp / 4 {
        if rle_b <= rle_a {
            lcs::lcs_rle(a, &rb) as usize
        } else {
            lcs::lcs_rle(b, &ra) as usize
        }
    } else {
        lcs::lcs_bitparallel(a, b)
    }
}

/// `f̄(a, b) = 1 − 2·LCS(a,b)/(|a|+|b|)`.
pub fn fbar(a: &SymbolString, b: &SymbolString, want_witness: bool) -> Result<MatchResult> {
    if a.is_empty() || b.is_empty() {
        return domain("f-bar needs non-empty strings");
    }
    let total = BigUint::from(a.len() + b.len());
    let (size, witness) = if want_witness {
        if a.len().saturating_mul(b.len()) > WITNESS_CELL_CAP {
            return Err(Error::Budget(format!(
                "witness table of {}x{} cells exceeds {WITNESS_CELL_CAP}",
                a.len(),
                b.len()
            )));
        }
        let w = lcs::lcs_witness(a.symbols(), b.symbols());
        (w.len(), Some(w))
    } else {
        (lcs_exact(a.symbols(), b.symbols()), None)
    };
    let size = BigUint::from(size);
    Ok(MatchResult { value: value_from_size(&size, &total), match_size: size, witness, exact: true })
}

/// `f̃(a, b)` from the largest approximate match.
pub fn ftilde(a: &SymbolString, b: &SymbolString) -> Result<MatchResult> {
    if a.is_empty() || b.is_empty() {
        return domain("f-tilde needs non-empty strings");
    }
    if a.len().saturating_mul(b.len()) > FTILDE_CELL_CAP {
        return Err(Error::Budget(format!(
            "f-tilde over {}x{} cells exceeds {FTILDE_CELL_CAP}",
            a.len(),
            b.len()
        )));
    }
    let size = BigUint::from(ftilde::approx_match_size(a.symbols(), b.symbols()));
    let total = BigUint::from(a.len() + b.len());
    Ok(MatchResult { value: value_from_size(&size, &total), match_size: size, witness: None, exact: true })
}

/// Exhaustive reference over all (approximate) matches; only for tiny inputs.
pub fn oracle_bruteforce(a: &SymbolString, b: &SymbolString, mode: OracleMode) -> Result<MatchResult> {
    if a.is_empty() || b.is_empty() {
        return domain("oracle needs non-empty strings");
    }
    if a.len() + b.len() > oracle::ORACLE_CAP {
        return domain(format!("oracle limited to combined length {}", oracle::ORACLE_CAP));
    }
    let size = BigUint::from(oracle::oracle_size(a.symbols(), b.symbols(), mode));
    let total = BigUint::from(a.len() + b.len());
    Ok(MatchResult { value: value_from_size(&size, &total), match_size: size, witness: None, exact: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn s(x: &str) -> SymbolString {
        SymbolString::from_bytes(x)
    }

    #[test]
    fn listed_values() {
        assert_eq!(fbar(&s("ab"), &s("ab"), false).unwrap().value, Q::zero());
        assert_eq!(fbar(&s("11000"), &s("11100"), true).unwrap().value, q(1, 5));
        assert_eq!(fbar(&s("aaaa"), &s("bbbb"), false).unwrap().value, Q::one());
        assert_eq!(fbar(&s("a"), &s("aaa"), false).unwrap().value, q(1, 2));
        assert_eq!(ftilde(&s("11000"), &s("11100")).unwrap().value, Q::zero());
        assert_eq!(ftilde(&s("aaaa"), &s("bbbb")).unwrap().value, Q::one());
        assert_eq!(oracle_bruteforce(&s("11000"), &s("11100"), OracleMode::Exact).unwrap().value, q(1, 5));
        assert_eq!(oracle_bruteforce(&s("11000"), &s("11100"), OracleMode::Approximate).unwrap().value, Q::zero());
        assert_eq!(oracle_bruteforce(&s("a"), &s("b"), OracleMode::Exact).unwrap().value, Q::one());
    }

    #[test]
    fn errors() {
        assert!(fbar(&s(""), &s("a"), false).is_err());
        assert!(ftilde(&s("a"), &s("")).is_err());
        let long = "a".repeat(13);
        assert!(oracle_bruteforce(&s(&long), &s(&long), OracleMode::Exact).is_err());
        assert!(SymbolString::new(vec![3], 3).is_err());
        assert!(SymbolString::new(vec![SPACER_B, 2], 3).is_ok());
    }

    #[test]
    fn cyclic_examples() {
        let half = q(1, 2);
        match fbar_to_cyclic(&s("ab"), &s("ba"), &half).unwrap() {
            CyclicDistance::Value { result, .. } => assert_eq!(result.value, Q::zero()),
            other => panic!("{other:?}"),
        }
        assert_eq!(fbar_to_cyclic(&s("aa"), &s("bb"), &half).unwrap(), CyclicDistance::AtLeast(half.clone()));
        match fbar_to_cyclic(&s("aab"), &s("ab"), &half).unwrap() {
            CyclicDistance::Value { result, length, .. } => {
                assert_eq!(result.value, q(1, 7));
                assert_eq!(length, 4);
            }
            other => panic!("{other:?}"),
        }
        assert!(fbar_to_cyclic(&s("ab"), &s("ab"), &q(2, 3)).is_err());
    }
}
