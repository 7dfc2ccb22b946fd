// SPDX-License-Identifier: MIT
//! Feldman patterns: `B_j = (a_1^{N^{2j}} … a_N^{N^{2j}})^{N^{2M−2j+2}}`, their
//! block-substituted versions, and the marker-terminated variant.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Pow};
use serde::Serialize;

use crate::error::{domain, Result};
use crate::metric::Sym;
use crate::words::{WordExpr, WordRef};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PatternSpec {
    /// Number of building blocks.
    pub n: u32,
    /// Number of patterns.
    pub m: u32,
    /// Blocks per building string (1 for symbols).
    pub k: u32,
}

impl PatternSpec {
    pub fn new(n: u32, m: u32, k: u32) -> Result<Self> {
        if n < 2 || m < 2 || k < 1 {
            return domain(format!("pattern spec needs N ≥ 2, M ≥ 2, K ≥ 1 (got N={n}, M={m}, K={k})"));
        }
        Ok(PatternSpec { n, m, k })
    }

    fn pow(&self, e: u32) -> BigUint {
        BigUint::from(self.n).pow(e)
    }
}

/// Exponent schedule of one pattern: `(inner)^{outer}`, with `inner` a list of `(block index, exponent)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PatternSchedule {
    pub inner: Vec<(u32, BigUint)>,
    pub outer: BigUint,
    /// Trailing `(block index, exponent)` runs after the repeated part (marker patterns only).
    pub tail: Vec<(u32, BigUint)>,
}

/// A generated pattern family.
#[derive(Clone, Debug)]
pub struct PatternFamily {
    /// Patterns as layouts over the building-block indices.
    pub layouts: Vec<WordRef>,
    /// Patterns with the building blocks substituted.
    pub words: Vec<WordRef>,
    pub schedules: Vec<PatternSchedule>,
    pub lemma_hypotheses_met: bool,
    /// Substring length from which the separation statement is meant to apply.
    pub substring_threshold: BigUint,
}

fn runs_word(runs: &[(u32, BigUint)]) -> WordRef {
    WordExpr::concat(runs.iter().map(|(s, e)| WordExpr::power(WordExpr::atom(*s), e.clone())))
}

/// Layouts `B_1 … B_M` over building-block indices `0 … N−1`.
pub fn pattern_layouts(spec: &PatternSpec) -> (Vec<WordRef>, Vec<PatternSchedule>) {
    let mut layouts = Vec::new();
    let mut scheds = Vec::new();
    for j in 1..=spec.m {
        let inner: Vec<(u32, BigUint)> = (0..spec.n).map(|i| (i, spec.pow(2 * j))).collect();
        let outer = spec.pow(2 * spec.m - 2 * j + 2);
        layouts.push(WordExpr::power(runs_word(&inner), outer.clone()));
        scheds.push(PatternSchedule { inner, outer, tail: Vec::new() });
    }
    (layouts, scheds)
}

fn substitute_all(layouts: &[WordRef], blocks: &[WordRef]) -> Vec<WordRef> {
    let mut memo = HashMap::new();
    layouts.iter().map(|l| l.substitute_memo(&mut |s| blocks[s as usize].clone(), &mut memo)).collect()
}

/// Patterns over `N` distinct symbols.
pub fn symbolic_patterns(spec: &PatternSpec, symbols: &[Sym]) -> Result<PatternFamily> {
    if symbols.len() != spec.n as usize {
        return domain(format!("need {} symbols, got {}", spec.n, symbols.len()));
    }
    let mut seen = symbols.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != symbols.len() {
        return domain("symbols must be distinct");
    }
    let (layouts, schedules) = pattern_layouts(spec);
    let blocks: Vec<WordRef> = symbols.iter().map(|&s| WordExpr::atom(s)).collect();
    let words = substitute_all(&layouts, &blocks);
    Ok(PatternFamily {
        layouts,
        words,
        schedules,
        lemma_hypotheses_met: spec.n >= 20,
        substring_threshold: spec.pow(2 * spec.m + 2),
    })
}

/// Patterns over each family of `N` equal-length blocks; one output family per input family.
pub fn block_patterns(spec: &PatternSpec, families: &[Vec<WordRef>]) -> Result<Vec<PatternFamily>> {
    let Some(first) = families.first().and_then(|f| f.first()) else {
        return domain("no building blocks");
    };
    let len = first.len().clone();
    for (s, fam) in families.iter().enumerate() {
        if fam.len() != spec.n as usize {
            return domain(format!("family {s} has {} blocks, expected {}", fam.len(), spec.n));
        }
        if let Some(bad) = fam.iter().position(|b| b.len() != &len) {
            return domain(format!("block {bad} of family {s} has length {} instead of {len}", fam[bad].len()));
        }
    }
    let (layouts, schedules) = pattern_layouts(spec);
    Ok(families
        .iter()
        .map(|fam| PatternFamily {
            layouts: layouts.clone(),
            words: substitute_all(&layouts, fam),
            schedules: schedules.clone(),
            lemma_hypotheses_met: spec.n >= 20,
            substring_threshold: spec.pow(2 * spec.m + 2) * &len,
        })
        .collect())
}

/// Marker-terminated patterns over a marker `A_0` (index 0) and blocks `A_1 … A_N` (indices 1…N):
/// `B_k = (((A_1)^{N^{2k}} … (A_N)^{N^{2k}})^{N^{2M−2k+1}} (A_0)^{N^{2M+1}−1})^N (A_0)^N`.
pub fn marker_patterns(spec: &PatternSpec, marker: &WordRef, blocks: &[WordRef]) -> Result<PatternFamily> {
    if blocks.len() != spec.n as usize {
        return domain(format!("need {} blocks, got {}", spec.n, blocks.len()));
    }
    if blocks.iter().any(|b| b == marker) {
        return domain("marker coincides with a building block");
    }
    let len = marker.len().clone();
    if blocks.iter().any(|b| b.len() != &len) {
        return domain("marker and blocks must share one length");
    }
    let nn = BigUint::from(spec.n);
    let mut layouts = Vec::new();
    let mut schedules = Vec::new();
    for k in 1..=spec.m {
        let inner: Vec<(u32, BigUint)> = (1..=spec.n).map(|i| (i, spec.pow(2 * k))).collect();
        let rep = WordExpr::power(runs_word(&inner), spec.pow(2 * spec.m - 2 * k + 1));
        let gap = spec.pow(2 * spec.m + 1) - BigUint::one();
        let unit = WordExpr::concat([rep, WordExpr::power(WordExpr::atom(0), gap.clone())]);
        let lay = WordExpr::concat([WordExpr::power(unit, nn.clone()), WordExpr::power(WordExpr::atom(0), nn.clone())]);
        layouts.push(lay);
        schedules.push(PatternSchedule {
            inner,
            outer: spec.pow(2 * spec.m - 2 * k + 1),
            tail: vec![(0, gap), (0, nn.clone())],
        });
    }
    let mut all = vec![marker.clone()];
    all.extend(blocks.iter().cloned());
    let words = substitute_all(&layouts, &all);
    Ok(PatternFamily {
        layouts,
        words,
        schedules,
        lemma_hypotheses_met: spec.n >= 100,
        substring_threshold: spec.pow(2 * spec.m + 2) * &len,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbolic_small() {
        let spec = PatternSpec::new(2, 2, 1).unwrap();
        let f = symbolic_patterns(&spec, &[0, 1]).unwrap();
        assert_eq!(f.words[0].to_string(), "(0^4 1^4)^16");
        assert_eq!(f.words[1].to_string(), "(0^16 1^16)^4");
        assert!(f.words.iter().all(|w| w.len() == &BigUint::from(128u32)));
        assert_eq!(f.words[0].symbol_counts()[&1], BigUint::from(64u32));
        assert!(PatternSpec::new(2, 1, 1).is_err());
        assert!(symbolic_patterns(&spec, &[0, 0]).is_err());
    }

    #[test]
    fn marker_small() {
        let spec = PatternSpec::new(2, 2, 1).unwrap();
        let f = marker_patterns(&spec, &WordExpr::atom(0), &[WordExpr::atom(1), WordExpr::atom(2)]).unwrap();
        for w in &f.words {
            assert_eq!(w.len(), &BigUint::from(192u32));
            let c = w.symbol_counts();
            assert!(c.values().all(|v| v == &BigUint::from(64u32)));
        }
        let cert = crate::words::marker_certificate(&f.layouts, 0);
        assert!(cert.holds);
        assert_eq!(cert.longest_interior_run, "31");
        assert_eq!(cert.final_run, "33");
    }

    #[test]
    fn block_lengths() {
        let spec = PatternSpec::new(2, 2, 3).unwrap();
        let blocks = vec![
            WordExpr::from_symbols(&[0, 1, 2]).unwrap(),
            WordExpr::from_symbols(&[2, 1, 0]).unwrap(),
        ];
        let fams = block_patterns(&spec, &[blocks]).unwrap();
        assert!(fams[0].words.iter().all(|w| w.len() == &BigUint::from(384u32)));
        let bad = vec![WordExpr::atom(0), WordExpr::from_symbols(&[0, 1]).unwrap()];
        assert!(block_patterns(&spec, &[bad]).is_err());
    }
}
