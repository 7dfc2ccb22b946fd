// SPDX-License-Identifier: MIT
//! Construction sequences: nested word collections built level by level.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_traits::Zero;
use serde::Serialize;

use super::expr::{WordExpr, WordRef};
use crate::error::{domain, parse_err, Error, Result};
use crate::metric::{is_spacer, Sym};
use crate::rational::{ratio, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SequenceKind {
    Odometer,
    Circular,
}

/// One level: its words as symbols, and (above level 0) as layouts over the previous level's word indices.
#[derive(Clone, Debug)]
pub struct Level {
    pub words: Vec<WordRef>,
    pub layouts: Option<Vec<WordRef>>,
    pub length: BigUint,
}

#[derive(Clone, Debug)]
pub struct ConstructionSequence {
    pub alphabet_size: u32,
    pub kind: SequenceKind,
    /// `k_n`: number of level-`n` words per level-`(n+1)` word.
    pub coefficients: Vec<BigUint>,
    pub levels: Vec<Level>,
}

impl ConstructionSequence {
    /// Level 0 holds the given words (usually single symbols).
    pub fn new(alphabet_size: u32, kind: SequenceKind, base: Vec<WordRef>) -> Result<Self> {
        if base.is_empty() {
            return domain("level 0 needs at least one word");
        }
        let length = base[0].len().clone();
        if base.iter().any(|w| w.len() != &length) {
            return domain("level-0 words differ in length");
        }
        Ok(ConstructionSequence {
            alphabet_size,
            kind,
            coefficients: Vec::new(),
            levels: vec![Level { words: base, layouts: None, length }],
        })
    }

    pub fn top(&self) -> usize {
        self.levels.len() - 1
    }

    /// Appends an odometer level from layouts over the current top level.
    pub fn push_odometer_level(&mut self, layouts: Vec<WordRef>) -> Result<()> {
        let prev = self.levels.last().expect("level 0 exists");
        let n_prev = prev.words.len() as u32;
        if layouts.is_empty() {
            return domain("a level needs at least one word");
        }
        let k = layouts[0].len().clone();
        if layouts.iter().any(|l| l.len() != &k) {
            return domain("layouts of one level differ in length");
        }
        for l in &layouts {
            if let Some(bad) = l.atoms().into_iter().find(|&s| s >= n_prev) {
                return domain(format!("layout refers to word {bad} but the level has {n_prev}"));
            }
        }
        let prev_words = prev.words.clone();
        let mut memo = HashMap::new();
        let words: Vec<WordRef> =
            layouts.iter().map(|l| l.substitute_memo(&mut |s| prev_words[s as usize].clone(), &mut memo)).collect();
        let length = &prev.length * &k;
        self.coefficients.push(k);
        self.levels.push(Level { words, layouts: Some(layouts), length });
        Ok(())
    }

    /// Appends a level with precomputed symbol words (e.g. circular images) and layouts.
    pub fn push_level(&mut self, words: Vec<WordRef>, layouts: Vec<WordRef>, k: BigUint) -> Result<()> {
        if words.len() != layouts.len() || words.is_empty() {
            return domain("words and layouts must pair up");
        }
        let length = words[0].len().clone();
        if words.iter().any(|w| w.len() != &length) {
            return domain("words of one level differ in length");
        }
        self.coefficients.push(k);
        self.levels.push(Level { words, layouts: Some(layouts), length });
        Ok(())
    }

    /// `h_n = ∏ k_i` holds at every odometer level.
    pub fn lengths_consistent(&self) -> bool {
        if self.kind != SequenceKind::Odometer {
            return true;
        }
        let mut h = self.levels[0].length.clone();
        for (n, lev) in self.levels.iter().enumerate().skip(1) {
            h *= &self.coefficients[n - 1];
            if lev.length != h || lev.words.iter().any(|w| w.len() != &h) {
                return false;
            }
        }
        true
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct UniformityReport {
    pub uniform: bool,
    /// The common count, when uniform.
    pub count: Option<String>,
    /// `table[j][i]`: occurrences of lower word `i` in upper word `j`.
    pub table: Vec<Vec<String>>,
}

/// Block-aligned occurrence counts of `lower_count` word ids in each layout.
pub fn uniformity_of_layouts(layouts: &[WordRef], lower_count: usize) -> UniformityReport {
    let mut table = Vec::new();
    let mut common: Option<BigUint> = None;
    let mut uniform = true;
    for l in layouts {
        let counts: BTreeMap<Sym, BigUint> = l.symbol_counts();
        let row: Vec<BigUint> = (0..lower_count as Sym).map(|i| counts.get(&i).cloned().unwrap_or_default()).collect();
        for c in &row {
            match &common {
                None => common = Some(c.clone()),
                Some(v) if v != c => uniform = false,
                _ => {}
            }
        }
        if counts.keys().any(|&s| s as usize >= lower_count) {
            uniform = false;
        }
        table.push(row.iter().map(|c| c.to_string()).collect());
    }
    let uniform = uniform && common.as_ref().is_some_and(|c| !c.is_zero());
    UniformityReport { uniform, count: if uniform { common.map(|c| c.to_string()) } else { None }, table }
}

/// Uniformity of level `n+1` over level `n`.
pub fn validate_uniformity(seq: &ConstructionSequence, n: usize) -> Result<UniformityReport> {
    let (Some(lower), Some(upper)) = (seq.levels.get(n), seq.levels.get(n + 1)) else {
        return domain(format!("levels {n} and {} are not both present", n + 1));
    };
    let layouts = upper.layouts.as_ref().ok_or_else(|| Error::Domain("upper level has no layouts".into()))?;
    Ok(uniformity_of_layouts(layouts, lower.words.len()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Segment {
    Spacer(Vec<Sym>),
    Word(usize),
}

#[derive(Clone, Debug, Serialize)]
pub struct ParseResult {
    pub segments: Vec<Segment>,
    #[serde(with = "crate::rational::serde_q")]
    pub spacer_fraction: Q,
    pub word_count: usize,
}

impl ParseResult {
    pub fn spacers_empty(&self) -> bool {
        self.segments.iter().all(|s| !matches!(s, Segment::Spacer(v) if !v.is_empty()))
    }
}

/// Largest word parsed by materialisation.
pub const PARSE_LEN_CAP: usize = 1 << 24;

/// Splits `word` into spacer runs and words of `lower`, insisting on a unique reading.
pub fn parse_level(word: &WordRef, lower: &[WordRef]) -> Result<ParseResult> {
    let w = word.materialize(PARSE_LEN_CAP)?;
    let lows: Vec<Vec<Sym>> = lower.iter().map(|l| l.materialize(PARSE_LEN_CAP)).collect::<Result<_>>()?;
    let mut segments = Vec::new();
    let mut spacer = Vec::new();
    let mut spacers = 0usize;
    let mut i = 0;
    let mut words = 0;
    while i < w.len() {
        if is_spacer(w[i]) {
            spacer.push(w[i]);
            spacers += 1;
            i += 1;
            continue;
        }
        let hits: Vec<usize> = lows.iter().enumerate().filter(|(_, l)| w[i..].starts_with(l)).map(|(k, _)| k).collect();
        match hits.as_slice() {
            [] => return parse_err(BigUint::from(i), "no level word starts here"),
            [k] => {
                segments.push(Segment::Spacer(std::mem::take(&mut spacer)));
                segments.push(Segment::Word(*k));
                i += lows[*k].len();
                words += 1;
            }
            _ => return Err(Error::Readability(format!("several level words start at offset {i}: {hits:?}"))),
        }
    }
    segments.push(Segment::Spacer(spacer));
    let spacer_fraction = ratio(&BigUint::from(spacers), &BigUint::from(w.len().max(1)));
    Ok(ParseResult { segments, spacer_fraction, word_count: words })
}

/// Rebuilds the word a parse describes.
pub fn reassemble(p: &ParseResult, lower: &[WordRef]) -> Result<WordRef> {
    let mut parts = Vec::new();
    for s in &p.segments {
        match s {
            Segment::Spacer(v) => parts.extend(v.iter().map(|&x| WordExpr::atom(x))),
            Segment::Word(k) => parts.push(lower[*k].clone()),
        }
    }
    if parts.is_empty() {
        return domain("empty parse");
    }
    Ok(WordExpr::concat(parts))
}

/// Convenience: one-symbol-per-word level 0 over `0..n`.
pub fn symbol_level(n: u32) -> Vec<WordRef> {
    (0..n).map(WordExpr::atom).collect()
}

/// A layout from a list of word ids.
pub fn layout(ids: &[Sym]) -> WordRef {
    WordExpr::from_symbols(ids).expect("non-empty layout")
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::SPACER_B;
    use crate::rational::q;

    #[test]
    fn uniformity_examples() {
        let r = uniformity_of_layouts(&[layout(&[0, 1]), layout(&[1, 0])], 2);
        assert!(r.uniform);
        assert_eq!(r.count.as_deref(), Some("1"));
        let r = uniformity_of_layouts(&[layout(&[0, 0]), layout(&[0, 1])], 2);
        assert!(!r.uniform);
    }

    #[test]
    fn odometer_levels_parse_without_spacers() {
        let mut seq = ConstructionSequence::new(2, SequenceKind::Odometer, symbol_level(2)).unwrap();
        seq.push_odometer_level(vec![layout(&[0, 1, 1]), layout(&[1, 0, 0])]).unwrap();
        seq.push_odometer_level(vec![layout(&[0, 1]), layout(&[1, 0])]).unwrap();
        assert!(seq.lengths_consistent());
        let top = &seq.levels[2];
        let p = parse_level(&top.words[0], &seq.levels[1].words).unwrap();
        assert_eq!(p.word_count, 2);
        assert!(p.spacers_empty());
        assert_eq!(reassemble(&p, &seq.levels[1].words).unwrap(), top.words[0]);
        assert!(validate_uniformity(&seq, 1).unwrap().uniform);
    }

    #[test]
    fn spacer_fraction_of_small_circular_word() {
        let x = WordExpr::atom(0);
        let y = WordExpr::atom(1);
        let b = WordExpr::atom(SPACER_B);
        let w = WordExpr::concat([b.clone(), x.clone(), x.clone(), b, y.clone(), y.clone()]);
        let p = parse_level(&w, &[x, y]).unwrap();
        assert_eq!(p.spacer_fraction, q(2, 6));
        assert_eq!(p.word_count, 4);
        assert!(parse_level(&layout(&[2]), &[WordExpr::atom(0)]).is_err());
    }
}
