// SPDX-License-Identifier: MIT
//! The functor from odometer-based to circular construction sequences.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use super::cop::{c_op, parse_subsections};
use super::params::{derive_params, CircularCoefficients, CircularParams};
use crate::error::{domain, parse_err, Result};
use crate::words::{ConstructionSequence, SequenceKind, WordExpr, WordRef};

/// Level `n` of the correspondence `w ↦ c_n(w)`.
#[derive(Clone, Debug)]
pub struct FunctorLevel {
    pub odometer: Vec<WordRef>,
    pub circular: Vec<WordRef>,
    index: HashMap<WordRef, usize>,
}

impl FunctorLevel {
    fn new(odometer: Vec<WordRef>, circular: Vec<WordRef>) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, c) in circular.iter().enumerate() {
            if index.insert(c.clone(), i).is_some() {
                return domain("circular images collide; the map would not be a bijection");
            }
        }
        Ok(FunctorLevel { odometer, circular, index })
    }

    /// Index of a circular word, matched by structure or else by content.
    pub fn lookup(&self, circular: &WordRef) -> Option<usize> {
        if let Some(&i) = self.index.get(circular) {
            return Some(i);
        }
        let target = circular.materialize(PARSE_CAP).ok()?;
        self.circular.iter().position(|c| c.len() == circular.len() && c.materialize(PARSE_CAP).is_ok_and(|m| m == target))
    }
}

#[derive(Clone, Debug)]
pub struct FunctorMap {
    pub params: CircularParams,
    pub levels: Vec<FunctorLevel>,
}

/// Builds the circular sequence level by level from an odometer sequence of one-symbol base words.
pub fn functor_apply(odo: &ConstructionSequence, coeffs: &CircularCoefficients) -> Result<(ConstructionSequence, FunctorMap)> {
    if odo.kind != SequenceKind::Odometer {
        return domain("functor input must be odometer-based");
    }
    let top = odo.top();
    let params = derive_params(coeffs, top)?;
    for n in 0..top {
        if odo.coefficients[n] != params.k[n] {
            return domain(format!("odometer k_{n} = {} but coefficients give {}", odo.coefficients[n], params.k[n]));
        }
    }
    let base = &odo.levels[0];
    if base.length != BigUint::from(1u32) {
        return domain("level-0 words must be single symbols");
    }
    let mut circ = ConstructionSequence::new(odo.alphabet_size, SequenceKind::Circular, base.words.clone())?;
    let mut levels = vec![FunctorLevel::new(base.words.clone(), base.words.clone())?];
    for n in 0..top {
        let upper = &odo.levels[n + 1];
        let layouts = upper.layouts.as_ref().expect("odometer levels above 0 carry layouts");
        let prev = &levels[n].circular;
        let mut images = Vec::with_capacity(layouts.len());
        for lay in layouts {
            let ids = lay.materialize(1 << 24)?;
            let pre: Vec<WordRef> = ids.iter().map(|&i| prev[i as usize].clone()).collect();
            images.push(c_op(&params, n, &pre)?);
        }
        circ.push_level(images.clone(), layouts.clone(), params.k[n].clone())?;
        levels.push(FunctorLevel::new(upper.words.clone(), images)?);
    }
    Ok((circ, FunctorMap { params, levels }))
}

const PARSE_CAP: usize = 1 << 26;

/// Recovers the odometer word whose image is `word` at level `n`.
///
/// Above level 0 the word is parsed into subsections, each preword is mapped back
/// one level down, and the odometer word is reassembled; the result is then
/// checked against the recorded bijection.
pub fn functor_invert(fmap: &FunctorMap, word: &WordRef, n: usize) -> Result<WordRef> {
    let Some(level) = fmap.levels.get(n) else {
        return domain(format!("no level {n} in the functor map"));
    };
    if n == 0 {
        return match level.lookup(word) {
            Some(i) => Ok(level.odometer[i].clone()),
            None => parse_err(0u32, "symbol not in level 0"),
        };
    }
    let tree = parse_subsections(&fmap.params, n, word)?;
    let below = &fmap.levels[n - 1];
    let mut parts = Vec::with_capacity(tree.prewords.len());
    for (j, pw) in tree.prewords.iter().enumerate() {
        let w = WordExpr::from_symbols(pw)?;
        let Some(i) = below.lookup(&w) else {
            let off = tree.twos[0].ones[j].offset + tree.twos[0].ones[j].b_run;
            return parse_err(off, format!("preword {j} is not a level-{} circular word", n - 1));
        };
        parts.push(below.odometer[i].clone());
    }
    let odo = WordExpr::concat(parts);
    // the recorded word may be built with a different tree shape, so compare contents
    let same = |w: &WordRef| -> Result<bool> { Ok(*w == odo || w.materialize(PARSE_CAP)? == odo.materialize(PARSE_CAP)?) };
    match level.lookup(word) {
        Some(i) if same(&level.odometer[i])? => Ok(level.odometer[i].clone()),
        _ => parse_err(0u32, format!("word parses but is not in the level-{n} image")),
    }
}

/// Fraction of symbols introduced as spacers by the top C-operator, from a parse.
pub fn new_spacer_fraction(params: &CircularParams, level: usize, word: &WordRef) -> Result<num_rational::BigRational> {
    let t = parse_subsections(params, level, word)?;
    let total = word.len().to_u64().expect("parsed words are small");
    Ok(crate::rational::q(t.new_spacers() as i64, total as i64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::SPACER_B;
    use crate::words::{layout, symbol_level};

    #[test]
    fn one_symbol_alphabet() {
        let mut odo = ConstructionSequence::new(1, SequenceKind::Odometer, symbol_level(1)).unwrap();
        odo.push_odometer_level(vec![layout(&[0, 0])]).unwrap();
        let (circ, fmap) = functor_apply(&odo, &CircularCoefficients::new(&[2], &[3], 1)).unwrap();
        let w = &circ.levels[1].words[0];
        assert_eq!(w.materialize(10).unwrap(), vec![SPACER_B, 0, 0, SPACER_B, 0, 0]);
        let back = functor_invert(&fmap, w, 1).unwrap();
        assert_eq!(back.materialize(10).unwrap(), vec![0, 0]);
        let bad = WordExpr::from_symbols(&[SPACER_B, 0, 0, SPACER_B, 0, SPACER_B]).unwrap();
        assert!(functor_invert(&fmap, &bad, 1).is_err());
    }
}
