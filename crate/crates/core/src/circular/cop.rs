// SPDX-License-Identifier: MIT
//! The C-operators and the parse of circular words into subsections.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use super::params::CircularParams;
use crate::error::{domain, parse_err, Error, Result};
use crate::metric::{Sym, SPACER_B, SPACER_E};
use crate::words::{WordExpr, WordRef};

/// Largest number of 1-subsections `c_op` builds eagerly.
pub const C_OP_NODE_CAP: u64 = 20_000_000;

fn spacer_run(s: Sym, k: &BigUint) -> Option<WordRef> {
    (!k.is_zero()).then(|| WordExpr::power(WordExpr::atom(s), k.clone()))
}

/// One 1-subsection `b^{q−j} w^{l−1} e^{j}`, with the repeated block given.
fn one_subsection(q: &BigUint, j: &BigUint, body: &WordRef) -> Vec<WordRef> {
    let mut v = Vec::with_capacity(3);
    v.extend(spacer_run(SPACER_B, &(q - j)));
    v.push(body.clone());
    v.extend(spacer_run(SPACER_E, j));
    v
}

fn check_level(params: &CircularParams, n: usize) -> Result<()> {
    if n >= params.k.len() {
        return domain(format!("level {n} has no coefficients"));
    }
    if params.l[n] < BigUint::from(2u32) {
        return domain("l_n must be at least 2 for a C-operator image");
    }
    Ok(())
}

/// `C_n(w_0, …, w_{k_n−1}) = ∏_{i<q_n} ∏_{j<k_n} b^{q_n−j_i} w_j^{l_n−1} e^{j_i}`.
pub fn c_op(params: &CircularParams, n: usize, prewords: &[WordRef]) -> Result<WordRef> {
    check_level(params, n)?;
    let k = params.k[n].to_usize().unwrap_or(usize::MAX);
    if prewords.len() != k {
        return domain(format!("C_{n} takes k_{n} = {} words, got {}", params.k[n], prewords.len()));
    }
    let q = &params.q[n];
    if let Some(bad) = prewords.iter().position(|w| w.len() != q) {
        return domain(format!("preword {bad} has length {} instead of q_{n} = {q}", prewords[bad].len()));
    }
    let qn = q.to_u64().filter(|&x| x.saturating_mul(k as u64) <= C_OP_NODE_CAP);
    let Some(qn) = qn else {
        return Err(Error::Budget(format!("C_{n} with q_{n} = {q} and k_{n} = {k} is too large to build")));
    };
    let bodies: Vec<WordRef> = prewords.iter().map(|w| WordExpr::power(w.clone(), &params.l[n] - 1u32)).collect();
    let inv = params.p_inverse(n)?;
    let mut parts = Vec::with_capacity((qn as usize) * k * 3);
    for i in 0..qn {
        let j = (&inv * BigUint::from(i)) % q;
        for b in &bodies {
            parts.extend(one_subsection(q, &j, b));
        }
    }
    Ok(WordExpr::concat(parts))
}

/// `C_{n,i}(w_s … w_t) = ∏_j b^{q_n−j_i} w_j^{l_n−1} e^{j_i}` over the given (already circular) words.
pub fn c_op_substring(params: &CircularParams, n: usize, i: &BigUint, words: &[WordRef]) -> Result<WordRef> {
    check_level(params, n)?;
    if words.is_empty() {
        return domain("empty word range");
    }
    let j = params.j_at(n, i)?;
    let q = &params.q[n];
    let mut parts = Vec::with_capacity(words.len() * 3);
    for w in words {
        if w.len() != q {
            return domain(format!("word has length {} instead of q_{n} = {q}", w.len()));
        }
        parts.extend(one_subsection(q, &j, &WordExpr::power(w.clone(), &params.l[n] - 1u32)));
    }
    Ok(WordExpr::concat(parts))
}

/// A parsed 1-subsection: `b^{b_run} (zero)^{reps} e^{e_run}`.
#[derive(Clone, Debug, Serialize)]
pub struct OneSubsection {
    pub offset: u64,
    pub b_run: u64,
    pub e_run: u64,
    pub reps: u64,
    #[serde(skip)]
    pub zero: Vec<Sym>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TwoSubsection {
    pub i: u64,
    pub j: u64,
    pub ones: Vec<OneSubsection>,
}

/// Decomposition of a level-`(n+1)` circular word.
#[derive(Clone, Debug, Serialize)]
pub struct SubsectionTree {
    pub n: usize,
    pub twos: Vec<TwoSubsection>,
    /// The prewords `w_0 … w_{k_n−1}`, read from the first 2-subsection.
    #[serde(skip)]
    pub prewords: Vec<Vec<Sym>>,
}

impl SubsectionTree {
    /// Spacers introduced at this level (outside the repeated blocks).
    pub fn new_spacers(&self) -> u64 {
        self.twos.iter().flat_map(|t| &t.ones).map(|o| o.b_run + o.e_run).sum()
    }

    pub fn reassemble(&self) -> Vec<Sym> {
        let mut out = Vec::new();
        for t in &self.twos {
            for o in &t.ones {
                out.extend(std::iter::repeat_n(SPACER_B, o.b_run as usize));
                for _ in 0..o.reps {
                    out.extend_from_slice(&o.zero);
                }
                out.extend(std::iter::repeat_n(SPACER_E, o.e_run as usize));
            }
        }
        out
    }
}

/// Largest word `parse_subsections` materialises.
pub const PARSE_CAP: usize = 1 << 26;

/// Splits a level-`(n+1)` circular word into its 2-, 1- and 0-subsections, checking every position.
pub fn parse_subsections(params: &CircularParams, level: usize, word: &WordRef) -> Result<SubsectionTree> {
    if level == 0 {
        return domain("level-0 words have no subsections");
    }
    let n = level - 1;
    check_level(params, n)?;
    let expected = &params.q[level];
    if word.len() != expected {
        return parse_err(0u32, format!("length {} but q_{level} = {expected}", word.len()));
    }
    let w = word.materialize(PARSE_CAP)?;
    let q = params.q[n].to_usize().expect("small");
    let k = params.k[n].to_usize().expect("small");
    let l = params.l[n].to_usize().expect("small");
    let profile = super::params::spacer_profile(params, n)?;
    let mut twos = Vec::with_capacity(q);
    let mut prewords: Vec<Vec<Sym>> = Vec::with_capacity(k);
    let mut pos = 0usize;
    for (i, j) in profile.iter().enumerate() {
        let j = j.to_usize().expect("j < q");
        let mut ones = Vec::with_capacity(k);
        for jj in 0..k {
            let start = pos;
            let bl = q - j;
            if let Some(off) = (pos..pos + bl).find(|&t| w[t] != SPACER_B) {
                return parse_err(off as u64, format!("expected b (2-subsection {i}, 1-subsection {jj})"));
            }
            pos += bl;
            let body = &w[pos..pos + (l - 1) * q];
            if let Some(t) = (q..body.len()).find(|&t| body[t] != body[t - q]) {
                return parse_err((pos + t) as u64, "repetition breaks inside a 0-subsection run");
            }
            let zero = body[..q].to_vec();
            if i == 0 {
                prewords.push(zero.clone());
            } else if let Some(t) = (0..q).find(|&t| zero[t] != prewords[jj][t]) {
                return parse_err((pos + t) as u64, format!("block {jj} differs from its first 2-subsection copy"));
            }
            pos += (l - 1) * q;
            if let Some(off) = (pos..pos + j).find(|&t| w[t] != SPACER_E) {
                return parse_err(off as u64, format!("expected e (2-subsection {i}, 1-subsection {jj})"));
            }
            pos += j;
            ones.push(OneSubsection { offset: start as u64, b_run: bl as u64, e_run: j as u64, reps: (l - 1) as u64, zero });
        }
        twos.push(TwoSubsection { i: i as u64, j: j as u64, ones });
    }
    Ok(SubsectionTree { n, twos, prewords })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circular::params::{derive_params, CircularCoefficients};

    fn params() -> CircularParams {
        derive_params(&CircularCoefficients::new(&[2, 2], &[3, 3], 1), 2).unwrap()
    }

    #[test]
    fn level_zero_example() {
        let p = params();
        let w = c_op(&p, 0, &[WordExpr::atom(0), WordExpr::atom(1)]).unwrap();
        assert_eq!(w.materialize(100).unwrap(), vec![SPACER_B, 0, 0, SPACER_B, 1, 1]);
        let t = parse_subsections(&p, 1, &w).unwrap();
        assert_eq!(t.twos.len(), 1);
        assert_eq!(t.twos[0].ones.len(), 2);
        assert_eq!(t.prewords, vec![vec![0], vec![1]]);
        assert_eq!(t.reassemble(), w.materialize(100).unwrap());
        let s = c_op_substring(&p, 0, &BigUint::zero(), &[WordExpr::atom(0)]).unwrap();
        assert_eq!(s.materialize(10).unwrap(), vec![SPACER_B, 0, 0]);
        assert!(c_op_substring(&p, 0, &BigUint::zero(), &[]).is_err());
    }

    #[test]
    fn level_one_lengths() {
        let p = params();
        let x = c_op(&p, 0, &[WordExpr::atom(0), WordExpr::atom(1)]).unwrap();
        let y = c_op(&p, 0, &[WordExpr::atom(1), WordExpr::atom(0)]).unwrap();
        let w = c_op(&p, 1, &[x, y]).unwrap();
        assert_eq!(w.len(), &BigUint::from(216u32));
        let t = parse_subsections(&p, 2, &w).unwrap();
        assert!(t.twos.iter().flat_map(|t| &t.ones).all(|o| o.b_run + o.e_run + o.reps * 6 == 18));
        assert_eq!(t.reassemble(), w.materialize(1000).unwrap());
    }

    #[test]
    fn corrupted_spacer_reports_offset() {
        let p = params();
        let mut v = c_op(&p, 0, &[WordExpr::atom(0), WordExpr::atom(1)]).unwrap().materialize(10).unwrap();
        v[3] = SPACER_E;
        let w = WordExpr::from_symbols(&v).unwrap();
        match parse_subsections(&p, 1, &w) {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, BigUint::from(3u32)),
            other => panic!("{other:?}"),
        }
    }
}
