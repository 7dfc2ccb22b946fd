// SPDX-License-Identifier: MIT
//! Unique readability: no word of a collection sits at a proper offset inside
//! the concatenation of two words of the collection.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use super::expr::{Node, WordExpr, WordRef};
use crate::metric::Sym;

/// `(u, v, w, offset)`: word `w` occurs inside `uv` at `offset`, neither at the start nor flush with the end.
pub type Violation = (usize, usize, usize, usize);

#[derive(Clone, Debug, Serialize)]
pub struct ReadabilityReport {
    pub readable: bool,
    pub method: &'static str,
    pub violations: Vec<Violation>,
}

/// Largest word length the exhaustive tier materialises.
pub const EXHAUSTIVE_LEN_CAP: usize = 10_000;

fn kmp_table(p: &[Sym]) -> Vec<usize> {
    let mut f = vec![0usize; p.len()];
    let mut k = 0;
    for i in 1..p.len() {
        while k > 0 && p[i] != p[k] {
            k = f[k - 1];
        }
        if p[i] == p[k] {
            k += 1;
        }
        f[i] = k;
    }
    f
}

/// Start offsets of every occurrence of `p` in `t`.
pub fn find_all(p: &[Sym], t: &[Sym]) -> Vec<usize> {
    if p.is_empty() || p.len() > t.len() {
        return Vec::new();
    }
    let f = kmp_table(p);
    let mut out = Vec::new();
    let mut k = 0;
    for (i, &c) in t.iter().enumerate() {
        while k > 0 && c != p[k] {
            k = f[k - 1];
        }
        if c == p[k] {
            k += 1;
        }
        if k == p.len() {
            out.push(i + 1 - p.len());
            k = f[k - 1];
        }
    }
    out
}

/// Exhaustive check over all triples of concrete words.
pub fn check_exhaustive(words: &[Vec<Sym>]) -> ReadabilityReport {
    let mut violations = Vec::new();
    let mut uv = Vec::new();
    for (iu, u) in words.iter().enumerate() {
        for (iv, v) in words.iter().enumerate() {
            uv.clear();
            uv.extend_from_slice(u);
            uv.extend_from_slice(v);
            for (iw, w) in words.iter().enumerate() {
                for off in find_all(w, &uv) {
                    if off > 0 && off + w.len() < uv.len() {
                        violations.push((iu, iv, iw, off));
                    }
                }
            }
        }
    }
    ReadabilityReport { readable: violations.is_empty(), method: "exhaustive", violations }
}

/// Exhaustive tier on lazy words; `None` when some word is too long to materialise.
pub fn validate_unique_readability(words: &[WordRef]) -> Option<ReadabilityReport> {
    let mats: Option<Vec<Vec<Sym>>> = words.iter().map(|w| w.materialize(EXHAUSTIVE_LEN_CAP).ok()).collect();
    mats.map(|m| check_exhaustive(&m))
}

/// Marker-run profile of an expression over a fixed marker atom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunProfile {
    pub len: BigUint,
    pub all_marker: bool,
    /// Marker run at the start.
    pub lead: BigUint,
    /// Marker run at the end.
    pub trail: BigUint,
    /// Longest maximal marker run touching neither end.
    pub inner: BigUint,
}

impl RunProfile {
    fn atom(is_marker: bool) -> Self {
        let one = BigUint::one();
        let z = BigUint::zero();
        if is_marker {
            RunProfile { len: one.clone(), all_marker: true, lead: one.clone(), trail: one, inner: z }
        } else {
            RunProfile { len: one, all_marker: false, lead: z.clone(), trail: z.clone(), inner: z }
        }
    }

    fn join(&self, o: &RunProfile) -> RunProfile {
        let len = &self.len + &o.len;
        match (self.all_marker, o.all_marker) {
            (true, true) => RunProfile { lead: len.clone(), trail: len.clone(), len, all_marker: true, inner: BigUint::zero() },
            (true, false) => RunProfile {
                lead: &self.len + &o.lead,
                trail: o.trail.clone(),
                inner: o.inner.clone(),
                len,
                all_marker: false,
            },
            (false, true) => RunProfile {
                lead: self.lead.clone(),
                trail: &self.trail + &o.len,
                inner: self.inner.clone(),
                len,
                all_marker: false,
            },
            (false, false) => {
                let seam = &self.trail + &o.lead;
                let inner = self.inner.clone().max(o.inner.clone()).max(seam);
                RunProfile { lead: self.lead.clone(), trail: o.trail.clone(), inner, len, all_marker: false }
            }
        }
    }

    fn pow(&self, k: &BigUint) -> RunProfile {
        if k.is_one() {
            return self.clone();
        }
        if self.all_marker {
            let len = &self.len * k;
            return RunProfile { lead: len.clone(), trail: len.clone(), len, all_marker: true, inner: BigUint::zero() };
        }
        let seam = &self.trail + &self.lead;
        RunProfile {
            len: &self.len * k,
            all_marker: false,
            lead: self.lead.clone(),
            trail: self.trail.clone(),
            inner: self.inner.clone().max(seam),
        }
    }
}

/// Structural marker-run profile, computed without unrolling powers.
pub fn run_profile(w: &WordRef, marker: Sym) -> RunProfile {
    fn go(w: &WordRef, marker: Sym, memo: &mut HashMap<*const WordExpr, (WordRef, RunProfile)>) -> RunProfile {
        if let Some((_, p)) = memo.get(&Arc::as_ptr(w)) {
            return p.clone();
        }
        let p = match w.node() {
            Node::Atom(s) => RunProfile::atom(*s == marker),
            Node::Concat(cs) => {
                let mut acc = go(&cs[0], marker, memo);
                for c in &cs[1..] {
                    acc = acc.join(&go(c, marker, memo));
                }
                acc
            }
            Node::Power(x, k) => go(x, marker, memo).pow(k),
        };
        memo.insert(Arc::as_ptr(w), (w.clone(), p.clone()));
        p
    }
    go(w, marker, &mut HashMap::new())
}

/// Marker certificate over block layouts.
#[derive(Clone, Debug, Serialize)]
pub struct MarkerCertificate {
    pub holds: bool,
    pub final_run: String,
    pub longest_interior_run: String,
    pub reasons: Vec<String>,
}

/// Certifies readability of layouts (words over lower-level block ids) from marker runs.
///
/// Conditions: equal layout lengths; every layout starts with a non-marker block and
/// ends with a marker run of one common length `L`; every other marker run is shorter
/// than `L`. Then an occurrence of a layout inside the concatenation of two others must
/// end where one of them ends, which forces a trivial offset. When the lower-level
/// blocks are themselves uniquely readable and of equal length, occurrences of the
/// substituted words are block-aligned, so the conclusion transfers to symbols.
pub fn marker_certificate(layouts: &[WordRef], marker: Sym) -> MarkerCertificate {
    let mut reasons = Vec::new();
    let profiles: Vec<RunProfile> = layouts.iter().map(|l| run_profile(l, marker)).collect();
    let Some(first) = profiles.first() else {
        return MarkerCertificate { holds: true, final_run: "0".into(), longest_interior_run: "0".into(), reasons };
    };
    let l = first.trail.clone();
    let mut longest = BigUint::zero();
    for (i, p) in profiles.iter().enumerate() {
        if p.len != first.len {
            reasons.push(format!("layout {i} has length {} instead of {}", p.len, first.len));
        }
        if p.all_marker {
            reasons.push(format!("layout {i} consists of markers only"));
            continue;
        }
        if !p.lead.is_zero() {
            reasons.push(format!("layout {i} starts with a marker"));
        }
        if p.trail != l || l.is_zero() {
            reasons.push(format!("layout {i} ends with a marker run of {} (expected {l} > 0)", p.trail));
        }
        if p.inner >= l {
            reasons.push(format!("layout {i} has an interior marker run of {} ≥ {l}", p.inner));
        }
        longest = longest.max(p.inner.clone());
    }
    MarkerCertificate {
        holds: reasons.is_empty(),
        final_run: l.to_string(),
        longest_interior_run: longest.to_string(),
        reasons,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> Vec<Sym> {
        x.bytes().map(Sym::from).collect()
    }

    #[test]
    fn listed_collections() {
        assert!(check_exhaustive(&[s("ab"), s("cb")]).readable);
        let r = check_exhaustive(&[s("ab"), s("ba")]);
        assert!(!r.readable);
        assert!(r.violations.contains(&(0, 0, 1, 1)));
        let r = check_exhaustive(&[s("aa")]);
        assert_eq!(r.violations, vec![(0, 0, 0, 1)]);
    }

    #[test]
    fn profiles_on_powers() {
        let m = WordExpr::atom(0);
        let x = WordExpr::atom(1);
        let w = WordExpr::concat([WordExpr::power(WordExpr::concat([x.clone(), WordExpr::power(m.clone(), 3u32)]), 5u32), m.clone()]);
        let p = run_profile(&w, 0);
        assert_eq!(p.trail, BigUint::from(4u32));
        assert_eq!(p.inner, BigUint::from(3u32));
        assert_eq!(p.lead, BigUint::zero());
        let c = marker_certificate(&[w], 0);
        assert!(c.holds, "{:?}", c.reasons);
    }
}
