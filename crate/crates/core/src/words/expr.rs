// SPDX-License-Identifier: MIT
//! Lazy words: atoms, concatenations and powers with exact big lengths.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{domain, Error, Result};
use crate::metric::{Sym, SPACER_B, SPACER_E};

pub type WordRef = Arc<WordExpr>;

#[derive(Debug)]
pub enum Node {
    Atom(Sym),
    Concat(Vec<WordRef>),
    Power(WordRef, BigUint),
}

/// A word expression with its cached length and structural digest.
#[derive(Debug)]
pub struct WordExpr {
    node: Node,
    len: BigUint,
    digest: u64,
}

fn digest_of(tag: u8, parts: &[u64], extra: &[u8]) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    tag.hash(&mut h);
    parts.hash(&mut h);
    extra.hash(&mut h);
    h.finish()
}

impl PartialEq for WordExpr {
    fn eq(&self, other: &Self) -> bool {
        if std::ptr::eq(self, other) {
            return true;
        }
        if self.digest != other.digest || self.len != other.len {
            return false;
        }
        match (&self.node, &other.node) {
            (Node::Atom(a), Node::Atom(b)) => a == b,
            (Node::Concat(x), Node::Concat(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| p == q),
            (Node::Power(x, a), Node::Power(y, b)) => a == b && x == y,
            _ => false,
        }
    }
}
impl Eq for WordExpr {}

impl Hash for WordExpr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.digest.hash(state);
    }
}

/// Splits a node into `(base, exponent)`, treating non-powers as exponent 1.
fn base_exp(w: &WordRef) -> (WordRef, BigUint) {
    match &w.node {
        Node::Power(x, k) => (x.clone(), k.clone()),
        _ => (w.clone(), BigUint::one()),
    }
}

impl WordExpr {
    pub fn atom(s: Sym) -> WordRef {
        Arc::new(WordExpr { node: Node::Atom(s), len: BigUint::one(), digest: digest_of(0, &[], &s.to_le_bytes()) })
    }

    /// Canonical power: `x^1 = x`, `(x^a)^b = x^{ab}`.
    ///
    /// # Panics
    /// On a zero exponent.
    pub fn power(x: WordRef, k: impl Into<BigUint>) -> WordRef {
        let k: BigUint = k.into();
        assert!(!k.is_zero(), "power exponent must be at least 1");
        if k.is_one() {
            return x;
        }
        let (base, e) = base_exp(&x);
        let k = e * k;
        let len = &base.len * &k;
        let digest = digest_of(2, &[base.digest], &k.to_bytes_le());
        Arc::new(WordExpr { node: Node::Power(base, k), len, digest })
    }

    /// Canonical concatenation: nested concatenations are flattened and adjacent equal
    /// factors merged into powers.
    ///
    /// # Panics
    /// On an empty child list.
    pub fn concat(children: impl IntoIterator<Item = WordRef>) -> WordRef {
        let mut flat: Vec<WordRef> = Vec::new();
        for c in children {
            match &c.node {
                Node::Concat(cs) => flat.extend(cs.iter().cloned()),
                _ => flat.push(c),
            }
        }
        assert!(!flat.is_empty(), "concatenation of nothing");
        let mut merged: Vec<(WordRef, BigUint)> = Vec::with_capacity(flat.len());
        for c in flat {
            let (b, e) = base_exp(&c);
            match merged.last_mut() {
                Some((pb, pe)) if *pb == b => *pe += e,
                _ => merged.push((b, e)),
            }
        }
        let kids: Vec<WordRef> = merged.into_iter().map(|(b, e)| WordExpr::power(b, e)).collect();
        if kids.len() == 1 {
            return kids.into_iter().next().unwrap();
        }
        let len = kids.iter().map(|k| &k.len).sum();
        let ds: Vec<u64> = kids.iter().map(|k| k.digest).collect();
        let digest = digest_of(1, &ds, &[]);
        Arc::new(WordExpr { node: Node::Concat(kids), len, digest })
    }

    /// Run-length word from `(symbol, count)` pairs.
    pub fn from_runs(runs: impl IntoIterator<Item = (Sym, BigUint)>) -> Result<WordRef> {
        let parts: Vec<WordRef> = runs
            .into_iter()
            .filter(|(_, k)| !k.is_zero())
            .map(|(s, k)| WordExpr::power(WordExpr::atom(s), k))
            .collect();
        if parts.is_empty() {
            return domain("empty word");
        }
        Ok(WordExpr::concat(parts))
    }

    pub fn from_symbols(s: &[Sym]) -> Result<WordRef> {
        WordExpr::from_runs(crate::metric::lcs::runs(s).into_iter().map(|(x, r)| (x, BigUint::from(r))))
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn len(&self) -> &BigUint {
        &self.len
    }

    /// Never true: words are non-empty by construction.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn len_u64(&self) -> Option<u64> {
        self.len.to_u64()
    }

    pub fn digest(&self) -> u64 {
        self.digest
    }

    /// Concatenation children, or the word itself as a single factor.
    pub fn factors(self: &Arc<Self>) -> Vec<WordRef> {
        match &self.node {
            Node::Concat(cs) => cs.clone(),
            _ => vec![self.clone()],
        }
    }

    /// Positions `[start, start+len)` as concrete symbols.
    pub fn materialize_slice(&self, start: &BigUint, len: usize) -> Result<Vec<Sym>> {
        if start + BigUint::from(len) > self.len {
            return domain(format!("slice [{start}, +{len}) outside word of length {}", self.len));
        }
        let mut out = Vec::with_capacity(len);
        self.emit(start.clone(), len, &mut out);
        Ok(out)
    }

    /// The factor `[start, start+len)` as a lazy word sharing subtrees with `self`.
    pub fn slice(self: &Arc<Self>, start: &BigUint, len: &BigUint) -> Result<WordRef> {
        if len.is_zero() {
            return domain("empty slice");
        }
        if start + len > self.len {
            return domain(format!("slice [{start}, +{len}) outside word of length {}", self.len));
        }
        Ok(self.slice_in(start.clone(), len.clone()))
    }

    fn slice_in(self: &Arc<Self>, mut start: BigUint, mut len: BigUint) -> WordRef {
        if start.is_zero() && len == self.len {
            return self.clone();
        }
        match &self.node {
            Node::Atom(_) => self.clone(),
            Node::Concat(cs) => {
                let mut parts = Vec::new();
                for c in cs {
                    if len.is_zero() {
                        break;
                    }
                    if start >= c.len {
                        start -= &c.len;
                        continue;
                    }
                    let take = (&c.len - &start).min(len.clone());
                    parts.push(c.slice_in(start, take.clone()));
                    start = BigUint::zero();
                    len -= take;
                }
                WordExpr::concat(parts)
            }
            Node::Power(x, _) => {
                let off = &start % &x.len;
                let mut parts = Vec::new();
                if !off.is_zero() {
                    let take = (&x.len - &off).min(len.clone());
                    parts.push(x.slice_in(off, take.clone()));
                    len -= take;
                }
                let full = &len / &x.len;
                if !full.is_zero() {
                    len -= &full * &x.len;
                    parts.push(WordExpr::power(x.clone(), full));
                }
                if !len.is_zero() {
                    parts.push(x.slice_in(BigUint::zero(), len));
                }
                WordExpr::concat(parts)
            }
        }
    }

    /// All symbols; refuses words longer than `cap`.
    pub fn materialize(&self, cap: usize) -> Result<Vec<Sym>> {
        match self.len.to_usize() {
            Some(n) if n <= cap => self.materialize_slice(&BigUint::zero(), n),
            _ => Err(Error::Budget(format!("word of length {} exceeds materialisation cap {cap}", self.len))),
        }
    }

    fn emit(&self, mut start: BigUint, mut len: usize, out: &mut Vec<Sym>) {
        if len == 0 {
            return;
        }
        match &self.node {
            Node::Atom(s) => out.push(*s),
            Node::Concat(cs) => {
                for c in cs {
                    if len == 0 {
                        break;
                    }
                    if start >= c.len {
                        start -= &c.len;
                        continue;
                    }
                    let avail = (&c.len - &start).to_usize().unwrap_or(usize::MAX);
                    let take = avail.min(len);
                    c.emit(start.clone(), take, out);
                    start = BigUint::zero();
                    len -= take;
                }
            }
            Node::Power(x, _) => {
                let (_, mut off) = start.div_rem(&x.len);
                while len > 0 {
                    let avail = (&x.len - &off).to_usize().unwrap_or(usize::MAX);
                    let take = avail.min(len);
                    x.emit(off, take, out);
                    off = BigUint::zero();
                    len -= take;
                }
            }
        }
    }

    /// Occurrence count of every symbol, computed on the tree.
    pub fn symbol_counts(self: &Arc<Self>) -> BTreeMap<Sym, BigUint> {
        fn go(w: &WordRef, memo: &mut HashMap<*const WordExpr, Arc<BTreeMap<Sym, BigUint>>>) -> Arc<BTreeMap<Sym, BigUint>> {
            if let Some(m) = memo.get(&Arc::as_ptr(w)) {
                return m.clone();
            }
            let mut out = BTreeMap::new();
            match &w.node {
                Node::Atom(s) => {
                    out.insert(*s, BigUint::one());
                }
                Node::Concat(cs) => {
                    for c in cs {
                        for (s, k) in go(c, memo).iter() {
                            *out.entry(*s).or_insert_with(BigUint::zero) += k;
                        }
                    }
                }
                Node::Power(x, k) => {
                    for (s, c) in go(x, memo).iter() {
                        out.insert(*s, c * k);
                    }
                }
            }
            let out = Arc::new(out);
            memo.insert(Arc::as_ptr(w), out.clone());
            out
        }
        let mut memo = HashMap::new();
        (*go(self, &mut memo)).clone()
    }

    pub fn atoms(self: &Arc<Self>) -> BTreeSet<Sym> {
        self.symbol_counts().into_keys().collect()
    }

    /// Replaces every atom by a word, sharing work (and result pointers) across repeated subtrees.
    pub fn substitute(self: &Arc<Self>, f: &mut dyn FnMut(Sym) -> WordRef) -> WordRef {
        let mut memo = HashMap::new();
        self.substitute_memo(f, &mut memo)
    }

    /// As [`WordExpr::substitute`], with a caller-owned memo so that several words share results.
    pub fn substitute_memo(
        self: &Arc<Self>,
        f: &mut dyn FnMut(Sym) -> WordRef,
        memo: &mut HashMap<*const WordExpr, (WordRef, WordRef)>,
    ) -> WordRef {
        if let Some((_, r)) = memo.get(&Arc::as_ptr(self)) {
            return r.clone();
        }
        let r = match &self.node {
            Node::Atom(s) => f(*s),
            Node::Concat(cs) => {
                let kids: Vec<WordRef> = cs.iter().map(|c| c.substitute_memo(f, memo)).collect();
                WordExpr::concat(kids)
            }
            Node::Power(x, k) => WordExpr::power(x.substitute_memo(f, memo), k.clone()),
        };
        // The key word is kept alive next to the result so its address is never reused.
        memo.insert(Arc::as_ptr(self), (self.clone(), r.clone()));
        r
    }

    /// Visits maximal symbol runs left to right; stops with a budget error after `max_steps` visits.
    pub fn for_each_run(&self, max_steps: u64, f: &mut dyn FnMut(Sym, &BigUint)) -> Result<()> {
        let mut pending: Option<(Sym, BigUint)> = None;
        let mut steps = 0u64;
        self.walk_runs(&mut pending, &mut steps, max_steps, f)?;
        if let Some((s, k)) = pending {
            f(s, &k);
        }
        Ok(())
    }

    fn walk_runs(
        &self,
        pending: &mut Option<(Sym, BigUint)>,
        steps: &mut u64,
        max_steps: u64,
        f: &mut dyn FnMut(Sym, &BigUint),
    ) -> Result<()> {
        *steps += 1;
        if *steps > max_steps {
            return Err(Error::Budget(format!("run walk exceeded {max_steps} steps")));
        }
        let push = |s: Sym, k: BigUint, pending: &mut Option<(Sym, BigUint)>, f: &mut dyn FnMut(Sym, &BigUint)| {
            match pending {
                Some((p, c)) if *p == s => *c += k,
                _ => {
                    if let Some((p, c)) = pending.take() {
                        f(p, &c);
                    }
                    *pending = Some((s, k));
                }
            }
        };
        match &self.node {
            Node::Atom(s) => push(*s, BigUint::one(), pending, f),
            Node::Power(x, k) => {
                if let Node::Atom(s) = x.node {
                    push(s, k.clone(), pending, f);
                } else {
                    let mut i = BigUint::zero();
                    while &i < k {
                        x.walk_runs(pending, steps, max_steps, f)?;
                        i += 1u32;
                    }
                }
            }
            Node::Concat(cs) => {
                for c in cs {
                    c.walk_runs(pending, steps, max_steps, f)?;
                }
            }
        }
        Ok(())
    }

    /// Number of tree nodes reachable, counting shared subtrees once.
    pub fn node_count(self: &Arc<Self>) -> usize {
        fn go(w: &WordRef, seen: &mut std::collections::HashSet<*const WordExpr>) {
            if !seen.insert(Arc::as_ptr(w)) {
                return;
            }
            match &w.node {
                Node::Atom(_) => {}
                Node::Concat(cs) => cs.iter().for_each(|c| go(c, seen)),
                Node::Power(x, _) => go(x, seen),
            }
        }
        let mut seen = std::collections::HashSet::new();
        go(self, &mut seen);
        seen.len()
    }
}

pub fn symbol_token(s: Sym) -> String {
    match s {
        SPACER_B => "b".into(),
        SPACER_E => "e".into(),
        _ => s.to_string(),
    }
}

impl fmt::Display for WordExpr {
    /// Compact tree form, e.g. `(0^4 1^4)^16`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            Node::Atom(s) => write!(f, "{}", symbol_token(*s)),
            Node::Concat(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{c}")?;
                }
                Ok(())
            }
            Node::Power(x, k) => match x.node {
                Node::Atom(_) => write!(f, "{x}^{k}"),
                _ => write!(f, "({x})^{k}"),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(s: Sym) -> WordRef {
        WordExpr::atom(s)
    }

    #[test]
    fn canonical_forms() {
        let x = WordExpr::concat([a(0), a(0), a(1)]);
        assert_eq!(x.to_string(), "0^2 1");
        let y = WordExpr::concat([WordExpr::power(a(0), 2u32), a(1)]);
        assert_eq!(x, y);
        let p = WordExpr::power(WordExpr::power(a(3), 4u32), 5u32);
        assert_eq!(p.to_string(), "3^20");
        assert_eq!(WordExpr::power(a(1), 1u32).to_string(), "1");
        let nested = WordExpr::concat([WordExpr::concat([a(0), a(1)]), WordExpr::concat([a(2), a(3)])]);
        assert_eq!(nested.factors().len(), 4);
    }

    #[test]
    fn huge_power_random_access() {
        let p = WordExpr::power(a(7), BigUint::from(1_000_000_000u64));
        assert_eq!(p.len(), &BigUint::from(1_000_000_000u64));
        assert_eq!(p.materialize_slice(&BigUint::from(999_999_999u64), 1).unwrap(), vec![7]);
        assert!(p.materialize_slice(&BigUint::from(999_999_999u64), 2).is_err());
    }

    #[test]
    fn slice_across_seam() {
        let w = WordExpr::concat([WordExpr::power(WordExpr::concat([a(0), a(1)]), 3u32), a(2)]);
        assert_eq!(w.materialize(100).unwrap(), vec![0, 1, 0, 1, 0, 1, 2]);
        assert_eq!(w.materialize_slice(&BigUint::from(3u32), 4).unwrap(), vec![1, 0, 1, 2]);
    }

    #[test]
    fn lazy_slices_match_materialised_ones() {
        let inner = WordExpr::concat([a(0), WordExpr::power(a(1), 2u32), a(2)]);
        let w = WordExpr::concat([a(3), WordExpr::power(inner, 5u32), WordExpr::power(a(4), 3u32)]);
        let full = w.materialize(100).unwrap();
        for start in 0..full.len() {
            for len in 1..=full.len() - start {
                let (s, l) = (BigUint::from(start), BigUint::from(len));
                let lazy = w.slice(&s, &l).unwrap();
                assert_eq!(lazy.materialize(100).unwrap(), &full[start..start + len]);
            }
        }
        assert!(w.slice(&BigUint::zero(), &BigUint::zero()).is_err());
        assert!(w.slice(&BigUint::from(1u32), w.len()).is_err());
        let big = WordExpr::power(WordExpr::concat([a(0), a(1)]), BigUint::from(10u64).pow(30));
        let s = big.slice(&BigUint::from(1u32), &BigUint::from(10u64).pow(29)).unwrap();
        assert!(s.node_count() < 10);
    }

    #[test]
    fn counts_and_runs() {
        let w = WordExpr::power(WordExpr::concat([WordExpr::power(a(0), 4u32), WordExpr::power(a(1), 4u32)]), 16u32);
        let c = w.symbol_counts();
        assert_eq!(c[&0], BigUint::from(64u32));
        let mut runs = Vec::new();
        w.for_each_run(1000, &mut |s, k| runs.push((s, k.clone()))).unwrap();
        assert_eq!(runs.len(), 32);
    }

    #[test]
    fn substitution_keeps_sharing() {
        let inner = WordExpr::concat([a(0), a(1)]);
        let w = WordExpr::concat([inner.clone(), a(2), inner.clone()]);
        let mut memo = HashMap::new();
        let img = w.substitute_memo(&mut |s| WordExpr::power(a(s), 2u32), &mut memo);
        assert_eq!(img.materialize(100).unwrap(), vec![0, 0, 1, 1, 2, 2, 0, 0, 1, 1]);
        let kids = img.factors();
        assert!(Arc::ptr_eq(&kids[0], &kids[3]) || kids[0] == kids[3]);
    }
}
