// SPDX-License-Identifier: MIT
//! The shifting and cycling block mechanisms.
//!
//! Every stage is built twice over: as layouts over the previous stage's block ids
//! (id 0 is always the marker block), and as symbol words obtained by substitution.
//! Validators run on the layouts, where sizes stay small.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{Pow, Zero};
use serde::{Deserialize, Serialize};

use super::ledger::{self, BoundLedger, LedgerCheck};
use crate::error::{domain, Error, Result};
use crate::feldman::{pattern_layouts, PatternSpec};
use crate::metric::Sym;
use crate::rational::{decimal, q, qi, serde_q, Surd, Q};
use crate::words::{marker_certificate, uniformity_of_layouts, validate_unique_readability, MarkerCertificate, ReadabilityReport, UniformityReport, WordExpr, WordRef};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MechanismKind {
    #[default]
    Shifting,
    Cycling,
}

/// Mechanism configuration. Sequence indexing: `u[m−1] = u_{n+m}` (same for `e`, `d`),
/// `l[0] = l_{n−1}` and `l[i] = l_{n+i−1}`, `R[i] = R_{n+i}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MechanismParams {
    #[serde(default)]
    pub mechanism: MechanismKind,
    #[serde(rename = "K")]
    pub k: u32,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t: Option<u64>,
    #[serde(with = "serde_q")]
    pub alpha: Q,
    #[serde(with = "serde_q")]
    pub eps: Q,
    #[serde(with = "serde_q")]
    pub delta: Q,
    pub u: Vec<u64>,
    pub e: Vec<u64>,
    #[serde(default)]
    pub l: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stages: Option<u32>,
    /// Overrides `d_{n+m} = u_{n+m}²`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<u64>>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<u64>>,
}

fn at(v: &[u64], m: u32, what: &str) -> Result<u64> {
    if m == 0 {
        return domain(format!("{what} is indexed from stage 1"));
    }
    v.get(m as usize - 1).copied().ok_or_else(|| Error::Domain(format!("{what} for stage {m} is not configured")))
}

impl MechanismParams {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn u(&self, m: u32) -> Result<u64> {
        at(&self.u, m, "u")
    }

    pub fn e(&self, m: u32) -> Result<u64> {
        at(&self.e, m, "e")
    }

    pub fn d(&self, m: u32) -> Result<u64> {
        match &self.d {
            Some(d) => at(d, m, "d"),
            None => Ok(self.u(m)?.pow(2)),
        }
    }

    /// `λ_{n+m}`: `d·e` for shifting, `2·d·e` for cycling.
    pub fn lambda(&self, kind: MechanismKind, m: u32) -> Result<u64> {
        let base = self.d(m)? * self.e(m)?;
        Ok(match kind {
            MechanismKind::Shifting => base,
            MechanismKind::Cycling => 2 * base,
        })
    }

    /// `l_{n+i}`; `i = −1` gives `l_{n−1}`.
    pub fn l_at(&self, i: i64) -> Result<u64> {
        let idx = i + 1;
        if idx < 0 {
            return domain("l is indexed from n−1");
        }
        self.l.get(idx as usize).copied().ok_or_else(|| Error::Domain(format!("l_(n+{i}) is not configured")))
    }

    /// Hypothesis flags of the configured mechanism for `N` building blocks.
    pub fn flags(&self, n_blocks: u64) -> Vec<LedgerCheck> {
        let mut out = Vec::new();
        let mut flag = |name: &str, holds: bool, detail: String| out.push(LedgerCheck { name: name.into(), holds, detail });
        let k = self.k as i64;
        flag("K >= 2", self.k >= 2, format!("K = {}", self.k));
        let stages = self.u.len().min(self.e.len()) as u32;
        match self.mechanism {
            MechanismKind::Shifting => {
                flag("0 < eps < alpha < 1/7", self.eps > Q::zero() && self.eps < self.alpha && self.alpha < q(1, 7), String::new());
                let s: Q = (1..=stages).map(|m| q(1, self.u(m).unwrap().pow(2) as i64)).sum();
                flag("sum 1/u^2 < delta/4", s < &self.delta / qi(4), decimal(&s, 6));
                let mut t = Surd::zero();
                for m in 1..=stages {
                    t = t
                        .add_q(&q(8, self.u(m).unwrap() as i64))
                        .add(&Surd::over_sqrt(&qi(17), &qi(self.e(m).unwrap() as i64)));
                }
                flag("sum 8/u + 17/sqrt(e) < eps/8", t.cmp_q(&(&self.eps / qi(8))).is_lt(), format!("{:.6}", t.to_f64()));
                let need = std::cmp::max(qi(2) / &self.delta, (qi(100) / &self.eps).pow(2));
                flag("N > max(2/delta, (100/eps)^2)", qi(n_blocks as i64) > need, format!("N = {n_blocks}, needs > {}", decimal(&need, 2)));
                let r = self.r.clone().unwrap_or_default();
                let mut lcond = true;
                for i in 0..self.l.len().saturating_sub(1) {
                    lcond &= self.l[i + 1] >= self.l[i].saturating_mul(self.l[i]);
                    if let Some(ri) = r.get(i) {
                        lcond &= self.l[i] >= 4 * ri;
                    }
                }
                flag("l_{n+1} >= l_n^2 and l_n >= 4 R_{n+1}", lcond, String::new());
                let d_ok = self.d.is_none();
                flag("d = u^2", d_ok, if d_ok { String::new() } else { "d overridden".into() });
            }
            MechanismKind::Cycling => {
                let t = self.t.unwrap_or(0) as i64;
                let t_ok = t > 0 && self.alpha > q(4, t) && self.alpha < q(1, 7);
                flag("4/T < alpha < 1/7", t_ok, format!("T = {t}"));
                flag("0 < eps < alpha", self.eps > Q::zero() && self.eps < self.alpha, String::new());
                let s: Q = (1..=stages)
                    .map(|m| qi(2) / qi(k * self.u(m).unwrap().pow(2) as i64 * self.e(m).unwrap() as i64))
                    .sum();
                flag("sum 2/(K u^2 e) < delta/2", s < &self.delta / qi(2), decimal(&s, 6));
                let mut t = Surd::zero();
                for m in 1..=stages {
                    t = t
                        .add_q(&q(4, self.u(m).unwrap() as i64))
                        .add(&Surd::over_sqrt(&qi(14), &qi(self.e(m).unwrap() as i64)));
                }
                flag("sum 4/u + 14/sqrt(e) < eps/8", t.cmp_q(&(&self.eps / qi(8))).is_lt(), format!("{:.6}", t.to_f64()));
                let nn = Surd::over_sqrt(&qi(14), &qi(n_blocks as i64));
                flag("14/sqrt(N) < eps/8", nn.cmp_q(&(&self.eps / qi(8))).is_lt(), format!("N = {n_blocks}"));
                let s: Q = self.l.iter().skip(2).map(|&l| q(4, l as i64)).sum();
                flag("sum 4/l < delta/2", s < &self.delta / qi(2), decimal(&s, 6));
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StageRole {
    Initial,
    Inductive,
    Final,
}

/// One block of a stage. `pieces[r]` is the `(type, pattern)` of its `r`-th pre-block (both 1-based).
#[derive(Clone, Debug)]
pub struct StageBlock {
    pub name: String,
    /// Type `i` and index `j` (both 0 for the marker block; `j = 0` for final blocks).
    pub ty: u32,
    pub index: u64,
    pub pieces: Vec<(u32, u32)>,
    pub layout: WordRef,
    pub word: WordRef,
}

#[derive(Clone, Debug)]
pub struct Stage {
    pub m: u32,
    pub role: StageRole,
    /// Typed blocks per type (`λ`); `1` for the final stage.
    pub lambda: u64,
    pub pattern_count: u32,
    /// How often the previous marker block closes each block.
    pub marker_repeat: BigUint,
    /// Block 0 is the marker block, except in the final stage.
    pub blocks: Vec<StageBlock>,
    /// `pre_layouts[type−1][pattern−1]`, over previous-stage ids.
    pub pre_layouts: Vec<Vec<WordRef>>,
    pub pre_words: Vec<Vec<WordRef>>,
    pub uniformity: UniformityReport,
    pub certificate: MarkerCertificate,
    /// Exhaustive readability check when the words are short enough.
    pub readability: Option<ReadabilityReport>,
    pub note: Option<String>,
}

impl Stage {
    pub fn layouts(&self) -> Vec<WordRef> {
        self.blocks.iter().map(|b| b.layout.clone()).collect()
    }

    pub fn words(&self) -> Vec<WordRef> {
        self.blocks.iter().map(|b| b.word.clone()).collect()
    }

    /// The block `B_{i,j}` (both 1-based) of a non-final stage.
    pub fn typed(&self, i: u32, j: u64) -> Option<&StageBlock> {
        if self.role == StageRole::Final {
            return self.blocks.get(i as usize - 1);
        }
        self.blocks.get(1 + (i as usize - 1) * self.lambda as usize + (j as usize - 1))
    }

    pub fn length(&self) -> &BigUint {
        self.blocks[0].word.len()
    }
}

#[derive(Clone, Debug)]
pub struct MechanismRun {
    pub kind: MechanismKind,
    pub n_blocks: u64,
    pub base: Vec<WordRef>,
    pub stages: Vec<Stage>,
    pub ledger: Option<BoundLedger>,
    pub ledger_error: Option<String>,
    pub flags: Vec<LedgerCheck>,
}

#[derive(Serialize)]
struct ManifestBlock<'a> {
    name: &'a str,
    ty: u32,
    index: u64,
    pieces: &'a [(u32, u32)],
    length: String,
    digest: String,
}

#[derive(Serialize)]
struct ManifestStage<'a> {
    m: u32,
    role: StageRole,
    lambda: u64,
    pattern_count: u32,
    marker_repeat: String,
    block_length: String,
    uniform: bool,
    uniform_count: Option<String>,
    marker_certificate: bool,
    marker_run: &'a str,
    exhaustive_readability: Option<bool>,
    note: &'a Option<String>,
    blocks: Vec<ManifestBlock<'a>>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    mechanism: MechanismKind,
    n_blocks: u64,
    base_length: String,
    stages: Vec<ManifestStage<'a>>,
    flags: &'a [LedgerCheck],
    ledger: &'a Option<BoundLedger>,
    ledger_error: &'a Option<String>,
}

impl MechanismRun {
    pub fn last(&self) -> &Stage {
        self.stages.last().expect("a run has stages")
    }

    pub fn all_valid(&self) -> bool {
        self.stages.iter().all(|s| s.uniformity.uniform && s.certificate.holds && s.readability.as_ref().is_none_or(|r| r.readable))
    }

    /// JSON manifest: block ids, types, pattern indices and marker runs per stage.
    pub fn manifest(&self) -> serde_json::Value {
        let stages = self
            .stages
            .iter()
            .map(|s| ManifestStage {
                m: s.m,
                role: s.role,
                lambda: s.lambda,
                pattern_count: s.pattern_count,
                marker_repeat: s.marker_repeat.to_string(),
                block_length: s.length().to_string(),
                uniform: s.uniformity.uniform,
                uniform_count: s.uniformity.count.clone(),
                marker_certificate: s.certificate.holds,
                marker_run: &s.certificate.final_run,
                exhaustive_readability: s.readability.as_ref().map(|r| r.readable),
                note: &s.note,
                blocks: s
                    .blocks
                    .iter()
                    .map(|b| ManifestBlock {
                        name: &b.name,
                        ty: b.ty,
                        index: b.index,
                        pieces: &b.pieces,
                        length: b.word.len().to_string(),
                        digest: format!("{:016x}", b.word.digest()),
                    })
                    .collect(),
            })
            .collect();
        let m = Manifest {
            mechanism: self.kind,
            n_blocks: self.n_blocks,
            base_length: self.base[0].len().to_string(),
            stages,
            flags: &self.flags,
            ledger: &self.ledger,
            ledger_error: &self.ledger_error,
        };
        serde_json::to_value(m).expect("manifest serializes")
    }
}

const READABILITY_CAP: u64 = 10_000;

fn ids_layout(ids: &[Sym]) -> WordRef {
    WordExpr::concat(ids.iter().map(|&s| WordExpr::atom(s)))
}

/// Feldman layouts over `groups` (each a layout over previous ids).
fn patterns_over(groups: &[WordRef], m: u32) -> Result<Vec<WordRef>> {
    let spec = PatternSpec::new(groups.len() as u32, m, 1)?;
    let (lay, _) = pattern_layouts(&spec);
    let mut memo = HashMap::new();
    Ok(lay.iter().map(|l| l.substitute_memo(&mut |s| groups[s as usize].clone(), &mut memo)).collect())
}

struct Prev<'a> {
    words: &'a [WordRef],
    /// Typed blocks per type in the previous stage (`None` for the base blocks).
    lambda: Option<u64>,
}

impl Prev<'_> {
    fn typed_id(&self, i: u32, t: u64) -> Sym {
        1 + ((i as u64 - 1) * self.lambda.unwrap() + (t - 1)) as Sym
    }
}

fn assemble(
    m: u32,
    role: StageRole,
    prev: &Prev<'_>,
    pre_layouts: Vec<Vec<WordRef>>,
    pattern_count: u32,
    lambda: u64,
    specs: Vec<(String, u32, u64, Vec<(u32, u32)>)>,
    marker_repeat: BigUint,
    note: Option<String>,
) -> Result<Stage> {
    let tail = WordExpr::power(WordExpr::atom(0), marker_repeat.clone());
    let mut memo = HashMap::new();
    let words_of = |l: &WordRef, memo: &mut HashMap<_, _>| l.substitute_memo(&mut |s| prev.words[s as usize].clone(), memo);
    let pre_words: Vec<Vec<WordRef>> =
        pre_layouts.iter().map(|fam| fam.iter().map(|l| words_of(l, &mut memo)).collect()).collect();
    let mut blocks = Vec::new();
    for (name, ty, index, pieces) in specs {
        for &(r, j) in &pieces {
            if j == 0 || j > pattern_count {
                return Err(Error::Internal(format!("{name}: pattern {j} of type {r} outside 1..={pattern_count}")));
            }
        }
        let mut parts: Vec<WordRef> = pieces.iter().map(|&(r, j)| pre_layouts[r as usize - 1][j as usize - 1].clone()).collect();
        parts.push(tail.clone());
        let layout = WordExpr::concat(parts);
        let word = words_of(&layout, &mut memo);
        blocks.push(StageBlock { name, ty, index, pieces, layout, word });
    }
    let layouts: Vec<WordRef> = blocks.iter().map(|b| b.layout.clone()).collect();
    let uniformity = uniformity_of_layouts(&layouts, prev.words.len());
    let certificate = marker_certificate(&layouts, 0);
    let words: Vec<WordRef> = blocks.iter().map(|b| b.word.clone()).collect();
    let readability = match words[0].len_u64() {
        Some(len) if len <= READABILITY_CAP => validate_unique_readability(&words),
        _ => None,
    };
    Ok(Stage { m, role, lambda, pattern_count, marker_repeat, blocks, pre_layouts, pre_words, uniformity, certificate, readability, note })
}

fn check_base(base: &[WordRef], k: u32) -> Result<u64> {
    if base.len() < 3 {
        return domain(format!("need a marker block and at least 2 blocks, got {} blocks", base.len()));
    }
    if k < 2 {
        return domain("K must be at least 2");
    }
    let len = base[0].len();
    if base.iter().any(|b| b.len() != len) {
        return domain("building blocks differ in length");
    }
    for (i, a) in base.iter().enumerate() {
        if base[..i].contains(a) {
            return domain(format!("building block {i} repeats an earlier block"));
        }
    }
    Ok(base.len() as u64 - 1)
}

/// Groups `G_{i,s}`: `size` consecutive typed blocks of type `i`, for `s = 0..count`.
fn groups_of(prev: &Prev<'_>, i: u32, size: u64, count: u64) -> Vec<WordRef> {
    (0..count)
        .map(|s| {
            let ids: Vec<Sym> = (s * size + 1..=(s + 1) * size).map(|t| prev.typed_id(i, t)).collect();
            ids_layout(&ids)
        })
        .collect()
}

fn typed_name(m: u32, i: u32, j: u64) -> String {
    format!("B[{m}]_{i},{j}")
}

fn shifting_stages(params: &MechanismParams, base: &[WordRef], p: u32) -> Result<Vec<Stage>> {
    let k = params.k;
    let kk = k as u64;
    let n_blocks = base.len() as u64 - 1;
    let mut stages: Vec<Stage> = Vec::new();
    for m in 1..=p {
        let prev_words: Vec<WordRef> = match stages.last() {
            Some(s) => s.words(),
            None => base.to_vec(),
        };
        let prev = Prev { words: &prev_words, lambda: stages.last().map(|s| s.lambda) };
        let stage = if m == 1 {
            let lam = params.lambda(MechanismKind::Shifting, 1)?;
            let count = std::cmp::max(2 * kk * lam, kk * (lam + 2)) as u32;
            let ids: Vec<WordRef> = (1..=n_blocks as Sym).map(WordExpr::atom).collect();
            let fam = patterns_over(&ids, count)?;
            // A_{i,j} is pattern (j−1)K + i; pre_layouts[i−1][j−1]
            let cols = count / k;
            let pre: Vec<Vec<WordRef>> =
                (1..=k).map(|i| (1..=cols).map(|j| fam[((j - 1) * k + i - 1) as usize].clone()).collect()).collect();
            let item = |f: u64| ((f % kk) as u32 + 1, (f / kk) as u32 + 1);
            let mut specs = vec![("B[1]_0".to_string(), 0, 0, (1..=k).map(|r| (r, lam as u32 + 2)).collect())];
            for i in 1..=k {
                for j in 1..=lam {
                    let f0 = (j - 1) * kk + (i as u64 - 1);
                    specs.push((typed_name(m, i, j), i, j, (0..kk).map(|r| item(f0 + r)).collect()));
                }
            }
            let rep = BigUint::from(kk) * BigUint::from(n_blocks).pow(2 * count + 2);
            assemble(m, StageRole::Initial, &prev, pre, cols, lam, specs, rep, None)?
        } else {
            let d = params.d(m - 1)?;
            let e = params.e(m - 1)?;
            if e < 2 {
                return domain(format!("e for stage {} must be at least 2", m - 1));
            }
            let final_stage = m == p;
            let lam = if final_stage { 1 } else { params.lambda(MechanismKind::Shifting, m)? };
            let count = if final_stage { std::cmp::max(k, 2) } else { (2 * kk * lam) as u32 };
            let pre: Vec<Vec<WordRef>> = (1..=k).map(|i| patterns_over(&groups_of(&prev, i, d, e), count)).collect::<Result<_>>()?;
            let rep = BigUint::from(e).pow(2 * count + 2);
            let mut specs = Vec::new();
            if final_stage {
                for i in 1..=k {
                    let pieces = (1..=k).map(|r| ((i - 1 + r - 1) % k + 1, r)).collect();
                    specs.push((format!("B[{m}]_{i}"), i, 0, pieces));
                }
                assemble(m, StageRole::Final, &prev, pre, count, lam, specs, rep, None)?
            } else {
                specs.push((format!("B[{m}]_0"), 0, 0, (1..=k).map(|r| (r, (lam * kk) as u32 + r)).collect()));
                for i in 1..=k {
                    for j in 1..=lam {
                        let pieces = (1..=k).map(|r| (r, ((j - 1) * kk) as u32 + (i - 1) + r)).collect();
                        specs.push((typed_name(m, i, j), i, j, pieces));
                    }
                }
                let note = (m == 2).then(|| "grouped blocks formed from the initial-stage typed blocks".to_string());
                assemble(m, StageRole::Inductive, &prev, pre, count, lam, specs, rep, note)?
            }
        };
        stages.push(stage);
    }
    Ok(stages)
}

fn cycling_stages(params: &MechanismParams, base: &[WordRef], m_final: u32) -> Result<Vec<Stage>> {
    let kind = MechanismKind::Cycling;
    let k = params.k;
    let kk = k as u64;
    let n_blocks = base.len() as u64 - 1;
    let shift = |r: u32, i: u32, t: u64| -> u32 {
        let (r, i, k) = (r as i64 - 1, i as i64 - 1, k as i64);
        let v = if t % 2 == 1 { r + i } else { r - i };
        v.rem_euclid(k) as u32 + 1
    };
    let mut stages: Vec<Stage> = Vec::new();
    for m in 1..=m_final {
        let prev_words: Vec<WordRef> = match stages.last() {
            Some(s) => s.words(),
            None => base.to_vec(),
        };
        let prev = Prev { words: &prev_words, lambda: stages.last().map(|s| s.lambda) };
        let stage = if m == 1 {
            let lam = params.lambda(kind, 1)?;
            let count = (kk * (lam + 1)) as u32;
            let ids: Vec<WordRef> = (1..=n_blocks as Sym).map(WordExpr::atom).collect();
            let fam = patterns_over(&ids, count)?;
            let cols = count / k;
            let pre: Vec<Vec<WordRef>> =
                (1..=k).map(|i| (1..=cols).map(|j| fam[((j - 1) * k + i - 1) as usize].clone()).collect()).collect();
            // position r holds A_{type, j}; pre_layouts is indexed [type][column]
            let mut specs = vec![("B[1]_0".to_string(), 0, 0, (1..=k).map(|r| (r, lam as u32 + 1)).collect())];
            for i in 1..=k {
                for j in 1..=lam {
                    specs.push((typed_name(m, i, j), i, j, (1..=k).map(|r| (shift(r, i, j), j as u32)).collect()));
                }
            }
            let rep = BigUint::from(kk) * BigUint::from(n_blocks).pow(2 * count + 2);
            assemble(m, StageRole::Initial, &prev, pre, cols, lam, specs, rep, None)?
        } else {
            let d = params.d(m - 1)?;
            let e = params.e(m - 1)?;
            if e < 2 {
                return domain(format!("e for stage {} must be at least 2", m - 1));
            }
            let final_stage = m == m_final;
            let lam = params.lambda(kind, m)?;
            let count = if final_stage { std::cmp::max(lam * kk, 2) as u32 } else { ((lam + 1) * kk) as u32 };
            let pre: Vec<Vec<WordRef>> = (1..=k).map(|i| patterns_over(&groups_of(&prev, i, 2 * d, e), count)).collect::<Result<_>>()?;
            let nbar = BigUint::from(e).pow(2 * count + 2);
            if final_stage {
                let mut specs = Vec::new();
                for i in 1..=k {
                    let pieces = (1..=(lam * kk) as u32).map(|r| ((i - 1 + r - 1) % k + 1, r)).collect();
                    specs.push((format!("B[{m}]_{i}"), i, 0, pieces));
                }
                assemble(m, StageRole::Final, &prev, pre, count, 1, specs, nbar * BigUint::from(lam), None)?
            } else {
                let mut specs = vec![(format!("B[{m}]_0"), 0, 0, (1..=k).map(|r| (r, (lam * kk) as u32 + 1)).collect())];
                for i in 1..=k {
                    for t in 1..=lam {
                        let pieces = (1..=k).map(|r| (r, ((t - 1) * kk) as u32 + shift(r, i, t))).collect();
                        specs.push((typed_name(m, i, t), i, t, pieces));
                    }
                }
                let note = (m == 2).then(|| "grouped blocks formed from the initial-stage typed blocks".to_string());
                assemble(m, StageRole::Inductive, &prev, pre, count, lam, specs, nbar, note)?
            }
        };
        stages.push(stage);
    }
    Ok(stages)
}

/// Runs the shifting mechanism on `B_0 … B_N` (`B_0` is the marker block).
///
/// The stage count is `params.stages` when set, otherwise the least `p` with `(1−1/K)^p < ε/2`.
pub fn shifting_run(params: &MechanismParams, base: &[WordRef]) -> Result<MechanismRun> {
    let n_blocks = check_base(base, params.k)?;
    let p_formula = ledger::shifting_stage_count(params.k as u64, &params.eps)?;
    let p = match params.stages {
        Some(s) => s,
        None => u32::try_from(p_formula).map_err(|_| Error::Domain("stage count overflows".into()))?,
    };
    if p < 2 {
        return domain("the shifting mechanism needs at least 2 stages");
    }
    let available = params.u.len().min(params.e.len()) as u32 + 1;
    if p > available {
        return domain(format!("{p} stages need u and e for stages 1..{}, only {} configured", p - 1, available - 1));
    }
    let mut flags = params.flags(n_blocks);
    flags.push(LedgerCheck {
        name: "stage count is least p".into(),
        holds: p as u64 == p_formula,
        detail: format!("running {p}, formula gives {p_formula}"),
    });
    let stages = shifting_stages(params, base, p)?;
    let (ledger, ledger_error) = match ledger::shifting_ledger(params, n_blocks, p) {
        Ok(l) => (Some(l), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(MechanismRun { kind: MechanismKind::Shifting, n_blocks, base: base.to_vec(), stages, ledger, ledger_error, flags })
}

/// Runs the cycling mechanism. The final stage is `m_n` from the ledger when it is reached
/// within the configured sequences, otherwise `params.stages`.
pub fn cycling_run(params: &MechanismParams, base: &[WordRef]) -> Result<MechanismRun> {
    let n_blocks = check_base(base, params.k)?;
    let (ledger, ledger_error, m_n) = match ledger::cycling_ledger(params, n_blocks) {
        Ok(l) => {
            let m = ledger::cycling_values(params, n_blocks).ok().and_then(|v| v.m_n);
            (Some(l), None, m)
        }
        Err(e) => (None, Some(e.to_string()), None),
    };
    let mut flags = params.flags(n_blocks);
    flags.push(LedgerCheck {
        name: "beta target reached".into(),
        holds: m_n.is_some(),
        detail: m_n.map_or("stage count taken from config".into(), |m| format!("m_n = {m}")),
    });
    let m_final = match (m_n, params.stages) {
        (Some(m), None) => m,
        (_, Some(s)) => s,
        (None, None) => return domain("the beta target is not reached; set \"stages\""),
    };
    if m_final < 2 {
        return domain("the cycling mechanism needs at least 2 stages");
    }
    let available = params.u.len().min(params.e.len()) as u32;
    if m_final > available {
        return domain(format!("{m_final} stages need u and e for stages 1..{m_final}, only {available} configured"));
    }
    let stages = cycling_stages(params, base, m_final)?;
    Ok(MechanismRun { kind: MechanismKind::Cycling, n_blocks, base: base.to_vec(), stages, ledger, ledger_error, flags })
}

pub fn run(params: &MechanismParams, base: &[WordRef]) -> Result<MechanismRun> {
    match params.mechanism {
        MechanismKind::Shifting => shifting_run(params, base),
        MechanismKind::Cycling => cycling_run(params, base),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::symbol_level;

    fn params(kind: MechanismKind, k: u32, stages: u32) -> MechanismParams {
        MechanismParams {
            mechanism: kind,
            k,
            t: Some(100),
            alpha: q(1, 8),
            eps: q(1, 16),
            delta: q(1, 2),
            u: vec![1, 1, 1],
            e: vec![2, 2, 2],
            l: vec![4, 8, 8, 8],
            stages: Some(stages),
            d: None,
            n: None,
            r: Some(vec![2, 2, 2, 2]),
        }
    }

    #[test]
    fn shifting_two_stages() {
        let p = params(MechanismKind::Shifting, 2, 2);
        let run = shifting_run(&p, &symbol_level(3)).unwrap();
        assert_eq!(run.stages.len(), 2);
        let s1 = &run.stages[0];
        // λ = 2: marker + 2 types × 2 blocks
        assert_eq!(s1.blocks.len(), 5);
        assert_eq!(s1.typed(2, 1).unwrap().pieces, vec![(2, 1), (1, 2)]);
        assert_eq!(s1.typed(1, 2).unwrap().pieces, vec![(1, 2), (2, 2)]);
        assert_eq!(s1.blocks[0].pieces, vec![(1, 4), (2, 4)]);
        assert!(run.all_valid());
        let last = run.last();
        assert_eq!(last.role, StageRole::Final);
        assert_eq!(last.blocks.len(), 2);
        assert_eq!(last.blocks[1].pieces, vec![(2, 1), (1, 2)]);
        assert!(run.ledger.is_some(), "{:?}", run.ledger_error);
    }

    #[test]
    fn cycling_rows_alternate() {
        let p = params(MechanismKind::Cycling, 3, 2);
        let run = cycling_run(&p, &symbol_level(3)).unwrap();
        let s1 = &run.stages[0];
        // odd j cycles one way, even j the other
        assert_eq!(s1.typed(2, 1).unwrap().pieces, vec![(2, 1), (3, 1), (1, 1)]);
        assert_eq!(s1.typed(2, 2).unwrap().pieces, vec![(3, 2), (1, 2), (2, 2)]);
        assert!(run.all_valid());
        let last = run.last();
        assert_eq!(last.blocks.len(), 3);
        assert_eq!(last.blocks[0].pieces.len(), (4 * 3) as usize);
    }

    #[test]
    fn config_round_trip() {
        let text = r#"{"mechanism":"cycling","K":2,"T":40,"alpha":"1/8","eps":"1/16","delta":"1/2","u":[1,1],"e":[2,2],"l":[4,8,8],"stages":2}"#;
        let p = MechanismParams::from_json(text).unwrap();
        assert_eq!(p.lambda(MechanismKind::Cycling, 1).unwrap(), 4);
        assert_eq!(p.l_at(-1).unwrap(), 4);
        let again = MechanismParams::from_json(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(again.alpha, p.alpha);
    }
}
