// SPDX-License-Identifier: MIT
//! Check jobs of the metric, circular, Feldman, ledger and 𝔼 suites.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use super::{CheckResult, Ctx, Relation};
use crate::circular::{derive_params, functor_apply, functor_invert, new_spacer_fraction, parse_subsections, CircularCoefficients};
use crate::constructions::esys::{entropy_floor, tau_report};
use crate::constructions::ledger::{cycling_ledger, default_b, default_ell, shifting_stage_count};
use crate::constructions::prob::JointTable;
use crate::constructions::{
    conditioning_check, e_enumerate_blocks, epsilon_independence, rothstein_ledger, shifting_ledger, theorem_schedule, ELevel, EParams,
    MechanismKind, MechanismParams, Theorem,
};
use crate::feldman::{block_patterns, marker_patterns, symbolic_patterns, PatternSpec};
use crate::metric::lcs::{lcs_bitparallel, lcs_dp, lcs_witness};
use crate::metric::{fbar, fbar_to_cyclic, ftilde, oracle_bruteforce, CyclicDistance, OracleMode, Sym, SymbolString};
use crate::rational::{decimal, q, qi, qu, Surd, Q};
use crate::words::{layout, marker_certificate, symbol_level, uniformity_of_layouts, validate_unique_readability, ConstructionSequence, SequenceKind, WordExpr, WordRef};

use super::closeness::Job;

pub(super) const METRIC_CORE: [Job; 7] = [
    ("oracle-equivalence", oracle_job),
    ("kernel-equivalence", kernel_job),
    ("anchors", anchor_job),
    ("deletion", deletion_job),
    ("decomposition", decomposition_job),
    ("length-ratio", length_ratio_job),
    ("ftilde-vs-fbar", ftilde_job),
];

pub(super) const CIRCULAR: [Job; 1] = [("circular-laws", circular_job)];

pub(super) const FELDMAN: [Job; 3] = [("feldman-generators", generators_job), ("feldman-separation", separation_job), ("feldman-repetition", repetition_job)];

pub(super) const LEDGERS: [Job; 4] = [("rothstein", rothstein_job), ("stage-count", stage_count_job), ("schedules", schedules_job), ("mechanism-ledgers", mechanism_ledger_job)];

pub(super) const ESYS: [Job; 2] = [("esys-enumeration", esys_job), ("prob-tables", prob_job)];

const PROPERTY_INSTANCES: usize = 10_000;

fn random_string(rng: &mut impl Rng, max_len: usize, alphabet: u32) -> SymbolString {
    let n = rng.gen_range(1..=max_len);
    SymbolString::new((0..n).map(|_| rng.gen_range(0..alphabet)).collect(), alphabet).expect("symbols in range")
}

// ---------------------------------------------------------------------------
// metric-core

fn oracle_job(ctx: &mut Ctx<'_>) -> Vec<CheckResult> {
    let (mut bad_fbar, mut bad_ftilde) = (0u64, 0u64);
    let mut first = String::new();
    for _ in 0..1000 {
        let alpha = ctx.rng.gen_range(1..=4);
        let a = random_string(&mut ctx.rng, 10, alpha);
        let b = random_string(&mut ctx.rng, 10, alpha);
        let f = fbar(&a, &b, false).unwrap().value;
        let t = ftilde(&a, &b).unwrap().value;
        let of = oracle_bruteforce(&a, &b, OracleMode::Exact).unwrap().value;
        let ot = oracle_bruteforce(&a, &b, OracleMode::Approximate).unwrap().value;
        if f != of {
            bad_fbar += 1;
        }
        if t != ot {
            bad_ftilde += 1;
            if first.is_empty() {
                first = format!("first mismatch {:?} vs {:?}", a.symbols(), b.symbols());
            }
        }
    }
    vec![
        CheckResult::violations("oracle-fbar", "1000 pairs, lengths <= 10, alphabet <= 4", bad_fbar),
        CheckResult::violations("oracle-ftilde", "1000 pairs, lengths <= 10, alphabet <= 4", bad_ftilde).detail(first),
    ]
}

fn kernel_job(ctx: &mut Ctx<'_>) -> Vec<CheckResult> {
    let mut bad = 0u64;
    for _ in 0..200 {
        let alpha = ctx.rng.gen_range(2..=8);
        let a = random_string(&mut ctx.rng, 2000, alpha);
        let b = random_string(&mut ctx.rng, 2000, alpha);
        if lcs_bitparallel(a.symbols(), b.symbols()) != lcs_dp(a.symbols(), b.symbols()) {
            bad += 1;
        }
    }
    vec![CheckResult::violations("kernel-bitparallel", "200 pairs, lengths <= 2000", bad)]
}

fn anchor_job(_: &mut Ctx<'_>) -> Vec<CheckResult> {
    let s = SymbolString::from_bytes;
    let ft = ftilde(&s("11000"), &s("11100")).unwrap().value;
    let fb = fbar(&s("11000"), &s("11100"), false).unwrap().value;
    let cy = match fbar_to_cyclic(&s("aab"), &s("ab"), &q(1, 2)) {
        Ok(CyclicDistance::Value { result, .. }) => result.value,
        Ok(CyclicDistance::AtLeast(x)) => x,
        Err(e) => return vec![CheckResult::errored("cyclic-anchor", "aab vs ab", &e)],
    };
    vec![
        CheckResult::new("ftilde-anchor", "11000 vs 11100", ft, Relation::Eq, Some(Q::zero())),
        CheckResult::new("fbar-anchor", "11000 vs 11100", fb, Relation::Eq, Some(q(1, 5))),
        CheckResult::new("cyclic-anchor", "aab vs cyclic names of ab", cy, Relation::Eq, Some(q(1, 7))),
    ]
}

fn fb(a: &[Sym], b: &[Sym], alpha: u32) -> Q {
    let a = SymbolString::new(a.to_vec(), alpha).unwrap();
    let b = SymbolString::new(b.to_vec(), alpha).unwrap();
    fbar(&a, &b, false).unwrap().value
}

fn deletion_job(ctx: &mut Ctx<'_>) -> Vec<CheckResult> {
    let rng = &mut ctx.rng;
    let mut bad = 0u64;
    for _ in 0..PROPERTY_INSTANCES {
        let alpha = rng.gen_range(2..=4);
        let a = random_string(rng, 12, alpha).into_symbols();
        let b = random_string(rng, 12, alpha).into_symbols();
        let gamma = q(rng.gen_range(1..20), 20);
        let total = (a.len() + b.len()) as i64;
        let cap = (&gamma * qi(total)).floor().to_integer().to_usize().unwrap();
        let cap = cap.min(a.len() + b.len() - 2);
        let r = rng.gen_range(0..=cap);
        // pick r positions of the concatenation, keeping one symbol on each side
        let mut idx: Vec<usize> = (0..a.len() + b.len()).collect();
        idx.shuffle(rng);
        let mut gone = vec![false; a.len() + b.len()];
        let (mut left_a, mut left_b, mut taken) = (a.len(), b.len(), 0);
        for i in idx {
            if taken == r {
                break;
            }
            if i < a.len() && left_a > 1 {
                left_a -= 1;
            } else if i >= a.len() && left_b > 1 {
                left_b -= 1;
            } else {
                continue;
            }
            gone[i] = true;
            taken += 1;
        }
        let at: Vec<Sym> = a.iter().enumerate().filter(|(i, _)| !gone[*i]).map(|(_, &s)| s).collect();
        let bt: Vec<Sym> = b.iter().enumerate().filter(|(i, _)| !gone[a.len() + *i]).map(|(_, &s)| s).collect();
        if fb(&a, &b, alpha) < fb(&at, &bt, alpha) - qi(2) * &gamma {
            bad += 1;
        }
    }
    vec![CheckResult::violations("deletion", format!("{PROPERTY_INSTANCES} random deletions"), bad)]
}

fn decomposition_job(ctx: &mut Ctx<'_>) -> Vec<CheckResult> {
    let rng = &mut ctx.rng;
    let mut bad = 0u64;
    let mut done = 0;
    while done < PROPERTY_INSTANCES {
        let alpha = rng.gen_range(2..=4);
        let a = random_string(rng, 14, alpha).into_symbols();
        let b = random_string(rng, 14, alpha).into_symbols();
        let w = lcs_witness(&a, &b);
        if w.is_empty() {
            continue;
        }
        // cut both strings right after one matched pair, so no pair crosses the cut
        let (i, j) = w[rng.gen_range(0..w.len())];
        let (a1, a2) = a.split_at(i + 1);
        let (b1, b2) = b.split_at(j + 1);
        if a2.is_empty() || b2.is_empty() {
            continue;
        }
        done += 1;
        let total = qi((a.len() + b.len()) as i64);
        let v1 = qi((a1.len() + b1.len()) as i64) / &total;
        let v2 = qi((a2.len() + b2.len()) as i64) / &total;
        if fb(&a, &b, alpha) != v1 * fb(a1, b1, alpha) + v2 * fb(a2, b2, alpha) {
            bad += 1;
        }
    }
    vec![CheckResult::violations("decomposition", format!("{PROPERTY_INSTANCES} cuts along a best match"), bad)]
}

fn length_ratio_job(ctx: &mut Ctx<'_>) -> Vec<CheckResult> {
    let rng = &mut ctx.rng;
    let mut bad = 0u64;
    for _ in 0..PROPERTY_INSTANCES {
        let alpha = rng.gen_range(1..=3);
        let a = random_string(rng, 16, alpha).into_symbols();
        let b = random_string(rng, 16, alpha).into_symbols();
        let g = fb(&a, &b, alpha);
        if g >= Q::one() {
            continue;
        }
        let (x, y) = (qi(a.len() as i64), qi(b.len() as i64));
        let lo = (Q::one() - &g) / (Q::one() + &g) * &x;
        let hi = (Q::one() + &g) / (Q::one() - &g) * &x;
        if y < lo || y > hi {
            bad += 1;
        }
    }
    vec![CheckResult::violations("length-ratio", format!("{PROPERTY_INSTANCES} pairs with gamma = f-bar"), bad)]
}

fn ftilde_job(ctx: &mut Ctx<'_>) -> Vec<CheckResult> {
    let rng = &mut ctx.rng;
    let mut bad = 0u64;
    for _ in 0..PROPERTY_INSTANCES {
        let alpha = rng.gen_range(1..=4);
        let a = random_string(rng, 16, alpha);
        let b = random_string(rng, 16, alpha);
        let f = fbar(&a, &b, false).unwrap().value;
        let t = ftilde(&a, &b).unwrap().value;
        if Q::one() - t > qi(3) * (Q::one() - f) {
            bad += 1;
        }
    }
    vec![CheckResult::violations("ftilde-vs-fbar", format!("{PROPERTY_INSTANCES} pairs"), bad)]
}

// ---------------------------------------------------------------------------
// circular

const CIRCULAR_PREFIXES: usize = 50;
/// Largest `q_3` accepted when drawing coefficient prefixes; every level-3 word is materialised.
const CIRCULAR_Q3_CAP: u64 = 250_000;

#[derive(Default)]
struct LawCounts {
    length: u64,
    coprime: u64,
    spacers: u64,
    parse: u64,
    round_trip: u64,
}

fn draw_prefix(rng: &mut impl Rng) -> (Vec<u64>, Vec<u64>) {
    loop {
        let k: Vec<u64> = (0..3).map(|_| rng.gen_range(2..=6)).collect();
        let l: Vec<u64> = (0..3).map(|_| rng.gen_range(2..=6)).collect();
        let mut qn = 1u64;
        for n in 0..3 {
            qn = k[n] * l[n] * qn * qn;
        }
        if qn <= CIRCULAR_Q3_CAP {
            return (k, l);
        }
    }
}

/// Random odometer sequence with the given `k_n` and two distinct words per level.
fn random_odometer(rng: &mut impl Rng, k: &[u64]) -> ConstructionSequence {
    let mut seq = ConstructionSequence::new(2, SequenceKind::Odometer, symbol_level(2)).unwrap();
    for &kn in k {
        let n_prev = seq.levels.last().unwrap().words.len() as u32;
        let mut lays: Vec<Vec<Sym>> = Vec::new();
        while lays.len() < 2 {
            let l: Vec<Sym> = (0..kn).map(|_| rng.gen_range(0..n_prev)).collect();
            if !lays.contains(&l) {
                lays.push(l);
            }
        }
        seq.push_odometer_level(lays.iter().map(|l| layout(l)).collect()).unwrap();
    }
    seq
}

fn circular_prefix(rng: &mut impl Rng, counts: &mut LawCounts) -> crate::Result<()> {
    let (k, l) = draw_prefix(rng);
    let odo = random_odometer(rng, &k);
    let coeffs = CircularCoefficients::new(&k, &l, 1);
    let (circ, fmap) = functor_apply(&odo, &coeffs)?;
    let params = derive_params(&coeffs, 3)?;
    for n in 1..=3usize {
        counts.coprime += !params.p[n].gcd(&params.q[n]).is_one() as u64;
        let lower = &circ.levels[n - 1].words;
        for (w, lay) in circ.levels[n].words.iter().zip(circ.levels[n].layouts.as_ref().unwrap()) {
            counts.length += (w.len() != &params.q[n]) as u64;
            let tree = parse_subsections(&params, n, w)?;
            let ones = tree.twos.iter().flat_map(|t| &t.ones);
            let (qp, lp) = (params.q[n - 1].to_u64().unwrap(), l[n - 1]);
            let per_one = ones.clone().all(|o| o.b_run + o.e_run == qp && o.reps == lp - 1);
            let frac = new_spacer_fraction(&params, n, w)?;
            counts.spacers += (!per_one || frac != q(1, lp as i64)) as u64;
            let expect: Vec<Vec<Sym>> =
                lay.materialize(1 << 20)?.iter().map(|&i| lower[i as usize].materialize(1 << 20)).collect::<crate::Result<_>>()?;
            let same = tree.reassemble() == w.materialize(1 << 22)? && tree.prewords == expect;
            counts.parse += !same as u64;
        }
        for (o, c) in odo.levels[n].words.iter().zip(&circ.levels[n].words) {
            counts.round_trip += (functor_invert(&fmap, c, n)? != *o) as u64;
        }
    }
    Ok(())
}

fn circular_job(ctx: &mut Ctx<'_>) -> Vec<CheckResult> {
    let mut c = LawCounts::default();
    let mut errors = 0u64;
    let mut first_error = String::new();
    for _ in 0..CIRCULAR_PREFIXES {
        if let Err(e) = circular_prefix(&mut ctx.rng, &mut c) {
            errors += 1;
            if first_error.is_empty() {
                first_error = e.to_string();
            }
        }
    }
    let inst = format!("{CIRCULAR_PREFIXES} prefixes, 2 <= k,l <= 6, 3 levels, q_3 <= {CIRCULAR_Q3_CAP}");
    let mut out = vec![
        CheckResult::violations("circular-length", inst.clone(), c.length),
        CheckResult::violations("circular-coprime", inst.clone(), c.coprime),
        CheckResult::violations("circular-spacers", inst.clone(), c.spacers),
        CheckResult::violations("circular-parse", inst.clone(), c.parse),
        CheckResult::violations("functor-round-trip", inst.clone(), c.round_trip),
    ];
    if errors > 0 {
        out.push(CheckResult::violations("circular-errors", inst, errors).detail(first_error));
    }
    out
}

// ---------------------------------------------------------------------------
// feldman

fn generators_job(_: &mut Ctx<'_>) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let k = 2u32;
    for n in 2..=8u32 {
        for m in [2u32, 3] {
            let inst = format!("N={n} M={m} K={k}");
            let spec = PatternSpec::new(n, m, k).unwrap();
            // h_n = 1: building blocks of length K·h_n = 2, all distinct
            let blocks: Vec<WordRef> = (0..n).map(|j| WordExpr::from_symbols(&[j, n + j]).unwrap()).collect();
            let fam = &block_patterns(&spec, &[blocks]).unwrap()[0];
            let nn = BigUint::from(n);
            let want_len = (&nn).pow(2 * m + 3) * BigUint::from(k);
            let len_ok = fam.words.iter().all(|w| w.len() == &want_len);
            out.push(CheckResult::holds("feldman-length", inst.clone(), len_ok).detail(format!("N^(2M+3) K h = {want_len}")));
            let want_count = (&nn).pow(2 * m + 2);
            let count_ok = fam.layouts.iter().all(|l| {
                let c = l.symbol_counts();
                c.len() == n as usize && c.values().all(|v| v == &want_count)
            });
            out.push(CheckResult::holds("feldman-counts", inst.clone(), count_ok).detail(format!("each block {want_count} times")));

            let marker = WordExpr::atom(0);
            let mblocks: Vec<WordRef> = (1..=n).map(WordExpr::atom).collect();
            let mf = marker_patterns(&spec, &marker, &mblocks).unwrap();
            let cert = marker_certificate(&mf.layouts, 0);
            let exhaustive = validate_unique_readability(&mf.words);
            let readable = cert.holds && exhaustive.as_ref().is_none_or(|r| r.readable);
            let how = match &exhaustive {
                Some(r) => format!("marker certificate and {} check", r.method),
                None => format!("marker certificate; final run {}, longest interior run {}", cert.final_run, cert.longest_interior_run),
            };
            out.push(CheckResult::holds("marker-readability", inst.clone(), readable).detail(how));
            let uni = uniformity_of_layouts(&mf.layouts, n as usize + 1);
            let mlen = (&nn + 1u32) * (&nn).pow(2 * m + 2);
            let uni_ok = uni.uniform && uni.count.as_deref() == Some(&(&nn).pow(2 * m + 2).to_string()) && mf.words.iter().all(|w| w.len() == &mlen);
            out.push(CheckResult::holds("marker-uniformity", inst, uni_ok).detail(format!("count {}", uni.count.unwrap_or_default())));
        }
    }
    out
}

/// Exact f̄ between the two symbolic patterns at `M = 2`, frozen from the exact kernel.
pub const SEPARATION_FROZEN: [(u32, &str); 4] = [(4, "45/64"), (5, "96/125"), (6, "175/216"), (8, "441/512")];

/// A rational at least `1 − 4/√N`, or 0 when that is not positive.
fn weak_separation_bound(n: u32) -> Q {
    let s = Surd::rational(Q::one()).sub(&Surd::over_sqrt(&qi(4), &qi(n as i64)));
    if s.cmp_q(&Q::zero()).is_le() {
        Q::zero()
    } else {
        s.enclose(64).hi
    }
}

fn separation_value(n: u32) -> crate::Result<Q> {
    let spec = PatternSpec::new(n, 2, 1)?;
    let syms: Vec<Sym> = (0..n).collect();
    let f = symbolic_patterns(&spec, &syms)?;
    let a = SymbolString::new(f.words[0].materialize(1 << 24)?, n)?;
    let b = SymbolString::new(f.words[1].materialize(1 << 24)?, n)?;
    Ok(fbar(&a, &b, false)?.value)
}

fn separation_job(_: &mut Ctx<'_>) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let mut values = Vec::new();
    for (n, frozen) in SEPARATION_FROZEN {
        let inst = format!("N={n} M=2 B_1 vs B_2");
        let v = match separation_value(n) {
            Ok(v) => v,
            Err(e) => {
                out.push(CheckResult::errored("feldman-separation-frozen", inst, &e));
                continue;
            }
        };
        let frozen = crate::rational::parse_q(frozen).ok();
        out.push(CheckResult::new("feldman-separation-frozen", inst.clone(), v.clone(), Relation::Eq, frozen));
        out.push(
            CheckResult::new("feldman-separation-weak", inst, v.clone(), Relation::Ge, Some(weak_separation_bound(n)))
                .with_hypotheses(n >= 20)
                .detail("bound max(0, 1 - 4/sqrt(N)); pattern lemma needs N >= 20"),
        );
        values.push((n, v));
    }
    let monotone = values.windows(2).all(|w| w[0].1 <= w[1].1);
    let listing: Vec<String> = values.iter().map(|(n, v)| format!("N={n}: {}", decimal(v, 6))).collect();
    out.push(CheckResult::holds("feldman-separation-monotone", "N = 4, 5, 6, 8", monotone && values.len() == 4).detail(listing.join("; ")));
    out
}

fn repetition_job(_: &mut Ctx<'_>) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for n in [2u32, 3] {
        for ell in [2u64, 3] {
            let spec = PatternSpec::new(n, 2, 1).unwrap();
            let syms: Vec<Sym> = (0..n).collect();
            let f = symbolic_patterns(&spec, &syms).unwrap();
            let inflate = |w: &WordRef| w.substitute(&mut |s| WordExpr::power(WordExpr::atom(s), ell));
            let mat = |w: &WordRef| SymbolString::new(w.materialize(1 << 22).unwrap(), n).unwrap();
            let base = fbar(&mat(&f.words[0]), &mat(&f.words[1]), false).unwrap().value;
            let infl = fbar(&mat(&inflate(&f.words[0])), &mat(&inflate(&f.words[1])), false).unwrap().value;
            let delta = (&infl - &base).abs();
            let d = if delta.is_zero() { "equal".to_string() } else { format!("differ: {} vs {}", infl, base) };
            out.push(CheckResult::new("feldman-repetition", format!("N={n} M=2 l={ell}"), delta, Relation::Le, Some(q(2, ell as i64))).detail(d));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// ledgers

fn rothstein_job(_: &mut Ctx<'_>) -> Vec<CheckResult> {
    let led = rothstein_ledger(&default_b, &default_ell, q(1, 4), 64, -1e6);
    let min = (1..=64).filter_map(|n| led.exact("a", n)).map(|s| s.rational.clone()).min().unwrap_or_else(Q::zero);
    let flat = rothstein_ledger(&|_| Q::zero(), &|_| None, q(1, 4), 64, -1e6);
    let constant = (1..=64).all(|n| flat.exact("a", n).is_some_and(|s| s.rational == q(1, 4)));
    let mut out = vec![
        // the exact minimum has thousands of digits; a 12-digit lower bound decides the check
        CheckResult::new("rothstein-a-n", "a_1 = 1/4, n <= 64", floor_digits(&min, 12), Relation::Gt, Some(q(1, 8)))
            .inexact()
            .detail("lower bound on the minimum of a_n"),
        CheckResult::holds("rothstein-constant", "b_n = 0, no l_n term", constant),
    ];
    if let Some(c) = led.check_named("xi decreases with delta") {
        out.push(CheckResult::holds("rothstein-xi-monotone", "n <= 64", c.holds).detail(c.detail.clone()));
    }
    out
}

fn floor_digits(x: &Q, digits: u32) -> Q {
    let scale = Q::from_integer(num_bigint::BigInt::from(10u32).pow(digits));
    (x * &scale).floor() / scale
}

fn stage_count_job(_: &mut Ctx<'_>) -> Vec<CheckResult> {
    [(3u64, q(1, 2), 4i64), (2, q(1, 2), 3), (3, q(1, 8), 7)]
        .into_iter()
        .map(|(k, eps, want)| {
            let inst = format!("K={k} eps={eps}");
            match shifting_stage_count(k, &eps) {
                Ok(p) => CheckResult::new("shifting-stage-count", inst, qi(p as i64), Relation::Eq, Some(qi(want))),
                Err(e) => CheckResult::errored("shifting-stage-count", inst, &e),
            }
        })
        .collect()
}

fn schedules_job(_: &mut Ctx<'_>) -> Vec<CheckResult> {
    let mut out = Vec::new();
    match theorem_schedule(Theorem::Theorem3, 4) {
        Ok(p) => {
            let floor = p.ledger.exact("floor", 0).map(|s| s.rational.clone()).unwrap_or_else(Q::zero);
            out.push(CheckResult::new("schedule-floor", "theorem3", floor, Relation::Eq, Some(q(1, 32))));
            out.push(CheckResult::holds("schedule-sums", "theorem3, 4 stages", p.ledger.all_hold()));
        }
        Err(e) => out.push(CheckResult::errored("schedule-floor", "theorem3", &e)),
    }
    match theorem_schedule(Theorem::Theorem4, 4) {
        Ok(p) => {
            let a1 = p.ledger.exact("alpha", 1).cloned().unwrap_or_default();
            let want = Surd::rational(q(1, 8)).sub(&Surd::over_sqrt(&qi(13), &qi(1920 * 1920)));
            out.push(CheckResult::holds("schedule-alpha-one", "theorem4", a1 == want).detail(format!("alpha_1 = {a1}")));
            let floor = p.ledger.exact("floor", 0).map(|s| s.rational.clone()).unwrap_or_else(Q::zero);
            out.push(CheckResult::new("schedule-floor", "theorem4", floor, Relation::Eq, Some(q(1, 16))));
            out.push(CheckResult::holds("schedule-sums", "theorem4, 4 stages", p.ledger.all_hold()));
        }
        Err(e) => out.push(CheckResult::errored("schedule-floor", "theorem4", &e)),
    }
    out
}

fn desk_mechanism(kind: MechanismKind) -> MechanismParams {
    MechanismParams {
        mechanism: kind,
        k: 3,
        t: Some(100),
        alpha: q(1, 8),
        eps: q(1, 16),
        delta: q(1, 2),
        u: vec![2, 3, 3, 3, 3],
        e: vec![3, 3, 3, 3, 3],
        l: vec![4, 8, 8, 8, 8, 8],
        stages: None,
        d: None,
        n: None,
        r: Some(vec![2; 6]),
    }
}

fn mechanism_ledger_job(_: &mut Ctx<'_>) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let p = desk_mechanism(MechanismKind::Shifting);
    match shifting_ledger(&p, 6, 4) {
        Ok(led) => {
            for name in ["E telescopes", "final beta matches"] {
                let c = led.check_named(name).unwrap();
                out.push(CheckResult::holds("shifting-ledger", format!("K=3 N=6 p=4: {name}"), c.holds).detail(c.detail.clone()));
            }
        }
        Err(e) => out.push(CheckResult::errored("shifting-ledger", "K=3 N=6 p=4", &e)),
    }
    let c = desk_mechanism(MechanismKind::Cycling);
    let n = 6u64;
    match cycling_ledger(&c, n) {
        Ok(led) => {
            // β_{n+2} = α/K − 14/√N − 2/(KT) − 4/u_{n+1} − 2/e_{n+1}
            let (k, t) = (c.k as i64, c.t.unwrap() as i64);
            let want = Surd::rational(&c.alpha / qi(k) - q(2, k * t) - q(4, c.u[0] as i64) - q(2, c.e[0] as i64))
                .sub(&Surd::over_sqrt(&qi(14), &qi(n as i64)));
            let got = led.exact("beta", 2).cloned().unwrap_or_default();
            out.push(CheckResult::holds("cycling-beta", "K=3 N=6", got == want).detail(format!("beta_2 = {got}")));
        }
        Err(e) => out.push(CheckResult::errored("cycling-beta", "K=3 N=6", &e)),
    }
    out
}

// ---------------------------------------------------------------------------
// 𝔼 and finite probability

/// Levels with `(N−1)^{k'}` at most `10^6`.
const ESYS_LEVELS: [(u64, u64, (i64, i64)); 7] = [
    (3, 6, (1, 2)),
    (3, 12, (1, 2)),
    (3, 18, (1, 3)),
    (4, 12, (1, 3)),
    (4, 16, (1, 4)),
    (5, 10, (1, 2)),
    (7, 14, (1, 2)),
];

fn esys_level(n: u64, k: u64, eps: Q) -> crate::Result<Vec<CheckResult>> {
    let params = EParams { levels: vec![ELevel::new(n, k, eps.clone())?] };
    let inst = format!("N={n} k={k} eps={eps}");
    let en = e_enumerate_blocks(&params, 0)?;
    let tau = tau_report(&params, 0, &en)?;
    let mut out = vec![
        CheckResult::new("esys-tv-identity", inst.clone(), en.tv_distance.clone(), Relation::Eq, Some(qi(2) * &en.tau))
            .detail(format!("tau = {}", en.tau)),
        CheckResult::new("esys-tau-chebyshev", inst.clone(), tau.tau.clone(), Relation::Le, Some(tau.bound.clone())),
    ];
    // ε* ≤ 3√τ, compared on squares, over every split of the free section
    let kf = en.k_free();
    let mut worst = Q::zero();
    for a in 1..kf {
        for b in 1..=kf - a {
            let e = epsilon_independence(&en.position_joint(a, b)?).epsilon;
            worst = worst.max(&e * &e);
        }
    }
    out.push(
        CheckResult::new("esys-independence", inst.clone(), worst, Relation::Le, Some(qi(9) * &en.tau))
            .detail("largest eps*^2 over position splits against 9 tau"),
    );
    let floor = entropy_floor(&params, 0, &en)?;
    out.push(
        CheckResult::new("esys-entropy-floor", inst, qi(floor.next_count as i64), Relation::Ge, Some(qu(&floor.floor)))
            .with_hypotheses(floor.hypotheses_met)
            .detail(format!("N^((1-2 eps) k) with exponent {}", floor.exponent)),
    );
    Ok(out)
}

fn esys_job(_: &mut Ctx<'_>) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for (n, k, (a, b)) in ESYS_LEVELS {
        match esys_level(n, k, q(a, b)) {
            Ok(v) => out.extend(v),
            Err(e) => out.push(CheckResult::errored("esys-tv-identity", format!("N={n} k={k}"), &e)),
        }
    }
    out
}

fn random_joint(rng: &mut impl Rng, rows: usize, cols: usize) -> JointTable {
    let w: Vec<Vec<u64>> = (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(0..6)).collect()).collect();
    let total: u64 = w.iter().flatten().sum::<u64>().max(1);
    JointTable::new(w.iter().map(|r| r.iter().map(|&x| q(x as i64, total as i64)).collect()).collect())
}

fn prob_job(ctx: &mut Ctx<'_>) -> Vec<CheckResult> {
    let rng = &mut ctx.rng;
    let mut anti_bad = 0u64;
    let mut cond_bad = 0u64;
    let mut cond_runs = 0u64;
    for _ in 0..300 {
        let (r, c) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let t = random_joint(rng, r, c);
        if t.total().is_zero() {
            continue;
        }
        // ε*_{Q|R} ≤ √(3 ε*_{R|Q}), on squares
        let e_rq = epsilon_independence(&t).epsilon;
        let e_qr = epsilon_independence(&t.transpose()).epsilon;
        anti_bad += (&e_qr * &e_qr > qi(3) * e_rq) as u64;
        // a perturbation of total variation below ε
        let eps = q(rng.gen_range(1..10), 10);
        let mut pp = t.p.clone();
        let (i, j) = (rng.gen_range(0..r), rng.gen_range(0..c));
        let (i2, j2) = (rng.gen_range(0..r), rng.gen_range(0..c));
        let shift = (&eps / qi(3)).min(pp[i][j].clone());
        pp[i][j] -= &shift;
        pp[i2][j2] += &shift;
        let rep = conditioning_check(&t, &JointTable::new(pp), &eps);
        if rep.hypotheses_met {
            cond_runs += 1;
            cond_bad += !rep.conclusion_holds as u64;
        }
    }
    vec![
        CheckResult::violations("prob-antisymmetry", "300 random tables", anti_bad),
        CheckResult::violations("prob-conditioning", format!("{cond_runs} perturbations within eps"), cond_bad),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn weak_bound_is_zero_at_desk_n() {
        for n in [4, 5, 6, 8, 16] {
            assert_eq!(weak_separation_bound(n), Q::zero());
        }
        let b = weak_separation_bound(25);
        assert!(b >= q(1, 5) && b < q(1, 5) + q(1, 1_000_000));
    }

    #[test]
    fn prefixes_respect_the_cap() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let (k, l) = draw_prefix(&mut rng);
            assert!(k.iter().all(|&x| (2..=6).contains(&x)) && l.iter().all(|&x| (2..=6).contains(&x)));
        }
    }

    #[test]
    fn ratio_helper_is_exact() {
        assert_eq!(ratio(&BigUint::from(3u32), &BigUint::from(9u32)), q(1, 3));
    }
}
