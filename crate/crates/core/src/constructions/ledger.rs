// SPDX-License-Identifier: MIT
//! Exact bound ledgers: named recursions evaluated in exact arithmetic.
//!
//! Values that involve square roots are kept as [`Surd`]s, so identities between
//! recursions and their closed forms are checked by equality, not by tolerance.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::Serialize;

use super::mechanism::{MechanismKind, MechanismParams};
use crate::error::{domain, Result};
use crate::rational::{decimal, least_power_below, q, qi, qu, Interval, Surd, Q};

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LedgerValue {
    Exact { value: Surd, decimal: String },
    Enclosure { value: Interval },
    Float { value: f64 },
    Count { value: String },
}

impl LedgerValue {
    pub fn exact(s: Surd) -> Self {
        let decimal = format!("{:.12}", s.to_f64());
        LedgerValue::Exact { value: s, decimal }
    }

    pub fn rational(x: Q) -> Self {
        LedgerValue::exact(Surd::rational(x))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LedgerEntry {
    pub name: String,
    pub index: i64,
    pub value: LedgerValue,
    pub reference: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct LedgerCheck {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundLedger {
    pub id: String,
    pub entries: Vec<LedgerEntry>,
    pub checks: Vec<LedgerCheck>,
}

impl BoundLedger {
    fn new(id: &str) -> Self {
        BoundLedger { id: id.into(), entries: Vec::new(), checks: Vec::new() }
    }

    fn push(&mut self, name: &str, index: i64, value: LedgerValue, reference: &'static str) {
        self.entries.push(LedgerEntry { name: name.into(), index, value, reference });
    }

    fn check(&mut self, name: impl Into<String>, holds: bool, detail: impl Into<String>) {
        self.checks.push(LedgerCheck { name: name.into(), holds, detail: detail.into() });
    }

    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn get(&self, name: &str, index: i64) -> Option<&LedgerValue> {
        self.entries.iter().find(|e| e.name == name && e.index == index).map(|e| &e.value)
    }

    pub fn exact(&self, name: &str, index: i64) -> Option<&Surd> {
        match self.get(name, index)? {
            LedgerValue::Exact { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn check_named(&self, name: &str) -> Option<&LedgerCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn pow2_inv(k: u64) -> Q {
    Q::new(BigInt::one(), BigInt::one() << k as usize)
}

fn recip(x: u64) -> Q {
    q(1, x as i64)
}

fn over_sqrt(c: i64, x: u64) -> Surd {
    Surd::over_sqrt(&qi(c), &qi(x as i64))
}

// ---------------------------------------------------------------------------
// The a_n recursion

/// `b_n = 2^{-(n+10)}`.
pub fn default_b(n: u32) -> Q {
    pow2_inv(n as u64 + 10)
}

/// `ℓ_n = 2^{n+10} + 1`, the least admissible integer.
pub fn default_ell(n: u32) -> Option<Q> {
    Some(qu(&((BigUint::one() << (n as usize + 10)) + 1u32)))
}

/// `log2 ξ_n(δ)` for `ε_n = 2^{-(n+13)}`, in floating point.
pub fn xi_log2(n: u32, b: f64, log2_delta: f64) -> f64 {
    let eps = (-(n as f64 + 13.0)).exp2();
    let e = (b / 2.0 - eps) * (1.0 - eps);
    8.0 + e * (3f64.log2() + log2_delta) + 3.0 * (1.0 - eps) * (b / 2.0).sqrt()
}

/// Largest `log2 δ` with `ξ_n(δ) < 1` (floating point).
pub fn xi_threshold_log2(n: u32, b: f64) -> f64 {
    let eps = (-(n as f64 + 13.0)).exp2();
    let e = (b / 2.0 - eps) * (1.0 - eps);
    -(8.0 + 3.0 * (1.0 - eps) * (b / 2.0).sqrt()) / e - 3f64.log2()
}

/// Iterates `a_{n+1} = a_n(1 − b_n) − 15/ℓ_n` exactly from `a_1`; `ℓ_n = None` means the term vanishes.
pub fn rothstein_ledger(
    b: &dyn Fn(u32) -> Q,
    ell: &dyn Fn(u32) -> Option<Q>,
    a1: Q,
    n_max: u32,
    log2_delta0: f64,
) -> BoundLedger {
    let mut led = BoundLedger::new("rothstein");
    let mut a = a1;
    let mut all_above = true;
    let mut all_below_third = true;
    let mut xi_monotone = true;
    for n in 1..=n_max {
        led.push("a", n as i64, LedgerValue::rational(a.clone()), "a_n recursion");
        all_above &= a > q(1, 8);
        all_below_third &= a > Q::zero() && a < q(1, 3);
        let bn = b(n);
        let bf = crate::rational::to_f64(&bn);
        if bf > 0.0 {
            let x0 = xi_log2(n, bf, log2_delta0);
            // ξ shrinks with δ exactly when the exponent of 3δ is positive
            let eps = pow2_inv(n as u64 + 13);
            xi_monotone &= (&bn / qi(2) - &eps) * (Q::one() - &eps) > Q::zero();
            led.push("log2_xi", n as i64, LedgerValue::Float { value: x0 }, "xi_n at delta_0 (floating point)");
            led.push("log2_delta_threshold", n as i64, LedgerValue::Float { value: xi_threshold_log2(n, bf) }, "xi_n < 1 below this delta");
        }
        let mut next = &a * (Q::one() - &bn);
        if let Some(l) = ell(n) {
            next -= qi(15) / l;
        }
        a = next;
    }
    led.check("a_n > 1/8", all_above, format!("n = 1..{n_max}"));
    led.check("0 < a_n < 1/3", all_below_third, "hypothesis of the inductive step");
    led.check("xi decreases with delta", xi_monotone, "exponent of 3*delta is positive");
    led
}

// ---------------------------------------------------------------------------
// Shifting mechanism

/// Least `p` with `(1 − 1/K)^p < ε/2`.
pub fn shifting_stage_count(k: u64, eps: &Q) -> Result<u64> {
    if k < 2 {
        return domain("K must be at least 2");
    }
    least_power_below(&(Q::one() - recip(k)), &(eps / qi(2)))
}

fn need<T: Clone>(v: &[T], i: usize, what: &str) -> Result<T> {
    v.get(i).cloned().ok_or_else(|| crate::Error::Domain(format!("{what}[{i}] is required but not configured")))
}

/// `Σ_{u=1}^{m−1} (1/(N(n+u−1)+1) + 1/d_{n+u})` with `N(n) = N` and `N(n+u) = Kλ_{n+u}`.
pub fn odometer_closeness_bound(params: &MechanismParams, kind: MechanismKind, n_blocks: u64, m: u32) -> Result<Q> {
    let mut s = Q::zero();
    for u in 1..m {
        let prev = if u == 1 { n_blocks } else { params.k as u64 * params.lambda(kind, u - 1)? };
        s += recip(prev + 1) + recip(params.d(u)?);
    }
    Ok(s)
}

/// `Σ_{i=1}^{m−1} (4/l_{n+i} + 2/(N(n+i−1)+1))`.
pub fn circular_closeness_bound(params: &MechanismParams, kind: MechanismKind, n_blocks: u64, m: u32) -> Result<Q> {
    let mut s = Q::zero();
    for i in 1..m {
        let prev = if i == 1 { n_blocks } else { params.k as u64 * params.lambda(kind, i - 1)? };
        s += qi(4) / qi(params.l_at(i as i64)? as i64) + qi(2) * recip(prev + 1);
    }
    Ok(s)
}

/// The shifting ledger for `p` stages starting from `N` non-marker blocks.
pub fn shifting_ledger(params: &MechanismParams, n_blocks: u64, p: u32) -> Result<BoundLedger> {
    let kind = MechanismKind::Shifting;
    let mut led = BoundLedger::new("shifting");
    if p < 2 {
        return domain("the shifting ledger needs p ≥ 2");
    }
    let r = params.r.clone().unwrap_or_default();
    let big_r = |i: usize| -> Result<u64> { need(&r, i, "R") };
    let l = |i: i64| params.l_at(i);
    let alpha = &params.alpha;
    let eps = &params.eps;

    let r0 = big_r(0)?;
    let beta1 = Surd::rational(qi(4) * recip(r0) + qi(4 * r0 as i64) / qi(l(0)? as i64)).add(&over_sqrt(13, n_blocks));
    led.push("beta", 1, LedgerValue::exact(beta1.clone()), "pre-block separation loss");
    let e1 = beta1.add_q(&(qi(4) * recip(n_blocks) + qi(4) / qi(l(-1)? as i64)));
    led.push("E", 1, LedgerValue::exact(e1.clone()), "first-stage loss");

    let step = |i: u32| -> Result<Surd> {
        let ri = big_r(i as usize)?;
        Ok(Surd::rational(qi(6) * recip(ri) + qi(8) * recip(params.u(i)?)).add(&over_sqrt(17, params.e(i)?)))
    };
    let mut es = vec![Surd::zero(), e1.clone()];
    for m in 2..=p {
        let next = es[m as usize - 1].add(&step(m - 1)?);
        led.push("E", m as i64, LedgerValue::exact(next.clone()), "E recursion");
        es.push(next);
    }
    // closed form against the recursion
    let mut telescopes = true;
    for m in 2..=p {
        let mut closed = e1.clone();
        for i in 1..m {
            closed = closed.add(&step(i)?);
        }
        telescopes &= closed == es[m as usize];
    }
    led.check("E telescopes", telescopes, "recursive and summed forms agree exactly");

    let mut betas_agree = true;
    for m in 2..=p {
        let i = (m - 1) as usize;
        let ri = big_r(i)?;
        let gamma = es[i].add_q(&(qi(4) * recip(ri) + qi(4 * ri as i64) / qi(l(i as i64)? as i64) + qi(6) * recip(params.u(m - 1)?)));
        led.push("gamma", (m - 1) as i64, LedgerValue::exact(gamma.clone()), "grouped-block loss");
        let beta = gamma.add(&over_sqrt(13, params.e(m - 1)?)).add_q(&(qi(2) * recip(params.u(m - 1)?)));
        led.push("beta", m as i64, LedgerValue::exact(beta.clone()), "pattern separation loss");
        if m == p {
            let direct = es[i]
                .add_q(&(qi(4) * recip(ri) + qi(8) * recip(params.u(m - 1)?) + qi(4 * ri as i64) / qi(l(i as i64)? as i64)))
                .add(&over_sqrt(13, params.e(m - 1)?));
            betas_agree &= direct == beta;
        }
    }
    led.check("final beta matches", betas_agree, "final-stage formula equals gamma + 13/sqrt(e) + 2/u");

    for m in 2..=p {
        let b = odometer_closeness_bound(params, kind, n_blocks, m)?;
        led.push("closeness", m as i64, LedgerValue::rational(b), "odometer closeness of same-pattern pre-blocks");
    }
    let fclos = odometer_closeness_bound(params, kind, n_blocks, p)?;
    led.check("closeness < delta", fclos < params.delta, format!("{} vs {}", decimal(&fclos, 6), params.delta));

    let floor = Surd::rational((Q::one() - eps / qi(2)) * alpha).sub(&es[p as usize]);
    led.push("separation", p as i64, LedgerValue::exact(floor.clone()), "final circular separation");
    let mut rsum = Q::zero();
    for s in 0..p {
        rsum += qi(6) * recip(big_r(s as usize)?);
    }
    let target = alpha - eps - &rsum;
    led.check(
        "separation > alpha - eps - sum 6/R",
        floor.cmp_q(&target) == std::cmp::Ordering::Greater,
        format!("{:.6} vs {:.6}", floor.to_f64(), crate::rational::to_f64(&target)),
    );
    let kk = params.k as u64;
    let pp = shifting_stage_count(kk, eps)?;
    led.push("p", 0, LedgerValue::Count { value: pp.to_string() }, "least p with (1-1/K)^p < eps/2");
    Ok(led)
}

// ---------------------------------------------------------------------------
// Cycling mechanism

/// α/β recursions of the cycling mechanism, up to the largest stage the sequences allow.
pub struct CyclingValues {
    pub alpha: Vec<(u32, Surd)>,
    pub beta: Vec<(u32, Surd)>,
    /// Least `m ≥ 2` with `β_{n+m} > α − 2/T − ε/2`, when reached.
    pub m_n: Option<u32>,
}

pub fn cycling_values(params: &MechanismParams, n_blocks: u64) -> Result<CyclingValues> {
    let kind = MechanismKind::Cycling;
    let k = params.k as i64;
    let t = params.t.ok_or_else(|| crate::Error::Domain("the cycling mechanism needs T".into()))? as i64;
    let alpha = &params.alpha;
    let n_sqrt = over_sqrt(14, n_blocks);
    let a2 = Surd::rational(alpha - q(2, t) - qi(4) * recip(params.u(1)?)).sub(&n_sqrt).sub(&over_sqrt(13, params.e(1)?));
    let b2 = Surd::rational(alpha / qi(k) - q(2, k * t) - qi(4) * recip(params.u(1)?) - qi(2) * recip(params.e(1)?)).sub(&n_sqrt);
    let mut alphas = vec![(2u32, a2.clone())];
    let mut betas = vec![(2u32, b2)];
    let target = alpha - q(2, t) - &params.eps / qi(2);
    let mut m_n = None;
    let mut alpha_acc = a2;
    let mut m = 2u32;
    loop {
        let (_, beta_m) = betas.last().unwrap().clone();
        if m_n.is_none() && beta_m.cmp_q(&target) == std::cmp::Ordering::Greater {
            m_n = Some(m);
            break;
        }
        // stage m+1 needs u_{n+m}, e_{n+m}, e_{n+m−1}, λ_{n+m−1}
        let (Ok(um), Ok(em), Ok(em1), Ok(lam)) = (params.u(m), params.e(m), params.e(m - 1), params.lambda(kind, m - 1)) else {
            break;
        };
        let lam_term = qi(2) * recip(lam * k as u64 + 1);
        let alpha_m = alpha_acc.clone();
        alpha_acc = alpha_acc.sub(&Surd::rational(lam_term.clone() + qi(2) * recip(em1) + qi(4) * recip(um))).sub(&over_sqrt(13, em));
        alphas.push((m + 1, alpha_acc.clone()));
        let diff = alpha_m.sub(&beta_m).scale(&q(1, k));
        let beta_next = beta_m.add(&diff).sub(&Surd::rational(qi(2) * recip(em1) + qi(4) * recip(um) + lam_term + qi(2) * recip(em)));
        betas.push((m + 1, beta_next));
        m += 1;
        if m > 4096 {
            break;
        }
    }
    Ok(CyclingValues { alpha: alphas, beta: betas, m_n })
}

pub fn cycling_ledger(params: &MechanismParams, n_blocks: u64) -> Result<BoundLedger> {
    let kind = MechanismKind::Cycling;
    let mut led = BoundLedger::new("cycling");
    let vals = cycling_values(params, n_blocks)?;
    for (m, a) in &vals.alpha {
        led.push("alpha", *m as i64, LedgerValue::exact(a.clone()), "cycling alpha recursion");
    }
    for (m, b) in &vals.beta {
        led.push("beta", *m as i64, LedgerValue::exact(b.clone()), "cycling beta recursion");
    }
    let t = params.t.unwrap_or(1) as i64;
    let target = &params.alpha - q(2, t) - &params.eps / qi(2);
    led.push("beta_target", 0, LedgerValue::rational(target), "alpha - 2/T - eps/2");
    match vals.m_n {
        Some(m) => {
            led.push("m_n", 0, LedgerValue::Count { value: m.to_string() }, "least m reaching the beta target");
            let bound = circular_closeness_bound(params, kind, n_blocks, m);
            if let Ok(b) = bound {
                led.check("circular closeness < delta", b < params.delta, format!("{} vs {}", decimal(&b, 6), params.delta));
                led.push("circular_closeness", m as i64, LedgerValue::rational(b), "final circular closeness");
            }
            led.check("beta target reached", true, format!("m_n = {m}"));
        }
        None => led.check(
            "beta target reached",
            false,
            format!("not reached within {} configured stages", vals.beta.last().map_or(0, |b| b.0)),
        ),
    }
    for m in 2..=params.u.len().min(params.e.len()) as u32 {
        if let Ok(b) = circular_closeness_bound(params, kind, n_blocks, m) {
            led.push("circular_closeness", m as i64, LedgerValue::rational(b), "same-pattern circular closeness");
        }
    }
    Ok(led)
}

// ---------------------------------------------------------------------------
// Theorem schedules

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Theorem {
    Theorem3,
    Theorem4,
}

#[derive(Clone, Debug, Serialize)]
pub struct PlanStep {
    pub stage: u32,
    pub mechanism: &'static str,
    /// Number of blocks the step must produce (`K_s + 1`).
    pub blocks: String,
    #[serde(with = "crate::rational::serde_q")]
    pub eps: Q,
    #[serde(with = "crate::rational::serde_q")]
    pub delta: Q,
    /// Construction level reached after the step, when known.
    pub level: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SchedulePlan {
    pub theorem: Theorem,
    pub steps: Vec<PlanStep>,
    pub ledger: BoundLedger,
}

/// `√K_s` for the default schedules (perfect squares).
fn k_root(theorem: Theorem, s: u32) -> BigUint {
    let base: u32 = match theorem {
        Theorem::Theorem3 => 448,
        Theorem::Theorem4 => 480,
    };
    BigUint::from(base) << (s as usize + 2)
}

const TAIL_BITS: u64 = 4096;

/// `Σ_{i=a}^{b} 6/R_i` for `R_i = R_1·2^{i−1}`, as an enclosure once exponents get large.
fn r_partial_sum(r1: u64, a: u64, b: u64) -> Interval {
    if b < a {
        return Interval::exact(Q::zero());
    }
    let c = q(12, r1 as i64);
    let term = |k: u64| -> Interval {
        if k <= TAIL_BITS {
            Interval::exact(pow2_inv(k))
        } else {
            Interval { lo: Q::zero(), hi: pow2_inv(TAIL_BITS) }
        }
    };
    term(a - 1).sub(&term(b)).scale(&c)
}

/// Default schedule and exact ledger for either theorem, over `stages` explicit stages.
pub fn theorem_schedule(theorem: Theorem, stages: u32) -> Result<SchedulePlan> {
    let mut led = BoundLedger::new(match theorem {
        Theorem::Theorem3 => "schedule-theorem3",
        Theorem::Theorem4 => "schedule-theorem4",
    });
    let mut steps = Vec::new();
    match theorem {
        Theorem::Theorem3 => {
            let r1 = 400u64;
            let eps = |s: u32| pow2_inv(s as u64 + 8);
            let delta = |s: u32| pow2_inv(s as u64);
            // Σ_{s≥1} 14/√K_s with √K_s = 448·2^{s+2}: explicit terms plus the geometric tail.
            let mut sum14 = Q::zero();
            for s in 1..=stages {
                sum14 += qi(14) / qu(&k_root(theorem, s));
            }
            let tail14 = qi(14) / qu(&k_root(theorem, stages));
            let total14 = &sum14 + &tail14;
            let total_eps = pow2_inv(8);
            let total_r = q(12, r1 as i64);
            led.push("sum 14/sqrt(K_s)", 0, LedgerValue::rational(total14.clone()), "sum over all stages");
            led.push("sum eps_s", 0, LedgerValue::rational(total_eps.clone()), "sum over all stages");
            led.push("sum 6/R_n", 0, LedgerValue::rational(total_r.clone()), "sum over all levels");
            led.check("sum 14/sqrt(K_s) < 1/32", total14 < q(1, 32), "");
            led.check("sum eps_s < 1/64", total_eps < q(1, 64), "");
            led.check("sum 6/R_n < 1/32 and R_1 >= 400", total_r < q(1, 32) && r1 >= 400, "");
            let floor = q(1, 8) - q(1, 32) - q(1, 32) - q(1, 32);
            led.push("floor", 0, LedgerValue::rational(floor.clone()), "1/8 - 1/32 - 1/32 - 1/32");
            led.check("floor = 1/32", floor == q(1, 32), "");
            let limit = q(1, 8) - &total14 - qi(2) * &total_eps - &total_r;
            led.push("limit", 0, LedgerValue::rational(limit.clone()), "alpha_0 minus all losses");
            led.check("limit > 1/32", limit > q(1, 32), "");

            let alpha0 = q(1, 8);
            let mut n_prev = 0u64;
            let mut alpha = Interval::exact(alpha0);
            for s in 1..=stages {
                let ks = k_root(theorem, s).pow(2u32);
                let kk: u64 = (&ks + 1u32).try_into().map_err(|_| crate::Error::Domain("K_s overflows".into()))?;
                let p = least_power_below(&(Q::one() - recip(kk)), &(eps(s) / qi(2)))?;
                let n_s = if s == 1 { 1 + p } else { n_prev + 1 + p };
                let first = if s == 1 { 1 } else { n_prev };
                let loss_k = if s == 1 { Q::zero() } else { qi(14) / qu(&k_root(theorem, s - 1)) };
                alpha = alpha
                    .sub(&Interval::exact(loss_k + qi(2) * eps(s)))
                    .sub(&r_partial_sum(r1, first, n_s - 1));
                led.push("alpha", s as i64, LedgerValue::Enclosure { value: alpha.clone() }, "stage separation");
                steps.push(PlanStep {
                    stage: s,
                    mechanism: "feldman",
                    blocks: "enough for the next step".into(),
                    eps: eps(s),
                    delta: delta(s),
                    level: Some(if s == 1 { "1".into() } else { (n_prev + 1).to_string() }),
                });
                steps.push(PlanStep { stage: s, mechanism: "shifting", blocks: (&ks + 1u32).to_string(), eps: eps(s), delta: delta(s), level: Some(n_s.to_string()) });
                n_prev = n_s;
            }
            led.check("alpha_s > 1/32", alpha.lo > q(1, 32), format!("after {stages} stages"));
        }
        Theorem::Theorem4 => {
            let eps = |s: u32| -> Q { Q::one() / (qi(128) * qu(&k_root(theorem, s).pow(2u32))) };
            let delta = |s: u32| pow2_inv(s as u64 + 1);
            let mut sum15 = Q::zero();
            let mut sum_eps = Q::zero();
            for s in 0..=stages {
                sum15 += qi(15) / qu(&k_root(theorem, s));
                sum_eps += eps(s);
            }
            // tails: 15/√K_s halves each stage; ε_s quarters
            let total15 = &sum15 + qi(15) / qu(&k_root(theorem, stages));
            let total_eps = &sum_eps + eps(stages) / qi(3);
            led.push("sum 15/sqrt(K_s)", 0, LedgerValue::rational(total15.clone()), "sum over all stages");
            led.push("sum eps_s", 0, LedgerValue::rational(total_eps.clone()), "sum over all stages");
            led.check("sum 15/sqrt(K_s) < 1/32", total15 < q(1, 32), "");
            led.check("sum eps_s < 1/32", total_eps < q(1, 32), "");
            let eps_small = (0..=stages).all(|s| eps(s) < Q::one() / (qi(64) * qu(&k_root(theorem, s).pow(2u32))));
            led.check("eps_s < 1/(64 K_s)", eps_small, "");
            let floor = q(1, 8) - q(1, 32) - q(1, 32);
            led.push("floor", 0, LedgerValue::rational(floor.clone()), "1/8 - 1/32 - 1/32");
            led.check("floor = 1/16", floor == q(1, 16), "");
            let limit = q(1, 8) - &total15 - &total_eps;
            led.push("limit", 0, LedgerValue::rational(limit.clone()), "alpha_1 minus all losses");
            led.check("limit > 1/16", limit > q(1, 16), "");

            let mut alpha = Surd::rational(q(1, 8)).sub(&Surd::over_sqrt(&qi(13), &qu(&k_root(theorem, 0).pow(2u32))));
            led.push("alpha", 1, LedgerValue::exact(alpha.clone()), "1/8 - 13/sqrt(K_0)");
            let mut idx = 1;
            for s in 0..stages {
                let ks = qu(&k_root(theorem, s).pow(2u32));
                alpha = alpha.sub(&Surd::rational(qi(2) / &ks + eps(s)));
                idx += 1;
                led.push("alpha", idx, LedgerValue::exact(alpha.clone()), "after a cycling step");
                steps.push(PlanStep { stage: s + 1, mechanism: "odometer-feldman", blocks: "enough for the next step".into(), eps: eps(s), delta: delta(s), level: None });
                steps.push(PlanStep { stage: s + 1, mechanism: "cycling", blocks: (k_root(theorem, s + 1).pow(2u32) + 1u32).to_string(), eps: eps(s), delta: delta(s), level: None });
                let ks1 = qu(&k_root(theorem, s + 1).pow(2u32));
                alpha = alpha.sub(&Surd::over_sqrt(&qi(13), &ks1));
                idx += 1;
                led.push("alpha", idx, LedgerValue::exact(alpha.clone()), "after a Feldman step");
            }
            led.check("alpha stays above 1/16", alpha.cmp_q(&q(1, 16)) == std::cmp::Ordering::Greater, format!("{idx} terms"));
        }
    }
    Ok(SchedulePlan { theorem, steps, ledger: led })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a_n_stays_above_an_eighth() {
        let led = rothstein_ledger(&default_b, &default_ell, q(1, 4), 64, -1e6);
        assert!(led.all_hold(), "{:?}", led.checks);
        let a2 = led.exact("a", 2).unwrap();
        // a_2 = (1/4)(1 − 2^{-11}) − 15/(2^{11}+1)
        assert_eq!(a2.rational, q(1, 4) * (Q::one() - q(1, 2048)) - q(15, 2049));
    }

    #[test]
    fn constant_without_losses() {
        let led = rothstein_ledger(&|_| Q::zero(), &|_| None, q(1, 5), 10, -1e6);
        assert!((1..=10).all(|n| led.exact("a", n).unwrap().rational == q(1, 5)));
    }

    #[test]
    fn stage_count() {
        assert_eq!(shifting_stage_count(3, &q(1, 2)).unwrap(), 4);
        assert_eq!(shifting_stage_count(2, &q(1, 2)).unwrap(), 3);
    }

    #[test]
    fn schedules() {
        let p3 = theorem_schedule(Theorem::Theorem3, 3).unwrap();
        assert!(p3.ledger.all_hold(), "{:?}", p3.ledger.checks);
        assert_eq!(p3.ledger.exact("floor", 0).unwrap().rational, q(1, 32));
        let p4 = theorem_schedule(Theorem::Theorem4, 3).unwrap();
        assert!(p4.ledger.all_hold(), "{:?}", p4.ledger.checks);
        assert_eq!(p4.ledger.exact("alpha", 1).unwrap().rational, q(1, 8) - q(13, 1920));
    }
}
