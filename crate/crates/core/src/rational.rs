// SPDX-License-Identifier: MIT
//! Exact rational helpers and certified enclosures for square roots.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

use crate::error::{Error, Result};

pub type Q = BigRational;

/// `n/d` as an exact rational. Panics on `d == 0`.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qu(n: &BigUint) -> Q {
    Q::from_integer(BigInt::from(n.clone()))
}

/// `n/d` for big unsigned operands.
pub fn ratio(n: &BigUint, d: &BigUint) -> Q {
    Q::new(BigInt::from(n.clone()), BigInt::from(d.clone()))
}

pub fn clamp01(x: Q) -> Q {
    if x.is_negative() {
        Q::zero()
    } else if x > Q::one() {
        Q::one()
    } else {
        x
    }
}

/// Parses `"p/q"`, `"p"` or a plain decimal such as `"0.25"`.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Domain(format!("not a rational: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Q::new(n, d));
    }
    if let Some((i, f)) = s.split_once('.') {
        let neg = i.starts_with('-');
        let ip: BigInt = if i.is_empty() || i == "-" { BigInt::zero() } else { i.parse().map_err(|_| bad())? };
        let fp: BigInt = f.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), f.len());
        let frac = Q::new(fp, scale);
        let whole = Q::from_integer(ip.abs());
        let v = whole + frac;
        return Ok(if neg { -v } else { v });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Q::from_integer(n))
}

pub fn to_f64(x: &Q) -> f64 {
    match (x.numer().to_f64(), x.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Scale down both sides before dividing.
            let nb = x.numer().bits() as i64;
            let db = x.denom().bits() as i64;
            let shift = (nb.max(db) - 1000).max(0) as usize;
            let n = (x.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (x.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

/// Decimal rendering with a fixed number of fractional digits (truncated toward zero).
pub fn decimal(x: &Q, digits: usize) -> String {
    let neg = x.is_negative();
    let a = x.abs();
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = (a.numer() * &scale) / a.denom();
    let int = &scaled / &scale;
    let frac = &scaled % &scale;
    let mut s = String::new();
    if neg && !scaled.is_zero() {
        s.push('-');
    }
    s.push_str(&int.to_string());
    if digits > 0 {
        s.push('.');
        s.push_str(&format!("{:0>width$}", frac.to_string(), width = digits));
    }
    s
}

/// A closed interval `[lo, hi]` with rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "serde_q")]
    pub lo: Q,
    #[serde(with = "serde_q")]
    pub hi: Q,
}

impl Interval {
    pub fn exact(x: Q) -> Self {
        Interval { lo: x.clone(), hi: x }
    }
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }
    pub fn add(&self, o: &Interval) -> Interval {
        Interval { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }
    pub fn sub(&self, o: &Interval) -> Interval {
        Interval { lo: &self.lo - &o.hi, hi: &self.hi - &o.lo }
    }
    pub fn scale(&self, c: &Q) -> Interval {
        let a = &self.lo * c;
        let b = &self.hi * c;
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }
    pub fn mul(&self, o: &Interval) -> Interval {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Interval { lo, hi }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact() {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

/// Certified enclosure of `sqrt(x)` for `x ≥ 0`, with endpoints `2^-bits` apart at most.
pub fn sqrt_interval(x: &Q, bits: u32) -> Interval {
    assert!(!x.is_negative(), "sqrt of a negative rational");
    // sqrt(p/q) = sqrt(p*q)/q; scale by 4^bits to get `bits` fractional binary digits.
    let p = x.numer().to_biguint().unwrap();
    let d = x.denom().to_biguint().unwrap();
    let scaled = (&p * &d) << (2 * bits as usize);
    let r = scaled.sqrt();
    let exact = &r * &r == scaled;
    let den = BigInt::from(d) << bits as usize;
    let lo = Q::new(BigInt::from(r.clone()), den.clone());
    let hi = if exact { lo.clone() } else { Q::new(BigInt::from(r + 1u32), den) };
    Interval { lo, hi }
}

/// Enclosure of `c / sqrt(x)` for positive `x` and nonnegative `c`.
pub fn c_over_sqrt(c: &Q, x: &Q, bits: u32) -> Interval {
    let s = sqrt_interval(x, bits);
    assert!(s.lo.is_positive(), "c/sqrt(x) needs x > 0");
    Interval { lo: c / &s.hi, hi: c / &s.lo }
}

/// `c/sqrt(x) < y` decided exactly by squaring (all of `c`, `y` nonnegative, `x > 0`).
pub fn c_over_sqrt_lt(c: &Q, x: &Q, y: &Q) -> bool {
    if !y.is_positive() {
        return false;
    }
    c * c < y * y * x
}

/// `floor(x·2^bits)/2^bits`.
pub fn round_down(x: &Q, bits: u32) -> Q {
    let scale = BigInt::one() << bits as usize;
    Q::new((x * Q::from_integer(scale.clone())).floor().to_integer(), scale)
}

/// `ceil(x·2^bits)/2^bits`.
pub fn round_up(x: &Q, bits: u32) -> Q {
    let scale = BigInt::one() << bits as usize;
    Q::new((x * Q::from_integer(scale.clone())).ceil().to_integer(), scale)
}

/// Enclosure of `r^p` for `0 ≤ r ≤ 1`, by squaring with outward rounding.
pub fn pow_interval(r: &Q, p: u64, bits: u32) -> Interval {
    let mut acc = Interval::exact(Q::one());
    let mut base = Interval::exact(r.clone());
    let mut e = p;
    while e > 0 {
        if e & 1 == 1 {
            let m = acc.mul(&base);
            acc = Interval { lo: round_down(&m.lo, bits), hi: round_up(&m.hi, bits) };
        }
        e >>= 1;
        if e > 0 {
            let m = base.mul(&base);
            base = Interval { lo: round_down(&m.lo, bits), hi: round_up(&m.hi, bits) };
        }
    }
    acc
}

/// Least `p ≥ 1` with `r^p < t`, for `0 < r < 1` and `0 < t`. Decided exactly
/// (by iteration for small `p`, otherwise by certified enclosures around a float estimate).
pub fn least_power_below(r: &Q, t: &Q) -> Result<u64> {
    if !r.is_positive() || *r >= Q::one() || !t.is_positive() {
        return Err(Error::Domain(format!("least power: need 0 < r = {r} < 1 and t = {t} > 0")));
    }
    // ln_1p keeps the estimate accurate when r is within 1e-8 of 1
    let est = (to_f64(t).ln() / to_f64(&(r - Q::one())).ln_1p()).ceil();
    if !est.is_finite() || est > 1e15 {
        return Err(Error::Domain("least power: estimate out of range".into()));
    }
    let est = est.max(1.0) as u64;
    if est <= 256 {
        let mut x = r.clone();
        for p in 1..=512u64 {
            if x < *t {
                return Ok(p);
            }
            x *= r;
        }
    }
    for bits in [256u32, 1024, 4096] {
        let below = |p: u64| -> Option<bool> {
            let i = pow_interval(r, p, bits);
            if i.hi < *t {
                Some(true)
            } else if i.lo >= *t {
                Some(false)
            } else {
                None
            }
        };
        let margin = 64 + est / 1_000_000;
        let mut lo = est.saturating_sub(margin).max(1);
        let mut hi = est + margin;
        if lo > 1 && below(lo) != Some(false) || below(hi) != Some(true) {
            continue;
        }
        // invariant: below(lo) = false, below(hi) = true
        let mut ok = true;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            match below(mid) {
                Some(true) => hi = mid,
                Some(false) => lo = mid,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(hi);
        }
    }
    Err(Error::Internal("least power: could not certify".into()))
}

/// `n = a²·b` with `b` free of square factors found by trial division up to `10^5`
/// (and a final perfect-square test); exact for every `n < 10^10`.
pub fn square_split(n: &BigUint) -> (BigUint, BigUint) {
    let mut a = BigUint::one();
    let mut b = BigUint::one();
    let mut m = n.clone();
    let mut d = 2u32;
    while d < 100_000 && BigUint::from(d) * BigUint::from(d) <= m {
        let dd = BigUint::from(d);
        let mut k = 0u32;
        while (&m % &dd).is_zero() {
            m /= &dd;
            k += 1;
        }
        for _ in 0..k / 2 {
            a *= &dd;
        }
        if k % 2 == 1 {
            b *= &dd;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    let r = m.sqrt();
    if &r * &r == m {
        a *= r;
    } else {
        b *= m;
    }
    (a, b)
}

/// An exact real of the form `r + Σ c_y·√y` with rational `r`, `c_y` and square-free integers `y > 1`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Surd {
    pub rational: Q,
    pub terms: std::collections::BTreeMap<BigUint, Q>,
}

impl Surd {
    pub fn rational(x: Q) -> Self {
        Surd { rational: x, terms: Default::default() }
    }

    pub fn zero() -> Self {
        Surd::rational(Q::zero())
    }

    /// `c·√x` for rational `x ≥ 0`.
    pub fn sqrt_times(c: &Q, x: &Q) -> Self {
        assert!(!x.is_negative(), "square root of a negative rational");
        if x.is_zero() || c.is_zero() {
            return Surd::zero();
        }
        // √(p/q) = √(pq)/q
        let p = x.numer().to_biguint().unwrap();
        let d = x.denom().to_biguint().unwrap();
        let (a, b) = square_split(&(&p * &d));
        let coef = c * ratio(&a, &d);
        let mut s = Surd::zero();
        if b.is_one() {
            s.rational = coef;
        } else {
            s.terms.insert(b, coef);
        }
        s
    }

    /// `c/√x` for rational `x > 0`.
    pub fn over_sqrt(c: &Q, x: &Q) -> Self {
        assert!(x.is_positive(), "division by the square root of a non-positive rational");
        Surd::sqrt_times(&(c / x), x)
    }

    pub fn is_rational(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Surd) -> Surd {
        let mut s = self.clone();
        s.rational += &o.rational;
        for (y, c) in &o.terms {
            let e = s.terms.entry(y.clone()).or_insert_with(Q::zero);
            *e += c;
            if e.is_zero() {
                s.terms.remove(y);
            }
        }
        s
    }

    pub fn scale(&self, k: &Q) -> Surd {
        if k.is_zero() {
            return Surd::zero();
        }
        Surd { rational: &self.rational * k, terms: self.terms.iter().map(|(y, c)| (y.clone(), c * k)).collect() }
    }

    pub fn sub(&self, o: &Surd) -> Surd {
        self.add(&o.scale(&-Q::one()))
    }

    pub fn add_q(&self, x: &Q) -> Surd {
        let mut s = self.clone();
        s.rational += x;
        s
    }

    pub fn enclose(&self, bits: u32) -> Interval {
        let mut acc = Interval::exact(self.rational.clone());
        for (y, c) in &self.terms {
            acc = acc.add(&sqrt_interval(&qu(y), bits).scale(c));
        }
        acc
    }

    /// Exact comparison with a rational: refines the enclosure until it separates.
    pub fn cmp_q(&self, x: &Q) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        if self.is_rational() {
            return self.rational.cmp(x);
        }
        let mut bits = 64;
        loop {
            let i = self.enclose(bits);
            if i.hi < *x {
                return Less;
            }
            if i.lo > *x {
                return Greater;
            }
            // a sum of irrational square roots with nonzero coefficients is never rational
            bits *= 2;
            assert!(bits <= 1 << 16, "surd comparison did not separate");
        }
    }

    pub fn to_f64(&self) -> f64 {
        let i = self.enclose(64);
        to_f64(&((&i.lo + &i.hi) / qi(2)))
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rational)?;
        for (y, c) in &self.terms {
            write!(f, " + ({c})*sqrt({y})")?;
        }
        Ok(())
    }
}

impl Serialize for Surd {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod serde_q {
    use super::*;
    pub fn serialize<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<Q>`.
pub mod serde_qvec {
    use super::*;
    pub fn serialize<S: Serializer>(x: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<String> = x.iter().map(|r| r.to_string()).collect();
        v.serialize(s)
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Q>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|s| parse_q(s).map_err(serde::de::Error::custom)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn surd_folding() {
        // 1/√8 = √2/4
        let a = Surd::over_sqrt(&qi(1), &qi(8));
        assert_eq!(a.terms.get(&BigUint::from(2u32)), Some(&q(1, 4)));
        // 14/√(196) is rational
        assert_eq!(Surd::over_sqrt(&qi(14), &qi(196)), Surd::rational(qi(1)));
        let z = a.sub(&Surd::sqrt_times(&q(1, 4), &qi(2)));
        assert_eq!(z, Surd::zero());
        assert_eq!(Surd::sqrt_times(&qi(1), &qi(2)).cmp_q(&q(141421, 100000)), std::cmp::Ordering::Greater);
        assert_eq!(Surd::sqrt_times(&qi(1), &qi(2)).cmp_q(&q(141422, 100000)), std::cmp::Ordering::Less);
    }

    #[test]
    fn least_powers() {
        assert_eq!(least_power_below(&q(2, 3), &q(1, 4)).unwrap(), 4);
        // (1 − 1/10^6)^p < 1/2 first at p = 693147
        assert_eq!(least_power_below(&q(999_999, 1_000_000), &q(1, 2)).unwrap(), 693_147);
    }

    #[test]
    fn split_squares() {
        assert_eq!(square_split(&BigUint::from(72u32)), (BigUint::from(6u32), BigUint::from(2u32)));
        assert_eq!(square_split(&BigUint::from(1u32)), (BigUint::from(1u32), BigUint::from(1u32)));
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_q("3/6").unwrap(), q(1, 2));
        assert_eq!(parse_q("0.25").unwrap(), q(1, 4));
        assert_eq!(parse_q("-1.5").unwrap(), q(-3, 2));
        assert_eq!(parse_q("7").unwrap(), qi(7));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("x").is_err());
    }

    #[test]
    fn sqrt_enclosure_brackets() {
        for n in 1..200i64 {
            let x = q(n, 7);
            let s = sqrt_interval(&x, 40);
            assert!(&s.lo * &s.lo <= x && x <= &s.hi * &s.hi);
        }
        assert!(sqrt_interval(&qi(49), 8).is_exact());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal(&q(1, 3), 4), "0.3333");
        assert_eq!(decimal(&q(-5, 4), 2), "-1.25");
    }
}
