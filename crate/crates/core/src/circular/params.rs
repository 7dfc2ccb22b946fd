// SPDX-License-Identifier: MIT
//! Circular coefficient recursions: `q_n`, `p_n`, `R_n` and the spacer profile.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// `(k_n, l_n)` for `n = 0..`, plus the configured `R_1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircularCoefficients {
    pub k: Vec<BigUint>,
    pub l: Vec<BigUint>,
    #[serde(rename = "R1", default = "default_r1")]
    pub r1: BigUint,
}

fn default_r1() -> BigUint {
    BigUint::one()
}

/// Which side conditions a coefficient prefix satisfies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoefficientFlags {
    pub k_at_least_2: bool,
    pub l_at_least_2: bool,
    /// Finite stand-in for summable `1/l_n`: the prefix is strictly increasing.
    pub l_strictly_increasing_proxy: bool,
    /// Per `n`: `l_{n+1} ≥ l_n²` and `l_n ≥ 4·R_{n+1}`, where both sides are available.
    pub lcond: Vec<bool>,
}

impl CircularCoefficients {
    pub fn new(k: &[u64], l: &[u64], r1: u64) -> Self {
        CircularCoefficients {
            k: k.iter().map(|&x| BigUint::from(x)).collect(),
            l: l.iter().map(|&x| BigUint::from(x)).collect(),
            r1: BigUint::from(r1),
        }
    }

    pub fn levels(&self) -> usize {
        self.k.len().min(self.l.len())
    }

    pub fn validate(&self) -> Result<()> {
        if self.k.len() != self.l.len() {
            return domain("k and l prefixes differ in length");
        }
        if self.k.iter().any(|k| k < &BigUint::from(2u32)) {
            return domain("every k_n must be at least 2");
        }
        if self.l.iter().any(|l| l.is_zero()) {
            return domain("every l_n must be at least 1");
        }
        Ok(())
    }

    pub fn flags(&self, params: &CircularParams) -> CoefficientFlags {
        let two = BigUint::from(2u32);
        let lcond = (0..self.levels())
            .map(|n| {
                let sq = self.l.get(n + 1).map(|next| next >= &(&self.l[n] * &self.l[n])).unwrap_or(true);
                let rr = params.r.get(n + 1).map(|r| self.l[n] >= r * 4u32).unwrap_or(true);
                sq && rr
            })
            .collect();
        CoefficientFlags {
            k_at_least_2: self.k.iter().all(|k| k >= &two),
            l_at_least_2: self.l.iter().all(|l| l >= &two),
            l_strictly_increasing_proxy: self.l.windows(2).all(|w| w[0] < w[1]),
            lcond,
        }
    }
}

/// Derived arrays. `r[0]` is unused (zero); `r[1] = R_1`; `r[n] = k_{n−2}·q_{n−2}²` for `n ≥ 2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CircularParams {
    pub k: Vec<BigUint>,
    pub l: Vec<BigUint>,
    pub q: Vec<BigUint>,
    pub p: Vec<BigUint>,
    pub r: Vec<BigUint>,
}

/// `q_{n+1} = k_n l_n q_n²`, `p_{n+1} = p_n k_n l_n q_n + 1`, up to index `n_max`.
pub fn derive_params(coeffs: &CircularCoefficients, n_max: usize) -> Result<CircularParams> {
    coeffs.validate()?;
    if n_max > coeffs.levels() {
        return domain(format!("n_max {n_max} needs {n_max} coefficient pairs, have {}", coeffs.levels()));
    }
    let mut q = vec![BigUint::one()];
    let mut p = vec![BigUint::zero()];
    for n in 0..n_max {
        let kl = &coeffs.k[n] * &coeffs.l[n];
        q.push(&kl * &q[n] * &q[n]);
        p.push(&p[n] * &kl * &q[n] + 1u32);
        if !p[n + 1].gcd(&q[n + 1]).is_one() {
            return Err(Error::Internal(format!("p_{} and q_{} not coprime", n + 1, n + 1)));
        }
    }
    let mut r = vec![BigUint::zero(), coeffs.r1.clone()];
    for n in 2..=n_max + 1 {
        r.push(&coeffs.k[n - 2] * &q[n - 2] * &q[n - 2]);
    }
    Ok(CircularParams { k: coeffs.k[..n_max].to_vec(), l: coeffs.l[..n_max].to_vec(), q, p, r })
}

impl CircularParams {
    /// `p_n^{-1} mod q_n` (zero when `n = 0`).
    pub fn p_inverse(&self, n: usize) -> Result<BigUint> {
        if n == 0 {
            return Ok(BigUint::zero());
        }
        let (p, q) = (BigInt::from(self.p[n].clone()), BigInt::from(self.q[n].clone()));
        let e = p.extended_gcd(&q);
        if !e.gcd.is_one() {
            return Err(Error::Internal(format!("p_{n} not invertible mod q_{n}")));
        }
        Ok(e.x.mod_floor(&q).to_biguint().expect("non-negative"))
    }

    /// `j_i` for one `i`.
    pub fn j_at(&self, n: usize, i: &BigUint) -> Result<BigUint> {
        if i >= &self.q[n] {
            return domain(format!("index {i} outside 0..{}", self.q[n]));
        }
        Ok((self.p_inverse(n)? * i) % &self.q[n])
    }
}

/// The whole profile `j_0, …, j_{q_n−1}`.
pub fn spacer_profile(params: &CircularParams, n: usize) -> Result<Vec<BigUint>> {
    let qn = params.q.get(n).ok_or_else(|| Error::Domain(format!("level {n} not derived")))?;
    let len = qn.to_usize().filter(|&x| x <= 1 << 26).ok_or_else(|| Error::Budget(format!("q_{n} = {qn} too large")))?;
    let inv = params.p_inverse(n)?;
    Ok((0..len).map(|i| (&inv * BigUint::from(i)) % qn).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn listed_recursion() {
        let c = CircularCoefficients::new(&[2, 2], &[3, 3], 1);
        let p = derive_params(&c, 2).unwrap();
        assert_eq!(p.q, u(&[1, 6, 216]));
        assert_eq!(p.p, u(&[0, 1, 37]));
        assert_eq!(p.r[2], BigUint::from(2u32));
    }

    #[test]
    fn profiles() {
        let c = CircularCoefficients::new(&[2, 2], &[3, 3], 1);
        let p = derive_params(&c, 2).unwrap();
        assert_eq!(spacer_profile(&p, 0).unwrap(), u(&[0]));
        assert_eq!(spacer_profile(&p, 1).unwrap(), u(&[0, 1, 2, 3, 4, 5]));
        let j = spacer_profile(&p, 2).unwrap();
        // 37 · 181 = 6697 = 31 · 216 + 1.
        assert_eq!(j[1], BigUint::from(181u32));
        for (i, ji) in j.iter().enumerate() {
            assert_eq!((ji * 37u32) % 216u32, BigUint::from(i) % 216u32);
        }
    }

    #[test]
    fn rejects_bad_coefficients() {
        assert!(derive_params(&CircularCoefficients::new(&[1], &[3], 1), 1).is_err());
        assert!(derive_params(&CircularCoefficients::new(&[2], &[3], 1), 2).is_err());
    }
}
