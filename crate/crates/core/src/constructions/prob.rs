// SPDX-License-Identifier: MIT
//! Finite joint distributions: ε-independence and the conditioning estimate.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{domain, Result};
use crate::metric::Sym;
use crate::rational::Q;

/// A finite (sub-)probability on strings of block ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistributionTable {
    pub outcomes: Vec<Vec<Sym>>,
    pub probs: Vec<Q>,
}

impl DistributionTable {
    pub fn new(outcomes: Vec<Vec<Sym>>, probs: Vec<Q>) -> Result<Self> {
        if outcomes.len() != probs.len() {
            return domain("one probability per outcome");
        }
        if probs.iter().any(|p| p.is_negative()) {
            return domain("negative probability");
        }
        if probs.iter().sum::<Q>() > Q::one() {
            return domain("probabilities sum above 1");
        }
        Ok(DistributionTable { outcomes, probs })
    }

    pub fn mass(&self) -> Q {
        self.probs.iter().sum()
    }
}

/// Joint (sub-)probabilities `p[q][r]` of atoms `Q_q ∩ R_r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointTable {
    pub p: Vec<Vec<Q>>,
}

impl JointTable {
    pub fn new(p: Vec<Vec<Q>>) -> Self {
        JointTable { p }
    }

    pub fn total(&self) -> Q {
        self.p.iter().flatten().sum()
    }

    pub fn is_valid(&self) -> bool {
        let width = self.p.first().map_or(0, |r| r.len());
        self.p.iter().all(|r| r.len() == width)
            && self.p.iter().flatten().all(|x| !x.is_negative())
            && self.total() <= Q::one()
    }

    pub fn row_mass(&self) -> Vec<Q> {
        self.p.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_mass(&self) -> Vec<Q> {
        let w = self.p.first().map_or(0, |r| r.len());
        (0..w).map(|j| self.p.iter().map(|r| &r[j]).sum()).collect()
    }

    pub fn transpose(&self) -> JointTable {
        let w = self.p.first().map_or(0, |r| r.len());
        JointTable { p: (0..w).map(|j| self.p.iter().map(|r| r[j].clone()).collect()).collect() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IndependenceReport {
    /// Smallest ε with `R ⊥^ε Q`.
    #[serde(with = "crate::rational::serde_q")]
    pub epsilon: Q,
    /// Row indices of the good atoms realising it.
    pub good_rows: Vec<usize>,
}

/// Smallest ε such that rows (Q-atoms) of mass ≥ 1−ε all have `Σ_R |ν(R|Q) − ν(R)| ≤ ε`.
///
/// Atoms are sorted by their deviation; taking the `t` least deviating ones costs
/// `max(d_t, 1 − mass_t)`, and the best `t` gives ε. Zero-mass rows are skipped.
pub fn epsilon_independence(joint: &JointTable) -> IndependenceReport {
    let total = joint.total();
    let rows = joint.row_mass();
    let cols = joint.col_mass();
    let marg: Vec<Q> = cols.iter().map(|c| c / &total).collect();
    let mut devs: Vec<(Q, Q, usize)> = Vec::new();
    for (i, row) in joint.p.iter().enumerate() {
        if rows[i].is_zero() {
            continue;
        }
        let d: Q = row.iter().zip(&marg).map(|(x, m)| (x / &rows[i] - m).abs()).sum();
        devs.push((d, &rows[i] / &total, i));
    }
    devs.sort_by(|a, b| a.0.cmp(&b.0).then(a.2.cmp(&b.2)));
    let mut best = Q::one();
    let mut best_t = 0;
    let mut mass = Q::zero();
    for (t, (d, m, _)) in devs.iter().enumerate() {
        mass += m;
        let need = d.clone().max(Q::one() - &mass);
        if need < best {
            best = need;
            best_t = t + 1;
        }
    }
    let good_rows = devs[..best_t].iter().map(|x| x.2).collect();
    IndependenceReport { epsilon: best, good_rows }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditioningReport {
    pub hypotheses_met: bool,
    #[serde(with = "crate::rational::serde_q")]
    pub distance: Q,
    /// `P`-mass of rows whose conditional distance is at least `2√ε`.
    #[serde(with = "crate::rational::serde_q")]
    pub exceptional_mass: Q,
    #[serde(with = "crate::rational::serde_q")]
    pub max_good_deviation: Q,
    /// `exceptional_mass ≤ √ε`, decided by squaring.
    pub conclusion_holds: bool,
}

/// Measures the conclusion of the conditioning estimate for `P` against `P′` at level `eps`.
pub fn conditioning_check(p: &JointTable, pp: &JointTable, eps: &Q) -> ConditioningReport {
    let distance: Q = p.p.iter().flatten().zip(pp.p.iter().flatten()).map(|(a, b)| (a - b).abs()).sum();
    let rows = p.row_mass();
    let rows2 = pp.row_mass();
    let positivity = rows.iter().zip(&rows2).all(|(a, b)| a.is_zero() || b.is_positive());
    let hypotheses_met = distance < *eps && positivity && eps.is_positive() && *eps < Q::one();
    let mut exceptional = Q::zero();
    let mut max_good = Q::zero();
    for (i, row) in p.p.iter().enumerate() {
        if rows[i].is_zero() || rows2[i].is_zero() {
            continue;
        }
        let d: Q = row.iter().zip(&pp.p[i]).map(|(a, b)| (a / &rows[i] - b / &rows2[i]).abs()).sum();
        // d < 2√ε  ⟺  d² < 4ε
        if &d * &d < eps * Q::from_integer(4.into()) {
            max_good = max_good.max(d);
        } else {
            exceptional += &rows[i];
        }
    }
    let conclusion_holds = &exceptional * &exceptional <= *eps;
    ConditioningReport { hypotheses_met, distance, exceptional_mass: exceptional, max_good_deviation: max_good, conclusion_holds }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn product_is_independent() {
        let a = [q(1, 3), q(2, 3)];
        let b = [q(1, 4), q(3, 4)];
        let t = JointTable::new(a.iter().map(|x| b.iter().map(|y| x * y).collect()).collect());
        assert_eq!(epsilon_independence(&t).epsilon, Q::zero());
    }

    #[test]
    fn fully_dependent() {
        let t = JointTable::new(vec![vec![q(1, 2), Q::zero()], vec![Q::zero(), q(1, 2)]]);
        // Each row deviates by 1; taking no rows costs 1 as well.
        assert_eq!(epsilon_independence(&t).epsilon, Q::one());
    }

    #[test]
    fn identical_tables_condition_trivially() {
        let t = JointTable::new(vec![vec![q(1, 4), q(1, 4)], vec![q(1, 8), q(3, 8)]]);
        let r = conditioning_check(&t, &t, &q(1, 10));
        assert!(r.hypotheses_met && r.conclusion_holds);
        assert_eq!(r.exceptional_mass, Q::zero());
    }
}
