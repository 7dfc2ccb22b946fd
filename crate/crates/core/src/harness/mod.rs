// SPDX-License-Identifier: MIT
//! Named desk-scale checks, pairwise distance tables and report emission.
//!
//! A check compares one measured rational with a bound. When the bound only
//! holds under hypotheses the desk parameters do not meet, the verdict is
//! `vacuous` and the measured value is still reported.

pub mod closeness;
pub mod report;
mod suites;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::metric::{fbar_bounds, FbarBounds};
use crate::rational::Q;
use crate::words::{WordExpr, WordRef};

pub use report::{emit_report, parse_report, write_report, ReportFormat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Vacuous,
}

/// How `measured` must relate to `bound`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
    /// No bound: `measured` is 1 when the property holds, 0 otherwise.
    Holds,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Ge => ">=",
            Relation::Gt => ">",
            Relation::Eq => "=",
            Relation::Holds => "holds",
        }
    }

    pub fn satisfied(self, measured: &Q, bound: Option<&Q>) -> bool {
        match (self, bound) {
            (Relation::Holds, _) => measured == &Q::from_integer(1.into()),
            (Relation::Le, Some(b)) => measured <= b,
            (Relation::Lt, Some(b)) => measured < b,
            (Relation::Ge, Some(b)) => measured >= b,
            (Relation::Gt, Some(b)) => measured > b,
            (Relation::Eq, Some(b)) => measured == b,
            (_, None) => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub id: String,
    pub instance: String,
    pub measured: Q,
    /// False when `measured` is a certified bound on the quantity rather than its value.
    pub measured_exact: bool,
    pub relation: Relation,
    pub bound: Option<Q>,
    pub hypotheses_met: bool,
    pub verdict: Verdict,
    pub detail: String,
    pub runtime_ms: Option<u64>,
}

impl CheckResult {
    pub fn new(id: &str, instance: impl Into<String>, measured: Q, relation: Relation, bound: Option<Q>) -> Self {
        let mut c = CheckResult {
            id: id.into(),
            instance: instance.into(),
            measured,
            measured_exact: true,
            relation,
            bound,
            hypotheses_met: true,
            verdict: Verdict::Fail,
            detail: String::new(),
            runtime_ms: None,
        };
        c.decide();
        c
    }

    /// A yes/no property.
    pub fn holds(id: &str, instance: impl Into<String>, ok: bool) -> Self {
        CheckResult::new(id, instance, Q::from_integer((ok as i32).into()), Relation::Holds, None)
    }

    /// A count of violations that must be zero.
    pub fn violations(id: &str, instance: impl Into<String>, count: u64) -> Self {
        CheckResult::new(id, instance, Q::from_integer(count.into()), Relation::Le, Some(Q::from_integer(0.into())))
    }

    pub fn with_hypotheses(mut self, met: bool) -> Self {
        self.hypotheses_met = met;
        self.decide();
        self
    }

    pub fn inexact(mut self) -> Self {
        self.measured_exact = false;
        self
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }

    /// Whether the measured value satisfies the relation, whatever the verdict.
    pub fn satisfied(&self) -> bool {
        self.relation.satisfied(&self.measured, self.bound.as_ref())
    }

    fn decide(&mut self) {
        self.verdict = if !self.hypotheses_met {
            Verdict::Vacuous
        } else if self.satisfied() {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
    }

    /// A failed check for a run that errored before measuring anything.
    pub fn errored(id: &str, instance: impl Into<String>, e: &Error) -> Self {
        CheckResult::holds(id, instance, false).detail(format!("error: {e}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    MetricCore,
    Circular,
    Feldman,
    Closeness,
    Ledgers,
    Esys,
    All,
    /// The empty suite.
    None,
}

impl Suite {
    pub const NAMED: [Suite; 6] = [Suite::MetricCore, Suite::Circular, Suite::Feldman, Suite::Closeness, Suite::Ledgers, Suite::Esys];

    pub fn name(self) -> &'static str {
        match self {
            Suite::MetricCore => "metric-core",
            Suite::Circular => "circular",
            Suite::Feldman => "feldman",
            Suite::Closeness => "closeness",
            Suite::Ledgers => "ledgers",
            Suite::Esys => "esys",
            Suite::All => "all",
            Suite::None => "none",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let all = [Suite::MetricCore, Suite::Circular, Suite::Feldman, Suite::Closeness, Suite::Ledgers, Suite::Esys, Suite::All, Suite::None];
        all.into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown suite {s:?}; expected one of metric-core, circular, feldman, closeness, ledgers, esys, all, none")))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckConfig {
    pub seed: u64,
    /// Elementary-step budget for certified f̄ bounds.
    pub budget: u64,
    /// Record wall-clock time per check (makes reports non-reproducible).
    pub timing: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { seed: 20_240_601, budget: 1_000_000_000, timing: false }
    }
}

/// Everything a check job gets: the config and its own random stream.
pub struct Ctx<'a> {
    pub config: &'a CheckConfig,
    pub rng: ChaCha8Rng,
}

type Job = (&'static str, fn(&mut Ctx<'_>) -> Vec<CheckResult>);

fn jobs(suite: Suite) -> Vec<Job> {
    match suite {
        Suite::All => Suite::NAMED.into_iter().flat_map(jobs).collect(),
        Suite::None => Vec::new(),
        Suite::MetricCore => suites::METRIC_CORE.to_vec(),
        Suite::Circular => suites::CIRCULAR.to_vec(),
        Suite::Feldman => suites::FELDMAN.to_vec(),
        Suite::Closeness => closeness::JOBS.to_vec(),
        Suite::Ledgers => suites::LEDGERS.to_vec(),
        Suite::Esys => suites::ESYS.to_vec(),
    }
}

/// Names of the jobs a suite runs, in report order.
pub fn job_names(suite: Suite) -> Vec<&'static str> {
    jobs(suite).into_iter().map(|(n, _)| n).collect()
}

/// Runs every check of a suite. Jobs run in parallel; results keep job order.
///
/// Each job gets its own ChaCha stream derived from the seed and the job name,
/// so results do not depend on scheduling or on which other jobs run.
pub fn run_checks(suite: Suite, config: &CheckConfig) -> Vec<CheckResult> {
    run_jobs(&jobs(suite), config)
}

/// Runs the named jobs only (names as in [`job_names`]).
pub fn run_named(names: &[&str], config: &CheckConfig) -> Result<Vec<CheckResult>> {
    let all = jobs(Suite::All);
    let mut picked = Vec::new();
    for n in names {
        match all.iter().find(|(m, _)| m == n) {
            Some(j) => picked.push(*j),
            None => return domain(format!("unknown check job {n:?}")),
        }
    }
    Ok(run_jobs(&picked, config))
}

fn stream_of(name: &str) -> u64 {
    // FNV-1a, stable across platforms and releases
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

fn run_jobs(jobs: &[Job], config: &CheckConfig) -> Vec<CheckResult> {
    let per_job: Vec<Vec<CheckResult>> = jobs
        .par_iter()
        .map(|(name, f)| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(stream_of(name));
            let mut ctx = Ctx { config, rng };
            let t = Instant::now();
            let mut out = f(&mut ctx);
            if config.timing {
                let ms = t.elapsed().as_millis() as u64;
                for r in &mut out {
                    r.runtime_ms = Some(ms);
                }
            }
            out
        })
        .collect();
    per_job.into_iter().flatten().collect()
}

/// Pairwise certified f̄ between words, or between their `[start, start+len)` substrings.
///
/// The table is symmetric with zeros on the diagonal; off-diagonal pairs are
/// evaluated in parallel.
pub fn pairwise_fbar_table(words: &[WordRef], substring: Option<(&BigUint, &BigUint)>, budget: u64) -> Result<Vec<Vec<FbarBounds>>> {
    if words.len() < 2 {
        return domain("a distance table needs at least two words");
    }
    let cut: Vec<WordRef> = match substring {
        None => words.to_vec(),
        Some((start, len)) => words.iter().map(|w| WordExpr::slice(w, start, len)).collect::<Result<_>>()?,
    };
    let n = cut.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let vals: Vec<FbarBounds> = pairs.par_iter().map(|&(i, j)| fbar_bounds(&cut[i], &cut[j], budget)).collect();
    let zero = FbarBounds { lower: Q::from_integer(0.into()), upper: Q::from_integer(0.into()), budget_spent: 0, exact: true };
    let mut table = vec![vec![zero; n]; n];
    for ((i, j), v) in pairs.into_iter().zip(vals) {
        table[j][i] = v.clone();
        table[i][j] = v;
    }
    Ok(table)
}
