// SPDX-License-Identifier: MIT
//! `fbar`: build constructions, apply the circular functor, measure distances
//! between word files and run the check suites.
//!
//! Exit status: 0 when everything passes, 1 when a check fails, 2 on usage or
//! input errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde_json::json;

use fbar_core::circular::{functor_apply, functor_invert, CircularCoefficients};
use fbar_core::constructions::mechanism;
use fbar_core::constructions::MechanismParams;
use fbar_core::harness::{self, CheckConfig, CheckResult, ReportFormat, Suite, Verdict};
use fbar_core::metric::{fbar_bounds, fbar_to_cyclic, ftilde, CyclicDistance, SymbolString};
use fbar_core::rational::{decimal, parse_q, Q};
use fbar_core::words::io::{read_word, word_to_string};
use fbar_core::words::{layout, symbol_level, ConstructionSequence, SequenceKind, WordExpr, WordRef};

/// Largest number of runs written to one word file.
const MAX_RUNS: u64 = 50_000_000;
/// Build outputs with more runs than this are not written.
const WORD_FILE_RUNS: u64 = 1_000_000;
/// Largest word materialised for f̃ and cyclic distances.
const MATERIALIZE_CAP: usize = 1 << 24;

#[derive(Parser)]
#[command(name = "fbar", version, about = "f-bar distances, construction sequences and their checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a shifting or cycling mechanism from a JSON config.
    Build {
        config: PathBuf,
        /// Number of building blocks; overrides `N` in the config.
        #[arg(long)]
        blocks: Option<u64>,
        /// Directory for the manifest and the final-stage word files.
        #[arg(long)]
        out: PathBuf,
    },
    /// Map odometer words of one level to circular words, or back.
    Functor {
        /// JSON sequence file: alphabet, layouts per level and `l_n`.
        sequence: PathBuf,
        #[arg(long)]
        level: usize,
        /// Directory for `circular-<level>-<i>.word` files.
        #[arg(long, conflicts_with = "invert")]
        out: Option<PathBuf>,
        /// A circular word file to map back to its odometer word (printed to stdout).
        #[arg(long)]
        invert: Option<PathBuf>,
    },
    /// Distance between two word files.
    Fbar {
        a: PathBuf,
        b: PathBuf,
        /// Compare the substrings `[start, start+len)` of both words.
        #[arg(long, num_args = 2, value_names = ["START", "LEN"])]
        substring: Option<Vec<BigUint>>,
        /// Elementary-step budget for certified bounds.
        #[arg(long, default_value_t = 1_000_000_000)]
        budget: u64,
        #[arg(long, value_enum, default_value_t = Mode::Fbar)]
        mode: Mode,
        /// Cut-off for `--mode cyclic` (at most 1/2).
        #[arg(long, default_value = "1/2")]
        threshold: String,
    },
    /// Run check suites or single check jobs.
    Verify {
        /// Suites to run (metric-core, circular, feldman, closeness, ledgers, esys, all, none).
        #[arg(long = "suite")]
        suites: Vec<String>,
        /// Individual check jobs, by name.
        #[arg(long = "check")]
        checks: Vec<String>,
        /// List the jobs of each suite and exit.
        #[arg(long)]
        list: bool,
        #[arg(long, default_value_t = CheckConfig::default().seed)]
        seed: u64,
        #[arg(long, default_value_t = CheckConfig::default().budget)]
        budget: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record per-job wall-clock times (reports stop being byte-identical).
        #[arg(long)]
        timing: bool,
    },
    /// Summarise a saved report.
    Report {
        file: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Re-emit the report in this format instead of a summary.
        #[arg(long, value_enum)]
        convert: Option<Format>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Fbar,
    Ftilde,
    Cyclic,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => ReportFormat::Json,
            Format::Csv => ReportFormat::Csv,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("FBAR_THREADS") {
        let n: usize = v.parse().with_context(|| format!("FBAR_THREADS must be a positive integer, got {v:?}"))?;
        if n == 0 {
            bail!("FBAR_THREADS must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn dispatch(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Build { config, blocks, out } => build(&config, blocks, &out),
        Command::Functor { sequence, level, out, invert } => functor(&sequence, level, out.as_deref(), invert.as_deref()),
        Command::Fbar { a, b, substring, budget, mode, threshold } => distance(&a, &b, substring, budget, mode, &threshold),
        Command::Verify { suites, checks, list, seed, budget, format, out, timing } => {
            verify(&suites, &checks, list, CheckConfig { seed, budget, timing }, format, out.as_deref())
        }
        Command::Report { file, format, convert } => report(&file, format, convert),
    }
}

fn read_text(p: &Path) -> Result<String> {
    fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
}

fn load_word(p: &Path) -> Result<(u32, WordRef)> {
    read_word(&read_text(p)?).with_context(|| format!("parsing word file {}", p.display()))
}

/// Writes a word file unless it has more than [`WORD_FILE_RUNS`] runs.
fn write_small(path: &Path, w: &WordRef, alphabet: u32) -> Result<bool> {
    match word_to_string(w, alphabet, WORD_FILE_RUNS) {
        Ok(text) => {
            if let Some(dir) = path.parent() {
                fs::create_dir_all(dir)?;
            }
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            Ok(true)
        }
        Err(fbar_core::Error::Budget(_)) => Ok(false),
        Err(e) => Err(e.into()),
    }
}

fn build(config: &Path, blocks: Option<u64>, out: &Path) -> Result<bool> {
    let params = MechanismParams::from_json(&read_text(config)?).with_context(|| format!("parsing config {}", config.display()))?;
    let Some(n) = blocks.or(params.n) else {
        bail!("the number of building blocks is missing: pass --blocks or set \"N\" in the config");
    };
    let n = u32::try_from(n).context("--blocks is too large")?;
    // one marker symbol and N block symbols
    let base = symbol_level(n + 1);
    let run = mechanism::run(&params, &base)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let manifest = serde_json::to_string_pretty(&run.manifest())? + "\n";
    fs::write(out.join("manifest.json"), manifest)?;
    // blocks are written as layouts over the previous stage's ids and, for the final
    // stage, as symbol words; anything with too many runs is left to the manifest
    let mut skipped = 0;
    let mut prev_count = n + 1;
    for st in &run.stages {
        let dir = out.join(format!("stage-{}", st.m));
        for b in &st.blocks {
            skipped += !write_small(&dir.join(format!("{}.layout", b.name)), &b.layout, prev_count)? as usize;
        }
        prev_count = st.blocks.len() as u32;
    }
    let last = run.last();
    for b in &last.blocks {
        skipped += !write_small(&out.join(format!("{}.word", b.name)), &b.word, n + 1)? as usize;
    }
    if skipped > 0 {
        println!("{skipped} files skipped: more than {WORD_FILE_RUNS} runs (the config and manifest rebuild them)");
    }
    let ok = run.all_valid();
    println!(
        "{} mechanism, N = {n}: {} stages, final block length {}, validators {}",
        json!(run.kind).as_str().unwrap_or("?"),
        run.stages.len(),
        last.length(),
        if ok { "pass" } else { "FAIL" }
    );
    let unmet: Vec<&str> = run.flags.iter().filter(|f| !f.holds).map(|f| f.name.as_str()).collect();
    if !unmet.is_empty() {
        println!("hypotheses not met at these parameters: {}", unmet.join("; "));
    }
    Ok(ok)
}

#[derive(serde::Deserialize)]
struct SequenceFile {
    alphabet: u32,
    /// `layouts[n][i]`: ids of level-`n` words making up word `i` of level `n+1`.
    layouts: Vec<Vec<Vec<u32>>>,
    l: Vec<u64>,
    #[serde(rename = "R1", default)]
    r1: Option<u64>,
}

fn functor(sequence: &Path, level: usize, out: Option<&Path>, invert: Option<&Path>) -> Result<bool> {
    let spec: SequenceFile = serde_json::from_str(&read_text(sequence)?).with_context(|| format!("parsing {}", sequence.display()))?;
    if level > spec.layouts.len() {
        bail!("level {level} requested but the sequence has {} levels", spec.layouts.len());
    }
    let mut odo = ConstructionSequence::new(spec.alphabet, SequenceKind::Odometer, symbol_level(spec.alphabet))?;
    let mut k = Vec::new();
    for (n, lays) in spec.layouts.iter().enumerate() {
        let kn = lays.first().map_or(0, |l| l.len());
        if lays.iter().any(|l| l.len() != kn) {
            bail!("level {} layouts must all have the same length", n + 1);
        }
        k.push(kn as u64);
        odo.push_odometer_level(lays.iter().map(|l| layout(l)).collect())?;
    }
    let coeffs = CircularCoefficients::new(&k, &spec.l, spec.r1.unwrap_or(1));
    let (circ, fmap) = functor_apply(&odo, &coeffs)?;
    if let Some(path) = invert {
        let (_, w) = load_word(path)?;
        let back = functor_invert(&fmap, &w, level)?;
        print!("{}", word_to_string(&back, spec.alphabet, MAX_RUNS)?);
        return Ok(true);
    }
    let words = &circ.levels[level].words;
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            for (i, w) in words.iter().enumerate() {
                fs::write(dir.join(format!("circular-{level}-{i}.word")), word_to_string(w, spec.alphabet, MAX_RUNS)?)?;
            }
            println!("wrote {} words of length {} to {}", words.len(), circ.levels[level].length, dir.display());
        }
        None => {
            for w in words {
                print!("{}", word_to_string(w, spec.alphabet, MAX_RUNS)?);
            }
        }
    }
    Ok(true)
}

fn q_json(x: &Q) -> serde_json::Value {
    json!({ "value": x.to_string(), "decimal": decimal(x, 12) })
}

fn materialize(w: &WordRef, alphabet: u32) -> Result<SymbolString> {
    Ok(SymbolString::new(w.materialize(MATERIALIZE_CAP)?, alphabet)?)
}

fn distance(a: &Path, b: &Path, substring: Option<Vec<BigUint>>, budget: u64, mode: Mode, threshold: &str) -> Result<bool> {
    let (sa, wa) = load_word(a)?;
    let (sb, wb) = load_word(b)?;
    let (wa, wb) = match &substring {
        Some(v) => (WordExpr::slice(&wa, &v[0], &v[1])?, WordExpr::slice(&wb, &v[0], &v[1])?),
        None => (wa, wb),
    };
    let alphabet = sa.max(sb);
    let out = match mode {
        Mode::Fbar => {
            let r = fbar_bounds(&wa, &wb, budget);
            json!({
                "mode": "fbar",
                "exact": r.exact,
                "lower": q_json(&r.lower),
                "upper": q_json(&r.upper),
                "budget_spent": r.budget_spent,
            })
        }
        Mode::Ftilde => {
            let r = ftilde(&materialize(&wa, alphabet)?, &materialize(&wb, alphabet)?)?;
            json!({ "mode": "ftilde", "exact": true, "distance": q_json(&r.value), "match_size": r.match_size.to_string() })
        }
        Mode::Cyclic => {
            let t = parse_q(threshold)?;
            match fbar_to_cyclic(&materialize(&wa, alphabet)?, &materialize(&wb, alphabet)?, &t)? {
                CyclicDistance::Value { result, length, offset } => {
                    json!({ "mode": "cyclic", "distance": q_json(&result.value), "length": length, "offset": offset })
                }
                CyclicDistance::AtLeast(x) => json!({ "mode": "cyclic", "at_least": q_json(&x) }),
            }
        }
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(true)
}

fn verify(suites: &[String], checks: &[String], list: bool, config: CheckConfig, format: Format, out: Option<&Path>) -> Result<bool> {
    let suites: Vec<Suite> = suites.iter().map(|s| s.parse()).collect::<fbar_core::Result<_>>()?;
    if list {
        for s in Suite::NAMED {
            println!("{s}: {}", harness::job_names(s).join(", "));
        }
        return Ok(true);
    }
    if suites.is_empty() && checks.is_empty() {
        bail!("nothing to run: pass --suite or --check (see --list)");
    }
    let mut results: Vec<CheckResult> = Vec::new();
    for s in suites {
        results.extend(harness::run_checks(s, &config));
    }
    if !checks.is_empty() {
        let names: Vec<&str> = checks.iter().map(String::as_str).collect();
        results.extend(harness::run_named(&names, &config)?);
    }
    let text = harness::emit_report(&results, format.into())?;
    match out {
        Some(p) => {
            fs::write(p, &text).with_context(|| format!("writing {}", p.display()))?;
            print_summary(&results);
        }
        None => print!("{text}"),
    }
    Ok(results.iter().all(|r| r.verdict != Verdict::Fail))
}

fn print_summary(results: &[CheckResult]) {
    let count = |v: Verdict| results.iter().filter(|r| r.verdict == v).count();
    for r in results.iter().filter(|r| r.verdict == Verdict::Fail) {
        let bound = r.bound.as_ref().map(|b| format!(" {} {}", r.relation.symbol(), b)).unwrap_or_default();
        eprintln!("FAIL {} [{}]: measured {}{bound} {}", r.id, r.instance, r.measured, r.detail);
    }
    println!("{} checks: {} pass, {} fail, {} vacuous", results.len(), count(Verdict::Pass), count(Verdict::Fail), count(Verdict::Vacuous));
}

fn report(file: &Path, format: Option<Format>, convert: Option<Format>) -> Result<bool> {
    let text = read_text(file)?;
    let format = format.unwrap_or(if file.extension().is_some_and(|e| e == "csv") { Format::Csv } else { Format::Json });
    let results = harness::parse_report(&text, format.into()).with_context(|| format!("reading report {}", file.display()))?;
    match convert {
        Some(f) => print!("{}", harness::emit_report(&results, f.into())?),
        None => print_summary(&results),
    }
    Ok(results.iter().all(|r| r.verdict != Verdict::Fail))
}
