// SPDX-License-Identifier: MIT
//! Word files: `alphabet <size>` on the first line, then whitespace-separated
//! tokens `<id>`, `<id>^<exp>`, `b`, `e`, `b^<exp>`, `e^<exp>`.
//!
//! The writer merges runs, separates tokens by one space and breaks the line
//! after every 32 tokens, ending with a newline.

use std::io::Write;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::expr::{symbol_token, WordExpr, WordRef};
use crate::error::{Error, Result};
use crate::metric::{is_spacer, Sym, SPACER_B, SPACER_E};

pub const TOKENS_PER_LINE: usize = 32;

pub fn write_word(w: &WordExpr, alphabet_size: u32, max_runs: u64, out: &mut impl Write) -> Result<()> {
    let mut tokens: Vec<String> = Vec::new();
    w.for_each_run(max_runs, &mut |s, k| {
        let t = symbol_token(s);
        tokens.push(if k.is_one() { t } else { format!("{t}^{k}") });
    })?;
    writeln!(out, "alphabet {alphabet_size}")?;
    for chunk in tokens.chunks(TOKENS_PER_LINE) {
        writeln!(out, "{}", chunk.join(" "))?;
    }
    Ok(())
}

pub fn word_to_string(w: &WordExpr, alphabet_size: u32, max_runs: u64) -> Result<String> {
    let mut buf = Vec::new();
    write_word(w, alphabet_size, max_runs, &mut buf)?;
    Ok(String::from_utf8(buf).expect("ascii output"))
}

/// Parses a word file into its alphabet size and expression.
pub fn read_word(text: &str) -> Result<(u32, WordRef)> {
    let mut lines = text.lines().enumerate();
    let (_, head) = lines.next().ok_or(Error::Format { line: 1, msg: "empty file".into() })?;
    let alphabet_size: u32 = head
        .strip_prefix("alphabet ")
        .and_then(|r| r.trim().parse().ok())
        .ok_or(Error::Format { line: 1, msg: format!("expected `alphabet <size>`, got {head:?}") })?;
    let mut runs: Vec<(Sym, BigUint)> = Vec::new();
    for (ln, line) in lines {
        for tok in line.split_whitespace() {
            let bad = |msg: String| Error::Format { line: ln + 1, msg };
            let (sym, exp) = match tok.split_once('^') {
                Some((s, e)) => (s, e.parse::<BigUint>().map_err(|_| bad(format!("bad exponent in {tok:?}")))?),
                None => (tok, BigUint::one()),
            };
            if exp.is_zero() {
                return Err(bad(format!("zero exponent in {tok:?}")));
            }
            let s: Sym = match sym {
                "b" => SPACER_B,
                "e" => SPACER_E,
                _ => sym.parse().map_err(|_| bad(format!("bad symbol {sym:?}")))?,
            };
            if !is_spacer(s) && s >= alphabet_size {
                return Err(bad(format!("symbol {s} outside alphabet {alphabet_size}")));
            }
            runs.push((s, exp));
        }
    }
    let w = WordExpr::from_runs(runs).map_err(|_| Error::Format { line: 1, msg: "no symbols".into() })?;
    Ok((alphabet_size, w))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_with_spacers() {
        let text = "alphabet 3\nb 0^2 b 1^2 e^3 2\n";
        let (a, w) = read_word(text).unwrap();
        assert_eq!(a, 3);
        assert_eq!(w.len(), &BigUint::from(10u32));
        assert_eq!(word_to_string(&w, a, 100).unwrap(), text);
    }

    #[test]
    fn merges_adjacent_tokens() {
        let (_, w) = read_word("alphabet 2\n0 0^3 1\n").unwrap();
        assert_eq!(word_to_string(&w, 2, 100).unwrap(), "alphabet 2\n0^4 1\n");
    }

    #[test]
    fn rejects_bad_files() {
        assert!(read_word("").is_err());
        assert!(read_word("alphabet x\n0").is_err());
        assert!(read_word("alphabet 2\n5").is_err());
        assert!(read_word("alphabet 2\n0^0").is_err());
        assert!(read_word("alphabet 2\n").is_err());
    }
}
