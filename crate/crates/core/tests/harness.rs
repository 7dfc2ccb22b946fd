use num_bigint::BigUint;
use num_traits::Zero;

use fbar_core::harness::closeness::example_blocks;
use fbar_core::harness::{
    emit_report, job_names, pairwise_fbar_table, parse_report, run_checks, run_named, CheckConfig, CheckResult, Relation, ReportFormat, Suite, Verdict,
};
use fbar_core::rational::q;
use fbar_core::words::{WordExpr, WordRef};

fn words(list: &[&[u32]]) -> Vec<WordRef> {
    list.iter().map(|w| WordExpr::from_symbols(w).unwrap()).collect()
}

#[test]
fn empty_suite_gives_an_empty_report() {
    let r = run_checks(Suite::None, &CheckConfig::default());
    assert!(r.is_empty());
    let text = emit_report(&r, ReportFormat::Json).unwrap();
    assert!(text.contains("\"checks\": 0"));
}

#[test]
fn same_seed_gives_byte_identical_reports() {
    let cfg = CheckConfig::default();
    let a = run_named(&["anchors", "deletion", "prob-tables"], &cfg).unwrap();
    let b = run_named(&["anchors", "deletion", "prob-tables"], &cfg).unwrap();
    for f in [ReportFormat::Json, ReportFormat::Csv] {
        assert_eq!(emit_report(&a, f).unwrap(), emit_report(&b, f).unwrap());
    }
}

#[test]
fn job_order_does_not_change_results() {
    let cfg = CheckConfig::default();
    let alone = run_named(&["deletion"], &cfg).unwrap();
    let mixed = run_named(&["anchors", "deletion"], &cfg).unwrap();
    assert_eq!(alone[..], mixed[3..]);
}

#[test]
fn reports_round_trip_through_both_formats() {
    let r = run_named(&["anchors", "stage-count"], &CheckConfig::default()).unwrap();
    for f in [ReportFormat::Json, ReportFormat::Csv] {
        assert_eq!(parse_report(&emit_report(&r, f).unwrap(), f).unwrap(), r);
    }
}

#[test]
fn unknown_names_are_rejected() {
    assert!(run_named(&["no-such-check"], &CheckConfig::default()).is_err());
    assert!("no-such-suite".parse::<Suite>().is_err());
    for s in Suite::NAMED {
        assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        assert!(!job_names(s).is_empty());
    }
}

#[test]
fn verdicts_follow_hypotheses() {
    let pass = CheckResult::new("x", "", q(1, 3), Relation::Le, Some(q(1, 2)));
    let fail = CheckResult::new("x", "", q(2, 3), Relation::Le, Some(q(1, 2)));
    let vac = fail.clone().with_hypotheses(false);
    assert_eq!((pass.verdict, fail.verdict, vac.verdict), (Verdict::Pass, Verdict::Fail, Verdict::Vacuous));
    assert!(!vac.satisfied());
}

#[test]
fn pairwise_table_is_symmetric_with_zero_diagonal() {
    let w = words(&[&[0, 1, 1, 0], &[1, 1, 0, 0], &[0, 0, 0, 1], &[0, 1, 1, 0]]);
    let t = pairwise_fbar_table(&w, None, 1_000_000).unwrap();
    for i in 0..4 {
        assert!(t[i][i].upper.is_zero());
        for j in 0..4 {
            assert_eq!(t[i][j], t[j][i]);
        }
    }
    // identical words
    assert!(t[0][3].upper.is_zero() && t[0][3].exact);
    // 0110 vs 1100: common subsequence 110 → 1 − 6/8
    assert_eq!(t[0][1].upper, q(1, 4));
    assert!(pairwise_fbar_table(&w[..1], None, 10).is_err());
}

#[test]
fn pairwise_table_on_substrings() {
    let w = words(&[&[0, 0, 1, 1, 2, 2], &[2, 2, 1, 1, 0, 0]]);
    let (start, len) = (BigUint::from(2u32), BigUint::from(2u32));
    let t = pairwise_fbar_table(&w, Some((&start, &len)), 1000).unwrap();
    assert!(t[0][1].upper.is_zero());
    let past = BigUint::from(5u32);
    assert!(pairwise_fbar_table(&w, Some((&past, &len)), 1000).is_err());
}

#[test]
fn example_blocks_are_close() {
    let [b0, b1] = example_blocks(8);
    let w = words(&[&b0, &b1]);
    let t = pairwise_fbar_table(&w, None, 1_000_000).unwrap();
    assert!(t[0][1].exact);
    assert!(t[0][1].upper <= q(1, 10));
}
