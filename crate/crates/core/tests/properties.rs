use num_bigint::BigUint;
use proptest::prelude::*;

use fbar_core::metric::lcs::{lcs_bitparallel, lcs_dp, lcs_rle, runs};
use fbar_core::metric::{fbar, fbar_bounds, ftilde, Sym, SymbolString};
use fbar_core::words::io::{read_word, word_to_string};
use fbar_core::words::WordExpr;

fn word(max_len: usize) -> impl Strategy<Value = Vec<Sym>> {
    prop::collection::vec(0u32..3, 1..max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn kernels_agree(a in word(300), b in word(300)) {
        let d = lcs_dp(&a, &b);
        prop_assert_eq!(lcs_bitparallel(&a, &b), d);
        prop_assert_eq!(lcs_rle(&a, &runs(&b)) as usize, d);
    }

    #[test]
    fn fbar_is_symmetric_and_bounded_by_ftilde(a in word(14), b in word(14)) {
        let (x, y) = (SymbolString::new(a, 3).unwrap(), SymbolString::new(b, 3).unwrap());
        let f = fbar(&x, &y, false).unwrap().value;
        prop_assert_eq!(&f, &fbar(&y, &x, false).unwrap().value);
        prop_assert!(ftilde(&x, &y).unwrap().value <= f);
    }

    #[test]
    fn certified_bounds_enclose_the_exact_value(a in word(60), b in word(60), reps in 1u32..4) {
        let exact = {
            let x: Vec<Sym> = (0..reps).flat_map(|_| a.clone()).collect();
            fbar(&SymbolString::new(x, 3).unwrap(), &SymbolString::new(b.clone(), 3).unwrap(), false).unwrap().value
        };
        let wa = WordExpr::power(WordExpr::from_symbols(&a).unwrap(), reps);
        let r = fbar_bounds(&wa, &WordExpr::from_symbols(&b).unwrap(), 1_000_000);
        prop_assert!(r.lower <= exact && exact <= r.upper);
        if r.exact {
            prop_assert_eq!(r.upper, exact);
        }
    }

    #[test]
    fn slices_match_materialised_words(a in word(40), reps in 1u32..5, start in 0usize..200, len in 1usize..50) {
        let w = WordExpr::power(WordExpr::from_symbols(&a).unwrap(), reps);
        let flat = w.materialize(1 << 16).unwrap();
        let s = WordExpr::slice(&w, &BigUint::from(start), &BigUint::from(len));
        if start + len <= flat.len() {
            prop_assert_eq!(s.unwrap().materialize(1 << 16).unwrap(), flat[start..start + len].to_vec());
        } else {
            prop_assert!(s.is_err());
        }
    }

    #[test]
    fn word_files_round_trip(a in word(80), reps in 1u32..6) {
        let w = WordExpr::power(WordExpr::from_symbols(&a).unwrap(), reps);
        let text = word_to_string(&w, 3, 10_000).unwrap();
        let (alpha, back) = read_word(&text).unwrap();
        prop_assert_eq!(alpha, 3);
        prop_assert_eq!(back.materialize(1 << 16).unwrap(), w.materialize(1 << 16).unwrap());
    }
}
