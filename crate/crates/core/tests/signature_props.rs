mod common;

use levysig::signature::{ito_iterated_sum_path, marcus_signature, signature_increment, terminal_signature};
use levysig::tensor::{Alphabet, Word, WordCombination};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chen_relation_through_increments(seed in any::<u64>(), cut in 0.0f64..1.0) {
        let mut r = common::rng(seed);
        let path = common::random_path(&mut r, &Alphabet::range(1, 3).unwrap(), 7, 0.7);
        let sig = marcus_signature(&path, 3).unwrap();
        let s = path.times()[((path.len() - 1) as f64 * cut) as usize];
        let head = signature_increment(&sig, 0.0, s).unwrap();
        let tail = signature_increment(&sig, s, path.horizon()).unwrap();
        let joined = head.tensor_product(&tail).unwrap();
        prop_assert!(joined.max_abs_diff(sig.terminal()).unwrap() <= 1e-10);
    }

    #[test]
    fn signatures_are_group_like(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let path = common::random_path(&mut r, &Alphabet::range(0, 2).unwrap(), 6, 1.0);
        let sig = terminal_signature(&path, 4).unwrap();
        prop_assert!(sig.is_group_like());
        prop_assert!(sig.shuffle_identity_defect(4).unwrap() <= 1e-9);
    }

    #[test]
    fn terminal_matches_last_node(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let path = common::random_path(&mut r, &Alphabet::range(0, 2).unwrap(), 5, 1.0);
        let all = marcus_signature(&path, 3).unwrap();
        prop_assert!(all.terminal().max_abs_diff(&terminal_signature(&path, 3).unwrap()).unwrap() <= 1e-14);
    }

    /// Along a pure-jump-plus-drift path the Marcus coordinate `⟨ε_{I j}, sig⟩` equals the
    /// left-point integral of `⟨ε_I, sig⟩` against `X^j` plus one jump correction per jump.
    #[test]
    fn marcus_equals_ito_plus_jump_corrections(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let path = common::random_pure_jump_primary(&mut r, 3);
        let sig = marcus_signature(&path, 3).unwrap();
        let integrand = WordCombination::from_word(Word::from([1]));
        let ito = ito_iterated_sum_path(&path, &integrand, 1, &sig).unwrap();
        let mut corrections = 0.0;
        for k in 1..path.len() {
            if path.is_jump(k) {
                let dx = path.increment(k)[2];
                corrections += dx * dx / 2.0;
            }
        }
        let marcus = sig.terminal().coefficient(&Word::from([1, 1])).unwrap();
        prop_assert!((marcus - ito[ito.len() - 1] - corrections).abs() <= 1e-12 * marcus.abs().max(1.0));
    }
}

#[test]
fn increment_respects_jump_nodes() {
    let a = Alphabet::range(1, 1).unwrap();
    let mut b = levysig::path::CadlagSamplePath::builder(a, &[0.0]).unwrap();
    b.line_to(1.0, &[1.0]).unwrap().jump_by(&[2.0]).unwrap().line_to(2.0, &[3.0]).unwrap();
    let sig = marcus_signature(&b.build().unwrap(), 2).unwrap();
    let after_jump = signature_increment(&sig, 1.0, 2.0).unwrap();
    assert_eq!(after_jump.coefficient(&Word::from([1])).unwrap(), 0.0);
    let whole = signature_increment(&sig, 0.0, 2.0).unwrap();
    assert!((whole.coefficient(&Word::from([1, 1])).unwrap() - 4.5).abs() < 1e-14);
}
