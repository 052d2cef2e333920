mod common;

use levysig::calculus::{SigModelParams, SigPayoff};
use levysig::levy::{primary_process_triplet, LevyTriplet};
use levysig::market::{simulate_primary_indexed, SimulationGrid};
use levysig::tensor::{Word, WordCombination};
use levysig::valuation::{hedge_pnl_mc, hedge_strategy, mc_price, price_sig_payoff, DegeneracyPolicy};
use proptest::prelude::*;
use rand::Rng;

fn model(a: f64, b: f64, c: f64, e: f64) -> (SigModelParams, LevyTriplet) {
    let ell_w = WordCombination::from_terms([(Word::empty(), a), (Word::from([-1]), b)]);
    let ell_nu = WordCombination::from_terms([(Word::empty(), c), (Word::from([-1]), e)]);
    let n = if b == 0.0 && e == 0.0 { 0 } else { 1 };
    let params = SigModelParams::new(1.0, ell_w, ell_nu, n, 0, 2, n + 1).unwrap();
    (params, primary_process_triplet(&[(-0.5, 2.0), (0.3, 1.0)], 2).unwrap())
}

fn payoff_words() -> Vec<Word> {
    [vec![], vec![-1], vec![1], vec![-1, -1], vec![-1, 1], vec![1, -1], vec![1, 1]].into_iter().map(Word::from).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn hedge_capital_is_the_price(a in 0.1f64..0.4, b in -0.2f64..0.2, c in 0.05f64..0.3, w in prop::sample::select(payoff_words())) {
        let (params, triplet) = model(a, b, c, 0.0);
        let payoff = SigPayoff::word(w).unwrap();
        let grid = SimulationGrid::new(1.0, 10, 1).unwrap();
        let primary = simulate_primary_indexed(&triplet, &grid, 0).unwrap();
        let report = hedge_strategy(&payoff, &params, &triplet, &primary, DegeneracyPolicy::Fail).unwrap();
        let price = price_sig_payoff(&payoff, &params, &triplet, 1.0).unwrap();
        prop_assert!((report.v_star - price).abs() <= 1e-12);
    }

    /// Words ending in (-1, 1) are stochastic integrals against S, so only the constant is priced.
    #[test]
    fn martingale_words_price_to_constant(h0 in -1.0f64..1.0, h in prop::array::uniform2(-1.0f64..1.0), a in 0.1f64..0.4, e in -0.2f64..0.2) {
        let (params, triplet) = model(a, 0.0, 0.2, e);
        let payoff = SigPayoff::new(WordCombination::from_terms([
            (Word::empty(), h0),
            (Word::from([-1, 1]), h[0]),
            (Word::from([1, -1, 1]), h[1]),
        ]))
        .unwrap();
        let price = price_sig_payoff(&payoff, &params.with_level(3).unwrap(), &triplet, 1.0);
        // (1, -1, 1) needs N ≥ 3(nd+1) = 3, above this model's N = 2
        prop_assert!(price.is_err());
        let short = SigPayoff::new(WordCombination::from_terms([(Word::empty(), h0), (Word::from([-1, 1]), h[0])])).unwrap();
        let price = price_sig_payoff(&short, &params, &triplet, 1.0).unwrap();
        prop_assert!((price - h0).abs() <= 1e-12);
    }
}

#[test]
fn longer_martingale_words_price_to_constant() {
    let ell_w = WordCombination::from_terms([(Word::empty(), 0.2), (Word::from([-1]), 0.05)]);
    let ell_nu = WordCombination::from_terms([(Word::empty(), 0.1)]);
    let params = SigModelParams::new(1.0, ell_w, ell_nu, 1, 0, 3, 2).unwrap();
    let triplet = primary_process_triplet(&[(-0.5, 2.0)], 3).unwrap();
    let payoff = SigPayoff::new(WordCombination::from_terms([
        (Word::empty(), 0.7),
        (Word::from([1, -1, 1]), 1.3),
        (Word::from([-1, -1, 1]), -0.4),
    ]))
    .unwrap();
    assert!((price_sig_payoff(&payoff, &params, &triplet, 1.5).unwrap() - 0.7).abs() < 1e-12);
}

#[test]
fn analytic_prices_agree_with_monte_carlo() {
    let mut r = common::rng(2024);
    let words = payoff_words();
    let mut agree = 0;
    let mut lines = Vec::new();
    for case in 0..20 {
        let (a, b) = (r.random_range(0.1..0.4), if r.random_bool(0.5) { r.random_range(-0.2..0.2) } else { 0.0 });
        let (c, e) = (r.random_range(0.05..0.3), if r.random_bool(0.5) { r.random_range(-0.1..0.1) } else { 0.0 });
        let (params, triplet) = model(a, b, c, e);
        let mut terms = WordCombination::new();
        for w in &words {
            if r.random_bool(0.5) {
                terms.add_term(w.clone(), r.random_range(-1.0..1.0));
            }
        }
        let payoff = SigPayoff::new(terms).unwrap();
        let analytic = price_sig_payoff(&payoff, &params, &triplet, 1.0).unwrap();
        let grid = SimulationGrid::new(1.0, 100, 500 + case).unwrap();
        let mc = mc_price(&payoff, &params, &triplet, &grid, 4000).unwrap();
        if mc.within(analytic, 3.0) || (mc.std_error == 0.0 && (mc.mean - analytic).abs() < 1e-12) {
            agree += 1;
        }
        lines.push(format!("{case}: analytic {analytic:.5} MC {:.5} ± {:.5}", mc.mean, mc.std_error));
    }
    assert!(agree >= 19, "{agree}/20 agree\n{}", lines.join("\n"));
}

#[test]
fn hedging_does_not_increase_variance() {
    let (params, triplet) = model(0.2, 0.0, 0.1, 0.0);
    let payoff = SigPayoff::word(Word::from([1, 1])).unwrap();
    let grid = SimulationGrid::new(1.0, 200, 11).unwrap();
    let pnl = hedge_pnl_mc(&payoff, &params, &triplet, &grid, 2000, DegeneracyPolicy::Fail).unwrap();
    assert!(pnl.hedged_variance <= pnl.unhedged_variance, "{pnl:?}");
}

#[test]
fn zero_payoff_has_no_risk() {
    let (params, triplet) = model(0.2, 0.0, 0.1, 0.0);
    let payoff = SigPayoff::new(WordCombination::new()).unwrap();
    let grid = SimulationGrid::new(1.0, 20, 11).unwrap();
    let pnl = hedge_pnl_mc(&payoff, &params, &triplet, &grid, 50, DegeneracyPolicy::Fail).unwrap();
    assert_eq!((pnl.unhedged_variance, pnl.hedged_variance), (0.0, 0.0));
    let primary = simulate_primary_indexed(&triplet, &grid, 0).unwrap();
    let report = hedge_strategy(&payoff, &params, &triplet, &primary, DegeneracyPolicy::Fail).unwrap();
    assert!(report.theta_path.iter().all(|&t| t == 0.0));
    assert_eq!(report.v_star, 0.0);
}

#[test]
fn mismatched_moment_count_is_rejected() {
    let (params, _) = model(0.2, 0.0, 0.1, 0.0);
    let triplet = primary_process_triplet(&[(-0.5, 2.0)], 3).unwrap();
    let payoff = SigPayoff::word(Word::from([1])).unwrap();
    assert!(price_sig_payoff(&payoff, &params, &triplet, 1.0).is_err());
}
