//! Pricing and hedging of sig-payoffs, plus least-squares fitting of path
//! functionals on terminal signature features.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::calculus::{payoff_lift_combination, SigModelParams, SigPayoff};
use crate::error::{Error, Result};
use crate::levy::{jump_moment, LevyTriplet, WordMomentPolynomial};
use crate::market::{map_paths, simulate_model_direct, simulate_primary_indexed, time_extended, SimulationGrid};
use crate::path::CadlagSamplePath;
use crate::signature::{marcus_signature, terminal_signature, SignaturePath};
use crate::tensor::{all_words, Word, WordCombination, BROWNIAN_LETTER};

/// Denominators of the hedge ratio below this value are treated as degenerate.
pub const HEDGE_DENOMINATOR_FLOOR: f64 = 1e-12;

/// Relative singular-value cutoff of the regression solve.
pub const REGRESSION_RIDGE_FLOOR: f64 = 1e-10;

fn require_primary<'a>(triplet: &'a LevyTriplet, params: &SigModelParams) -> Result<&'a [(f64, f64)]> {
    let atoms = triplet
        .primary_atoms()
        .ok_or_else(|| Error::InvalidModel("pricing needs a primary process triplet".into()))?;
    if triplet.moment_count() != Some(params.moment_count()) {
        return Err(Error::InvalidModel(format!(
            "triplet carries {:?} jump moments but the model uses {}",
            triplet.moment_count(),
            params.moment_count()
        )));
    }
    Ok(atoms)
}

/// Exact price `E⟨payoff, Ŝ_T⟩`, computed as `E⟨U, X_T⟩` for the lifted payoff `U`.
pub fn price_sig_payoff(payoff: &SigPayoff, params: &SigModelParams, triplet: &LevyTriplet, horizon: f64) -> Result<f64> {
    if horizon.is_nan() || horizon < 0.0 {
        return Err(Error::NegativeTime(horizon));
    }
    require_primary(triplet, params)?;
    let lifted = payoff_lift_combination(payoff, params)?;
    let mut price = 0.0;
    for (w, c) in lifted.iter() {
        price += c * WordMomentPolynomial::new(triplet, w)?.eval(horizon);
    }
    Ok(price)
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub paths: usize,
}

impl McEstimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Self { mean: f64::NAN, std_error: f64::NAN, paths: 0 };
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, std_error, paths: n }
    }

    /// `|mean - target| ≤ k·SE`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error
    }
}

/// Primary path, its signature and the model path `Ŝ = (t, S)` for one Monte Carlo index.
pub struct SimulatedMarket {
    pub primary: CadlagSamplePath,
    pub signature: SignaturePath,
    pub model: CadlagSamplePath,
}

/// Simulates path `index` of the primary process and the model driven by it.
///
/// The primary signature is kept at `level` (raised to the loading length if needed).
pub fn simulate_market(params: &SigModelParams, triplet: &LevyTriplet, grid: &SimulationGrid, index: u64, level: usize) -> Result<SimulatedMarket> {
    let primary = simulate_primary_indexed(triplet, grid, index)?;
    let signature = marcus_signature(&primary, level.max(params.max_len()).max(1))?;
    let model = simulate_model_direct(params, &primary, &signature)?;
    Ok(SimulatedMarket { primary, signature, model })
}

/// Monte Carlo price: average of `⟨payoff, Ŝ_T⟩` over simulated model paths.
pub fn mc_price(payoff: &SigPayoff, params: &SigModelParams, triplet: &LevyTriplet, grid: &SimulationGrid, paths: usize) -> Result<McEstimate> {
    require_primary(triplet, params)?;
    let level = payoff.max_len().max(1);
    let samples = map_paths(paths, |i| {
        let market = simulate_market(params, triplet, grid, i, 1)?;
        payoff.terms().eval(&terminal_signature(&market.model, level)?)
    })?;
    Ok(McEstimate::from_samples(&samples))
}

/// Behaviour when the hedge-ratio denominator falls below [`HEDGE_DENOMINATOR_FLOOR`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DegeneracyPolicy {
    /// Return [`Error::DegenerateDenominator`].
    #[default]
    Fail,
    /// Hold no position at that node and count it.
    ZeroPosition,
}

/// Mean-variance hedge of a sig-payoff along one path.
#[derive(Clone, Debug, PartialEq)]
pub struct HedgeReport {
    /// Optimal initial capital, equal to the analytic price.
    pub v_star: f64,
    pub times: Vec<f64>,
    /// Position held over the cell that starts at each node.
    pub theta_path: Vec<f64>,
    /// Price `S` at each node.
    pub price_path: Vec<f64>,
    /// Left limit of `S` at each node time.
    pub price_left: Vec<f64>,
    pub payoff: f64,
    /// `Σ θ_{k-1} (S_k - S_{k-1})`.
    pub gains: f64,
    /// Squared terminal hedging error `(C - v* - gains)²` of this path.
    pub residual_variance: f64,
    pub denominator_floor_hits: usize,
}

/// Precomputed pieces of the hedge ratio for one payoff and model.
struct HedgeKernel {
    /// `(coefficient, J1, J2 weight kind, J3)` for every triple split of every lifted word.
    terms: Vec<HedgeTerm>,
    remaining: HashMap<Word, WordMomentPolynomial>,
    second_moment: f64,
    level: usize,
}

struct HedgeTerm {
    coefficient: f64,
    head: Word,
    middle: MiddleWeight,
    tail: Word,
}

enum MiddleWeight {
    Brownian,
    /// `Σ λ x^{S(J2)+1} / |J2|!`
    Jump(f64),
}

impl HedgeKernel {
    fn new(payoff: &SigPayoff, params: &SigModelParams, triplet: &LevyTriplet) -> Result<Self> {
        let atoms = require_primary(triplet, params)?;
        let lifted = payoff_lift_combination(payoff, params)?;
        let mut terms = Vec::new();
        let mut remaining = HashMap::new();
        for (w, &c) in lifted.iter() {
            let n = w.len();
            for i in 0..n {
                for j in i + 1..=n {
                    let middle = Word::from(&w.letters()[i..j]);
                    let weight = if middle.letters() == [BROWNIAN_LETTER] {
                        MiddleWeight::Brownian
                    } else if middle.is_jump_moment_word() {
                        let m = jump_moment(atoms, middle.letter_sum() + 1);
                        MiddleWeight::Jump(m / crate::levy::factorial(middle.len()))
                    } else {
                        continue;
                    };
                    let tail = w.suffix_from(j);
                    if !remaining.contains_key(&tail) {
                        remaining.insert(tail.clone(), WordMomentPolynomial::new(triplet, &tail)?);
                    }
                    terms.push(HedgeTerm { coefficient: c, head: w.prefix(i), middle: weight, tail });
                }
            }
        }
        let level = lifted.max_word_len().max(params.max_len()).max(1);
        Ok(Self { terms, remaining, second_moment: jump_moment(atoms, 2), level })
    }

    /// `(numerator, denominator)` of the hedge ratio at a signature value.
    fn ratio_parts(&self, params: &SigModelParams, sig: &crate::tensor::TensorElement, time_left: f64) -> Result<(f64, f64)> {
        let a_w = params.ell_w().eval(sig)?;
        let a_nu = params.ell_nu().eval(sig)?;
        let mut tails: HashMap<&Word, f64> = HashMap::new();
        let mut numerator = 0.0;
        for term in &self.terms {
            let head = sig.coefficient(&term.head)?;
            if head == 0.0 {
                continue;
            }
            let gamma = match term.middle {
                MiddleWeight::Brownian => a_w,
                MiddleWeight::Jump(m) => a_nu * m,
            };
            let tail = *tails
                .entry(&term.tail)
                .or_insert_with(|| self.remaining[&term.tail].eval(time_left));
            numerator += term.coefficient * head * gamma * tail;
        }
        Ok((numerator, a_w * a_w + a_nu * a_nu * self.second_moment))
    }
}

/// Mean-variance hedge along a primary path.
///
/// The position at node `k` uses the primary signature at node `k`, which is the left
/// limit for the following cell; gains use left-point increments of `S`.
pub fn hedge_strategy(
    payoff: &SigPayoff,
    params: &SigModelParams,
    triplet: &LevyTriplet,
    primary: &CadlagSamplePath,
    policy: DegeneracyPolicy,
) -> Result<HedgeReport> {
    let kernel = HedgeKernel::new(payoff, params, triplet)?;
    let horizon = primary.horizon();
    let sig = marcus_signature(primary, kernel.level)?;
    hedge_with_kernel(&kernel, payoff, params, triplet, primary, &sig, horizon, policy)
}

#[allow(clippy::too_many_arguments)]
fn hedge_with_kernel(
    kernel: &HedgeKernel,
    payoff: &SigPayoff,
    params: &SigModelParams,
    triplet: &LevyTriplet,
    primary: &CadlagSamplePath,
    sig: &SignaturePath,
    horizon: f64,
    policy: DegeneracyPolicy,
) -> Result<HedgeReport> {
    let v_star = price_sig_payoff(payoff, params, triplet, horizon)?;
    let model = simulate_model_direct(params, primary, sig)?;
    let price_path: Vec<f64> = (0..model.len()).map(|k| model.value(k)[1]).collect();
    let mut theta_path = Vec::with_capacity(primary.len());
    let mut hits = 0;
    for k in 0..primary.len() {
        let t = primary.times()[k];
        let (num, den) = kernel.ratio_parts(params, sig.at(k), horizon - t)?;
        if den.abs() < HEDGE_DENOMINATOR_FLOOR {
            match policy {
                DegeneracyPolicy::Fail => return Err(Error::DegenerateDenominator { node: k, time: t, value: den }),
                DegeneracyPolicy::ZeroPosition => {
                    hits += 1;
                    theta_path.push(0.0);
                }
            }
        } else {
            theta_path.push(num / den);
        }
    }
    let gains: f64 = (1..price_path.len()).map(|k| theta_path[k - 1] * (price_path[k] - price_path[k - 1])).sum();
    let payoff_value = payoff.terms().eval(&terminal_signature(&model, payoff.max_len().max(1))?)?;
    let price_left = (0..price_path.len())
        .map(|k| if primary.is_jump(k) { price_path[k - 1] } else { price_path[k] })
        .collect();
    let error = payoff_value - v_star - gains;
    Ok(HedgeReport {
        v_star,
        times: primary.times().to_vec(),
        theta_path,
        price_path,
        price_left,
        payoff: payoff_value,
        gains,
        residual_variance: error * error,
        denominator_floor_hits: hits,
    })
}

/// Position `⟨ε_{I'}, Ŝ_{t-}⟩` for a word `I` ending in `(-1, 1)`, whose payoff is a
/// stochastic integral against `S` and therefore replicable.
pub fn replicable_word_theta(word: &Word, model: &CadlagSamplePath) -> Result<Vec<f64>> {
    let letters = word.letters();
    let n = letters.len();
    if n < 2 || letters[n - 2] != crate::tensor::TIME_LETTER || letters[n - 1] != crate::tensor::JUMP_LETTER {
        return Err(Error::InvalidPayoff(format!("word {word} does not end in (-1, 1)")));
    }
    let head = word.drop_last();
    let sig = marcus_signature(model, head.len().max(1))?;
    sig.elements().iter().map(|x| x.coefficient(&head)).collect()
}

/// Empirical mean squared hedging errors over simulated paths.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HedgePnl {
    /// `mean (C - v*)²`
    pub unhedged_variance: f64,
    /// `mean (C - v* - gains)²`
    pub hedged_variance: f64,
    pub mean_hedging_error: f64,
    pub denominator_floor_hits: usize,
    pub paths: usize,
}

pub fn hedge_pnl_mc(
    payoff: &SigPayoff,
    params: &SigModelParams,
    triplet: &LevyTriplet,
    grid: &SimulationGrid,
    paths: usize,
    policy: DegeneracyPolicy,
) -> Result<HedgePnl> {
    let kernel = HedgeKernel::new(payoff, params, triplet)?;
    let reports = map_paths(paths, |i| {
        let primary = simulate_primary_indexed(triplet, grid, i)?;
        let sig = marcus_signature(&primary, kernel.level)?;
        let r = hedge_with_kernel(&kernel, payoff, params, triplet, &primary, &sig, grid.horizon(), policy)?;
        Ok((r.payoff - r.v_star, r.payoff - r.v_star - r.gains, r.denominator_floor_hits))
    })?;
    let n = reports.len().max(1) as f64;
    Ok(HedgePnl {
        unhedged_variance: reports.iter().map(|r| r.0 * r.0).sum::<f64>() / n,
        hedged_variance: reports.iter().map(|r| r.1 * r.1).sum::<f64>() / n,
        mean_hedging_error: reports.iter().map(|r| r.1).sum::<f64>() / n,
        denominator_floor_hits: reports.iter().map(|r| r.2).sum(),
        paths: reports.len(),
    })
}

/// Linear functional on terminal signatures fitted by least squares.
#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub functional: WordCombination,
    /// In-sample root mean squared residual.
    pub residual: f64,
    /// Fewer samples than features; the solution is the minimum-norm one.
    pub underdetermined: bool,
}

/// Fits `target ≈ ⟨functional, sig_T(time-extended path)⟩` over all words up to `level`.
///
/// Paths without a time component get one. Columns are scaled to unit max-norm and
/// singular values below `1e-10·σ_max` are dropped.
pub fn fit_path_functional(paths: &[CadlagSamplePath], targets: &[f64], level: usize) -> Result<FitResult> {
    if paths.len() != targets.len() {
        return Err(Error::DimensionMismatch { expected: paths.len(), found: targets.len() });
    }
    if paths.is_empty() {
        return Err(Error::Regression("no sample paths".into()));
    }
    let extended: Vec<CadlagSamplePath> = paths.iter().map(time_extended).collect::<Result<_>>()?;
    let alphabet = extended[0].alphabet().clone();
    if extended.iter().any(|p| p.alphabet() != &alphabet) {
        return Err(Error::AlphabetMismatch);
    }
    let words = all_words(&alphabet, level);
    let rows = extended.len();
    let mut design = DMatrix::<f64>::zeros(rows, words.len());
    for (r, p) in extended.iter().enumerate() {
        let sig = terminal_signature(p, level.max(1))?;
        for (c, w) in words.iter().enumerate() {
            design[(r, c)] = sig.coefficient(w)?;
        }
    }
    // Words whose coefficient is the same on every path (pure time words on a common
    // horizon) duplicate the intercept; they get a zero column so the constant goes to ε_∅.
    let scales: Vec<f64> = (0..words.len())
        .map(|c| {
            let col = design.column(c);
            let m = col.amax();
            if c > 0 && col.max() - col.min() <= 1e-14 * m {
                design.column_mut(c).fill(0.0);
            }
            if m > 0.0 {
                m
            } else {
                1.0
            }
        })
        .collect();
    let mut scaled = design;
    for (c, s) in scales.iter().enumerate() {
        scaled.column_mut(c).scale_mut(1.0 / s);
    }
    let rhs = DVector::from_column_slice(targets);
    let svd = scaled.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let solution = svd
        .solve(&rhs, REGRESSION_RIDGE_FLOOR * sigma_max.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::Regression(e.to_string()))?;
    let fitted = &scaled * &solution;
    let residual = ((fitted - &rhs).norm_squared() / rows as f64).sqrt();
    let functional = WordCombination::from_terms(words.iter().zip(solution.iter()).zip(&scales).map(|((w, x), s)| (w.clone(), x / s)));
    Ok(FitResult { functional, residual, underdetermined: rows < words.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::primary_process_triplet;

    fn w<const N: usize>(l: [i32; N]) -> Word {
        Word::from(l)
    }

    fn worked_example() -> (SigModelParams, LevyTriplet) {
        let params = SigModelParams::new(
            1.0,
            WordCombination::term(Word::empty(), 0.2),
            WordCombination::term(Word::empty(), 0.1),
            0,
            0,
            2,
            2,
        )
        .unwrap();
        (params, primary_process_triplet(&[(-0.5, 2.0)], 2).unwrap())
    }

    #[test]
    fn worked_example_price() {
        let (params, triplet) = worked_example();
        let p = price_sig_payoff(&SigPayoff::word(w([1, 1])).unwrap(), &params, &triplet, 1.0).unwrap();
        assert!((p - 0.0225).abs() < 1e-14, "{p}");
        let mart = price_sig_payoff(&SigPayoff::word(w([1])).unwrap(), &params, &triplet, 1.0).unwrap();
        assert!(mart.abs() < 1e-15);
        let constant = SigPayoff::new(WordCombination::term(Word::empty(), 3.5)).unwrap();
        assert_eq!(price_sig_payoff(&constant, &params, &triplet, 1.0).unwrap(), 3.5);
    }

    #[test]
    fn constant_payoff_mc_has_no_error() {
        let (params, triplet) = worked_example();
        let constant = SigPayoff::new(WordCombination::term(Word::empty(), 3.5)).unwrap();
        let grid = SimulationGrid::new(1.0, 10, 1).unwrap();
        let est = mc_price(&constant, &params, &triplet, &grid, 20).unwrap();
        assert_eq!((est.mean, est.std_error), (3.5, 0.0));
    }

    #[test]
    fn stock_payoff_is_replicated() {
        let (params, triplet) = worked_example();
        let grid = SimulationGrid::new(1.0, 50, 4).unwrap();
        let primary = simulate_primary_indexed(&triplet, &grid, 0).unwrap();
        let r = hedge_strategy(&SigPayoff::word(w([1])).unwrap(), &params, &triplet, &primary, DegeneracyPolicy::Fail).unwrap();
        assert_eq!(r.v_star, 0.0);
        assert!(r.theta_path.iter().all(|&t| (t - 1.0).abs() < 1e-15));
        assert!(r.residual_variance < 1e-24);
    }

    #[test]
    fn zero_loadings_are_degenerate() {
        let params = SigModelParams::new(1.0, WordCombination::new(), WordCombination::new(), 0, 0, 2, 1).unwrap();
        let triplet = primary_process_triplet(&[(0.5, 1.0)], 2).unwrap();
        let grid = SimulationGrid::new(1.0, 5, 4).unwrap();
        let primary = simulate_primary_indexed(&triplet, &grid, 0).unwrap();
        let payoff = SigPayoff::word(w([1])).unwrap();
        let err = hedge_strategy(&payoff, &params, &triplet, &primary, DegeneracyPolicy::Fail).unwrap_err();
        assert!(matches!(err, Error::DegenerateDenominator { node: 0, .. }));
        let r = hedge_strategy(&payoff, &params, &triplet, &primary, DegeneracyPolicy::ZeroPosition).unwrap();
        assert_eq!(r.denominator_floor_hits, primary.len());
    }

    #[test]
    fn constant_target_fits_intercept() {
        let (params, triplet) = worked_example();
        let grid = SimulationGrid::new(1.0, 20, 9).unwrap();
        let paths: Vec<_> = (0..30).map(|i| simulate_market(&params, &triplet, &grid, i, 1).unwrap().model).collect();
        let fit = fit_path_functional(&paths, &vec![2.0; 30], 2).unwrap();
        assert!(fit.residual < 1e-10);
        assert!((fit.functional.get(&Word::empty()).copied().unwrap_or(0.0) - 2.0).abs() < 1e-8);
    }
}
