//! Word calculus for signature market models.
//!
//! * [`tilde_transform`] rewrites an Itô integral `∫⟨ε_I, X_{s-}⟩ dX^j_s` of the
//!   primary signature as a linear functional of the signature itself;
//! * [`sig_model_representation`] expresses the model price as such a functional;
//! * [`payoff_lift`] turns a word of the time-extended price signature into a
//!   functional of the primary signature.
//!
//! Letters follow the primary alphabet: `-1` time, `0` Brownian, `1` compensated
//! jumps, `k ≥ 2` the k-th power jump sums.

mod alpha;
mod symbolic;

pub use alpha::{alpha_coefficient, alpha_sum, alpha_sum_f64};
pub use symbolic::Polynomial;

use crate::error::{Error, Result};
use crate::tensor::{Coefficient, Combination, Word, WordCombination, BROWNIAN_LETTER, JUMP_LETTER, TIME_LETTER};

fn check_letter(letter: i32, max_letter: i32, what: &str) -> Result<()> {
    if letter < TIME_LETTER || letter > max_letter {
        return Err(Error::LetterOutOfRange {
            letter,
            context: format!("{what}: letters must lie in -1..={max_letter}"),
        });
    }
    Ok(())
}

/// Functional whose pairing with the primary signature equals `∫⟨ε_I, X_{s-}⟩ dX^j_s`.
///
/// `ε_I⊗ε_j`, minus `½ ε_{I'}⊗ε_{-1}` when `I` ends in `0` and `j = 0`, plus for `j > 0`
/// the jump corrections `α(|I₂|) ε_{I₁}⊗ε_{S(I₂)+j}` over splits `I = I₁·I₂` with
/// `I₂` non-empty and all letters positive. Letters above `max_letter` are a structural error.
pub fn tilde_transform(word: &Word, j: i32, max_letter: i32) -> Result<WordCombination> {
    for &l in word.letters() {
        check_letter(l, max_letter, "tilde transform word")?;
    }
    check_letter(j, max_letter, "tilde transform integrator")?;
    let mut out = WordCombination::from_word(word.with_letter(j));
    if j == BROWNIAN_LETTER && word.last() == Some(BROWNIAN_LETTER) {
        out.add_term(word.drop_last().with_letter(TIME_LETTER), -0.5);
    }
    if j > 0 {
        for start in (0..word.len()).rev() {
            let tail = word.suffix_from(start);
            if !tail.is_jump_moment_word() {
                break;
            }
            let letter = tail.letter_sum() + j;
            if letter > max_letter {
                return Err(Error::StructuralBound {
                    bound: "nd + j ≤ N",
                    detail: format!(
                        "integrating {word} against letter {j} produces letter {letter}, above N = {max_letter}"
                    ),
                });
            }
            out.add_term(word.prefix(start).with_letter(letter), alpha_sum_f64(tail.len() as u32));
        }
    }
    Ok(out)
}

/// Linear extension of [`tilde_transform`] to combinations.
pub fn tilde_transform_combination<C: Coefficient>(c: &Combination<C>, j: i32, max_letter: i32) -> Result<Combination<C>> {
    let mut out = Combination::new();
    for (w, coeff) in c.iter() {
        for (tw, x) in tilde_transform(w, j, max_letter)?.iter() {
            out.add_term(tw.clone(), coeff.scale(*x));
        }
    }
    Ok(out)
}

/// `Σ_{S(α)=k} ℓ^α ε^{⧢α}` for `ℓ = Σ_h ℓ_h ε_{J^h}`, with `ε^{⧢α} = (1/α!) ⧢_h ε_{J^h}^{⧢α_h}`.
///
/// Equals `ℓ^{⧢k} / k!` by the multinomial theorem.
pub fn shuffle_power_sum<C: Coefficient>(ell: &Combination<C>, k: usize) -> Combination<C> {
    let terms: Vec<(&Word, &C)> = ell.iter().collect();
    // scaled_powers[h][a] = ℓ_h^a ε_{J^h}^{⧢a} / a!
    let scaled_powers: Vec<Vec<Combination<C>>> = terms
        .iter()
        .map(|(w, c)| {
            let mut v = vec![Combination::from_word(Word::empty())];
            for a in 1..=k {
                let next = v[a - 1]
                    .shuffle(&Combination::term((*w).clone(), (*c).clone()))
                    .scale(1.0 / a as f64);
                v.push(next);
            }
            v
        })
        .collect();
    fn go<C: Coefficient>(h: usize, rest: usize, acc: Combination<C>, powers: &[Vec<Combination<C>>], out: &mut Combination<C>) {
        if h == powers.len() {
            if rest == 0 {
                out.add_assign(&acc);
            }
            return;
        }
        for a in 0..=rest {
            let next = if a == 0 { acc.clone() } else { acc.shuffle(&powers[h][a]) };
            go(h + 1, rest - a, next, powers, out);
        }
    }
    let mut out = Combination::new();
    go(0, k, Combination::from_word(Word::empty()), &scaled_powers, &mut out);
    out
}

/// Parameters of a Lévy-type signature model
/// `S_t = S₀ + ∫ ⟨ℓ_W, X_{s-}⟩ dW_s + ∫∫ ⟨ℓ_ν, X_{s-}⟩ x (μ - ν)(ds, dx)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SigModelParams {
    s0: f64,
    ell_w: WordCombination,
    ell_nu: WordCombination,
    max_len: usize,
    max_letter: i32,
    moment_count: i32,
    level: usize,
}

impl SigModelParams {
    /// Validates word bounds (`length ≤ n`, letters in `-1..=d`) and the structural bound `nd + 1 ≤ N`.
    ///
    /// `level` is the truncation used for primary signatures and must cover the
    /// representation words (`level ≥ n + 1`).
    pub fn new(
        s0: f64,
        ell_w: WordCombination,
        ell_nu: WordCombination,
        max_len: usize,
        max_letter: i32,
        moment_count: i32,
        level: usize,
    ) -> Result<Self> {
        if max_letter < 0 {
            return Err(Error::InvalidModel(format!("max letter d must be non-negative, got {max_letter}")));
        }
        if max_letter > moment_count {
            return Err(Error::InvalidModel(format!("max letter d = {max_letter} exceeds N = {moment_count}")));
        }
        for (name, ell) in [("ell_w", &ell_w), ("ell_nu", &ell_nu)] {
            for w in ell.words() {
                if w.len() > max_len {
                    return Err(Error::InvalidModel(format!("{name} word {w} is longer than n = {max_len}")));
                }
                for &l in w.letters() {
                    if l < TIME_LETTER || l > max_letter {
                        return Err(Error::InvalidModel(format!("{name} word {w} uses letter {l} outside -1..={max_letter}")));
                    }
                }
            }
        }
        let needed = max_len as i64 * max_letter as i64 + 1;
        if needed > moment_count as i64 {
            return Err(Error::StructuralBound {
                bound: "nd + 1 ≤ N",
                detail: format!("n = {max_len}, d = {max_letter} need N ≥ {needed}, got N = {moment_count}"),
            });
        }
        if level < max_len + 1 {
            return Err(Error::InvalidLevel { min: max_len + 1, found: level });
        }
        Ok(Self { s0, ell_w, ell_nu, max_len, max_letter, moment_count, level })
    }

    /// Like [`SigModelParams::new`] with `n` and `d` read off the loadings.
    pub fn inferred(s0: f64, ell_w: WordCombination, ell_nu: WordCombination, moment_count: i32, level: usize) -> Result<Self> {
        let max_len = ell_w.max_word_len().max(ell_nu.max_word_len());
        let max_letter = ell_w.max_letter().max(ell_nu.max_letter()).unwrap_or(0).max(0);
        Self::new(s0, ell_w, ell_nu, max_len, max_letter, moment_count, level)
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }
    pub fn ell_w(&self) -> &WordCombination {
        &self.ell_w
    }
    pub fn ell_nu(&self) -> &WordCombination {
        &self.ell_nu
    }
    /// `n`: maximal loading word length.
    pub fn max_len(&self) -> usize {
        self.max_len
    }
    /// `d`: maximal loading letter.
    pub fn max_letter(&self) -> i32 {
        self.max_letter
    }
    /// `N`: largest moment letter of the primary process.
    pub fn moment_count(&self) -> i32 {
        self.moment_count
    }
    pub fn level(&self) -> usize {
        self.level
    }

    /// The same model with another signature truncation level.
    pub fn with_level(&self, level: usize) -> Result<Self> {
        Self::new(self.s0, self.ell_w.clone(), self.ell_nu.clone(), self.max_len, self.max_letter, self.moment_count, level)
    }

    /// Loadings with every coefficient replaced by its own indeterminate.
    ///
    /// Returns `(ℓ_W, ℓ_ν, values)` where `values[i]` is the numeric loading of indeterminate `i`.
    pub fn symbolic_loadings(&self) -> (Combination<Polynomial>, Combination<Polynomial>, Vec<f64>) {
        let mut values = Vec::new();
        let mut mark = |ell: &WordCombination| {
            Combination::from_terms(ell.iter().map(|(w, c)| {
                values.push(*c);
                (w.clone(), Polynomial::variable(values.len() - 1))
            }))
        };
        let w = mark(&self.ell_w);
        let nu = mark(&self.ell_nu);
        (w, nu, values)
    }
}

/// `S₀ ε_∅ + Σ_J ℓ_W^J (ε_J; ε_0)~ + ℓ_ν^J (ε_J; ε_1)~`: the model price as a signature functional.
pub fn sig_model_representation(params: &SigModelParams) -> Result<WordCombination> {
    let mut out = WordCombination::term(Word::empty(), params.s0());
    out.add_assign(&tilde_transform_combination(params.ell_w(), BROWNIAN_LETTER, params.moment_count())?);
    out.add_assign(&tilde_transform_combination(params.ell_nu(), JUMP_LETTER, params.moment_count())?);
    Ok(out)
}

/// A claim paying `Σ_I h^I ⟨ε_I, Ŝ_T⟩` where `Ŝ = (t, S)` uses letters `-1` and `1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SigPayoff {
    terms: WordCombination,
}

impl SigPayoff {
    pub fn new(terms: WordCombination) -> Result<Self> {
        for w in terms.words() {
            if let Some(&l) = w.letters().iter().find(|&&l| l != TIME_LETTER && l != JUMP_LETTER) {
                return Err(Error::InvalidPayoff(format!("word {w} uses letter {l}; only -1 and 1 are allowed")));
            }
        }
        Ok(Self { terms })
    }

    pub fn word(word: Word) -> Result<Self> {
        Self::new(WordCombination::from_word(word))
    }

    pub fn terms(&self) -> &WordCombination {
        &self.terms
    }

    /// `m`: the longest payoff word.
    pub fn max_len(&self) -> usize {
        self.terms.max_word_len()
    }
}

fn check_lift_bound(len: usize, params: &SigModelParams) -> Result<()> {
    let needed = len as i64 * (params.max_len() as i64 * params.max_letter() as i64 + 1);
    if (params.moment_count() as i64) < needed {
        return Err(Error::StructuralBound {
            bound: "N ≥ m(nd+1)",
            detail: format!(
                "m = {len}, n = {}, d = {} need N ≥ {needed}, got N = {}",
                params.max_len(),
                params.max_letter(),
                params.moment_count()
            ),
        });
    }
    Ok(())
}

/// Recursion for `U_I` over all prefixes of `word`, generic in the coefficient ring.
pub fn payoff_lift_with<C: Coefficient>(
    word: &Word,
    ell_w: &Combination<C>,
    ell_nu: &Combination<C>,
    max_letter: i32,
) -> Result<Combination<C>> {
    if let Some(&l) = word.letters().iter().find(|&&l| l != TIME_LETTER && l != JUMP_LETTER) {
        return Err(Error::InvalidPayoff(format!("word {word} uses letter {l}; only -1 and 1 are allowed")));
    }
    let letters = word.letters();
    let m = letters.len();
    let mut w_powers: Vec<Combination<C>> = vec![Combination::from_word(Word::empty())];
    let mut nu_powers: Vec<Combination<C>> = vec![Combination::from_word(Word::empty())];
    for k in 1..=m.max(2) {
        w_powers.push(shuffle_power_sum(ell_w, k));
        nu_powers.push(shuffle_power_sum(ell_nu, k));
    }
    // lifts[p] = U of the prefix of length p
    let mut lifts: Vec<Combination<C>> = vec![Combination::from_word(Word::empty())];
    for p in 1..=m {
        let prev = &lifts[p - 1];
        let mut u = Combination::new();
        if letters[p - 1] == TIME_LETTER {
            u = tilde_transform_combination(prev, TIME_LETTER, max_letter)?;
        } else {
            u.add_assign(&tilde_transform_combination(&prev.shuffle(&w_powers[1]), BROWNIAN_LETTER, max_letter)?);
            u.add_assign(&tilde_transform_combination(&prev.shuffle(&nu_powers[1]), JUMP_LETTER, max_letter)?);
            if p >= 2 && letters[p - 2] == JUMP_LETTER {
                let base = &lifts[p - 2];
                u.add_assign(&tilde_transform_combination(&base.shuffle(&w_powers[2]), TIME_LETTER, max_letter)?);
            }
            // jump terms: trailing runs of ones of length k ≥ 2
            let mut k = 2;
            while k <= p && letters[p - k] == JUMP_LETTER {
                let base = &lifts[p - k];
                u.add_assign(&tilde_transform_combination(&base.shuffle(&nu_powers[k]), k as i32, max_letter)?);
                k += 1;
            }
        }
        lifts.push(u);
    }
    Ok(lifts.pop().expect("at least the empty lift"))
}

/// `U_I(ℓ)`: functional of the primary signature equal to `⟨ε_I, Ŝ⟩` pathwise.
///
/// Requires `N ≥ |I|(nd + 1)`.
pub fn payoff_lift(word: &Word, params: &SigModelParams) -> Result<WordCombination> {
    check_lift_bound(word.len(), params)?;
    payoff_lift_with(word, params.ell_w(), params.ell_nu(), params.moment_count())
}

/// `U_I` with every loading kept as an indeterminate (see [`SigModelParams::symbolic_loadings`]).
pub fn payoff_lift_symbolic(word: &Word, params: &SigModelParams) -> Result<(Combination<Polynomial>, Vec<f64>)> {
    check_lift_bound(word.len(), params)?;
    let (w, nu, values) = params.symbolic_loadings();
    Ok((payoff_lift_with(word, &w, &nu, params.moment_count())?, values))
}

/// `Σ_I h^I U_I(ℓ)` for a whole payoff.
pub fn payoff_lift_combination(payoff: &SigPayoff, params: &SigModelParams) -> Result<WordCombination> {
    check_lift_bound(payoff.max_len(), params)?;
    let mut out = WordCombination::new();
    for (w, h) in payoff.terms().iter() {
        out.add_assign(&payoff_lift(w, params)?.scale(*h));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w<const N: usize>(l: [i32; N]) -> Word {
        Word::from(l)
    }

    fn combo(terms: &[(Word, f64)]) -> WordCombination {
        WordCombination::from_terms(terms.iter().cloned())
    }

    fn assert_close(a: &WordCombination, b: &WordCombination) {
        let diff = a.plus(&b.scale(-1.0));
        assert!(diff.max_abs_coefficient() < 1e-14, "{a} vs {b}");
    }

    #[test]
    fn tilde_examples() {
        assert_eq!(tilde_transform(&Word::empty(), 2, 3).unwrap(), WordCombination::from_word(w([2])));
        assert_close(&tilde_transform(&w([0]), 0, 2).unwrap(), &combo(&[(w([0, 0]), 1.0), (w([-1]), -0.5)]));
        assert_close(&tilde_transform(&w([1]), 1, 2).unwrap(), &combo(&[(w([1, 1]), 1.0), (w([2]), -0.5)]));
        assert_close(
            &tilde_transform(&w([1, 1]), 1, 3).unwrap(),
            &combo(&[(w([1, 1, 1]), 1.0), (w([1, 2]), -0.5), (w([3]), 1.0 / 12.0)]),
        );
    }

    #[test]
    fn tilde_brownian_correction_drops_last_letter() {
        assert_close(
            &tilde_transform(&w([2, -1, 0]), 0, 2).unwrap(),
            &combo(&[(w([2, -1, 0, 0]), 1.0), (w([2, -1, -1]), -0.5)]),
        );
    }

    #[test]
    fn tilde_overflow_names_bound() {
        match tilde_transform(&w([1, 1]), 1, 2) {
            Err(Error::StructuralBound { bound, .. }) => assert_eq!(bound, "nd + j ≤ N"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(tilde_transform(&w([5]), -1, 2).is_err());
    }

    fn params(ell_w: WordCombination, ell_nu: WordCombination, n: usize, d: i32, k: i32) -> SigModelParams {
        SigModelParams::new(1.0, ell_w, ell_nu, n, d, k, n + 1).unwrap()
    }

    #[test]
    fn representation_examples() {
        let zero = params(WordCombination::new(), WordCombination::new(), 0, 0, 2);
        assert_close(&sig_model_representation(&zero).unwrap(), &combo(&[(Word::empty(), 1.0)]));
        let flat = params(combo(&[(Word::empty(), 0.2)]), combo(&[(Word::empty(), 0.1)]), 0, 0, 2);
        assert_close(
            &sig_model_representation(&flat).unwrap(),
            &combo(&[(Word::empty(), 1.0), (w([0]), 0.2), (w([1]), 0.1)]),
        );
        let bm = params(combo(&[(w([0]), 1.0)]), WordCombination::new(), 1, 0, 2);
        assert_close(
            &sig_model_representation(&bm).unwrap(),
            &combo(&[(Word::empty(), 1.0), (w([0, 0]), 1.0), (w([-1]), -0.5)]),
        );
    }

    #[test]
    fn structural_bound_checked_at_construction() {
        let err = SigModelParams::new(1.0, combo(&[(w([2]), 1.0)]), WordCombination::new(), 1, 2, 2, 2);
        match err {
            Err(Error::StructuralBound { bound, .. }) => assert_eq!(bound, "nd + 1 ≤ N"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(SigModelParams::new(1.0, combo(&[(w([0, 0]), 1.0)]), WordCombination::new(), 1, 0, 2, 2).is_err());
        assert!(SigModelParams::new(1.0, combo(&[(w([3]), 1.0)]), WordCombination::new(), 1, 2, 4, 2).is_err());
    }

    #[test]
    fn lift_examples_without_path_dependence() {
        let (lw, ln) = (0.2, 0.1);
        let p = params(combo(&[(Word::empty(), lw)]), combo(&[(Word::empty(), ln)]), 0, 0, 2);
        assert_close(&payoff_lift(&Word::empty(), &p).unwrap(), &combo(&[(Word::empty(), 1.0)]));
        assert_close(&payoff_lift(&w([-1]), &p).unwrap(), &combo(&[(w([-1]), 1.0)]));
        assert_close(&payoff_lift(&w([1]), &p).unwrap(), &combo(&[(w([0]), lw), (w([1]), ln)]));
        assert_close(
            &payoff_lift(&w([1, 1]), &p).unwrap(),
            &combo(&[(w([0, 0]), lw * lw), (w([1, 0]), lw * ln), (w([0, 1]), lw * ln), (w([1, 1]), ln * ln)]),
        );
    }

    #[test]
    fn lift_bound_and_letters() {
        let p = params(combo(&[(Word::empty(), 0.2)]), WordCombination::new(), 0, 0, 2);
        match payoff_lift(&w([1, 1, 1]), &p) {
            Err(Error::StructuralBound { bound, .. }) => assert_eq!(bound, "N ≥ m(nd+1)"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(payoff_lift(&w([0]), &p), Err(Error::InvalidPayoff(_))));
        assert!(SigPayoff::new(combo(&[(w([1, 2]), 1.0)])).is_err());
    }

    #[test]
    fn shuffle_power_sum_is_normalised_power() {
        let ell = combo(&[(w([0]), 0.3), (w([-1, 2]), -1.5), (Word::empty(), 0.7)]);
        for k in 0..=3 {
            let direct = ell.shuffle_power(k).scale(1.0 / (1..=k).product::<usize>() as f64);
            assert_close(&shuffle_power_sum(&ell, k), &direct);
        }
    }

    #[test]
    fn symbolic_lift_has_full_degree() {
        let p = params(combo(&[(w([-1]), 0.2), (Word::empty(), 0.5)]), combo(&[(w([1]), 0.1)]), 1, 1, 4);
        let (u, values) = payoff_lift_symbolic(&w([1, 1]), &p).unwrap();
        let max_deg = u.iter().filter_map(|(_, c)| c.degree()).max().unwrap();
        assert_eq!(max_deg, 2);
        let numeric = payoff_lift(&w([1, 1]), &p).unwrap();
        let evaluated = u.map_coefficients(|c| c.eval(&values));
        assert_close(&evaluated, &numeric);
    }
}
