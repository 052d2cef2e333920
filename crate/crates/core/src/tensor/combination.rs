use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use super::{TensorElement, Word};
use crate::error::{Error, Result};

/// Scalar ring used for the coefficients of a [`Combination`].
///
/// Implemented for `f64` and for the symbolic polynomials used in degree accounting.
pub trait Coefficient: Clone + fmt::Debug + PartialEq {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn scale(&self, factor: f64) -> Self;
}

impl Coefficient for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn scale(&self, factor: f64) -> Self {
        self * factor
    }
}

/// A sparse linear combination of words, i.e. a linear functional on the tensor algebra.
///
/// Zero coefficients are dropped on insertion and duplicate words are merged.
#[derive(Clone, PartialEq)]
pub struct Combination<C: Coefficient = f64> {
    terms: BTreeMap<Word, C>,
}

/// Real-coefficient combination of words.
pub type WordCombination = Combination<f64>;

impl<C: Coefficient> Default for Combination<C> {
    fn default() -> Self {
        Self { terms: BTreeMap::new() }
    }
}

impl<C: Coefficient> Combination<C> {
    pub fn new() -> Self {
        Self::default()
    }

    /// The single basis functional `1 · word`.
    pub fn from_word(word: Word) -> Self {
        Self::term(word, C::one())
    }

    pub fn term(word: Word, coeff: C) -> Self {
        let mut c = Self::new();
        c.add_term(word, coeff);
        c
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Word, C)>) -> Self {
        let mut c = Self::new();
        for (w, k) in terms {
            c.add_term(w, k);
        }
        c
    }

    /// Adds `coeff · word`, merging with an existing entry.
    pub fn add_term(&mut self, word: Word, coeff: C) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&word) {
            Some(existing) => {
                let sum = existing.add(&coeff);
                if sum.is_zero() {
                    self.terms.remove(&word);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(word, coeff);
            }
        }
    }

    pub fn get(&self, word: &Word) -> Option<&C> {
        self.terms.get(word)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, &C)> {
        self.terms.iter()
    }

    pub fn words(&self) -> impl Iterator<Item = &Word> {
        self.terms.keys()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Length of the longest word (0 for the zero functional).
    pub fn max_word_len(&self) -> usize {
        self.terms.keys().map(Word::len).max().unwrap_or(0)
    }

    /// Largest letter appearing in any word.
    pub fn max_letter(&self) -> Option<i32> {
        self.terms.keys().filter_map(Word::max_letter).max()
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (w, k) in &other.terms {
            self.add_term(w.clone(), k.clone());
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_terms(self.terms.iter().map(|(w, k)| (w.clone(), k.scale(factor))))
    }

    pub fn scale_by(&self, factor: &C) -> Self {
        Self::from_terms(self.terms.iter().map(|(w, k)| (w.clone(), k.mul(factor))))
    }

    /// Right concatenation with a single letter: `Σ c_w ε_{w·j}`.
    pub fn append_letter(&self, letter: i32) -> Self {
        Self::from_terms(self.terms.iter().map(|(w, k)| (w.with_letter(letter), k.clone())))
    }

    /// Right concatenation with a word.
    pub fn append_word(&self, tail: &Word) -> Self {
        Self::from_terms(self.terms.iter().map(|(w, k)| (w.concat(tail), k.clone())))
    }

    /// Bilinear extension of the word shuffle.
    pub fn shuffle(&self, other: &Self) -> Self {
        let mut out = Self::new();
        let mut cache: HashMap<(&Word, &Word), WordCombination> = HashMap::new();
        for (wa, ka) in &self.terms {
            for (wb, kb) in &other.terms {
                let sh = cache.entry((wa, wb)).or_insert_with(|| shuffle_words(wa, wb));
                let k = ka.mul(kb);
                for (w, mult) in &sh.terms {
                    out.add_term(w.clone(), k.scale(*mult));
                }
            }
        }
        out
    }

    /// `self ⧢ self ⧢ ... ⧢ self` (`power` factors); the zeroth power is `ε_∅`.
    pub fn shuffle_power(&self, power: usize) -> Self {
        let mut out = Self::from_word(Word::empty());
        for _ in 0..power {
            out = out.shuffle(self);
        }
        out
    }

    /// Applies `f` to every coefficient.
    pub fn map_coefficients<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> Combination<D> {
        Combination::from_terms(self.terms.iter().map(|(w, k)| (w.clone(), f(k))))
    }
}

impl WordCombination {
    /// `⟨self, a⟩ = Σ coeff · a[word]`.
    pub fn eval(&self, a: &TensorElement) -> Result<f64> {
        let mut acc = 0.0;
        for (w, k) in &self.terms {
            acc += k * a.coefficient(w)?;
        }
        Ok(acc)
    }

    /// Largest absolute coefficient.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, k| m.max(k.abs()))
    }
}

/// All interleavings of `a` and `b`, counted with multiplicity.
pub fn shuffle_words(a: &Word, b: &Word) -> WordCombination {
    let (la, lb) = (a.letters(), b.letters());
    // row[j] holds the shuffle of a[..i] and b[..j]
    let mut row: Vec<HashMap<Vec<i32>, f64>> = (0..=lb.len())
        .map(|j| HashMap::from([(lb[..j].to_vec(), 1.0)]))
        .collect();
    for i in 1..=la.len() {
        let mut next: Vec<HashMap<Vec<i32>, f64>> = Vec::with_capacity(lb.len() + 1);
        next.push(HashMap::from([(la[..i].to_vec(), 1.0)]));
        for j in 1..=lb.len() {
            let mut cell: HashMap<Vec<i32>, f64> = HashMap::new();
            for (w, k) in &row[j] {
                let mut w = w.clone();
                w.push(la[i - 1]);
                *cell.entry(w).or_insert(0.0) += k;
            }
            for (w, k) in &next[j - 1] {
                let mut w = w.clone();
                w.push(lb[j - 1]);
                *cell.entry(w).or_insert(0.0) += k;
            }
            next.push(cell);
        }
        row = next;
    }
    let last = row.pop().expect("row has lb.len()+1 entries");
    Combination::from_terms(last.into_iter().map(|(w, k)| (Word::from(w), k)))
}

impl<C: Coefficient> fmt::Debug for Combination<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter().map(|(w, k)| (w.to_string(), k))).finish()
    }
}

impl fmt::Display for WordCombination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (w, k)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{k}*{w}")?;
        }
        Ok(())
    }
}

impl FromStr for WordCombination {
    type Err = Error;

    /// Parses `coeff*word + coeff*word ...`; a bare word means coefficient 1 and `0` is the zero functional.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut out = Self::new();
        if s == "0" {
            return Ok(out);
        }
        for term in s.split(" + ") {
            let term = term.trim();
            let (coeff, word) = match term.split_once('*') {
                Some((c, w)) => {
                    let c: f64 = c
                        .trim()
                        .parse()
                        .map_err(|_| Error::WordParse { token: c.trim().to_string() })?;
                    (c, w.parse::<Word>()?)
                }
                None => (1.0, term.parse::<Word>()?),
            };
            out.add_term(word, coeff);
        }
        Ok(out)
    }
}
