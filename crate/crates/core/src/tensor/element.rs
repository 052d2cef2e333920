use super::{shuffle_words, Alphabet, Word};
use crate::error::{Error, Result};

const SCALAR_TOL: f64 = 1e-12;

/// An element of the tensor algebra truncated at a fixed level.
///
/// Level `n` is stored as a dense block of `A^n` coefficients; inside a block the
/// first letter of a word is the most significant digit of its index.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorElement {
    alphabet: Alphabet,
    level: usize,
    blocks: Vec<Vec<f64>>,
    group_like: bool,
}

impl TensorElement {
    pub fn zero(alphabet: &Alphabet, level: usize) -> Self {
        let a = alphabet.size();
        let blocks = (0..=level).map(|n| vec![0.0; a.pow(n as u32)]).collect();
        Self { alphabet: alphabet.clone(), level, blocks, group_like: false }
    }

    /// The neutral element `ε_∅`.
    pub fn unit(alphabet: &Alphabet, level: usize) -> Self {
        let mut e = Self::zero(alphabet, level);
        e.blocks[0][0] = 1.0;
        e.group_like = true;
        e
    }

    /// Element with only a level-one part `v` (scalar part 0).
    pub fn from_vector(alphabet: &Alphabet, level: usize, v: &[f64]) -> Result<Self> {
        if v.len() != alphabet.size() {
            return Err(Error::DimensionMismatch { expected: alphabet.size(), found: v.len() });
        }
        let mut e = Self::zero(alphabet, level);
        if level >= 1 {
            e.blocks[1].copy_from_slice(v);
        }
        Ok(e)
    }

    /// `exp(v)` for a vector `v`: the signature of a straight segment with increment `v`.
    pub fn exp_of_vector(alphabet: &Alphabet, level: usize, v: &[f64]) -> Result<Self> {
        if v.len() != alphabet.size() {
            return Err(Error::DimensionMismatch { expected: alphabet.size(), found: v.len() });
        }
        let mut e = Self::unit(alphabet, level);
        e.right_mul_exp(v);
        Ok(e)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn scalar(&self) -> f64 {
        self.blocks[0][0]
    }

    /// Coefficients of words of length `n`.
    pub fn block(&self, n: usize) -> &[f64] {
        &self.blocks[n]
    }

    /// Whether the element is known to satisfy the shuffle identity
    /// (set by constructions that provably preserve it).
    pub fn is_group_like(&self) -> bool {
        self.group_like
    }

    fn word_index(&self, word: &Word) -> Result<usize> {
        if word.len() > self.level {
            return Err(Error::WordTooLong { word: word.to_string(), level: self.level });
        }
        let a = self.alphabet.size();
        let mut idx = 0usize;
        for &l in word.letters() {
            let i = self.alphabet.index_of(l).ok_or_else(|| Error::LetterOutOfRange {
                letter: l,
                context: format!("{:?}", self.alphabet),
            })?;
            idx = idx * a + i;
        }
        Ok(idx)
    }

    /// `⟨ε_word, self⟩`.
    pub fn coefficient(&self, word: &Word) -> Result<f64> {
        let idx = self.word_index(word)?;
        Ok(self.blocks[word.len()][idx])
    }

    pub fn set_coefficient(&mut self, word: &Word, value: f64) -> Result<()> {
        let idx = self.word_index(word)?;
        self.blocks[word.len()][idx] = value;
        self.group_like = false;
        Ok(())
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch);
        }
        if self.level != other.level {
            return Err(Error::LevelMismatch { left: self.level, right: other.level });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (bo, bi) in out.blocks.iter_mut().zip(&other.blocks) {
            for (x, y) in bo.iter_mut().zip(bi) {
                *x += y;
            }
        }
        out.group_like = false;
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.blocks.iter_mut().flatten().for_each(|x| *x *= factor);
        out.group_like = false;
        out
    }

    /// Truncated tensor product `self ⊗ other`.
    pub fn tensor_product(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let a = self.alphabet.size();
        let mut out = Self::zero(&self.alphabet, self.level);
        for n in 0..=self.level {
            let target = &mut out.blocks[n];
            for p in 0..=n {
                let q = n - p;
                let stride = a.pow(q as u32);
                let (left, right) = (&self.blocks[p], &other.blocks[q]);
                for (iu, &x) in left.iter().enumerate() {
                    if x == 0.0 {
                        continue;
                    }
                    let row = &mut target[iu * stride..(iu + 1) * stride];
                    for (t, &y) in row.iter_mut().zip(right) {
                        *t += x * y;
                    }
                }
            }
        }
        out.group_like = self.group_like && other.group_like;
        Ok(out)
    }

    /// In-place `self ← self ⊗ exp(v)` for a vector `v`, by Horner's scheme per level.
    pub fn right_mul_exp(&mut self, v: &[f64]) {
        let a = self.alphabet.size();
        debug_assert_eq!(v.len(), a);
        let mut acc: Vec<f64> = Vec::with_capacity(a.pow(self.level as u32));
        let mut next: Vec<f64> = Vec::with_capacity(a.pow(self.level as u32));
        for n in (1..=self.level).rev() {
            acc.clear();
            acc.extend_from_slice(&self.blocks[0]);
            for i in 1..=n {
                let inv = 1.0 / (n - i + 1) as f64;
                next.clear();
                next.extend_from_slice(&self.blocks[i]);
                for (iu, &x) in acc.iter().enumerate() {
                    if x == 0.0 {
                        continue;
                    }
                    let xs = x * inv;
                    for (t, &y) in next[iu * a..(iu + 1) * a].iter_mut().zip(v) {
                        *t += xs * y;
                    }
                }
                std::mem::swap(&mut acc, &mut next);
            }
            self.blocks[n].copy_from_slice(&acc);
        }
    }

    fn check_scalar(&self, expected: f64) -> Result<()> {
        let found = self.scalar();
        if (found - expected).abs() > SCALAR_TOL {
            return Err(Error::ScalarPart { expected, found });
        }
        Ok(())
    }

    /// `self - scalar·unit`, i.e. the element with its scalar part removed.
    fn without_scalar(&self) -> Self {
        let mut b = self.clone();
        b.blocks[0][0] = 0.0;
        b.group_like = false;
        b
    }

    fn has_only_level_one(&self) -> bool {
        self.blocks.iter().skip(2).all(|blk| blk.iter().all(|&x| x == 0.0))
    }

    /// Truncated exponential series; requires scalar part 0.
    pub fn exp(&self) -> Result<Self> {
        self.check_scalar(0.0)?;
        let b = self.without_scalar();
        let mut out = Self::unit(&self.alphabet, self.level);
        let mut power = b.clone();
        let mut factorial = 1.0;
        for k in 1..=self.level {
            factorial *= k as f64;
            out = out.add(&power.scale(1.0 / factorial))?;
            if k < self.level {
                power = power.tensor_product(&b)?;
            }
        }
        out.group_like = self.has_only_level_one();
        Ok(out)
    }

    /// Truncated logarithm series `Σ (-1)^{k+1} b^k / k` of `1 + b`; requires scalar part 1.
    pub fn log(&self) -> Result<Self> {
        self.check_scalar(1.0)?;
        let b = self.without_scalar();
        let mut out = Self::zero(&self.alphabet, self.level);
        let mut power = b.clone();
        for k in 1..=self.level {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            out = out.add(&power.scale(sign / k as f64))?;
            if k < self.level {
                power = power.tensor_product(&b)?;
            }
        }
        Ok(out)
    }

    /// Inverse of `1 + b` via the finite Neumann series; requires scalar part 1.
    pub fn inverse(&self) -> Result<Self> {
        self.check_scalar(1.0)?;
        let b = self.without_scalar();
        let mut out = Self::unit(&self.alphabet, self.level);
        let mut power = b.clone();
        for k in 1..=self.level {
            let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
            out = out.add(&power.scale(sign))?;
            if k < self.level {
                power = power.tensor_product(&b)?;
            }
        }
        out.group_like = self.group_like;
        Ok(out)
    }

    /// Dilation: level `n` is multiplied by `lambda^n`.
    pub fn dilate(&self, lambda: f64) -> Self {
        let mut out = self.clone();
        let mut f = 1.0;
        for blk in out.blocks.iter_mut().skip(1) {
            f *= lambda;
            blk.iter_mut().for_each(|x| *x *= f);
        }
        out
    }

    /// `Σ_{n≥1} |a^(n)|^{1/n}` with the Frobenius norm of each level block; requires scalar part 1.
    pub fn homogeneous_norm(&self) -> Result<f64> {
        self.check_scalar(1.0)?;
        Ok(self
            .blocks
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, blk)| {
                let frob = blk.iter().map(|x| x * x).sum::<f64>().sqrt();
                frob.powf(1.0 / n as f64)
            })
            .sum())
    }

    /// Largest absolute coefficient difference with another compatible element.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .blocks
            .iter()
            .flatten()
            .zip(other.blocks.iter().flatten())
            .fold(0.0, |m, (x, y)| m.max((x - y).abs())))
    }

    /// Worst relative violation of `⟨ε_I,a⟩⟨ε_J,a⟩ = ⟨ε_I⧢ε_J,a⟩` over all word pairs
    /// with `|I| + |J| ≤ max_total` (capped at the level). Deviations are measured
    /// relative to `max(1, |lhs|, |rhs|)`.
    pub fn shuffle_identity_defect(&self, max_total: usize) -> Result<f64> {
        let max_total = max_total.min(self.level);
        let words = all_words(&self.alphabet, max_total);
        let mut worst: f64 = 0.0;
        for u in &words {
            for v in &words {
                if u.len() + v.len() > max_total || u > v {
                    continue;
                }
                let lhs = self.coefficient(u)? * self.coefficient(v)?;
                let rhs = shuffle_words(u, v).eval(self)?;
                let scale = 1f64.max(lhs.abs()).max(rhs.abs());
                worst = worst.max((lhs - rhs).abs() / scale);
            }
        }
        Ok(worst)
    }
}

/// Every word over `alphabet` of length at most `max_len`, ordered by length then lexicographically.
pub fn all_words(alphabet: &Alphabet, max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    let mut frontier = vec![Word::empty()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(frontier.len() * alphabet.size());
        for w in &frontier {
            for &l in alphabet.letters() {
                next.push(w.with_letter(l));
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}
