//! Marcus signatures of piecewise paths and discrete Itô sums.
//!
//! For a path that is linear between nodes, the Marcus lift is the ordered
//! product of `exp(Δx)` over all transitions, jumps included.

use crate::error::{Error, Result};
use crate::path::CadlagSamplePath;
use crate::tensor::{TensorElement, Word, WordCombination, BROWNIAN_LETTER};

/// Truncated signatures `sig(0, t_k)` at every node of a path.
#[derive(Clone, Debug)]
pub struct SignaturePath {
    level: usize,
    times: Vec<f64>,
    elements: Vec<TensorElement>,
}

impl SignaturePath {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Signature over `[0, t_k]`; at the first node of a jump pair this is the left limit.
    pub fn at(&self, k: usize) -> &TensorElement {
        &self.elements[k]
    }

    pub fn elements(&self) -> &[TensorElement] {
        &self.elements
    }

    pub fn terminal(&self) -> &TensorElement {
        self.elements.last().expect("signature paths are non-empty")
    }

    fn node_at(&self, t: f64) -> Result<usize> {
        let k = self.times.partition_point(|&x| x <= t);
        if k == 0 || self.times[k - 1] != t {
            return Err(Error::NotNodeTime(t));
        }
        Ok(k - 1)
    }

    /// `sig_i⁻¹ ⊗ sig_j` between node indices.
    pub fn increment_between(&self, i: usize, j: usize) -> Result<TensorElement> {
        self.elements[i].inverse()?.tensor_product(&self.elements[j])
    }
}

/// Marcus signature at every node, truncated at `level ≥ 1`.
pub fn marcus_signature(path: &CadlagSamplePath, level: usize) -> Result<SignaturePath> {
    if level < 1 {
        return Err(Error::InvalidLevel { min: 1, found: level });
    }
    let mut current = TensorElement::unit(path.alphabet(), level);
    let mut elements = Vec::with_capacity(path.len());
    elements.push(current.clone());
    for k in 1..path.len() {
        current.right_mul_exp(&path.increment(k));
        elements.push(current.clone());
    }
    Ok(SignaturePath { level, times: path.times().to_vec(), elements })
}

/// Signature over the whole horizon without storing intermediate nodes.
pub fn terminal_signature(path: &CadlagSamplePath, level: usize) -> Result<TensorElement> {
    if level < 1 {
        return Err(Error::InvalidLevel { min: 1, found: level });
    }
    let mut current = TensorElement::unit(path.alphabet(), level);
    let mut dx = vec![0.0; path.dim()];
    for k in 1..path.len() {
        for ((d, a), b) in dx.iter_mut().zip(path.value(k)).zip(path.value(k - 1)) {
            *d = a - b;
        }
        current.right_mul_exp(&dx);
    }
    Ok(current)
}

/// `sig(s, t) = sig(0, s)⁻¹ ⊗ sig(0, t)` for node times `s ≤ t`.
///
/// At a jump time the post-jump node is used.
pub fn signature_increment(sig: &SignaturePath, s: f64, t: f64) -> Result<TensorElement> {
    let i = sig.node_at(s)?;
    let j = sig.node_at(t)?;
    if s > t {
        return Err(Error::InvalidPath(format!("increment needs s ≤ t, got s = {s}, t = {t}")));
    }
    sig.increment_between(i, j)
}

/// `⟨ε_w, sig ⊗ φ(v)⟩` with `φ(v) = Σ_m v^{⊗m}/(m+1)!`, the average of `sig ⊗ exp(u v)` over `u ∈ [0,1]`.
fn averaged_segment_coefficient(sig: &TensorElement, word: &Word, v: &[f64]) -> Result<f64> {
    let alphabet = sig.alphabet();
    let letters = word.letters();
    let n = letters.len();
    // tail[k] = Π_{i ≥ k} v[letters[i]]
    let mut tail = vec![1.0; n + 1];
    for k in (0..n).rev() {
        let idx = alphabet.index_of(letters[k]).ok_or_else(|| Error::LetterOutOfRange {
            letter: letters[k],
            context: format!("{alphabet:?}"),
        })?;
        tail[k] = tail[k + 1] * v[idx];
    }
    let mut acc = 0.0;
    let mut fact = 1.0; // (n - k + 1)!
    for k in (0..=n).rev() {
        fact *= (n - k + 1) as f64;
        acc += sig.coefficient(&word.prefix(k))? * tail[k] / fact;
    }
    Ok(acc)
}

/// Running values of `∫_0^{t_k} ⟨functional, X_{s-}⟩ dX^j_s` at every node.
///
/// Jumps use the left-limit integrand. On continuous cells the Brownian letter
/// (0) is integrated by the left-point Itô sum; every other letter is
/// finite-variation and integrated exactly along the linear interpolation, which
/// makes the sum the exact pathwise Stieltjes integral for drift components.
pub fn ito_iterated_sum_path(
    path: &CadlagSamplePath,
    functional: &WordCombination,
    letter: i32,
    sig: &SignaturePath,
) -> Result<Vec<f64>> {
    let j = path.alphabet().index_of(letter).ok_or_else(|| Error::LetterOutOfRange {
        letter,
        context: format!("{:?}", path.alphabet()),
    })?;
    if sig.len() != path.len() {
        return Err(Error::DimensionMismatch { expected: path.len(), found: sig.len() });
    }
    if functional.max_word_len() > sig.level() {
        let w = functional.words().max_by_key(|w| w.len()).expect("non-empty");
        return Err(Error::WordTooLong { word: w.to_string(), level: sig.level() });
    }
    let mut out = Vec::with_capacity(path.len());
    let mut total = 0.0;
    out.push(total);
    for k in 1..path.len() {
        let dx = path.increment(k);
        if dx[j] != 0.0 {
            let left = sig.at(k - 1);
            let integrand = if path.is_jump(k) || letter == BROWNIAN_LETTER {
                functional.eval(left)?
            } else {
                let mut acc = 0.0;
                for (w, c) in functional.iter() {
                    acc += c * averaged_segment_coefficient(left, w, &dx)?;
                }
                acc
            };
            total += integrand * dx[j];
        }
        out.push(total);
    }
    Ok(out)
}

/// Terminal value of [`ito_iterated_sum_path`].
pub fn ito_iterated_sum(
    path: &CadlagSamplePath,
    functional: &WordCombination,
    letter: i32,
    sig: &SignaturePath,
) -> Result<f64> {
    Ok(*ito_iterated_sum_path(path, functional, letter, sig)?.last().expect("non-empty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Alphabet;

    fn one_dim_jumps(sizes: &[f64]) -> CadlagSamplePath {
        let a = Alphabet::range(1, 1).unwrap();
        let mut b = CadlagSamplePath::builder(a, &[0.0]).unwrap();
        for (i, s) in sizes.iter().enumerate() {
            let x = b.current_value()[0];
            b.line_to(i as f64 + 1.0, &[x]).unwrap().jump_by(&[*s]).unwrap();
        }
        b.line_to(sizes.len() as f64 + 1.0, &[b.current_value()[0]]).unwrap();
        b.build().unwrap()
    }

    #[test]
    fn one_segment_is_exponential() {
        let a = Alphabet::range(1, 2).unwrap();
        let mut b = CadlagSamplePath::builder(a.clone(), &[0.0, 0.0]).unwrap();
        b.line_to(1.0, &[0.4, -0.3]).unwrap();
        let sig = marcus_signature(&b.build().unwrap(), 4).unwrap();
        let e = TensorElement::exp_of_vector(&a, 4, &[0.4, -0.3]).unwrap();
        assert!(sig.terminal().max_abs_diff(&e).unwrap() < 1e-16);
    }

    #[test]
    fn axis_path_orders_letters() {
        let a = Alphabet::range(1, 2).unwrap();
        let mut b = CadlagSamplePath::builder(a, &[0.0, 0.0]).unwrap();
        b.line_to(1.0, &[1.0, 0.0]).unwrap().line_to(2.0, &[1.0, 1.0]).unwrap();
        let sig = marcus_signature(&b.build().unwrap(), 2).unwrap();
        assert_eq!(sig.terminal().coefficient(&Word::from([1, 2])).unwrap(), 1.0);
        assert_eq!(sig.terminal().coefficient(&Word::from([2, 1])).unwrap(), 0.0);
    }

    #[test]
    fn unit_jumps_square_over_two() {
        let p = one_dim_jumps(&[1.0; 5]);
        let sig = marcus_signature(&p, 2).unwrap();
        assert!((sig.terminal().coefficient(&Word::from([1, 1])).unwrap() - 12.5).abs() < 1e-12);
        let term = terminal_signature(&p, 2).unwrap();
        assert_eq!(&term, sig.terminal());
    }

    #[test]
    fn ito_sum_examples() {
        let p = one_dim_jumps(&[0.7]);
        let sig = marcus_signature(&p, 2).unwrap();
        let e1 = WordCombination::from_word(Word::from([1]));
        assert_eq!(ito_iterated_sum(&p, &e1, 1, &sig).unwrap(), 0.0);

        let p = one_dim_jumps(&[0.7, -1.3]);
        let sig = marcus_signature(&p, 2).unwrap();
        assert!((ito_iterated_sum(&p, &e1, 1, &sig).unwrap() - 0.7 * -1.3).abs() < 1e-15);

        let a = Alphabet::range(-1, -1).unwrap();
        let mut b = CadlagSamplePath::builder(a, &[0.0]).unwrap();
        b.line_to(0.4, &[0.4]).unwrap().line_to(2.5, &[2.5]).unwrap();
        let p = b.build().unwrap();
        let sig = marcus_signature(&p, 2).unwrap();
        let empty = WordCombination::from_word(Word::empty());
        assert!((ito_iterated_sum(&p, &empty, -1, &sig).unwrap() - 2.5).abs() < 1e-15);
        // ∫ s ds is integrated exactly along the drift
        let time = WordCombination::from_word(Word::from([-1]));
        assert!((ito_iterated_sum(&p, &time, -1, &sig).unwrap() - 2.5 * 2.5 / 2.0).abs() < 1e-14);
    }

    #[test]
    fn increments_compose() {
        let p = one_dim_jumps(&[0.5, 0.25, -2.0]);
        let sig = marcus_signature(&p, 3).unwrap();
        let unit = TensorElement::unit(p.alphabet(), 3);
        assert!(signature_increment(&sig, 2.0, 2.0).unwrap().max_abs_diff(&unit).unwrap() < 1e-15);
        let full = signature_increment(&sig, 0.0, 4.0).unwrap();
        assert!(full.max_abs_diff(sig.terminal()).unwrap() < 1e-14);
        assert!(signature_increment(&sig, 0.0, 1.5).is_err());
    }

    #[test]
    fn level_zero_rejected() {
        assert!(matches!(marcus_signature(&one_dim_jumps(&[1.0]), 0), Err(Error::InvalidLevel { .. })));
    }
}
