//! Lévy triplets with finite atomic jump measures, the generator tensor `Q`
//! and closed-form expected signatures `E[sig_t] = exp(tQ)`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::tensor::{Alphabet, TensorElement, Word, WordCombination};

/// One atom `λ δ_x` of a finite jump measure.
#[derive(Clone, Debug, PartialEq)]
pub struct LevyAtom {
    pub jump: Vec<f64>,
    pub intensity: f64,
}

/// Drift, covariance and finite atomic jump measure of a Lévy process.
///
/// The drift is the mean rate `E[L_1]`, so `Q` has level-one part equal to it.
#[derive(Clone, Debug, PartialEq)]
pub struct LevyTriplet {
    alphabet: Alphabet,
    drift: Vec<f64>,
    covariance: Vec<f64>,
    atoms: Vec<LevyAtom>,
    primary_atoms: Option<Vec<(f64, f64)>>,
}

impl LevyTriplet {
    /// Validates symmetry and positive semidefiniteness of `covariance`, and that no atom
    /// sits at the origin.
    pub fn new(alphabet: Alphabet, drift: Vec<f64>, covariance: Vec<Vec<f64>>, atoms: Vec<LevyAtom>) -> Result<Self> {
        let dim = alphabet.size();
        if drift.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: drift.len() });
        }
        if covariance.len() != dim || covariance.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidTriplet(format!("covariance must be {dim}x{dim}")));
        }
        let flat: Vec<f64> = covariance.into_iter().flatten().collect();
        if flat.iter().chain(&drift).any(|x| !x.is_finite()) {
            return Err(Error::InvalidTriplet("non-finite drift or covariance entry".into()));
        }
        let scale = flat.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        for i in 0..dim {
            for j in 0..i {
                if (flat[i * dim + j] - flat[j * dim + i]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidTriplet("covariance is not symmetric".into()));
                }
            }
        }
        let eig = SymmetricEigen::new(DMatrix::from_row_slice(dim, dim, &flat));
        if let Some(min) = eig.eigenvalues.iter().copied().reduce(f64::min) {
            if min < -1e-12 {
                return Err(Error::InvalidTriplet(format!("covariance has negative eigenvalue {min:e}")));
            }
        }
        for atom in &atoms {
            if atom.jump.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: atom.jump.len() });
            }
            if atom.jump.iter().all(|&x| x == 0.0) {
                return Err(Error::InvalidTriplet("jump measure has an atom at the origin".into()));
            }
            if !(atom.intensity > 0.0 && atom.intensity.is_finite()) {
                return Err(Error::InvalidTriplet(format!("atom intensity must be positive, got {}", atom.intensity)));
            }
            if atom.jump.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidTriplet("non-finite atom".into()));
            }
        }
        Ok(Self { alphabet, drift, covariance: flat, atoms, primary_atoms: None })
    }

    /// Triplet over letters `1..=dim`.
    pub fn on_positive_letters(drift: Vec<f64>, covariance: Vec<Vec<f64>>, atoms: Vec<LevyAtom>) -> Result<Self> {
        let alphabet = Alphabet::range(1, drift.len().max(1) as i32)?;
        Self::new(alphabet, drift, covariance, atoms)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn dim(&self) -> usize {
        self.alphabet.size()
    }

    pub fn drift(&self) -> &[f64] {
        &self.drift
    }

    /// Covariance entry by dense indices.
    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        self.covariance[i * self.dim() + j]
    }

    pub fn atoms(&self) -> &[LevyAtom] {
        &self.atoms
    }

    /// The one-dimensional jump atoms `(x, λ)` if this triplet came from [`primary_process_triplet`].
    pub fn primary_atoms(&self) -> Option<&[(f64, f64)]> {
        self.primary_atoms.as_deref()
    }

    /// Largest moment letter `K` of a primary triplet.
    pub fn moment_count(&self) -> Option<i32> {
        self.primary_atoms.as_ref().map(|_| self.alphabet.max_letter())
    }

    fn indices(&self, word: &Word) -> Result<Vec<usize>> {
        word.letters()
            .iter()
            .map(|&l| {
                self.alphabet.index_of(l).ok_or_else(|| Error::LetterOutOfRange {
                    letter: l,
                    context: format!("{:?}", self.alphabet),
                })
            })
            .collect()
    }

    /// `⟨ε_word, Q⟩` computed directly from the triplet.
    pub fn generator_coefficient(&self, word: &Word) -> Result<f64> {
        let idx = self.indices(word)?;
        let mixed = || -> f64 { self.atoms.iter().map(|a| a.intensity * idx.iter().map(|&i| a.jump[i]).product::<f64>()).sum() };
        Ok(match idx.len() {
            0 => 0.0,
            1 => self.drift[idx[0]],
            2 => 0.5 * (self.covariance(idx[0], idx[1]) + mixed()),
            n => mixed() / factorial(n),
        })
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// The generator tensor `Q = (0, b, ½(C + ∫x⊗x F), …, (1/k!)∫x^{⊗k} F, …)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorTensor(TensorElement);

impl GeneratorTensor {
    pub fn element(&self) -> &TensorElement {
        &self.0
    }

    pub fn level(&self) -> usize {
        self.0.level()
    }
}

/// Dense `Q` up to `level`.
pub fn build_generator_q(triplet: &LevyTriplet, level: usize) -> GeneratorTensor {
    let alphabet = triplet.alphabet();
    let dim = triplet.dim();
    let mut q = TensorElement::zero(alphabet, level);
    if level >= 1 {
        let mut level1 = q.clone();
        for (i, &b) in triplet.drift().iter().enumerate() {
            level1.set_coefficient(&Word::single(alphabet.letter(i)), b).expect("letter in alphabet");
        }
        q = level1;
    }
    // Atom tensor powers, built incrementally as exp-free products.
    let mut powers: Vec<TensorElement> = triplet
        .atoms()
        .iter()
        .map(|a| TensorElement::from_vector(alphabet, level, &a.jump).expect("validated dimension"))
        .collect();
    let vectors: Vec<TensorElement> = powers.clone();
    for n in 2..=level {
        for (p, v) in powers.iter_mut().zip(&vectors) {
            *p = p.tensor_product(v).expect("same shape");
        }
        let mut block = TensorElement::zero(alphabet, level);
        for (p, atom) in powers.iter().zip(triplet.atoms()) {
            block = block.add(&p.scale(atom.intensity)).expect("same shape");
        }
        block = block.scale(1.0 / factorial(n));
        if n == 2 {
            let mut cov = TensorElement::zero(alphabet, level);
            for i in 0..dim {
                for j in 0..dim {
                    let w = Word::from([alphabet.letter(i), alphabet.letter(j)]);
                    cov.set_coefficient(&w, 0.5 * triplet.covariance(i, j)).expect("level ≥ 2");
                }
            }
            block = block.add(&cov).expect("same shape");
        }
        q = q.add(&block).expect("same shape");
    }
    GeneratorTensor(q)
}

/// `E[sig_t] = exp(tQ)` truncated at `level`.
pub fn expected_signature(triplet: &LevyTriplet, t: f64, level: usize) -> Result<TensorElement> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    build_generator_q(triplet, level).element().scale(t).exp()
}

/// Polynomial `t ↦ E⟨ε_w, sig_t⟩ = Σ_k c_k t^k / k!` for a single word,
/// where `c_k` sums `Π ⟨ε_piece, Q⟩` over splittings of `w` into `k` non-empty pieces.
#[derive(Clone, Debug, PartialEq)]
pub struct WordMomentPolynomial {
    coefficients: Vec<f64>,
}

impl WordMomentPolynomial {
    pub fn new(triplet: &LevyTriplet, word: &Word) -> Result<Self> {
        let n = word.len();
        let mut piece = vec![vec![0.0; n + 1]; n + 1];
        for i in 0..n {
            for j in i + 1..=n {
                piece[i][j] = triplet.generator_coefficient(&Word::from(&word.letters()[i..j]))?;
            }
        }
        // ways[p][k]: splittings of the first p letters into k pieces
        let mut ways = vec![vec![0.0; n + 1]; n + 1];
        ways[0][0] = 1.0;
        for p in 1..=n {
            for k in 1..=p {
                ways[p][k] = (k - 1..p).map(|q| ways[q][k - 1] * piece[q][p]).sum();
            }
        }
        let coefficients = (0..=n).map(|k| ways[n][k] / factorial(k)).collect();
        Ok(Self { coefficients })
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }
}

/// `E[⟨ε_I, sig_{s+t}⟩ | F_s] = Σ_{I = I₁·I₂} ⟨ε_{I₁}, sig_s⟩ E⟨ε_{I₂}, sig_t⟩`.
pub fn conditional_expected_signature(sig_at_s: &TensorElement, triplet: &LevyTriplet, t: f64, word: &Word) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    if word.len() > sig_at_s.level() {
        return Err(Error::WordTooLong { word: word.to_string(), level: sig_at_s.level() });
    }
    let mut acc = 0.0;
    for (head, tail) in word.splits() {
        let first = sig_at_s.coefficient(&head)?;
        if first != 0.0 {
            acc += first * WordMomentPolynomial::new(triplet, &tail)?.eval(t);
        }
    }
    Ok(acc)
}

/// Generator action on a linear functional: `A⟨ε_J, ·⟩(y) = ⟨ε_J, Q ⊗ y⟩`.
pub fn generator_apply(word: &Word, point: &TensorElement, q: &GeneratorTensor) -> Result<f64> {
    if point.level() != q.level() {
        return Err(Error::LevelMismatch { left: q.level(), right: point.level() });
    }
    if word.len() > q.level() {
        return Err(Error::WordTooLong { word: word.to_string(), level: q.level() });
    }
    let mut acc = 0.0;
    for (head, tail) in word.splits() {
        let qh = q.element().coefficient(&head)?;
        if qh != 0.0 {
            acc += qh * point.coefficient(&tail)?;
        }
    }
    Ok(acc)
}

/// The functional representing `A` applied to `functional`:
/// `Σ_w c_w Σ_{w = u·v} ⟨ε_u, Q⟩ ε_v`.
pub fn generator_on_functional(functional: &WordCombination, q: &GeneratorTensor) -> Result<WordCombination> {
    let mut out = WordCombination::new();
    for (w, c) in functional.iter() {
        for (head, tail) in w.splits() {
            let qh = q.element().coefficient(&head)?;
            out.add_term(tail, c * qh);
        }
    }
    Ok(out)
}

/// Triplet of the primary process `(t, W, compensated jumps, jump moments 2..=K)` driven by
/// a standard Brownian motion and the one-dimensional jump atoms `(x, λ)`.
pub fn primary_process_triplet(jump_atoms: &[(f64, f64)], moment_count: i32) -> Result<LevyTriplet> {
    if moment_count < 2 {
        return Err(Error::InvalidTriplet(format!("moment count must be at least 2, got {moment_count}")));
    }
    let alphabet = Alphabet::primary(moment_count)?;
    let dim = alphabet.size();
    for &(x, lambda) in jump_atoms {
        if x == 0.0 || !x.is_finite() {
            return Err(Error::InvalidTriplet(format!("jump size must be finite and non-zero, got {x}")));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidTriplet(format!("intensity must be positive, got {lambda}")));
        }
    }
    let image = |x: f64| -> Vec<f64> {
        let mut v = vec![0.0; dim];
        for k in 1..=moment_count {
            v[(k + 1) as usize] = x.powi(k);
        }
        v
    };
    let mut drift = vec![0.0; dim];
    drift[0] = 1.0;
    for k in 2..=moment_count {
        drift[(k + 1) as usize] = jump_atoms.iter().map(|&(x, l)| l * x.powi(k)).sum();
    }
    let mut covariance = vec![vec![0.0; dim]; dim];
    covariance[1][1] = 1.0;
    let atoms = jump_atoms.iter().map(|&(x, l)| LevyAtom { jump: image(x), intensity: l }).collect();
    let mut triplet = LevyTriplet::new(alphabet, drift, covariance, atoms)?;
    triplet.primary_atoms = Some(jump_atoms.to_vec());
    Ok(triplet)
}

/// `Σ λ x^k` over the one-dimensional atoms.
pub fn jump_moment(atoms: &[(f64, f64)], k: i32) -> f64 {
    atoms.iter().map(|&(x, l)| l * x.powi(k)).sum()
}
