//! Seeded simulation of the primary process and of signature models, plus the
//! translation of model coefficients under an equivalent change of measure.
//!
//! Every path `i` of a Monte Carlo run draws from its own ChaCha stream `i`
//! keyed by the master seed, so results do not depend on how paths are spread
//! over worker threads. Reductions always run in path order.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, StandardNormal};
use rayon::prelude::*;

use crate::calculus::{sig_model_representation, tilde_transform_combination, SigModelParams};
use crate::error::{Error, Result};
use crate::levy::{jump_moment, primary_process_triplet, LevyTriplet};
use crate::path::CadlagSamplePath;
use crate::signature::{ito_iterated_sum_path, SignaturePath};
use crate::tensor::{Alphabet, Word, WordCombination, BROWNIAN_LETTER, JUMP_LETTER, TIME_LETTER};

/// Uniform time grid on `[0, T]` with a master seed. Jump times are merged in per path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulationGrid {
    horizon: f64,
    steps: usize,
    seed: u64,
}

impl SimulationGrid {
    pub fn new(horizon: f64, steps: usize, seed: u64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidGrid(format!("horizon must be positive, got {horizon}")));
        }
        if steps == 0 {
            return Err(Error::InvalidGrid("at least one step is required".into()));
        }
        Ok(Self { horizon, steps, seed })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Time of grid point `j`.
    pub fn time(&self, j: usize) -> f64 {
        self.horizon * j as f64 / self.steps as f64
    }

    pub fn with_steps(&self, steps: usize) -> Result<Self> {
        Self::new(self.horizon, steps, self.seed)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..*self }
    }
}

/// Random stream of path `index` under `seed`.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs `f` for path indices `0..paths` in parallel and returns the results in index order.
pub fn map_paths<T, F>(paths: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..paths as u64).into_par_iter().map(f).collect()
}

/// One path of the primary process (stream 0 of the grid seed).
pub fn simulate_primary(triplet: &LevyTriplet, grid: &SimulationGrid) -> Result<CadlagSamplePath> {
    simulate_primary_indexed(triplet, grid, 0)
}

/// Path `index` of the primary process.
///
/// Jump times are exact exponential clocks per atom; the Brownian component gets an
/// independent Gaussian increment on every cell of the merged grid.
pub fn simulate_primary_indexed(triplet: &LevyTriplet, grid: &SimulationGrid, index: u64) -> Result<CadlagSamplePath> {
    let atoms = triplet
        .primary_atoms()
        .ok_or_else(|| Error::InvalidTriplet("simulation needs a primary process triplet".into()))?;
    let max_moment = triplet.alphabet().max_letter();
    let dim = triplet.dim();
    let horizon = grid.horizon();
    let mut rng = path_rng(grid.seed(), index);

    let mut jumps: Vec<(f64, f64)> = Vec::new();
    for &(x, lambda) in atoms {
        let clock = Exp::new(lambda).map_err(|e| Error::InvalidTriplet(e.to_string()))?;
        let mut t = 0.0;
        loop {
            t += rng.sample(clock);
            if t >= horizon {
                break;
            }
            jumps.push((t, x));
        }
    }
    jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
    let drift_rate = jump_moment(atoms, 1);

    // sums[k] = Σ x^k over jumps so far, k = 1..=K
    let mut sums = vec![0.0; max_moment as usize + 1];
    let mut brownian = 0.0;
    let state = |t: f64, w: f64, sums: &[f64]| -> Vec<f64> {
        let mut v = vec![0.0; dim];
        v[0] = t;
        v[1] = w;
        v[2] = sums[1] - t * drift_rate;
        for k in 2..=max_moment as usize {
            v[k + 1] = sums[k];
        }
        v
    };
    let mut builder = CadlagSamplePath::builder(triplet.alphabet().clone(), &state(0.0, 0.0, &sums))?;
    let mut next_jump = 0;
    let mut current = 0.0;
    for j in 1..=grid.steps() {
        let grid_time = grid.time(j);
        loop {
            let jump = jumps.get(next_jump).filter(|(t, _)| *t <= grid_time).copied();
            let target = jump.map_or(grid_time, |(t, _)| t);
            if target > current {
                let z: f64 = rng.sample(StandardNormal);
                brownian += (target - current).sqrt() * z;
                current = target;
                builder.line_to(current, &state(current, brownian, &sums))?;
            }
            match jump {
                Some((_, x)) => {
                    let mut power = 1.0;
                    for s in sums.iter_mut().skip(1) {
                        power *= x;
                        *s += power;
                    }
                    builder.jump_to(&state(current, brownian, &sums))?;
                    next_jump += 1;
                }
                None => break,
            }
        }
    }
    builder.build()
}

/// Keeps every `factor`-th grid node (and all jump nodes) of a simulated path,
/// giving the same sample path observed on a coarser grid.
pub fn thin_grid(path: &CadlagSamplePath, grid: &SimulationGrid, factor: usize) -> Result<CadlagSamplePath> {
    if factor == 0 || grid.steps() % factor != 0 {
        return Err(Error::InvalidGrid(format!("factor {factor} does not divide {} steps", grid.steps())));
    }
    let coarse = grid.with_steps(grid.steps() / factor)?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut flags = Vec::new();
    for k in 0..path.len() {
        let t = path.times()[k];
        let in_jump_pair = path.is_jump(k) || (k + 1 < path.len() && path.is_jump(k + 1));
        let on_coarse_grid = {
            let j = (t / coarse.horizon() * coarse.steps() as f64).round() as usize;
            coarse.time(j) == t
        };
        if k == 0 || in_jump_pair || on_coarse_grid {
            times.push(t);
            values.push(path.value(k).to_vec());
            flags.push(path.is_jump(k));
        }
    }
    CadlagSamplePath::new(path.alphabet().clone(), times, values, flags)
}

/// The time-extended model path `(t, S_t)` on the primary path's nodes.
///
/// Integrands are read at left limits. The Brownian integral is a left-point Itô
/// sum; the compensated-jump integral takes each jump with its left-limit integrand
/// and integrates the compensator drift exactly along each linear cell.
pub fn simulate_model_direct(params: &SigModelParams, primary: &CadlagSamplePath, sig: &SignaturePath) -> Result<CadlagSamplePath> {
    if sig.level() < params.max_len() {
        return Err(Error::InvalidLevel { min: params.max_len(), found: sig.level() });
    }
    let from_w = ito_iterated_sum_path(primary, params.ell_w(), BROWNIAN_LETTER, sig)?;
    let from_nu = ito_iterated_sum_path(primary, params.ell_nu(), JUMP_LETTER, sig)?;
    let values = (0..primary.len())
        .map(|k| vec![primary.times()[k], params.s0() + from_w[k] + from_nu[k]])
        .collect();
    let flags = (0..primary.len()).map(|k| primary.is_jump(k)).collect();
    CadlagSamplePath::new(Alphabet::time_extended_price(), primary.times().to_vec(), values, flags)
}

/// The path with its clock prepended as letter `-1`; unchanged if it already has one.
pub fn time_extended(path: &CadlagSamplePath) -> Result<CadlagSamplePath> {
    let alphabet = path.alphabet();
    if alphabet.contains(TIME_LETTER) {
        return Ok(path.clone());
    }
    let extended = Alphabet::new(std::iter::once(TIME_LETTER).chain(alphabet.letters().iter().copied()))?;
    let values = (0..path.len())
        .map(|k| std::iter::once(path.times()[k]).chain(path.value(k).iter().copied()).collect())
        .collect();
    let flags = (0..path.len()).map(|k| path.is_jump(k)).collect();
    CadlagSamplePath::new(extended, path.times().to_vec(), values, flags)
}

/// `⟨sig_model_representation, sig_t⟩` at every node.
pub fn evaluate_model_from_signature(params: &SigModelParams, sig: &SignaturePath) -> Result<Vec<f64>> {
    let rep = sig_model_representation(params)?;
    if rep.max_word_len() > sig.level() {
        return Err(Error::InvalidLevel { min: rep.max_word_len(), found: sig.level() });
    }
    sig.elements().iter().map(|x| rep.eval(x)).collect()
}

/// Density of an equivalent measure change: Brownian drift `f(t) = ⟨f, X_t⟩` and
/// jump reweighting `λ_i → λ_i e^{g_i}` per atom.
///
/// The density must be a true martingale; this is the caller's responsibility
/// (bounded `f` and `g` suffice) and is not checked.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureChangeSpec {
    pub f: WordCombination,
    pub g: Vec<f64>,
    /// Also allow letter 1 in the words of `f` (letter 0 is never allowed).
    pub allow_jump_letter_in_f: bool,
}

impl MeasureChangeSpec {
    pub fn new(f: WordCombination, g: Vec<f64>) -> Self {
        Self { f, g, allow_jump_letter_in_f: false }
    }
}

/// Result of [`measure_change_translate`].
#[derive(Clone, Debug)]
pub struct MeasureChange {
    /// Primary triplet of `Y` under the new measure.
    pub triplet: LevyTriplet,
    /// `ε_J^P` for every loading word `J` (and all their prefixes).
    pub translated: BTreeMap<Word, WordCombination>,
    /// Drift of the price under the new measure as a functional of the `Y` signature.
    pub drift: WordCombination,
    /// `f` as given, a functional of the `X` signature.
    pub f: WordCombination,
    /// `f` rewritten on the `Y` signature.
    pub f_translated: WordCombination,
    /// `Σ λ_i x_i (e^{g_i} - 1)`.
    pub jump_drift: f64,
}

struct Translator<'a> {
    memo: BTreeMap<Word, WordCombination>,
    f: Option<WordCombination>,
    jump_drift: f64,
    max_letter: i32,
    _marker: std::marker::PhantomData<&'a ()>,
}

impl Translator<'_> {
    fn translate(&mut self, word: &Word) -> Result<WordCombination> {
        if let Some(c) = self.memo.get(word) {
            return Ok(c.clone());
        }
        let c = if word.is_empty() {
            WordCombination::from_word(Word::empty())
        } else {
            let letters = word.letters();
            let k = letters.len();
            let last = letters[k - 1];
            let head = self.translate(&word.drop_last())?;
            let mut out = tilde_transform_combination(&head, last, self.max_letter)?;
            if last == BROWNIAN_LETTER {
                let f = self.f.clone().ok_or_else(|| Error::InvalidMeasureChange("f may not use letter 0".into()))?;
                out.add_assign(&head.shuffle(&f).append_letter(TIME_LETTER));
            }
            if last == JUMP_LETTER {
                out.add_assign(&head.append_letter(TIME_LETTER).scale(self.jump_drift));
            }
            if k >= 2 && last == BROWNIAN_LETTER && letters[k - 2] == BROWNIAN_LETTER {
                let base = self.translate(&word.drop_last_two())?;
                out.add_assign(&base.append_letter(TIME_LETTER).scale(0.5));
            }
            for len in 2..=k {
                let tail = word.suffix_from(k - len);
                if !tail.is_jump_moment_word() {
                    break;
                }
                let base = self.translate(&word.prefix(k - len))?;
                let scale = 1.0 / crate::levy::factorial(len);
                out.add_assign(&tilde_transform_combination(&base, tail.letter_sum(), self.max_letter)?.scale(scale));
            }
            out
        };
        self.memo.insert(word.clone(), c.clone());
        Ok(c)
    }
}

/// Rewrites `⟨ε_J, X⟩` as `⟨ε_J^P, Y⟩`, where `Y` is the primary process under the new measure.
pub fn measure_change_translate(params: &SigModelParams, spec: &MeasureChangeSpec, triplet_q: &LevyTriplet) -> Result<MeasureChange> {
    let atoms = triplet_q
        .primary_atoms()
        .ok_or_else(|| Error::InvalidMeasureChange("a primary process triplet is required".into()))?;
    let max_letter = triplet_q.alphabet().max_letter();
    if spec.g.len() != atoms.len() {
        return Err(Error::InvalidMeasureChange(format!("{} g values for {} atoms", spec.g.len(), atoms.len())));
    }
    if let Some(g) = spec.g.iter().find(|g| !g.is_finite()) {
        return Err(Error::InvalidMeasureChange(format!("non-finite g value {g}")));
    }
    for w in spec.f.words() {
        for &l in w.letters() {
            let forbidden = l == BROWNIAN_LETTER || (l == JUMP_LETTER && !spec.allow_jump_letter_in_f);
            if forbidden || l < TIME_LETTER || l > max_letter {
                return Err(Error::InvalidMeasureChange(format!("f word {w} may not use letter {l}")));
            }
        }
    }
    let reweighted: Vec<(f64, f64)> = atoms.iter().zip(&spec.g).map(|(&(x, l), g)| (x, l * g.exp())).collect();
    let triplet = primary_process_triplet(&reweighted, max_letter)?;
    let jump_drift: f64 = atoms.iter().zip(&spec.g).map(|(&(x, l), g)| l * x * g.exp_m1()).sum();

    let mut tr = Translator { memo: BTreeMap::new(), f: None, jump_drift, max_letter, _marker: Default::default() };
    let mut f_translated = WordCombination::new();
    for (w, c) in spec.f.iter() {
        f_translated.add_assign(&tr.translate(w)?.scale(*c));
    }
    tr.f = Some(f_translated.clone());
    tr.memo.clear();

    let mut drift = WordCombination::new();
    for (w, c) in params.ell_w().iter() {
        drift.add_assign(&tr.translate(w)?.shuffle(&f_translated).scale(*c));
    }
    for (w, c) in params.ell_nu().iter() {
        drift.add_assign(&tr.translate(w)?.scale(c * jump_drift));
    }
    let translated = tr.memo;
    Ok(MeasureChange { triplet, translated, drift, f: spec.f.clone(), f_translated, jump_drift })
}

/// The primary path `Y` seen under the new measure, built node by node from a path `X`
/// and its signature `sig`:
/// `Y⁰ = X⁰ - ∫ f ds`, `Y¹ = X¹ - t Σ λ_i x_i (e^{g_i} - 1)`, other components unchanged.
///
/// The drift integral is exact on each cell; the result interpolates linearly between
/// nodes, which is exact when `f` is constant between nodes (words over letters ≥ 2).
pub fn translate_path(path: &CadlagSamplePath, sig: &SignaturePath, change: &MeasureChange) -> Result<CadlagSamplePath> {
    let alphabet = path.alphabet();
    let (w_idx, j_idx) = match (alphabet.index_of(BROWNIAN_LETTER), alphabet.index_of(JUMP_LETTER)) {
        (Some(w), Some(j)) => (w, j),
        _ => return Err(Error::InvalidPath("translation needs Brownian and jump components".into())),
    };
    let f_integral = ito_iterated_sum_path(path, &change.f, TIME_LETTER, sig)?;
    let mut values = Vec::with_capacity(path.len());
    for k in 0..path.len() {
        let mut v = path.value(k).to_vec();
        v[w_idx] -= f_integral[k];
        v[j_idx] -= path.times()[k] * change.jump_drift;
        values.push(v);
    }
    let flags = (0..path.len()).map(|k| path.is_jump(k)).collect();
    CadlagSamplePath::new(alphabet.clone(), path.times().to_vec(), values, flags)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w<const N: usize>(l: [i32; N]) -> Word {
        Word::from(l)
    }

    #[test]
    fn no_atoms_means_no_jump_components() {
        let t = primary_process_triplet(&[], 3).unwrap();
        let grid = SimulationGrid::new(1.0, 20, 7).unwrap();
        let p = simulate_primary(&t, &grid).unwrap();
        assert_eq!(p.len(), 21);
        for k in 0..p.len() {
            assert_eq!(&p.value(k)[2..], &[0.0, 0.0, 0.0]);
            assert_eq!(p.value(k)[0], p.times()[k]);
        }
    }

    #[test]
    fn jump_moments_follow_jump_sizes() {
        let t = primary_process_triplet(&[(0.7, 3.0), (-0.4, 2.0)], 4).unwrap();
        let grid = SimulationGrid::new(2.0, 10, 11).unwrap();
        let p = simulate_primary(&t, &grid).unwrap();
        let mut seen = 0;
        for k in 1..p.len() {
            let dx = p.increment(k);
            if p.is_jump(k) {
                seen += 1;
                assert_eq!(dx[0], 0.0);
                assert_eq!(dx[1], 0.0);
                for m in 2..=4 {
                    let expect = dx[2].powi(m);
                    assert!((dx[m as usize + 1] - expect).abs() <= 1e-14 * expect.abs().max(1.0));
                }
            } else {
                for m in 2..=4 {
                    assert_eq!(dx[m + 1], 0.0);
                }
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn same_seed_same_path() {
        let t = primary_process_triplet(&[(0.5, 1.0)], 2).unwrap();
        let grid = SimulationGrid::new(1.0, 50, 3).unwrap();
        assert_eq!(simulate_primary(&t, &grid).unwrap(), simulate_primary(&t, &grid).unwrap());
        assert_ne!(simulate_primary(&t, &grid).unwrap(), simulate_primary_indexed(&t, &grid, 1).unwrap());
    }

    #[test]
    fn thinning_keeps_jumps_and_coarse_nodes() {
        let t = primary_process_triplet(&[(0.5, 4.0)], 2).unwrap();
        let grid = SimulationGrid::new(1.0, 40, 5).unwrap();
        let p = simulate_primary(&t, &grid).unwrap();
        let q = thin_grid(&p, &grid, 4).unwrap();
        let jumps_p = (0..p.len()).filter(|&k| p.is_jump(k)).count();
        let jumps_q = (0..q.len()).filter(|&k| q.is_jump(k)).count();
        assert_eq!(jumps_p, jumps_q);
        assert_eq!(q.len(), 11 + 2 * jumps_q);
        assert_eq!(q.value(q.len() - 1), p.value(p.len() - 1));
    }

    #[test]
    fn measure_change_examples() {
        let t = primary_process_triplet(&[(0.5, 1.0), (-1.0, 2.0)], 3).unwrap();
        let params = SigModelParams::inferred(1.0, WordCombination::from_word(w([0])), WordCombination::term(w([1]), 0.3), 3, 2).unwrap();

        let id = measure_change_translate(&params, &MeasureChangeSpec::new(WordCombination::new(), vec![0.0, 0.0]), &t).unwrap();
        assert_eq!(id.triplet, t);
        for (word, c) in &id.translated {
            assert!(c.plus(&WordCombination::from_word(word.clone()).scale(-1.0)).max_abs_coefficient() < 1e-15);
        }

        let ln2 = 2f64.ln();
        let doubled = measure_change_translate(&params, &MeasureChangeSpec::new(WordCombination::new(), vec![ln2, ln2]), &t).unwrap();
        let atoms = doubled.triplet.primary_atoms().unwrap();
        assert!((atoms[0].1 - 2.0).abs() < 1e-12 && (atoms[1].1 - 4.0).abs() < 1e-12);
        let kappa = 0.5 * 1.0 + (-1.0) * 2.0;
        assert!((doubled.jump_drift - kappa).abs() < 1e-12);
        // ⟨ε_1, X⟩ = ⟨ε_1 + κ ε_{-1}, Y⟩
        let expect = WordCombination::from_terms([(w([1]), 0.3 * kappa), (w([-1]), 0.3 * kappa * kappa)]);
        assert!(doubled.drift.plus(&expect.scale(-1.0)).max_abs_coefficient() < 1e-12);

        let c = 0.8;
        let spec = MeasureChangeSpec::new(WordCombination::term(w([-1]), c), vec![0.0, 0.0]);
        let shifted = measure_change_translate(&params, &spec, &t).unwrap();
        let expect = WordCombination::from_terms([(w([0]), 1.0), (w([-1, -1]), c)]);
        let got = &shifted.translated[&w([0])];
        assert!(got.plus(&expect.scale(-1.0)).max_abs_coefficient() < 1e-15, "{got}");
    }

    #[test]
    fn f_letters_are_checked() {
        let t = primary_process_triplet(&[(0.5, 1.0)], 3).unwrap();
        let params = SigModelParams::inferred(1.0, WordCombination::new(), WordCombination::new(), 3, 1).unwrap();
        let bad = MeasureChangeSpec::new(WordCombination::from_word(w([0])), vec![0.0]);
        assert!(measure_change_translate(&params, &bad, &t).is_err());
        let mut jump = MeasureChangeSpec::new(WordCombination::from_word(w([1])), vec![0.0]);
        assert!(measure_change_translate(&params, &jump, &t).is_err());
        jump.allow_jump_letter_in_f = true;
        assert!(measure_change_translate(&params, &jump, &t).is_ok());
    }
}
