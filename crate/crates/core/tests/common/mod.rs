//! Random inputs shared by the integration tests.
#![allow(dead_code)]

use levysig::levy::{LevyAtom, LevyTriplet};
use levysig::path::CadlagSamplePath;
use levysig::tensor::Alphabet;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Piecewise-linear path with occasional jumps and Gaussian-ish increments of size `scale`.
pub fn random_path(rng: &mut ChaCha8Rng, alphabet: &Alphabet, segments: usize, scale: f64) -> CadlagSamplePath {
    let dim = alphabet.size();
    let start: Vec<f64> = (0..dim).map(|_| rng.random_range(-scale..scale)).collect();
    let mut b = CadlagSamplePath::builder(alphabet.clone(), &start).unwrap();
    let mut t = 0.0;
    let mut last_was_jump = true;
    for _ in 0..segments {
        let dx: Vec<f64> = (0..dim).map(|_| rng.random_range(-scale..scale)).collect();
        if !last_was_jump && rng.random_bool(0.3) {
            b.jump_by(&dx).unwrap();
            last_was_jump = true;
        } else {
            t += rng.random_range(0.05..0.5);
            b.line_by(t, &dx).unwrap();
            last_was_jump = false;
        }
    }
    b.build().unwrap()
}

/// Primary-process-shaped path on letters `-1..=max_moment` with no Brownian part:
/// a compensated compound-Poisson-like first jump component with drift and its exact moment components.
pub fn random_pure_jump_primary(rng: &mut ChaCha8Rng, max_moment: i32) -> CadlagSamplePath {
    let alphabet = Alphabet::primary(max_moment).unwrap();
    let drift = rng.random_range(-1.0..1.0);
    let jumps = rng.random_range(0..5usize);
    let mut events: Vec<(f64, Option<f64>)> = (0..jumps)
        .map(|_| (rng.random_range(0.01..0.99), Some(rng.random_range(-1.0..1.0))))
        .collect();
    for g in 1..=4 {
        events.push((g as f64 * 0.25, None));
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    let k = max_moment as usize;
    let mut sums = vec![0.0; k + 1];
    let state = |t: f64, sums: &[f64]| {
        let mut v = vec![0.0; k + 2];
        v[0] = t;
        v[2] = sums[1] - drift * t;
        for m in 2..=k {
            v[m + 1] = sums[m];
        }
        v
    };
    let mut b = CadlagSamplePath::builder(alphabet, &state(0.0, &sums)).unwrap();
    for (t, jump) in events {
        if t > b.current_time() {
            b.line_to(t, &state(t, &sums)).unwrap();
        }
        if let Some(x) = jump {
            let mut p = 1.0;
            for s in sums.iter_mut().skip(1) {
                p *= x;
                *s += p;
            }
            b.jump_to(&state(t, &sums)).unwrap();
        }
    }
    b.build().unwrap()
}

/// Random Lévy triplet on letters `1..=dim` with a positive semidefinite covariance.
pub fn random_triplet(rng: &mut ChaCha8Rng, dim: usize) -> LevyTriplet {
    let drift: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.5..0.5)).collect();
    let factor: Vec<Vec<f64>> = (0..dim).map(|_| (0..dim).map(|_| rng.random_range(-0.6..0.6)).collect()).collect();
    let cov = (0..dim)
        .map(|i| (0..dim).map(|j| (0..dim).map(|k| factor[i][k] * factor[j][k]).sum()).collect())
        .collect();
    let atoms = (0..rng.random_range(1..3usize))
        .map(|_| LevyAtom {
            jump: (0..dim).map(|_| rng.random_range(0.1..0.8) * if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect(),
            intensity: rng.random_range(0.2..1.5),
        })
        .collect();
    LevyTriplet::on_positive_letters(drift, cov, atoms).unwrap()
}

/// `|a - b| ≤ tol · max(1, |a|, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}
