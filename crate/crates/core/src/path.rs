//! Piecewise-linear paths with jumps.
//!
//! A jump at time τ is stored as two consecutive nodes with the same time:
//! the first carries the left limit, the second (flagged) the post-jump value.
//! Between nodes that are not a jump pair the path is linear in time.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::tensor::{Alphabet, TensorElement, TIME_LETTER};

/// Node limit for the quadratic p-variation dynamic programme.
pub const P_VARIATION_NODE_LIMIT: usize = 10_000;

/// A càdlàg path sampled on nodes, linear between them, with explicit jumps.
#[derive(Clone, Debug, PartialEq)]
pub struct CadlagSamplePath {
    alphabet: Alphabet,
    times: Vec<f64>,
    values: Vec<f64>,
    jumps: Vec<bool>,
}

impl CadlagSamplePath {
    /// Validates and builds a path from per-node data.
    pub fn new(alphabet: Alphabet, times: Vec<f64>, values: Vec<Vec<f64>>, jumps: Vec<bool>) -> Result<Self> {
        let dim = alphabet.size();
        if values.len() != times.len() || jumps.len() != times.len() {
            return Err(Error::InvalidPath("times, values and jump flags differ in length".into()));
        }
        let mut flat = Vec::with_capacity(dim * times.len());
        for row in &values {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
            flat.extend_from_slice(row);
        }
        let path = Self { alphabet, times, values: flat, jumps };
        path.validate()?;
        Ok(path)
    }

    pub fn builder(alphabet: Alphabet, initial: &[f64]) -> Result<PathBuilder> {
        PathBuilder::new(alphabet, initial)
    }

    fn validate(&self) -> Result<()> {
        let m = self.times.len();
        if m == 0 {
            return Err(Error::InvalidPath("a path needs at least one node".into()));
        }
        if self.times[0] != 0.0 {
            return Err(Error::InvalidPath(format!("first node time must be 0, got {}", self.times[0])));
        }
        if self.jumps[0] {
            return Err(Error::InvalidPath("the first node cannot be a jump".into()));
        }
        if let Some(bad) = self.values.iter().chain(&self.times).find(|x| !x.is_finite()) {
            return Err(Error::InvalidPath(format!("non-finite entry {bad}")));
        }
        for k in 1..m {
            let (prev, cur) = (self.times[k - 1], self.times[k]);
            if self.jumps[k] {
                if cur != prev {
                    return Err(Error::InvalidPath(format!("jump node {k} does not repeat the previous time")));
                }
                if self.jumps[k - 1] {
                    return Err(Error::InvalidPath(format!("nodes {} and {k} are consecutive jumps", k - 1)));
                }
            } else if cur <= prev {
                return Err(Error::InvalidPath(format!("times not strictly increasing at node {k}")));
            }
        }
        if let Some(ti) = self.alphabet.index_of(TIME_LETTER) {
            for k in 0..m {
                if self.value(k)[ti] != self.times[k] {
                    return Err(Error::InvalidPath(format!(
                        "time component {} differs from clock time {} at node {k}",
                        self.value(k)[ti],
                        self.times[k]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn dim(&self) -> usize {
        self.alphabet.size()
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("validated non-empty")
    }

    pub fn value(&self, k: usize) -> &[f64] {
        let d = self.dim();
        &self.values[k * d..(k + 1) * d]
    }

    /// Whether the transition into node `k` is a jump.
    pub fn is_jump(&self, k: usize) -> bool {
        self.jumps[k]
    }

    /// `x_k - x_{k-1}` for `k ≥ 1`.
    pub fn increment(&self, k: usize) -> Vec<f64> {
        self.value(k).iter().zip(self.value(k - 1)).map(|(a, b)| a - b).collect()
    }

    /// Component of node `k` for `letter`, if the letter is present.
    pub fn component(&self, k: usize, letter: i32) -> Option<f64> {
        self.alphabet.index_of(letter).map(|i| self.value(k)[i])
    }

    /// Index of the last node at time `t` (the post-jump node for jump times).
    pub fn node_at(&self, t: f64) -> Result<usize> {
        let k = self.times.partition_point(|&x| x <= t);
        if k == 0 || self.times[k - 1] != t {
            return Err(Error::NotNodeTime(t));
        }
        Ok(k - 1)
    }

    fn lerp(&self, k0: usize, k1: usize, t: f64) -> Vec<f64> {
        let (t0, t1) = (self.times[k0], self.times[k1]);
        let w = (t - t0) / (t1 - t0);
        self.value(k0).iter().zip(self.value(k1)).map(|(a, b)| a + w * (b - a)).collect()
    }

    /// Right-continuous value at any `t` in `[0, T]` (post-jump at jump times).
    pub fn value_at(&self, t: f64) -> Vec<f64> {
        let k = self.times.partition_point(|&x| x <= t);
        if k == 0 {
            return self.value(0).to_vec();
        }
        let last = k - 1;
        if self.times[last] == t || last + 1 == self.len() {
            return self.value(last).to_vec();
        }
        self.lerp(last, last + 1, t)
    }

    /// Left limit at `t` (pre-jump value at jump times; the initial value at 0).
    pub fn left_limit(&self, t: f64) -> Vec<f64> {
        let k = self.times.partition_point(|&x| x < t);
        if k == 0 {
            return self.value(0).to_vec();
        }
        if k == self.len() {
            return self.value(k - 1).to_vec();
        }
        if self.times[k] == t {
            return self.value(k).to_vec();
        }
        self.lerp(k - 1, k, t)
    }

    /// Distinct node times in increasing order.
    pub fn distinct_times(&self) -> Vec<f64> {
        let mut t = self.times.clone();
        t.dedup();
        t
    }

    /// Writes the path as CSV with header `time,jump,c<letter>,...`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["time".to_string(), "jump".to_string()];
        header.extend(self.alphabet.letters().iter().map(|l| format!("c{l}")));
        w.write_record(&header)?;
        for k in 0..self.len() {
            let mut row = vec![self.times[k].to_string(), u8::from(self.jumps[k]).to_string()];
            row.extend(self.value(k).iter().map(f64::to_string));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a path written by [`CadlagSamplePath::write_csv`], re-validating every invariant.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        if header.len() < 3 || &header[0] != "time" || &header[1] != "jump" {
            return Err(Error::InvalidPath("header must start with `time,jump` and list components".into()));
        }
        let letters = header
            .iter()
            .skip(2)
            .map(|h| {
                h.strip_prefix('c')
                    .and_then(|l| l.parse::<i32>().ok())
                    .ok_or_else(|| Error::InvalidPath(format!("bad component column `{h}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        let alphabet = Alphabet::new(letters.iter().copied())?;
        if alphabet.letters() != letters.as_slice() {
            return Err(Error::InvalidPath("component columns must be in increasing letter order".into()));
        }
        let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::InvalidPath(format!("bad number `{s}`")));
        let (mut times, mut values, mut jumps) = (Vec::new(), Vec::new(), Vec::new());
        for rec in r.records() {
            let rec = rec?;
            times.push(parse(&rec[0])?);
            jumps.push(match rec[1].trim() {
                "0" => false,
                "1" => true,
                other => return Err(Error::InvalidPath(format!("jump flag must be 0 or 1, got `{other}`"))),
            });
            values.push(rec.iter().skip(2).map(parse).collect::<Result<Vec<_>>>()?);
        }
        Self::new(alphabet, times, values, jumps)
    }
}

/// Incremental construction of a [`CadlagSamplePath`].
#[derive(Clone, Debug)]
pub struct PathBuilder {
    alphabet: Alphabet,
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
    jumps: Vec<bool>,
}

impl PathBuilder {
    pub fn new(alphabet: Alphabet, initial: &[f64]) -> Result<Self> {
        let b = Self { alphabet, times: vec![], values: vec![], jumps: vec![] };
        b.check_dim(initial)?;
        Ok(Self { times: vec![0.0], values: vec![initial.to_vec()], jumps: vec![false], ..b })
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.alphabet.size() {
            return Err(Error::DimensionMismatch { expected: self.alphabet.size(), found: x.len() });
        }
        Ok(())
    }

    fn last(&self) -> &[f64] {
        self.values.last().expect("builder starts with a node")
    }

    /// Linear move to `x` reached at time `t`.
    pub fn line_to(&mut self, t: f64, x: &[f64]) -> Result<&mut Self> {
        self.check_dim(x)?;
        self.times.push(t);
        self.values.push(x.to_vec());
        self.jumps.push(false);
        Ok(self)
    }

    /// Linear move by `dx` reached at time `t`.
    pub fn line_by(&mut self, t: f64, dx: &[f64]) -> Result<&mut Self> {
        self.check_dim(dx)?;
        let x: Vec<f64> = self.last().iter().zip(dx).map(|(a, b)| a + b).collect();
        self.line_to(t, &x)
    }

    /// Instantaneous jump to `x` at the current time.
    pub fn jump_to(&mut self, x: &[f64]) -> Result<&mut Self> {
        self.check_dim(x)?;
        let t = *self.times.last().expect("non-empty");
        self.times.push(t);
        self.values.push(x.to_vec());
        self.jumps.push(true);
        Ok(self)
    }

    /// Instantaneous jump by `dx` at the current time.
    pub fn jump_by(&mut self, dx: &[f64]) -> Result<&mut Self> {
        self.check_dim(dx)?;
        let x: Vec<f64> = self.last().iter().zip(dx).map(|(a, b)| a + b).collect();
        self.jump_to(&x)
    }

    pub fn current_time(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    pub fn current_value(&self) -> &[f64] {
        self.last()
    }

    pub fn build(self) -> Result<CadlagSamplePath> {
        CadlagSamplePath::new(self.alphabet, self.times, self.values, self.jumps)
    }
}

/// Generic supremum over node partitions of `Σ cost(i, j)^p`, returned to the power `1/p`.
fn partition_supremum(nodes: usize, p: f64, mut dist: impl FnMut(usize, usize) -> Result<f64>) -> Result<f64> {
    if nodes < 2 {
        return Ok(0.0);
    }
    let mut best = vec![0.0f64; nodes];
    for j in 1..nodes {
        let mut b = f64::NEG_INFINITY;
        for i in 0..j {
            b = b.max(best[i] + dist(i, j)?.powf(p));
        }
        best[j] = b;
    }
    Ok(best[nodes - 1].powf(1.0 / p))
}

/// p-variation `(sup Σ |x_{t_{i+1}} - x_{t_i}|^p)^{1/p}` over partitions through the nodes.
///
/// For piecewise-linear paths with jumps the supremum is attained on node partitions,
/// so this is the exact p-variation. Quadratic in the number of nodes.
pub fn p_variation(path: &CadlagSamplePath, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::PVariationExponent(p));
    }
    if path.len() > P_VARIATION_NODE_LIMIT {
        return Err(Error::PathTooLong { nodes: path.len(), limit: P_VARIATION_NODE_LIMIT });
    }
    partition_supremum(path.len(), p, |i, j| {
        Ok(path.value(j).iter().zip(path.value(i)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
    })
}

/// p-variation of a path of group elements, measuring increments `X_s⁻¹ ⊗ X_t`
/// with the homogeneous norm.
pub fn rough_p_variation(sig_path: &[TensorElement], p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::PVariationExponent(p));
    }
    if sig_path.len() > P_VARIATION_NODE_LIMIT {
        return Err(Error::PathTooLong { nodes: sig_path.len(), limit: P_VARIATION_NODE_LIMIT });
    }
    let Some(first) = sig_path.first() else {
        return Ok(0.0);
    };
    for x in sig_path {
        if !x.is_group_like() {
            return Err(Error::NotGroupLike);
        }
        if x.level() != first.level() {
            return Err(Error::LevelMismatch { left: first.level(), right: x.level() });
        }
    }
    if (first.level() as f64) < p.floor() {
        return Err(Error::LevelMismatch { left: first.level(), right: p.floor() as usize });
    }
    let inverses = sig_path.iter().map(TensorElement::inverse).collect::<Result<Vec<_>>>()?;
    partition_supremum(sig_path.len(), p, |i, j| inverses[i].tensor_product(&sig_path[j])?.homogeneous_norm())
}

/// Approximate Skorokhod J1 distance between two paths on the same horizon.
///
/// Warps are piecewise linear with knots on the merged grid of node times. A
/// minimax lattice search picks the best such warp, a bisection pass then moves
/// each interior knot locally. Every candidate is evaluated exactly, so the result is
/// an upper bound on the true distance and equals it whenever an optimal warp has its
/// knots at node times. The value is symmetrised by taking the better of both directions.
pub fn j1_distance(a: &CadlagSamplePath, b: &CadlagSamplePath) -> Result<f64> {
    if a.alphabet() != b.alphabet() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    let (ta, tb) = (a.horizon(), b.horizon());
    if (ta - tb).abs() > 1e-12 * ta.abs().max(1.0) {
        return Err(Error::HorizonMismatch(ta, tb));
    }
    let forward = WarpSearch::new(a, b).solve();
    let backward = WarpSearch::new(b, a).solve();
    Ok(forward.min(backward))
}

/// Warp λ maps times `s` of the target path `b` to times `u = λ(s)` of the source `a`.
struct WarpSearch<'p> {
    a: &'p CadlagSamplePath,
    b: &'p CadlagSamplePath,
    grid: Vec<f64>,
    a_times: Vec<f64>,
    b_times: Vec<f64>,
}

#[derive(Clone, Copy)]
struct Knot {
    s: f64,
    u: f64,
}

impl<'p> WarpSearch<'p> {
    fn new(a: &'p CadlagSamplePath, b: &'p CadlagSamplePath) -> Self {
        let a_times = a.distinct_times();
        let b_times = b.distinct_times();
        let mut grid: Vec<f64> = a_times.iter().chain(&b_times).copied().collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        // Both horizons agree up to rounding; keep one endpoint.
        while grid.len() > 1 && grid[grid.len() - 1] - grid[grid.len() - 2] <= 1e-12 * grid[grid.len() - 1].abs().max(1.0) {
            grid.remove(grid.len() - 2);
        }
        Self { a, b, grid, a_times, b_times }
    }

    fn gap(x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
    }

    /// Exact `max(|λ - id|, sup |a∘λ - b|)` over one linear piece of the warp.
    fn piece_cost(&self, k0: Knot, k1: Knot) -> f64 {
        let mut cost = (k0.u - k0.s).abs().max((k1.u - k1.s).abs());
        let slope = (k1.u - k0.u) / (k1.s - k0.s);
        let inv_slope = (k1.s - k0.s) / (k1.u - k0.u);
        // breakpoints as exact (s, u) pairs
        let mut points: Vec<Knot> = vec![k0];
        for &s in self.b_times.iter().filter(|&&s| s > k0.s && s < k1.s) {
            points.push(Knot { s, u: (k0.u + (s - k0.s) * slope).clamp(k0.u, k1.u) });
        }
        for &u in self.a_times.iter().filter(|&&u| u > k0.u && u < k1.u) {
            points.push(Knot { s: (k0.s + (u - k0.u) * inv_slope).clamp(k0.s, k1.s), u });
        }
        points.push(k1);
        points.sort_by(|p, q| p.s.total_cmp(&q.s));
        for (i, pt) in points.iter().enumerate() {
            if i + 1 < points.len() {
                cost = cost.max(Self::gap(&self.a.value_at(pt.u), &self.b.value_at(pt.s)));
            }
            if i > 0 {
                cost = cost.max(Self::gap(&self.a.left_limit(pt.u), &self.b.left_limit(pt.s)));
            }
        }
        cost
    }

    fn warp_cost(&self, knots: &[Knot]) -> f64 {
        knots.windows(2).map(|w| self.piece_cost(w[0], w[1])).fold(0.0, f64::max)
    }

    fn solve(&self) -> f64 {
        let g = &self.grid;
        let n = g.len();
        if n < 2 {
            return Self::gap(self.a.value(0), self.b.value(0));
        }
        let identity = [Knot { s: g[0], u: g[0] }, Knot { s: g[n - 1], u: g[n - 1] }];
        let bound = self.warp_cost(&identity);
        let window = if n <= 24 { n } else { 4 };
        // dp[iu * n + js]: best cost reaching knot (s = g[js], u = g[iu])
        let mut dp = vec![f64::INFINITY; n * n];
        let mut parent = vec![usize::MAX; n * n];
        dp[0] = Self::gap(self.a.value(0), self.b.value(0));
        for iu in 0..n {
            for js in 0..n {
                let here = dp[iu * n + js];
                if !here.is_finite() || here >= bound || (g[iu] - g[js]).abs() > bound {
                    continue;
                }
                let from = Knot { s: g[js], u: g[iu] };
                for ju in iu + 1..(iu + 1 + window).min(n) {
                    for jt in js + 1..(js + 1 + window).min(n) {
                        if (g[ju] - g[jt]).abs() > bound {
                            continue;
                        }
                        let to = Knot { s: g[jt], u: g[ju] };
                        let c = here.max(self.piece_cost(from, to));
                        let slot = ju * n + jt;
                        if c < dp[slot] {
                            dp[slot] = c;
                            parent[slot] = iu * n + js;
                        }
                    }
                }
            }
        }
        let end = n * n - 1;
        if !(dp[end] < bound) {
            return self.refine(identity.to_vec()).min(bound);
        }
        let mut knots = Vec::new();
        let mut slot = end;
        while slot != usize::MAX {
            knots.push(Knot { s: g[slot % n], u: g[slot / n] });
            slot = parent[slot];
        }
        knots.reverse();
        self.refine(knots).min(dp[end])
    }

    /// One pass over interior knots, moving each image `u` by golden-section bisection.
    fn refine(&self, mut knots: Vec<Knot>) -> f64 {
        let mut best = self.warp_cost(&knots);
        for m in 1..knots.len().saturating_sub(1) {
            let (lo, hi) = (knots[m - 1].u, knots[m + 1].u);
            let local = |u: f64, knots: &[Knot]| {
                let k = Knot { s: knots[m].s, u };
                self.piece_cost(knots[m - 1], k).max(self.piece_cost(k, knots[m + 1]))
            };
            let phi = 0.5 * (5f64.sqrt() - 1.0);
            let (mut x0, mut x1) = (lo, hi);
            for _ in 0..60 {
                let c = x1 - phi * (x1 - x0);
                let d = x0 + phi * (x1 - x0);
                if local(c, &knots) <= local(d, &knots) {
                    x1 = d;
                } else {
                    x0 = c;
                }
            }
            let candidate = 0.5 * (x0 + x1);
            if candidate > lo && candidate < hi {
                let saved = knots[m].u;
                knots[m].u = candidate;
                let c = self.warp_cost(&knots);
                if c < best {
                    best = c;
                } else {
                    knots[m].u = saved;
                }
            }
        }
        best
    }
}
