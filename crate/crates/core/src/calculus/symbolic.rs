use std::collections::BTreeMap;

use crate::tensor::Coefficient;

/// A real polynomial in finitely many indeterminates, used to track how
/// coefficients depend on model loadings.
///
/// Monomials are exponent vectors without trailing zeros.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Polynomial {
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Polynomial {
    pub fn constant(c: f64) -> Self {
        let mut p = Self::default();
        p.add_monomial(Vec::new(), c);
        p
    }

    /// The indeterminate with index `i`.
    pub fn variable(i: usize) -> Self {
        let mut exps = vec![0; i + 1];
        exps[i] = 1;
        let mut p = Self::default();
        p.add_monomial(exps, 1.0);
        p
    }

    fn add_monomial(&mut self, mut exps: Vec<u32>, c: f64) {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(exps).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.retain(|_, v| *v != 0.0);
        }
    }

    /// Largest total degree of a monomial, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Monomials with their coefficients.
    pub fn monomials(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    /// Evaluates at a point; missing coordinates count as zero.
    pub fn eval(&self, point: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(exps, c)| {
                c * exps
                    .iter()
                    .enumerate()
                    .map(|(i, &e)| point.get(i).copied().unwrap_or(0.0).powi(e as i32))
                    .product::<f64>()
            })
            .sum()
    }
}

impl Coefficient for Polynomial {
    fn zero() -> Self {
        Self::default()
    }

    fn one() -> Self {
        Self::constant(1.0)
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_monomial(e.clone(), *c);
        }
        out
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = Self::default();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let n = ea.len().max(eb.len());
                let exps = (0..n).map(|i| ea.get(i).unwrap_or(&0) + eb.get(i).unwrap_or(&0)).collect();
                out.add_monomial(exps, ca * cb);
            }
        }
        out
    }

    fn scale(&self, factor: f64) -> Self {
        let mut out = Self::default();
        for (e, c) in &self.terms {
            out.add_monomial(e.clone(), c * factor);
        }
        out
    }
}
