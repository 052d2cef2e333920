use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

fn table() -> &'static Mutex<HashMap<(u32, u32), BigRational>> {
    static TABLE: OnceLock<Mutex<HashMap<(u32, u32), BigRational>>> = OnceLock::new();
    TABLE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn inverse_factorial(n: u32) -> BigRational {
    let f: BigInt = (1..=n).map(BigInt::from).product();
    BigRational::new(BigInt::one(), f)
}

/// `α(r, k)`: sum over compositions `(j_1, …, j_k)` of `r` into positive parts of `Π 1/(j_i + 1)!`.
///
/// Zero when `k > r`; `α(0, 0) = 1`.
pub fn alpha_coefficient(r: u32, k: u32) -> BigRational {
    if k > r || (k == 0) != (r == 0) {
        return BigRational::zero();
    }
    if r == 0 {
        return BigRational::one();
    }
    if let Some(v) = table().lock().expect("alpha table poisoned").get(&(r, k)) {
        return v.clone();
    }
    // peel off the last part j
    let value = (1..=r - k + 1).fold(BigRational::zero(), |acc, j| {
        acc + alpha_coefficient(r - j, k - 1) * inverse_factorial(j + 1)
    });
    table().lock().expect("alpha table poisoned").insert((r, k), value.clone());
    value
}

/// `α(r) = Σ_{k=1}^r (-1)^k α(r, k)`.
pub fn alpha_sum(r: u32) -> BigRational {
    (1..=r).fold(BigRational::zero(), |acc, k| {
        let term = alpha_coefficient(r, k);
        if k % 2 == 1 {
            acc - term
        } else {
            acc + term
        }
    })
}

/// Floating-point value of [`alpha_sum`].
pub fn alpha_sum_f64(r: u32) -> f64 {
    alpha_sum(r).to_f64().expect("finite rational")
}
