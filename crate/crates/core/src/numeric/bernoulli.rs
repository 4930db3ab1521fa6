use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Exact Bernoulli numbers B_0..B_n (convention B_1 = -1/2), from the
/// recurrence sum_{j<=m} binom(m+1, j) B_j = 0.
pub fn bernoulli_numbers(n: usize) -> Vec<BigRational> {
    static CACHE: OnceLock<std::sync::Mutex<Vec<BigRational>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| std::sync::Mutex::new(vec![BigRational::one()]));
    let mut b = cache.lock().expect("bernoulli cache poisoned");
    while b.len() <= n {
        let m = b.len();
        // binom(m+1, j) for j = 0..m
        let mut binom = BigInt::one();
        let mut acc = BigRational::zero();
        for (j, bj) in b.iter().enumerate() {
            acc += BigRational::from_integer(binom.clone()) * bj;
            binom = binom * BigInt::from(m + 1 - j) / BigInt::from(j + 1);
        }
        // binom now equals binom(m+1, m) = m+1
        let next = -acc / BigRational::from_integer(binom);
        b.push(next);
    }
    b[..=n].to_vec()
}
