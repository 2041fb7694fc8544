//! Shared fixtures for the kernel benchmarks.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use pnme_core::operator::Operator;

/// Deterministic dense complex matrix for benchmark inputs.
pub fn bench_operator(dim: usize, seed: u64) -> Operator {
    let mut state = seed.wrapping_add(0x9e3779b97f4a7c15);
    let mut next = move || {
        state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z = z ^ (z >> 31);
        (z as f64 / u64::MAX as f64) * 2.0 - 1.0
    };
    let mat = Array2::from_shape_fn((dim, dim), |_| C64::new(next(), next()));
    Operator::from_matrix(mat).expect("finite entries")
}

pub fn bench_hermitian(dim: usize, seed: u64) -> Operator {
    bench_operator(dim, seed).hermitize()
}
