//! Analytic test functions and seeded sample tables built from them.

use std::f64::consts::PI;

use rand_distr::{Distribution as _, StandardNormal};

use crate::dataset::{sample_lhs, seeded_rng, DesignTable, VariableMeta};
use crate::error::Result;
use crate::scalar::Real;

/// Ishigami function `sin x1 + a sin² x2 + b x3⁴ sin x1`.
pub fn ishigami<T: Real>(x: &[T], a: T, b: T) -> T {
    let s1 = x[0].sin();
    let s2 = x[1].sin();
    let x3_2 = x[2] * x[2];
    s1 + a * s2 * s2 + b * x3_2 * x3_2 * s1
}

/// Analytic total-effect indices of the Ishigami function on `[-π, π]³`.
pub fn ishigami_total_indices(a: f64, b: f64) -> [f64; 3] {
    let pi4 = PI.powi(4);
    let pi8 = PI.powi(8);
    let v1 = 0.5 * (1.0 + b * pi4 / 5.0).powi(2);
    let v2 = a * a / 8.0;
    let v13 = b * b * pi8 * (1.0 / 18.0 - 1.0 / 50.0);
    let v = v1 + v2 + v13;
    [(v1 + v13) / v, v2 / v, v13 / v]
}

/// `2 x1 + 4 x2 + 0.5 x1² + x1 x2`.
pub fn quad2d<T: Real>(x: &[T]) -> T {
    T::of(2.0) * x[0] + T::of(4.0) * x[1] + T::of(0.5) * x[0] * x[0] + x[0] * x[1]
}

pub const ISHIGAMI_A: f64 = 7.0;
pub const ISHIGAMI_B: f64 = 0.1;

pub fn ishigami_variables<T: Real>() -> Vec<VariableMeta<T>> {
    (0..3).map(|i| VariableMeta::uniform(format!("x{}", i + 1), T::of(-PI), T::of(PI), i)).collect()
}

pub fn standard_normal_variables<T: Real>(m: usize) -> Vec<VariableMeta<T>> {
    (0..m).map(|i| VariableMeta::normal(format!("x{}", i + 1), T::zero(), T::one(), i)).collect()
}

fn with_values<T: Real>(table: DesignTable<T>, f: impl Fn(&[T]) -> T) -> Result<DesignTable<T>> {
    let y = (0..table.n_samples()).map(|j| f(&table.row(j))).collect();
    table.with_response("y", y)
}

/// Ishigami (a = 7, b = 0.1) on an `n`-point Latin hypercube over `[-π, π]³`.
pub fn ishigami_table<T: Real>(n: usize, seed: u64) -> Result<DesignTable<T>> {
    let t = sample_lhs(&ishigami_variables(), n, seed)?;
    with_values(t, |x| ishigami(x, T::of(ISHIGAMI_A), T::of(ISHIGAMI_B)))
}

/// The two-dimensional quadratic model with standard normal inputs.
pub fn quad2d_table<T: Real>(n: usize, seed: u64) -> Result<DesignTable<T>> {
    let t = sample_lhs(&standard_normal_variables(2), n, seed)?;
    with_values(t, quad2d)
}

/// Eight standard normal inputs; only `x1`, `x2` act, through the
/// two-dimensional quadratic model, plus `0.1 · N(0, 1)` noise.
pub fn active2of8_table<T: Real>(n: usize, seed: u64) -> Result<DesignTable<T>> {
    let t = sample_lhs(&standard_normal_variables(8), n, seed)?;
    let mut rng = seeded_rng(seed ^ 0x05ee_d0f0_a15e);
    let y = (0..n)
        .map(|j| {
            let e: f64 = StandardNormal.sample(&mut rng);
            quad2d(&t.row(j)) + T::of(0.1 * e)
        })
        .collect();
    t.with_response("y", y)
}
