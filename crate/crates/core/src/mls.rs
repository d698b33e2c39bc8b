//! Moving Least Squares approximation with Gaussian weighting.
//!
//! At each query point `x` the coefficients of the local basis are obtained
//! from the weighted normal equations `(Pᵀ W(x) P) a(x) = Pᵀ W(x) y`, with
//! `w_i = exp(-|x - x_i|² / (α² D²))`. Distances are measured on standardized
//! inputs, so `D` is a radius in units of sample standard deviations.
//!
//! The local basis is evaluated at `x_i - x`; every supported basis family is
//! closed under translation, so the prediction is the constant coefficient of
//! `a(x)` and the local systems stay well scaled.

use std::cmp::Ordering;

use log::debug;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{make_partition, DesignTable};
use crate::error::{MopError, Result};
use crate::linalg;
use crate::model::{Predictor, Trainer};
use crate::polyreg::{self, basis_into, BasisSpec, PolynomialModel};
use crate::quality;
use crate::scalar::{mean_std, Real};

/// Smallest automatic radius candidate, in mean nearest-neighbour distances.
pub const MIN_RADIUS_FACTOR: f64 = 0.5;

/// The candidate grid reaches at least this many nearest-neighbour distances
/// and at least this many standard deviations.
pub const MAX_RADIUS_FACTOR: f64 = 8.0;

/// Geometric grid (ratio √2) of radii tried by the automatic selection for a
/// given mean nearest-neighbour distance. Its upper end in absolute units
/// matters in few dimensions, where the spacing is small but the response may
/// still need smoothing over a large part of the domain.
pub fn radius_candidates<T: Real>(spacing: T) -> Vec<T> {
    let upper = (spacing * T::of(MAX_RADIUS_FACTOR)).max(T::of(MAX_RADIUS_FACTOR));
    let step = T::of(std::f64::consts::SQRT_2);
    let mut radius = spacing * T::of(MIN_RADIUS_FACTOR);
    let mut out = Vec::new();
    while radius <= upper * T::of(1.0 + 1e-9) {
        out.push(radius);
        radius *= step;
    }
    out
}

/// Times the radius is doubled for a query whose local system is singular
/// before falling back to the global polynomial.
const RADIUS_RETRIES: usize = 3;

pub fn default_alpha<T: Real>() -> T {
    T::one() / T::of(3.0)
}

/// Gaussian weight `exp(-distance² / (α² D²))`.
pub fn weight<T: Real>(distance: T, radius: T, alpha: T) -> T {
    let s = alpha * radius;
    (-(distance * distance) / (s * s)).exp()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MlsConfig<T> {
    pub basis: BasisSpec,
    /// Influence radius in standardized coordinates; selected automatically when absent.
    pub radius: Option<T>,
    pub alpha: T,
    /// Subset count of the cross validation driving automatic radius selection.
    pub folds: usize,
    pub seed: u64,
}

impl<T: Real> MlsConfig<T> {
    pub fn new(basis: BasisSpec) -> Self {
        Self { basis, radius: None, alpha: default_alpha(), folds: 5, seed: 0 }
    }

    pub fn with_radius(mut self, radius: T) -> Self {
        self.radius = Some(radius);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MlsModel<T> {
    pub basis: BasisSpec,
    /// Standardized support coordinates, one row per sample.
    pub supports: Vec<Vec<T>>,
    pub values: Vec<T>,
    pub shift: Vec<T>,
    pub scale: Vec<T>,
    pub radius: T,
    pub alpha: T,
    pub variable_indices: Vec<usize>,
    pub variable_names: Vec<String>,
    /// Global polynomial on the same basis, used where local systems stay singular.
    pub fallback: Option<PolynomialModel<T>>,
}

impl<T: Real> MlsModel<T> {
    pub fn n_inputs(&self) -> usize {
        self.shift.len()
    }

    fn standardize(&self, x: &[T]) -> Vec<T> {
        x.iter().zip(self.shift.iter().zip(&self.scale)).map(|(&v, (&mu, &s))| (v - mu) / s).collect()
    }

    /// Local weighted fit at standardized point `z` with radius `radius`.
    fn local_fit(&self, z: &[T], d2: &[T], d2_min: T, radius: T) -> Option<T> {
        let p = self.basis.term_count(z.len());
        let denom = self.alpha * self.alpha * radius * radius;
        let weights: Vec<T> = d2.iter().map(|&dist2| (-(dist2 - d2_min) / denom).exp()).collect();
        let mut a = DMatrix::<T>::zeros(p, p);
        let mut b = DVector::<T>::zeros(p);
        let mut offset = vec![T::zero(); z.len()];
        let mut row = vec![T::zero(); p];
        for ((s, &y), &w) in self.supports.iter().zip(&self.values).zip(&weights) {
            if w == T::zero() {
                continue;
            }
            self.local_basis(s, z, &mut offset, &mut row);
            for r in 0..p {
                let wr = w * row[r];
                b[r] += wr * y;
                for c in r..p {
                    a[(r, c)] += wr * row[c];
                }
            }
        }
        for r in 0..p {
            for c in 0..r {
                a[(r, c)] = a[(c, r)];
            }
        }
        match linalg::solve_normal_equations(a, b) {
            linalg::NormalSolve::Solved(coef) => Some(coef[0]),
            linalg::NormalSolve::Singular => None,
            linalg::NormalSolve::IllConditioned(scale) => self.local_fit_qr(z, &weights, &scale),
        }
    }

    /// Orthogonal-factorization solve of the weighted local problem, used when
    /// the normal equations are too poorly conditioned to trust.
    fn local_fit_qr(&self, z: &[T], weights: &[T], scale: &[T]) -> Option<T> {
        let p = scale.len();
        let active: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > T::zero()).collect();
        let mut design = DMatrix::<T>::zeros(active.len(), p);
        let mut rhs = DVector::<T>::zeros(active.len());
        let mut offset = vec![T::zero(); z.len()];
        let mut row = vec![T::zero(); p];
        for (r, &i) in active.iter().enumerate() {
            let sw = weights[i].sqrt();
            self.local_basis(&self.supports[i], z, &mut offset, &mut row);
            for c in 0..p {
                design[(r, c)] = sw * row[c] * scale[c];
            }
            rhs[r] = sw * self.values[i];
        }
        linalg::least_squares_qr(design, &rhs).map(|coef| coef[0] * scale[0])
    }

    fn local_basis(&self, support: &[T], z: &[T], offset: &mut [T], row: &mut [T]) {
        for ((o, &si), &zi) in offset.iter_mut().zip(support).zip(z) {
            *o = si - zi;
        }
        basis_into(self.basis, offset, row);
    }
}

/// Fits an MLS model on all inputs of `table`.
pub fn fit_mls<T: Real>(table: &DesignTable<T>, response: &str, config: &MlsConfig<T>) -> Result<MlsModel<T>> {
    config.basis.validate()?;
    if !(config.alpha > T::zero()) {
        return Err(MopError::InvalidArgument(format!("shape factor must be positive, got {}", config.alpha)));
    }
    if let Some(r) = config.radius {
        if !(r > T::zero()) {
            return Err(MopError::InvalidArgument(format!("influence radius must be positive, got {r}")));
        }
    }
    let n = table.n_samples();
    let m = table.n_inputs();
    let p = config.basis.term_count(m);
    if n < p {
        return Err(MopError::Underdetermined { p, n });
    }
    // Canonical sample order, so that every sum below is independent of how
    // the caller ordered the rows.
    let table = &canonical_order(table, response)?;
    let y = table.response(response)?;
    let (shift, scale): (Vec<T>, Vec<T>) = table
        .columns()
        .iter()
        .map(|c| {
            let (mu, sd) = mean_std(c);
            (mu, if sd > T::zero() { sd } else { T::one() })
        })
        .unzip();
    let supports: Vec<Vec<T>> = (0..n)
        .map(|j| (0..m).map(|k| (table.column(k)[j] - shift[k]) / scale[k]).collect())
        .collect();
    let radius = match config.radius {
        Some(r) => r,
        None => select_radius(table, response, config, &supports)?,
    };
    Ok(MlsModel {
        basis: config.basis,
        supports,
        values: y.to_vec(),
        shift,
        scale,
        radius,
        alpha: config.alpha,
        variable_indices: (0..m).collect(),
        variable_names: table.variable_names(),
        fallback: polyreg::fit(table, response, config.basis).ok(),
    })
}

fn canonical_order<T: Real>(table: &DesignTable<T>, response: &str) -> Result<DesignTable<T>> {
    let y = table.response(response)?;
    let rows = table.rows();
    let mut order: Vec<usize> = (0..table.n_samples()).collect();
    order.sort_by(|&a, &b| {
        rows[a]
            .iter()
            .chain(std::iter::once(&y[a]))
            .zip(rows[b].iter().chain(std::iter::once(&y[b])))
            .map(|(u, v)| u.partial_cmp(v).unwrap_or(Ordering::Equal))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    });
    table.select_rows(&order)
}

/// Mean Euclidean distance from each support to its nearest neighbour.
pub fn mean_nearest_neighbor_distance<T: Real>(points: &[Vec<T>]) -> T {
    if points.len() < 2 {
        return T::zero();
    }
    let total = points
        .iter()
        .enumerate()
        .map(|(i, a)| {
            points
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, b)| a.iter().zip(b).fold(T::zero(), |acc, (&u, &v)| acc + (u - v) * (u - v)))
                .fold(None, |best: Option<T>, d| Some(best.map_or(d, |b| b.min(d))))
                .unwrap_or_else(T::zero)
                .sqrt()
        })
        .fold(T::zero(), |acc, d| acc + d);
    total / T::of_usize(points.len())
}

/// Picks the candidate radius with the highest cross-validated CoP.
fn select_radius<T: Real>(
    table: &DesignTable<T>,
    response: &str,
    config: &MlsConfig<T>,
    supports: &[Vec<T>],
) -> Result<T> {
    let spacing = mean_nearest_neighbor_distance(supports);
    if !(spacing > T::zero()) {
        return Err(MopError::DegenerateSupports);
    }
    let n = table.n_samples();
    let partition = make_partition(n, config.folds.min(n), config.seed).map_err(|_| MopError::DegenerateSupports)?;
    let mut best: Option<(T, T)> = None;
    for radius in radius_candidates(spacing) {
        let trainer = MlsConfig { radius: Some(radius), ..config.clone() };
        match quality::cop_with_partition(table, response, &trainer, &partition) {
            Ok(cop) if cop.is_finite_value() => {
                debug!("mls radius {radius:.4} -> cop {cop:.5}");
                if best.is_none_or(|(_, b)| cop > b) {
                    best = Some((radius, cop));
                }
            }
            Ok(_) => {}
            Err(e) => debug!("mls radius {radius:.4} rejected: {e}"),
        }
    }
    best.map(|(r, _)| r).ok_or(MopError::DegenerateSupports)
}

/// Evaluates the moving least squares approximation at `x`.
pub fn predict_mls<T: Real>(model: &MlsModel<T>, x: &[T]) -> Result<T> {
    if x.len() != model.n_inputs() {
        return Err(MopError::DimensionMismatch { expected: model.n_inputs(), got: x.len() });
    }
    let z = model.standardize(x);
    let d2: Vec<T> = model
        .supports
        .iter()
        .map(|s| s.iter().zip(&z).fold(T::zero(), |acc, (&u, &v)| acc + (u - v) * (u - v)))
        .collect();
    let d2_min = d2.iter().copied().fold(d2[0], |a, b| a.min(b));
    let mut radius = model.radius;
    for _ in 0..=RADIUS_RETRIES {
        if let Some(v) = model.local_fit(&z, &d2, d2_min, radius) {
            return Ok(v);
        }
        radius *= T::of(2.0);
    }
    if let Some(poly) = &model.fallback {
        return poly.predict(x);
    }
    // Weighted mean at the widest radius tried.
    let denom = model.alpha * model.alpha * radius * radius;
    let (num, den) = d2.iter().zip(&model.values).fold((T::zero(), T::zero()), |(num, den), (&dist2, &y)| {
        let w = (-(dist2 - d2_min) / denom).exp();
        (num + w * y, den + w)
    });
    Ok(num / den)
}

impl<T: Real> Predictor<T> for MlsModel<T> {
    fn n_inputs(&self) -> usize {
        MlsModel::n_inputs(self)
    }

    fn predict(&self, x: &[T]) -> Result<T> {
        predict_mls(self, x)
    }

    fn predict_rows(&self, rows: &[Vec<T>]) -> Result<Vec<T>> {
        rows.par_iter().map(|x| predict_mls(self, x)).collect()
    }
}

impl<T: Real> Trainer<T> for MlsConfig<T> {
    type Model = MlsModel<T>;

    fn train(&self, table: &DesignTable<T>, response: &str) -> Result<MlsModel<T>> {
        fit_mls(table, response, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weight_values() {
        assert_eq!(weight(0.0, 2.0, 1.0 / 3.0), 1.0);
        let (d, a) = (1.5f64, 1.0 / 3.0);
        assert_relative_eq!(weight(a * d, d, a), (-1.0f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(weight(3.0 * a * d, d, a), (-9.0f64).exp(), epsilon = 1e-15);
        assert_relative_eq!((-9.0f64).exp(), 1.234e-4, epsilon = 1e-7);
    }

    #[test]
    fn constant_response() {
        let xs: Vec<f64> = (0..12).map(|i| i as f64 * 0.37).collect();
        let t = DesignTable::from_columns(vec![xs]).unwrap().with_response("y", vec![4.25; 12]).unwrap();
        for radius in [0.05, 0.5, 5.0] {
            let model = fit_mls(&t, "y", &MlsConfig::new(BasisSpec::LINEAR).with_radius(radius)).unwrap();
            for q in [-1.0, 0.1, 2.0, 3.3, 10.0] {
                assert_relative_eq!(predict_mls(&model, &[q]).unwrap(), 4.25, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn dimension_mismatch() {
        let t = DesignTable::from_columns(vec![vec![0.0, 1.0, 2.0, 3.0]])
            .unwrap()
            .with_response("y", vec![0.0, 1.0, 2.0, 3.0])
            .unwrap();
        let model = fit_mls(&t, "y", &MlsConfig::new(BasisSpec::LINEAR).with_radius(1.0)).unwrap();
        assert!(matches!(predict_mls(&model, &[1.0, 2.0]), Err(MopError::DimensionMismatch { .. })));
    }

    #[test]
    fn underdetermined() {
        let t = DesignTable::from_columns(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap().with_response("y", vec![0.0, 1.0]).unwrap();
        let err = fit_mls(&t, "y", &MlsConfig::new(BasisSpec::QUADRATIC_COUPLED)).unwrap_err();
        assert!(matches!(err, MopError::Underdetermined { p: 6, n: 2 }));
    }

    #[test]
    fn duplicate_supports_are_degenerate() {
        let t = DesignTable::from_columns(vec![vec![1.0; 6]]).unwrap().with_response("y", vec![1.0, 2.0, 3.0, 1.0, 2.0, 3.0]).unwrap();
        let err = fit_mls(&t, "y", &MlsConfig::new(BasisSpec::LINEAR)).unwrap_err();
        assert!(matches!(err, MopError::DegenerateSupports));
    }

    #[test]
    fn far_query_falls_back() {
        // Linear basis with tiny radius; a query far away still gets an answer.
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        let t = DesignTable::from_columns(vec![xs]).unwrap().with_response("y", ys).unwrap();
        let model = fit_mls(&t, "y", &MlsConfig::new(BasisSpec::LINEAR).with_radius(1e-3)).unwrap();
        let v = predict_mls(&model, &[4.5]).unwrap();
        assert_relative_eq!(v, 12.5, epsilon = 1e-6);
    }
}
