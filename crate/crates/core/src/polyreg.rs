//! Global polynomial least-squares regression.
//!
//! Basis terms are ordered as: constant, linear terms, square terms, then
//! pairwise cross terms `x_i x_j` (`i < j`, lexicographic). Fitting happens on
//! standardized inputs; the stored coefficients are mapped back to the
//! original coordinates.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dataset::DesignTable;
use crate::error::{MopError, Result};
use crate::linalg;
use crate::scalar::{mean_std, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    Linear,
    Quadratic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisSpec {
    pub order: Order,
    /// Pairwise products `x_i x_j`; only valid on a quadratic basis.
    pub coupling: bool,
}

impl BasisSpec {
    pub const LINEAR: BasisSpec = BasisSpec { order: Order::Linear, coupling: false };
    pub const QUADRATIC: BasisSpec = BasisSpec { order: Order::Quadratic, coupling: false };
    pub const QUADRATIC_COUPLED: BasisSpec = BasisSpec { order: Order::Quadratic, coupling: true };

    pub fn validate(&self) -> Result<()> {
        if self.coupling && self.order == Order::Linear {
            return Err(MopError::InvalidArgument("coupling terms require a quadratic basis".into()));
        }
        Ok(())
    }

    /// Number of basis terms `p` for `m` inputs.
    pub fn term_count(&self, m: usize) -> usize {
        match (self.order, self.coupling) {
            (Order::Linear, _) => 1 + m,
            (Order::Quadratic, false) => 1 + 2 * m,
            (Order::Quadratic, true) => 1 + 2 * m + m * m.saturating_sub(1) / 2,
        }
    }

    /// The next simpler basis: quadratic+coupling -> quadratic -> linear.
    pub fn step_down(&self) -> Option<BasisSpec> {
        match (self.order, self.coupling) {
            (Order::Quadratic, true) => Some(Self::QUADRATIC),
            (Order::Quadratic, false) => Some(Self::LINEAR),
            (Order::Linear, _) => None,
        }
    }
}

/// Writes `p(x)` into `out`, which must hold `spec.term_count(x.len())` values.
pub fn basis_into<T: Real>(spec: BasisSpec, x: &[T], out: &mut [T]) {
    let m = x.len();
    out[0] = T::one();
    out[1..=m].copy_from_slice(x);
    if spec.order == Order::Linear {
        return;
    }
    for k in 0..m {
        out[1 + m + k] = x[k] * x[k];
    }
    if spec.coupling {
        let mut t = 1 + 2 * m;
        for i in 0..m {
            for j in i + 1..m {
                out[t] = x[i] * x[j];
                t += 1;
            }
        }
    }
}

pub fn basis_vector<T: Real>(spec: BasisSpec, x: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); spec.term_count(x.len())];
    basis_into(spec, x, &mut out);
    out
}

/// Fitted global polynomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PolynomialModel<T> {
    pub basis: BasisSpec,
    /// Coefficients in original input coordinates, basis term order.
    pub coefficients: Vec<T>,
    /// Input columns of the source table the model reads, in order.
    pub variable_indices: Vec<usize>,
    pub variable_names: Vec<String>,
    pub term_count: usize,
}

impl<T: Real> PolynomialModel<T> {
    pub fn n_inputs(&self) -> usize {
        self.variable_indices.len()
    }

    pub fn predict(&self, x: &[T]) -> Result<T> {
        if x.len() != self.n_inputs() {
            return Err(MopError::DimensionMismatch { expected: self.n_inputs(), got: x.len() });
        }
        let mut buf = vec![T::zero(); self.term_count];
        Ok(self.eval_with(x, &mut buf))
    }

    pub(crate) fn eval_with(&self, x: &[T], buf: &mut [T]) -> T {
        basis_into(self.basis, x, buf);
        buf.iter().zip(&self.coefficients).fold(T::zero(), |acc, (&b, &c)| acc + b * c)
    }
}

/// Least-squares polynomial fit of `response` on all inputs of `table`.
pub fn fit<T: Real>(table: &DesignTable<T>, response: &str, spec: BasisSpec) -> Result<PolynomialModel<T>> {
    let y = table.response(response)?;
    let coefficients = fit_columns(table.columns(), y, spec)?;
    Ok(PolynomialModel {
        basis: spec,
        term_count: coefficients.len(),
        coefficients,
        variable_indices: (0..table.n_inputs()).collect(),
        variable_names: table.variable_names(),
    })
}

/// Coefficients of the least-squares fit of `y` on per-variable `columns`.
pub fn fit_columns<T: Real>(columns: &[Vec<T>], y: &[T], spec: BasisSpec) -> Result<Vec<T>> {
    spec.validate()?;
    let m = columns.len();
    let n = y.len();
    let p = spec.term_count(m);
    if n < p {
        return Err(MopError::Underdetermined { p, n });
    }
    let (shift, scale): (Vec<T>, Vec<T>) = columns
        .iter()
        .map(|c| {
            let (mu, sd) = mean_std(c);
            (mu, if sd > T::zero() { sd } else { T::one() })
        })
        .unzip();
    let mut design = DMatrix::<T>::zeros(n, p);
    let mut z = vec![T::zero(); m];
    let mut row = vec![T::zero(); p];
    for j in 0..n {
        for k in 0..m {
            z[k] = (columns[k][j] - shift[k]) / scale[k];
        }
        basis_into(spec, &z, &mut row);
        for (t, &v) in row.iter().enumerate() {
            design[(j, t)] = v;
        }
    }
    let gamma = linalg::least_squares(design, &DVector::from_column_slice(y))?;
    Ok(destandardize(spec, gamma.as_slice(), &shift, &scale))
}

/// Maps coefficients on `z = (x - shift) / scale` to coefficients on `x`.
fn destandardize<T: Real>(spec: BasisSpec, gamma: &[T], shift: &[T], scale: &[T]) -> Vec<T> {
    let m = shift.len();
    let mut beta = vec![T::zero(); gamma.len()];
    let a: Vec<T> = scale.iter().map(|&s| T::one() / s).collect();
    let c: Vec<T> = shift.iter().zip(scale).map(|(&mu, &s)| -mu / s).collect();
    beta[0] = gamma[0];
    for k in 0..m {
        let g = gamma[1 + k];
        beta[1 + k] += g * a[k];
        beta[0] += g * c[k];
    }
    if spec.order == Order::Quadratic {
        for k in 0..m {
            let g = gamma[1 + m + k];
            beta[1 + m + k] += g * a[k] * a[k];
            beta[1 + k] += g * T::of(2.0) * a[k] * c[k];
            beta[0] += g * c[k] * c[k];
        }
    }
    if spec.coupling {
        let mut t = 1 + 2 * m;
        for i in 0..m {
            for j in i + 1..m {
                let g = gamma[t];
                beta[t] += g * a[i] * a[j];
                beta[1 + i] += g * a[i] * c[j];
                beta[1 + j] += g * c[i] * a[j];
                beta[0] += g * c[i] * c[j];
                t += 1;
            }
        }
    }
    beta
}

/// In-sample predictions of `model` at every row of `table`.
pub fn fitted_values<T: Real>(model: &PolynomialModel<T>, table: &DesignTable<T>) -> Result<Vec<T>> {
    if table.n_inputs() != model.n_inputs() {
        return Err(MopError::DimensionMismatch { expected: model.n_inputs(), got: table.n_inputs() });
    }
    let mut x = vec![T::zero(); table.n_inputs()];
    let mut buf = vec![T::zero(); model.term_count];
    Ok((0..table.n_samples())
        .map(|j| {
            table.row_into(j, &mut x);
            model.eval_with(&x, &mut buf)
        })
        .collect())
}
