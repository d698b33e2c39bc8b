//! Common interface over the metamodel families.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::DesignTable;
use crate::error::{MopError, Result};
use crate::mls::{self, MlsConfig, MlsModel};
use crate::polyreg::{self, BasisSpec, PolynomialModel};
use crate::scalar::Real;

/// A fitted surrogate that can be evaluated at new input points.
pub trait Predictor<T: Real>: Send + Sync {
    fn n_inputs(&self) -> usize;

    fn predict(&self, x: &[T]) -> Result<T>;

    /// Number of regression coefficients for global polynomial models.
    fn coefficient_count(&self) -> Option<usize> {
        None
    }

    /// Predictions for a batch of row-major points.
    fn predict_rows(&self, rows: &[Vec<T>]) -> Result<Vec<T>> {
        rows.par_iter().map(|x| self.predict(x)).collect()
    }

    /// Predictions at every sample of `table`.
    fn predict_table(&self, table: &DesignTable<T>) -> Result<Vec<T>> {
        if table.n_inputs() != self.n_inputs() {
            return Err(MopError::DimensionMismatch { expected: self.n_inputs(), got: table.n_inputs() });
        }
        self.predict_rows(&table.rows())
    }
}

/// Something that fits a predictor to a table using all of its inputs.
pub trait Trainer<T: Real>: Sync {
    type Model: Predictor<T>;

    fn train(&self, table: &DesignTable<T>, response: &str) -> Result<Self::Model>;
}

impl<T: Real> Predictor<T> for PolynomialModel<T> {
    fn n_inputs(&self) -> usize {
        PolynomialModel::n_inputs(self)
    }

    fn predict(&self, x: &[T]) -> Result<T> {
        PolynomialModel::predict(self, x)
    }

    fn coefficient_count(&self) -> Option<usize> {
        Some(self.term_count)
    }

    fn predict_table(&self, table: &DesignTable<T>) -> Result<Vec<T>> {
        polyreg::fitted_values(self, table)
    }
}

impl<T: Real> Trainer<T> for BasisSpec {
    type Model = PolynomialModel<T>;

    fn train(&self, table: &DesignTable<T>, response: &str) -> Result<PolynomialModel<T>> {
        polyreg::fit(table, response, *self)
    }
}

/// Candidate metamodel kinds, declared from simplest to most complex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    PolyLinear,
    PolyQuadratic,
    PolyQuadraticCoupling,
    MlsLinear,
    MlsQuadratic,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::PolyLinear,
        ModelKind::PolyQuadratic,
        ModelKind::PolyQuadraticCoupling,
        ModelKind::MlsLinear,
        ModelKind::MlsQuadratic,
    ];

    pub fn is_mls(self) -> bool {
        matches!(self, ModelKind::MlsLinear | ModelKind::MlsQuadratic)
    }

    /// Basis used by this kind. The quadratic MLS basis is the complete
    /// quadratic including cross terms.
    pub fn basis(self) -> BasisSpec {
        match self {
            ModelKind::PolyLinear | ModelKind::MlsLinear => BasisSpec::LINEAR,
            ModelKind::PolyQuadratic => BasisSpec::QUADRATIC,
            ModelKind::PolyQuadraticCoupling | ModelKind::MlsQuadratic => BasisSpec::QUADRATIC_COUPLED,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::PolyLinear => "poly_linear",
            ModelKind::PolyQuadratic => "poly_quadratic",
            ModelKind::PolyQuadraticCoupling => "poly_quadratic_coupling",
            ModelKind::MlsLinear => "mls_linear",
            ModelKind::MlsQuadratic => "mls_quadratic",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = MopError;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| MopError::InvalidArgument(format!("unknown model kind `{s}`")))
    }
}

/// Any fitted metamodel, in serializable form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", bound = "T: Real")]
pub enum Metamodel<T> {
    Polynomial(PolynomialModel<T>),
    Mls(MlsModel<T>),
}

impl<T: Real> Metamodel<T> {
    pub fn variable_names(&self) -> &[String] {
        match self {
            Metamodel::Polynomial(m) => &m.variable_names,
            Metamodel::Mls(m) => &m.variable_names,
        }
    }

    pub fn variable_indices(&self) -> &[usize] {
        match self {
            Metamodel::Polynomial(m) => &m.variable_indices,
            Metamodel::Mls(m) => &m.variable_indices,
        }
    }

    /// Relabels the input columns the model reads, e.g. after fitting on a
    /// projected table.
    pub fn with_variable_indices(mut self, indices: Vec<usize>) -> Result<Self> {
        let slot = match &mut self {
            Metamodel::Polynomial(m) => &mut m.variable_indices,
            Metamodel::Mls(m) => &mut m.variable_indices,
        };
        if indices.len() != slot.len() {
            return Err(MopError::DimensionMismatch { expected: slot.len(), got: indices.len() });
        }
        *slot = indices;
        Ok(self)
    }
}

impl<T: Real> Predictor<T> for Metamodel<T> {
    fn n_inputs(&self) -> usize {
        match self {
            Metamodel::Polynomial(m) => Predictor::n_inputs(m),
            Metamodel::Mls(m) => Predictor::n_inputs(m),
        }
    }

    fn predict(&self, x: &[T]) -> Result<T> {
        match self {
            Metamodel::Polynomial(m) => m.predict(x),
            Metamodel::Mls(m) => mls::predict_mls(m, x),
        }
    }

    fn coefficient_count(&self) -> Option<usize> {
        match self {
            Metamodel::Polynomial(m) => Some(m.term_count),
            Metamodel::Mls(_) => None,
        }
    }

    fn predict_table(&self, table: &DesignTable<T>) -> Result<Vec<T>> {
        match self {
            Metamodel::Polynomial(m) => m.predict_table(table),
            Metamodel::Mls(m) => m.predict_table(table),
        }
    }
}

/// Fits the metamodel of a given kind; MLS kinds select their radius automatically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct KindTrainer<T> {
    pub kind: ModelKind,
    pub mls_alpha: T,
    pub mls_folds: usize,
    pub seed: u64,
}

impl<T: Real> KindTrainer<T> {
    pub fn new(kind: ModelKind, seed: u64) -> Self {
        Self { kind, mls_alpha: mls::default_alpha(), mls_folds: 5, seed }
    }

    pub fn mls_config(&self) -> MlsConfig<T> {
        MlsConfig {
            basis: self.kind.basis(),
            radius: None,
            alpha: self.mls_alpha,
            folds: self.mls_folds,
            seed: self.seed,
        }
    }
}

impl<T: Real> Trainer<T> for KindTrainer<T> {
    type Model = Metamodel<T>;

    fn train(&self, table: &DesignTable<T>, response: &str) -> Result<Metamodel<T>> {
        if self.kind.is_mls() {
            mls::fit_mls(table, response, &self.mls_config()).map(Metamodel::Mls)
        } else {
            polyreg::fit(table, response, self.kind.basis()).map(Metamodel::Polynomial)
        }
    }
}
