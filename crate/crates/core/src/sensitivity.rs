//! Variable importance measures.
//!
//! * Coefficient of importance: loss of in-sample CoD when a variable is
//!   dropped from the polynomial regression.
//! * Single-variable CoP: the same difference on cross-validated CoP.
//! * Total-effect indices estimated on a fitted metamodel by Saltelli sampling
//!   with the Jansen estimator, then scaled by the metamodel's CoP.

use std::collections::BTreeMap;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{make_partition, sample_lhs_rows, seeded_rng, DesignTable, Distribution};
use crate::error::{MopError, Result};
use crate::model::{Predictor, Trainer};
use crate::polyreg::{self, BasisSpec};
use crate::quality::{self, cod};
use crate::scalar::Real;

/// Smallest base sample count accepted by [`total_indices`].
pub const MIN_BASE_SAMPLES: usize = 1000;

/// Default base sample count for index estimation.
pub const DEFAULT_BASE_SAMPLES: usize = 10_000;

fn cod_of_fit<T: Real>(table: &DesignTable<T>, response: &str, spec: BasisSpec) -> Result<T> {
    let model = polyreg::fit(table, response, spec)?;
    let fitted = polyreg::fitted_values(&model, table)?;
    cod(table.response(response)?, &fitted)
}

fn without(m: usize, i: usize) -> Vec<usize> {
    (0..m).filter(|&k| k != i).collect()
}

/// `CoD(all inputs) - CoD(all inputs except i)`. A model without inputs has CoD 0.
pub fn coi<T: Real>(table: &DesignTable<T>, response: &str, spec: BasisSpec, i: usize) -> Result<T> {
    let full = cod_of_fit(table, response, spec)?;
    reduced_cod(table, response, spec, i).map(|r| full - r)
}

fn reduced_cod<T: Real>(table: &DesignTable<T>, response: &str, spec: BasisSpec, i: usize) -> Result<T> {
    let m = table.n_inputs();
    if i >= m {
        return Err(MopError::IndexOutOfRange { index: i, len: m });
    }
    if m == 1 {
        return Ok(T::zero());
    }
    cod_of_fit(&table.project(&without(m, i))?, response, spec)
}

/// CoI of every input of `table` against a single full fit.
pub fn coi_all<T: Real>(table: &DesignTable<T>, response: &str, spec: BasisSpec) -> Result<Vec<T>> {
    let full = cod_of_fit(table, response, spec)?;
    (0..table.n_inputs())
        .into_par_iter()
        .map(|i| reduced_cod(table, response, spec, i).map(|r| full - r))
        .collect()
}

/// `CoP(all inputs) - CoP(all inputs except i)` on the same `q`-subset partition.
pub fn cop_single<T: Real, M: Trainer<T>>(
    table: &DesignTable<T>,
    response: &str,
    trainer: &M,
    i: usize,
    q: usize,
    seed: u64,
) -> Result<T> {
    let partition = make_partition(table.n_samples(), q, seed)?;
    let full = quality::cop_with_partition(table, response, trainer, &partition)?;
    let m = table.n_inputs();
    if i >= m {
        return Err(MopError::IndexOutOfRange { index: i, len: m });
    }
    if m == 1 {
        return Ok(full);
    }
    let reduced = quality::cop_with_partition(&table.project(&without(m, i))?, response, trainer, &partition)?;
    Ok(full - reduced)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct VarianceIndices<T> {
    /// Total-effect index per input, clamped to `[0, 1]`.
    pub total: Vec<T>,
    /// First-order index per input from the same samples, clamped to `[0, 1]`.
    pub first_order: Vec<T>,
    pub variance: T,
}

/// Total-effect indices of `model` over independent inputs with the given
/// distributions.
///
/// Uses two independent `n_base × m` sample matrices `A`, `B` and, per input
/// `i`, the hybrid `A_B^(i)` (columns of `A` with column `i` from `B`):
/// `S_Ti = Σ (f(A) - f(A_B^(i)))² / (2 N V)` and
/// `S_i = Σ f(B) (f(A_B^(i)) - f(A)) / (N V)`.
pub fn total_indices<T: Real, P: Predictor<T> + ?Sized>(
    model: &P,
    distributions: &[Distribution<T>],
    n_base: usize,
    seed: u64,
) -> Result<VarianceIndices<T>> {
    let m = distributions.len();
    if m != model.n_inputs() {
        return Err(MopError::DimensionMismatch { expected: model.n_inputs(), got: m });
    }
    if n_base < MIN_BASE_SAMPLES {
        return Err(MopError::InvalidArgument(format!(
            "index estimation needs at least {MIN_BASE_SAMPLES} base samples, got {n_base}"
        )));
    }
    for d in distributions {
        d.validate()?;
    }
    let mut rng = seeded_rng(seed);
    let a = sample_lhs_rows(distributions, n_base, &mut rng)?;
    let b = sample_lhs_rows(distributions, n_base, &mut rng)?;
    let f_a = model.predict_rows(&a)?;
    let f_b = model.predict_rows(&b)?;
    let nf = T::of_usize(n_base);
    let all_mean = f_a.iter().chain(&f_b).fold(T::zero(), |s, &v| s + v) / (nf + nf);
    let variance = f_a.iter().chain(&f_b).fold(T::zero(), |s, &v| s + (v - all_mean) * (v - all_mean)) / (nf + nf);
    let mut total = vec![T::zero(); m];
    let mut first_order = vec![T::zero(); m];
    if !(variance > T::zero()) {
        return Ok(VarianceIndices { total, first_order, variance });
    }
    for i in 0..m {
        let hybrid: Vec<Vec<T>> = a
            .iter()
            .zip(&b)
            .map(|(ra, rb)| {
                let mut r = ra.clone();
                r[i] = rb[i];
                r
            })
            .collect();
        let f_ab = model.predict_rows(&hybrid)?;
        let mut jansen = T::zero();
        let mut saltelli = T::zero();
        for ((&fa, &fb), &fab) in f_a.iter().zip(&f_b).zip(&f_ab) {
            jansen += (fa - fab) * (fa - fab);
            saltelli += fb * (fab - fa);
        }
        total[i] = (jansen / (T::of(2.0) * nf * variance)).clamp(T::zero(), T::one());
        first_order[i] = (saltelli / (nf * variance)).clamp(T::zero(), T::one());
    }
    Ok(VarianceIndices { total, first_order, variance })
}

/// Indices multiplied by `max(cop, 0)`.
pub fn scaled_indices<T: Real>(indices: &[T], cop: T) -> Vec<T> {
    let factor = cop.max(T::zero());
    indices.iter().map(|&s| s * factor).collect()
}

/// Where index estimation took its input distributions from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionSource {
    Declared,
    ObservedRange,
}

/// Declared distributions of the given table inputs, or uniform over each
/// observed `[min, max]` when any declaration is missing.
pub fn input_distributions<T: Real>(
    table: &DesignTable<T>,
    indices: &[usize],
) -> Result<(Vec<Distribution<T>>, DistributionSource)> {
    let declared: Option<Vec<Distribution<T>>> = indices
        .iter()
        .map(|&i| table.variables().get(i).and_then(|v| v.kind.clone()))
        .collect();
    if let Some(d) = declared {
        return Ok((d, DistributionSource::Declared));
    }
    warn!("input distributions not declared; sampling uniformly over the observed range of each input");
    let observed = indices
        .iter()
        .map(|&i| {
            let col = table.column(i);
            let lower = col.iter().copied().fold(col[0], |a, b| a.min(b));
            let upper = col.iter().copied().fold(col[0], |a, b| a.max(b));
            if !(lower < upper) {
                return Err(MopError::ConstantColumn(table.variables()[i].name.clone()));
            }
            Ok(Distribution::Uniform { lower, upper })
        })
        .collect::<Result<_>>()?;
    Ok((observed, DistributionSource::ObservedRange))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct VariableSensitivity<T> {
    /// Column in the source table.
    pub index: usize,
    pub coi: T,
    pub cop_reduction: T,
    pub total_index: T,
    pub first_order_index: T,
    pub total_index_scaled: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SensitivityReport<T> {
    pub total_cop: T,
    pub per_variable: BTreeMap<String, VariableSensitivity<T>>,
    pub estimator_samples: usize,
    pub seed: u64,
    pub distribution_source: DistributionSource,
    /// Set when the model's CoP is negative; scaled indices are then zero.
    pub unsuitable: bool,
}

impl<T: Real> SensitivityReport<T> {
    /// Variables ordered by decreasing scaled total index.
    pub fn ranked(&self) -> Vec<(&str, &VariableSensitivity<T>)> {
        let mut rows: Vec<_> = self.per_variable.iter().map(|(k, v)| (k.as_str(), v)).collect();
        rows.sort_by(|a, b| {
            b.1.total_index_scaled
                .partial_cmp(&a.1.total_index_scaled)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.1.index.cmp(&b.1.index))
        });
        rows
    }
}
