//! Approximation quality: coefficient of determination (CoD), adjusted CoD,
//! and the coefficient of prognosis (CoP) from cross validation or splitting.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{make_partition, make_split, DesignTable, SubsetPartition};
use crate::error::{MopError, Result};
use crate::model::{Predictor, Trainer};
use crate::scalar::{mean, pearson, Real};

fn check_pair<T: Real>(y: &[T], y_hat: &[T]) -> Result<T> {
    if y.len() != y_hat.len() {
        return Err(MopError::DimensionMismatch { expected: y.len(), got: y_hat.len() });
    }
    if y.len() < 2 {
        return Err(MopError::InvalidArgument("quality measures need at least two samples".into()));
    }
    let y_bar = mean(y);
    let ss_tot = y.iter().fold(T::zero(), |acc, &v| acc + (v - y_bar) * (v - y_bar));
    if !(ss_tot > T::zero()) {
        return Err(MopError::ConstantResponse);
    }
    Ok(ss_tot)
}

/// `1 - SS_res / SS_tot`, the residual form. May be negative for predictions
/// that were not fit to `y`.
pub fn cod<T: Real>(y: &[T], y_hat: &[T]) -> Result<T> {
    let ss_tot = check_pair(y, y_hat)?;
    let ss_res = y.iter().zip(y_hat).fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b));
    Ok(T::one() - ss_res / ss_tot)
}

/// Explained-variance form `Σ(ŷ - ȳ)² / Σ(y - ȳ)²`. Equals [`cod`] only for
/// least-squares fits with an intercept.
pub fn cod_explained<T: Real>(y: &[T], y_hat: &[T]) -> Result<T> {
    let ss_tot = check_pair(y, y_hat)?;
    let y_bar = mean(y);
    let ss_exp = y_hat.iter().fold(T::zero(), |acc, &v| acc + (v - y_bar) * (v - y_bar));
    Ok(ss_exp / ss_tot)
}

/// Squared Pearson correlation between `y` and `ŷ`.
pub fn cod_correlation<T: Real>(y: &[T], y_hat: &[T]) -> Result<T> {
    check_pair(y, y_hat)?;
    let r = pearson(y, y_hat);
    Ok(r * r)
}

/// `1 - (n - 1) / (n - p) * (1 - cod)`.
pub fn cod_adjusted<T: Real>(cod: T, n: usize, p: usize) -> Result<T> {
    if n <= p {
        return Err(MopError::Underdetermined { p, n });
    }
    Ok(T::one() - T::of_usize(n - 1) / T::of_usize(n - p) * (T::one() - cod))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ValidationScheme {
    CrossValidation { q: usize, seed: u64 },
    Split { train_fraction: f64, seed: u64 },
}

impl ValidationScheme {
    pub fn seed(&self) -> u64 {
        match *self {
            ValidationScheme::CrossValidation { seed, .. } | ValidationScheme::Split { seed, .. } => seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct QualityReport<T> {
    /// In-sample CoD of the model fit on all samples.
    pub cod: T,
    /// Present for polynomial models with `n > p`.
    pub cod_adjusted: Option<T>,
    pub cop: T,
    /// Squared correlation between held-out predictions and responses.
    /// Diagnostic only.
    pub cop_correlation: T,
    pub scheme: ValidationScheme,
    pub n: usize,
    pub p: Option<usize>,
    /// Set when `cop < 0`: the model predicts worse than the sample mean.
    pub unsuitable: bool,
}

fn fold_error(i: usize, e: MopError) -> MopError {
    match e {
        MopError::Underdetermined { .. } | MopError::SingularDesign => MopError::FoldUnderdetermined(i),
        other => other,
    }
}

/// Held-out predictions `ỹ_j`: each subset is predicted by a model trained on
/// the remaining subsets.
pub fn cross_validated_predictions<T: Real, M: Trainer<T>>(
    table: &DesignTable<T>,
    response: &str,
    trainer: &M,
    partition: &SubsetPartition,
) -> Result<Vec<T>> {
    let n = table.n_samples();
    if partition.n_samples() != n {
        return Err(MopError::InvalidPartition(format!(
            "partition covers {} samples, table has {n}",
            partition.n_samples()
        )));
    }
    table.response(response)?;
    let folds: Vec<(Vec<usize>, Vec<T>)> = (0..partition.q)
        .into_par_iter()
        .map(|i| {
            let held_out = partition.subset(i);
            let train = table.select_rows(&partition.complement(i))?;
            let model = trainer.train(&train, response).map_err(|e| fold_error(i, e))?;
            let rows: Vec<Vec<T>> = held_out.iter().map(|&j| table.row(j)).collect();
            Ok((held_out, model.predict_rows(&rows)?))
        })
        .collect::<Result<_>>()?;
    let mut pooled = vec![T::zero(); n];
    for (idx, preds) in folds {
        for (j, v) in idx.into_iter().zip(preds) {
            pooled[j] = v;
        }
    }
    Ok(pooled)
}

/// Pooled cross-validated CoP for a fixed partition.
pub fn cop_with_partition<T: Real, M: Trainer<T>>(
    table: &DesignTable<T>,
    response: &str,
    trainer: &M,
    partition: &SubsetPartition,
) -> Result<T> {
    let preds = cross_validated_predictions(table, response, trainer, partition)?;
    cod(table.response(response)?, &preds)
}

/// CoP of a model trained on a seeded fraction of the samples and scored on
/// the rest. Returns `(cop, cop_correlation)`.
fn split_cop<T: Real, M: Trainer<T>>(
    table: &DesignTable<T>,
    response: &str,
    trainer: &M,
    train_fraction: f64,
    seed: u64,
) -> Result<(T, T)> {
    let (train_idx, test_idx) = make_split(table.n_samples(), train_fraction, seed)?;
    let train = table.select_rows(&train_idx)?;
    let test = table.select_rows(&test_idx)?;
    let model = trainer.train(&train, response)?;
    let preds = model.predict_table(&test)?;
    let y = test.response(response)?;
    Ok((cod(y, &preds)?, cod_correlation(y, &preds)?))
}

/// CoP under the given scheme without the in-sample part of a report.
pub fn estimate_cop<T: Real, M: Trainer<T>>(
    table: &DesignTable<T>,
    response: &str,
    trainer: &M,
    scheme: &ValidationScheme,
) -> Result<T> {
    match *scheme {
        ValidationScheme::CrossValidation { q, seed } => {
            let partition = make_partition(table.n_samples(), q, seed)?;
            cop_with_partition(table, response, trainer, &partition)
        }
        ValidationScheme::Split { train_fraction, seed } => {
            split_cop(table, response, trainer, train_fraction, seed).map(|(c, _)| c)
        }
    }
}

fn in_sample<T: Real, M: Trainer<T>>(
    table: &DesignTable<T>,
    response: &str,
    trainer: &M,
) -> Result<(T, Option<T>, Option<usize>)> {
    let model = trainer.train(table, response)?;
    let fitted = model.predict_table(table)?;
    let cod_value = cod(table.response(response)?, &fitted)?;
    let p = model.coefficient_count();
    let n = table.n_samples();
    let adjusted = match p {
        Some(p) if n > p => Some(cod_adjusted(cod_value, n, p)?),
        _ => None,
    };
    Ok((cod_value, adjusted, p))
}

/// Full report with CoP by `q`-fold cross validation.
pub fn cop_cross_validation<T: Real, M: Trainer<T>>(
    table: &DesignTable<T>,
    response: &str,
    trainer: &M,
    q: usize,
    seed: u64,
) -> Result<QualityReport<T>> {
    let partition = make_partition(table.n_samples(), q, seed)?;
    let preds = cross_validated_predictions(table, response, trainer, &partition)?;
    let y = table.response(response)?;
    let cop = cod(y, &preds)?;
    let (cod_value, cod_adjusted, p) = in_sample(table, response, trainer)?;
    Ok(QualityReport {
        cod: cod_value,
        cod_adjusted,
        cop,
        cop_correlation: cod_correlation(y, &preds)?,
        scheme: ValidationScheme::CrossValidation { q, seed },
        n: table.n_samples(),
        p,
        unsuitable: cop < T::zero(),
    })
}

/// Full report with CoP from a single train/test split.
pub fn cop_split<T: Real, M: Trainer<T>>(
    table: &DesignTable<T>,
    response: &str,
    trainer: &M,
    train_fraction: f64,
    seed: u64,
) -> Result<QualityReport<T>> {
    let (cop, cop_correlation) = split_cop(table, response, trainer, train_fraction, seed)?;
    let (cod_value, cod_adjusted, p) = in_sample(table, response, trainer)?;
    Ok(QualityReport {
        cod: cod_value,
        cod_adjusted,
        cop,
        cop_correlation,
        scheme: ValidationScheme::Split { train_fraction, seed },
        n: table.n_samples(),
        p,
        unsuitable: cop < T::zero(),
    })
}

/// Report under either scheme.
pub fn assess<T: Real, M: Trainer<T>>(
    table: &DesignTable<T>,
    response: &str,
    trainer: &M,
    scheme: &ValidationScheme,
) -> Result<QualityReport<T>> {
    match *scheme {
        ValidationScheme::CrossValidation { q, seed } => cop_cross_validation(table, response, trainer, q, seed),
        ValidationScheme::Split { train_fraction, seed } => cop_split(table, response, trainer, train_fraction, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyreg::BasisSpec;
    use approx::assert_relative_eq;

    #[test]
    fn cod_examples() {
        let y = [0.0, 1.0, 2.0];
        assert_eq!(cod(&y, &y).unwrap(), 1.0);
        assert_eq!(cod(&y, &[1.0, 1.0, 1.0]).unwrap(), 0.0);
        assert_relative_eq!(cod(&y, &[0.0, 0.0, 0.0]).unwrap(), -1.5);
        assert!(matches!(cod(&[2.0, 2.0], &[1.0, 2.0]), Err(MopError::ConstantResponse)));
    }

    #[test]
    fn adjusted_examples() {
        assert_relative_eq!(cod_adjusted(0.9, 10, 3).unwrap(), 1.0 - 9.0 / 7.0 * 0.1, epsilon = 1e-15);
        assert_relative_eq!(cod_adjusted(0.9, 10, 3).unwrap(), 0.87143, epsilon = 1e-5);
        assert_eq!(cod_adjusted(1.0, 10, 7).unwrap(), 1.0);
        assert_relative_eq!(cod_adjusted(0.9, 10, 1).unwrap(), 0.9, epsilon = 1e-15);
        assert!(matches!(cod_adjusted(0.9, 3, 3), Err(MopError::Underdetermined { .. })));
    }

    #[test]
    fn split_with_empty_test_fails() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let t = DesignTable::from_columns(vec![xs.clone()]).unwrap().with_response("y", xs).unwrap();
        assert!(cop_split(&t, "y", &BasisSpec::LINEAR, 0.999, 0).is_err());
    }

    #[test]
    fn fold_underdetermined() {
        let xs: Vec<f64> = (0..4).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let t = DesignTable::from_columns(vec![xs]).unwrap().with_response("y", ys).unwrap();
        // Training folds of 2 samples cannot support 3 quadratic terms.
        let err = cop_cross_validation(&t, "y", &BasisSpec::QUADRATIC, 2, 0).unwrap_err();
        assert!(matches!(err, MopError::FoldUnderdetermined(_)));
    }
}
