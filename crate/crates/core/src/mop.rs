//! Metamodel of Optimal Prognosis: significance and importance filtering,
//! the configuration search, and the ΔCoP simplification rule.

use std::collections::BTreeMap;

use log::{debug, info};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{make_partition, make_split, DesignTable};
use crate::error::{MopError, Result};
use crate::model::{KindTrainer, Metamodel, ModelKind, Predictor, Trainer};
use crate::polyreg::{self, BasisSpec};
use crate::quality::{self, cod, cod_adjusted, cod_correlation, QualityReport, ValidationScheme};
use crate::scalar::{pearson, Real};
use crate::sensitivity::{self, SensitivityReport, VariableSensitivity};

/// Pairwise linear and quadratic association over all inputs followed by the response.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CorrelationMatrix<T> {
    /// Input names, then the response name.
    pub names: Vec<String>,
    pub linear: Vec<Vec<T>>,
    pub quadratic: Vec<Vec<T>>,
}

impl<T: Real> CorrelationMatrix<T> {
    pub fn n_inputs(&self) -> usize {
        self.names.len() - 1
    }

    fn response_index(&self) -> usize {
        self.names.len() - 1
    }

    /// Upper-triangle input-input entries of a matrix, as magnitudes.
    fn input_pairs(matrix: &[Vec<T>], m: usize) -> Vec<T> {
        let mut out = Vec::with_capacity(m * m.saturating_sub(1) / 2);
        for i in 0..m {
            for j in i + 1..m {
                out.push(matrix[i][j].abs());
            }
        }
        out
    }
}

/// Correlation between `target` and its single-variable quadratic regression on `source`.
fn quadratic_association<T: Real>(source: &[T], target: &[T]) -> T {
    match polyreg::fit_columns(&[source.to_vec()], target, BasisSpec::QUADRATIC) {
        Ok(beta) => {
            let fitted: Vec<T> = source.iter().map(|&x| beta[0] + beta[1] * x + beta[2] * x * x).collect();
            pearson(target, &fitted).abs()
        }
        // Two-level inputs make x and x² collinear; the linear fit is all there is.
        Err(_) => pearson(source, target).abs(),
    }
}

pub fn correlations<T: Real>(table: &DesignTable<T>, response: &str) -> Result<CorrelationMatrix<T>> {
    let n = table.n_samples();
    if n < 3 {
        return Err(MopError::InvalidArgument(format!("correlation analysis needs n >= 3, got {n}")));
    }
    let mut names = table.variable_names();
    names.push(response.to_string());
    let mut columns: Vec<&[T]> = table.columns().iter().map(Vec::as_slice).collect();
    columns.push(table.response(response)?);
    for (name, col) in names.iter().zip(&columns) {
        if col.iter().all(|&v| v == col[0]) {
            return Err(MopError::ConstantColumn(name.clone()));
        }
    }
    let size = columns.len();
    let y = size - 1;
    let mut linear = vec![vec![T::one(); size]; size];
    let mut quadratic = vec![vec![T::one(); size]; size];
    let pairs: Vec<(usize, usize)> = (0..size).flat_map(|i| (i + 1..size).map(move |j| (i, j))).collect();
    let values: Vec<(T, T)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let lin = pearson(columns[i], columns[j]);
            let quad = if j == y {
                quadratic_association(columns[i], columns[j])
            } else {
                quadratic_association(columns[i], columns[j]).max(quadratic_association(columns[j], columns[i]))
            };
            (lin, quad)
        })
        .collect();
    for (&(i, j), &(lin, quad)) in pairs.iter().zip(&values) {
        linear[i][j] = lin;
        linear[j][i] = lin;
        quadratic[i][j] = quad;
        quadratic[j][i] = quad;
    }
    Ok(CorrelationMatrix { names, linear, quadratic })
}

/// Linear-interpolation quantile of `values` (which must be non-empty).
fn quantile_of<T: Real>(mut values: Vec<T>, level: f64) -> T {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let pos = level * (values.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = T::of(pos - lo as f64);
    values[lo] + (values[hi] - values[lo]) * frac
}

/// Noise thresholds of the significance filter at one quantile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SignificanceThresholds<T> {
    pub quantile: f64,
    pub linear: T,
    pub quadratic: T,
}

/// Thresholds from the input-input correlations, `None` for a single input.
pub fn significance_thresholds<T: Real>(
    matrix: &CorrelationMatrix<T>,
    quantile: f64,
) -> Result<Option<SignificanceThresholds<T>>> {
    if !(0.5..=0.999).contains(&quantile) {
        return Err(MopError::InvalidArgument(format!("significance quantile {quantile} not in [0.5, 0.999]")));
    }
    let m = matrix.n_inputs();
    if m < 2 {
        return Ok(None);
    }
    Ok(Some(SignificanceThresholds {
        quantile,
        linear: quantile_of(CorrelationMatrix::input_pairs(&matrix.linear, m), quantile),
        quadratic: quantile_of(CorrelationMatrix::input_pairs(&matrix.quadratic, m), quantile),
    }))
}

/// Inputs whose linear or quadratic association with the response exceeds the
/// given quantile of the input-input associations. Each channel has its own
/// threshold.
pub fn significance_filter<T: Real>(matrix: &CorrelationMatrix<T>, quantile: f64) -> Result<Vec<usize>> {
    let Some(th) = significance_thresholds(matrix, quantile)? else {
        info!("single input variable passes the significance filter unconditionally");
        return Ok(vec![0]);
    };
    let y = matrix.response_index();
    Ok((0..matrix.n_inputs())
        .filter(|&i| matrix.linear[i][y].abs() > th.linear || matrix.quadratic[i][y] > th.quadratic)
        .collect())
}

/// CoI of each candidate from one polynomial regression on the candidates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ImportanceScores<T> {
    pub candidates: Vec<usize>,
    /// Basis after any step-down forced by the sample count.
    pub basis: BasisSpec,
    pub coi: Vec<T>,
}

impl<T: Real> ImportanceScores<T> {
    /// Candidates with `CoI >= coi_min`, or the single most important one if none qualify.
    pub fn retain(&self, coi_min: f64) -> Vec<usize> {
        let threshold = T::of(coi_min);
        let kept: Vec<usize> = self
            .candidates
            .iter()
            .zip(&self.coi)
            .filter(|(_, &c)| c >= threshold)
            .map(|(&i, _)| i)
            .collect();
        if !kept.is_empty() {
            return kept;
        }
        let best = self
            .coi
            .iter()
            .enumerate()
            .fold(0, |best, (k, &c)| if c > self.coi[best] { k } else { best });
        vec![self.candidates[best]]
    }
}

pub fn importance_scores<T: Real>(
    table: &DesignTable<T>,
    response: &str,
    candidates: &[usize],
) -> Result<ImportanceScores<T>> {
    if candidates.is_empty() {
        return Err(MopError::InvalidArgument("importance filter needs at least one candidate".into()));
    }
    let sub = table.project(candidates)?;
    let n = sub.n_samples();
    let mut spec = BasisSpec::QUADRATIC_COUPLED;
    loop {
        let p = spec.term_count(candidates.len());
        let attempt = if n > p {
            sensitivity::coi_all(&sub, response, spec)
        } else {
            Err(MopError::Underdetermined { p, n })
        };
        match attempt {
            Ok(coi) => return Ok(ImportanceScores { candidates: candidates.to_vec(), basis: spec, coi }),
            Err(e @ (MopError::Underdetermined { .. } | MopError::SingularDesign)) => match spec.step_down() {
                Some(next) => {
                    debug!("importance filter: {e}; stepping down from {spec:?} to {next:?}");
                    spec = next;
                }
                None => return Err(e),
            },
            Err(e) => return Err(e),
        }
    }
}

/// Candidates whose coefficient of importance reaches `coi_min`.
pub fn importance_filter<T: Real>(
    table: &DesignTable<T>,
    response: &str,
    candidates: &[usize],
    coi_min: f64,
) -> Result<Vec<usize>> {
    importance_scores(table, response, candidates).map(|s| s.retain(coi_min))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub significance_quantile: f64,
    pub coi_min: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub quantiles: Vec<f64>,
    pub coi_mins: Vec<f64>,
    pub kinds: Vec<ModelKind>,
    /// Also evaluate every kind on all inputs. Both filters judge inputs
    /// through correlations and a global quadratic polynomial, so inputs that
    /// act only through higher-order interactions are invisible to them.
    #[serde(default = "default_true")]
    pub include_unfiltered: bool,
}

fn default_true() -> bool {
    true
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            quantiles: vec![0.99, 0.975, 0.95, 0.925, 0.90],
            coi_mins: vec![0.01, 0.03, 0.05, 0.07, 0.09],
            kinds: ModelKind::ALL.to_vec(),
            include_unfiltered: true,
        }
    }
}

impl SearchSpace {
    pub fn validate(&self) -> Result<()> {
        if self.quantiles.is_empty() || self.coi_mins.is_empty() || self.kinds.is_empty() {
            return Err(MopError::InvalidArgument("search grids must be non-empty".into()));
        }
        if let Some(q) = self.quantiles.iter().find(|q| !(0.5..=0.999).contains(*q)) {
            return Err(MopError::InvalidArgument(format!("significance quantile {q} not in [0.5, 0.999]")));
        }
        if let Some(c) = self.coi_mins.iter().find(|c| !(0.0..1.0).contains(*c)) {
            return Err(MopError::InvalidArgument(format!("coi_min {c} not in [0, 1)")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MopOptions<T> {
    pub search: SearchSpace,
    pub scheme: ValidationScheme,
    pub delta_cop: f64,
    pub mls_alpha: T,
    pub mls_folds: usize,
    pub sensitivity_samples: usize,
    pub sensitivity_seed: u64,
}

impl<T: Real> Default for MopOptions<T> {
    fn default() -> Self {
        Self {
            search: SearchSpace::default(),
            scheme: ValidationScheme::CrossValidation { q: 5, seed: 0 },
            delta_cop: 0.03,
            mls_alpha: crate::mls::default_alpha(),
            mls_folds: 5,
            sensitivity_samples: sensitivity::DEFAULT_BASE_SAMPLES,
            sensitivity_seed: 0,
        }
    }
}

impl<T: Real> MopOptions<T> {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.scheme = match self.scheme {
            ValidationScheme::CrossValidation { q, .. } => ValidationScheme::CrossValidation { q, seed },
            ValidationScheme::Split { train_fraction, .. } => ValidationScheme::Split { train_fraction, seed },
        };
        self.sensitivity_seed = seed;
        self
    }

    pub fn trainer(&self, kind: ModelKind) -> KindTrainer<T> {
        KindTrainer { kind, mls_alpha: self.mls_alpha, mls_folds: self.mls_folds, seed: self.scheme.seed() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case", bound = "T: Real")]
pub enum Outcome<T> {
    Evaluated { cop: T },
    Failed { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SearchLogEntry<T> {
    pub kind: ModelKind,
    /// `None` for the unfiltered configuration.
    pub filter: Option<FilterConfig>,
    pub significant: Vec<usize>,
    pub retained: Vec<usize>,
    pub outcome: Outcome<T>,
}

impl<T: Real> SearchLogEntry<T> {
    pub fn cop(&self) -> Option<T> {
        match self.outcome {
            Outcome::Evaluated { cop } if cop.is_finite_value() => Some(cop),
            _ => None,
        }
    }
}

/// Index of the preferred entry: among evaluated entries within `delta_cop` of
/// the best CoP, the simplest kind, then the fewest retained variables, then
/// the highest CoP, then the earliest entry.
pub fn select_winner<T: Real>(log: &[SearchLogEntry<T>], delta_cop: f64) -> Option<usize> {
    let best = log.iter().filter_map(SearchLogEntry::cop).fold(None, |acc: Option<T>, c| {
        Some(acc.map_or(c, |a| a.max(c)))
    })?;
    let floor = best - T::of(delta_cop);
    log.iter()
        .enumerate()
        .filter_map(|(k, e)| e.cop().filter(|&c| c >= floor).map(|c| (k, e, c)))
        .min_by(|a, b| {
            a.1.kind
                .cmp(&b.1.kind)
                .then(a.1.retained.len().cmp(&b.1.retained.len()))
                .then(b.2.partial_cmp(&a.2).unwrap_or(std::cmp::Ordering::Equal))
                .then(a.0.cmp(&b.0))
        })
        .map(|(k, _, _)| k)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MopResult<T> {
    pub response: String,
    pub model_kind: ModelKind,
    pub retained_variables: Vec<usize>,
    pub retained_names: Vec<String>,
    pub filter: Option<FilterConfig>,
    pub cop: T,
    pub delta_cop: f64,
    pub scheme: ValidationScheme,
    pub significance_thresholds: Vec<SignificanceThresholds<T>>,
    pub correlations: CorrelationMatrix<T>,
    /// Every filtered configuration, kind-major, then quantile, then coi_min.
    pub runner_up_log: Vec<SearchLogEntry<T>>,
    /// One entry per kind fit on all inputs, empty unless requested.
    pub unfiltered_log: Vec<SearchLogEntry<T>>,
    pub sensitivity: SensitivityReport<T>,
}

/// Search outcome with the fitted winner.
#[derive(Clone, Debug)]
pub struct Mop<T: Real> {
    pub result: MopResult<T>,
    pub model: Metamodel<T>,
    pub quality: QualityReport<T>,
    /// `(row, prediction)` for every sample predicted out of fold (cross
    /// validation) or in the test part (splitting).
    pub validation_predictions: Vec<(usize, T)>,
}

fn validate_options<T: Real>(options: &MopOptions<T>, n: usize) -> Result<()> {
    options.search.validate()?;
    if !(options.delta_cop >= 0.0) {
        return Err(MopError::InvalidArgument(format!("delta_cop must be >= 0, got {}", options.delta_cop)));
    }
    match options.scheme {
        ValidationScheme::CrossValidation { q, .. } if q < 2 || q > n => {
            Err(MopError::InvalidPartition(format!("need 2 <= q <= n, got q = {q}, n = {n}")))
        }
        ValidationScheme::Split { train_fraction, .. } if !(train_fraction > 0.0 && train_fraction < 1.0) => {
            Err(MopError::InvalidArgument(format!("train fraction {train_fraction} not in (0, 1)")))
        }
        _ => Ok(()),
    }
}

/// Held-out predictions of `trainer` under `scheme`, as `(row, prediction)`.
fn validation_predictions<T: Real, M: Trainer<T>>(
    table: &DesignTable<T>,
    response: &str,
    trainer: &M,
    scheme: &ValidationScheme,
) -> Result<Vec<(usize, T)>> {
    match *scheme {
        ValidationScheme::CrossValidation { q, seed } => {
            let partition = make_partition(table.n_samples(), q, seed)?;
            let preds = quality::cross_validated_predictions(table, response, trainer, &partition)?;
            Ok(preds.into_iter().enumerate().collect())
        }
        ValidationScheme::Split { train_fraction, seed } => {
            let (train_idx, test_idx) = make_split(table.n_samples(), train_fraction, seed)?;
            let model = trainer.train(&table.select_rows(&train_idx)?, response)?;
            let preds = model.predict_table(&table.select_rows(&test_idx)?)?;
            Ok(test_idx.into_iter().zip(preds).collect())
        }
    }
}

fn cop_from_predictions<T: Real>(y: &[T], preds: &[(usize, T)]) -> Result<(T, T)> {
    let (obs, hat): (Vec<T>, Vec<T>) = preds.iter().map(|&(j, v)| (y[j], v)).unzip();
    Ok((cod(&obs, &hat)?, cod_correlation(&obs, &hat)?))
}

/// Searches all (kind, significance quantile, coi_min) configurations and
/// returns the Metamodel of Optimal Prognosis for `response`.
pub fn find_mop<T: Real>(table: &DesignTable<T>, response: &str, options: &MopOptions<T>) -> Result<Mop<T>> {
    let n = table.n_samples();
    validate_options(options, n)?;
    let y = table.response(response)?;
    let matrix = correlations(table, response)?;
    let search = &options.search;

    let mut thresholds = Vec::new();
    let mut significant = Vec::with_capacity(search.quantiles.len());
    for &q in &search.quantiles {
        if let Some(th) = significance_thresholds(&matrix, q)? {
            thresholds.push(th);
        }
        let mut keep = significance_filter(&matrix, q)?;
        if keep.is_empty() {
            // Nothing clears the noise level; keep the most associated input.
            let yi = matrix.n_inputs();
            let best = (0..matrix.n_inputs())
                .max_by(|&a, &b| {
                    let sa = matrix.linear[a][yi].abs().max(matrix.quadratic[a][yi]);
                    let sb = matrix.linear[b][yi].abs().max(matrix.quadratic[b][yi]);
                    sa.partial_cmp(&sb).unwrap_or(std::cmp::Ordering::Equal).then(b.cmp(&a))
                })
                .unwrap_or(0);
            debug!("quantile {q}: no significant input, keeping {best}");
            keep.push(best);
        }
        significant.push(keep);
    }

    let mut scores: BTreeMap<Vec<usize>, std::result::Result<ImportanceScores<T>, String>> = BTreeMap::new();
    for set in &significant {
        if !scores.contains_key(set) {
            let s = importance_scores(table, response, set).map_err(|e| e.to_string());
            scores.insert(set.clone(), s);
        }
    }

    // (significant set, retained set or failure) per quantile x coi_min.
    let mut filtered = Vec::new();
    for (qi, set) in significant.iter().enumerate() {
        for (ci, &coi_min) in search.coi_mins.iter().enumerate() {
            let retained = scores[set].as_ref().map(|s| s.retain(coi_min)).map_err(Clone::clone);
            filtered.push((qi, ci, retained));
        }
    }

    let all_inputs: Vec<usize> = (0..table.n_inputs()).collect();
    let mut jobs: Vec<(ModelKind, Vec<usize>)> = Vec::new();
    for &kind in &search.kinds {
        let unfiltered = search.include_unfiltered.then_some(&all_inputs);
        for r in filtered.iter().filter_map(|(_, _, r)| r.as_ref().ok()).chain(unfiltered) {
            if !jobs.iter().any(|(k, v)| *k == kind && v == r) {
                jobs.push((kind, r.clone()));
            }
        }
    }
    let partition = match options.scheme {
        ValidationScheme::CrossValidation { q, seed } => Some(make_partition(n, q, seed)?),
        ValidationScheme::Split { .. } => None,
    };
    info!("evaluating {} distinct configurations for `{response}`", jobs.len());
    let evaluated: Vec<std::result::Result<T, String>> = jobs
        .par_iter()
        .map(|(kind, retained)| {
            let sub = table.project(retained).map_err(|e| e.to_string())?;
            let trainer = options.trainer(*kind);
            let cop = match &partition {
                Some(p) => quality::cop_with_partition(&sub, response, &trainer, p),
                None => quality::estimate_cop(&sub, response, &trainer, &options.scheme),
            };
            cop.map_err(|e| e.to_string())
        })
        .collect();
    let lookup = |kind: ModelKind, retained: &Vec<usize>| {
        let k = jobs.iter().position(|(jk, jr)| *jk == kind && jr == retained).expect("job scheduled");
        evaluated[k].clone()
    };

    let mut log = Vec::with_capacity(search.kinds.len() * filtered.len());
    for &kind in &search.kinds {
        for (qi, ci, retained) in &filtered {
            let filter = Some(FilterConfig { significance_quantile: search.quantiles[*qi], coi_min: search.coi_mins[*ci] });
            let (retained, outcome) = match retained {
                Ok(r) => match lookup(kind, r) {
                    Ok(cop) => (r.clone(), Outcome::Evaluated { cop }),
                    Err(reason) => (r.clone(), Outcome::Failed { reason }),
                },
                Err(reason) => (Vec::new(), Outcome::Failed { reason: reason.clone() }),
            };
            log.push(SearchLogEntry { kind, filter, significant: significant[*qi].clone(), retained, outcome });
        }
    }

    let mut unfiltered_log = Vec::new();
    if search.include_unfiltered {
        for &kind in &search.kinds {
            let outcome = match lookup(kind, &all_inputs) {
                Ok(cop) => Outcome::Evaluated { cop },
                Err(reason) => Outcome::Failed { reason },
            };
            unfiltered_log.push(SearchLogEntry {
                kind,
                filter: None,
                significant: all_inputs.clone(),
                retained: all_inputs.clone(),
                outcome,
            });
        }
    }

    // Filtered entries come first so they win exact ties.
    let candidates: Vec<SearchLogEntry<T>> = log.iter().chain(&unfiltered_log).cloned().collect();
    let Some(w) = select_winner(&candidates, options.delta_cop) else {
        let reasons = candidates
            .iter()
            .map(|e| {
                let label = match &e.filter {
                    Some(f) => format!("{} q={} coi={}", e.kind, f.significance_quantile, f.coi_min),
                    None => format!("{} unfiltered", e.kind),
                };
                match &e.outcome {
                    Outcome::Failed { reason } => format!("{label}: {reason}"),
                    Outcome::Evaluated { cop } => format!("{label}: non-finite cop {cop}"),
                }
            })
            .collect();
        return Err(MopError::NoFeasibleModel(reasons));
    };
    let winner = candidates[w].clone();
    let cop = winner.cop().expect("winner was evaluated");
    info!("winner for `{response}`: {} on {:?} with CoP {cop:.4}", winner.kind, winner.retained);

    let sub = table.project(&winner.retained)?;
    let trainer = options.trainer(winner.kind);
    let model = trainer.train(&sub, response)?;
    let fitted = model.predict_table(&sub)?;
    let cod_value = cod(y, &fitted)?;
    let p = model.coefficient_count();
    let preds = validation_predictions(&sub, response, &trainer, &options.scheme)?;
    let (_, cop_correlation) = cop_from_predictions(y, &preds)?;
    let quality = QualityReport {
        cod: cod_value,
        cod_adjusted: match p {
            Some(p) if n > p => Some(cod_adjusted(cod_value, n, p)?),
            _ => None,
        },
        cop,
        cop_correlation,
        scheme: options.scheme,
        n,
        p,
        unsuitable: cop < T::zero(),
    };

    let sensitivity = sensitivity_report(table, &sub, response, &winner.retained, &model, &trainer, cop, options, partition.as_ref())?;
    let model = model.with_variable_indices(winner.retained.clone())?;
    let names = table.variable_names();
    let result = MopResult {
        response: response.to_string(),
        model_kind: winner.kind,
        retained_names: winner.retained.iter().map(|&i| names[i].clone()).collect(),
        retained_variables: winner.retained,
        filter: winner.filter,
        cop,
        delta_cop: options.delta_cop,
        scheme: options.scheme,
        significance_thresholds: thresholds,
        correlations: matrix,
        runner_up_log: log,
        unfiltered_log,
        sensitivity,
    };
    Ok(Mop { result, model, quality, validation_predictions: preds })
}

#[allow(clippy::too_many_arguments)]
fn sensitivity_report<T: Real>(
    table: &DesignTable<T>,
    sub: &DesignTable<T>,
    response: &str,
    retained: &[usize],
    model: &Metamodel<T>,
    trainer: &KindTrainer<T>,
    cop: T,
    options: &MopOptions<T>,
    partition: Option<&crate::dataset::SubsetPartition>,
) -> Result<SensitivityReport<T>> {
    let (dists, source) = sensitivity::input_distributions(table, retained)?;
    let indices = sensitivity::total_indices(model, &dists, options.sensitivity_samples, options.sensitivity_seed)?;
    let scaled = sensitivity::scaled_indices(&indices.total, cop);
    let all: Vec<usize> = (0..retained.len()).collect();
    let coi = importance_scores(sub, response, &all)?.coi;
    let m = retained.len();
    let reductions: Vec<T> = (0..m)
        .into_par_iter()
        .map(|i| {
            if m == 1 {
                return Ok(cop);
            }
            let reduced = sub.project(&(0..m).filter(|&k| k != i).collect::<Vec<_>>())?;
            let reduced_cop = match partition {
                Some(p) => quality::cop_with_partition(&reduced, response, trainer, p),
                None => quality::estimate_cop(&reduced, response, trainer, &options.scheme),
            }?;
            Ok(cop - reduced_cop)
        })
        .collect::<Result<_>>()?;
    let mut per_variable = BTreeMap::new();
    for var in table.variables() {
        let entry = match retained.iter().position(|&r| r == var.index) {
            Some(k) => VariableSensitivity {
                index: var.index,
                coi: coi[k],
                cop_reduction: reductions[k],
                total_index: indices.total[k],
                first_order_index: indices.first_order[k],
                total_index_scaled: scaled[k],
            },
            None => VariableSensitivity {
                index: var.index,
                coi: T::zero(),
                cop_reduction: T::zero(),
                total_index: T::zero(),
                first_order_index: T::zero(),
                total_index_scaled: T::zero(),
            },
        };
        per_variable.insert(var.name.clone(), entry);
    }
    Ok(SensitivityReport {
        total_cop: cop,
        per_variable,
        estimator_samples: options.sensitivity_samples,
        seed: options.sensitivity_seed,
        distribution_source: source,
        unsuitable: cop < T::zero(),
    })
}
