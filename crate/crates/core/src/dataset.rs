//! Sample tables, variable metadata, seeded sampling and fold bookkeeping.

use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use rand::distr::Open01;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{MopError, Result};
use crate::scalar::Real;

/// Deterministic generator used for every seeded stream in the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Input distribution known to the built-in samplers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", bound = "T: Real")]
pub enum Distribution<T> {
    Uniform { lower: T, upper: T },
    Normal { mean: T, std_dev: T },
}

impl<T: Real> Distribution<T> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Distribution::Uniform { lower, upper } if !(lower < upper) => Err(
                MopError::InvalidArgument(format!("uniform bounds require lower < upper, got [{lower}, {upper}]")),
            ),
            Distribution::Normal { std_dev, .. } if !(std_dev > T::zero()) => Err(
                MopError::InvalidArgument(format!("normal std_dev must be positive, got {std_dev}")),
            ),
            _ => Ok(()),
        }
    }

    /// Inverse CDF at probability `u` in (0, 1).
    pub fn quantile(&self, u: f64) -> T {
        match *self {
            Distribution::Uniform { lower, upper } => lower + (upper - lower) * T::of(u),
            Distribution::Normal { mean, std_dev } => {
                let z = Normal::standard().inverse_cdf(u);
                mean + std_dev * T::of(z)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let u: f64 = rng.sample(Open01);
        self.quantile(u)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct VariableMeta<T> {
    pub name: String,
    /// Sampling distribution; `None` for columns ingested from files.
    pub kind: Option<Distribution<T>>,
    pub index: usize,
}

impl<T: Real> VariableMeta<T> {
    pub fn new(name: impl Into<String>, kind: Option<Distribution<T>>, index: usize) -> Self {
        Self { name: name.into(), kind, index }
    }

    pub fn uniform(name: impl Into<String>, lower: T, upper: T, index: usize) -> Self {
        Self::new(name, Some(Distribution::Uniform { lower, upper }), index)
    }

    pub fn normal(name: impl Into<String>, mean: T, std_dev: T, index: usize) -> Self {
        Self::new(name, Some(Distribution::Normal { mean, std_dev }), index)
    }
}

/// Support points: `n` samples of `m` inputs plus named response columns.
///
/// Inputs are stored per variable. A table is never mutated after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignTable<T> {
    columns: Vec<Vec<T>>,
    responses: BTreeMap<String, Vec<T>>,
    variables: Vec<VariableMeta<T>>,
}

impl<T: Real> DesignTable<T> {
    /// Builds a table from per-variable columns. Variable `index` fields are
    /// rewritten to match column positions.
    pub fn new(
        mut variables: Vec<VariableMeta<T>>,
        columns: Vec<Vec<T>>,
        responses: BTreeMap<String, Vec<T>>,
    ) -> Result<Self> {
        if columns.is_empty() {
            return Err(MopError::InvalidTable("at least one input column is required".into()));
        }
        if variables.len() != columns.len() {
            return Err(MopError::InvalidTable(format!(
                "{} variables declared for {} columns",
                variables.len(),
                columns.len()
            )));
        }
        let n = columns[0].len();
        if n == 0 {
            return Err(MopError::EmptyTable);
        }
        let mut seen = HashSet::new();
        for (i, var) in variables.iter_mut().enumerate() {
            if !seen.insert(var.name.clone()) {
                return Err(MopError::InvalidTable(format!("duplicate variable name `{}`", var.name)));
            }
            if let Some(kind) = &var.kind {
                kind.validate()?;
            }
            var.index = i;
        }
        for (name, col) in variables.iter().map(|v| &v.name).zip(&columns) {
            check_column(name, col, n)?;
        }
        for (name, col) in &responses {
            if seen.contains(name) {
                return Err(MopError::InvalidTable(format!("`{name}` is both an input and a response")));
            }
            check_column(name, col, n)?;
        }
        Ok(Self { columns, responses, variables })
    }

    /// Table of inputs only, variables named `x1..xm`.
    pub fn from_columns(columns: Vec<Vec<T>>) -> Result<Self> {
        let variables = (0..columns.len())
            .map(|i| VariableMeta::new(format!("x{}", i + 1), None, i))
            .collect();
        Self::new(variables, columns, BTreeMap::new())
    }

    /// Returns a new table with an added (or replaced) response column.
    pub fn with_response(&self, name: impl Into<String>, values: Vec<T>) -> Result<Self> {
        let mut responses = self.responses.clone();
        responses.insert(name.into(), values);
        Self::new(self.variables.clone(), self.columns.clone(), responses)
    }

    pub fn n_samples(&self) -> usize {
        self.columns[0].len()
    }

    pub fn n_inputs(&self) -> usize {
        self.columns.len()
    }

    pub fn variables(&self) -> &[VariableMeta<T>] {
        &self.variables
    }

    pub fn variable_names(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.name.clone()).collect()
    }

    pub fn column(&self, i: usize) -> &[T] {
        &self.columns[i]
    }

    pub fn columns(&self) -> &[Vec<T>] {
        &self.columns
    }

    pub fn response_names(&self) -> impl Iterator<Item = &str> {
        self.responses.keys().map(String::as_str)
    }

    pub fn response(&self, name: &str) -> Result<&[T]> {
        self.responses
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| MopError::NamedColumnAbsent(name.to_string()))
    }

    /// Copies sample `j` into `out` (length `m`).
    pub fn row_into(&self, j: usize, out: &mut [T]) {
        for (o, col) in out.iter_mut().zip(&self.columns) {
            *o = col[j];
        }
    }

    pub fn row(&self, j: usize) -> Vec<T> {
        self.columns.iter().map(|c| c[j]).collect()
    }

    /// Row-major copy of the input matrix.
    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.n_samples()).map(|j| self.row(j)).collect()
    }

    /// Restricts the table to the given input columns, in the given order.
    pub fn project(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(MopError::InvalidArgument("projection needs at least one variable".into()));
        }
        let mut seen = HashSet::new();
        for &i in keep {
            if i >= self.n_inputs() {
                return Err(MopError::IndexOutOfRange { index: i, len: self.n_inputs() });
            }
            if !seen.insert(i) {
                return Err(MopError::InvalidArgument(format!("variable index {i} repeated")));
            }
        }
        let variables = keep.iter().map(|&i| self.variables[i].clone()).collect();
        let columns = keep.iter().map(|&i| self.columns[i].clone()).collect();
        Self::new(variables, columns, self.responses.clone())
    }

    /// Table restricted to the given sample rows.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let pick = |col: &Vec<T>| rows.iter().map(|&j| col[j]).collect::<Vec<_>>();
        let columns = self.columns.iter().map(pick).collect();
        let responses = self.responses.iter().map(|(k, v)| (k.clone(), pick(v))).collect();
        Self::new(self.variables.clone(), columns, responses)
    }

    pub fn load_csv(path: impl AsRef<Path>, response_names: &[&str]) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(file, response_names)
    }

    /// Parses comma-separated data with a header row. Columns not listed in
    /// `response_names` become inputs in header order.
    pub fn read_csv<R: Read>(reader: R, response_names: &[&str]) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).delimiter(b',').from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let mut response_cols = Vec::with_capacity(response_names.len());
        for &name in response_names {
            let pos = header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| MopError::NamedColumnAbsent(name.to_string()))?;
            response_cols.push(pos);
        }
        let input_cols: Vec<usize> = (0..header.len()).filter(|c| !response_cols.contains(c)).collect();
        let mut data: Vec<Vec<T>> = vec![Vec::new(); header.len()];
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != header.len() {
                return Err(MopError::InvalidTable(format!(
                    "data row {row} has {} fields, header has {}",
                    record.len(),
                    header.len()
                )));
            }
            for (col, cell) in record.iter().enumerate() {
                let value = cell
                    .trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| MopError::MalformedCell { row, col, value: cell.to_string() })?;
                data[col].push(T::of(value));
            }
        }
        if data.first().is_none_or(Vec::is_empty) {
            return Err(MopError::EmptyTable);
        }
        let variables = input_cols
            .iter()
            .enumerate()
            .map(|(i, &c)| VariableMeta::new(header[c].clone(), None, i))
            .collect();
        let columns = input_cols.iter().map(|&c| std::mem::take(&mut data[c])).collect();
        let responses = response_names
            .iter()
            .zip(&response_cols)
            .map(|(name, &c)| (name.to_string(), std::mem::take(&mut data[c])))
            .collect();
        Self::new(variables, columns, responses)
    }

    /// Writes inputs then responses, values in shortest round-trip form.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let header: Vec<&str> = self
            .variables
            .iter()
            .map(|v| v.name.as_str())
            .chain(self.responses.keys().map(String::as_str))
            .collect();
        wtr.write_record(&header)?;
        for j in 0..self.n_samples() {
            let record: Vec<String> = self
                .columns
                .iter()
                .chain(self.responses.values())
                .map(|c| c[j].to_string())
                .collect();
            wtr.write_record(&record)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn check_column<T: Real>(name: &str, col: &[T], n: usize) -> Result<()> {
    if col.len() != n {
        return Err(MopError::InvalidTable(format!("column `{name}` has {} values, expected {n}", col.len())));
    }
    if let Some(row) = col.iter().position(|v| !v.is_finite_value()) {
        return Err(MopError::InvalidTable(format!("column `{name}` has a non-finite value at row {row}")));
    }
    Ok(())
}

/// Latin hypercube design over the given distributions. The returned table
/// carries no responses.
pub fn sample_lhs<T: Real>(variables: &[VariableMeta<T>], n: usize, seed: u64) -> Result<DesignTable<T>> {
    if n == 0 {
        return Err(MopError::EmptyTable);
    }
    let distributions = variables
        .iter()
        .map(|var| {
            var.kind.clone().ok_or_else(|| {
                MopError::InvalidArgument(format!("variable `{}` has no sampling distribution", var.name))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let columns = lhs_columns(&distributions, n, &mut seeded_rng(seed))?;
    DesignTable::new(variables.to_vec(), columns, BTreeMap::new())
}

fn lhs_columns<T: Real, R: Rng + ?Sized>(
    distributions: &[Distribution<T>],
    n: usize,
    rng: &mut R,
) -> Result<Vec<Vec<T>>> {
    let mut columns = Vec::with_capacity(distributions.len());
    for dist in distributions {
        dist.validate()?;
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(rng);
        let col = strata
            .into_iter()
            .map(|k| {
                let r: f64 = rng.sample(Open01);
                dist.quantile((k as f64 + r) / n as f64)
            })
            .collect();
        columns.push(col);
    }
    Ok(columns)
}

/// Latin hypercube sample of `n` rows, row-major.
pub fn sample_lhs_rows<T: Real, R: Rng + ?Sized>(
    distributions: &[Distribution<T>],
    n: usize,
    rng: &mut R,
) -> Result<Vec<Vec<T>>> {
    let columns = lhs_columns(distributions, n, rng)?;
    Ok((0..n).map(|j| columns.iter().map(|c| c[j]).collect()).collect())
}

/// Plain Monte Carlo sample of `n` rows, row-major.
pub fn sample_monte_carlo<T: Real, R: Rng + ?Sized>(
    distributions: &[Distribution<T>],
    n: usize,
    rng: &mut R,
) -> Vec<Vec<T>> {
    (0..n).map(|_| distributions.iter().map(|d| d.sample(rng)).collect()).collect()
}

/// Assignment of samples to `q` cross-validation subsets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetPartition {
    pub q: usize,
    pub assignment: Vec<usize>,
    pub seed: u64,
}

impl SubsetPartition {
    pub fn n_samples(&self) -> usize {
        self.assignment.len()
    }

    pub fn subset(&self, i: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&j| self.assignment[j] == i).collect()
    }

    pub fn complement(&self, i: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&j| self.assignment[j] != i).collect()
    }

    pub fn subset_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.q];
        for &a in &self.assignment {
            sizes[a] += 1;
        }
        sizes
    }
}

/// Balanced seeded assignment of `n` samples to `q` subsets.
pub fn make_partition(n: usize, q: usize, seed: u64) -> Result<SubsetPartition> {
    if q < 2 || q > n {
        return Err(MopError::InvalidPartition(format!("need 2 <= q <= n, got q = {q}, n = {n}")));
    }
    let mut assignment: Vec<usize> = (0..n).map(|j| j % q).collect();
    assignment.shuffle(&mut seeded_rng(seed));
    Ok(SubsetPartition { q, assignment, seed })
}

/// Seeded train/test split. Returns `(train, test)` row indices, each sorted.
pub fn make_split(n: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(MopError::InvalidArgument(format!("train fraction {train_fraction} not in (0, 1)")));
    }
    let n_train = (train_fraction * n as f64).round() as usize;
    if n_train == 0 || n_train >= n {
        return Err(MopError::InvalidArgument(format!(
            "train fraction {train_fraction} on {n} samples leaves an empty part"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seeded_rng(seed));
    let mut train = order[..n_train].to_vec();
    let mut test = order[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}
