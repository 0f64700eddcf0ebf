//! Count-regression model families behind one fit / predict / importance
//! contract.
//!
//! Every family standardizes its inputs with a [`ScalerParams`] that is stored
//! in the model. Linear families report importance as the absolute
//! standardized coefficient; tree families as normalized impurity decrease.

mod adaboost;
mod forest;
mod linalg;
mod linear;
mod tree;

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::math;
use crate::{Error, Result};

pub use adaboost::{fit_adaboost, fit_adaboost_detailed, AdaBoostDiagnostics, AdaBoostParams, StopReason};
pub use forest::{fit_random_forest, ForestParams};
pub use linear::{
    fit_elasticnet, fit_elasticnet_detailed, fit_poisson, fit_poisson_detailed, ElasticNetDiagnostics,
    ElasticNetParams, PoissonDiagnostics, PoissonParams,
};
pub use tree::{Node, RegressionTree};

pub const SCHEMA_VERSION: u32 = 1;

/// Rows of named numeric features with a non-negative target each.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    names: Vec<String>,
    /// Row-major, `n_rows * names.len()`.
    data: Vec<f64>,
    targets: Vec<f64>,
}

impl DesignMatrix {
    pub fn new(names: Vec<String>, rows: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for n in &names {
            if !seen.insert(n.as_str()) {
                return Err(Error::contract(alloc::format!("duplicate column name {n}")));
            }
        }
        if rows.len() != targets.len() {
            return Err(Error::contract("row and target counts differ"));
        }
        if rows.len() < 2 {
            return Err(Error::domain("a design matrix needs at least 2 rows"));
        }
        let p = names.len();
        let mut data = Vec::with_capacity(rows.len() * p);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != p {
                return Err(Error::contract(alloc::format!("row {i} has {} values, expected {p}", r.len())));
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::domain(alloc::format!("row {i} has a missing or non-finite value")));
            }
            data.extend_from_slice(r);
        }
        if targets.iter().any(|y| !y.is_finite()) {
            return Err(Error::domain("targets must be finite"));
        }
        Ok(DesignMatrix { names, data, targets })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_rows(&self) -> usize {
        self.targets.len()
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_cols();
        &self.data[i * p..(i + 1) * p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.n_rows()).map(move |i| self.row(i))
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_rows()).map(move |i| self.data[i * self.n_cols() + j])
    }

    /// Rows at `indices`, in that order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let rows = indices.iter().map(|&i| self.row(i).to_vec()).collect();
        let targets = indices.iter().map(|&i| self.targets[i]).collect();
        DesignMatrix::new(self.names.clone(), rows, targets)
    }

    /// Columns named in `keep`, in the order given.
    pub fn select_columns(&self, keep: &[String]) -> Result<Self> {
        let idx: Vec<usize> = keep
            .iter()
            .map(|k| {
                self.names
                    .iter()
                    .position(|n| n == k)
                    .ok_or_else(|| Error::contract(alloc::format!("unknown column {k}")))
            })
            .collect::<Result<_>>()?;
        let rows = self.rows().map(|r| idx.iter().map(|&j| r[j]).collect()).collect();
        DesignMatrix::new(keep.to_vec(), rows, self.targets.clone())
    }
}

/// Per-column standardization; constant columns keep std 1 and are flagged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub constant_flags: Vec<bool>,
}

impl ScalerParams {
    /// Population (ddof = 0) mean and standard deviation of every column.
    pub fn fit(data: &DesignMatrix) -> Self {
        let n = data.n_rows() as f64;
        let mut s = ScalerParams { means: Vec::new(), stds: Vec::new(), constant_flags: Vec::new() };
        for j in 0..data.n_cols() {
            let mean = data.column(j).sum::<f64>() / n;
            let var = data.column(j).map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
            let std = math::sqrt(var);
            let constant = !(std > 1e-12 * mean.abs().max(1.0));
            s.means.push(mean);
            s.stds.push(if constant { 1.0 } else { std });
            s.constant_flags.push(constant);
        }
        s
    }

    /// Constant columns map to 0.
    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, x)| if self.constant_flags[j] { 0.0 } else { (x - self.means[j]) / self.stds[j] })
            .collect()
    }

    pub(crate) fn transform_matrix(&self, data: &DesignMatrix) -> Vec<Vec<f64>> {
        data.rows().map(|r| self.transform(r)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Poisson,
    #[serde(rename = "elasticnet")]
    ElasticNet,
    RandomForest,
    #[serde(rename = "adaboost_r2")]
    AdaBoostR2,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Poisson, Family::ElasticNet, Family::RandomForest, Family::AdaBoostR2];

    pub const fn name(self) -> &'static str {
        match self {
            Family::Poisson => "poisson",
            Family::ElasticNet => "elasticnet",
            Family::RandomForest => "random_forest",
            Family::AdaBoostR2 => "adaboost_r2",
        }
    }

    pub fn from_name(s: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.name() == s)
    }

    pub fn default_hyperparams(self) -> Hyperparams {
        match self {
            Family::Poisson => Hyperparams::Poisson(PoissonParams::default()),
            Family::ElasticNet => Hyperparams::ElasticNet(ElasticNetParams::default()),
            Family::RandomForest => Hyperparams::RandomForest(ForestParams::default()),
            Family::AdaBoostR2 => Hyperparams::AdaBoostR2(AdaBoostParams::default()),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Hyperparams {
    Poisson(PoissonParams),
    ElasticNet(ElasticNetParams),
    RandomForest(ForestParams),
    AdaBoostR2(AdaBoostParams),
}

impl Hyperparams {
    pub fn family(&self) -> Family {
        match self {
            Hyperparams::Poisson(_) => Family::Poisson,
            Hyperparams::ElasticNet(_) => Family::ElasticNet,
            Hyperparams::RandomForest(_) => Family::RandomForest,
            Hyperparams::AdaBoostR2(_) => Family::AdaBoostR2,
        }
    }
}

/// Family, hyperparameters and seed: everything needed to refit a model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub hyperparams: Hyperparams,
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(hyperparams: Hyperparams, seed: u64) -> Self {
        ModelSpec { hyperparams, seed }
    }

    pub fn family(&self) -> Family {
        self.hyperparams.family()
    }

    pub fn fit(&self, data: &DesignMatrix) -> Result<TrainedModel> {
        match self.hyperparams {
            Hyperparams::Poisson(p) => fit_poisson(data, &p),
            Hyperparams::ElasticNet(p) => fit_elasticnet(data, &p),
            Hyperparams::RandomForest(p) => fit_random_forest(data, &p, self.seed),
            Hyperparams::AdaBoostR2(p) => fit_adaboost(data, &p, self.seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelParams {
    /// Intercept and slopes on the standardized scale.
    Linear {
        intercept: f64,
        coefficients: Vec<f64>,
    },
    Boosted {
        trees: Vec<RegressionTree>,
        estimator_weights: Vec<f64>,
    },
    Forest {
        trees: Vec<RegressionTree>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub schema_version: u32,
    pub family: Family,
    pub feature_names: Vec<String>,
    pub scaler: ScalerParams,
    pub params: ModelParams,
    pub hyperparams: Hyperparams,
    pub seed: u64,
}

impl TrainedModel {
    pub fn spec(&self) -> ModelSpec {
        ModelSpec::new(self.hyperparams, self.seed)
    }

    /// Predicts counts for rows whose columns are named by `names`.
    ///
    /// `names` must be the model's feature set, in any order.
    pub fn predict(&self, names: &[String], rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        let order = self.column_order(names)?;
        rows.iter()
            .map(|r| {
                if r.len() != names.len() {
                    return Err(Error::contract("row width differs from the name list"));
                }
                let aligned: Vec<f64> = order.iter().map(|&j| r[j]).collect();
                Ok(self.predict_aligned(&aligned))
            })
            .collect()
    }

    pub fn predict_matrix(&self, data: &DesignMatrix) -> Result<Vec<f64>> {
        let order = self.column_order(data.names())?;
        Ok(data
            .rows()
            .map(|r| {
                let aligned: Vec<f64> = order.iter().map(|&j| r[j]).collect();
                self.predict_aligned(&aligned)
            })
            .collect())
    }

    fn column_order(&self, names: &[String]) -> Result<Vec<usize>> {
        let have: BTreeSet<&str> = names.iter().map(String::as_str).collect();
        let want: BTreeSet<&str> = self.feature_names.iter().map(String::as_str).collect();
        if have != want || have.len() != names.len() {
            return Err(Error::FeatureMismatch {
                missing: want.difference(&have).map(|s| s.to_string()).collect(),
                unexpected: have.difference(&want).map(|s| s.to_string()).collect(),
            });
        }
        Ok(self.feature_names.iter().map(|f| names.iter().position(|n| n == f).unwrap_or_default()).collect())
    }

    /// Row already in training column order; output clamped at 0.
    fn predict_aligned(&self, row: &[f64]) -> f64 {
        let z = self.scaler.transform(row);
        let raw = match &self.params {
            ModelParams::Linear { intercept, coefficients } => {
                let eta = intercept + z.iter().zip(coefficients).map(|(a, b)| a * b).sum::<f64>();
                match self.family {
                    // exp overflows past ~709
                    Family::Poisson => math::exp(eta.min(700.0)),
                    _ => eta,
                }
            }
            ModelParams::Forest { trees } => trees.iter().map(|t| t.predict(&z)).sum::<f64>() / trees.len() as f64,
            ModelParams::Boosted { trees, estimator_weights } => {
                adaboost::weighted_median(trees.iter().map(|t| t.predict(&z)), estimator_weights)
            }
        };
        raw.max(0.0)
    }

    /// Intercept and slopes of a linear family mapped back to raw feature
    /// units (the linear predictor for poisson, the mean for elasticnet).
    pub fn original_scale_coefficients(&self) -> Option<(f64, Vec<f64>)> {
        let ModelParams::Linear { intercept, coefficients } = &self.params else {
            return None;
        };
        let s = &self.scaler;
        let slopes: Vec<f64> = coefficients
            .iter()
            .enumerate()
            .map(|(j, b)| if s.constant_flags[j] { 0.0 } else { b / s.stds[j] })
            .collect();
        let shift: f64 = slopes.iter().zip(&s.means).map(|(b, m)| b * m).sum();
        Some((intercept - shift, slopes))
    }

    /// Non-negative importance per feature, in training order.
    pub fn feature_importance(&self) -> Vec<(String, f64)> {
        let p = self.feature_names.len();
        let scores: Vec<f64> = match &self.params {
            ModelParams::Linear { coefficients, .. } => coefficients.iter().map(|c| math::abs(*c)).collect(),
            ModelParams::Forest { trees } => {
                let mut acc = alloc::vec![0.0; p];
                for t in trees {
                    for (a, v) in acc.iter_mut().zip(&t.importances) {
                        *a += v;
                    }
                }
                normalized(acc)
            }
            ModelParams::Boosted { trees, estimator_weights } => {
                let mut acc = alloc::vec![0.0; p];
                for (t, w) in trees.iter().zip(estimator_weights) {
                    for (a, v) in acc.iter_mut().zip(normalized(t.importances.clone())) {
                        *a += w * v;
                    }
                }
                normalized(acc)
            }
        };
        self.feature_names.iter().cloned().zip(scores).collect()
    }
}

/// Scales to sum 1; an all-zero vector stays zero.
fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        v.iter_mut().for_each(|x| *x /= total);
    }
    v
}
