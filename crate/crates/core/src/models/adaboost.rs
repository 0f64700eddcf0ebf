//! AdaBoost.R2 with linear loss.
//!
//! Each round grows a depth-limited tree on a bootstrap drawn by the current
//! sample weights, scores every training row by `|error| / max |error|`, and
//! continues only while the weighted mean loss stays below 0.5. Predictions
//! are the weighted median of the per-tree outputs.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{RegressionTree, TreeConfig};
use super::{DesignMatrix, Family, Hyperparams, ModelParams, ScalerParams, TrainedModel, SCHEMA_VERSION};
use crate::math;
use crate::{Error, Result};

/// Weight given to a tree with (near) zero loss.
pub const MAX_ESTIMATOR_WEIGHT: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaBoostParams {
    pub n_estimators: usize,
    pub base_depth: usize,
}

impl Default for AdaBoostParams {
    fn default() -> Self {
        AdaBoostParams { n_estimators: 50, base_depth: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// All rounds ran.
    Exhausted,
    /// A tree fit the training rows exactly.
    PerfectFit,
    /// Weighted mean loss reached 0.5.
    LossLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaBoostDiagnostics {
    /// Weighted mean linear loss of every evaluated round, including a rejected last one.
    pub round_losses: Vec<f64>,
    pub stop: StopReason,
}

pub fn fit_adaboost(data: &DesignMatrix, params: &AdaBoostParams, seed: u64) -> Result<TrainedModel> {
    fit_adaboost_detailed(data, params, seed).map(|(m, _)| m)
}

pub fn fit_adaboost_detailed(
    data: &DesignMatrix,
    params: &AdaBoostParams,
    seed: u64,
) -> Result<(TrainedModel, AdaBoostDiagnostics)> {
    if params.n_estimators == 0 || params.base_depth == 0 {
        return Err(Error::domain("adaboost needs n_estimators >= 1 and base_depth >= 1"));
    }
    let scaler = ScalerParams::fit(data);
    let rows = scaler.transform_matrix(data);
    let y = data.targets();
    let n = y.len();
    let cfg = TreeConfig { max_depth: Some(params.base_depth), min_leaf: 1, mtry: usize::MAX };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = alloc::vec![1.0 / n as f64; n];
    let mut trees = Vec::new();
    let mut estimator_weights = Vec::new();
    let mut round_losses = Vec::new();
    let mut stop = StopReason::Exhausted;

    for _ in 0..params.n_estimators {
        let idx = weighted_bootstrap(&weights, &mut rng);
        let tree = RegressionTree::fit(&rows, y, &idx, cfg, &mut rng);
        let errors: Vec<f64> = rows.iter().zip(y).map(|(r, t)| math::abs(tree.predict(r) - t)).collect();
        let max_err = errors.iter().copied().fold(0.0, f64::max);
        if max_err == 0.0 {
            round_losses.push(0.0);
            trees.push(tree);
            estimator_weights.push(MAX_ESTIMATOR_WEIGHT);
            stop = StopReason::PerfectFit;
            break;
        }
        let losses: Vec<f64> = errors.iter().map(|e| e / max_err).collect();
        let avg: f64 = losses.iter().zip(&weights).map(|(l, w)| l * w).sum();
        round_losses.push(avg);
        if avg >= 0.5 {
            // A model needs at least one estimator; keep the first one regardless.
            if trees.is_empty() {
                trees.push(tree);
                estimator_weights.push(1.0);
            }
            stop = StopReason::LossLimit;
            break;
        }
        let beta = avg / (1.0 - avg);
        let alpha = if beta > 0.0 { math::ln(1.0 / beta).min(MAX_ESTIMATOR_WEIGHT) } else { MAX_ESTIMATOR_WEIGHT };
        trees.push(tree);
        estimator_weights.push(alpha);
        for (w, l) in weights.iter_mut().zip(&losses) {
            *w *= libm::pow(beta, 1.0 - l);
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            break;
        }
        weights.iter_mut().for_each(|w| *w /= total);
    }

    let model = TrainedModel {
        schema_version: SCHEMA_VERSION,
        family: Family::AdaBoostR2,
        feature_names: data.names().to_vec(),
        scaler,
        params: ModelParams::Boosted { trees, estimator_weights },
        hyperparams: Hyperparams::AdaBoostR2(*params),
        seed,
    };
    Ok((model, AdaBoostDiagnostics { round_losses, stop }))
}

/// `n` indices drawn with replacement with probability proportional to `weights`.
fn weighted_bootstrap<R: Rng>(weights: &[f64], rng: &mut R) -> Vec<usize> {
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in weights {
        acc += w;
        cdf.push(acc);
    }
    (0..weights.len())
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            cdf.partition_point(|c| *c <= u).min(weights.len() - 1)
        })
        .collect()
}

/// Smallest prediction whose cumulative weight reaches half the total.
pub(crate) fn weighted_median(preds: impl Iterator<Item = f64>, weights: &[f64]) -> f64 {
    let mut pw: Vec<(f64, f64)> = preds.zip(weights.iter().copied()).collect();
    pw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pw.iter().map(|p| p.1).sum();
    let mut acc = 0.0;
    for (p, w) in &pw {
        acc += w;
        if acc >= 0.5 * total {
            return *p;
        }
    }
    pw.last().map_or(0.0, |p| p.0)
}
