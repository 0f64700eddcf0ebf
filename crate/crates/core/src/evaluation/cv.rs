use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{mae, FoldAssignment};
use crate::models::{DesignMatrix, Family, ModelSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    /// Held-out sample count.
    pub n: usize,
    /// `None` when fitting on the complement failed; see `error`.
    pub mae: Option<f64>,
    /// MAE of predicting the training-fold mean target.
    pub baseline_mae: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub family: Family,
    pub k: usize,
    pub seed: u64,
    pub per_fold: Vec<FoldResult>,
    /// Mean over the folds that fitted.
    pub mean_mae: f64,
    pub baseline_mean_mae: f64,
    #[serde(rename = "selected_features", alias = "features")]
    pub features: Vec<String>,
    /// Set when at least one fold failed to fit.
    pub warning: bool,
}

/// Fits on each fold's complement and scores the held-out fold.
pub fn cross_validate(data: &DesignMatrix, spec: &ModelSpec, folds: &FoldAssignment) -> Result<CvReport> {
    if folds.folds.len() != data.n_rows() {
        return Err(Error::contract("fold assignment does not match the data"));
    }
    let mut per_fold = Vec::with_capacity(folds.k);
    for f in 0..folds.k {
        let test_idx = folds.test_indices(f);
        let train = data.select_rows(&folds.train_indices(f));
        let test = data.select_rows(&test_idx);
        let actual: Vec<f64> = test_idx.iter().map(|&i| data.targets()[i]).collect();
        let baseline_mae = match &train {
            Ok(tr) => {
                let m = tr.targets().iter().sum::<f64>() / tr.n_rows() as f64;
                let preds = alloc::vec![m; actual.len()];
                mae(&actual, &preds)?
            }
            Err(_) => f64::NAN,
        };
        // A single held-out row is below DesignMatrix's minimum; predict row-wise instead.
        let outcome = train.and_then(|tr| spec.fit(&tr)).and_then(|model| {
            let preds = match test {
                Ok(t) => model.predict_matrix(&t)?,
                Err(_) => {
                    let rows: Vec<Vec<f64>> = test_idx.iter().map(|&i| data.row(i).to_vec()).collect();
                    model.predict(data.names(), &rows)?
                }
            };
            mae(&actual, &preds)
        });
        let (mae_value, error) = match outcome {
            Ok(v) => (Some(v), None),
            Err(e) => (None, Some(e.to_string())),
        };
        per_fold.push(FoldResult { fold: f, n: test_idx.len(), mae: mae_value, baseline_mae, error });
    }
    let ok: Vec<f64> = per_fold.iter().filter_map(|r| r.mae).collect();
    if ok.is_empty() {
        let first = per_fold.iter().find_map(|r| r.error.clone()).unwrap_or_default();
        return Err(Error::domain(alloc::format!("every fold failed to fit: {first}")));
    }
    let baseline_mean_mae = per_fold.iter().map(|r| r.baseline_mae).sum::<f64>() / per_fold.len() as f64;
    Ok(CvReport {
        family: spec.family(),
        k: folds.k,
        seed: folds.seed,
        mean_mae: ok.iter().sum::<f64>() / ok.len() as f64,
        warning: ok.len() < per_fold.len(),
        per_fold,
        baseline_mean_mae,
        features: data.names().to_vec(),
    })
}
