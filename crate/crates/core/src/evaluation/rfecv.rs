use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{cross_validate, stratified_kfold};
use crate::models::{DesignMatrix, Family, ModelSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetScore {
    pub n_features: usize,
    pub features: Vec<String>,
    /// Negative mean cross-validated MAE.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfecvResult {
    pub family: Family,
    pub k: usize,
    pub seed: u64,
    /// First eliminated first; the last entry survived every round.
    pub elimination_order: Vec<String>,
    /// One entry per subset size, largest first.
    pub score_trace: Vec<SubsetScore>,
    pub chosen: Vec<String>,
    pub chosen_size: usize,
}

/// Targets as stratification labels; they must be non-negative integers.
pub(crate) fn count_labels(targets: &[f64]) -> Result<Vec<u32>> {
    targets
        .iter()
        .map(|&y| {
            if y >= 0.0 && y == libm::round(y) && y <= u32::MAX as f64 {
                Ok(y as u32)
            } else {
                Err(Error::contract(alloc::format!("target {y} is not a non-negative integer count")))
            }
        })
        .collect()
}

/// Recursive feature elimination scored by stratified k-fold CV.
///
/// Each round scores the current subset, refits on all rows and drops the
/// least important feature (on ties, the alphabetically last). The chosen
/// subset has the best score, preferring fewer features on ties.
pub fn rfecv(data: &DesignMatrix, spec: &ModelSpec, k: usize, seed: u64) -> Result<RfecvResult> {
    if data.n_cols() == 0 {
        return Err(Error::domain("rfecv needs at least one feature"));
    }
    let folds = stratified_kfold(&count_labels(data.targets())?, k, seed)?;
    let mut current: Vec<String> = data.names().to_vec();
    let mut eliminated = Vec::new();
    let mut trace = Vec::new();
    loop {
        let subset = data.select_columns(&current)?;
        let report = cross_validate(&subset, spec, &folds)?;
        trace.push(SubsetScore { n_features: current.len(), features: current.clone(), score: -report.mean_mae });
        if current.len() == 1 {
            eliminated.push(current.remove(0));
            break;
        }
        let importance = spec.fit(&subset)?.feature_importance();
        let (drop, _) = importance
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.1.total_cmp(&b.1).then_with(|| b.0.cmp(&a.0)))
            .map(|(i, v)| (i, v.1))
            .ok_or_else(|| Error::domain("model reported no importances"))?;
        eliminated.push(current.remove(drop));
    }

    let mut best = 0;
    for (i, s) in trace.iter().enumerate() {
        // later entries are smaller subsets
        if s.score >= trace[best].score {
            best = i;
        }
    }
    let chosen = trace[best].features.clone();
    Ok(RfecvResult {
        family: spec.family(),
        k,
        seed,
        elimination_order: eliminated,
        chosen_size: chosen.len(),
        chosen,
        score_trace: trace,
    })
}
