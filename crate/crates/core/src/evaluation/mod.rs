//! Stratified folds, MAE, cross-validation, recursive feature elimination and
//! selection-frequency tallies.

mod cv;
mod folds;
mod rfecv;

use alloc::string::String;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

pub use cv::{cross_validate, CvReport, FoldResult};
pub use folds::{stratified_kfold, FoldAssignment};
pub use rfecv::{rfecv, RfecvResult, SubsetScore};

/// Mean absolute error between true counts and predictions.
pub fn mae(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    if actual.len() != predicted.len() {
        return Err(Error::contract(alloc::format!(
            "mae over {} actual vs {} predicted values",
            actual.len(),
            predicted.len()
        )));
    }
    if actual.is_empty() {
        return Err(Error::contract("mae over an empty set"));
    }
    Ok(actual.iter().zip(predicted).map(|(a, p)| math::abs(a - p)).sum::<f64>() / actual.len() as f64)
}

/// How many results retained each feature; descending count, ties alphabetical.
pub fn selection_frequency<'a>(results: impl IntoIterator<Item = &'a RfecvResult>) -> Vec<(String, usize)> {
    let mut counts: alloc::collections::BTreeMap<&str, usize> = alloc::collections::BTreeMap::new();
    for r in results {
        for f in &r.chosen {
            *counts.entry(f.as_str()).or_default() += 1;
        }
    }
    let mut table: Vec<(String, usize)> = counts.into_iter().map(|(k, v)| (String::from(k), v)).collect();
    table.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    table
}
