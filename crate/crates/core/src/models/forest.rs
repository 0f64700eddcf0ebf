use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{RegressionTree, TreeConfig};
use super::{DesignMatrix, Family, Hyperparams, ModelParams, ScalerParams, TrainedModel, SCHEMA_VERSION};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Columns tried per split; `None` means `max(1, p / 3)`.
    pub mtry: Option<usize>,
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
    /// Off only for diagnostics: every tree then sees each row exactly once.
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams { n_trees: 100, mtry: None, min_leaf: 1, max_depth: None, bootstrap: true }
    }
}

/// Bagged CART trees; tree `i` draws from its own generator seeded `seed + i`.
pub fn fit_random_forest(data: &DesignMatrix, params: &ForestParams, seed: u64) -> Result<TrainedModel> {
    if params.n_trees == 0 || params.min_leaf == 0 {
        return Err(Error::domain("random forest needs n_trees >= 1 and min_leaf >= 1"));
    }
    let scaler = ScalerParams::fit(data);
    let rows = scaler.transform_matrix(data);
    let y = data.targets();
    let n = y.len();
    let p = data.n_cols();
    let cfg = TreeConfig {
        max_depth: params.max_depth,
        min_leaf: params.min_leaf,
        mtry: params.mtry.unwrap_or((p / 3).max(1)),
    };
    let all: Vec<usize> = (0..n).collect();
    let trees = (0..params.n_trees)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
            let idx: Vec<usize> =
                if params.bootstrap { (0..n).map(|_| rng.random_range(0..n)).collect() } else { all.clone() };
            RegressionTree::fit(&rows, y, &idx, cfg, &mut rng)
        })
        .collect();
    Ok(TrainedModel {
        schema_version: SCHEMA_VERSION,
        family: Family::RandomForest,
        feature_names: data.names().to_vec(),
        scaler,
        params: ModelParams::Forest { trees },
        hyperparams: Hyperparams::RandomForest(*params),
        seed,
    })
}
