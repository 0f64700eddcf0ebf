use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    /// Fold index of every sample.
    pub folds: Vec<usize>,
    pub seed: u64,
    /// Stratum index of every sample after sparse strata were merged.
    pub strata: Vec<usize>,
}

impl FoldAssignment {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len()).filter(|&i| self.folds[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len()).filter(|&i| self.folds[i] != fold).collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = alloc::vec![0; self.k];
        for &f in &self.folds {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Stratifies by count value, merging strata with fewer than `k` members
/// into their nearest neighbour (lowest value first, upward on ties), then
/// deals each value's shuffled members round-robin across folds.
///
/// The deal position carries over between values and strata, so per-value,
/// per-stratum and total fold sizes all differ by at most one.
pub fn stratified_kfold(targets: &[u32], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::domain("k must be at least 2"));
    }
    if targets.len() < k {
        return Err(Error::domain(alloc::format!("{} samples cannot fill {k} folds", targets.len())));
    }
    let mut by_value: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &t) in targets.iter().enumerate() {
        by_value.entry(t).or_default().push(i);
    }
    // Each stratum: ascending list of (value, members).
    let mut strata: Vec<Vec<(u32, Vec<usize>)>> = by_value.into_iter().map(|e| alloc::vec![e]).collect();
    let size = |s: &Vec<(u32, Vec<usize>)>| s.iter().map(|(_, m)| m.len()).sum::<usize>();
    while strata.len() > 1 {
        let Some(i) = strata.iter().position(|s| size(s) < k) else { break };
        let lo = strata[i][0].0;
        let hi = strata[i][strata[i].len() - 1].0;
        let down = (i > 0).then(|| lo - strata[i - 1].last().map_or(0, |e| e.0));
        let up = strata.get(i + 1).map(|s| s[0].0 - hi);
        let into_next = match (down, up) {
            (Some(d), Some(u)) => u <= d,
            (None, _) => true,
            (_, None) => false,
        };
        let merged = strata.remove(i);
        if into_next {
            let mut target = merged;
            target.append(&mut strata[i]);
            strata[i] = target;
        } else {
            strata[i - 1].extend(merged);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = alloc::vec![0; targets.len()];
    let mut stratum_of = alloc::vec![0; targets.len()];
    let mut deal = 0usize;
    for (s, stratum) in strata.iter_mut().enumerate() {
        for (_, members) in stratum.iter_mut() {
            members.shuffle(&mut rng);
            for &i in members.iter() {
                folds[i] = deal % k;
                stratum_of[i] = s;
                deal += 1;
            }
        }
    }
    Ok(FoldAssignment { k, folds, seed, strata: stratum_of })
}
