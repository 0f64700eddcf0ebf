//! CART regression tree on standardized rows.
//!
//! Splits minimize the summed squared error of the two children. Candidate
//! columns are visited in ascending index order and thresholds in ascending
//! order; only strictly better splits replace the incumbent, so ties resolve
//! to the lowest column and then the lowest threshold.

use alloc::boxed::Box;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    Split {
        split_feature: usize,
        /// Standardized-scale threshold; `x <= threshold` goes left.
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        leaf_value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub root: Node,
    /// Raw squared-error decrease credited to each column.
    pub importances: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TreeConfig {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Columns drawn per node; `>= p` means all.
    pub mtry: usize,
}

impl RegressionTree {
    pub fn predict(&self, z: &[f64]) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { leaf_value } => return *leaf_value,
                Node::Split { split_feature, threshold, left, right } => {
                    node = if z[*split_feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn d(n: &Node) -> usize {
            match n {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + d(left).max(d(right)),
            }
        }
        d(&self.root)
    }

    /// Grows a tree on `rows[indices]`; repeated indices act as case weights.
    pub(crate) fn fit<R: Rng>(rows: &[Vec<f64>], y: &[f64], indices: &[usize], cfg: TreeConfig, rng: &mut R) -> Self {
        let p = rows.first().map_or(0, Vec::len);
        let mut grower = Grower { rows, y, cfg, rng, importances: alloc::vec![0.0; p], p };
        let mut idx = indices.to_vec();
        let root = grower.grow(&mut idx, 0);
        RegressionTree { root, importances: grower.importances }
    }
}

struct Grower<'a, R> {
    rows: &'a [Vec<f64>],
    y: &'a [f64],
    cfg: TreeConfig,
    rng: &'a mut R,
    importances: Vec<f64>,
    p: usize,
}

struct Best {
    feature: usize,
    threshold: f64,
    sse: f64,
}

fn sse_of(sum: f64, sumsq: f64, n: f64) -> f64 {
    (sumsq - sum * sum / n).max(0.0)
}

impl<R: Rng> Grower<'_, R> {
    fn grow(&mut self, idx: &mut [usize], depth: usize) -> Node {
        let n = idx.len() as f64;
        let sum: f64 = idx.iter().map(|&i| self.y[i]).sum();
        let leaf = Node::Leaf { leaf_value: sum / n };
        let first = self.y[idx[0]];
        let pure = idx.iter().all(|&i| self.y[i] == first);
        if pure || idx.len() < 2 * self.cfg.min_leaf || self.cfg.max_depth.is_some_and(|d| depth >= d) {
            return leaf;
        }
        let sumsq: f64 = idx.iter().map(|&i| self.y[i] * self.y[i]).sum();
        let parent_sse = sse_of(sum, sumsq, n);

        let Some(best) = self.best_split(idx) else {
            return leaf;
        };
        self.importances[best.feature] += (parent_sse - best.sse).max(0.0);
        let f = best.feature;
        let t = best.threshold;
        let mid = partition(idx, |i| self.rows[i][f] <= t);
        let (l, r) = idx.split_at_mut(mid);
        let left = Box::new(self.grow(l, depth + 1));
        let right = Box::new(self.grow(r, depth + 1));
        Node::Split { split_feature: f, threshold: t, left, right }
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        if self.cfg.mtry >= self.p {
            return (0..self.p).collect();
        }
        let mut f = sample(self.rng, self.p, self.cfg.mtry.max(1)).into_vec();
        f.sort_unstable();
        f
    }

    fn best_split(&mut self, idx: &[usize]) -> Option<Best> {
        let min_leaf = self.cfg.min_leaf.max(1);
        let mut best: Option<Best> = None;
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(idx.len());
        for f in self.candidate_features() {
            pairs.clear();
            pairs.extend(idx.iter().map(|&i| (self.rows[i][f], self.y[i])));
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            let total_sum: f64 = pairs.iter().map(|p| p.1).sum();
            let total_sq: f64 = pairs.iter().map(|p| p.1 * p.1).sum();
            let (mut ls, mut lsq) = (0.0, 0.0);
            let m = pairs.len();
            for k in 1..m {
                let (x_prev, y_prev) = pairs[k - 1];
                ls += y_prev;
                lsq += y_prev * y_prev;
                if k < min_leaf || m - k < min_leaf || x_prev == pairs[k].0 {
                    continue;
                }
                let sse = sse_of(ls, lsq, k as f64) + sse_of(total_sum - ls, total_sq - lsq, (m - k) as f64);
                if best.as_ref().is_none_or(|b| sse < b.sse) {
                    let mut threshold = x_prev + (pairs[k].0 - x_prev) / 2.0;
                    if !(threshold < pairs[k].0) {
                        threshold = x_prev;
                    }
                    best = Some(Best { feature: f, threshold, sse });
                }
            }
        }
        best
    }
}

/// Moves elements satisfying `pred` to the front; returns how many there are.
fn partition(idx: &mut [usize], pred: impl Fn(usize) -> bool) -> usize {
    let mut front = 0;
    for k in 0..idx.len() {
        if pred(idx[k]) {
            idx.swap(front, k);
            front += 1;
        }
    }
    front
}
