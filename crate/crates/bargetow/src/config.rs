//! Pipeline settings from built-in defaults, a `key = value` file and flags.
//!
//! Keys are flat and namespaced by stage (`stop.radius_m`,
//! `features.entropy_bins_course`, ...). Later sources override earlier ones:
//! defaults, then the file, then command-line flags.

use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use bargetow_core::features::FeatureConfig;
use bargetow_core::fusion::DEFAULT_WINDOW_S;
use bargetow_core::models::{
    AdaBoostParams, ElasticNetParams, Family, ForestParams, Hyperparams, ModelSpec, PoissonParams,
};
use bargetow_core::synth::SynthConfig;
use bargetow_core::trajectory::StopParams;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub stop: StopParams,
    pub features: FeatureConfig,
    pub window_s: i64,
    pub k: usize,
    /// Seed for fold assignment.
    pub fold_seed: u64,
    pub family: Family,
    /// Seed for randomized model families.
    pub model_seed: u64,
    pub poisson: PoissonParams,
    pub elasticnet: ElasticNetParams,
    pub forest: ForestParams,
    pub adaboost: AdaBoostParams,
    pub synth: SynthConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            stop: StopParams::default(),
            features: FeatureConfig::default(),
            window_s: DEFAULT_WINDOW_S,
            k: 2,
            fold_seed: 42,
            family: Family::Poisson,
            model_seed: 42,
            poisson: PoissonParams::default(),
            elasticnet: ElasticNetParams::default(),
            forest: ForestParams::default(),
            adaboost: AdaBoostParams::default(),
            synth: SynthConfig::default(),
        }
    }
}

/// Every recognized key, in the order they are echoed.
pub const KEYS: &[&str] = &[
    "stop.max_speed_kn",
    "stop.min_duration_min",
    "stop.radius_m",
    "stop.max_gap_min",
    "stop.min_trip_points",
    "features.entropy_bins_speed",
    "features.entropy_bins_course",
    "features.low_speed_kn",
    "features.high_speed_kn",
    "features.optimal_low_kn",
    "features.optimal_high_kn",
    "features.min_direct_km",
    "fusion.window_s",
    "eval.k",
    "eval.seed",
    "model.family",
    "model.seed",
    "poisson.l2",
    "poisson.tol",
    "poisson.max_iter",
    "elasticnet.alpha",
    "elasticnet.l1_ratio",
    "elasticnet.tol",
    "elasticnet.max_sweeps",
    "forest.n_trees",
    "forest.mtry",
    "forest.min_leaf",
    "forest.max_depth",
    "forest.bootstrap",
    "adaboost.n_estimators",
    "adaboost.base_depth",
    "synth.n_samples",
    "synth.barge_min",
    "synth.barge_max",
    "synth.base_speed_kn",
    "synth.course_noise_scale",
    "synth.speed_noise_scale",
    "synth.ping_interval_s",
    "synth.duration_min_hrs",
    "synth.duration_max_hrs",
    "synth.skew",
    "synth.seed",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Usage(format!("invalid value {value:?} for {key}")))
}

/// `none` means unset.
fn parse_opt<T: FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    if value == "none" {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

fn show_opt<T: Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "none".to_string())
}

impl PipelineConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "stop.max_speed_kn" => self.stop.max_speed_kn = parse(key, v)?,
            "stop.min_duration_min" => self.stop.min_duration_min = parse(key, v)?,
            "stop.radius_m" => self.stop.radius_m = parse(key, v)?,
            "stop.max_gap_min" => self.stop.max_gap_min = parse(key, v)?,
            "stop.min_trip_points" => self.stop.min_trip_points = parse(key, v)?,
            "features.entropy_bins_speed" => self.features.entropy_bins_speed = parse(key, v)?,
            "features.entropy_bins_course" => self.features.entropy_bins_course = parse(key, v)?,
            "features.low_speed_kn" => self.features.low_speed_kn = parse(key, v)?,
            "features.high_speed_kn" => self.features.high_speed_kn = parse(key, v)?,
            "features.optimal_low_kn" => self.features.optimal_range_kn.0 = parse(key, v)?,
            "features.optimal_high_kn" => self.features.optimal_range_kn.1 = parse(key, v)?,
            "features.min_direct_km" => self.features.min_direct_km = parse(key, v)?,
            "fusion.window_s" => self.window_s = parse(key, v)?,
            "eval.k" => self.k = parse(key, v)?,
            "eval.seed" => self.fold_seed = parse(key, v)?,
            "model.family" => {
                self.family = Family::from_name(v).ok_or_else(|| {
                    Error::Usage(format!(
                        "unknown model family {v:?} (expected one of {})",
                        Family::ALL.map(|f| f.name()).join(", ")
                    ))
                })?
            }
            "model.seed" => self.model_seed = parse(key, v)?,
            "poisson.l2" => self.poisson.l2 = parse(key, v)?,
            "poisson.tol" => self.poisson.tol = parse(key, v)?,
            "poisson.max_iter" => self.poisson.max_iter = parse(key, v)?,
            "elasticnet.alpha" => self.elasticnet.alpha = parse(key, v)?,
            "elasticnet.l1_ratio" => self.elasticnet.l1_ratio = parse(key, v)?,
            "elasticnet.tol" => self.elasticnet.tol = parse(key, v)?,
            "elasticnet.max_sweeps" => self.elasticnet.max_sweeps = parse(key, v)?,
            "forest.n_trees" => self.forest.n_trees = parse(key, v)?,
            "forest.mtry" => self.forest.mtry = parse_opt(key, v)?,
            "forest.min_leaf" => self.forest.min_leaf = parse(key, v)?,
            "forest.max_depth" => self.forest.max_depth = parse_opt(key, v)?,
            "forest.bootstrap" => self.forest.bootstrap = parse(key, v)?,
            "adaboost.n_estimators" => self.adaboost.n_estimators = parse(key, v)?,
            "adaboost.base_depth" => self.adaboost.base_depth = parse(key, v)?,
            "synth.n_samples" => self.synth.n_samples = parse(key, v)?,
            "synth.barge_min" => self.synth.barge_count_range.0 = parse(key, v)?,
            "synth.barge_max" => self.synth.barge_count_range.1 = parse(key, v)?,
            "synth.base_speed_kn" => self.synth.base_speed_kn = parse(key, v)?,
            "synth.course_noise_scale" => self.synth.course_noise_scale = parse(key, v)?,
            "synth.speed_noise_scale" => self.synth.speed_noise_scale = parse(key, v)?,
            "synth.ping_interval_s" => self.synth.ping_interval_s = parse(key, v)?,
            "synth.duration_min_hrs" => self.synth.trip_duration_range_hrs.0 = parse(key, v)?,
            "synth.duration_max_hrs" => self.synth.trip_duration_range_hrs.1 = parse(key, v)?,
            "synth.skew" => self.synth.skew = parse(key, v)?,
            "synth.seed" => self.synth.seed = parse(key, v)?,
            _ => return Err(Error::Usage(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "stop.max_speed_kn" => self.stop.max_speed_kn.to_string(),
            "stop.min_duration_min" => self.stop.min_duration_min.to_string(),
            "stop.radius_m" => self.stop.radius_m.to_string(),
            "stop.max_gap_min" => self.stop.max_gap_min.to_string(),
            "stop.min_trip_points" => self.stop.min_trip_points.to_string(),
            "features.entropy_bins_speed" => self.features.entropy_bins_speed.to_string(),
            "features.entropy_bins_course" => self.features.entropy_bins_course.to_string(),
            "features.low_speed_kn" => self.features.low_speed_kn.to_string(),
            "features.high_speed_kn" => self.features.high_speed_kn.to_string(),
            "features.optimal_low_kn" => self.features.optimal_range_kn.0.to_string(),
            "features.optimal_high_kn" => self.features.optimal_range_kn.1.to_string(),
            "features.min_direct_km" => self.features.min_direct_km.to_string(),
            "fusion.window_s" => self.window_s.to_string(),
            "eval.k" => self.k.to_string(),
            "eval.seed" => self.fold_seed.to_string(),
            "model.family" => self.family.name().to_string(),
            "model.seed" => self.model_seed.to_string(),
            "poisson.l2" => self.poisson.l2.to_string(),
            "poisson.tol" => self.poisson.tol.to_string(),
            "poisson.max_iter" => self.poisson.max_iter.to_string(),
            "elasticnet.alpha" => self.elasticnet.alpha.to_string(),
            "elasticnet.l1_ratio" => self.elasticnet.l1_ratio.to_string(),
            "elasticnet.tol" => self.elasticnet.tol.to_string(),
            "elasticnet.max_sweeps" => self.elasticnet.max_sweeps.to_string(),
            "forest.n_trees" => self.forest.n_trees.to_string(),
            "forest.mtry" => show_opt(self.forest.mtry),
            "forest.min_leaf" => self.forest.min_leaf.to_string(),
            "forest.max_depth" => show_opt(self.forest.max_depth),
            "forest.bootstrap" => self.forest.bootstrap.to_string(),
            "adaboost.n_estimators" => self.adaboost.n_estimators.to_string(),
            "adaboost.base_depth" => self.adaboost.base_depth.to_string(),
            "synth.n_samples" => self.synth.n_samples.to_string(),
            "synth.barge_min" => self.synth.barge_count_range.0.to_string(),
            "synth.barge_max" => self.synth.barge_count_range.1.to_string(),
            "synth.base_speed_kn" => self.synth.base_speed_kn.to_string(),
            "synth.course_noise_scale" => self.synth.course_noise_scale.to_string(),
            "synth.speed_noise_scale" => self.synth.speed_noise_scale.to_string(),
            "synth.ping_interval_s" => self.synth.ping_interval_s.to_string(),
            "synth.duration_min_hrs" => self.synth.trip_duration_range_hrs.0.to_string(),
            "synth.duration_max_hrs" => self.synth.trip_duration_range_hrs.1.to_string(),
            "synth.skew" => self.synth.skew.to_string(),
            "synth.seed" => self.synth.seed.to_string(),
            _ => return None,
        })
    }

    /// All keys with their effective values, in [`KEYS`] order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        KEYS.iter().map(|k| (*k, self.get(k).expect("every listed key is readable"))).collect()
    }

    /// Applies a `key = value` file. `#` starts a comment; blank lines are
    /// ignored; a key may appear once.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("{origin}:{}: expected key = value", n + 1)))?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::Usage(format!("{origin}:{}: {key} given twice", n + 1)));
            }
            self.set(key, value).map_err(|e| Error::Usage(format!("{origin}:{}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text, &path.display().to_string())
    }

    /// Hyperparameters of the configured family with the model seed.
    pub fn model_spec(&self) -> ModelSpec {
        let hp = match self.family {
            Family::Poisson => Hyperparams::Poisson(self.poisson),
            Family::ElasticNet => Hyperparams::ElasticNet(self.elasticnet),
            Family::RandomForest => Hyperparams::RandomForest(self.forest),
            Family::AdaBoostR2 => Hyperparams::AdaBoostR2(self.adaboost),
        };
        ModelSpec::new(hp, self.model_seed)
    }

    pub fn validate(&self) -> Result<()> {
        let usage = |e: bargetow_core::Error| Error::Usage(e.to_string());
        self.stop.validate().map_err(usage)?;
        self.features.validate().map_err(usage)?;
        self.synth.validate().map_err(usage)?;
        if self.window_s < 0 {
            return Err(Error::Usage("fusion.window_s must be non-negative".into()));
        }
        if self.k < 2 {
            return Err(Error::Usage("eval.k must be at least 2".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_key_round_trips() {
        let base = PipelineConfig::default();
        for (k, v) in base.entries() {
            let mut c = PipelineConfig::default();
            c.set(k, &v).unwrap();
            assert_eq!(c, base, "{k}");
        }
    }

    #[test]
    fn file_then_override() {
        let mut c = PipelineConfig::default();
        c.apply_text("# paper-style stops\nstop.radius_m = 250\nforest.max_depth = 4 # trailing\n\n", "cfg").unwrap();
        assert_eq!(c.stop.radius_m, 250.0);
        assert_eq!(c.forest.max_depth, Some(4));
        c.set("stop.radius_m", "300").unwrap();
        assert_eq!(c.stop.radius_m, 300.0);
    }

    #[test]
    fn bad_input_is_a_usage_error() {
        let mut c = PipelineConfig::default();
        for text in ["stop.nope = 1", "stop.radius_m", "stop.radius_m = x", "eval.k = 2\neval.k = 3"] {
            assert!(matches!(c.apply_text(text, "cfg"), Err(Error::Usage(_))), "{text}");
        }
    }
}
