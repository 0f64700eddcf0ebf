//! The 39 trip-level statistics: vessel size, speed, acceleration, course and
//! heading behaviour, trip geometry, and interaction terms.
//!
//! Every value is either a finite real or `None` (explicit missing). Time
//! steps come from the actual timestamps, never from an assumed sampling rate.

mod names;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geo::{haversine_km, signed_angle_diff, unwrap_angles, KM_PER_NMI};
use crate::math;
use crate::stats::{entropy_bits, mean, quantile_sorted, sample_std, sorted};
use crate::trajectory::Trip;
use crate::{Error, Result};

pub use names::{Feature, FEATURE_COUNT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub entropy_bins_speed: usize,
    pub entropy_bins_course: usize,
    /// SOG_PCT_LOW counts time strictly below this speed.
    pub low_speed_kn: f64,
    /// SOG_PCT_HIGH counts time strictly above this speed.
    pub high_speed_kn: f64,
    /// SOG_PCT_OPT counts time inside this closed range.
    pub optimal_range_kn: (f64, f64),
    /// Below this straight-line displacement SINO_IDX is missing.
    pub min_direct_km: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            entropy_bins_speed: 10,
            entropy_bins_course: 36,
            low_speed_kn: 2.0,
            high_speed_kn: 8.0,
            optimal_range_kn: (4.0, 8.0),
            min_direct_km: 0.05,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.entropy_bins_speed < 2 || self.entropy_bins_course < 2 {
            return Err(Error::domain("entropy bin counts must be at least 2"));
        }
        if !(self.low_speed_kn < self.high_speed_kn) {
            return Err(Error::domain("low_speed_kn must be below high_speed_kn"));
        }
        let (lo, hi) = self.optimal_range_kn;
        if !(lo <= hi) {
            return Err(Error::domain("optimal speed range is empty"));
        }
        if !(self.min_direct_km >= 0.0) {
            return Err(Error::domain("min_direct_km must be non-negative"));
        }
        Ok(())
    }
}

/// The 39 named values in canonical column order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    values: [Option<f64>; FEATURE_COUNT],
}

impl Default for FeatureVector {
    fn default() -> Self {
        FeatureVector { values: [None; FEATURE_COUNT] }
    }
}

impl FeatureVector {
    pub fn from_values(values: [Option<f64>; FEATURE_COUNT]) -> Self {
        FeatureVector { values }
    }

    pub fn get(&self, f: Feature) -> Option<f64> {
        self.values[f as usize]
    }

    pub fn set(&mut self, f: Feature, v: Option<f64>) {
        self.values[f as usize] = v.filter(|x| x.is_finite());
    }

    pub fn values(&self) -> &[Option<f64>; FEATURE_COUNT] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (Feature, Option<f64>)> + '_ {
        Feature::ALL.iter().map(move |&f| (f, self.get(f)))
    }

    fn fill(&mut self, names: &[Feature], values: &[Option<f64>]) {
        for (&f, &v) in names.iter().zip(values) {
            self.set(f, v);
        }
    }

    /// Checks the value-level invariants; returns a description per violation.
    pub fn invariant_violations(&self, cfg: &FeatureConfig) -> Vec<String> {
        use Feature::*;
        let mut bad = Vec::new();
        let mut check = |ok: bool, what: &str| {
            if !ok {
                bad.push(String::from(what));
            }
        };
        let g = |f| self.get(f);
        if let (Some(min), Some(med), Some(max)) = (g(SogMin), g(SogMed), g(SogMax)) {
            check(min <= med && med <= max, "SOG_MIN <= SOG_MED <= SOG_MAX");
            if let Some(range) = g(SogRange) {
                check(range == max - min, "SOG_RANGE = SOG_MAX - SOG_MIN");
            }
        }
        for f in [SogStd, SogIqr, SogMad, AccStd, TrnStd, CogStd] {
            if let Some(v) = g(f) {
                check(v >= 0.0, f.name());
            }
        }
        let bounded = |v: Option<f64>, hi: f64| v.is_none_or(|h| (0.0..=hi + 1e-12).contains(&h));
        check(bounded(g(SogEnt), math::log2(cfg.entropy_bins_speed as f64)), "SOG_ENT bounds");
        check(bounded(g(CogEnt), math::log2(cfg.entropy_bins_course as f64)), "COG_ENT bounds");
        for f in [SogPctLow, SogPctHigh, SogPctOpt] {
            check(bounded(g(f), 100.0), f.name());
        }
        if let Some(s) = g(SinoIdx) {
            check(s >= 1.0 - 1e-6, "SINO_IDX >= 1");
        }
        let product = |a: Option<f64>, b: Option<f64>| a.zip(b).map(|(x, y)| x * y);
        check(g(Area) == product(g(Len), g(Wid)), "AREA = LEN * WID");
        check(g(DftSq) == product(g(Dft), g(Dft)), "DFT_SQ = DFT^2");
        check(g(SogMeanSq) == product(g(SogMean), g(SogMean)), "SOG_MEAN_SQ = SOG_MEAN^2");
        bad
    }
}

fn require_points(trip: &Trip, n: usize) -> Result<()> {
    if trip.len() < n {
        return Err(Error::domain(format!("trip has {} records, need at least {n}", trip.len())));
    }
    Ok(())
}

/// Per-step durations in seconds; errors on non-increasing timestamps.
fn step_seconds(trip: &Trip) -> Result<Vec<f64>> {
    trip.records
        .windows(2)
        .map(|w| {
            let dt = w[1].timestamp.seconds_since(w[0].timestamp);
            if dt <= 0 {
                Err(Error::domain("non-increasing timestamps inside trip"))
            } else {
                Ok(dt as f64)
            }
        })
        .collect()
}

pub const SPEED_FEATURES: [Feature; 13] = {
    use Feature::*;
    [SogMean, SogMed, SogStd, SogIqr, SogMad, SogMax, SogMin, SogRange, SogCv, SogPctLow, SogPctHigh, SogPctOpt, SogEnt]
};

/// Values in [`SPEED_FEATURES`] order.
pub fn speed_features(trip: &Trip, cfg: &FeatureConfig) -> Result<[Option<f64>; 13]> {
    require_points(trip, 2)?;
    let dts = step_seconds(trip)?;
    let speeds: Vec<f64> = trip.records.iter().map(|r| r.sog).collect();
    let s = sorted(&speeds);
    let n = s.len();
    let mean_s = mean(&speeds).unwrap_or(0.0);
    let med = quantile_sorted(&s, 0.5).unwrap_or(0.0);
    let std = sample_std(&speeds).unwrap_or(0.0);
    let q1 = quantile_sorted(&s, 0.25).unwrap_or(0.0);
    let q3 = quantile_sorted(&s, 0.75).unwrap_or(0.0);
    let abs_dev: Vec<f64> = speeds.iter().map(|x| math::abs(x - med)).collect();
    let mad = quantile_sorted(&sorted(&abs_dev), 0.5).unwrap_or(0.0);
    let (min, max) = (s[0], s[n - 1]);
    let cv = (mean_s != 0.0).then(|| std / mean_s);

    // Each report holds until the next one; the last one gets the mean step.
    let mean_dt = dts.iter().sum::<f64>() / dts.len() as f64;
    let weights: Vec<f64> = dts.iter().copied().chain(core::iter::once(mean_dt)).collect();
    let total_w: f64 = weights.iter().sum();
    let pct = |pred: &dyn Fn(f64) -> bool| {
        100.0 * speeds.iter().zip(&weights).filter(|(v, _)| pred(**v)).map(|(_, w)| w).sum::<f64>() / total_w
    };
    let (opt_lo, opt_hi) = cfg.optimal_range_kn;
    let pct_low = pct(&|v| v < cfg.low_speed_kn);
    let pct_high = pct(&|v| v > cfg.high_speed_kn);
    let pct_opt = pct(&|v| v >= opt_lo && v <= opt_hi);

    let span = max - min;
    let ent = if span > 0.0 {
        let bins = cfg.entropy_bins_speed;
        let mut counts = alloc::vec![0usize; bins];
        for &v in &speeds {
            let k = (math::floor((v - min) / span * bins as f64) as usize).min(bins - 1);
            counts[k] += 1;
        }
        entropy_bits(&counts)
    } else {
        0.0
    };

    Ok([
        Some(mean_s),
        Some(med),
        Some(std),
        Some(q3 - q1),
        Some(mad),
        Some(max),
        Some(min),
        Some(max - min),
        cv,
        Some(pct_low),
        Some(pct_high),
        Some(pct_opt),
        Some(ent),
    ])
}

pub const ACCELERATION_FEATURES: [Feature; 5] = {
    use Feature::*;
    [AccPosMean, AccNegMean, AccStd, AccMin, AccZc]
};

/// Accelerations in knots per minute.
fn accelerations(trip: &Trip) -> Result<Vec<f64>> {
    let dts = step_seconds(trip)?;
    Ok(trip.records.windows(2).zip(&dts).map(|(w, dt)| (w[1].sog - w[0].sog) / (dt / 60.0)).collect())
}

/// Values in [`ACCELERATION_FEATURES`] order.
pub fn acceleration_features(trip: &Trip) -> Result<[Option<f64>; 5]> {
    require_points(trip, 2)?;
    let acc = accelerations(trip)?;
    let pos: Vec<f64> = acc.iter().copied().filter(|a| *a > 0.0).collect();
    let neg: Vec<f64> = acc.iter().copied().filter(|a| *a < 0.0).collect();
    let min = acc.iter().copied().fold(f64::INFINITY, f64::min);
    let zc = (acc.len() >= 2).then(|| {
        let signs: Vec<bool> = acc.iter().filter(|a| **a != 0.0).map(|a| *a > 0.0).collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count() as f64
    });
    Ok([mean(&pos), mean(&neg), sample_std(&acc), Some(min), zc])
}

pub const COURSE_FEATURES: [Feature; 6] = {
    use Feature::*;
    [CogStd, CogEnt, TrnStd, CogTotalChange, CogHdgDiffMean, CogHdgDiffStd]
};

/// Values in [`COURSE_FEATURES`] order.
pub fn course_features(trip: &Trip, cfg: &FeatureConfig) -> Result<[Option<f64>; 6]> {
    require_points(trip, 2)?;
    let dts = step_seconds(trip)?;
    let courses: Vec<f64> = trip.records.iter().map(|r| r.cog).collect();
    let unwrapped = unwrap_angles(&courses)?;

    let bins = cfg.entropy_bins_course;
    let width = 360.0 / bins as f64;
    let mut counts = alloc::vec![0usize; bins];
    for &c in &courses {
        counts[(math::floor(c / width) as usize).min(bins - 1)] += 1;
    }

    let turns: Vec<f64> = courses.windows(2).map(|w| signed_angle_diff(w[0], w[1])).collect();
    let abs_rates: Vec<f64> = turns.iter().zip(&dts).map(|(d, dt)| math::abs(d / (dt / 60.0))).collect();
    let total_change: f64 = turns.iter().map(|d| math::abs(*d)).sum();

    let offsets: Vec<f64> =
        trip.records.iter().filter_map(|r| r.heading.degrees().map(|h| signed_angle_diff(h, r.cog))).collect();
    let (off_mean, off_std) = if offsets.len() >= 2 { (mean(&offsets), sample_std(&offsets)) } else { (None, None) };

    Ok([
        sample_std(&unwrapped),
        Some(entropy_bits(&counts)),
        sample_std(&abs_rates),
        Some(total_change),
        off_mean,
        off_std,
    ])
}

pub const GEOMETRY_FEATURES: [Feature; 4] = {
    use Feature::*;
    [DurHrs, DistKm, DistHaversineKm, SinoIdx]
};

/// Values in [`GEOMETRY_FEATURES`] order.
pub fn trip_geometry_features(trip: &Trip, cfg: &FeatureConfig) -> Result<[Option<f64>; 4]> {
    require_points(trip, 2)?;
    let dts = step_seconds(trip)?;
    let first = &trip.records[0];
    let last = &trip.records[trip.len() - 1];
    let dur_hrs = last.timestamp.seconds_since(first.timestamp) as f64 / 3600.0;
    let dist_km: f64 =
        trip.records.windows(2).zip(&dts).map(|(w, dt)| (w[0].sog + w[1].sog) / 2.0 * (dt / 3600.0)).sum::<f64>()
            * KM_PER_NMI;
    let direct = haversine_km(first.position(), last.position());
    let sino = (direct >= cfg.min_direct_km).then(|| dist_km / direct);
    Ok([Some(dur_hrs), Some(dist_km), Some(direct), sino])
}

pub const STATIC_INTERACTION_FEATURES: [Feature; 11] = {
    use Feature::*;
    [Len, Wid, Dft, Area, DltRatio, DurSogcv, SogLen, SogstdDft, SogWid, SogMeanSq, DftSq]
};

/// Values in [`STATIC_INTERACTION_FEATURES`] order, from the trip statics and
/// the already computed speed and geometry families.
pub fn static_and_interaction_features(
    trip: &Trip,
    speed: &[Option<f64>; 13],
    geometry: &[Option<f64>; 4],
) -> [Option<f64>; 11] {
    let len = trip.statics.length_m;
    let wid = trip.statics.width_m;
    let dft = trip.statics.draft_m;
    let (sog_mean, sog_std, sog_cv) = (speed[0], speed[2], speed[8]);
    let dur = geometry[0];
    let mul = |a: Option<f64>, b: Option<f64>| a.zip(b).map(|(x, y)| x * y);
    let ratio = dft.zip(len).and_then(|(d, l)| (l != 0.0).then(|| d / l));
    [
        len,
        wid,
        dft,
        mul(len, wid),
        ratio,
        mul(dur, sog_cv),
        mul(sog_mean, len),
        mul(sog_std, dft),
        mul(sog_mean, wid),
        mul(sog_mean, sog_mean),
        mul(dft, dft),
    ]
}

/// All 39 features of one trip.
pub fn extract_all(trip: &Trip, cfg: &FeatureConfig) -> Result<FeatureVector> {
    cfg.validate()?;
    let speed = speed_features(trip, cfg)?;
    let acc = acceleration_features(trip)?;
    let course = course_features(trip, cfg)?;
    let geometry = trip_geometry_features(trip, cfg)?;
    let statics = static_and_interaction_features(trip, &speed, &geometry);
    let mut fv = FeatureVector::default();
    fv.fill(&SPEED_FEATURES, &speed);
    fv.fill(&ACCELERATION_FEATURES, &acc);
    fv.fill(&COURSE_FEATURES, &course);
    fv.fill(&GEOMETRY_FEATURES, &geometry);
    fv.fill(&STATIC_INTERACTION_FEATURES, &statics);
    Ok(fv)
}
