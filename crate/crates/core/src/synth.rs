//! Synthetic tows for exercising the pipeline without real labeled data.
//!
//! The generator encodes a simple assumption: bigger tows steer and hold speed
//! more steadily, so course and speed noise shrink as `1 / (1 + barges)` and
//! the mean speed drops by 0.15 kn per barge. These effect sizes are test
//! fixtures, not measurements.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::ais::{AisRecord, Heading};
use crate::features::{extract_all, FeatureConfig};
use crate::fusion::{impute_labeled, ImputationReport, LabeledSample, Pending, TripRef};
use crate::geo::{destination, wrap_degrees, GeoPoint, KM_PER_NMI};
use crate::math;
use crate::models::DesignMatrix;
use crate::time::Timestamp;
use crate::trajectory::Trip;
use crate::{Error, Result};

/// Speeds never drop below this, keeping every synthetic trip clearly underway.
pub const MIN_SPEED_KN: f64 = 1.5;
const SPEED_DROP_PER_BARGE_KN: f64 = 0.15;
const START_TIME: i64 = 1_600_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_samples: usize,
    /// Inclusive.
    pub barge_count_range: (u32, u32),
    pub base_speed_kn: f64,
    /// Course noise standard deviation (degrees) for an empty towboat.
    pub course_noise_scale: f64,
    /// Speed coefficient of variation for an empty towboat.
    pub speed_noise_scale: f64,
    pub ping_interval_s: i64,
    pub trip_duration_range_hrs: (f64, f64),
    /// Draw small tows more often than large ones.
    pub skew: bool,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_samples: 200,
            barge_count_range: (0, 12),
            base_speed_kn: 6.0,
            course_noise_scale: 8.0,
            speed_noise_scale: 0.3,
            ping_interval_s: 60,
            trip_duration_range_hrs: (1.0, 3.0),
            skew: true,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.barge_count_range;
        if lo > hi {
            return Err(Error::domain("barge count range is empty"));
        }
        let (dlo, dhi) = self.trip_duration_range_hrs;
        if !(dlo > 0.0 && dlo <= dhi && dhi.is_finite()) {
            return Err(Error::domain("trip duration range must be positive and non-empty"));
        }
        if self.ping_interval_s <= 0 {
            return Err(Error::domain("ping interval must be positive"));
        }
        if (dlo * 3600.0) < self.ping_interval_s as f64 {
            return Err(Error::domain("shortest trip must span at least one ping interval"));
        }
        let finite_nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !(self.base_speed_kn.is_finite() && self.base_speed_kn > 0.0)
            || !finite_nonneg(self.course_noise_scale)
            || !finite_nonneg(self.speed_noise_scale)
        {
            return Err(Error::domain("speed and noise scales must be finite, speed positive"));
        }
        Ok(())
    }
}

/// One simulated trip for a tow of `barge_count` barges.
///
/// The course follows a sinusoidal meander around a random base bearing plus
/// independent per-ping noise; speeds are drawn around the count-dependent
/// mean. Positions integrate the mean of adjacent speeds along each leg.
pub fn generate_trip(barge_count: u32, cfg: &SynthConfig, seed: u64) -> Result<Trip> {
    cfg.validate()?;
    let (lo, hi) = cfg.barge_count_range;
    if barge_count < lo || barge_count > hi {
        return Err(Error::domain(format!("barge count {barge_count} outside [{lo}, {hi}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (dlo, dhi) = cfg.trip_duration_range_hrs;
    let hours = if dlo < dhi { rng.random_range(dlo..=dhi) } else { dlo };
    let n = (math::floor(hours * 3600.0 / cfg.ping_interval_s as f64) as usize + 1).max(2);

    let b = barge_count as f64;
    let damp = 1.0 / (1.0 + b);
    let mean_speed = (cfg.base_speed_kn - SPEED_DROP_PER_BARGE_KN * b).max(MIN_SPEED_KN);
    let base_course = rng.random_range(0.0..360.0);
    let amplitude = rng.random_range(5.0..20.0);
    let period_s = rng.random_range(1800.0..5400.0);
    let phase = rng.random_range(0.0..core::f64::consts::TAU);
    let start = GeoPoint::new(rng.random_range(29.0..38.0), rng.random_range(-91.0..-85.0))?;
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");

    let mut courses = Vec::with_capacity(n);
    let mut speeds = Vec::with_capacity(n);
    let mut crab = Vec::with_capacity(n);
    for i in 0..n {
        let t = (i as i64 * cfg.ping_interval_s) as f64;
        let meander = amplitude * math::sin(core::f64::consts::TAU * t / period_s + phase);
        let course_noise = std_normal.sample(&mut rng) * cfg.course_noise_scale * damp;
        courses.push(wrap_degrees(base_course + meander + course_noise));
        let speed_noise = std_normal.sample(&mut rng) * cfg.speed_noise_scale * damp;
        speeds.push((mean_speed * (1.0 + speed_noise)).max(MIN_SPEED_KN));
        crab.push(std_normal.sample(&mut rng) * 2.0);
    }

    let vessel_id = format!("synth-{seed:016x}");
    let mut pos = start;
    let mut records = Vec::with_capacity(n);
    for i in 0..n {
        if i > 0 {
            let leg_hrs = cfg.ping_interval_s as f64 / 3600.0;
            let km = (speeds[i - 1] + speeds[i]) / 2.0 * leg_hrs * KM_PER_NMI;
            pos = destination(pos, courses[i - 1], km);
        }
        records.push(AisRecord {
            vessel_id: vessel_id.clone(),
            timestamp: Timestamp(START_TIME + i as i64 * cfg.ping_interval_s),
            lat: pos.lat,
            lon: pos.lon,
            sog: speeds[i],
            cog: courses[i],
            heading: Heading::Degrees(wrap_degrees(courses[i] + crab[i])),
            length_m: Some(20.0 + 5.0 * b),
            width_m: Some(10.0 + 0.5 * b),
            draft_m: Some(2.0 + 0.1 * b),
        });
    }
    Trip::new(records)
}

/// Draws a barge count; with `skew`, count `c` has weight `hi - c + 1`.
fn draw_count(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> u32 {
    let (lo, hi) = cfg.barge_count_range;
    if !cfg.skew {
        return rng.random_range(lo..=hi);
    }
    let total: u64 = (lo..=hi).map(|c| (hi - c + 1) as u64).sum();
    let mut pick = rng.random_range(0..total);
    for c in lo..=hi {
        let w = (hi - c + 1) as u64;
        if pick < w {
            return c;
        }
        pick -= w;
    }
    hi
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthDataset {
    pub samples: Vec<LabeledSample>,
    pub trips: Vec<Trip>,
    pub imputation: ImputationReport,
}

/// `n_samples` labeled trips with features, sample `i` identified as
/// `synth-{i:05}`.
pub fn generate_labeled_dataset(cfg: &SynthConfig, features: &FeatureConfig) -> Result<SynthDataset> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut trips = Vec::with_capacity(cfg.n_samples);
    let mut rows = Vec::with_capacity(cfg.n_samples);
    let mut ids: Vec<String> = Vec::with_capacity(cfg.n_samples);
    for i in 0..cfg.n_samples {
        let count = draw_count(cfg, &mut rng);
        let trip_seed: u64 = rng.random();
        let trip = generate_trip(count, cfg, trip_seed)?;
        rows.push((extract_all(&trip, features)?, count));
        ids.push(format!("synth-{i:05}"));
        trips.push(trip);
    }
    let labeled = rows
        .iter()
        .zip(&ids)
        .zip(&trips)
        .map(|(((fv, c), id), t)| Pending {
            detection_id: id,
            trip: TripRef::of(t),
            trip_index: 0,
            features: *fv,
            count: *c,
        })
        .collect();
    let (samples, imputation) = impute_labeled(labeled);
    Ok(SynthDataset { samples, trips, imputation })
}

/// A count-regression problem with known support: `n_informative` standard
/// normal columns `inf0..` drive a Poisson target through a log link, and
/// `n_noise` columns `noise0..` are independent of it.
pub fn generate_selection_problem(n: usize, n_informative: usize, n_noise: usize, seed: u64) -> Result<DesignMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let names: Vec<String> =
        (0..n_informative).map(|j| format!("inf{j}")).chain((0..n_noise).map(|j| format!("noise{j}"))).collect();
    let beta: Vec<f64> = (0..n_informative).map(|j| if j % 2 == 0 { 0.45 } else { -0.45 }).collect();
    let mut rows = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..names.len()).map(|_| std_normal.sample(&mut rng)).collect();
        let eta = 1.0 + beta.iter().zip(&row).map(|(b, x)| b * x).sum::<f64>();
        let lambda = math::exp(eta);
        let y = Poisson::new(lambda).map_err(|e| Error::Numeric(e.to_string()))?.sample(&mut rng);
        rows.push(row);
        targets.push(y);
    }
    DesignMatrix::new(names, rows, targets)
}
