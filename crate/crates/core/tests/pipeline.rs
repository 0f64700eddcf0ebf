use std::collections::BTreeMap;

use bargetow_core::ais::{clean_records, AisRecord, Heading};
use bargetow_core::evaluation::{cross_validate, stratified_kfold};
use bargetow_core::features::{extract_all, FeatureConfig};
use bargetow_core::fusion::{build_labeled_dataset, match_all, Detection, TripRef, DEFAULT_WINDOW_S};
use bargetow_core::geo::{destination, GeoPoint, GeoPolygon};
use bargetow_core::models::{fit_elasticnet_detailed, DesignMatrix, ElasticNetParams, Family, ModelParams, ModelSpec};
use bargetow_core::synth::{generate_labeled_dataset, SynthConfig};
use bargetow_core::time::Timestamp;
use bargetow_core::trajectory::{reconstruct, StopParams};
use proptest::prelude::*;

const T0: i64 = 1_700_000_000;

fn rec(v: &str, t: i64, p: GeoPoint, sog: f64, length: f64) -> AisRecord {
    AisRecord {
        vessel_id: v.into(),
        timestamp: Timestamp(t),
        lat: p.lat,
        lon: p.lon,
        sog,
        cog: 90.0,
        heading: Heading::Degrees(90.0),
        length_m: Some(length),
        width_m: Some(12.0),
        draft_m: Some(2.5),
    }
}

fn footprint(c: GeoPoint) -> GeoPolygon {
    let d = 0.004;
    let ring = [(-d, -d), (-d, d), (d, d), (d, -d), (-d, -d)];
    GeoPolygon::new(ring.iter().map(|(a, b)| GeoPoint::new(c.lat + a, c.lon + b).unwrap()).collect()).unwrap()
}

#[test]
fn tracks_to_labeled_dataset_to_model() {
    // Each towboat moors, crosses its detection at T0, then moors again.
    let mut records = Vec::new();
    let mut detections = Vec::new();
    for i in 0..10 {
        let v = format!("tow{i}");
        let count = [3u32, 6][i % 2];
        let via = GeoPoint::new(29.0 + 0.1 * i as f64, -90.0).unwrap();
        let speed = 4.0 + 0.3 * i as f64;
        let step = speed * 1.852 / 60.0;
        let length = 30.0 + 8.0 * f64::from(count);
        for k in -150..=150i64 {
            let (p, sog) = match k {
                ..-60 => (destination(via, 90.0, -60.0 * step), 0.1),
                61.. => (destination(via, 90.0, 60.0 * step), 0.1),
                _ => (destination(via, 90.0, k as f64 * step), speed),
            };
            records.push(rec(&v, T0 + 60 * k, p, sog, length));
        }
        detections.push(Detection {
            detection_id: format!("d{i}"),
            scene_time: Timestamp(T0),
            footprint: footprint(via),
            barge_count: Some(count),
        });
    }
    let tracks = clean_records(records);
    let vessels: Vec<_> = tracks.iter().map(|t| reconstruct(t, &StopParams::default()).unwrap()).collect();
    let outcomes = match_all(&detections, &tracks, &vessels, DEFAULT_WINDOW_S).unwrap();
    assert!(outcomes.iter().all(|o| o.matched().is_some()));

    let cfg = FeatureConfig::default();
    let features: BTreeMap<TripRef, _> =
        vessels.iter().flat_map(|v| v.trips.iter()).map(|t| (TripRef::of(t), extract_all(t, &cfg).unwrap())).collect();
    let ds = build_labeled_dataset(&detections, &outcomes, &features).unwrap();
    assert_eq!(ds.samples.len(), 10);
    let dm = ds.design_matrix().unwrap();
    let labels: Vec<u32> = ds.samples.iter().map(|s| s.barge_count).collect();
    let folds = stratified_kfold(&labels, 2, 1).unwrap();
    for family in Family::ALL {
        let report = cross_validate(&dm, &ModelSpec::new(family.default_hyperparams(), 1), &folds).unwrap();
        assert_eq!(report.per_fold.len(), 2, "{family:?}");
        assert!(report.mean_mae.is_finite(), "{family:?}");
    }
}

#[test]
fn synthetic_counts_are_learnable_by_every_family() {
    let cfg = SynthConfig { n_samples: 120, seed: 4, ..SynthConfig::default() };
    let ds = generate_labeled_dataset(&cfg, &FeatureConfig::default()).unwrap();
    assert_eq!(ds.imputation.features.len(), 39);
    let matrix = bargetow_core::fusion::samples_to_matrix(&ds.samples).unwrap();
    let labels: Vec<u32> = ds.samples.iter().map(|s| s.barge_count).collect();
    let folds = stratified_kfold(&labels, 2, 0).unwrap();
    for family in Family::ALL {
        let r = cross_validate(&matrix, &ModelSpec::new(family.default_hyperparams(), 0), &folds).unwrap();
        assert!(r.mean_mae < r.baseline_mean_mae, "{family:?}: {} vs {}", r.mean_mae, r.baseline_mean_mae);
    }
}

fn problem() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
    (3usize..30, 1usize..5).prop_flat_map(|(n, p)| {
        (
            proptest::collection::vec(proptest::collection::vec(-10.0f64..10.0, p), n),
            proptest::collection::vec(-20.0f64..20.0, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Stationarity and subgradient conditions of the elastic-net objective,
    /// recomputed on independently standardized inputs.
    #[test]
    fn elasticnet_solutions_satisfy_kkt((rows, y) in problem(), alpha in 0.001f64..3.0, l1 in 0.0f64..=1.0) {
        let n = rows.len();
        let p = rows[0].len();
        let names = (0..p).map(|j| format!("x{j}")).collect();
        let dm = DesignMatrix::new(names, rows.clone(), y.clone()).unwrap();
        let params = ElasticNetParams { alpha, l1_ratio: l1, tol: 1e-11, max_sweeps: 100_000 };
        let (m, diag) = fit_elasticnet_detailed(&dm, &params).unwrap();
        prop_assert!(diag.converged);
        let ModelParams::Linear { intercept, coefficients } = &m.params else { panic!() };
        let mut z = rows.clone();
        for j in 0..p {
            let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n as f64;
            let sd = (rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
            for r in &mut z {
                // near-constant columns are excluded from the fit
                r[j] = if sd > 1e-12 * mean.abs().max(1.0) { (r[j] - mean) / sd } else { 0.0 };
            }
        }
        let resid: Vec<f64> = z
            .iter()
            .zip(&y)
            .map(|(r, yi)| yi - intercept - r.iter().zip(coefficients).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        for j in 0..p {
            let b = coefficients[j];
            let g = z.iter().zip(&resid).map(|(r, e)| r[j] * e).sum::<f64>() / n as f64 - alpha * (1.0 - l1) * b;
            let kkt = if b != 0.0 { (g - alpha * l1 * b.signum()).abs() } else { (g.abs() - alpha * l1).max(0.0) };
            prop_assert!(kkt < 1e-6, "column {j}: residual {kkt}");
        }
    }
}
