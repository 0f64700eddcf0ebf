mod common;

use bargetow::artifact::{read_json, write_json, Provenance};
use bargetow::config::PipelineConfig;
use bargetow::tables::{
    read_features, read_labeled, read_trips, write_features, write_labeled, write_trips, FeatureRow,
};
use bargetow_core::features::FeatureConfig;
use bargetow_core::features::{FeatureVector, FEATURE_COUNT};
use bargetow_core::models::{DesignMatrix, Family, ModelSpec, TrainedModel};
use bargetow_core::synth::{generate_labeled_dataset, generate_selection_problem, SynthConfig};
use bargetow_core::time::Timestamp;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fs::File;

fn cell() -> impl Strategy<Value = Option<f64>> {
    prop_oneof![
        1 => Just(None),
        4 => any::<f64>().prop_filter("finite", |v| v.is_finite()).prop_map(Some),
        2 => (-1e3..1e3f64).prop_map(Some),
    ]
}

fn feature_row() -> impl Strategy<Value = FeatureRow> {
    ("[a-z0-9]{1,9}", 0usize..50, 0i64..2_000_000_000, 0i64..100_000, proptest::collection::vec(cell(), FEATURE_COUNT))
        .prop_map(|(vessel_id, trip_index, start, len, cells)| FeatureRow {
            vessel_id,
            trip_index,
            start_time: Timestamp(start),
            end_time: Timestamp(start + len),
            features: FeatureVector::from_values(cells.try_into().unwrap()),
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn feature_csv_is_lossless(rows in proptest::collection::vec(feature_row(), 0..20)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.csv");
        write_features(File::create(&path).unwrap(), "# test\n", &rows).unwrap();
        let back = read_features(&path).unwrap();
        prop_assert_eq!(back.len(), rows.len());
        for (a, b) in rows.iter().zip(&back) {
            prop_assert_eq!(&a.vessel_id, &b.vessel_id);
            prop_assert_eq!(a.trip_index, b.trip_index);
            prop_assert_eq!(a.start_time, b.start_time);
            prop_assert_eq!(a.end_time, b.end_time);
            for (x, y) in a.features.values().iter().zip(b.features.values()) {
                prop_assert_eq!(x.map(f64::to_bits), y.map(f64::to_bits));
            }
        }
    }
}

#[test]
fn trips_csv_round_trips() {
    let trips: Vec<_> = (0..5).map(common::rough_trip).collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trips.csv");
    write_trips(File::create(&path).unwrap(), "", &trips).unwrap();
    assert_eq!(read_trips(&path).unwrap(), trips);
}

#[test]
fn labeled_csv_round_trips() {
    let cfg = SynthConfig { n_samples: 30, seed: 5, ..SynthConfig::default() };
    let ds = generate_labeled_dataset(&cfg, &FeatureConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("labeled.csv");
    write_labeled(File::create(&path).unwrap(), "# synth\n", &ds.samples).unwrap();
    assert_eq!(read_labeled(&path).unwrap(), ds.samples);
}

fn random_rows(n_cols: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..1000).map(|_| (0..n_cols).map(|_| rng.random_range(-4.0..4.0)).collect()).collect()
}

/// Saves and reloads a model through the JSON envelope, then compares
/// predictions bit for bit on 1000 random rows.
fn json_round_trip_is_exact(family: Family, data: &DesignMatrix) {
    let model = ModelSpec::new(family.default_hyperparams(), 11).fit(data).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    let prov = Provenance::new("train", &PipelineConfig::default(), false);
    write_json(&path, &prov, &model).unwrap();
    let back: TrainedModel = read_json(&path).unwrap().payload;
    assert_eq!(back, model);
    let rows = random_rows(data.n_cols(), 3);
    let a = model.predict(data.names(), &rows).unwrap();
    let b = back.predict(data.names(), &rows).unwrap();
    assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()), "{family:?}");
}

#[test]
fn every_family_round_trips_through_json() {
    let data = generate_selection_problem(120, 3, 2, 9).unwrap();
    for family in Family::ALL {
        json_round_trip_is_exact(family, &data);
    }
}
