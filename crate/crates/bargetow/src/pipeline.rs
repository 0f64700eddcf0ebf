//! Stage functions shared by the command line and tests.

use std::collections::{BTreeMap, BTreeSet};

use bargetow_core::ais::VesselTrack;
use bargetow_core::features::{extract_all, FeatureConfig};
use bargetow_core::fusion::{ImputationReport, LabeledSample};
use bargetow_core::trajectory::{reconstruct, StopParams, Trip, VesselTrips};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tables::{trip_indices, FeatureRow};

/// Stops and trips per vessel, in input order.
pub fn reconstruct_all(tracks: &[VesselTrack], params: &StopParams) -> Result<Vec<VesselTrips>> {
    Ok(tracks.par_iter().map(|t| reconstruct(t, params)).collect::<bargetow_core::Result<Vec<_>>>()?)
}

/// Features per trip, in input order.
pub fn extract_features(trips: &[Trip], cfg: &FeatureConfig) -> Result<Vec<FeatureRow>> {
    let idx = trip_indices(trips);
    Ok(trips
        .par_iter()
        .zip(idx)
        .map(|(t, i)| extract_all(t, cfg).map(|f| FeatureRow::of(t, i, f)))
        .collect::<bargetow_core::Result<Vec<_>>>()?)
}

/// Joins feature rows with counts keyed by [`trip_key`](crate::tables::trip_key)
/// and median-imputes gaps. Each labeled trip becomes a sample whose
/// detection id is its key; rows without a label are left out.
pub fn label_features(
    rows: &[FeatureRow],
    labels: &BTreeMap<String, u32>,
) -> Result<(Vec<LabeledSample>, ImputationReport)> {
    let known: BTreeSet<String> = rows.iter().map(FeatureRow::key).collect();
    if let Some(orphan) = labels.keys().find(|k| !known.contains(*k)) {
        return Err(Error::Core(bargetow_core::Error::Contract(format!("label for unknown trip {orphan}"))));
    }
    let labeled: Vec<(String, &FeatureRow)> =
        rows.iter().map(|r| (r.key(), r)).filter(|(k, _)| labels.contains_key(k)).collect();
    if labeled.is_empty() {
        return Err(bargetow_core::Error::Domain("empty training set".into()).into());
    }
    let mut report = ImputationReport::fit(labeled.iter().map(|(_, r)| &r.features));
    let samples = labeled
        .iter()
        .map(|(k, r)| LabeledSample {
            detection_id: k.clone(),
            vessel_id: r.vessel_id.clone(),
            trip_index: r.trip_index,
            start_time: r.start_time,
            end_time: r.end_time,
            features: report.impute(k, &r.features),
            barge_count: labels[k],
        })
        .collect();
    Ok((samples, report))
}
