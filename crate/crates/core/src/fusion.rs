//! Matching satellite detections to AIS tracks and assembling the labeled
//! modeling table.
//!
//! A detection matches a vessel when that vessel reported within
//! `window_s` seconds of the scene time and the polyline through those
//! windowed reports touches the detection footprint. Features come from the
//! trip that covers the scene time.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::ais::VesselTrack;
use crate::features::{Feature, FeatureVector, FEATURE_COUNT};
use crate::geo::{haversine_km, polyline_intersects_polygon, GeoPoint, GeoPolygon};
use crate::models::DesignMatrix;
use crate::stats;
use crate::time::Timestamp;
use crate::trajectory::{trip_containing, Trip, VesselTrips};
use crate::{Error, Result};

pub const DEFAULT_WINDOW_S: i64 = 120;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub detection_id: String,
    pub scene_time: Timestamp,
    pub footprint: GeoPolygon,
    /// `None` for detections kept only for prediction.
    pub barge_count: Option<u32>,
}

/// Identifies one trip of one vessel.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TripRef {
    pub vessel_id: String,
    pub start_time: Timestamp,
    pub end_time: Timestamp,
}

impl TripRef {
    pub fn of(trip: &Trip) -> Self {
        TripRef { vessel_id: trip.vessel_id.clone(), start_time: trip.start_time, end_time: trip.end_time }
    }
}

/// One vessel with at least one report inside the time window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub vessel_id: String,
    pub windowed_points: usize,
    pub intersects: bool,
    /// Smallest |t - scene_time| among the windowed reports.
    pub nearest_dt_s: i64,
    /// Distance from the footprint centroid to the nearest-in-time report.
    pub centroid_distance_km: f64,
    pub trip: Option<TripRef>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub detection_id: String,
    pub vessel_id: String,
    pub trip: Option<TripRef>,
    pub within_window: bool,
    pub intersects: bool,
}

impl MatchResult {
    pub fn is_match(&self) -> bool {
        self.within_window && self.intersects && self.trip.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchOutcome {
    pub detection_id: String,
    /// Winning vessel. A result without a covering trip is reported with its
    /// flags but is not a match.
    pub result: Option<MatchResult>,
    pub candidates: Vec<Candidate>,
}

impl MatchOutcome {
    pub fn matched(&self) -> Option<&MatchResult> {
        self.result.as_ref().filter(|r| r.is_match())
    }
}

fn candidate(
    detection: &Detection,
    track: &VesselTrack,
    trips: Option<&VesselTrips>,
    window_s: i64,
) -> Result<Option<Candidate>> {
    let (lo, hi) = (detection.scene_time - window_s, detection.scene_time + window_s);
    let records = &track.records;
    let start = records.partition_point(|r| r.timestamp < lo);
    let end = records.partition_point(|r| r.timestamp <= hi);
    if start >= end {
        return Ok(None);
    }
    let window = &records[start..end];
    let polyline: Vec<GeoPoint> = window.iter().map(|r| r.position()).collect();
    let intersects = polyline_intersects_polygon(&polyline, &detection.footprint)?;
    let centroid = detection.footprint.centroid();
    let (nearest_dt_s, centroid_distance_km) = window
        .iter()
        .map(|r| (r.timestamp.seconds_since(detection.scene_time).abs(), haversine_km(r.position(), centroid)))
        .min_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)))
        .expect("window is non-empty");
    let trip = trips.and_then(|v| trip_containing(&v.trips, detection.scene_time)).map(TripRef::of);
    Ok(Some(Candidate {
        vessel_id: track.vessel_id.clone(),
        windowed_points: window.len(),
        intersects,
        nearest_dt_s,
        centroid_distance_km,
        trip,
    }))
}

/// Matches one detection against every vessel.
///
/// Among intersecting candidates, those with a covering trip win over those
/// without; the rest is ordered by nearest report in time, then distance of
/// that report to the footprint centroid, then vessel id.
pub fn match_detection(
    detection: &Detection,
    tracks: &[VesselTrack],
    trips: &[VesselTrips],
    window_s: i64,
) -> Result<MatchOutcome> {
    if window_s < 0 {
        return Err(Error::domain("match window must be non-negative"));
    }
    let by_vessel: BTreeMap<&str, &VesselTrips> = trips.iter().map(|v| (v.vessel_id.as_str(), v)).collect();
    let mut candidates = Vec::new();
    for track in tracks {
        if let Some(c) = candidate(detection, track, by_vessel.get(track.vessel_id.as_str()).copied(), window_s)? {
            candidates.push(c);
        }
    }
    candidates.sort_by(|a, b| {
        b.intersects
            .cmp(&a.intersects)
            .then(b.trip.is_some().cmp(&a.trip.is_some()))
            .then(a.nearest_dt_s.cmp(&b.nearest_dt_s))
            .then(a.centroid_distance_km.total_cmp(&b.centroid_distance_km))
            .then(a.vessel_id.cmp(&b.vessel_id))
    });
    let result = candidates.first().filter(|c| c.intersects).map(|c| MatchResult {
        detection_id: detection.detection_id.clone(),
        vessel_id: c.vessel_id.clone(),
        trip: c.trip.clone(),
        within_window: true,
        intersects: true,
    });
    Ok(MatchOutcome { detection_id: detection.detection_id.clone(), result, candidates })
}

/// Matches every detection; output ordered by detection id.
pub fn match_all(
    detections: &[Detection],
    tracks: &[VesselTrack],
    trips: &[VesselTrips],
    window_s: i64,
) -> Result<Vec<MatchOutcome>> {
    let mut out = detections.iter().map(|d| match_detection(d, tracks, trips, window_s)).collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| a.detection_id.cmp(&b.detection_id));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub detection_id: String,
    pub vessel_id: String,
    /// Position of the trip among its vessel's trips, by start time.
    pub trip_index: usize,
    pub start_time: Timestamp,
    pub end_time: Timestamp,
    pub features: [f64; FEATURE_COUNT],
    pub barge_count: u32,
}

/// A matched detection without a count, features left raw.
#[derive(Debug, Clone, PartialEq)]
pub struct UnlabeledSample {
    pub detection_id: String,
    pub vessel_id: String,
    pub features: FeatureVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImputedCell {
    pub detection_id: String,
    pub feature: String,
    pub value: f64,
}

/// Per-feature medians over the labeled set, reused at prediction time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImputationReport {
    pub features: Vec<String>,
    pub medians: Vec<f64>,
    /// Features missing in every labeled sample; their median is recorded as 0.
    pub all_missing: Vec<String>,
    pub imputed: Vec<ImputedCell>,
}

impl ImputationReport {
    /// Medians of each feature over `vectors`, without imputing anything yet.
    pub fn fit<'a>(vectors: impl IntoIterator<Item = &'a FeatureVector>) -> Self {
        let mut columns: Vec<Vec<f64>> = (0..FEATURE_COUNT).map(|_| Vec::new()).collect();
        for v in vectors {
            for (j, x) in v.values().iter().enumerate() {
                if let Some(x) = x {
                    columns[j].push(*x);
                }
            }
        }
        let mut all_missing = Vec::new();
        let medians = Feature::ALL
            .iter()
            .zip(&columns)
            .map(|(f, c)| {
                stats::median(c).unwrap_or_else(|| {
                    all_missing.push(f.name().to_string());
                    0.0
                })
            })
            .collect();
        ImputationReport {
            features: Feature::ALL.iter().map(|f| f.name().to_string()).collect(),
            medians,
            all_missing,
            imputed: Vec::new(),
        }
    }

    /// Fills missing values with the medians, recording each filled cell.
    pub fn impute(&mut self, detection_id: &str, v: &FeatureVector) -> [f64; FEATURE_COUNT] {
        let mut out = [0.0; FEATURE_COUNT];
        for (j, x) in v.values().iter().enumerate() {
            out[j] = match x {
                Some(x) => *x,
                None => {
                    self.imputed.push(ImputedCell {
                        detection_id: detection_id.to_string(),
                        feature: self.features[j].clone(),
                        value: self.medians[j],
                    });
                    self.medians[j]
                }
            };
        }
        out
    }

    /// Like [`impute`](Self::impute) without recording.
    pub fn apply(&self, v: &FeatureVector) -> [f64; FEATURE_COUNT] {
        let mut out = [0.0; FEATURE_COUNT];
        for (j, x) in v.values().iter().enumerate() {
            out[j] = x.unwrap_or(self.medians[j]);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub samples: Vec<LabeledSample>,
    pub unlabeled: Vec<UnlabeledSample>,
    pub imputation: ImputationReport,
}

impl LabeledDataset {
    pub fn design_matrix(&self) -> Result<DesignMatrix> {
        samples_to_matrix(&self.samples)
    }
}

/// All 39 features as columns, barge counts as targets.
pub fn samples_to_matrix(samples: &[LabeledSample]) -> Result<DesignMatrix> {
    let names = Feature::ALL.iter().map(|f| f.name().to_string()).collect();
    let rows = samples.iter().map(|s| s.features.to_vec()).collect();
    let targets = samples.iter().map(|s| s.barge_count as f64).collect();
    DesignMatrix::new(names, rows, targets)
}

/// One sample per matched detection, labeled ones imputed with medians over
/// the labeled set. `features` maps each covering trip to its vector and
/// should hold every trip of each vessel: a sample's `trip_index` is its
/// trip's rank among that vessel's keys.
pub fn build_labeled_dataset(
    detections: &[Detection],
    outcomes: &[MatchOutcome],
    features: &BTreeMap<TripRef, FeatureVector>,
) -> Result<LabeledDataset> {
    let mut seen = BTreeSet::new();
    for d in detections {
        if !seen.insert(d.detection_id.as_str()) {
            return Err(Error::contract(alloc::format!("duplicate detection id {}", d.detection_id)));
        }
    }
    let by_id: BTreeMap<&str, &Detection> = detections.iter().map(|d| (d.detection_id.as_str(), d)).collect();
    let mut labeled: Vec<Pending> = Vec::new();
    let mut unlabeled = Vec::new();
    for o in outcomes {
        let Some(m) = o.matched() else { continue };
        let det = by_id
            .get(o.detection_id.as_str())
            .ok_or_else(|| Error::contract(alloc::format!("match for unknown detection {}", o.detection_id)))?;
        let trip = m.trip.as_ref().expect("matched results carry a trip");
        let fv = *features.get(trip).ok_or_else(|| {
            Error::contract(alloc::format!("no feature vector for the trip matched by {}", o.detection_id))
        })?;
        match det.barge_count {
            Some(b) => {
                let trip_index =
                    features.keys().filter(|k| k.vessel_id == trip.vessel_id && k.start_time < trip.start_time).count();
                labeled.push(Pending {
                    detection_id: &det.detection_id,
                    trip: trip.clone(),
                    trip_index,
                    features: fv,
                    count: b,
                })
            }
            None => unlabeled.push(UnlabeledSample {
                detection_id: det.detection_id.clone(),
                vessel_id: m.vessel_id.clone(),
                features: fv,
            }),
        }
    }
    if labeled.is_empty() {
        return Err(Error::domain("empty training set"));
    }
    labeled.sort_by(|a, b| a.detection_id.cmp(b.detection_id));
    unlabeled.sort_by(|a, b| a.detection_id.cmp(&b.detection_id));
    let (samples, imputation) = impute_labeled(labeled);
    Ok(LabeledDataset { samples, unlabeled, imputation })
}

/// A labeled row before imputation.
pub(crate) struct Pending<'a> {
    pub detection_id: &'a str,
    pub trip: TripRef,
    pub trip_index: usize,
    pub features: FeatureVector,
    pub count: u32,
}

/// Median-imputes labeled rows in order.
pub(crate) fn impute_labeled(rows: Vec<Pending>) -> (Vec<LabeledSample>, ImputationReport) {
    let mut report = ImputationReport::fit(rows.iter().map(|r| &r.features));
    let samples = rows
        .into_iter()
        .map(|r| LabeledSample {
            detection_id: r.detection_id.to_string(),
            features: report.impute(r.detection_id, &r.features),
            vessel_id: r.trip.vessel_id,
            trip_index: r.trip_index,
            start_time: r.trip.start_time,
            end_time: r.trip.end_time,
            barge_count: r.count,
        })
        .collect();
    (samples, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ais::{AisRecord, Heading};
    use crate::features::{extract_all, FeatureConfig};
    use crate::geo::destination;
    use crate::trajectory::{reconstruct, StopParams};
    use alloc::vec;

    const T0: i64 = 1_700_000_000;

    fn rec(v: &str, t: i64, p: GeoPoint, sog: f64) -> AisRecord {
        AisRecord {
            vessel_id: v.to_string(),
            timestamp: Timestamp(t),
            lat: p.lat,
            lon: p.lon,
            sog,
            cog: 90.0,
            heading: Heading::Unavailable,
            length_m: Some(60.0),
            width_m: Some(12.0),
            draft_m: None,
        }
    }

    /// Eastbound at 6 kn with one-minute pings, passing `origin` at T0 + offset_s.
    fn track(v: &str, origin: GeoPoint, offset_s: i64, minutes: i64) -> VesselTrack {
        let records = (-minutes..=minutes)
            .map(|k| {
                let t = T0 + offset_s + 60 * k;
                let km = 6.0 * 1.852 * (60 * k) as f64 / 3600.0;
                rec(v, t, destination(origin, 90.0, km), 6.0)
            })
            .collect();
        VesselTrack { vessel_id: v.to_string(), records }
    }

    fn square(center: GeoPoint, half_deg: f64) -> GeoPolygon {
        let (la, lo) = (center.lat, center.lon);
        GeoPolygon::new(vec![
            GeoPoint::new(la - half_deg, lo - half_deg).unwrap(),
            GeoPoint::new(la - half_deg, lo + half_deg).unwrap(),
            GeoPoint::new(la + half_deg, lo + half_deg).unwrap(),
            GeoPoint::new(la + half_deg, lo - half_deg).unwrap(),
            GeoPoint::new(la - half_deg, lo - half_deg).unwrap(),
        ])
        .unwrap()
    }

    fn detection(id: &str, footprint: GeoPolygon, count: Option<u32>) -> Detection {
        Detection { detection_id: id.to_string(), scene_time: Timestamp(T0), footprint, barge_count: count }
    }

    fn setup(tracks: &[VesselTrack]) -> Vec<VesselTrips> {
        tracks.iter().map(|t| reconstruct(t, &StopParams::default()).unwrap()).collect()
    }

    fn origin() -> GeoPoint {
        GeoPoint::new(30.0, -90.0).unwrap()
    }

    /// Reports every 400 s; the one at `offset_s` from the scene sits at the footprint centre.
    fn sparse_track(offset_s: i64) -> VesselTrack {
        let records = (-20..=20i64)
            .map(|k| {
                let km = 6.0 * 1.852 * (400 * k) as f64 / 3600.0;
                rec("a", T0 + offset_s + 400 * k, destination(origin(), 90.0, km), 6.0)
            })
            .collect();
        VesselTrack { vessel_id: "a".to_string(), records }
    }

    #[test]
    fn ping_inside_window_and_footprint_matches() {
        let t = sparse_track(-90);
        let trips = setup(core::slice::from_ref(&t));
        let d = detection("d", square(origin(), 0.01), Some(3));
        let o = match_detection(&d, &[t], &trips, 120).unwrap();
        let m = o.matched().expect("match");
        assert_eq!(m.vessel_id, "a");
        assert_eq!(o.candidates[0].nearest_dt_s, 90);
    }

    #[test]
    fn ping_outside_window_never_matches() {
        let t = sparse_track(180);
        let trips = setup(core::slice::from_ref(&t));
        let d = detection("d", square(origin(), 0.01), Some(3));
        let o = match_detection(&d, &[t], &trips, 120).unwrap();
        assert!(o.result.is_none());
        assert!(o.candidates.is_empty());
    }

    #[test]
    fn windowed_polyline_outside_footprint_is_no_match() {
        let t = track("a", origin(), 0, 30);
        let trips = setup(core::slice::from_ref(&t));
        let far = GeoPoint::new(30.2, -90.0).unwrap();
        let o = match_detection(&detection("d", square(far, 0.01), None), &[t], &trips, 120).unwrap();
        assert!(o.result.is_none());
        assert_eq!(o.candidates.len(), 1);
        assert!(!o.candidates[0].intersects);
    }

    #[test]
    fn segment_crossing_counts_without_vertex_inside() {
        // Pings two minutes apart straddle a footprint narrower than one step.
        let mut t = track("a", origin(), 0, 30);
        t.records.retain(|r| (r.timestamp.unix() - T0 - 60) % 120 == 0);
        let trips = setup(core::slice::from_ref(&t));
        let o = match_detection(&detection("d", square(origin(), 0.002), Some(1)), &[t], &trips, 120).unwrap();
        assert!(o.matched().is_some());
    }

    #[test]
    fn nearest_in_time_wins_and_all_candidates_listed() {
        let a = track("a", origin(), 50, 30);
        let b = track("b", origin(), 10, 30);
        let mut tracks = vec![a, b];
        for t in &mut tracks {
            t.records.retain(|r| (r.timestamp.unix() - T0).abs() < 600 || (r.timestamp.unix() - T0).abs() > 900);
        }
        let trips = setup(&tracks);
        let o = match_detection(&detection("d", square(origin(), 0.02), Some(2)), &tracks, &trips, 120).unwrap();
        assert_eq!(o.candidates.len(), 2);
        assert_eq!(o.matched().unwrap().vessel_id, "b");
    }

    #[test]
    fn stationary_vessel_has_flags_but_no_match() {
        // Moored the whole time: a stop, no trip.
        let records = (0..200).map(|k| rec("s", T0 - 6000 + 60 * k, origin(), 0.0)).collect();
        let t = VesselTrack { vessel_id: "s".to_string(), records };
        let trips = setup(core::slice::from_ref(&t));
        assert!(trips[0].trips.is_empty());
        let o = match_detection(&detection("d", square(origin(), 0.01), Some(2)), &[t], &trips, 120).unwrap();
        let r = o.result.as_ref().unwrap();
        assert!(r.within_window && r.intersects && r.trip.is_none());
        assert!(o.matched().is_none());
    }

    #[test]
    fn dropping_out_of_window_records_keeps_result() {
        let t = track("a", origin(), 30, 60);
        let trips = setup(core::slice::from_ref(&t));
        let d = detection("d", square(origin(), 0.01), Some(4));
        let full = match_detection(&d, core::slice::from_ref(&t), &trips, 120).unwrap();
        let mut cut = t.clone();
        cut.records.retain(|r| (r.timestamp.unix() - T0).abs() <= 120);
        let reduced = match_detection(&d, &[cut], &trips, 120).unwrap();
        assert_eq!(full.result, reduced.result);
    }

    #[test]
    fn dataset_imputes_medians_and_splits_unlabeled() {
        let ta = track("a", origin(), 0, 30);
        let far = GeoPoint::new(31.0, -91.0).unwrap();
        let tb = track("b", far, 0, 30);
        let mut tc = track("c", GeoPoint::new(29.0, -89.0).unwrap(), 0, 30);
        for r in &mut tc.records {
            r.draft_m = Some(3.0);
        }
        let tracks = vec![ta, tb, tc];
        let trips = setup(&tracks);
        let dets = vec![
            detection("d1", square(origin(), 0.01), Some(2)),
            detection("d2", square(far, 0.01), None),
            detection("d3", square(GeoPoint::new(29.0, -89.0).unwrap(), 0.01), Some(5)),
        ];
        let outcomes = match_all(&dets, &tracks, &trips, 120).unwrap();
        let cfg = FeatureConfig::default();
        let features: BTreeMap<TripRef, FeatureVector> = trips
            .iter()
            .flat_map(|v| v.trips.iter())
            .map(|t| (TripRef::of(t), extract_all(t, &cfg).unwrap()))
            .collect();
        let ds = build_labeled_dataset(&dets, &outcomes, &features).unwrap();
        assert_eq!(ds.samples.len(), 2);
        assert_eq!(ds.unlabeled.len(), 1);
        let dft = Feature::Dft as usize;
        assert_eq!(ds.samples[0].features[dft], 3.0);
        assert!(ds.imputation.imputed.iter().any(|c| c.detection_id == "d1" && c.feature == "DFT" && c.value == 3.0));
        // the report alone reproduces the imputed matrix
        let raw = &features[outcomes[0].matched().unwrap().trip.as_ref().unwrap()];
        assert_eq!(ds.imputation.apply(raw), ds.samples[0].features);
        assert_eq!(ds.design_matrix().unwrap().n_rows(), 2);

        let none_labeled: Vec<Detection> = dets
            .iter()
            .cloned()
            .map(|mut d| {
                d.barge_count = None;
                d
            })
            .collect();
        let err = build_labeled_dataset(&none_labeled, &outcomes, &features).unwrap_err();
        assert_eq!(err, Error::Domain("empty training set".to_string()));
    }
}
