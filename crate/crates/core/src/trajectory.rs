//! Stop detection and trip segmentation for one vessel's cleaned track.
//!
//! A stop is a maximal run of consecutive low-speed reports (no transmission
//! gap longer than `max_gap_min` inside it) that lasts at least
//! `min_duration_min` and stays within `radius_m` of its own centroid. Trips
//! are the moving stretches left between stops, split again at transmission
//! gaps and dropped when shorter than `min_trip_points`.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::ais::{AisRecord, VesselTrack};
use crate::geo::{haversine_km, GeoPoint};
use crate::time::Timestamp;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopParams {
    pub max_speed_kn: f64,
    pub min_duration_min: f64,
    pub radius_m: f64,
    pub max_gap_min: f64,
    pub min_trip_points: usize,
}

impl Default for StopParams {
    fn default() -> Self {
        StopParams {
            max_speed_kn: 1.0,
            min_duration_min: 60.0,
            radius_m: 300.0,
            max_gap_min: 30.0,
            min_trip_points: 10,
        }
    }
}

impl StopParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("max_speed_kn", self.max_speed_kn),
            ("min_duration_min", self.min_duration_min),
            ("radius_m", self.radius_m),
            ("max_gap_min", self.max_gap_min),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(alloc::format!("{name} must be strictly positive")));
            }
        }
        if self.min_trip_points < 2 {
            return Err(Error::domain("min_trip_points must be at least 2"));
        }
        Ok(())
    }

    fn max_gap_s(&self) -> f64 {
        self.max_gap_min * 60.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stop {
    pub vessel_id: String,
    pub start_time: Timestamp,
    pub end_time: Timestamp,
    pub centroid: GeoPoint,
    pub point_count: usize,
    /// Index of the first member record in the source track.
    pub first_index: usize,
}

impl Stop {
    /// Source-track index range of the member records.
    pub fn index_range(&self) -> core::ops::Range<usize> {
        self.first_index..self.first_index + self.point_count
    }
}

/// Trip-level vessel dimensions (modal non-missing value over the trip).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct VesselStatics {
    pub length_m: Option<f64>,
    pub width_m: Option<f64>,
    pub draft_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trip {
    pub vessel_id: String,
    pub records: Vec<AisRecord>,
    pub start_time: Timestamp,
    pub end_time: Timestamp,
    pub statics: VesselStatics,
    /// Index of the first record in the source track.
    pub first_index: usize,
    /// Not bounded by a detected stop on both ends (data boundary or gap split).
    pub open_ended: bool,
}

impl Trip {
    /// Builds a trip from an ordered record run of one vessel.
    pub fn new(records: Vec<AisRecord>) -> Result<Self> {
        if records.len() < 2 {
            return Err(Error::domain("a trip needs at least 2 records"));
        }
        check_track(&records)?;
        let statics = VesselStatics {
            length_m: modal(records.iter().filter_map(|r| r.length_m)),
            width_m: modal(records.iter().filter_map(|r| r.width_m)),
            draft_m: modal(records.iter().filter_map(|r| r.draft_m)),
        };
        Ok(Trip {
            vessel_id: records[0].vessel_id.clone(),
            start_time: records[0].timestamp,
            end_time: records[records.len() - 1].timestamp,
            statics,
            records,
            first_index: 0,
            open_ended: true,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn index_range(&self) -> core::ops::Range<usize> {
        self.first_index..self.first_index + self.records.len()
    }

    pub fn covers(&self, instant: Timestamp) -> bool {
        self.start_time <= instant && instant <= self.end_time
    }
}

/// Most frequent value; ties go to the smallest.
fn modal(values: impl Iterator<Item = f64>) -> Option<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    let mut best: Option<(f64, usize)> = None;
    for run in v.chunk_by(|a, b| a.to_bits() == b.to_bits()) {
        if best.is_none_or(|(_, n)| run.len() > n) {
            best = Some((run[0], run.len()));
        }
    }
    best.map(|(x, _)| x)
}

fn check_track(records: &[AisRecord]) -> Result<()> {
    if let Some(first) = records.first() {
        if records.iter().any(|r| r.vessel_id != first.vessel_id) {
            return Err(Error::domain("records belong to more than one vessel"));
        }
    }
    if records.windows(2).any(|w| w[0].timestamp >= w[1].timestamp) {
        return Err(Error::domain("records are not strictly increasing in time"));
    }
    Ok(())
}

fn gap_s(a: &AisRecord, b: &AisRecord) -> f64 {
    b.timestamp.seconds_since(a.timestamp) as f64
}

/// Low-speed run sweep over one vessel's sorted records.
pub fn detect_stops(records: &[AisRecord], params: &StopParams) -> Result<Vec<Stop>> {
    params.validate()?;
    check_track(records)?;
    let slow = |r: &AisRecord| r.sog < params.max_speed_kn;
    let mut stops = Vec::new();
    let mut i = 0;
    while i < records.len() {
        if !slow(&records[i]) {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < records.len()
            && slow(&records[j + 1])
            && gap_s(&records[j], &records[j + 1]) <= params.max_gap_s()
        {
            j += 1;
        }
        let run = &records[i..=j];
        if let Some(stop) = qualify_stop(run, i, params) {
            stops.push(stop);
        }
        i = j + 1;
    }
    Ok(stops)
}

fn qualify_stop(run: &[AisRecord], first_index: usize, params: &StopParams) -> Option<Stop> {
    let first = &run[0];
    let last = &run[run.len() - 1];
    let duration_s = last.timestamp.seconds_since(first.timestamp) as f64;
    if duration_s < params.min_duration_min * 60.0 {
        return None;
    }
    let n = run.len() as f64;
    let centroid =
        GeoPoint { lat: run.iter().map(|r| r.lat).sum::<f64>() / n, lon: run.iter().map(|r| r.lon).sum::<f64>() / n };
    let compact = run.iter().all(|r| haversine_km(r.position(), centroid) * 1000.0 <= params.radius_m);
    compact.then(|| Stop {
        vessel_id: first.vessel_id.clone(),
        start_time: first.timestamp,
        end_time: last.timestamp,
        centroid,
        point_count: run.len(),
        first_index,
    })
}

/// Cuts the records outside `stops` into trips.
pub fn segment_trips(records: &[AisRecord], stops: &[Stop], params: &StopParams) -> Result<Vec<Trip>> {
    params.validate()?;
    check_track(records)?;
    let mut in_stop = alloc::vec![false; records.len()];
    for s in stops {
        let range = s.index_range();
        if range.end > records.len() {
            return Err(Error::contract("stop indices exceed the record sequence"));
        }
        in_stop[range].iter_mut().for_each(|f| *f = true);
    }

    let mut trips = Vec::new();
    let mut i = 0;
    while i < records.len() {
        if in_stop[i] {
            i += 1;
            continue;
        }
        // Moving piece [i, j]: no stop member, no oversize gap.
        let mut j = i;
        while j + 1 < records.len() && !in_stop[j + 1] && gap_s(&records[j], &records[j + 1]) <= params.max_gap_s() {
            j += 1;
        }
        let after_stop = i > 0 && in_stop[i - 1] && gap_s(&records[i - 1], &records[i]) <= params.max_gap_s();
        let before_stop =
            j + 1 < records.len() && in_stop[j + 1] && gap_s(&records[j], &records[j + 1]) <= params.max_gap_s();
        let piece = &records[i..=j];
        if piece.len() >= params.min_trip_points {
            let mut trip = Trip::new(piece.to_vec())?;
            trip.first_index = i;
            trip.open_ended = !(after_stop && before_stop);
            trips.push(trip);
        }
        i = j + 1;
    }
    Ok(trips)
}

/// The trip whose [start, end] contains `instant`, inclusive at both ends.
pub fn trip_containing(trips: &[Trip], instant: Timestamp) -> Option<&Trip> {
    let idx = trips.partition_point(|t| t.end_time < instant);
    trips.get(idx).filter(|t| t.covers(instant))
}

/// Stops and trips reconstructed for one vessel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VesselTrips {
    pub vessel_id: String,
    pub stops: Vec<Stop>,
    pub trips: Vec<Trip>,
}

pub fn reconstruct(track: &VesselTrack, params: &StopParams) -> Result<VesselTrips> {
    let stops = detect_stops(&track.records, params)?;
    let trips = segment_trips(&track.records, &stops, params)?;
    Ok(VesselTrips { vessel_id: track.vessel_id.clone(), stops, trips })
}
