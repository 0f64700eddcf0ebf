//! AIS position reports: validation of raw rows and per-vessel cleaning.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::geo::GeoPoint;
use crate::time::Timestamp;

/// Raw AIS code for "heading not available".
pub const HEADING_UNAVAILABLE: f64 = 511.0;

/// True heading, or the explicit "not available" marker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Heading {
    Degrees(f64),
    Unavailable,
}

impl Heading {
    /// Maps the 511 sentinel (and anything else outside [0, 360)) to `Unavailable`.
    pub fn from_raw(raw: Option<f64>) -> Self {
        match raw {
            Some(h) if (0.0..360.0).contains(&h) => Heading::Degrees(h),
            _ => Heading::Unavailable,
        }
    }

    pub fn degrees(self) -> Option<f64> {
        match self {
            Heading::Degrees(h) => Some(h),
            Heading::Unavailable => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AisRecord {
    pub vessel_id: String,
    pub timestamp: Timestamp,
    pub lat: f64,
    pub lon: f64,
    /// Knots.
    pub sog: f64,
    /// Degrees clockwise from true north, [0, 360).
    pub cog: f64,
    pub heading: Heading,
    pub length_m: Option<f64>,
    pub width_m: Option<f64>,
    pub draft_m: Option<f64>,
}

impl AisRecord {
    pub fn position(&self) -> GeoPoint {
        GeoPoint { lat: self.lat, lon: self.lon }
    }
}

/// One CSV row after field-level parsing, before range validation.
/// `None` means the field was empty or unparseable.
#[derive(Debug, Clone, Default)]
pub struct RawReport {
    pub vessel_id: String,
    pub timestamp: Option<Timestamp>,
    pub lat: Option<f64>,
    pub lon: Option<f64>,
    pub sog: Option<f64>,
    pub cog: Option<f64>,
    pub heading: Option<f64>,
    pub length_m: Option<f64>,
    pub width_m: Option<f64>,
    pub draft_m: Option<f64>,
}

/// Why a row was skipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    Missing(&'static str),
    LatOutOfRange,
    LonOutOfRange,
    NegativeSog,
    CogOutOfRange,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::Missing(field) => write!(f, "missing or unparseable {field}"),
            Rejection::LatOutOfRange => f.write_str("lat out of range"),
            Rejection::LonOutOfRange => f.write_str("lon out of range"),
            Rejection::NegativeSog => f.write_str("sog negative"),
            Rejection::CogOutOfRange => f.write_str("cog out of range"),
        }
    }
}

fn positive(v: Option<f64>) -> Option<f64> {
    v.filter(|x| x.is_finite() && *x > 0.0)
}

impl RawReport {
    pub fn validate(self) -> Result<AisRecord, Rejection> {
        if self.vessel_id.trim().is_empty() {
            return Err(Rejection::Missing("vessel_id"));
        }
        let timestamp = self.timestamp.ok_or(Rejection::Missing("timestamp"))?;
        let lat = self.lat.filter(|v| v.is_finite()).ok_or(Rejection::Missing("lat"))?;
        let lon = self.lon.filter(|v| v.is_finite()).ok_or(Rejection::Missing("lon"))?;
        let sog = self.sog.filter(|v| v.is_finite()).ok_or(Rejection::Missing("sog"))?;
        let cog = self.cog.filter(|v| v.is_finite()).ok_or(Rejection::Missing("cog"))?;
        if !(-90.0..=90.0).contains(&lat) {
            return Err(Rejection::LatOutOfRange);
        }
        if !(-180.0..=180.0).contains(&lon) {
            return Err(Rejection::LonOutOfRange);
        }
        if sog < 0.0 {
            return Err(Rejection::NegativeSog);
        }
        if !(0.0..360.0).contains(&cog) {
            return Err(Rejection::CogOutOfRange);
        }
        Ok(AisRecord {
            vessel_id: self.vessel_id,
            timestamp,
            lat,
            lon,
            sog,
            cog,
            heading: Heading::from_raw(self.heading),
            length_m: positive(self.length_m),
            width_m: positive(self.width_m),
            draft_m: positive(self.draft_m),
        })
    }
}

/// Chronologically ordered reports of one vessel with strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VesselTrack {
    pub vessel_id: String,
    pub records: Vec<AisRecord>,
}

/// Groups by vessel id (ascending), sorts each group by time and keeps the
/// first occurrence of any repeated timestamp.
pub fn clean_records(records: Vec<AisRecord>) -> Vec<VesselTrack> {
    let mut groups: BTreeMap<String, Vec<AisRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.vessel_id.clone()).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(vessel_id, mut recs)| {
            recs.sort_by_key(|r| r.timestamp);
            recs.dedup_by_key(|r| r.timestamp);
            VesselTrack { vessel_id, records: recs }
        })
        .collect()
}
