//! AIS position reports as CSV.
//!
//! Input columns are matched by name, case-insensitively and ignoring
//! punctuation, so both MarineCadastre exports (`MMSI`, `BaseDateTime`,
//! `LAT`, ...) and snake_case files (`vessel_id`, `timestamp`, ...) load.
//! The cleaned store is written with MarineCadastre names and reads back
//! through the same path.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use bargetow_core::ais::{clean_records, AisRecord, Heading, RawReport, VesselTrack, HEADING_UNAVAILABLE};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::timefmt::{format_timestamp, parse_timestamp};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    VesselId,
    Timestamp,
    Lat,
    Lon,
    Sog,
    Cog,
    Heading,
    Length,
    Width,
    Draft,
}

impl Field {
    /// Name used in `--column FIELD=HEADER` overrides.
    fn from_key(key: &str) -> Option<Field> {
        Some(match key {
            "vessel_id" => Field::VesselId,
            "timestamp" => Field::Timestamp,
            "lat" => Field::Lat,
            "lon" => Field::Lon,
            "sog" => Field::Sog,
            "cog" => Field::Cog,
            "heading" => Field::Heading,
            "length" => Field::Length,
            "width" => Field::Width,
            "draft" => Field::Draft,
            _ => return None,
        })
    }
}

pub const FIELD_KEYS: [&str; 10] =
    ["vessel_id", "timestamp", "lat", "lon", "sog", "cog", "heading", "length", "width", "draft"];

/// Column overrides and an optional vessel allow-list.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IngestOptions {
    /// `(field key, header)` pairs that take precedence over name matching.
    pub columns: Vec<(String, String)>,
    /// When set, rows of any other vessel are skipped.
    pub vessels: Option<BTreeSet<String>>,
}

impl IngestOptions {
    /// Parses `FIELD=HEADER` overrides, rejecting unknown field keys.
    pub fn with_columns(mut self, specs: &[String]) -> Result<Self> {
        for spec in specs {
            let (k, h) = spec
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("--column expects FIELD=HEADER, got {spec:?}")))?;
            let k = k.trim();
            if Field::from_key(k).is_none() {
                return Err(Error::Usage(format!(
                    "unknown AIS field {k:?}; expected one of {}",
                    FIELD_KEYS.join(", ")
                )));
            }
            self.columns.push((k.to_string(), h.trim().to_string()));
        }
        Ok(self)
    }

    /// Reads one vessel id per line; blank lines and `#` comments are skipped.
    pub fn with_vessel_file(mut self, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ids = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(String::from);
        self.vessels = Some(ids.collect());
        Ok(self)
    }
}

const REQUIRED: [Field; 6] = [Field::VesselId, Field::Timestamp, Field::Lat, Field::Lon, Field::Sog, Field::Cog];

fn field_for(header: &str) -> Option<Field> {
    let key: String = header.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
    Some(match key.as_str() {
        "mmsi" | "vesselid" | "vessel" => Field::VesselId,
        "basedatetime" | "timestamp" | "time" | "datetime" => Field::Timestamp,
        "lat" | "latitude" => Field::Lat,
        "lon" | "long" | "longitude" => Field::Lon,
        "sog" => Field::Sog,
        "cog" => Field::Cog,
        "heading" => Field::Heading,
        "length" | "lengthm" => Field::Length,
        "width" | "widthm" => Field::Width,
        "draft" | "draftm" => Field::Draft,
        _ => return None,
    })
}

/// What happened to each input row.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IngestReport {
    pub rows_read: usize,
    pub accepted: usize,
    /// Rejection reason to row count.
    pub rejected: BTreeMap<String, usize>,
    pub duplicates_removed: usize,
    /// Rows skipped because their vessel is not on the allow-list.
    pub not_allowed: usize,
    pub vessels: usize,
}

fn number(s: Option<&str>) -> Option<f64> {
    let s = s?.trim();
    if s.is_empty() {
        None
    } else {
        s.parse().ok()
    }
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(input)
}

/// Parses, validates and cleans reports. `path` only labels errors.
pub fn parse_ais<R: Read>(input: R, path: &Path) -> Result<(Vec<VesselTrack>, IngestReport)> {
    parse_ais_with(input, path, &IngestOptions::default())
}

pub fn parse_ais_with<R: Read>(
    input: R,
    path: &Path,
    opts: &IngestOptions,
) -> Result<(Vec<VesselTrack>, IngestReport)> {
    let mut rdr = reader(input);
    let headers = rdr.headers().map_err(|e| Error::format(path, None, e.to_string()))?.clone();
    let mut columns: Vec<(Field, usize)> = Vec::new();
    for (key, header) in &opts.columns {
        let f = Field::from_key(key).ok_or_else(|| Error::Usage(format!("unknown AIS field {key:?}")))?;
        let i = headers
            .iter()
            .position(|h| h == header)
            .ok_or_else(|| Error::format(path, Some(1), format!("no column named {header:?} for {key}")))?;
        columns.retain(|(g, _)| *g != f);
        columns.push((f, i));
    }
    for (i, h) in headers.iter().enumerate() {
        if let Some(f) = field_for(h) {
            if columns.iter().all(|(g, _)| *g != f) {
                columns.push((f, i));
            }
        }
    }
    for f in REQUIRED {
        if !columns.iter().any(|(g, _)| *g == f) {
            return Err(Error::format(path, Some(1), format!("no column for {f:?}")));
        }
    }
    let col = |f: Field| columns.iter().find(|(g, _)| *g == f).map(|(_, i)| *i);

    let mut report = IngestReport::default();
    let mut accepted: Vec<AisRecord> = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| {
            let line = e.position().map(|p| p.line());
            Error::format(path, line, e.to_string())
        })?;
        report.rows_read += 1;
        let get = |f: Field| col(f).and_then(|i| row.get(i));
        if let Some(allowed) = &opts.vessels {
            if !allowed.contains(get(Field::VesselId).unwrap_or("")) {
                report.not_allowed += 1;
                continue;
            }
        }
        let raw = RawReport {
            vessel_id: get(Field::VesselId).unwrap_or("").to_string(),
            timestamp: get(Field::Timestamp).and_then(parse_timestamp),
            lat: number(get(Field::Lat)),
            lon: number(get(Field::Lon)),
            sog: number(get(Field::Sog)),
            cog: number(get(Field::Cog)),
            heading: number(get(Field::Heading)),
            length_m: number(get(Field::Length)),
            width_m: number(get(Field::Width)),
            draft_m: number(get(Field::Draft)),
        };
        match raw.validate() {
            Ok(r) => accepted.push(r),
            Err(why) => *report.rejected.entry(why.to_string()).or_default() += 1,
        }
    }
    let n = accepted.len();
    let tracks = clean_records(accepted);
    report.accepted = tracks.iter().map(|t| t.records.len()).sum();
    report.duplicates_removed = n - report.accepted;
    report.vessels = tracks.len();
    Ok((tracks, report))
}

pub fn read_ais(path: &Path) -> Result<(Vec<VesselTrack>, IngestReport)> {
    read_ais_with(path, &IngestOptions::default())
}

pub fn read_ais_with(path: &Path, opts: &IngestOptions) -> Result<(Vec<VesselTrack>, IngestReport)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_ais_with(std::io::BufReader::new(file), path, opts)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub(crate) const RECORD_HEADER: [&str; 10] =
    ["MMSI", "BaseDateTime", "LAT", "LON", "SOG", "COG", "Heading", "Length", "Width", "Draft"];

pub(crate) fn record_fields(r: &AisRecord) -> [String; 10] {
    let heading = match r.heading {
        Heading::Degrees(d) => d.to_string(),
        Heading::Unavailable => HEADING_UNAVAILABLE.to_string(),
    };
    [
        r.vessel_id.clone(),
        format_timestamp(r.timestamp),
        r.lat.to_string(),
        r.lon.to_string(),
        r.sog.to_string(),
        r.cog.to_string(),
        heading,
        opt(r.length_m),
        opt(r.width_m),
        opt(r.draft_m),
    ]
}

/// Writes cleaned tracks after an optional comment header.
pub fn write_store<W: Write>(out: W, comment: &str, tracks: &[VesselTrack]) -> std::io::Result<()> {
    let mut out = out;
    out.write_all(comment.as_bytes())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_HEADER)?;
    for t in tracks {
        for r in &t.records {
            w.write_record(record_fields(r))?;
        }
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
MMSI,BaseDateTime,LAT,LON,SOG,COG,Heading,VesselName,Length,Width,Draft
367000001,2023-05-01T12:01:00,30.0,-90.0,5.5,90.0,511,A,40,10,
367000001,2023-05-01T12:00:00,30.0,-90.01,5.4,91.0,92,A,40,10,2.5
367000001,2023-05-01T12:00:00,30.0,-90.01,5.4,91.0,92,A,40,10,2.5
367000002,2023-05-01T12:00:00,95.0,-90.0,5.0,0,0,B,,,
367000002,2023-05-01T12:00:30,30.0,-90.0,-1,0,0,B,,,
367000002,2023-05-01T12:01:00,30.0,-90.0,1,360,0,B,,,
367000002,2023-05-01T12:01:30,30.0,-90.0,1,x,0,B,,,
";

    #[test]
    fn marine_cadastre_rows_with_diagnostics() {
        let (tracks, rep) = parse_ais(SAMPLE.as_bytes(), Path::new("sample.csv")).unwrap();
        assert_eq!(rep.rows_read, 7);
        assert_eq!(tracks.len(), 1);
        assert_eq!(tracks[0].records.len(), 2);
        assert_eq!(rep.duplicates_removed, 1);
        assert_eq!(rep.rejected["lat out of range"], 1);
        assert_eq!(rep.rejected["sog negative"], 1);
        assert_eq!(rep.rejected["cog out of range"], 1);
        assert_eq!(rep.rejected["missing or unparseable cog"], 1);
        let first = &tracks[0].records[0];
        assert_eq!(first.heading, Heading::Degrees(92.0));
        assert_eq!(tracks[0].records[1].heading, Heading::Unavailable);
        assert_eq!(tracks[0].records[1].draft_m, None);
    }

    #[test]
    fn missing_required_column_is_a_format_error() {
        let err = parse_ais("MMSI,LAT,LON,SOG,COG\n1,2,3,4,5\n".as_bytes(), Path::new("x.csv")).unwrap_err();
        assert!(matches!(err, Error::Format { .. }));
    }

    #[test]
    fn column_overrides_and_allow_list() {
        let text = "ship,when,y,x,speed,course,LAT\nA,2023-05-01T00:00:00,30,-90,1,2,99\nB,2023-05-01T00:00:00,31,-91,1,2,99\n";
        let opts = IngestOptions { vessels: Some(["A".to_string()].into()), ..IngestOptions::default() }
            .with_columns(&[
                "vessel_id=ship".into(),
                "timestamp=when".into(),
                "lat=y".into(),
                "lon=x".into(),
                "sog=speed".into(),
                "cog=course".into(),
            ])
            .unwrap();
        let (tracks, rep) = parse_ais_with(text.as_bytes(), Path::new("t.csv"), &opts).unwrap();
        assert_eq!(rep.not_allowed, 1);
        assert_eq!(tracks.len(), 1);
        assert_eq!((tracks[0].records[0].lat, tracks[0].records[0].lon), (30.0, -90.0));
        let bad = IngestOptions::default().with_columns(&["speed=sog".into()]);
        assert!(matches!(bad, Err(Error::Usage(_))));
        let missing = IngestOptions::default().with_columns(&["lat=nope".into()]).unwrap();
        assert!(parse_ais_with(text.as_bytes(), Path::new("t.csv"), &missing).is_err());
    }

    #[test]
    fn store_reads_back_identically() {
        let (tracks, _) = parse_ais(SAMPLE.as_bytes(), Path::new("sample.csv")).unwrap();
        let mut buf = Vec::new();
        write_store(&mut buf, "# header\n", &tracks).unwrap();
        let (again, rep) = parse_ais(buf.as_slice(), Path::new("store.csv")).unwrap();
        assert_eq!(again, tracks);
        assert!(rep.rejected.is_empty());
    }
}
