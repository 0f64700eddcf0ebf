//! CSV tables exchanged between pipeline stages: trips, features, labeled
//! samples and predictions. Lines starting with `#` are provenance comments.
//! Numbers are written in shortest round-trip form; an empty cell is a
//! missing value.

use std::io::Write;
use std::path::Path;

use bargetow_core::ais::RawReport;
use bargetow_core::features::{Feature, FeatureVector, FEATURE_COUNT};
use bargetow_core::fusion::LabeledSample;
use bargetow_core::time::Timestamp;
use bargetow_core::trajectory::Trip;

use crate::ais_csv::{record_fields, RECORD_HEADER};
use crate::error::{Error, Result};
use crate::timefmt::{format_timestamp, parse_timestamp};

/// Header plus data rows, each with its 1-based line number.
pub struct Table {
    pub path: std::path::PathBuf,
    pub headers: Vec<String>,
    pub rows: Vec<(u64, csv::StringRecord)>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Table> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(std::io::BufReader::new(file));
        let headers =
            rdr.headers().map_err(|e| Error::format(path, None, e.to_string()))?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for r in rdr.records() {
            let r = r.map_err(|e| Error::format(path, e.position().map(|p| p.line()), e.to_string()))?;
            let line = r.position().map(|p| p.line()).unwrap_or(0);
            rows.push((line, r));
        }
        Ok(Table { path: path.to_path_buf(), headers, rows })
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::format(&self.path, Some(1), format!("missing column {name}")))
    }

    fn err(&self, line: u64, msg: impl Into<String>) -> Error {
        Error::format(&self.path, Some(line), msg)
    }

    fn cell<'a>(&self, row: &'a (u64, csv::StringRecord), col: usize) -> &'a str {
        row.1.get(col).unwrap_or("")
    }

    /// Empty cell → `None`.
    pub fn number(&self, row: &(u64, csv::StringRecord), col: usize) -> Result<Option<f64>> {
        let s = self.cell(row, col);
        if s.is_empty() {
            return Ok(None);
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Some(v)),
            _ => Err(self.err(row.0, format!("{}: not a finite number: {s:?}", self.headers[col]))),
        }
    }

    fn time(&self, row: &(u64, csv::StringRecord), col: usize) -> Result<Timestamp> {
        let s = self.cell(row, col);
        parse_timestamp(s).ok_or_else(|| self.err(row.0, format!("{}: bad timestamp {s:?}", self.headers[col])))
    }

    fn feature_columns(&self) -> Result<Vec<usize>> {
        Feature::ALL.iter().map(|f| self.column(f.name())).collect()
    }

    fn feature_vector(&self, row: &(u64, csv::StringRecord), cols: &[usize]) -> Result<FeatureVector> {
        let mut values = [None; FEATURE_COUNT];
        for (v, &c) in values.iter_mut().zip(cols) {
            *v = self.number(row, c)?;
        }
        Ok(FeatureVector::from_values(values))
    }
}

fn num(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn start<W: Write>(mut out: W, comment: &str) -> std::io::Result<csv::Writer<W>> {
    out.write_all(comment.as_bytes())?;
    Ok(csv::Writer::from_writer(out))
}

/// Position of each trip among its vessel's trips, counting in slice order.
pub fn trip_indices(trips: &[Trip]) -> Vec<usize> {
    let mut seen: std::collections::BTreeMap<&str, usize> = std::collections::BTreeMap::new();
    trips
        .iter()
        .map(|t| {
            let n = seen.entry(t.vessel_id.as_str()).or_default();
            *n += 1;
            *n - 1
        })
        .collect()
}

/// Label key of a trip: `vessel_id/trip_index`.
pub fn trip_key(vessel_id: &str, trip_index: usize) -> String {
    format!("{vessel_id}/{trip_index}")
}

/// One row per record, prefixed with the trip it belongs to.
pub fn write_trips<W: Write>(out: W, comment: &str, trips: &[Trip]) -> std::io::Result<()> {
    let mut w = start(out, comment)?;
    let mut header = vec!["trip_index", "open_ended", "first_index"];
    header.extend(RECORD_HEADER);
    w.write_record(&header)?;
    for (t, idx) in trips.iter().zip(trip_indices(trips)) {
        for r in &t.records {
            let mut row = vec![idx.to_string(), t.open_ended.to_string(), t.first_index.to_string()];
            row.extend(record_fields(r));
            w.write_record(&row)?;
        }
    }
    w.flush()
}

/// One row per trip: identity, time span, record count and open-ended flag.
pub fn write_trip_summary<W: Write>(out: W, comment: &str, trips: &[Trip]) -> std::io::Result<()> {
    let mut w = start(out, comment)?;
    w.write_record(["vessel_id", "trip_index", "start_time", "end_time", "n_points", "open_ended"])?;
    for (t, idx) in trips.iter().zip(trip_indices(trips)) {
        w.write_record([
            t.vessel_id.clone(),
            idx.to_string(),
            format_timestamp(t.start_time),
            format_timestamp(t.end_time),
            t.len().to_string(),
            t.open_ended.to_string(),
        ])?;
    }
    w.flush()
}

pub fn read_trips(path: &Path) -> Result<Vec<Trip>> {
    let table = Table::read(path)?;
    let idx_col = table.column("trip_index")?;
    let open_col = table.column("open_ended")?;
    let first_col = table.column("first_index")?;
    let rec_cols: Vec<usize> = RECORD_HEADER.iter().map(|h| table.column(h)).collect::<Result<_>>()?;
    let mut trips = Vec::new();
    let mut i = 0;
    while i < table.rows.len() {
        let key = |k: usize| (table.cell(&table.rows[k], idx_col), table.cell(&table.rows[k], rec_cols[0]));
        let id = key(i);
        let mut j = i;
        let mut records = Vec::new();
        while j < table.rows.len() && key(j) == id {
            let row = &table.rows[j];
            let c = |k: usize| rec_cols[k];
            let raw = RawReport {
                vessel_id: table.cell(row, c(0)).to_string(),
                timestamp: Some(table.time(row, c(1))?),
                lat: table.number(row, c(2))?,
                lon: table.number(row, c(3))?,
                sog: table.number(row, c(4))?,
                cog: table.number(row, c(5))?,
                heading: table.number(row, c(6))?,
                length_m: table.number(row, c(7))?,
                width_m: table.number(row, c(8))?,
                draft_m: table.number(row, c(9))?,
            };
            records.push(raw.validate().map_err(|why| table.err(row.0, why.to_string()))?);
            j += 1;
        }
        let first = &table.rows[i];
        let mut trip = Trip::new(records).map_err(|e| table.err(first.0, format!("trip {} of {}: {e}", id.0, id.1)))?;
        trip.open_ended =
            table.cell(first, open_col).parse().map_err(|_| table.err(first.0, "open_ended must be true or false"))?;
        trip.first_index = table.cell(first, first_col).parse().map_err(|_| table.err(first.0, "bad first_index"))?;
        trips.push(trip);
        i = j;
    }
    Ok(trips)
}

/// Features of one trip.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub vessel_id: String,
    pub trip_index: usize,
    pub start_time: Timestamp,
    pub end_time: Timestamp,
    pub features: FeatureVector,
}

impl FeatureRow {
    pub fn of(trip: &Trip, trip_index: usize, features: FeatureVector) -> Self {
        FeatureRow {
            vessel_id: trip.vessel_id.clone(),
            trip_index,
            start_time: trip.start_time,
            end_time: trip.end_time,
            features,
        }
    }

    pub fn key(&self) -> String {
        trip_key(&self.vessel_id, self.trip_index)
    }
}

pub fn write_features<W: Write>(out: W, comment: &str, rows: &[FeatureRow]) -> std::io::Result<()> {
    let mut w = start(out, comment)?;
    let mut header = vec!["vessel_id", "trip_index", "start_time", "end_time"];
    header.extend(Feature::ALL.iter().map(|f| f.name()));
    w.write_record(&header)?;
    for r in rows {
        let mut row = vec![
            r.vessel_id.clone(),
            r.trip_index.to_string(),
            format_timestamp(r.start_time),
            format_timestamp(r.end_time),
        ];
        row.extend(r.features.values().iter().map(|v| num(*v)));
        w.write_record(&row)?;
    }
    w.flush()
}

pub fn read_features(path: &Path) -> Result<Vec<FeatureRow>> {
    let table = Table::read(path)?;
    let [vessel, idx, s, e] = ["vessel_id", "trip_index", "start_time", "end_time"].map(|h| table.column(h));
    let (vessel, idx, s, e) = (vessel?, idx?, s?, e?);
    let cols = table.feature_columns()?;
    table
        .rows
        .iter()
        .map(|row| {
            let i = table.cell(row, idx);
            Ok(FeatureRow {
                vessel_id: table.cell(row, vessel).to_string(),
                trip_index: i.parse().map_err(|_| table.err(row.0, format!("bad trip_index {i:?}")))?,
                start_time: table.time(row, s)?,
                end_time: table.time(row, e)?,
                features: table.feature_vector(row, &cols)?,
            })
        })
        .collect()
}

pub fn write_labeled<W: Write>(out: W, comment: &str, samples: &[LabeledSample]) -> std::io::Result<()> {
    let mut w = start(out, comment)?;
    let mut header = vec!["detection_id", "vessel_id", "trip_index", "start_time", "end_time"];
    header.extend(Feature::ALL.iter().map(|f| f.name()));
    header.push("barge_count");
    w.write_record(&header)?;
    for s in samples {
        let mut row = vec![
            s.detection_id.clone(),
            s.vessel_id.clone(),
            s.trip_index.to_string(),
            format_timestamp(s.start_time),
            format_timestamp(s.end_time),
        ];
        row.extend(s.features.iter().map(f64::to_string));
        row.push(s.barge_count.to_string());
        w.write_record(&row)?;
    }
    w.flush()
}

/// Labeled samples; every feature cell must be filled.
pub fn read_labeled(path: &Path) -> Result<Vec<LabeledSample>> {
    let table = Table::read(path)?;
    let id = table.column("detection_id")?;
    let vessel = table.column("vessel_id")?;
    let idx = table.column("trip_index")?;
    let (s, e) = (table.column("start_time")?, table.column("end_time")?);
    let count = table.column("barge_count")?;
    let cols = table.feature_columns()?;
    let mut out = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        let mut features = [0.0; FEATURE_COUNT];
        for (j, &c) in cols.iter().enumerate() {
            features[j] = table
                .number(row, c)?
                .ok_or_else(|| table.err(row.0, format!("{} is empty in a labeled row", Feature::ALL[j])))?;
        }
        let b = table.cell(row, count);
        let barge_count = b.parse().map_err(|_| table.err(row.0, format!("barge_count {b:?} is not a count")))?;
        let i = table.cell(row, idx);
        out.push(LabeledSample {
            detection_id: table.cell(row, id).to_string(),
            vessel_id: table.cell(row, vessel).to_string(),
            trip_index: i.parse().map_err(|_| table.err(row.0, format!("bad trip_index {i:?}")))?,
            start_time: table.time(row, s)?,
            end_time: table.time(row, e)?,
            features,
            barge_count,
        });
    }
    Ok(out)
}

/// Prediction inputs: the named columns (empty cells → `None`) plus every
/// column that is neither a feature nor `barge_count`, kept as row
/// identifiers. Fails listing every missing column.
pub fn read_columns(path: &Path, names: &[String]) -> Result<PredictionInput> {
    let table = Table::read(path)?;
    let missing: Vec<String> = names.iter().filter(|n| !table.headers.contains(n)).cloned().collect();
    if !missing.is_empty() {
        return Err(bargetow_core::Error::FeatureMismatch { missing, unexpected: Vec::new() }.into());
    }
    let cols: Vec<usize> = names.iter().map(|n| table.column(n)).collect::<Result<_>>()?;
    let id_cols: Vec<usize> = (0..table.headers.len())
        .filter(|&c| {
            let h = table.headers[c].as_str();
            h != "barge_count" && Feature::from_name(h).is_none() && !names.iter().any(|n| n == h)
        })
        .collect();
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    for row in &table.rows {
        ids.push(id_cols.iter().map(|&c| table.cell(row, c).to_string()).collect());
        rows.push(cols.iter().map(|&c| table.number(row, c)).collect::<Result<Vec<_>>>()?);
    }
    let id_headers = id_cols.iter().map(|&c| table.headers[c].clone()).collect();
    Ok(PredictionInput { id_headers, ids, rows })
}

pub struct PredictionInput {
    pub id_headers: Vec<String>,
    pub ids: Vec<Vec<String>>,
    pub rows: Vec<Vec<Option<f64>>>,
}

/// Identifier columns followed by `predicted_barge_count`.
pub fn write_predictions<W: Write>(
    out: W,
    comment: &str,
    id_headers: &[String],
    ids: &[Vec<String>],
    preds: &[f64],
) -> std::io::Result<()> {
    let mut w = start(out, comment)?;
    let mut header = id_headers.to_vec();
    header.push("predicted_barge_count".into());
    w.write_record(&header)?;
    for (id, p) in ids.iter().zip(preds) {
        let mut row = id.clone();
        row.push(p.to_string());
        w.write_record(&row)?;
    }
    w.flush()
}

/// Selection-frequency table: feature, times chosen, share of runs.
pub fn write_frequency<W: Write>(out: W, comment: &str, table: &[(String, usize)], runs: usize) -> std::io::Result<()> {
    let mut w = start(out, comment)?;
    w.write_record(["feature", "selected", "fraction"])?;
    for (f, n) in table {
        w.write_record([f.clone(), n.to_string(), (*n as f64 / runs as f64).to_string()])?;
    }
    w.flush()
}

/// `vessel_id,trip_index,barge_count` rows.
pub fn write_labels<W: Write>(out: W, comment: &str, labels: &[(String, usize, u32)]) -> std::io::Result<()> {
    let mut w = start(out, comment)?;
    w.write_record(["vessel_id", "trip_index", "barge_count"])?;
    for (v, i, b) in labels {
        w.write_record([v.clone(), i.to_string(), b.to_string()])?;
    }
    w.flush()
}

/// Counts keyed by [`trip_key`].
pub fn read_labels(path: &Path) -> Result<std::collections::BTreeMap<String, u32>> {
    let table = Table::read(path)?;
    let vessel = table.column("vessel_id")?;
    let idx = table.column("trip_index")?;
    let count = table.column("barge_count")?;
    let mut out = std::collections::BTreeMap::new();
    for row in &table.rows {
        let b = table.cell(row, count);
        let b: u32 = b.parse().map_err(|_| table.err(row.0, format!("barge_count {b:?} is not a count")))?;
        let i = table.cell(row, idx);
        let i: usize = i.parse().map_err(|_| table.err(row.0, format!("bad trip_index {i:?}")))?;
        let key = trip_key(table.cell(row, vessel), i);
        if out.insert(key.clone(), b).is_some() {
            return Err(table.err(row.0, format!("trip {key} labeled twice")));
        }
    }
    Ok(out)
}

/// Matched detections without counts, raw features (empty = missing).
pub fn write_unlabeled<W: Write>(
    out: W,
    comment: &str,
    samples: &[bargetow_core::fusion::UnlabeledSample],
) -> std::io::Result<()> {
    let mut w = start(out, comment)?;
    let mut header = vec!["detection_id", "vessel_id"];
    header.extend(Feature::ALL.iter().map(|f| f.name()));
    w.write_record(&header)?;
    for s in samples {
        let mut row = vec![s.detection_id.clone(), s.vessel_id.clone()];
        row.extend(s.features.values().iter().map(|v| num(*v)));
        w.write_record(&row)?;
    }
    w.flush()
}
