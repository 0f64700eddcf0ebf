//! Detections as a GeoJSON FeatureCollection.
//!
//! Each feature carries a `Polygon` geometry in WGS84 lon/lat and the
//! properties `detection_id` (string), `scene_time` (ISO 8601 UTC) and an
//! optional non-negative integer `barge_count`. Only the outer ring is used.

use std::path::Path;

use bargetow_core::fusion::Detection;
use bargetow_core::geo::{GeoPoint, GeoPolygon};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::timefmt::{format_timestamp, parse_timestamp};

fn ring(coords: &Value) -> Option<Vec<(f64, f64)>> {
    coords
        .as_array()?
        .first()?
        .as_array()?
        .iter()
        .map(|p| {
            let p = p.as_array()?;
            Some((p.first()?.as_f64()?, p.get(1)?.as_f64()?))
        })
        .collect()
}

fn detection(feature: &Value) -> std::result::Result<Detection, String> {
    let geometry = &feature["geometry"];
    if geometry["type"] != "Polygon" {
        return Err("geometry must be a Polygon".into());
    }
    let coords = ring(&geometry["coordinates"]).ok_or("polygon coordinates must be [[[lon, lat], ...]]")?;
    let points = coords
        .into_iter()
        .map(|(lon, lat)| GeoPoint::new(lat, lon))
        .collect::<bargetow_core::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let footprint = GeoPolygon::new(points).map_err(|e| e.to_string())?;
    let props = &feature["properties"];
    let detection_id = props["detection_id"].as_str().ok_or("properties.detection_id must be a string")?.to_string();
    let scene_time = props["scene_time"]
        .as_str()
        .and_then(parse_timestamp)
        .ok_or("properties.scene_time must be an ISO 8601 time")?;
    let barge_count = match &props["barge_count"] {
        Value::Null => None,
        v => Some(
            v.as_u64()
                .and_then(|b| u32::try_from(b).ok())
                .ok_or("properties.barge_count must be a non-negative integer")?,
        ),
    };
    Ok(Detection { detection_id, scene_time, footprint, barge_count })
}

pub fn parse_detections(text: &str, path: &Path) -> Result<Vec<Detection>> {
    let doc: Value =
        serde_json::from_str(text).map_err(|e| Error::format(path, Some(e.line() as u64), e.to_string()))?;
    if doc["type"] != "FeatureCollection" {
        return Err(Error::format(path, None, "expected a FeatureCollection"));
    }
    let features = doc["features"].as_array().ok_or_else(|| Error::format(path, None, "features must be an array"))?;
    features
        .iter()
        .enumerate()
        .map(|(i, f)| detection(f).map_err(|m| Error::format(path, None, format!("feature {i}: {m}"))))
        .collect()
}

pub fn read_detections(path: &Path) -> Result<Vec<Detection>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_detections(&text, path)
}

pub fn to_geojson(detections: &[Detection]) -> Value {
    let features: Vec<Value> = detections
        .iter()
        .map(|d| {
            let ring: Vec<Value> = d.footprint.ring().iter().map(|p| json!([p.lon, p.lat])).collect();
            let mut props = json!({
                "detection_id": d.detection_id,
                "scene_time": format_timestamp(d.scene_time),
            });
            if let Some(b) = d.barge_count {
                props["barge_count"] = json!(b);
            }
            json!({
                "type": "Feature",
                "geometry": {"type": "Polygon", "coordinates": [ring]},
                "properties": props,
            })
        })
        .collect();
    json!({"type": "FeatureCollection", "features": features})
}
