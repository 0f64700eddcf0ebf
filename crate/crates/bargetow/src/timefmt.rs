//! UTC instants as text.

use bargetow_core::time::Timestamp;
use chrono::{DateTime, NaiveDateTime};

/// Accepts RFC 3339 (`2023-05-01T12:00:00Z`, offsets allowed), naive
/// date-times with `T` or a space (read as UTC), or integer Unix seconds.
/// Fractional seconds are truncated.
pub fn parse_timestamp(s: &str) -> Option<Timestamp> {
    let s = s.trim();
    if let Ok(secs) = s.parse::<i64>() {
        return Some(Timestamp(secs));
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(Timestamp(dt.timestamp()));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(Timestamp(dt.and_utc().timestamp()));
        }
    }
    None
}

/// `YYYY-MM-DDTHH:MM:SSZ`.
pub fn format_timestamp(t: Timestamp) -> String {
    match DateTime::from_timestamp(t.unix(), 0) {
        Some(dt) => dt.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
        None => t.unix().to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepted_forms() {
        let t = Timestamp(1_682_942_400);
        for s in [
            "2023-05-01T12:00:00Z",
            "2023-05-01T12:00:00",
            "2023-05-01 12:00:00",
            "2023-05-01T14:00:00+02:00",
            "1682942400",
        ] {
            assert_eq!(parse_timestamp(s), Some(t), "{s}");
        }
        assert_eq!(parse_timestamp("2023-05-01T12:00:00.75"), Some(t));
        assert_eq!(parse_timestamp("yesterday"), None);
        assert_eq!(format_timestamp(t), "2023-05-01T12:00:00Z");
    }
}
