//! Helpers shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use bargetow_core::ais::{AisRecord, Heading, VesselTrack};
use bargetow_core::features::{FeatureConfig, FEATURE_COUNT};
use bargetow_core::fusion::Detection;
use bargetow_core::geo::{destination, GeoPoint, GeoPolygon};
use bargetow_core::synth::{generate_trip, SynthConfig};
use bargetow_core::time::Timestamp;
use bargetow_core::trajectory::Trip;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A synthetic trip roughened for oracle testing: irregular sampling,
/// partly missing headings, sometimes missing statics.
pub fn rough_trip(seed: u64) -> Trip {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = SynthConfig {
        ping_interval_s: rng.random_range(20..120),
        trip_duration_range_hrs: (0.3, 2.5),
        course_noise_scale: rng.random_range(0.0..40.0),
        speed_noise_scale: rng.random_range(0.0..0.6),
        ..SynthConfig::default()
    };
    let trip = generate_trip(rng.random_range(0..=12), &cfg, seed).unwrap();
    let mut t = trip.start_time.unix();
    let drop_draft = rng.random_bool(0.2);
    let drop_heading = rng.random_range(0.0..1.0);
    let mut records: Vec<AisRecord> = Vec::new();
    for (i, r) in trip.records.iter().enumerate() {
        let mut r = r.clone();
        if i > 0 {
            t += rng.random_range(5..400);
        }
        r.timestamp = Timestamp(t);
        if rng.random_bool(drop_heading) {
            r.heading = Heading::Unavailable;
        }
        if drop_draft {
            r.draft_m = None;
        }
        if rng.random_bool(0.05) {
            r.sog = (r.sog * 4.0).round() / 4.0;
        }
        records.push(r);
    }
    Trip::new(records).unwrap()
}

// ---- independent feature recomputation -------------------------------------

fn o_mean(x: &[f64]) -> Option<f64> {
    if x.is_empty() {
        return None;
    }
    let mut s = 0.0;
    for v in x {
        s += v;
    }
    Some(s / x.len() as f64)
}

fn o_std(x: &[f64]) -> Option<f64> {
    if x.len() < 2 {
        return None;
    }
    let m = o_mean(x)?;
    let mut ss = 0.0;
    for v in x {
        ss += (v - m) * (v - m);
    }
    Some((ss / (x.len() as f64 - 1.0)).sqrt())
}

fn o_quantile(x: &[f64], q: f64) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pos = q * (s.len() - 1) as f64;
    let i = pos.floor() as usize;
    if i + 1 >= s.len() {
        return s[s.len() - 1];
    }
    s[i] + (pos - i as f64) * (s[i + 1] - s[i])
}

fn o_entropy(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / n as f64;
            h -= p * p.log2();
        }
    }
    h.max(0.0)
}

/// Signed shortest rotation from `a` to `b`, in (-180, 180].
fn o_turn(a: f64, b: f64) -> f64 {
    let mut d = (b - a) % 360.0;
    if d <= -180.0 {
        d += 360.0;
    }
    if d > 180.0 {
        d -= 360.0;
    }
    d
}

fn o_haversine(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (la1, lo1, la2, lo2) = (a.0.to_radians(), a.1.to_radians(), b.0.to_radians(), b.1.to_radians());
    let h = ((la2 - la1) / 2.0).sin().powi(2) + la1.cos() * la2.cos() * ((lo2 - lo1) / 2.0).sin().powi(2);
    2.0 * 6371.0088 * h.sqrt().min(1.0).asin()
}

fn o_mode(vals: &[f64]) -> Option<f64> {
    let mut best: Option<(usize, f64)> = None;
    for &v in vals {
        let c = vals.iter().filter(|&&w| w == v).count();
        best = match best {
            Some((bc, bv)) if bc > c || (bc == c && bv <= v) => Some((bc, bv)),
            _ => Some((c, v)),
        };
    }
    best.map(|b| b.1)
}

/// The 39 features in column order, recomputed from their definitions.
pub fn oracle(trip: &Trip, cfg: &FeatureConfig) -> [Option<f64>; FEATURE_COUNT] {
    let r = &trip.records;
    let n = r.len();
    let s: Vec<f64> = r.iter().map(|x| x.sog).collect();
    let dt: Vec<f64> = (0..n - 1).map(|i| (r[i + 1].timestamp.unix() - r[i].timestamp.unix()) as f64).collect();

    let len = o_mode(&r.iter().filter_map(|x| x.length_m).collect::<Vec<_>>());
    let wid = o_mode(&r.iter().filter_map(|x| x.width_m).collect::<Vec<_>>());
    let dft = o_mode(&r.iter().filter_map(|x| x.draft_m).collect::<Vec<_>>());

    let mean = o_mean(&s).unwrap();
    let med = o_quantile(&s, 0.5);
    let std = o_std(&s).unwrap();
    let iqr = o_quantile(&s, 0.75) - o_quantile(&s, 0.25);
    let mad = o_quantile(&s.iter().map(|v| (v - med).abs()).collect::<Vec<_>>(), 0.5);
    let max = s.iter().cloned().fold(f64::MIN, f64::max);
    let min = s.iter().cloned().fold(f64::MAX, f64::min);
    let cv = if mean != 0.0 { Some(std / mean) } else { None };
    let mut w = dt.clone();
    w.push(o_mean(&dt).unwrap());
    let wsum: f64 = w.iter().sum();
    let share = |f: &dyn Fn(f64) -> bool| {
        let mut acc = 0.0;
        for i in 0..n {
            if f(s[i]) {
                acc += w[i];
            }
        }
        100.0 * acc / wsum
    };
    let pct_low = share(&|v| v < cfg.low_speed_kn);
    let pct_high = share(&|v| v > cfg.high_speed_kn);
    let pct_opt = share(&|v| v >= cfg.optimal_range_kn.0 && v <= cfg.optimal_range_kn.1);
    let sog_ent = if max > min {
        let b = cfg.entropy_bins_speed;
        let mut c = vec![0; b];
        for v in &s {
            c[(((v - min) / (max - min) * b as f64).floor() as usize).min(b - 1)] += 1;
        }
        o_entropy(&c)
    } else {
        0.0
    };

    let acc: Vec<f64> = (0..n - 1).map(|i| (s[i + 1] - s[i]) / (dt[i] / 60.0)).collect();
    let pos: Vec<f64> = acc.iter().cloned().filter(|a| *a > 0.0).collect();
    let neg: Vec<f64> = acc.iter().cloned().filter(|a| *a < 0.0).collect();
    let acc_min = acc.iter().cloned().fold(f64::MAX, f64::min);
    let acc_zc = if acc.len() >= 2 {
        let mut last = 0.0;
        let mut zc = 0;
        for &a in &acc {
            if a == 0.0 {
                continue;
            }
            if last != 0.0 && (a > 0.0) != (last > 0.0) {
                zc += 1;
            }
            last = a;
        }
        Some(zc as f64)
    } else {
        None
    };

    let c: Vec<f64> = r.iter().map(|x| x.cog).collect();
    let mut unwrapped = vec![c[0]];
    for i in 1..n {
        let prev = unwrapped[i - 1];
        unwrapped.push(prev + o_turn(c[i - 1], c[i]));
    }
    let cb = cfg.entropy_bins_course;
    let mut cc = vec![0; cb];
    for v in &c {
        cc[((v / (360.0 / cb as f64)).floor() as usize).min(cb - 1)] += 1;
    }
    let turns: Vec<f64> = (0..n - 1).map(|i| o_turn(c[i], c[i + 1])).collect();
    let rates: Vec<f64> = (0..n - 1).map(|i| (turns[i] / (dt[i] / 60.0)).abs()).collect();
    let offsets: Vec<f64> = r
        .iter()
        .filter_map(|x| match x.heading {
            Heading::Degrees(h) => Some(o_turn(h, x.cog)),
            Heading::Unavailable => None,
        })
        .collect();
    let (off_mean, off_std) = if offsets.len() >= 2 { (o_mean(&offsets), o_std(&offsets)) } else { (None, None) };

    let dur = (r[n - 1].timestamp.unix() - r[0].timestamp.unix()) as f64 / 3600.0;
    let mut dist = 0.0;
    for i in 0..n - 1 {
        dist += (s[i] + s[i + 1]) / 2.0 * dt[i] / 3600.0;
    }
    dist *= 1.852;
    let direct = o_haversine((r[0].lat, r[0].lon), (r[n - 1].lat, r[n - 1].lon));
    let sino = if direct >= cfg.min_direct_km { Some(dist / direct) } else { None };

    let prod = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(x), Some(y)) => Some(x * y),
        _ => None,
    };
    let dlt = match (dft, len) {
        (Some(d), Some(l)) if l != 0.0 => Some(d / l),
        _ => None,
    };
    [
        len,
        wid,
        dft,
        Some(mean),
        Some(med),
        Some(std),
        Some(iqr),
        Some(mad),
        Some(max),
        Some(min),
        Some(max - min),
        cv,
        Some(pct_low),
        Some(pct_high),
        Some(pct_opt),
        Some(sog_ent),
        o_mean(&pos),
        o_mean(&neg),
        o_std(&acc),
        Some(acc_min),
        acc_zc,
        o_std(&unwrapped),
        Some(o_entropy(&cc)),
        o_std(&rates),
        Some(turns.iter().map(|t| t.abs()).sum()),
        off_mean,
        off_std,
        Some(dur),
        Some(dist),
        Some(direct),
        sino,
        prod(len, wid),
        dlt,
        prod(Some(dur), cv),
        prod(Some(mean), len),
        prod(Some(std), dft),
        prod(Some(mean), wid),
        Some(mean * mean),
        prod(dft, dft),
    ]
}

/// Relative agreement with an absolute floor for values at zero.
pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-3)
}

// ---- scenes for fusion and the CLI -----------------------------------------

pub const T0: i64 = 1_700_000_000;

pub fn rec(v: &str, t: i64, p: GeoPoint, sog: f64, cog: f64) -> AisRecord {
    AisRecord {
        vessel_id: v.to_string(),
        timestamp: Timestamp(t),
        lat: p.lat,
        lon: p.lon,
        sog,
        cog,
        heading: Heading::Degrees(cog),
        length_m: Some(60.0),
        width_m: Some(11.0),
        draft_m: Some(2.8),
    }
}

/// Moored 90 min, underway east at `speed_kn` for `hours`, moored 90 min;
/// one-minute pings. The underway leg passes `via` at T0.
pub fn voyage(v: &str, via: GeoPoint, hours: f64, speed_kn: f64) -> VesselTrack {
    let half = (hours * 30.0) as i64;
    let km_per_min = speed_kn * 1.852 / 60.0;
    let start = destination(via, 270.0, km_per_min * half as f64);
    let end = destination(via, 90.0, km_per_min * half as f64);
    let mut records = Vec::new();
    for k in -half - 90..-half {
        records.push(rec(v, T0 + 60 * k, start, 0.1, 0.0));
    }
    for k in -half..=half {
        records.push(rec(v, T0 + 60 * k, destination(via, 90.0, km_per_min * k as f64), speed_kn, 90.0));
    }
    for k in half + 1..=half + 90 {
        records.push(rec(v, T0 + 60 * k, end, 0.1, 0.0));
    }
    VesselTrack { vessel_id: v.to_string(), records }
}

pub fn square(center: GeoPoint, half_deg: f64) -> GeoPolygon {
    let (la, lo) = (center.lat, center.lon);
    let corners = [(-1.0, -1.0), (-1.0, 1.0), (1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)];
    GeoPolygon::new(corners.iter().map(|(a, b)| GeoPoint::new(la + a * half_deg, lo + b * half_deg).unwrap()).collect())
        .unwrap()
}

pub fn detection(id: &str, t: i64, footprint: GeoPolygon, count: Option<u32>) -> Detection {
    Detection { detection_id: id.to_string(), scene_time: Timestamp(t), footprint, barge_count: count }
}

// ---- predicates re-evaluated from scratch ----------------------------------

/// Ray casting with edges counted as inside, on raw lon/lat.
pub fn inside(poly: &[(f64, f64)], p: (f64, f64)) -> bool {
    for w in poly.windows(2) {
        if on_segment(w[0], w[1], p) {
            return true;
        }
    }
    let mut c = false;
    for w in poly.windows(2) {
        let ((x1, y1), (x2, y2)) = (w[0], w[1]);
        if (y1 > p.1) != (y2 > p.1) && p.0 < (x2 - x1) * (p.1 - y1) / (y2 - y1) + x1 {
            c = !c;
        }
    }
    c
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn on_segment(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> bool {
    cross(a, b, p) == 0.0 && p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
}

fn segments_cross(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> bool {
    let (d1, d2, d3, d4) = (cross(c, d, a), cross(c, d, b), cross(a, b, c), cross(a, b, d));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    on_segment(c, d, a) || on_segment(c, d, b) || on_segment(a, b, c) || on_segment(a, b, d)
}

/// Temporal and geometric match predicates for one vessel, from scratch.
pub fn predicates(track: &VesselTrack, det: &Detection, window_s: i64) -> (bool, bool) {
    let pts: Vec<(f64, f64)> = track
        .records
        .iter()
        .filter(|r| (r.timestamp.unix() - det.scene_time.unix()).abs() <= window_s)
        .map(|r| (r.lon, r.lat))
        .collect();
    if pts.is_empty() {
        return (false, false);
    }
    let poly: Vec<(f64, f64)> = det.footprint.ring().iter().map(|p| (p.lon, p.lat)).collect();
    let hit = pts.iter().any(|&p| inside(&poly, p))
        || pts.windows(2).any(|s| poly.windows(2).any(|e| segments_cross(s[0], s[1], e[0], e[1])));
    (true, hit)
}

/// MarineCadastre-style CSV text for the given tracks.
pub fn ais_csv(tracks: &[VesselTrack]) -> String {
    let mut s = String::from("MMSI,BaseDateTime,LAT,LON,SOG,COG,Heading,Length,Width,Draft\n");
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for t in tracks {
        for r in &t.records {
            let time = chrono::DateTime::from_timestamp(r.timestamp.unix(), 0).unwrap();
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.vessel_id,
                time.format("%Y-%m-%dT%H:%M:%S"),
                r.lat,
                r.lon,
                r.sog,
                r.cog,
                r.heading.degrees().unwrap_or(511.0),
                opt(r.length_m),
                opt(r.width_m),
                opt(r.draft_m)
            ));
        }
    }
    s
}
