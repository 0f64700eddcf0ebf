//! Spherical distance, wrap-aware angle arithmetic and planar polygon tests.
//!
//! Intersection tests treat (lon, lat) as planar coordinates. At river-reach
//! scale the distortion is irrelevant for "does this track touch this
//! footprint", and it keeps the predicates exact up to floating point.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math;
use crate::{Error, Result};

/// Mean Earth radius (IUGG), kilometers.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

/// Kilometers per nautical mile.
pub const KM_PER_NMI: f64 = 1.852;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        if !(-90.0..=90.0).contains(&lat) {
            return Err(Error::domain("lat out of range"));
        }
        if !(-180.0..=180.0).contains(&lon) {
            return Err(Error::domain("lon out of range"));
        }
        Ok(GeoPoint { lat, lon })
    }
}

/// Great-circle distance in kilometers (haversine formula).
pub fn haversine_km(a: GeoPoint, b: GeoPoint) -> f64 {
    let (phi1, phi2) = (a.lat.to_radians(), b.lat.to_radians());
    let dphi = phi2 - phi1;
    let dlambda = (b.lon - a.lon).to_radians();
    let s1 = math::sin(dphi / 2.0);
    let s2 = math::sin(dlambda / 2.0);
    let h = s1 * s1 + math::cos(phi1) * math::cos(phi2) * s2 * s2;
    2.0 * EARTH_RADIUS_KM * math::asin(math::sqrt(h.clamp(0.0, 1.0)))
}

/// Point reached by travelling `distance_km` along the great circle leaving
/// `from` with initial bearing `bearing_deg` (clockwise from north).
pub fn destination(from: GeoPoint, bearing_deg: f64, distance_km: f64) -> GeoPoint {
    let delta = distance_km / EARTH_RADIUS_KM;
    let theta = bearing_deg.to_radians();
    let phi1 = from.lat.to_radians();
    let lambda1 = from.lon.to_radians();
    let sin_phi2 = math::sin(phi1) * math::cos(delta) + math::cos(phi1) * math::sin(delta) * math::cos(theta);
    let phi2 = math::asin(sin_phi2.clamp(-1.0, 1.0));
    let lambda2 = lambda1
        + math::atan2(
            math::sin(theta) * math::sin(delta) * math::cos(phi1),
            math::cos(delta) - math::sin(phi1) * sin_phi2,
        );
    let mut lon = lambda2.to_degrees();
    if lon > 180.0 {
        lon -= 360.0;
    } else if lon < -180.0 {
        lon += 360.0;
    }
    GeoPoint { lat: phi2.to_degrees(), lon }
}

/// Minimal signed rotation taking `from_deg` onto `to_deg`, in (-180, 180].
///
/// Exactly opposite directions return +180.
pub fn signed_angle_diff(from_deg: f64, to_deg: f64) -> f64 {
    let d = (to_deg - from_deg) % 360.0;
    if d > 180.0 {
        d - 360.0
    } else if d <= -180.0 {
        d + 360.0
    } else {
        d
    }
}

/// Wraps any angle into [0, 360).
pub fn wrap_degrees(deg: f64) -> f64 {
    let w = deg % 360.0;
    let w = if w < 0.0 { w + 360.0 } else { w };
    // -1e-17 % 360 + 360 rounds to 360.0
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

/// Removes artificial 360° jumps from a course series.
pub fn unwrap_angles(series: &[f64]) -> Result<Vec<f64>> {
    let (&first, _) = series.split_first().ok_or_else(|| Error::domain("cannot unwrap an empty angle series"))?;
    let mut out = Vec::with_capacity(series.len());
    out.push(first);
    let mut acc = first;
    for w in series.windows(2) {
        acc += signed_angle_diff(w[0], w[1]);
        out.push(acc);
    }
    Ok(out)
}

/// Closed, simple polygon ring in (lat, lon).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoPolygon {
    ring: Vec<GeoPoint>,
}

impl GeoPolygon {
    /// Validates closure, vertex count and simplicity of the exterior ring.
    pub fn new(ring: Vec<GeoPoint>) -> Result<Self> {
        if ring.len() < 4 {
            return Err(Error::domain("polygon ring needs at least 4 vertices"));
        }
        if ring.first() != ring.last() {
            return Err(Error::domain("polygon ring is not closed"));
        }
        for p in &ring {
            GeoPoint::new(p.lat, p.lon)?;
        }
        let poly = GeoPolygon { ring };
        if poly.self_intersects() {
            return Err(Error::domain("polygon ring self-intersects"));
        }
        Ok(poly)
    }

    pub fn ring(&self) -> &[GeoPoint] {
        &self.ring
    }

    /// Mean of the distinct ring vertices.
    pub fn centroid(&self) -> GeoPoint {
        let verts = &self.ring[..self.ring.len() - 1];
        let n = verts.len() as f64;
        let lat = verts.iter().map(|p| p.lat).sum::<f64>() / n;
        let lon = verts.iter().map(|p| p.lon).sum::<f64>() / n;
        GeoPoint { lat, lon }
    }

    fn edges(&self) -> impl Iterator<Item = (Planar, Planar)> + '_ {
        self.ring.windows(2).map(|w| (Planar::from(w[0]), Planar::from(w[1])))
    }

    fn bbox(&self) -> BBox {
        BBox::of(self.ring.iter().copied())
    }

    fn self_intersects(&self) -> bool {
        let edges: Vec<_> = self.edges().collect();
        let m = edges.len();
        for i in 0..m {
            let (a, b) = edges[i];
            if a == b {
                return true;
            }
            for (j, &(c, d)) in edges.iter().enumerate().skip(i + 1) {
                let adjacent = j == i + 1 || (i == 0 && j == m - 1);
                if adjacent {
                    // Shared vertex is fine; folding back onto the other edge is not.
                    let (shared, far_a, far_c) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                    if orient(far_a, shared, far_c) == 0.0
                        && (on_segment(far_a, shared, far_c) || on_segment(far_c, shared, far_a))
                    {
                        return true;
                    }
                } else if segments_intersect(a, b, c, d) {
                    return true;
                }
            }
        }
        false
    }

    /// Inside or on the boundary.
    pub fn contains(&self, p: GeoPoint) -> bool {
        let q = Planar::from(p);
        if !self.bbox().contains(q) {
            return false;
        }
        let mut inside = false;
        for (a, b) in self.edges() {
            if orient(a, b, q) == 0.0 && on_segment(a, q, b) {
                return true;
            }
            if (a.y > q.y) != (b.y > q.y) {
                let x_cross = a.x + (q.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if q.x < x_cross {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

/// True iff any vertex of `polyline` lies inside/on `polygon` or any segment
/// of it touches a polygon edge.
pub fn polyline_intersects_polygon(polyline: &[GeoPoint], polygon: &GeoPolygon) -> Result<bool> {
    if polyline.is_empty() {
        return Err(Error::domain("polyline has no points"));
    }
    let pbox = polygon.bbox();
    if !pbox.overlaps(&BBox::of(polyline.iter().copied())) {
        return Ok(false);
    }
    if polyline.iter().any(|&p| polygon.contains(p)) {
        return Ok(true);
    }
    for w in polyline.windows(2) {
        let (a, b) = (Planar::from(w[0]), Planar::from(w[1]));
        if !pbox.overlaps(&BBox::of([w[0], w[1]])) {
            continue;
        }
        if polygon.edges().any(|(c, d)| segments_intersect(a, b, c, d)) {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Planar {
    x: f64,
    y: f64,
}

impl From<GeoPoint> for Planar {
    fn from(p: GeoPoint) -> Self {
        Planar { x: p.lon, y: p.lat }
    }
}

fn orient(a: Planar, b: Planar, c: Planar) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// `q` within the bounding box of segment `p`–`r` (collinearity checked by caller).
fn on_segment(p: Planar, q: Planar, r: Planar) -> bool {
    q.x <= p.x.max(r.x) && q.x >= p.x.min(r.x) && q.y <= p.y.max(r.y) && q.y >= p.y.min(r.y)
}

/// Closed-segment intersection, touching and collinear overlap included.
fn segments_intersect(p1: Planar, q1: Planar, p2: Planar, q2: Planar) -> bool {
    let sign = |v: f64| {
        if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            0
        }
    };
    let o1 = sign(orient(p1, q1, p2));
    let o2 = sign(orient(p1, q1, q2));
    let o3 = sign(orient(p2, q2, p1));
    let o4 = sign(orient(p2, q2, q1));
    if o1 != o2 && o3 != o4 {
        return true;
    }
    (o1 == 0 && on_segment(p1, p2, q1))
        || (o2 == 0 && on_segment(p1, q2, q1))
        || (o3 == 0 && on_segment(p2, p1, q2))
        || (o4 == 0 && on_segment(p2, q1, q2))
}

#[derive(Debug, Clone, Copy)]
struct BBox {
    min: Planar,
    max: Planar,
}

impl BBox {
    fn of(points: impl IntoIterator<Item = GeoPoint>) -> Self {
        let mut b = BBox {
            min: Planar { x: f64::INFINITY, y: f64::INFINITY },
            max: Planar { x: f64::NEG_INFINITY, y: f64::NEG_INFINITY },
        };
        for p in points {
            b.min.x = b.min.x.min(p.lon);
            b.min.y = b.min.y.min(p.lat);
            b.max.x = b.max.x.max(p.lon);
            b.max.y = b.max.y.max(p.lat);
        }
        b
    }

    fn contains(&self, q: Planar) -> bool {
        q.x >= self.min.x && q.x <= self.max.x && q.y >= self.min.y && q.y <= self.max.y
    }

    fn overlaps(&self, other: &BBox) -> bool {
        self.min.x <= other.max.x && other.min.x <= self.max.x && self.min.y <= other.max.y && other.min.y <= self.max.y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn pt(lat: f64, lon: f64) -> GeoPoint {
        GeoPoint::new(lat, lon).unwrap()
    }

    fn square() -> GeoPolygon {
        GeoPolygon::new(vec![pt(0.0, 0.0), pt(0.0, 1.0), pt(1.0, 1.0), pt(1.0, 0.0), pt(0.0, 0.0)]).unwrap()
    }

    // Spherical law of cosines, independent of the haversine route.
    fn cosine_law_km(a: GeoPoint, b: GeoPoint) -> f64 {
        let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
        let dl = (b.lon - a.lon).to_radians();
        let c = p1.sin() * p2.sin() + p1.cos() * p2.cos() * dl.cos();
        EARTH_RADIUS_KM * c.clamp(-1.0, 1.0).acos()
    }

    #[test]
    fn haversine_identity_and_closed_forms() {
        let a = pt(29.95, -90.07);
        assert_eq!(haversine_km(a, a), 0.0);
        let one_deg = haversine_km(pt(0.0, 0.0), pt(0.0, 1.0));
        assert!((one_deg - EARTH_RADIUS_KM * core::f64::consts::PI / 180.0).abs() < 1e-9);
        assert!((one_deg - cosine_law_km(pt(0.0, 0.0), pt(0.0, 1.0))).abs() < 1e-6);
        let anti = haversine_km(pt(0.0, 0.0), pt(0.0, 180.0));
        assert!((anti - core::f64::consts::PI * EARTH_RADIUS_KM).abs() < 1e-9);
    }

    #[test]
    fn angle_diff_wraps() {
        assert_eq!(signed_angle_diff(350.0, 10.0), 20.0);
        assert_eq!(signed_angle_diff(10.0, 350.0), -20.0);
        assert_eq!(signed_angle_diff(0.0, 180.0), 180.0);
        assert_eq!(signed_angle_diff(180.0, 0.0), 180.0);
    }

    #[test]
    fn unwrap_examples() {
        assert_eq!(unwrap_angles(&[359.0, 1.0, 3.0]).unwrap(), vec![359.0, 361.0, 363.0]);
        assert_eq!(unwrap_angles(&[10.0, 10.0, 10.0]).unwrap(), vec![10.0, 10.0, 10.0]);
        assert!(matches!(unwrap_angles(&[]), Err(Error::Domain(_))));
    }

    #[test]
    fn polygon_validation() {
        assert!(GeoPolygon::new(vec![pt(0.0, 0.0), pt(0.0, 1.0), pt(1.0, 1.0)]).is_err());
        // open ring
        assert!(GeoPolygon::new(vec![pt(0.0, 0.0), pt(0.0, 1.0), pt(1.0, 1.0), pt(1.0, 0.0)]).is_err());
        // bow tie
        let bowtie = vec![pt(0.0, 0.0), pt(1.0, 1.0), pt(1.0, 0.0), pt(0.0, 1.0), pt(0.0, 0.0)];
        assert!(GeoPolygon::new(bowtie).is_err());
        assert!(GeoPolygon::new(vec![pt(0.0, 0.0), pt(0.0, 1.0), pt(0.0, 0.5), pt(0.0, 0.0)]).is_err());
    }

    #[test]
    fn intersection_cases() {
        let sq = square();
        assert!(polyline_intersects_polygon(&[pt(0.5, 0.5)], &sq).unwrap());
        // Crossing: both endpoints outside, segment passes through x in [0,1].
        // y = 0.5 line from lon -1 to 2 hits edges lon=0 and lon=1 at lat 0.5.
        assert!(polyline_intersects_polygon(&[pt(0.5, -1.0), pt(0.5, 2.0)], &sq).unwrap());
        // Corner clip: line lat = lon - 0.5 crosses the bottom edge at lon 0.5.
        assert!(polyline_intersects_polygon(&[pt(-0.5, 0.0), pt(0.5, 1.0)], &sq).unwrap());
        assert!(!polyline_intersects_polygon(&[pt(5.0, 5.0), pt(6.0, 6.0)], &sq).unwrap());
        // Bounding boxes overlap but the segment passes outside the corner.
        assert!(!polyline_intersects_polygon(&[pt(1.5, 0.8), pt(0.8, 1.5)], &sq).unwrap());
        // On the boundary counts.
        assert!(polyline_intersects_polygon(&[pt(0.0, 0.5)], &sq).unwrap());
        assert!(polyline_intersects_polygon(&[pt(1.0, 1.0)], &sq).unwrap());
        assert!(polyline_intersects_polygon(&[], &sq).is_err());
    }

    #[test]
    fn concave_polygon_notch_is_outside() {
        // U shape opening north.
        let u = GeoPolygon::new(vec![
            pt(0.0, 0.0),
            pt(0.0, 3.0),
            pt(3.0, 3.0),
            pt(3.0, 2.0),
            pt(1.0, 2.0),
            pt(1.0, 1.0),
            pt(3.0, 1.0),
            pt(3.0, 0.0),
            pt(0.0, 0.0),
        ])
        .unwrap();
        assert!(!u.contains(pt(2.0, 1.5)));
        assert!(u.contains(pt(2.0, 0.5)));
        assert!(!polyline_intersects_polygon(&[pt(2.5, 1.2), pt(1.5, 1.8)], &u).unwrap());
    }

    fn arb_point() -> impl Strategy<Value = GeoPoint> {
        (-80.0f64..80.0, -179.0f64..179.0).prop_map(|(lat, lon)| GeoPoint { lat, lon })
    }

    proptest! {
        #[test]
        fn haversine_symmetric_and_triangle(a in arb_point(), b in arb_point(), c in arb_point()) {
            let ab = haversine_km(a, b);
            prop_assert_eq!(ab, haversine_km(b, a));
            prop_assert!(ab >= 0.0);
            let ac = haversine_km(a, c);
            let cb = haversine_km(c, b);
            prop_assert!(ab <= (ac + cb) * (1.0 + 1e-9) + 1e-12);
        }

        #[test]
        fn angle_diff_recovers_rotation(x in -720.0f64..720.0, d in -179.999f64..=180.0) {
            let got = signed_angle_diff(x, x + d);
            prop_assert!((got - d).abs() < 1e-9, "x={} d={} got={}", x, d, got);
        }

        #[test]
        fn unwrap_rewrap_roundtrip(series in proptest::collection::vec(0.0f64..360.0, 1..60)) {
            let un = unwrap_angles(&series).unwrap();
            prop_assert_eq!(un[0], series[0]);
            for w in un.windows(2) {
                let step = w[1] - w[0];
                prop_assert!(step > -180.0 - 1e-9 && step <= 180.0 + 1e-9);
            }
            for (u, s) in un.iter().zip(&series) {
                let back = wrap_degrees(*u);
                let err = signed_angle_diff(back, *s).abs();
                prop_assert!(err < 1e-9);
            }
        }

        #[test]
        fn intersection_invariant_under_reversal_and_rotation(
            pts in proptest::collection::vec((-0.5f64..1.5, -0.5f64..1.5), 1..6),
            shift in 0usize..4,
        ) {
            let line: Vec<GeoPoint> = pts.iter().map(|&(lat, lon)| GeoPoint { lat, lon }).collect();
            let sq = square();
            let base = polyline_intersects_polygon(&line, &sq).unwrap();
            let mut rev = line.clone();
            rev.reverse();
            prop_assert_eq!(base, polyline_intersects_polygon(&rev, &sq).unwrap());
            let verts = &sq.ring()[..4];
            let mut rotated: Vec<GeoPoint> = (0..4).map(|i| verts[(i + shift) % 4]).collect();
            rotated.push(rotated[0]);
            let rot = GeoPolygon::new(rotated).unwrap();
            prop_assert_eq!(base, polyline_intersects_polygon(&line, &rot).unwrap());
        }
    }
}
