//! Reference geometry: winding numbers, spherical law of cosines and a
//! permissive WKT reader.

/// Vertices of a `POINT(x y)` or the exterior ring of a `POLYGON((...))`,
/// as (lon, lat). An optional `SRID=n;` prefix is skipped.
pub fn parse_ring(wkt: &str) -> Option<Vec<(f64, f64)>> {
    let body = match wkt.split_once(';') {
        Some((srid, rest)) if srid.trim().to_ascii_uppercase().starts_with("SRID=") => rest,
        _ => wkt,
    };
    let open = body.find('(')?;
    let inner = body[open..].trim_start_matches('(');
    let close = inner.find(')')?;
    inner[..close]
        .split(',')
        .map(|pair| {
            let mut it = pair.split_whitespace().map(|v| v.parse::<f64>());
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(x)), Some(Ok(y)), None) => Some((x, y)),
                _ => None,
            }
        })
        .collect()
}

/// Non-zero winding rule on a closed or open ring of (x, y) vertices.
pub fn winding_contains(ring: &[(f64, f64)], p: (f64, f64)) -> bool {
    let mut pts = ring.to_vec();
    if pts.first() == pts.last() {
        pts.pop();
    }
    let n = pts.len();
    let mut winding = 0i32;
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        let side = (b.0 - a.0) * (p.1 - a.1) - (p.0 - a.0) * (b.1 - a.1);
        if a.1 <= p.1 {
            if b.1 > p.1 && side > 0.0 {
                winding += 1;
            }
        } else if b.1 <= p.1 && side < 0.0 {
            winding -= 1;
        }
    }
    winding != 0
}

/// Smallest distance from `p` to any edge of the ring, in the ring's units.
pub fn distance_to_boundary(ring: &[(f64, f64)], p: (f64, f64)) -> f64 {
    ring.windows(2)
        .chain(std::iter::once([ring[ring.len() - 1], ring[0]].as_slice()))
        .map(|e| {
            let (a, b) = (e[0], e[1]);
            let (dx, dy) = (b.0 - a.0, b.1 - a.1);
            let len2 = dx * dx + dy * dy;
            let t = if len2 == 0.0 {
                0.0
            } else {
                (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
            };
            ((a.0 + t * dx - p.0).powi(2) + (a.1 + t * dy - p.1).powi(2)).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Great-circle distance by the spherical law of cosines.
pub fn law_of_cosines_m(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dl = (lon2 - lon1).to_radians();
    let c = (p1.sin() * p2.sin() + p1.cos() * p2.cos() * dl.cos()).clamp(-1.0, 1.0);
    EARTH_RADIUS_M * c.acos()
}

/// Great-circle distance by the haversine formula, written out here so
/// path-length checks do not depend on the library.
pub fn haversine_m(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let dphi = (lat2 - lat1).to_radians();
    let dlambda = (lon2 - lon1).to_radians();
    let h = (dphi / 2.0).sin().powi(2)
        + lat1.to_radians().cos() * lat2.to_radians().cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}
