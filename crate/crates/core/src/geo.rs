//! Geodetic and planar geometry primitives.
//!
//! Coordinates are WGS84 degrees. Distances use a spherical earth of radius
//! [`EARTH_RADIUS_M`]; containment tests treat longitude/latitude as planar
//! x/y, which is what the region filters in the query layer expect.

use std::fmt;

use thiserror::Error;

/// Mean earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Spatial reference identifier of every geometry handled here.
pub const SRID_WGS84: u32 = 4326;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("invalid latitude {0}; expected finite degrees in [-90, 90]")]
    InvalidLatitude(f64),
    #[error("invalid longitude {0}; expected finite degrees in [-180, 180]")]
    InvalidLongitude(f64),
    #[error("malformed WKT: {0}")]
    MalformedWkt(String),
    #[error("polygon ring is not closed (first vertex differs from last)")]
    OpenRing,
    #[error("polygon ring needs at least 3 distinct vertices, found {0}")]
    TooFewVertices(usize),
    #[error("invalid bounding box: min exceeds max")]
    InvalidBoundingBox,
}

/// A WGS84 position in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self, GeoError> {
        if !lat.is_finite() || !(-90.0..=90.0).contains(&lat) {
            return Err(GeoError::InvalidLatitude(lat));
        }
        if !lon.is_finite() || !(-180.0..=180.0).contains(&lon) {
            return Err(GeoError::InvalidLongitude(lon));
        }
        Ok(Self { lat, lon })
    }

    pub fn is_valid(&self) -> bool {
        Self::new(self.lat, self.lon).is_ok()
    }

    /// Arithmetic mean of the coordinates. Returns `None` for an empty input.
    pub fn centroid<'a, I>(points: I) -> Option<GeoPoint>
    where
        I: IntoIterator<Item = &'a GeoPoint>,
    {
        let (mut lat, mut lon, mut n) = (0.0, 0.0, 0usize);
        for p in points {
            lat += p.lat;
            lon += p.lon;
            n += 1;
        }
        (n > 0).then(|| GeoPoint {
            lat: lat / n as f64,
            lon: lon / n as f64,
        })
    }

    /// `POINT(lon lat)`.
    pub fn to_wkt(&self) -> String {
        format!("POINT({} {})", self.lon, self.lat)
    }
}

/// Axis-aligned box in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min_lat: f64,
    pub max_lat: f64,
    pub min_lon: f64,
    pub max_lon: f64,
}

impl BoundingBox {
    pub fn new(min_lat: f64, max_lat: f64, min_lon: f64, max_lon: f64) -> Result<Self, GeoError> {
        if min_lat > max_lat || min_lon > max_lon {
            return Err(GeoError::InvalidBoundingBox);
        }
        Ok(Self {
            min_lat,
            max_lat,
            min_lon,
            max_lon,
        })
    }

    pub fn from_point(p: GeoPoint) -> Self {
        Self {
            min_lat: p.lat,
            max_lat: p.lat,
            min_lon: p.lon,
            max_lon: p.lon,
        }
    }

    pub fn from_points<'a, I>(points: I) -> Option<Self>
    where
        I: IntoIterator<Item = &'a GeoPoint>,
    {
        let mut iter = points.into_iter();
        let first = Self::from_point(*iter.next()?);
        Some(iter.fold(first, |b, p| b.extend(*p)))
    }

    pub fn extend(self, p: GeoPoint) -> Self {
        Self {
            min_lat: self.min_lat.min(p.lat),
            max_lat: self.max_lat.max(p.lat),
            min_lon: self.min_lon.min(p.lon),
            max_lon: self.max_lon.max(p.lon),
        }
    }

    pub fn union(self, other: BoundingBox) -> Self {
        Self {
            min_lat: self.min_lat.min(other.min_lat),
            max_lat: self.max_lat.max(other.max_lat),
            min_lon: self.min_lon.min(other.min_lon),
            max_lon: self.max_lon.max(other.max_lon),
        }
    }

    pub fn contains(&self, p: GeoPoint) -> bool {
        p.lat >= self.min_lat
            && p.lat <= self.max_lat
            && p.lon >= self.min_lon
            && p.lon <= self.max_lon
    }
}

/// Single-ring polygon (no holes), SRID 4326.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    exterior: Vec<GeoPoint>,
    bbox: BoundingBox,
}

impl Polygon {
    /// Builds a polygon from a closed ring. The first and last vertex must be
    /// identical and the ring must hold at least 3 distinct vertices.
    pub fn new(exterior: Vec<GeoPoint>) -> Result<Self, GeoError> {
        if let Some(bad) = exterior.iter().find(|p| !p.is_valid()) {
            return Err(GeoPoint::new(bad.lat, bad.lon).unwrap_err());
        }
        let (first, last) = match (exterior.first(), exterior.last()) {
            (Some(f), Some(l)) => (*f, *l),
            _ => return Err(GeoError::TooFewVertices(0)),
        };
        if first != last {
            return Err(GeoError::OpenRing);
        }
        let distinct = distinct_vertices(&exterior[..exterior.len() - 1]);
        if distinct < 3 {
            return Err(GeoError::TooFewVertices(distinct));
        }
        let bbox = BoundingBox::from_points(&exterior).expect("non-empty ring");
        Ok(Self { exterior, bbox })
    }

    /// Axis-aligned rectangle as a closed 5-vertex ring.
    pub fn rectangle(bbox: BoundingBox) -> Result<Self, GeoError> {
        let p = |lat, lon| GeoPoint::new(lat, lon);
        Self::new(vec![
            p(bbox.min_lat, bbox.min_lon)?,
            p(bbox.min_lat, bbox.max_lon)?,
            p(bbox.max_lat, bbox.max_lon)?,
            p(bbox.max_lat, bbox.min_lon)?,
            p(bbox.min_lat, bbox.min_lon)?,
        ])
    }

    pub fn exterior(&self) -> &[GeoPoint] {
        &self.exterior
    }

    pub fn bbox(&self) -> BoundingBox {
        self.bbox
    }

    pub fn srid(&self) -> u32 {
        SRID_WGS84
    }

    /// Serializes as `POLYGON((lon lat, ...))`.
    pub fn to_wkt(&self) -> String {
        let coords: Vec<String> = self
            .exterior
            .iter()
            .map(|p| format!("{} {}", p.lon, p.lat))
            .collect();
        format!("POLYGON(({}))", coords.join(", "))
    }
}

impl fmt::Display for Polygon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_wkt())
    }
}

fn distinct_vertices(points: &[GeoPoint]) -> usize {
    let mut seen: Vec<(u64, u64)> = points
        .iter()
        .map(|p| (p.lat.to_bits(), p.lon.to_bits()))
        .collect();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

/// Great-circle distance in meters on a sphere of radius [`EARTH_RADIUS_M`].
///
/// The arguments are put in a canonical order first so that
/// `haversine_distance(a, b) == haversine_distance(b, a)` holds bit for bit.
pub fn haversine_distance(a: GeoPoint, b: GeoPoint) -> f64 {
    let (a, b) = if (a.lat, a.lon) <= (b.lat, b.lon) {
        (a, b)
    } else {
        (b, a)
    };
    let lat1 = a.lat.to_radians();
    let lat2 = b.lat.to_radians();
    let dlat = (b.lat - a.lat).to_radians();
    let dlon = (b.lon - a.lon).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// Equirectangular area of a bounding box in square meters.
pub fn bbox_area(b: &BoundingBox) -> f64 {
    let meters_per_degree = std::f64::consts::PI * EARTH_RADIUS_M / 180.0;
    let mid_lat = ((b.min_lat + b.max_lat) / 2.0).to_radians();
    let height = (b.max_lat - b.min_lat) * meters_per_degree;
    let width = (b.max_lon - b.min_lon) * meters_per_degree * mid_lat.cos();
    (height * width).max(0.0)
}

/// Boundary-inclusive containment test (ray casting on lon/lat as x/y).
pub fn point_in_polygon(p: GeoPoint, poly: &Polygon) -> bool {
    if !poly.bbox.contains(p) {
        return false;
    }
    let ring = poly.exterior();
    let (x, y) = (p.lon, p.lat);
    let mut inside = false;
    for edge in ring.windows(2) {
        let (ax, ay) = (edge[0].lon, edge[0].lat);
        let (bx, by) = (edge[1].lon, edge[1].lat);
        if on_segment(x, y, ax, ay, bx, by) {
            return true;
        }
        if (ay > y) != (by > y) {
            let x_cross = ax + (y - ay) * (bx - ax) / (by - ay);
            if x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

fn on_segment(x: f64, y: f64, ax: f64, ay: f64, bx: f64, by: f64) -> bool {
    let cross = (bx - ax) * (y - ay) - (by - ay) * (x - ax);
    cross == 0.0 && x >= ax.min(bx) && x <= ax.max(bx) && y >= ay.min(by) && y <= ay.max(by)
}

/// Parses the WKT subset `POLYGON((x y, x y, ...))` with lon-first
/// coordinates. An optional `SRID=4326;` prefix is accepted.
pub fn parse_wkt_polygon(text: &str) -> Result<Polygon, GeoError> {
    let mut cur = Cursor::new(strip_srid(text)?);
    cur.keyword("POLYGON")?;
    cur.expect('(')?;
    cur.expect('(')?;
    let mut ring = Vec::new();
    loop {
        let lon = cur.number()?;
        let lat = cur.number()?;
        ring.push(GeoPoint::new(lat, lon)?);
        match cur.next_symbol()? {
            ',' => continue,
            ')' => break,
            c => return Err(malformed(format!("unexpected '{c}' in coordinate list"))),
        }
    }
    match cur.next_symbol()? {
        ')' => {}
        ',' => return Err(malformed("interior rings (holes) are not supported")),
        c => return Err(malformed(format!("unexpected '{c}' after ring"))),
    }
    cur.end()?;
    Polygon::new(ring)
}

/// Parses `POINT(lon lat)`.
pub fn parse_wkt_point(text: &str) -> Result<GeoPoint, GeoError> {
    let mut cur = Cursor::new(strip_srid(text)?);
    cur.keyword("POINT")?;
    cur.expect('(')?;
    let lon = cur.number()?;
    let lat = cur.number()?;
    cur.expect(')')?;
    cur.end()?;
    GeoPoint::new(lat, lon)
}

/// Geometry values stored in warehouse columns.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Point(GeoPoint),
    Polygon(Polygon),
}

impl Geometry {
    pub fn parse_wkt(text: &str) -> Result<Self, GeoError> {
        let head = text
            .trim_start()
            .get(..5)
            .unwrap_or("")
            .to_ascii_uppercase();
        if head == "POINT" {
            parse_wkt_point(text).map(Geometry::Point)
        } else {
            parse_wkt_polygon(text).map(Geometry::Polygon)
        }
    }

    pub fn to_wkt(&self) -> String {
        match self {
            Geometry::Point(p) => p.to_wkt(),
            Geometry::Polygon(p) => p.to_wkt(),
        }
    }

    /// A point must lie in `region`; a polygon must have every vertex in it.
    pub fn within(&self, region: &Polygon) -> bool {
        match self {
            Geometry::Point(p) => point_in_polygon(*p, region),
            Geometry::Polygon(poly) => poly.exterior().iter().all(|v| point_in_polygon(*v, region)),
        }
    }
}

fn malformed(msg: impl Into<String>) -> GeoError {
    GeoError::MalformedWkt(msg.into())
}

fn strip_srid(text: &str) -> Result<&str, GeoError> {
    let trimmed = text.trim();
    match trimmed.split_once(';') {
        Some((prefix, rest)) if prefix.trim().to_ascii_uppercase().starts_with("SRID=") => {
            let srid = prefix.trim()[5..].trim();
            if srid != SRID_WGS84.to_string() {
                return Err(malformed(format!("unsupported SRID {srid}")));
            }
            Ok(rest)
        }
        _ => Ok(trimmed),
    }
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Self { text, pos: 0 }
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn keyword(&mut self, kw: &str) -> Result<(), GeoError> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let word_len = rest
            .find(|c: char| !c.is_ascii_alphabetic())
            .unwrap_or(rest.len());
        let word = &rest[..word_len];
        if !word.eq_ignore_ascii_case(kw) {
            return Err(malformed(format!("expected {kw}, found '{word}'")));
        }
        self.pos += word_len;
        Ok(())
    }

    fn next_symbol(&mut self) -> Result<char, GeoError> {
        self.skip_ws();
        let c = self.text[self.pos..]
            .chars()
            .next()
            .ok_or_else(|| malformed("unbalanced parentheses"))?;
        self.pos += c.len_utf8();
        Ok(c)
    }

    fn expect(&mut self, want: char) -> Result<(), GeoError> {
        match self.next_symbol()? {
            c if c == want => Ok(()),
            c => Err(malformed(format!("expected '{want}', found '{c}'"))),
        }
    }

    fn number(&mut self) -> Result<f64, GeoError> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let len = rest
            .find(|c: char| !(c.is_ascii_digit() || matches!(c, '-' | '+' | '.' | 'e' | 'E')))
            .unwrap_or(rest.len());
        let token = &rest[..len];
        let value: f64 = token
            .parse()
            .map_err(|_| malformed(format!("non-numeric coordinate '{token}'")))?;
        if !value.is_finite() {
            return Err(malformed(format!("non-finite coordinate '{token}'")));
        }
        self.pos += len;
        Ok(value)
    }

    fn end(&mut self) -> Result<(), GeoError> {
        self.skip_ws();
        if self.pos == self.text.len() {
            Ok(())
        } else {
            Err(malformed(format!(
                "trailing input '{}'",
                &self.text[self.pos..]
            )))
        }
    }
}
