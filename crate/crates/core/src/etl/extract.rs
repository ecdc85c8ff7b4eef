//! Readers for the raw input files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use chrono::{DateTime, Timelike, Utc};
use serde::Deserialize;

use super::{EtlConfig, EtlError, Location};
use crate::enrichment::{
    Environment, EventOfInterest, GeoHierarchy, GoalRules, PointOfInterest, SocialPost,
};
use crate::geo::{parse_wkt_point, parse_wkt_polygon, GeoPoint, Polygon};
use crate::trajectory::{RawTrajectory, TimedPoint};

pub const POINTS_HEADER: [&str; 5] = ["traj_id", "object_id", "timestamp", "lat", "lon"];

/// Everything read by [`extract`], validated and ready for transformation.
#[derive(Debug, Clone, Default)]
pub struct StagedData {
    /// Sorted by trajectory id.
    pub trajectories: Vec<RawTrajectory>,
    pub point_rows: usize,
    pub pois: Vec<PointOfInterest>,
    pub events: Vec<EventOfInterest>,
    pub posts: Vec<SocialPost>,
    pub goal_rules: GoalRules,
}

pub fn extract(config: &EtlConfig) -> Result<StagedData, EtlError> {
    let (trajectories, point_rows) = read_points(&config.points_file)?;
    Ok(StagedData {
        trajectories,
        point_rows,
        pois: read_pois(&config.poi_file)?,
        events: read_events(&config.events_file)?,
        posts: read_posts(&config.posts_file)?,
        goal_rules: read_goal_rules(&config.goal_rules_file)?,
    })
}

fn read_text(path: &Path) -> Result<String, EtlError> {
    fs::read_to_string(path).map_err(|e| EtlError::io(path, e))
}

fn parse_err(path: &Path, location: Location, reason: impl Into<String>) -> EtlError {
    EtlError::Parse {
        file: path.to_path_buf(),
        location,
        reason: reason.into(),
    }
}

fn parse_instant(raw: &str) -> Result<DateTime<Utc>, String> {
    let t = DateTime::parse_from_rfc3339(raw.trim())
        .map_err(|e| format!("bad timestamp '{raw}': {e}"))?
        .with_timezone(&Utc);
    if t.nanosecond() != 0 {
        return Err(format!("timestamp '{raw}' has sub-second precision"));
    }
    Ok(t)
}

/// Reads the points CSV and groups rows into time-sorted trajectories.
/// Returns the trajectories (ordered by id) and the number of data rows.
pub fn read_points(path: &Path) -> Result<(Vec<RawTrajectory>, usize), EtlError> {
    let text = read_text(path)?;
    if text.trim().is_empty() {
        return Ok((Vec::new(), 0));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| parse_err(path, Location::Line(1), e.to_string()))?
        .clone();
    if header.iter().ne(POINTS_HEADER) {
        return Err(parse_err(
            path,
            Location::Line(1),
            format!("expected header {}", POINTS_HEADER.join(",")),
        ));
    }

    struct Row {
        line: usize,
        object_id: String,
        point: TimedPoint,
    }
    let mut groups: BTreeMap<String, Vec<Row>> = BTreeMap::new();
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(path, Location::Line(line), e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let fail = |reason: String| parse_err(path, Location::Line(line), reason);
        let number = |i: usize, name: &str| -> Result<f64, EtlError> {
            record[i]
                .parse::<f64>()
                .map_err(|_| fail(format!("bad {name} '{}'", &record[i])))
        };
        let (lat, lon) = (number(3, "lat")?, number(4, "lon")?);
        let point = GeoPoint::new(lat, lon).map_err(|e| fail(e.to_string()))?;
        let t = parse_instant(&record[2]).map_err(fail)?;
        if record[0].is_empty() || record[1].is_empty() {
            return Err(fail("empty traj_id or object_id".into()));
        }
        groups.entry(record[0].to_string()).or_default().push(Row {
            line,
            object_id: record[1].to_string(),
            point: TimedPoint::new(point, t),
        });
        rows += 1;
    }

    let mut trajectories = Vec::with_capacity(groups.len());
    for (traj_id, mut group) in groups {
        group.sort_by_key(|r| r.point.t);
        let object_id = group[0].object_id.clone();
        for pair in group.windows(2) {
            let later = pair[0].line.max(pair[1].line);
            if pair[1].object_id != object_id {
                return Err(parse_err(
                    path,
                    Location::Line(pair[1].line),
                    format!("trajectory {traj_id} changes object_id"),
                ));
            }
            if pair[0].point.t == pair[1].point.t {
                return Err(parse_err(
                    path,
                    Location::Line(later),
                    format!("trajectory {traj_id} repeats timestamp {}", pair[1].point.t),
                ));
            }
        }
        let points = group.iter().map(|r| r.point).collect();
        let traj = RawTrajectory::new(traj_id, object_id, points)
            .map_err(|e| parse_err(path, Location::Line(group[0].line), e.to_string()))?;
        trajectories.push(traj);
    }
    Ok((trajectories, rows))
}

fn json_err(path: &Path, e: serde_json::Error) -> EtlError {
    parse_err(path, Location::Line(e.line()), e.to_string())
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T, EtlError> {
    serde_json::from_str(text).map_err(|e| json_err(path, e))
}

#[derive(Deserialize)]
struct FeatureCollection {
    #[serde(rename = "type")]
    kind: String,
    features: Vec<Feature>,
}

#[derive(Deserialize)]
struct Feature {
    geometry: FeatureGeometry,
    properties: PoiProperties,
}

#[derive(Deserialize)]
struct FeatureGeometry {
    #[serde(rename = "type")]
    kind: String,
    coordinates: Vec<Vec<Vec<f64>>>,
}

fn default_true() -> bool {
    true
}

#[derive(Deserialize)]
struct PoiProperties {
    poi_id: String,
    object_name: String,
    object_category: String,
    #[serde(default = "default_true")]
    allows_stop: bool,
    #[serde(default)]
    allows_move: bool,
    semantic_purpose: String,
    continent: Option<String>,
    country: Option<String>,
    state_province: Option<String>,
    region: Option<String>,
    city: Option<String>,
    district: Option<String>,
    geo_object_name: Option<String>,
    activity_object_name: Option<String>,
    #[serde(flatten)]
    landmark_attrs: BTreeMap<String, serde_json::Value>,
}

fn ring_to_polygon(coords: &[Vec<Vec<f64>>]) -> Result<Polygon, String> {
    match coords {
        [ring] => {
            let vertices = ring
                .iter()
                .map(|pos| match pos.as_slice() {
                    [lon, lat, ..] => GeoPoint::new(*lat, *lon).map_err(|e| e.to_string()),
                    _ => Err("position needs lon and lat".to_string()),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Polygon::new(vertices).map_err(|e| e.to_string())
        }
        [] => Err("polygon has no rings".into()),
        _ => Err("polygons with holes are not supported".into()),
    }
}

/// Reads a GeoJSON FeatureCollection of Polygon features.
pub fn read_pois(path: &Path) -> Result<Vec<PointOfInterest>, EtlError> {
    let text = read_text(path)?;
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let fc: FeatureCollection = parse_json(path, &text)?;
    if fc.kind != "FeatureCollection" {
        return Err(parse_err(
            path,
            Location::Line(1),
            "expected a FeatureCollection",
        ));
    }
    let mut pois = Vec::with_capacity(fc.features.len());
    for (i, f) in fc.features.into_iter().enumerate() {
        let fail = |reason: String| parse_err(path, Location::Record(i + 1), reason);
        if f.geometry.kind != "Polygon" {
            return Err(fail(format!("unsupported geometry {}", f.geometry.kind)));
        }
        let footprint = ring_to_polygon(&f.geometry.coordinates).map_err(fail)?;
        let p = f.properties;
        let landmark_attrs = p
            .landmark_attrs
            .into_iter()
            .map(|(k, v)| match v {
                serde_json::Value::String(s) => (k, s),
                other => (k, other.to_string()),
            })
            .collect();
        let poi = PointOfInterest {
            poi_id: p.poi_id,
            footprint,
            object_name: p.object_name,
            object_category: p.object_category,
            landmark_attrs,
            allows_stop: p.allows_stop,
            allows_move: p.allows_move,
            semantic_purpose: p.semantic_purpose,
            hierarchy: GeoHierarchy {
                continent: p.continent,
                country: p.country,
                state_province: p.state_province,
                region: p.region,
                city: p.city,
                district: p.district,
            },
            geo_object_name: p.geo_object_name,
            activity_object_name: p.activity_object_name,
        };
        poi.validate().map_err(|e| fail(e.to_string()))?;
        pois.push(poi);
    }
    Ok(pois)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvent {
    event_id: String,
    footprint: String,
    event_item_name: String,
    goal_name: String,
    #[serde(default)]
    activity_names: Vec<String>,
    #[serde(default)]
    environment: RawEnvironment,
    t_start: String,
    t_end: String,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawEnvironment {
    env_type: String,
    env_characteristics: String,
}

pub fn read_events(path: &Path) -> Result<Vec<EventOfInterest>, EtlError> {
    let text = read_text(path)?;
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let raw: Vec<RawEvent> = parse_json(path, &text)?;
    raw.into_iter()
        .enumerate()
        .map(|(i, r)| {
            let fail = |reason: String| parse_err(path, Location::Record(i + 1), reason);
            let event = EventOfInterest {
                footprint: parse_wkt_polygon(&r.footprint).map_err(|e| fail(e.to_string()))?,
                t_start: parse_instant(&r.t_start).map_err(fail)?,
                t_end: parse_instant(&r.t_end).map_err(fail)?,
                event_id: r.event_id,
                event_item_name: r.event_item_name,
                goal_name: r.goal_name,
                activity_names: r.activity_names,
                environment: Environment {
                    env_type: r.environment.env_type,
                    env_characteristics: r.environment.env_characteristics,
                },
            };
            event.validate().map_err(|e| fail(e.to_string()))?;
            Ok(event)
        })
        .collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPost {
    post_id: String,
    object_id: String,
    t: String,
    medium_type: String,
    account_platform: String,
    content_kind: String,
    #[serde(default)]
    content_text: String,
    expressive_thought: String,
    qualitative_mood: String,
    /// WKT `POINT(lon lat)`.
    location: Option<String>,
}

pub fn read_posts(path: &Path) -> Result<Vec<SocialPost>, EtlError> {
    let text = read_text(path)?;
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let raw: Vec<RawPost> = parse_json(path, &text)?;
    raw.into_iter()
        .enumerate()
        .map(|(i, r)| {
            let fail = |reason: String| parse_err(path, Location::Record(i + 1), reason);
            Ok(SocialPost {
                t: parse_instant(&r.t).map_err(fail)?,
                content_kind: r.content_kind.parse().map_err(|e| fail(format!("{e}")))?,
                expressive_thought: r
                    .expressive_thought
                    .parse()
                    .map_err(|e| fail(format!("{e}")))?,
                location: r
                    .location
                    .as_deref()
                    .map(parse_wkt_point)
                    .transpose()
                    .map_err(|e| fail(e.to_string()))?,
                post_id: r.post_id,
                object_id: r.object_id,
                medium_type: r.medium_type,
                account_platform: r.account_platform,
                content_text: r.content_text,
                qualitative_mood: r.qualitative_mood,
            })
        })
        .collect()
}

pub fn read_goal_rules(path: &Path) -> Result<GoalRules, EtlError> {
    let text = read_text(path)?;
    GoalRules::parse(&text).map_err(|e| match e {
        crate::enrichment::EnrichmentError::GoalRules { line, reason } => {
            parse_err(path, Location::Line(line), reason)
        }
        other => parse_err(path, Location::Line(0), other.to_string()),
    })
}
