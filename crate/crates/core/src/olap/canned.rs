//! The four predefined domain queries.

use std::fmt;
use std::str::FromStr;

use super::engine::execute;
use super::spec::{Aggregate, Filter, QuerySpec};
use super::table::ResultTable;
use super::QueryError;
use crate::geo::parse_wkt_polygon;
use crate::warehouse::{Dimension, Warehouse, UNKNOWN_KEY};

/// Region of the tourism case study (Recife, Brazil).
pub const RECIFE_REGION_WKT: &str = "POLYGON((-34.954449 -8.124354, -34.904449 -8.124354, -34.904449 -8.084354, -34.954449 -8.084354, -34.954449 -8.124354))";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CannedQuery {
    Q1,
    Q2,
    Q3,
    Q4,
}

impl FromStr for CannedQuery {
    type Err = QueryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "Q1" => Ok(CannedQuery::Q1),
            "Q2" => Ok(CannedQuery::Q2),
            "Q3" => Ok(CannedQuery::Q3),
            "Q4" => Ok(CannedQuery::Q4),
            _ => Err(QueryError::InvalidSpec(format!(
                "unknown canned query '{s}'"
            ))),
        }
    }
}

impl fmt::Display for CannedQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Free values of the canned queries; each query reads the ones it needs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CannedParams {
    pub season: Option<String>,
    pub polygon_wkt: Option<String>,
    pub speed_kmh: Option<f64>,
    pub year_from: Option<i64>,
    pub year_to: Option<i64>,
    pub stop_a: Option<String>,
    pub stop_b: Option<String>,
}

fn required<'a, T>(
    value: &'a Option<T>,
    name: &str,
    query: CannedQuery,
) -> Result<&'a T, QueryError> {
    value
        .as_ref()
        .ok_or_else(|| QueryError::InvalidSpec(format!("{query} needs parameter {name}")))
}

/// Most frequent (event, goal) pairs among in-region facts of a season.
pub fn q1_spec(season: &str, polygon_wkt: &str) -> QuerySpec {
    QuerySpec {
        filters: vec![
            Filter::eq("CalendarSeason", season),
            Filter::within("GeoObjectType", polygon_wkt),
            Filter::ne(Dimension::Events.key_column(), UNKNOWN_KEY),
        ],
        group_by: vec!["EventItemName".into(), "EventGoalName".into()],
        argmax_count: true,
        ..QuerySpec::default()
    }
}

/// Distinct movement profiles among in-region facts of a season.
pub fn q2_spec(season: &str, polygon_wkt: &str) -> QuerySpec {
    QuerySpec {
        filters: vec![
            Filter::eq("CalendarSeason", season),
            Filter::within("GeoObjectType", polygon_wkt),
        ],
        select: [
            "TrajectoryModelName",
            "TrajectoryModelBehaviourName",
            "TrajModelBehaviourMovementVelocity",
            "TrajectoryTransportationModeName",
            "TrajectoryTransportationTypeName",
        ]
        .map(String::from)
        .to_vec(),
        distinct: true,
        ..QuerySpec::default()
    }
}

/// Segments starting inside one footprint and ending inside another.
pub fn q3_spec(start_footprint_wkt: &str, end_footprint_wkt: &str) -> QuerySpec {
    QuerySpec {
        filters: vec![
            Filter::within("TrajSegmentSemanticStartPoint", start_footprint_wkt),
            Filter::within("TrajSegmentSemanticEndPoint", end_footprint_wkt),
        ],
        select: [
            "AverageTrajectorySpeed",
            "TrajectoryModelName",
            "TrajectoryModelFeature",
            "TrajModelBehaviourMovementVelocity",
            "EventEnvironmentType",
            "EventEnvironmentCharac",
        ]
        .map(String::from)
        .to_vec(),
        ..QuerySpec::default()
    }
}

pub fn kmh_to_mps(kmh: f64) -> f64 {
    kmh / 3.6
}

/// Slow segments within a range of years; the threshold is in km/h.
pub fn q4_spec(speed_kmh: f64, year_from: i64, year_to: i64) -> QuerySpec {
    QuerySpec {
        filters: vec![
            Filter::lt("AverageTrajectorySpeed", kmh_to_mps(speed_kmh)),
            Filter::between("CalendarYear", year_from, year_to),
        ],
        select: [
            "TrajSegmentSemanticStartPoint",
            "TrajSegmentSemanticEndPoint",
            "AverageTrajectorySpeed",
            "TrajectoryModelName",
            "EventItemName",
            "EventActivityName",
        ]
        .map(String::from)
        .to_vec(),
        ..QuerySpec::default()
    }
}

/// Footprint WKT of the place stored under `LandmarkObjectName = name`.
pub fn poi_footprint(wh: &Warehouse, name: &str) -> Result<String, QueryError> {
    let geo = wh.dimension(Dimension::Geographical);
    let mut footprints: Vec<&str> = geo
        .rows()
        .filter(|(key, _)| *key != UNKNOWN_KEY)
        .filter(|(key, _)| geo.attribute(*key, "LandmarkObjectName") == Some(name))
        .filter_map(|(key, _)| geo.attribute(key, "GeoObjectType"))
        .collect();
    footprints.sort_unstable();
    footprints.dedup();
    match footprints.as_slice() {
        [] => Err(QueryError::UnknownPoi(name.to_string())),
        [one] => Ok(one.to_string()),
        _ => Err(QueryError::AmbiguousPoi(name.to_string())),
    }
}

/// Builds the spec of a canned query, resolving place names if needed.
pub fn canned_spec(
    wh: &Warehouse,
    id: CannedQuery,
    params: &CannedParams,
) -> Result<QuerySpec, QueryError> {
    Ok(match id {
        CannedQuery::Q1 | CannedQuery::Q2 => {
            let season = required(&params.season, "season", id)?;
            let polygon = required(&params.polygon_wkt, "polygon", id)?;
            parse_wkt_polygon(polygon)
                .map_err(|e| QueryError::InvalidPolygon(format!("{polygon}: {e}")))?;
            if id == CannedQuery::Q1 {
                q1_spec(season, polygon)
            } else {
                q2_spec(season, polygon)
            }
        }
        CannedQuery::Q3 => {
            let a = required(&params.stop_a, "stop-a", id)?;
            let b = required(&params.stop_b, "stop-b", id)?;
            if a == b {
                return Err(QueryError::InvalidSpec(
                    "Q3 needs two distinct stops".into(),
                ));
            }
            q3_spec(&poi_footprint(wh, a)?, &poi_footprint(wh, b)?)
        }
        CannedQuery::Q4 => q4_spec(
            *required(&params.speed_kmh, "speed-kmh", id)?,
            *required(&params.year_from, "from", id)?,
            *required(&params.year_to, "to", id)?,
        ),
    })
}

pub fn canned_query(
    wh: &Warehouse,
    id: CannedQuery,
    params: &CannedParams,
) -> Result<ResultTable, QueryError> {
    execute(wh, &canned_spec(wh, id, params)?)
}

/// COUNT of facts per (event, goal), the table Q1 selects its maximum from.
pub fn q1_counts_spec(season: &str, polygon_wkt: &str) -> QuerySpec {
    QuerySpec {
        aggregates: vec![Aggregate::count()],
        argmax_count: false,
        ..q1_spec(season, polygon_wkt)
    }
}
