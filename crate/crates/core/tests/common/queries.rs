//! The canned queries written out as plain query documents, for comparison
//! against the flat-scan oracle.

use semtraj::olap::{CannedParams, CannedQuery, QuerySpec};

use super::oracle::Flat;
use super::QUERY_REGION;

/// Origin and destination landmarks for the directional query, per fixture.
pub fn stop_pair(fixture: &str) -> (&'static str, &'static str) {
    match fixture {
        "tourism" => ("Frevo Museum", "Casa da Cultura"),
        "birds" => ("Tagus Estuary", "Sado Estuary"),
        _ => ("Avenida Office Park", "Luz Stadium"),
    }
}

/// Summer, the Recife region, 30 km/h and 2010 to 2015.
pub fn canned_params(fixture: &str) -> CannedParams {
    let (a, b) = stop_pair(fixture);
    CannedParams {
        season: Some("Summer".into()),
        polygon_wkt: Some(QUERY_REGION.into()),
        speed_kmh: Some(30.0),
        year_from: Some(2010),
        year_to: Some(2015),
        stop_a: Some(a.into()),
        stop_b: Some(b.into()),
    }
}

/// Footprint of a landmark as stored on the flat rows.
pub fn footprint_of(flat: &Flat, landmark: &str) -> String {
    let mut hits: Vec<&str> = flat
        .rows
        .iter()
        .filter(|r| r["LandmarkObjectName"] == landmark)
        .map(|r| r["GeoObjectType"].as_str())
        .collect();
    hits.sort_unstable();
    hits.dedup();
    assert_eq!(hits.len(), 1, "{landmark}");
    hits[0].to_string()
}

pub fn canned_documents(flat: &Flat, fixture: &str) -> Vec<(CannedQuery, QuerySpec)> {
    let doc = |json: serde_json::Value| QuerySpec::from_json(&json.to_string()).unwrap();
    let (a, b) = stop_pair(fixture);
    vec![
        (
            CannedQuery::Q1,
            doc(serde_json::json!({
                "filters": [
                    {"op": "eq", "attribute": "CalendarSeason", "value": "Summer"},
                    {"op": "within", "attribute": "GeoObjectType", "polygon": QUERY_REGION},
                    {"op": "ne", "attribute": "eventsRepId", "value": 0}
                ],
                "group_by": ["EventItemName", "EventGoalName"],
                "argmax_count": true
            })),
        ),
        (
            CannedQuery::Q2,
            doc(serde_json::json!({
                "filters": [
                    {"op": "eq", "attribute": "CalendarSeason", "value": "Summer"},
                    {"op": "within", "attribute": "GeoObjectType", "polygon": QUERY_REGION}
                ],
                "select": ["TrajectoryModelName", "TrajectoryModelBehaviourName",
                           "TrajModelBehaviourMovementVelocity", "TrajectoryTransportationModeName",
                           "TrajectoryTransportationTypeName"],
                "distinct": true
            })),
        ),
        (
            CannedQuery::Q3,
            doc(serde_json::json!({
                "filters": [
                    {"op": "within", "attribute": "TrajSegmentSemanticStartPoint",
                     "polygon": footprint_of(flat, a)},
                    {"op": "within", "attribute": "TrajSegmentSemanticEndPoint",
                     "polygon": footprint_of(flat, b)}
                ],
                "select": ["AverageTrajectorySpeed", "TrajectoryModelName", "TrajectoryModelFeature",
                           "TrajModelBehaviourMovementVelocity", "EventEnvironmentType",
                           "EventEnvironmentCharac"]
            })),
        ),
        (
            CannedQuery::Q4,
            doc(serde_json::json!({
                "filters": [
                    {"op": "lt", "attribute": "AverageTrajectorySpeed", "value": 30.0 / 3.6},
                    {"op": "between", "attribute": "CalendarYear", "low": 2010, "high": 2015}
                ],
                "select": ["TrajSegmentSemanticStartPoint", "TrajSegmentSemanticEndPoint",
                           "AverageTrajectorySpeed", "TrajectoryModelName", "EventItemName",
                           "EventActivityName"]
            })),
        ),
    ]
}
