//! Seeded generators for synthetic trajectories, catalogs and query specs.

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::Rng;
use semtraj::enrichment::{Environment, EventOfInterest, GeoHierarchy, PointOfInterest};
use semtraj::geo::{BoundingBox, GeoPoint, Polygon};
use semtraj::olap::{Aggregate, AggregateFn, Filter, OrderKey, QuerySpec};
use semtraj::trajectory::{RawTrajectory, TimedPoint};

use super::oracle::Flat;

const METERS_PER_DEG: f64 = 111_195.0;

fn shift(p: GeoPoint, north_m: f64, east_m: f64) -> GeoPoint {
    let lat = (p.lat + north_m / METERS_PER_DEG).clamp(-80.0, 80.0);
    let lon = p.lon + east_m / (METERS_PER_DEG * p.lat.to_radians().cos());
    GeoPoint {
        lat,
        lon: lon.clamp(-179.9, 179.9),
    }
}

/// A synthetic trajectory of 2..=200 points alternating lingering phases
/// and travel, plus the centres it lingered at.
pub struct Synthetic {
    pub traj: RawTrajectory,
    pub dwell_centres: Vec<GeoPoint>,
}

pub fn random_trajectory<R: Rng>(rng: &mut R, id: usize) -> Synthetic {
    let len = rng.gen_range(2..=200);
    let mut t: DateTime<Utc> = Utc
        .timestamp_opt(rng.gen_range(1_262_304_000..1_735_689_600), 0)
        .unwrap();
    let mut pos = GeoPoint {
        lat: rng.gen_range(-60.0..60.0),
        lon: rng.gen_range(-170.0..170.0),
    };
    let mut points = Vec::with_capacity(len);
    let mut centres = Vec::new();
    while points.len() < len {
        let phase = rng.gen_range(1..=(len - points.len()).min(30));
        if rng.gen_bool(0.45) {
            let centre = pos;
            centres.push(centre);
            let spread = rng.gen_range(0.0..40.0);
            for _ in 0..phase {
                t += Duration::seconds(rng.gen_range(10..120));
                pos = shift(
                    centre,
                    rng.gen_range(-spread..=spread),
                    rng.gen_range(-spread..=spread),
                );
                points.push(TimedPoint::new(pos, t));
            }
            pos = centre;
        } else {
            let heading: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            for _ in 0..phase {
                let step = rng.gen_range(5.0..400.0);
                t += Duration::seconds(rng.gen_range(1..90));
                pos = shift(pos, step * heading.cos(), step * heading.sin());
                points.push(TimedPoint::new(pos, t));
            }
        }
    }
    Synthetic {
        traj: RawTrajectory::new(format!("syn-{id:04}"), format!("obj-{}", id % 7), points)
            .expect("generator keeps time strictly increasing"),
        dwell_centres: centres,
    }
}

fn square_around(c: GeoPoint, half_m: f64) -> Polygon {
    let lo = shift(c, -half_m, -half_m);
    let hi = shift(c, half_m, half_m);
    Polygon::rectangle(BoundingBox::new(lo.lat, hi.lat, lo.lon, hi.lon).unwrap()).unwrap()
}

const CATEGORIES: [&str; 4] = ["Museum", "Park", "Market", "Station"];

/// Places around some dwell centres, including nested and overlapping
/// footprints so that smallest-footprint resolution matters.
pub fn random_pois<R: Rng>(rng: &mut R, synth: &Synthetic) -> Vec<PointOfInterest> {
    let mut pois = Vec::new();
    for (i, c) in synth.dwell_centres.iter().enumerate() {
        for j in 0..rng.gen_range(0..3) {
            let category = CATEGORIES.choose(rng).unwrap();
            pois.push(PointOfInterest {
                poi_id: format!("poi-{i}-{j}"),
                footprint: square_around(
                    shift(*c, rng.gen_range(-30.0..30.0), rng.gen_range(-30.0..30.0)),
                    rng.gen_range(20.0..400.0),
                ),
                object_name: format!("{category} {i}-{j}"),
                object_category: category.to_string(),
                landmark_attrs: Default::default(),
                allows_stop: rng.gen_bool(0.85),
                allows_move: rng.gen_bool(0.3),
                semantic_purpose: format!("purpose of {category}"),
                hierarchy: GeoHierarchy::default(),
                geo_object_name: None,
                activity_object_name: None,
            });
        }
    }
    pois.shuffle(rng);
    pois
}

pub fn random_events<R: Rng>(rng: &mut R, synth: &Synthetic) -> Vec<EventOfInterest> {
    let pts = synth.traj.points();
    let (first, last) = (pts[0].t, pts[pts.len() - 1].t);
    let span = (last - first).num_seconds().max(1);
    let mut events = Vec::new();
    for (i, c) in synth.dwell_centres.iter().enumerate() {
        if !rng.gen_bool(0.5) {
            continue;
        }
        let start = first + Duration::seconds(rng.gen_range(-600..span));
        events.push(EventOfInterest {
            event_id: format!("ev-{i}"),
            event_item_name: ["Concert", "Fair", "Match"]
                .choose(rng)
                .unwrap()
                .to_string(),
            goal_name: "Entertainment".into(),
            activity_names: vec!["Watching".into()],
            environment: Environment {
                env_type: "Outdoor".into(),
                env_characteristics: "Sunny".into(),
            },
            footprint: square_around(*c, rng.gen_range(30.0..600.0)),
            t_start: start,
            t_end: start + Duration::seconds(rng.gen_range(0..7200)),
        });
    }
    events.shuffle(rng);
    events
}

const TEXT_COLUMNS: [&str; 12] = [
    "CalendarSeason",
    "Quarter",
    "DayType",
    "City",
    "Country",
    "EventItemName",
    "EventGoalName",
    "TrajectoryTransportationTypeName",
    "TrajModelBehaviourMovementVelocity",
    "TrajectoryModelGoal",
    "SegmentKind",
    "ExpressiveThought",
];
const INT_COLUMNS: [&str; 9] = [
    "CalendarYear",
    "Month",
    "Day",
    "Hour",
    "NumberOfPoints",
    "OverallTemporalDuration",
    "SegmentOrdinal",
    "eventsRepId",
    "EventTimeDuration",
];
const REAL_COLUMNS: [&str; 3] = ["AverageTrajectorySpeed", "TravelDistance", "SquareArea"];
const GEOMETRY_COLUMNS: [&str; 3] = [
    "GeoObjectType",
    "TrajSegmentSemanticStartPoint",
    "TrajSegmentSemanticEndPoint",
];
const MEASURES: [&str; 9] = [
    "OverallTemporalDuration",
    "TravelDistance",
    "AverageTrajectorySpeed",
    "NumberOfPoints",
    "NumberOfSemanticStops",
    "NumberOfMobilityModes",
    "SquareArea",
    "EventTimeDuration",
    "ActivityDuration",
];

fn pick<'a, R: Rng>(rng: &mut R, items: &[&'a str]) -> &'a str {
    items.choose(rng).copied().unwrap()
}

fn sample_value<R: Rng>(rng: &mut R, flat: &Flat, column: &str) -> String {
    let values = flat.values(column);
    if values.is_empty() || rng.gen_bool(0.1) {
        "no such value".to_string()
    } else {
        values.choose(rng).unwrap().to_string()
    }
}

fn numeric_literal<R: Rng>(rng: &mut R, flat: &Flat, column: &str) -> serde_json::Value {
    let values: Vec<f64> = flat
        .values(column)
        .iter()
        .filter_map(|v| v.parse().ok())
        .collect();
    let v = values.choose(rng).copied().unwrap_or(0.0);
    if INT_COLUMNS.contains(&column) {
        serde_json::json!(v as i64)
    } else {
        serde_json::json!(v * rng.gen_range(0.5..1.5))
    }
}

fn region_around<R: Rng>(rng: &mut R, flat: &Flat) -> String {
    let points: Vec<(f64, f64)> = flat
        .values("TrajSegmentSemanticStartPoint")
        .iter()
        .filter_map(|w| super::geometry::parse_ring(w))
        .filter_map(|r| r.first().copied())
        .collect();
    let (x, y) = points.choose(rng).copied().unwrap_or((0.0, 0.0));
    let (w, h) = (rng.gen_range(0.001..0.3), rng.gen_range(0.001..0.3));
    let (x, y) = (x + rng.gen_range(-w..w), y + rng.gen_range(-h..h));
    format!(
        "POLYGON(({} {}, {} {}, {} {}, {} {}, {} {}))",
        x - w,
        y - h,
        x + w,
        y - h,
        x + w,
        y + h,
        x - w,
        y + h,
        x - w,
        y - h
    )
}

fn random_filter<R: Rng>(rng: &mut R, flat: &Flat) -> Filter {
    match rng.gen_range(0..6) {
        0 | 1 => {
            let c = pick(rng, &TEXT_COLUMNS);
            let v = sample_value(rng, flat, c);
            if rng.gen_bool(0.7) {
                Filter::eq(c, v)
            } else {
                Filter::ne(c, v)
            }
        }
        2 | 3 => {
            let c = pick(rng, &[&INT_COLUMNS[..], &REAL_COLUMNS[..]].concat());
            let v = numeric_literal(rng, flat, c);
            match rng.gen_range(0..4) {
                0 => Filter::lt(c, v),
                1 => Filter::gt(c, v),
                2 => Filter::eq(c, v),
                _ => {
                    let w = numeric_literal(rng, flat, c);
                    let (lo, hi) = if w.as_f64() < v.as_f64() {
                        (w, v)
                    } else {
                        (v, w)
                    };
                    Filter::between(c, lo, hi)
                }
            }
        }
        4 => {
            let c = pick(rng, &GEOMETRY_COLUMNS);
            Filter::within(c, &region_around(rng, flat))
        }
        _ => Filter::ne("socialInterId", 0),
    }
}

/// A valid query document over the fixture columns: grouped with
/// aggregates, or a projection, with filters and ordering.
pub fn random_spec<R: Rng>(rng: &mut R, flat: &Flat) -> QuerySpec {
    let filters = (0..rng.gen_range(0..=3))
        .map(|_| random_filter(rng, flat))
        .collect();
    let groupable: Vec<&str> = [&TEXT_COLUMNS[..], &INT_COLUMNS[..]].concat();
    let any: Vec<&str> = [&groupable[..], &REAL_COLUMNS[..], &GEOMETRY_COLUMNS[..]].concat();
    let mut spec = QuerySpec {
        filters,
        ..QuerySpec::default()
    };
    if rng.gen_bool(0.6) {
        let n = rng.gen_range(0..=3);
        let mut cols: Vec<&str> = groupable.choose_multiple(rng, n).copied().collect();
        cols.dedup();
        spec.group_by = cols.iter().map(|c| c.to_string()).collect();
        for _ in 0..rng.gen_range(0..=3) {
            let function = *AggregateFn::ALL.choose(rng).unwrap();
            let a = match function {
                AggregateFn::Count => Aggregate::count(),
                AggregateFn::Sum | AggregateFn::Avg => {
                    Aggregate::new(function, pick(rng, &MEASURES))
                }
                _ => Aggregate::new(function, pick(rng, &any)),
            };
            if !spec.aggregates.contains(&a) {
                spec.aggregates.push(a);
            }
        }
        if spec.aggregates.is_empty() && spec.group_by.is_empty() {
            spec.aggregates.push(Aggregate::count());
        }
        spec.argmax_count = !spec.group_by.is_empty() && rng.gen_bool(0.15);
    } else {
        let n = rng.gen_range(1..=4);
        let mut cols: Vec<&str> = any.choose_multiple(rng, n).copied().collect();
        if rng.gen_bool(0.3) {
            cols.push("factId");
        }
        spec.select = cols.iter().map(|c| c.to_string()).collect();
        spec.distinct = rng.gen_bool(0.5);
    }
    let outputs: Vec<String> = spec
        .group_by
        .iter()
        .cloned()
        .chain(spec.aggregates.iter().map(Aggregate::column_name))
        .chain(spec.select.iter().cloned())
        .collect();
    for _ in 0..rng.gen_range(0..=2) {
        let c = outputs.choose(rng).unwrap();
        spec.order_by.push(if rng.gen_bool(0.5) {
            OrderKey::desc(c)
        } else {
            OrderKey::asc(c)
        });
    }
    spec
}
