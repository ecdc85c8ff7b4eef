//! Independent checks of segmentation and enrichment output.

use semtraj::enrichment::{
    match_events, EventOfInterest, GoalRules, PointOfInterest, SemanticTrajectory,
};
use semtraj::geo::bbox_area;
use semtraj::trajectory::{Episode, RawTrajectory};

use super::geometry::{haversine_m, winding_contains};

/// Stop predicate on a closed index range, recomputed from the samples.
pub fn is_compact_stop(traj: &RawTrajectory, i: usize, j: usize, eps: f64, min: f64) -> bool {
    let pts = &traj.points()[i..=j];
    let n = pts.len() as f64;
    let lat = pts.iter().map(|p| p.point.lat).sum::<f64>() / n;
    let lon = pts.iter().map(|p| p.point.lon).sum::<f64>() / n;
    let within = pts
        .iter()
        .all(|p| haversine_m(p.point.lat, p.point.lon, lat, lon) <= eps * (1.0 + 1e-12));
    within && (pts[pts.len() - 1].t - pts[0].t).num_seconds() as f64 >= min
}

/// POI chosen by scanning the whole catalog: containing footprints by
/// winding number, smallest bounding-box area first, then smallest id.
pub fn oracle_poi<'a>(
    traj: &RawTrajectory,
    ep: &Episode,
    pois: &'a [PointOfInterest],
) -> Option<&'a PointOfInterest> {
    let p = ep.representative_point(traj);
    let mut hits: Vec<&PointOfInterest> = pois
        .iter()
        .filter(|poi| {
            if ep.is_stop() {
                poi.allows_stop
            } else {
                poi.allows_move
            }
        })
        .filter(|poi| {
            let ring: Vec<(f64, f64)> = poi
                .footprint
                .exterior()
                .iter()
                .map(|v| (v.lon, v.lat))
                .collect();
            winding_contains(&ring, (p.lon, p.lat))
        })
        .collect();
    hits.sort_by(|a, b| {
        bbox_area(&a.footprint.bbox())
            .total_cmp(&bbox_area(&b.footprint.bbox()))
            .then_with(|| a.poi_id.cmp(&b.poi_id))
    });
    hits.first().copied()
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

/// Strict time order, coverage, alternation, shared boundaries and stop
/// soundness of an episode sequence.
pub fn check_episodes(
    traj: &RawTrajectory,
    eps: &[Episode],
    radius: f64,
    min: f64,
) -> Result<(), String> {
    let pts = traj.points();
    ensure!(
        pts.windows(2).all(|w| w[0].t < w[1].t),
        "time not strictly increasing"
    );
    ensure!(!eps.is_empty(), "no episodes");
    ensure!(
        eps[0].start_index == 0,
        "first episode starts at {}",
        eps[0].start_index
    );
    ensure!(
        eps[eps.len() - 1].end_index == pts.len() - 1,
        "last episode ends early"
    );
    for e in eps {
        ensure!(e.start_index <= e.end_index, "reversed episode");
        ensure!(
            e.t_begin == pts[e.start_index].t && e.t_end == pts[e.end_index].t,
            "episode times"
        );
        if e.is_stop() {
            ensure!(
                is_compact_stop(traj, e.start_index, e.end_index, radius, min),
                "stop {}..={} fails the stop predicate",
                e.start_index,
                e.end_index
            );
        }
    }
    for w in eps.windows(2) {
        ensure!(w[0].end_index == w[1].start_index, "gap between episodes");
        ensure!(w[0].kind != w[1].kind, "two consecutive {:?}", w[0].kind);
    }
    Ok(())
}

/// Segment contiguity and annotation composition against the catalogs.
pub fn check_semantic(
    traj: &RawTrajectory,
    episodes: &[Episode],
    st: &SemanticTrajectory,
    pois: &[PointOfInterest],
    events: &[EventOfInterest],
    rules: &GoalRules,
) -> Result<(), String> {
    let pts = traj.points();
    ensure!(st.segments.len() == episodes.len(), "segment count");
    ensure!(
        st.segments[0].begin.point.t == pts[0].t,
        "first segment begin"
    );
    ensure!(
        st.segments[st.segments.len() - 1].end.point.t == pts[pts.len() - 1].t,
        "last segment end"
    );
    for w in st.segments.windows(2) {
        ensure!(
            w[0].end.point.t == w[1].begin.point.t,
            "segments not contiguous"
        );
    }
    for (seg, ep) in st.segments.iter().zip(episodes) {
        let poi = oracle_poi(traj, ep, pois);
        ensure!(
            seg.poi_id.as_deref() == poi.map(|p| p.poi_id.as_str()),
            "poi mismatch"
        );
        let matched: Vec<&EventOfInterest> = match_events(traj, ep, events);
        ensure!(
            seg.annotation.event_ref.as_ref() == matched.first().map(|e| &e.event_id),
            "event mismatch"
        );
        let property = poi.map(|p| p.semantic_purpose.clone()).unwrap_or_default();
        ensure!(
            seg.annotation.geo_object_property == property,
            "place property mismatch"
        );
        if poi.is_some() || !matched.is_empty() {
            let category = poi.map_or("UNKNOWN", |p| p.object_category.as_str());
            let item = matched
                .first()
                .map_or("UNKNOWN", |e| e.event_item_name.as_str());
            ensure!(
                seg.annotation.trajectory_goal == rules.lookup(category, item),
                "goal mismatch"
            );
        }
    }
    Ok(())
}
