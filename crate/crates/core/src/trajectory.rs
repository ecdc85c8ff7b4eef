//! Raw trajectories and their segmentation into Stop/Move episodes.

use chrono::{DateTime, Utc};
use thiserror::Error;

use crate::geo::{haversine_distance, BoundingBox, GeoPoint};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrajectoryError {
    #[error("trajectory has no points")]
    EmptyTrajectory,
    #[error("timestamps not strictly increasing at point index {index}")]
    NonMonotonicTime { index: usize },
    #[error("invalid coordinate at point index {index}: lat {lat}, lon {lon}")]
    InvalidCoordinate { index: usize, lat: f64, lon: f64 },
    #[error("episode range {start}..={end} out of range for {len} points")]
    IndexOutOfRange {
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("invalid segmentation parameters: {0}")]
    InvalidParams(String),
}

/// A position sample. Timestamps carry 1-second resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedPoint {
    pub point: GeoPoint,
    pub t: DateTime<Utc>,
}

impl TimedPoint {
    pub fn new(point: GeoPoint, t: DateTime<Utc>) -> Self {
        Self { point, t }
    }
}

/// Time-ordered samples of one moving object.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTrajectory {
    traj_id: String,
    object_id: String,
    points: Vec<TimedPoint>,
}

impl RawTrajectory {
    /// Validates and wraps `points`; input order is preserved, never sorted.
    pub fn new(
        traj_id: impl Into<String>,
        object_id: impl Into<String>,
        points: Vec<TimedPoint>,
    ) -> Result<Self, TrajectoryError> {
        if points.is_empty() {
            return Err(TrajectoryError::EmptyTrajectory);
        }
        for (index, p) in points.iter().enumerate() {
            if !p.point.is_valid() {
                return Err(TrajectoryError::InvalidCoordinate {
                    index,
                    lat: p.point.lat,
                    lon: p.point.lon,
                });
            }
            if index > 0 && points[index - 1].t >= p.t {
                return Err(TrajectoryError::NonMonotonicTime { index });
            }
        }
        Ok(Self {
            traj_id: traj_id.into(),
            object_id: object_id.into(),
            points,
        })
    }

    pub fn traj_id(&self) -> &str {
        &self.traj_id
    }

    pub fn object_id(&self) -> &str {
        &self.object_id
    }

    pub fn points(&self) -> &[TimedPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Sum of haversine legs over the whole trajectory.
    pub fn path_length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| haversine_distance(w[0].point, w[1].point))
            .sum()
    }

    /// `t_m - t_1` in seconds.
    pub fn span_seconds(&self) -> i64 {
        (self.points[self.points.len() - 1].t - self.points[0].t).num_seconds()
    }
}

/// Same as [`RawTrajectory::new`].
pub fn validate_raw_trajectory(
    traj_id: impl Into<String>,
    object_id: impl Into<String>,
    points: Vec<TimedPoint>,
) -> Result<RawTrajectory, TrajectoryError> {
    RawTrajectory::new(traj_id, object_id, points)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentationParams {
    eps_meters: f64,
    min_stop_duration_s: f64,
}

impl SegmentationParams {
    pub const DEFAULT_EPS_METERS: f64 = 50.0;
    pub const DEFAULT_MIN_STOP_DURATION_S: f64 = 300.0;

    pub fn new(eps_meters: f64, min_stop_duration_s: f64) -> Result<Self, TrajectoryError> {
        if !(eps_meters.is_finite() && eps_meters > 0.0) {
            return Err(TrajectoryError::InvalidParams(format!(
                "eps_meters must be positive, got {eps_meters}"
            )));
        }
        if !(min_stop_duration_s.is_finite() && min_stop_duration_s >= 0.0) {
            return Err(TrajectoryError::InvalidParams(format!(
                "min_stop_duration_s must be non-negative, got {min_stop_duration_s}"
            )));
        }
        Ok(Self {
            eps_meters,
            min_stop_duration_s,
        })
    }

    pub fn eps_meters(&self) -> f64 {
        self.eps_meters
    }

    pub fn min_stop_duration_s(&self) -> f64 {
        self.min_stop_duration_s
    }
}

impl Default for SegmentationParams {
    fn default() -> Self {
        Self {
            eps_meters: Self::DEFAULT_EPS_METERS,
            min_stop_duration_s: Self::DEFAULT_MIN_STOP_DURATION_S,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EpisodeKind {
    Stop,
    Move,
}

impl EpisodeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EpisodeKind::Stop => "Stop",
            EpisodeKind::Move => "Move",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "Stop" => Some(EpisodeKind::Stop),
            "Move" => Some(EpisodeKind::Move),
            _ => None,
        }
    }
}

/// A maximal Stop or Move span over closed point-index range
/// `start_index..=end_index`. Adjacent episodes share their boundary index.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub kind: EpisodeKind,
    pub start_index: usize,
    pub end_index: usize,
    pub t_begin: DateTime<Utc>,
    pub t_end: DateTime<Utc>,
    /// Set for Stops only.
    pub centroid: Option<GeoPoint>,
    pub bbox: BoundingBox,
}

impl Episode {
    fn over(kind: EpisodeKind, traj: &RawTrajectory, start: usize, end: usize) -> Self {
        let pts = &traj.points()[start..=end];
        let coords: Vec<GeoPoint> = pts.iter().map(|p| p.point).collect();
        Episode {
            kind,
            start_index: start,
            end_index: end,
            t_begin: pts[0].t,
            t_end: pts[pts.len() - 1].t,
            centroid: match kind {
                EpisodeKind::Stop => GeoPoint::centroid(&coords),
                EpisodeKind::Move => None,
            },
            bbox: BoundingBox::from_points(&coords).expect("episode spans at least one point"),
        }
    }

    pub fn is_stop(&self) -> bool {
        self.kind == EpisodeKind::Stop
    }

    pub fn duration_seconds(&self) -> i64 {
        (self.t_end - self.t_begin).num_seconds()
    }

    /// Point used for spatial matching: the centroid of a Stop, the
    /// middle-index sample of a Move.
    pub fn representative_point(&self, traj: &RawTrajectory) -> GeoPoint {
        match (self.kind, self.centroid) {
            (EpisodeKind::Stop, Some(c)) => c,
            _ => traj.points()[(self.start_index + self.end_index) / 2].point,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentationWarning {
    /// Trajectory had a single point; no episodes were produced.
    SinglePoint,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Segmentation {
    pub episodes: Vec<Episode>,
    pub warnings: Vec<SegmentationWarning>,
}

/// Splits a trajectory into alternating Stop and Move episodes.
///
/// Stops are found with a sliding anchor: from anchor `i` the window `[i..j]`
/// grows while every member lies within `eps_meters` of the window centroid.
/// When growth fails the window closes; it becomes a Stop if it spans at least
/// two samples and `min_stop_duration_s`, otherwise it is left to the
/// surrounding Move. Either way the next anchor is `j + 1`, so the candidate
/// windows do not depend on the duration threshold.
pub fn segment_episodes(traj: &RawTrajectory, params: &SegmentationParams) -> Segmentation {
    let m = traj.len();
    if m < 2 {
        return Segmentation {
            episodes: Vec::new(),
            warnings: vec![SegmentationWarning::SinglePoint],
        };
    }
    let pts = traj.points();
    let mut stops: Vec<(usize, usize)> = Vec::new();
    let mut anchor = 0;
    while anchor < m {
        let mut end = anchor;
        while end + 1 < m && window_is_compact(pts, anchor, end + 1, params.eps_meters) {
            end += 1;
        }
        let duration = (pts[end].t - pts[anchor].t).num_seconds() as f64;
        if end > anchor && duration >= params.min_stop_duration_s {
            stops.push((anchor, end));
        }
        anchor = end + 1;
    }

    let mut episodes = Vec::with_capacity(2 * stops.len() + 1);
    let mut cursor = 0;
    for &(start, end) in &stops {
        if start > cursor {
            episodes.push(Episode::over(EpisodeKind::Move, traj, cursor, start));
        }
        episodes.push(Episode::over(EpisodeKind::Stop, traj, start, end));
        cursor = end;
    }
    if cursor < m - 1 {
        episodes.push(Episode::over(EpisodeKind::Move, traj, cursor, m - 1));
    }
    Segmentation {
        episodes,
        warnings: Vec::new(),
    }
}

fn window_is_compact(pts: &[TimedPoint], start: usize, end: usize, eps: f64) -> bool {
    let window = &pts[start..=end];
    let centroid = GeoPoint::centroid(window.iter().map(|p| &p.point)).expect("non-empty window");
    window
        .iter()
        .all(|p| haversine_distance(p.point, centroid) <= eps)
}

/// Per-episode movement statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeStats {
    pub duration_s: i64,
    pub travel_distance_m: f64,
    pub avg_speed_mps: f64,
    pub num_points: usize,
}

/// Distance sums the legs inside the episode; the 0/0 speed case is 0.
pub fn episode_stats(traj: &RawTrajectory, ep: &Episode) -> Result<EpisodeStats, TrajectoryError> {
    let len = traj.len();
    if ep.start_index > ep.end_index || ep.end_index >= len {
        return Err(TrajectoryError::IndexOutOfRange {
            start: ep.start_index,
            end: ep.end_index,
            len,
        });
    }
    let pts = &traj.points()[ep.start_index..=ep.end_index];
    let travel_distance_m: f64 = pts
        .windows(2)
        .map(|w| haversine_distance(w[0].point, w[1].point))
        .sum();
    let duration_s = (pts[pts.len() - 1].t - pts[0].t).num_seconds();
    Ok(EpisodeStats {
        duration_s,
        travel_distance_m,
        avg_speed_mps: average_speed(travel_distance_m, duration_s),
        num_points: pts.len(),
    })
}

/// `distance / duration`, defined as 0 when the duration is 0.
pub fn average_speed(distance_m: f64, duration_s: i64) -> f64 {
    if duration_s == 0 {
        0.0
    } else {
        distance_m / duration_s as f64
    }
}
