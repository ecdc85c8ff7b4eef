//! Semantic enrichment: matching episodes to places and events, annotating
//! them, and attaching social-media posts.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use thiserror::Error;

use crate::geo::{bbox_area, point_in_polygon, GeoPoint, Polygon};
use crate::trajectory::{
    episode_stats, segment_episodes, Episode, EpisodeKind, EpisodeStats, RawTrajectory,
    SegmentationParams, TimedPoint, TrajectoryError,
};

/// Goal assigned when no rule matches.
pub const UNSPECIFIED_GOAL: &str = "unspecified";
/// Transport label carried by Stop segments.
pub const NO_TRANSPORT: &str = "none";
/// Placeholder used for missing categorical values in rule lookups.
pub const UNKNOWN: &str = "UNKNOWN";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnrichmentError {
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error("point of interest {0} allows neither stops nor moves")]
    PoiWithoutSemantics(String),
    #[error("event {0} ends before it starts")]
    InvertedEventInterval(String),
    #[error("unknown {vocabulary} value '{value}'")]
    Vocabulary {
        vocabulary: &'static str,
        value: String,
    },
    #[error("goal rules line {line}: {reason}")]
    GoalRules { line: usize, reason: String },
    #[error("transport rules: {0}")]
    TransportRules(String),
}

/// Administrative placement of a place; missing levels stay `None`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GeoHierarchy {
    pub continent: Option<String>,
    pub country: Option<String>,
    pub state_province: Option<String>,
    pub region: Option<String>,
    pub city: Option<String>,
    pub district: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointOfInterest {
    pub poi_id: String,
    pub footprint: Polygon,
    pub object_name: String,
    pub object_category: String,
    pub landmark_attrs: BTreeMap<String, String>,
    /// Whether a Stop may be explained by this place.
    pub allows_stop: bool,
    /// Whether a Move may be explained by this place.
    pub allows_move: bool,
    pub semantic_purpose: String,
    pub hierarchy: GeoHierarchy,
    pub geo_object_name: Option<String>,
    pub activity_object_name: Option<String>,
}

impl PointOfInterest {
    pub fn validate(&self) -> Result<(), EnrichmentError> {
        if !self.allows_stop && !self.allows_move {
            return Err(EnrichmentError::PoiWithoutSemantics(self.poi_id.clone()));
        }
        Ok(())
    }

    fn footprint_area(&self) -> f64 {
        bbox_area(&self.footprint.bbox())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Environment {
    pub env_type: String,
    pub env_characteristics: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventOfInterest {
    pub event_id: String,
    pub footprint: Polygon,
    pub event_item_name: String,
    pub goal_name: String,
    pub activity_names: Vec<String>,
    pub environment: Environment,
    pub t_start: DateTime<Utc>,
    pub t_end: DateTime<Utc>,
}

impl EventOfInterest {
    pub fn validate(&self) -> Result<(), EnrichmentError> {
        if self.t_start > self.t_end {
            return Err(EnrichmentError::InvertedEventInterval(
                self.event_id.clone(),
            ));
        }
        Ok(())
    }

    /// Seconds of overlap between the event and `[begin, end]`.
    pub fn overlap_seconds(&self, begin: DateTime<Utc>, end: DateTime<Utc>) -> i64 {
        let lo = self.t_start.max(begin);
        let hi = self.t_end.min(end);
        (hi - lo).num_seconds().max(0)
    }
}

/// The annotation triple: place property, trajectory goal and event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemanticAnnotation {
    pub geo_object_property: String,
    pub trajectory_goal: String,
    pub event_ref: Option<String>,
}

impl SemanticAnnotation {
    pub fn unannotated() -> Self {
        Self {
            geo_object_property: String::new(),
            trajectory_goal: UNSPECIFIED_GOAL.to_string(),
            event_ref: None,
        }
    }

    pub fn is_unannotated(&self) -> bool {
        self.geo_object_property.is_empty()
            && self.event_ref.is_none()
            && self.trajectory_goal == UNSPECIFIED_GOAL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentEndpoint {
    pub point: TimedPoint,
    /// The semantic stop this endpoint touches, if any.
    pub poi_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemanticSegment {
    pub ordinal: usize,
    pub begin: SegmentEndpoint,
    pub end: SegmentEndpoint,
    pub episode: Episode,
    /// POI explaining the episode itself.
    pub poi_id: Option<String>,
    /// Every matching event, sorted by id. The annotation carries the first.
    pub events: Vec<String>,
    pub annotation: SemanticAnnotation,
    pub transport_mode: String,
    pub goal: String,
    pub stats: EpisodeStats,
    pub posts: Vec<SocialPost>,
}

impl SemanticSegment {
    pub fn stop_ref(&self) -> Option<&Episode> {
        (self.episode.kind == EpisodeKind::Stop).then_some(&self.episode)
    }

    pub fn move_ref(&self) -> Option<&Episode> {
        (self.episode.kind == EpisodeKind::Move).then_some(&self.episode)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemanticTrajectory {
    pub traj_id: String,
    pub object_id: String,
    pub segments: Vec<SemanticSegment>,
}

macro_rules! vocabulary {
    ($name:ident, $label:literal, { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(&self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl FromStr for $name {
            type Err = EnrichmentError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($text => Ok($name::$variant),)+
                    _ => Err(EnrichmentError::Vocabulary {
                        vocabulary: $label,
                        value: s.to_string(),
                    }),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

vocabulary!(ExpressiveThought, "expressive_thought", {
    Positive => "positive",
    Negative => "negative",
    Indifferent => "indifferent",
});

vocabulary!(ContentKind, "content_kind", {
    Textual => "textual",
    Image => "image",
});

#[derive(Debug, Clone, PartialEq)]
pub struct SocialPost {
    pub post_id: String,
    pub object_id: String,
    pub t: DateTime<Utc>,
    pub medium_type: String,
    pub account_platform: String,
    pub content_kind: ContentKind,
    pub content_text: String,
    pub expressive_thought: ExpressiveThought,
    /// Pre-labelled mood (happy, sad, upset, anxious, ...).
    pub qualitative_mood: String,
    pub location: Option<GeoPoint>,
}

/// Lookup table `(object_category, event_item_name) -> goal`.
///
/// `*` in either key column acts as a wildcard. Lookup order is exact match,
/// then `(category, *)`, then `(*, event)`, then `(*, *)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GoalRules {
    rules: HashMap<(String, String), String>,
}

impl GoalRules {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `object_category,event_item_name,goal` lines. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self, EnrichmentError> {
        let mut rules = Self::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.splitn(3, ',').map(str::trim).collect();
            if fields.len() != 3 || fields.iter().any(|f| f.is_empty()) {
                return Err(EnrichmentError::GoalRules {
                    line: idx + 1,
                    reason: format!("expected object_category,event_item_name,goal, got '{line}'"),
                });
            }
            rules.insert(fields[0], fields[1], fields[2]);
        }
        Ok(rules)
    }

    pub fn insert(&mut self, category: &str, event_item: &str, goal: &str) {
        self.rules.insert(
            (category.to_string(), event_item.to_string()),
            goal.to_string(),
        );
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn lookup(&self, category: &str, event_item: &str) -> &str {
        [
            (category, event_item),
            (category, "*"),
            ("*", event_item),
            ("*", "*"),
        ]
        .iter()
        .find_map(|(c, e)| self.rules.get(&(c.to_string(), e.to_string())))
        .map(String::as_str)
        .unwrap_or(UNSPECIFIED_GOAL)
    }
}

/// One row of a speed-based transport classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportRule {
    /// Exclusive upper speed bound in m/s; `None` matches any speed.
    pub below_mps: Option<f64>,
    pub transport_type: String,
    pub transport_mode: String,
    pub transport_object: String,
}

/// Ordered rule table; the first rule whose bound exceeds the speed wins.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportRules {
    rules: Vec<TransportRule>,
}

impl TransportRules {
    pub fn new(rules: Vec<TransportRule>) -> Result<Self, EnrichmentError> {
        match rules.last() {
            Some(last) if last.below_mps.is_none() => {}
            _ => {
                return Err(EnrichmentError::TransportRules(
                    "the last rule must be a catch-all".into(),
                ))
            }
        }
        let bounds: Vec<f64> = rules.iter().filter_map(|r| r.below_mps).collect();
        if rules[..rules.len() - 1]
            .iter()
            .any(|r| r.below_mps.is_none())
            || bounds.windows(2).any(|w| w[0] >= w[1])
            || bounds.iter().any(|b| !b.is_finite() || *b <= 0.0)
        {
            return Err(EnrichmentError::TransportRules(
                "speed bounds must be positive and strictly increasing".into(),
            ));
        }
        Ok(Self { rules })
    }

    fn rule(below: Option<f64>, ty: &str, mode: &str, object: &str) -> TransportRule {
        TransportRule {
            below_mps: below,
            transport_type: ty.into(),
            transport_mode: mode.into(),
            transport_object: object.into(),
        }
    }

    /// Walking below 1.8 m/s, Biking below 8 m/s, Driving otherwise.
    pub fn tourism() -> Self {
        Self {
            rules: vec![
                Self::rule(Some(1.8), "Walking", "Land", "Foot"),
                Self::rule(Some(8.0), "Biking", "Land", "Bicycle"),
                Self::rule(None, "Driving", "Land", "Bus"),
            ],
        }
    }

    pub fn birds() -> Self {
        Self {
            rules: vec![Self::rule(None, "Flight", "Air", "Soaring Flight")],
        }
    }

    pub fn traffic() -> Self {
        Self {
            rules: vec![Self::rule(None, "Driving", "Land", "Car")],
        }
    }

    /// Parses `bound:type:mode:object` entries separated by `;`, where the
    /// bound is a speed in m/s or `*` for the catch-all, e.g.
    /// `1.5:Walking:Land:Foot;*:Driving:Land:Car`.
    pub fn parse(text: &str) -> Result<Self, EnrichmentError> {
        let mut rules = Vec::new();
        for entry in text.split(';').map(str::trim).filter(|e| !e.is_empty()) {
            let parts: Vec<&str> = entry.split(':').map(str::trim).collect();
            if parts.len() != 4 || parts[1..].iter().any(|p| p.is_empty()) {
                return Err(EnrichmentError::TransportRules(format!(
                    "expected bound:type:mode:object, got '{entry}'"
                )));
            }
            let below = match parts[0] {
                "*" => None,
                b => Some(b.parse::<f64>().map_err(|_| {
                    EnrichmentError::TransportRules(format!("bad speed bound '{b}'"))
                })?),
            };
            rules.push(Self::rule(below, parts[1], parts[2], parts[3]));
        }
        Self::new(rules)
    }

    pub fn classify(&self, speed_mps: f64) -> &TransportRule {
        self.rules
            .iter()
            .find(|r| r.below_mps.is_none_or(|b| speed_mps < b))
            .expect("catch-all rule is always present")
    }
}

/// POI explaining the episode: the smallest footprint (by bounding-box area)
/// containing the episode's representative point, ties broken by the
/// lexicographically smallest id. Stops only consider places that allow
/// stops, Moves only places that allow moves.
pub fn match_poi<'a>(
    traj: &RawTrajectory,
    ep: &Episode,
    catalog: &'a [PointOfInterest],
) -> Option<&'a PointOfInterest> {
    let p = ep.representative_point(traj);
    let allowed = |poi: &PointOfInterest| match ep.kind {
        EpisodeKind::Stop => poi.allows_stop,
        EpisodeKind::Move => poi.allows_move,
    };
    smallest_containing(p, catalog.iter().filter(|poi| allowed(poi)))
}

fn smallest_containing<'a>(
    p: GeoPoint,
    candidates: impl Iterator<Item = &'a PointOfInterest>,
) -> Option<&'a PointOfInterest> {
    candidates
        .filter(|poi| point_in_polygon(p, &poi.footprint))
        .min_by(|a, b| {
            a.footprint_area()
                .total_cmp(&b.footprint_area())
                .then_with(|| a.poi_id.cmp(&b.poi_id))
        })
}

/// Events whose footprint holds the representative point and whose interval
/// overlaps the episode (closed intervals), sorted by id.
pub fn match_events<'a>(
    traj: &RawTrajectory,
    ep: &Episode,
    catalog: &'a [EventOfInterest],
) -> Vec<&'a EventOfInterest> {
    let p = ep.representative_point(traj);
    let mut hits: Vec<&EventOfInterest> = catalog
        .iter()
        .filter(|e| e.t_start <= ep.t_end && ep.t_begin <= e.t_end)
        .filter(|e| point_in_polygon(p, &e.footprint))
        .collect();
    hits.sort_by(|a, b| a.event_id.cmp(&b.event_id));
    hits.dedup_by(|a, b| a.event_id == b.event_id);
    hits
}

/// Everything enrichment needs besides the trajectory itself.
#[derive(Debug, Clone)]
pub struct EnrichmentContext<'a> {
    pub pois: &'a [PointOfInterest],
    pub events: &'a [EventOfInterest],
    pub params: SegmentationParams,
    pub goal_rules: &'a GoalRules,
    pub transport: &'a TransportRules,
}

/// Segments the trajectory and annotates each episode.
pub fn build_semantic_trajectory(
    traj: &RawTrajectory,
    ctx: &EnrichmentContext<'_>,
) -> Result<SemanticTrajectory, EnrichmentError> {
    let segmentation = segment_episodes(traj, &ctx.params);
    let mut segments = Vec::with_capacity(segmentation.episodes.len());
    for (ordinal, episode) in segmentation.episodes.into_iter().enumerate() {
        let stats = episode_stats(traj, &episode)?;
        let poi = match_poi(traj, &episode, ctx.pois);
        let events = match_events(traj, &episode, ctx.events);
        let first_event = events.first().copied();

        let annotation = if poi.is_none() && first_event.is_none() {
            SemanticAnnotation::unannotated()
        } else {
            let category = poi.map_or(UNKNOWN, |p| p.object_category.as_str());
            let item = first_event.map_or(UNKNOWN, |e| e.event_item_name.as_str());
            SemanticAnnotation {
                geo_object_property: poi.map(|p| p.semantic_purpose.clone()).unwrap_or_default(),
                trajectory_goal: ctx.goal_rules.lookup(category, item).to_string(),
                event_ref: first_event.map(|e| e.event_id.clone()),
            }
        };
        let transport_mode = match episode.kind {
            EpisodeKind::Stop => NO_TRANSPORT.to_string(),
            EpisodeKind::Move => ctx
                .transport
                .classify(stats.avg_speed_mps)
                .transport_type
                .clone(),
        };
        let pts = traj.points();
        segments.push(SemanticSegment {
            ordinal,
            begin: SegmentEndpoint {
                point: pts[episode.start_index],
                poi_id: None,
            },
            end: SegmentEndpoint {
                point: pts[episode.end_index],
                poi_id: None,
            },
            poi_id: poi.map(|p| p.poi_id.clone()),
            events: events.iter().map(|e| e.event_id.clone()).collect(),
            goal: annotation.trajectory_goal.clone(),
            annotation,
            transport_mode,
            stats,
            episode,
            posts: Vec::new(),
        });
    }

    // Endpoints take the place of the Stop they touch.
    for k in 0..segments.len() {
        let stop_poi = |s: &SemanticSegment| s.stop_ref().and(s.poi_id.clone());
        let begin = if segments[k].episode.is_stop() {
            segments[k].poi_id.clone()
        } else {
            k.checked_sub(1).and_then(|j| stop_poi(&segments[j]))
        };
        let end = if segments[k].episode.is_stop() {
            segments[k].poi_id.clone()
        } else {
            segments.get(k + 1).and_then(stop_poi)
        };
        segments[k].begin.poi_id = begin;
        segments[k].end.poi_id = end;
    }

    Ok(SemanticTrajectory {
        traj_id: traj.traj_id().to_string(),
        object_id: traj.object_id().to_string(),
        segments,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PostAttachment {
    pub attached: usize,
    pub orphans: usize,
    /// Posts of other moving objects, ignored.
    pub foreign: usize,
}

/// Attaches each post of the trajectory's object to the first segment whose
/// closed time range contains it; a post on a shared boundary instant goes
/// to the earlier segment.
pub fn attach_social_posts(st: &mut SemanticTrajectory, posts: &[SocialPost]) -> PostAttachment {
    let mut report = PostAttachment::default();
    for post in posts {
        if post.object_id != st.object_id {
            report.foreign += 1;
            continue;
        }
        match st
            .segments
            .iter_mut()
            .find(|s| s.begin.point.t <= post.t && post.t <= s.end.point.t)
        {
            Some(seg) => {
                seg.posts.push(post.clone());
                report.attached += 1;
            }
            None => report.orphans += 1,
        }
    }
    for seg in &mut st.segments {
        seg.posts
            .sort_by(|a, b| a.t.cmp(&b.t).then_with(|| a.post_id.cmp(&b.post_id)));
    }
    report
}
