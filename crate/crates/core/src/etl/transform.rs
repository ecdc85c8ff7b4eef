//! Segmentation, enrichment and measure computation per trajectory.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use super::{EtlConfig, EtlError, StagedData};
use crate::enrichment::{
    attach_social_posts, build_semantic_trajectory, EnrichmentContext, EventOfInterest,
    PointOfInterest, SemanticSegment, SemanticTrajectory, SocialPost, NO_TRANSPORT,
};
use crate::geo::bbox_area;
use crate::trajectory::{EpisodeKind, RawTrajectory};
use crate::warehouse::{
    EventsMember, GeoSpaceMember, Measures, SocialMember, TemporalMember, TrajectoryMember,
    UNKNOWN_VALUE,
};

/// Dimension tuples and measures of one future fact row.
#[derive(Debug, Clone, PartialEq)]
pub struct FactDraft {
    pub traj_id: String,
    pub object_id: String,
    pub ordinal: i64,
    pub kind: EpisodeKind,
    pub geo: GeoSpaceMember,
    pub temporal: TemporalMember,
    /// `None` maps to the UNKNOWN member.
    pub events: Option<EventsMember>,
    pub trajectory: TrajectoryMember,
    /// `None` maps to the "no interaction" member.
    pub social: Option<SocialMember>,
    pub measures: Measures,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformedTrajectory {
    pub semantic: SemanticTrajectory,
    pub facts: Vec<FactDraft>,
    pub unmatched_stops: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Transformed {
    /// In trajectory-id order.
    pub trajectories: Vec<TransformedTrajectory>,
    /// Posts not attached to any segment.
    pub orphan_posts: usize,
}

struct Lookups<'a> {
    pois: HashMap<&'a str, &'a PointOfInterest>,
    events: HashMap<&'a str, &'a EventOfInterest>,
    posts: HashMap<&'a str, Vec<SocialPost>>,
}

pub fn transform(staged: &StagedData, config: &EtlConfig) -> Result<Transformed, EtlError> {
    let mut posts: HashMap<&str, Vec<SocialPost>> = HashMap::new();
    for p in &staged.posts {
        posts
            .entry(p.object_id.as_str())
            .or_default()
            .push(p.clone());
    }
    let lookups = Lookups {
        pois: staged.pois.iter().map(|p| (p.poi_id.as_str(), p)).collect(),
        events: staged
            .events
            .iter()
            .map(|e| (e.event_id.as_str(), e))
            .collect(),
        posts,
    };
    let ctx = EnrichmentContext {
        pois: &staged.pois,
        events: &staged.events,
        params: config.params,
        goal_rules: &staged.goal_rules,
        transport: &config.transport,
    };
    let trajectories = staged
        .trajectories
        .par_iter()
        .map(|traj| transform_one(traj, &ctx, &lookups, config))
        .collect::<Result<Vec<_>, _>>()?;

    let attached: HashSet<&str> = trajectories
        .iter()
        .flat_map(|t| t.semantic.segments.iter())
        .flat_map(|s| s.posts.iter().map(|p| p.post_id.as_str()))
        .collect();
    let orphan_posts = staged
        .posts
        .iter()
        .filter(|p| !attached.contains(p.post_id.as_str()))
        .count();
    Ok(Transformed {
        trajectories,
        orphan_posts,
    })
}

fn transform_one(
    traj: &RawTrajectory,
    ctx: &EnrichmentContext<'_>,
    lookups: &Lookups<'_>,
    config: &EtlConfig,
) -> Result<TransformedTrajectory, EtlError> {
    let mut semantic = build_semantic_trajectory(traj, ctx)?;
    let own_posts = lookups
        .posts
        .get(traj.object_id())
        .map(Vec::as_slice)
        .unwrap_or_default();
    attach_social_posts(&mut semantic, own_posts);

    let mut warnings = Vec::new();
    if traj.len() < 2 {
        warnings.push(format!(
            "trajectory {} has a single point and yields no episodes",
            traj.traj_id()
        ));
    }
    let unmatched_stops = semantic
        .segments
        .iter()
        .filter(|s| s.episode.is_stop() && s.poi_id.is_none())
        .count();
    let facts = semantic
        .segments
        .iter()
        .map(|seg| draft_fact(traj, seg, lookups, config))
        .collect();
    Ok(TransformedTrajectory {
        semantic,
        facts,
        unmatched_stops,
        warnings,
    })
}

fn non_empty_or_unknown(s: &str) -> String {
    if s.trim().is_empty() {
        UNKNOWN_VALUE.to_string()
    } else {
        s.to_string()
    }
}

fn draft_fact(
    traj: &RawTrajectory,
    seg: &SemanticSegment,
    lookups: &Lookups<'_>,
    config: &EtlConfig,
) -> FactDraft {
    let ep = &seg.episode;
    let poi = seg
        .poi_id
        .as_deref()
        .and_then(|id| lookups.pois.get(id).copied());
    let event = seg
        .annotation
        .event_ref
        .as_deref()
        .and_then(|id| lookups.events.get(id).copied());

    let geo = match poi {
        Some(p) => GeoSpaceMember {
            continent: p.hierarchy.continent.clone(),
            country: p.hierarchy.country.clone(),
            state_province: p.hierarchy.state_province.clone(),
            region: p.hierarchy.region.clone(),
            city: p.hierarchy.city.clone(),
            district: p.hierarchy.district.clone(),
            geo_object_name: p.geo_object_name.clone(),
            geo_object_type: p.footprint.to_wkt(),
            landmark_object_name: Some(p.object_name.clone()),
            activity_object_name: p.activity_object_name.clone(),
            semantic_purpose: Some(p.semantic_purpose.clone()),
        },
        None => GeoSpaceMember {
            continent: None,
            country: None,
            state_province: None,
            region: None,
            city: None,
            district: None,
            geo_object_name: None,
            geo_object_type: ep.representative_point(traj).to_wkt(),
            landmark_object_name: None,
            activity_object_name: None,
            semantic_purpose: None,
        },
    };

    let events = event.map(|e| EventsMember {
        event_item_name: non_empty_or_unknown(&e.event_item_name),
        event_goal_name: non_empty_or_unknown(&e.goal_name),
        event_activity_name: non_empty_or_unknown(&e.activity_names.join("; ")),
        event_environment_type: non_empty_or_unknown(&e.environment.env_type),
        event_environment_charac: non_empty_or_unknown(&e.environment.env_characteristics),
    });

    let model_activity = event
        .and_then(|e| e.activity_names.first().cloned())
        .or_else(|| poi.and_then(|p| p.activity_object_name.clone()))
        .unwrap_or_else(|| UNKNOWN_VALUE.to_string());
    let (transport_mode, transport_type, transport_object) = match ep.kind {
        EpisodeKind::Stop => (
            NO_TRANSPORT.into(),
            NO_TRANSPORT.into(),
            NO_TRANSPORT.into(),
        ),
        EpisodeKind::Move => {
            let rule = config.transport.classify(seg.stats.avg_speed_mps);
            (
                rule.transport_mode.clone(),
                rule.transport_type.clone(),
                rule.transport_object.clone(),
            )
        }
    };
    let has_mode = transport_type != NO_TRANSPORT;
    let trajectory = TrajectoryMember {
        trajectory_object_type: config.object_type.clone(),
        trajectory_model_name: config.model_name.clone(),
        trajectory_model_feature: config.model_feature.clone(),
        model_goal: seg.goal.clone(),
        model_activity,
        model_behaviour_name: match ep.kind {
            EpisodeKind::Stop => "Stopping".into(),
            EpisodeKind::Move => "Moving".into(),
        },
        model_behaviour_movement_velocity: config.velocity_bands.classify(seg.stats.avg_speed_mps),
        transportation_mode_name: transport_mode,
        transportation_type_name: transport_type,
        transportation_object_name: transport_object,
        segment_start_point: seg.begin.point.point,
        segment_end_point: seg.end.point.point,
    };

    let social = seg.posts.first().map(|p| SocialMember {
        social_medium_type: non_empty_or_unknown(&p.medium_type),
        social_medium_account: non_empty_or_unknown(&p.account_platform),
        content_post_kind: p.content_kind.as_str().to_string(),
        expressive_thought: p.expressive_thought.as_str().to_string(),
        qualitative_mood: non_empty_or_unknown(&p.qualitative_mood),
    });

    let is_stop = ep.is_stop();
    let annotated = poi.is_some() || event.is_some();
    let measures = Measures {
        duration_s: seg.stats.duration_s,
        travel_distance_m: seg.stats.travel_distance_m,
        average_speed_mps: seg.stats.avg_speed_mps,
        num_points: seg.stats.num_points as i64,
        num_semantic_stops: i64::from(is_stop),
        num_mobility_modes: i64::from(!is_stop && has_mode),
        square_area_m2: bbox_area(&ep.bbox),
        event_time_duration_s: event.map_or(0, |e| e.overlap_seconds(ep.t_begin, ep.t_end)),
        activity_duration_s: if is_stop && annotated {
            seg.stats.duration_s
        } else {
            0
        },
    };

    FactDraft {
        traj_id: traj.traj_id().to_string(),
        object_id: traj.object_id().to_string(),
        ordinal: seg.ordinal as i64,
        kind: ep.kind,
        geo,
        temporal: TemporalMember::from_instant(seg.begin.point.t, config.hemisphere),
        events,
        trajectory,
        social,
        measures,
    }
}
