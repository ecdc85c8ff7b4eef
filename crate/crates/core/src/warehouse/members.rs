//! Typed dimension members and their row encodings.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Datelike, Timelike, Utc, Weekday};

use super::schema::Dimension;
use super::WarehouseError;
use crate::geo::GeoPoint;

/// Text stored in every attribute of the reserved key-0 member.
pub const UNKNOWN_VALUE: &str = "UNKNOWN";

pub trait DimensionMember {
    const DIMENSION: Dimension;

    /// Attribute values in schema column order.
    fn to_row(&self) -> Vec<String>;
}

fn or_unknown(v: &Option<String>) -> String {
    v.clone().unwrap_or_else(|| UNKNOWN_VALUE.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeoSpaceMember {
    pub continent: Option<String>,
    pub country: Option<String>,
    pub state_province: Option<String>,
    pub region: Option<String>,
    pub city: Option<String>,
    pub district: Option<String>,
    pub geo_object_name: Option<String>,
    /// WKT of the place footprint, or of the episode point when no place matched.
    pub geo_object_type: String,
    pub landmark_object_name: Option<String>,
    pub activity_object_name: Option<String>,
    pub semantic_purpose: Option<String>,
}

impl DimensionMember for GeoSpaceMember {
    const DIMENSION: Dimension = Dimension::Geographical;

    fn to_row(&self) -> Vec<String> {
        vec![
            or_unknown(&self.continent),
            or_unknown(&self.country),
            or_unknown(&self.state_province),
            or_unknown(&self.region),
            or_unknown(&self.city),
            or_unknown(&self.district),
            or_unknown(&self.geo_object_name),
            self.geo_object_type.clone(),
            or_unknown(&self.landmark_object_name),
            or_unknown(&self.activity_object_name),
            or_unknown(&self.semantic_purpose),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hemisphere {
    North,
    South,
}

impl FromStr for Hemisphere {
    type Err = WarehouseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "north" | "n" | "northern" => Ok(Hemisphere::North),
            "south" | "s" | "southern" => Ok(Hemisphere::South),
            _ => Err(WarehouseError::InvalidValue(format!(
                "unknown hemisphere '{s}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Season {
    Winter,
    Spring,
    Summer,
    Fall,
}

impl Season {
    /// Meteorological seasons; the southern hemisphere is shifted by six months.
    pub fn of_month(month: u32, hemisphere: Hemisphere) -> Season {
        let north = match month {
            12 | 1 | 2 => Season::Winter,
            3..=5 => Season::Spring,
            6..=8 => Season::Summer,
            _ => Season::Fall,
        };
        match hemisphere {
            Hemisphere::North => north,
            Hemisphere::South => match north {
                Season::Winter => Season::Summer,
                Season::Spring => Season::Fall,
                Season::Summer => Season::Winter,
                Season::Fall => Season::Spring,
            },
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Season::Winter => "Winter",
            Season::Spring => "Spring",
            Season::Summer => "Summer",
            Season::Fall => "Fall",
        }
    }
}

impl fmt::Display for Season {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DayType {
    WeekDay,
    WeekEndDay,
}

impl DayType {
    pub fn as_str(&self) -> &'static str {
        match self {
            DayType::WeekDay => "WeekDay",
            DayType::WeekEndDay => "WeekEndDay",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TemporalMember {
    pub calendar_year: i32,
    /// 1..=4
    pub quarter: u32,
    pub season: Season,
    pub month: u32,
    /// ISO-8601 week number.
    pub week: u32,
    pub day_type: DayType,
    /// Day of month.
    pub day: u32,
    pub hour: u32,
    pub minute: u32,
    pub second: u32,
}

impl TemporalMember {
    pub fn from_instant(t: DateTime<Utc>, hemisphere: Hemisphere) -> Self {
        let month = t.month();
        TemporalMember {
            calendar_year: t.year(),
            quarter: (month - 1) / 3 + 1,
            season: Season::of_month(month, hemisphere),
            month,
            week: t.iso_week().week(),
            day_type: match t.weekday() {
                Weekday::Sat | Weekday::Sun => DayType::WeekEndDay,
                _ => DayType::WeekDay,
            },
            day: t.day(),
            hour: t.hour(),
            minute: t.minute(),
            second: t.second(),
        }
    }

    pub fn quarter_label(&self) -> String {
        format!("Q{}", self.quarter)
    }
}

impl DimensionMember for TemporalMember {
    const DIMENSION: Dimension = Dimension::Temporal;

    fn to_row(&self) -> Vec<String> {
        vec![
            self.calendar_year.to_string(),
            self.quarter_label(),
            self.season.to_string(),
            self.month.to_string(),
            self.week.to_string(),
            self.day_type.as_str().to_string(),
            self.day.to_string(),
            self.hour.to_string(),
            self.minute.to_string(),
            self.second.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventsMember {
    pub event_item_name: String,
    pub event_goal_name: String,
    pub event_activity_name: String,
    pub event_environment_type: String,
    pub event_environment_charac: String,
}

impl DimensionMember for EventsMember {
    const DIMENSION: Dimension = Dimension::Events;

    fn to_row(&self) -> Vec<String> {
        vec![
            self.event_item_name.clone(),
            self.event_goal_name.clone(),
            self.event_activity_name.clone(),
            self.event_environment_type.clone(),
            self.event_environment_charac.clone(),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VelocityClass {
    Stationary,
    Slow,
    Moderate,
    Fast,
}

impl VelocityClass {
    pub const ALL: [VelocityClass; 4] = [
        VelocityClass::Stationary,
        VelocityClass::Slow,
        VelocityClass::Moderate,
        VelocityClass::Fast,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            VelocityClass::Stationary => "stationary",
            VelocityClass::Slow => "slow",
            VelocityClass::Moderate => "moderate",
            VelocityClass::Fast => "fast",
        }
    }
}

impl FromStr for VelocityClass {
    type Err = WarehouseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        VelocityClass::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| WarehouseError::InvalidValue(format!("unknown velocity class '{s}'")))
    }
}

/// Speed thresholds (m/s, exclusive upper bounds) for [`VelocityClass`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityBands {
    pub stationary_below: f64,
    pub slow_below: f64,
    pub moderate_below: f64,
}

impl VelocityBands {
    pub fn classify(&self, speed_mps: f64) -> VelocityClass {
        if speed_mps < self.stationary_below {
            VelocityClass::Stationary
        } else if speed_mps < self.slow_below {
            VelocityClass::Slow
        } else if speed_mps < self.moderate_below {
            VelocityClass::Moderate
        } else {
            VelocityClass::Fast
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMember {
    pub trajectory_object_type: String,
    pub trajectory_model_name: String,
    pub trajectory_model_feature: String,
    pub model_goal: String,
    pub model_activity: String,
    pub model_behaviour_name: String,
    pub model_behaviour_movement_velocity: VelocityClass,
    pub transportation_mode_name: String,
    pub transportation_type_name: String,
    pub transportation_object_name: String,
    pub segment_start_point: GeoPoint,
    pub segment_end_point: GeoPoint,
}

impl DimensionMember for TrajectoryMember {
    const DIMENSION: Dimension = Dimension::Trajectory;

    fn to_row(&self) -> Vec<String> {
        vec![
            self.trajectory_object_type.clone(),
            self.trajectory_model_name.clone(),
            self.trajectory_model_feature.clone(),
            self.model_goal.clone(),
            self.model_activity.clone(),
            self.model_behaviour_name.clone(),
            self.model_behaviour_movement_velocity.as_str().to_string(),
            self.transportation_mode_name.clone(),
            self.transportation_type_name.clone(),
            self.transportation_object_name.clone(),
            self.segment_start_point.to_wkt(),
            self.segment_end_point.to_wkt(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialMember {
    pub social_medium_type: String,
    pub social_medium_account: String,
    pub content_post_kind: String,
    pub expressive_thought: String,
    pub qualitative_mood: String,
}

impl DimensionMember for SocialMember {
    const DIMENSION: Dimension = Dimension::Social;

    fn to_row(&self) -> Vec<String> {
        vec![
            self.social_medium_type.clone(),
            self.social_medium_account.clone(),
            self.content_post_kind.clone(),
            self.expressive_thought.clone(),
            self.qualitative_mood.clone(),
        ]
    }
}
