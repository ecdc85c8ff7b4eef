//! Static star-schema layout: dimensions, hierarchy levels, columns, measures.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::WarehouseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnType {
    Text,
    Integer,
    Real,
    /// WKT `POINT` or `POLYGON`.
    Geometry,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColumnDef {
    pub name: &'static str,
    pub ty: ColumnType,
}

const fn col(name: &'static str, ty: ColumnType) -> ColumnDef {
    ColumnDef { name, ty }
}

/// A hierarchy level and the column that carries it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelDef {
    pub name: &'static str,
    pub column: &'static str,
}

const fn level(name: &'static str, column: &'static str) -> LevelDef {
    LevelDef { name, column }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dimension {
    Geographical,
    Temporal,
    Events,
    Trajectory,
    Social,
}

use ColumnType::{Geometry, Integer, Real, Text};

const GEO_COLUMNS: &[ColumnDef] = &[
    col("Continent", Text),
    col("Country", Text),
    col("StateProvince", Text),
    col("Region", Text),
    col("City", Text),
    col("District", Text),
    col("GeoObjectName", Text),
    col("GeoObjectType", Geometry),
    col("LandmarkObjectName", Text),
    col("ActivityObjectName", Text),
    col("SemanticPurpose", Text),
];

const GEO_LEVELS: &[LevelDef] = &[
    level("continent", "Continent"),
    level("country", "Country"),
    level("state_province", "StateProvince"),
    level("region", "Region"),
    level("city", "City"),
    level("district", "District"),
    level("geo_object", "GeoObjectName"),
    level("landmark_object", "LandmarkObjectName"),
    level("activity_object", "ActivityObjectName"),
    level("semantic_purpose", "SemanticPurpose"),
];

const TEMPORAL_COLUMNS: &[ColumnDef] = &[
    col("CalendarYear", Integer),
    col("Quarter", Text),
    col("CalendarSeason", Text),
    col("Month", Integer),
    col("Week", Integer),
    col("DayType", Text),
    col("Day", Integer),
    col("Hour", Integer),
    col("Minute", Integer),
    col("Second", Integer),
];

const TEMPORAL_LEVELS: &[LevelDef] = &[
    level("calendar_year", "CalendarYear"),
    level("quarter", "Quarter"),
    level("calendar_season", "CalendarSeason"),
    level("month", "Month"),
    level("week", "Week"),
    level("day_type", "DayType"),
    level("day", "Day"),
    level("hour", "Hour"),
    level("minute", "Minute"),
    level("second", "Second"),
];

const EVENTS_COLUMNS: &[ColumnDef] = &[
    col("EventItemName", Text),
    col("EventGoalName", Text),
    col("EventActivityName", Text),
    col("EventEnvironmentType", Text),
    col("EventEnvironmentCharac", Text),
];

const EVENTS_LEVELS: &[LevelDef] = &[
    level("event_item", "EventItemName"),
    level("goal", "EventGoalName"),
    level("activity", "EventActivityName"),
    level("environment", "EventEnvironmentType"),
];

const TRAJECTORY_COLUMNS: &[ColumnDef] = &[
    col("TrajectoryObjectType", Text),
    col("TrajectoryModelName", Text),
    col("TrajectoryModelFeature", Text),
    col("TrajectoryModelGoal", Text),
    col("TrajectoryModelActivity", Text),
    col("TrajectoryModelBehaviourName", Text),
    col("TrajModelBehaviourMovementVelocity", Text),
    col("TrajectoryTransportationModeName", Text),
    col("TrajectoryTransportationTypeName", Text),
    col("TrajectoryTransportationObjectName", Text),
    col("TrajSegmentSemanticStartPoint", Geometry),
    col("TrajSegmentSemanticEndPoint", Geometry),
];

const TRAJECTORY_LEVELS: &[LevelDef] = &[
    level("trajectory_object_type", "TrajectoryObjectType"),
    level("trajectory_model", "TrajectoryModelName"),
    level("model_goal", "TrajectoryModelGoal"),
    level("model_activity", "TrajectoryModelActivity"),
    level("model_behaviour", "TrajectoryModelBehaviourName"),
    level("transportation_mode", "TrajectoryTransportationModeName"),
    level("transportation_type", "TrajectoryTransportationTypeName"),
    level(
        "transportation_object",
        "TrajectoryTransportationObjectName",
    ),
];

const SOCIAL_COLUMNS: &[ColumnDef] = &[
    col("SocialMediumType", Text),
    col("SocialMediumAccount", Text),
    col("ContentPostKind", Text),
    col("ExpressiveThought", Text),
    col("QualitativeMood", Text),
];

const SOCIAL_LEVELS: &[LevelDef] = &[
    level("social_medium_type", "SocialMediumType"),
    level("social_medium_account", "SocialMediumAccount"),
    level("content_post", "ContentPostKind"),
    level("expressive_thought", "ExpressiveThought"),
    level("qualitative_mood", "QualitativeMood"),
];

impl Dimension {
    /// In fact-table key order.
    pub const ALL: [Dimension; 5] = [
        Dimension::Geographical,
        Dimension::Temporal,
        Dimension::Events,
        Dimension::Trajectory,
        Dimension::Social,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Dimension::Geographical => "geographical",
            Dimension::Temporal => "temporal",
            Dimension::Events => "events",
            Dimension::Trajectory => "trajectory",
            Dimension::Social => "social",
        }
    }

    pub fn table_name(&self) -> &'static str {
        match self {
            Dimension::Geographical => "dim_geographical_space_tbl",
            Dimension::Temporal => "dim_temporal_instance_tbl",
            Dimension::Events => "dim_events_representation_tbl",
            Dimension::Trajectory => "dim_trajectory_representation",
            Dimension::Social => "dim_social_interaction",
        }
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.table_name())
    }

    pub fn key_column(&self) -> &'static str {
        match self {
            Dimension::Geographical => "geoSpaceId",
            Dimension::Temporal => "tempInstId",
            Dimension::Events => "eventsRepId",
            Dimension::Trajectory => "trajRepId",
            Dimension::Social => "socialInterId",
        }
    }

    /// Attribute columns, excluding the key.
    pub fn columns(&self) -> &'static [ColumnDef] {
        match self {
            Dimension::Geographical => GEO_COLUMNS,
            Dimension::Temporal => TEMPORAL_COLUMNS,
            Dimension::Events => EVENTS_COLUMNS,
            Dimension::Trajectory => TRAJECTORY_COLUMNS,
            Dimension::Social => SOCIAL_COLUMNS,
        }
    }

    /// Top-to-bottom roll-up levels.
    pub fn levels(&self) -> &'static [LevelDef] {
        match self {
            Dimension::Geographical => GEO_LEVELS,
            Dimension::Temporal => TEMPORAL_LEVELS,
            Dimension::Events => EVENTS_LEVELS,
            Dimension::Trajectory => TRAJECTORY_LEVELS,
            Dimension::Social => SOCIAL_LEVELS,
        }
    }

    pub fn level(&self, name: &str) -> Option<(usize, &'static LevelDef)> {
        self.levels()
            .iter()
            .enumerate()
            .find(|(_, l)| l.name == name)
    }

    pub fn level_of_column(&self, column: &str) -> Option<usize> {
        self.levels().iter().position(|l| l.column == column)
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dimension {
    type Err = WarehouseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        Dimension::ALL
            .into_iter()
            .find(|d| d.name() == lower || d.table_name() == lower)
            .or(match lower.as_str() {
                "geo" | "geographical_space" | "geographic" => Some(Dimension::Geographical),
                "time" | "temporal_instance" => Some(Dimension::Temporal),
                "event" | "events_representation" => Some(Dimension::Events),
                "trajectory_representation" => Some(Dimension::Trajectory),
                "social_interaction" => Some(Dimension::Social),
                _ => None,
            })
            .ok_or_else(|| WarehouseError::UnknownDimension(s.to_string()))
    }
}

/// Top-to-bottom level names of the dimension called `dim`.
pub fn hierarchy_levels(dim: &str) -> Result<Vec<&'static str>, WarehouseError> {
    let d: Dimension = dim.parse()?;
    Ok(d.levels().iter().map(|l| l.name).collect())
}

pub const FACT_TABLE: &str = "fact_traj_tbl";

/// Stored measure columns of the fact table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasureDef {
    pub column: &'static str,
    pub ty: ColumnType,
    pub unit: &'static str,
    pub description: &'static str,
}

const fn measure(
    column: &'static str,
    ty: ColumnType,
    unit: &'static str,
    description: &'static str,
) -> MeasureDef {
    MeasureDef {
        column,
        ty,
        unit,
        description,
    }
}

pub const MEASURES: &[MeasureDef] = &[
    measure("OverallTemporalDuration", Integer, "s", "episode duration"),
    measure(
        "TravelDistance",
        Real,
        "m",
        "sum of haversine legs inside the episode",
    ),
    measure(
        "AverageTrajectorySpeed",
        Real,
        "m/s",
        "travel distance over duration, 0 for zero duration",
    ),
    measure(
        "NumberOfPoints",
        Integer,
        "count",
        "GPS samples in the episode",
    ),
    measure(
        "NumberOfSemanticStops",
        Integer,
        "count",
        "1 for Stop rows, 0 for Move rows",
    ),
    measure(
        "NumberOfMobilityModes",
        Integer,
        "count",
        "1 for Move rows with a transport mode, else 0",
    ),
    measure(
        "SquareArea",
        Real,
        "m2",
        "equirectangular area of the episode bounding box",
    ),
    measure(
        "EventTimeDuration",
        Integer,
        "s",
        "overlap of the episode with its event",
    ),
    measure(
        "ActivityDuration",
        Integer,
        "s",
        "time spent on a place or event activity during a Stop",
    ),
];

/// Measures obtained by aggregation at query time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DerivedMeasureDef {
    pub name: &'static str,
    pub aggregate: &'static str,
    pub target: &'static str,
    pub per: &'static [&'static str],
}

pub const DERIVED_MEASURES: &[DerivedMeasureDef] = &[
    DerivedMeasureDef {
        name: "AverageEventTimeDuration",
        aggregate: "AVG",
        target: "EventTimeDuration",
        per: &["EventItemName"],
    },
    DerivedMeasureDef {
        name: "MinimumActivityDurationPerEvent",
        aggregate: "MIN",
        target: "ActivityDuration",
        per: &["EventItemName"],
    },
    DerivedMeasureDef {
        name: "MaxTrajectoryTravelDistance",
        aggregate: "MAX",
        target: "TravelDistance",
        per: &["TrajId"],
    },
];

/// Non-measure fact columns after the five foreign keys.
pub const FACT_ATTRIBUTES: &[ColumnDef] = &[
    col("TrajId", Text),
    col("ObjectId", Text),
    col("SegmentOrdinal", Integer),
    col("SegmentKind", Text),
];

pub const FACT_ID_COLUMN: &str = "factId";

/// Type of any column of the joined fact/dimension view.
pub fn column_type(name: &str) -> Option<ColumnType> {
    if name == FACT_ID_COLUMN || Dimension::ALL.iter().any(|d| d.key_column() == name) {
        return Some(Integer);
    }
    FACT_ATTRIBUTES
        .iter()
        .map(|c| (c.name, c.ty))
        .chain(MEASURES.iter().map(|m| (m.column, m.ty)))
        .chain(
            Dimension::ALL
                .iter()
                .flat_map(|d| d.columns().iter().map(|c| (c.name, c.ty))),
        )
        .find(|(n, _)| *n == name)
        .map(|(_, ty)| ty)
}

/// Dimension owning a (non-key) attribute column.
pub fn dimension_of_column(name: &str) -> Option<Dimension> {
    Dimension::ALL
        .into_iter()
        .find(|d| d.columns().iter().any(|c| c.name == name))
}

/// Machine-readable description of the warehouse layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaDescriptor {
    pub fact_table: FactTableDescriptor,
    pub dimensions: Vec<DimensionDescriptor>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactTableDescriptor {
    pub table: String,
    pub key: String,
    pub foreign_keys: Vec<ForeignKeyDescriptor>,
    pub attributes: Vec<AttributeDescriptor>,
    pub measures: Vec<MeasureDescriptor>,
    pub derived_measures: Vec<DerivedMeasureDescriptor>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForeignKeyDescriptor {
    pub column: String,
    pub dimension: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeDescriptor {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: ColumnType,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureDescriptor {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: ColumnType,
    pub unit: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedMeasureDescriptor {
    pub name: String,
    pub aggregate: String,
    pub target: String,
    pub per: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelDescriptor {
    pub name: String,
    pub column: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionDescriptor {
    pub name: String,
    pub table: String,
    pub key: String,
    pub levels: Vec<LevelDescriptor>,
    pub attributes: Vec<AttributeDescriptor>,
}

impl SchemaDescriptor {
    /// Dimensions sorted by name; levels keep their top-to-bottom order.
    pub fn current() -> Self {
        let mut dimensions: Vec<DimensionDescriptor> = Dimension::ALL
            .iter()
            .map(|d| DimensionDescriptor {
                name: d.name().into(),
                table: d.table_name().into(),
                key: d.key_column().into(),
                levels: d
                    .levels()
                    .iter()
                    .map(|l| LevelDescriptor {
                        name: l.name.into(),
                        column: l.column.into(),
                    })
                    .collect(),
                attributes: d
                    .columns()
                    .iter()
                    .map(|c| AttributeDescriptor {
                        name: c.name.into(),
                        ty: c.ty,
                    })
                    .collect(),
            })
            .collect();
        dimensions.sort_by(|a, b| a.name.cmp(&b.name));
        SchemaDescriptor {
            fact_table: FactTableDescriptor {
                table: FACT_TABLE.into(),
                key: FACT_ID_COLUMN.into(),
                foreign_keys: Dimension::ALL
                    .iter()
                    .map(|d| ForeignKeyDescriptor {
                        column: d.key_column().into(),
                        dimension: d.name().into(),
                    })
                    .collect(),
                attributes: FACT_ATTRIBUTES
                    .iter()
                    .map(|c| AttributeDescriptor {
                        name: c.name.into(),
                        ty: c.ty,
                    })
                    .collect(),
                measures: MEASURES
                    .iter()
                    .map(|m| MeasureDescriptor {
                        name: m.column.into(),
                        ty: m.ty,
                        unit: m.unit.into(),
                        description: m.description.into(),
                    })
                    .collect(),
                derived_measures: DERIVED_MEASURES
                    .iter()
                    .map(|m| DerivedMeasureDescriptor {
                        name: m.name.into(),
                        aggregate: m.aggregate.into(),
                        target: m.target.into(),
                        per: m.per.iter().map(|s| s.to_string()).collect(),
                    })
                    .collect(),
            },
            dimensions,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("descriptor serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
