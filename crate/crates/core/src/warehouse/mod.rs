//! In-memory star schema with surrogate keys, referential integrity and
//! CSV persistence.

pub mod members;
pub mod schema;
pub mod storage;

use std::collections::{HashMap, HashSet};
use std::io;

use thiserror::Error;

pub use members::{
    DayType, DimensionMember, EventsMember, GeoSpaceMember, Hemisphere, Season, SocialMember,
    TemporalMember, TrajectoryMember, VelocityBands, VelocityClass, UNKNOWN_VALUE,
};
pub use schema::{hierarchy_levels, ColumnType, Dimension, SchemaDescriptor};
pub use storage::{open_dir, write_dir, StagedWrite};

use crate::trajectory::EpisodeKind;

/// Surrogate key; 0 is the UNKNOWN member of every dimension.
pub type MemberKey = u64;
pub const UNKNOWN_KEY: MemberKey = 0;

#[derive(Debug, Error)]
pub enum WarehouseError {
    #[error("unknown dimension '{0}'")]
    UnknownDimension(String),
    #[error("schema mismatch for {dimension}: {reason}")]
    SchemaMismatch {
        dimension: Dimension,
        reason: String,
    },
    #[error("dangling foreign key: {dimension} has no member {key}")]
    DanglingForeignKey {
        dimension: Dimension,
        key: MemberKey,
    },
    #[error("fact ({traj_id}, {ordinal}) already loaded")]
    DuplicateFact { traj_id: String, ordinal: i64 },
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("corrupt warehouse file {file}: {reason}")]
    Corrupt { file: String, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Members of one dimension, addressed by row position.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionTable {
    dimension: Dimension,
    rows: Vec<Vec<String>>,
    index: HashMap<Vec<String>, MemberKey>,
}

impl DimensionTable {
    pub fn new(dimension: Dimension) -> Self {
        let unknown = vec![UNKNOWN_VALUE.to_string(); dimension.columns().len()];
        let mut index = HashMap::new();
        index.insert(unknown.clone(), UNKNOWN_KEY);
        DimensionTable {
            dimension,
            rows: vec![unknown],
            index,
        }
    }

    /// Rebuilds a table from stored rows; row `k` holds member `k`.
    /// Duplicate tuples are kept so that `integrity_check` can report them.
    pub fn from_rows(dimension: Dimension, rows: Vec<Vec<String>>) -> Result<Self, WarehouseError> {
        let width = dimension.columns().len();
        if rows.is_empty() {
            return Err(WarehouseError::SchemaMismatch {
                dimension,
                reason: "missing UNKNOWN member".into(),
            });
        }
        let mut index = HashMap::new();
        for (k, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(WarehouseError::SchemaMismatch {
                    dimension,
                    reason: format!("member {k} has {} attributes, expected {width}", row.len()),
                });
            }
            index.entry(row.clone()).or_insert(k as MemberKey);
        }
        Ok(DimensionTable {
            dimension,
            rows,
            index,
        })
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    /// Member count including the UNKNOWN member.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Member count excluding the UNKNOWN member.
    pub fn cardinality(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn get(&self, key: MemberKey) -> Option<&[String]> {
        self.rows.get(usize::try_from(key).ok()?).map(Vec::as_slice)
    }

    pub fn contains(&self, key: MemberKey) -> bool {
        self.get(key).is_some()
    }

    pub fn lookup(&self, row: &[String]) -> Option<MemberKey> {
        self.index.get(row).copied()
    }

    pub fn rows(&self) -> impl Iterator<Item = (MemberKey, &[String])> {
        self.rows
            .iter()
            .enumerate()
            .map(|(k, r)| (k as MemberKey, r.as_slice()))
    }

    /// Value of `column` for member `key`.
    pub fn attribute(&self, key: MemberKey, column: &str) -> Option<&str> {
        let pos = self
            .dimension
            .columns()
            .iter()
            .position(|c| c.name == column)?;
        self.get(key).map(|r| r[pos].as_str())
    }

    /// Find-or-create on the full attribute tuple, given in column order.
    pub fn find_or_create(&mut self, row: Vec<String>) -> Result<MemberKey, WarehouseError> {
        let width = self.dimension.columns().len();
        if row.len() != width {
            return Err(WarehouseError::SchemaMismatch {
                dimension: self.dimension,
                reason: format!("got {} attributes, expected {width}", row.len()),
            });
        }
        if let Some(&k) = self.index.get(&row) {
            return Ok(k);
        }
        let key = self.rows.len() as MemberKey;
        self.index.insert(row.clone(), key);
        self.rows.push(row);
        Ok(key)
    }
}

/// Foreign keys of one fact row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FactKeys {
    pub geo_space: MemberKey,
    pub temporal: MemberKey,
    pub events: MemberKey,
    pub trajectory: MemberKey,
    pub social: MemberKey,
}

impl FactKeys {
    pub fn get(&self, dim: Dimension) -> MemberKey {
        match dim {
            Dimension::Geographical => self.geo_space,
            Dimension::Temporal => self.temporal,
            Dimension::Events => self.events,
            Dimension::Trajectory => self.trajectory,
            Dimension::Social => self.social,
        }
    }

    pub fn set(&mut self, dim: Dimension, key: MemberKey) {
        match dim {
            Dimension::Geographical => self.geo_space = key,
            Dimension::Temporal => self.temporal = key,
            Dimension::Events => self.events = key,
            Dimension::Trajectory => self.trajectory = key,
            Dimension::Social => self.social = key,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Measures {
    pub duration_s: i64,
    pub travel_distance_m: f64,
    pub average_speed_mps: f64,
    pub num_points: i64,
    pub num_semantic_stops: i64,
    pub num_mobility_modes: i64,
    pub square_area_m2: f64,
    pub event_time_duration_s: i64,
    pub activity_duration_s: i64,
}

/// Numeric value of a stored measure column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasureValue {
    Integer(i64),
    Real(f64),
}

impl MeasureValue {
    pub fn as_f64(&self) -> f64 {
        match *self {
            MeasureValue::Integer(v) => v as f64,
            MeasureValue::Real(v) => v,
        }
    }
}

impl Measures {
    /// Values in schema measure order.
    pub fn values(&self) -> [MeasureValue; 9] {
        use MeasureValue::{Integer, Real};
        [
            Integer(self.duration_s),
            Real(self.travel_distance_m),
            Real(self.average_speed_mps),
            Integer(self.num_points),
            Integer(self.num_semantic_stops),
            Integer(self.num_mobility_modes),
            Real(self.square_area_m2),
            Integer(self.event_time_duration_s),
            Integer(self.activity_duration_s),
        ]
    }

    pub fn get(&self, column: &str) -> Option<MeasureValue> {
        let pos = schema::MEASURES.iter().position(|m| m.column == column)?;
        Some(self.values()[pos])
    }
}

/// A fact awaiting insertion.
#[derive(Debug, Clone, PartialEq)]
pub struct NewFact {
    pub keys: FactKeys,
    pub traj_id: String,
    pub object_id: String,
    pub segment_ordinal: i64,
    pub segment_kind: EpisodeKind,
    pub measures: Measures,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactRow {
    pub fact_id: u64,
    pub keys: FactKeys,
    pub traj_id: String,
    pub object_id: String,
    pub segment_ordinal: i64,
    pub segment_kind: EpisodeKind,
    pub measures: Measures,
}

impl FactRow {
    pub fn natural_key(&self) -> (&str, i64) {
        (&self.traj_id, self.segment_ordinal)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Warehouse {
    dimensions: [DimensionTable; 5],
    facts: Vec<FactRow>,
    natural_keys: HashSet<(String, i64)>,
    next_fact_id: u64,
}

impl Default for Warehouse {
    fn default() -> Self {
        Self::new()
    }
}

impl Warehouse {
    /// Empty warehouse holding only the UNKNOWN members.
    pub fn new() -> Self {
        Warehouse {
            dimensions: Dimension::ALL.map(DimensionTable::new),
            facts: Vec::new(),
            natural_keys: HashSet::new(),
            next_fact_id: 1,
        }
    }

    /// Assembles a warehouse from stored parts without integrity checks.
    pub fn from_parts(
        dimensions: [DimensionTable; 5],
        facts: Vec<FactRow>,
    ) -> Result<Self, WarehouseError> {
        for (d, table) in Dimension::ALL.iter().zip(&dimensions) {
            if table.dimension() != *d {
                return Err(WarehouseError::SchemaMismatch {
                    dimension: *d,
                    reason: format!("table for {} supplied in its place", table.dimension()),
                });
            }
        }
        let natural_keys = facts
            .iter()
            .map(|f| (f.traj_id.clone(), f.segment_ordinal))
            .collect();
        let next_fact_id = facts.iter().map(|f| f.fact_id).max().unwrap_or(0) + 1;
        Ok(Warehouse {
            dimensions,
            facts,
            natural_keys,
            next_fact_id,
        })
    }

    pub fn dimension(&self, dim: Dimension) -> &DimensionTable {
        &self.dimensions[dim as usize]
    }

    pub fn facts(&self) -> &[FactRow] {
        &self.facts
    }

    /// Raw mutable access, used to inject faults in tests.
    pub fn facts_mut(&mut self) -> &mut Vec<FactRow> {
        &mut self.facts
    }

    pub fn cardinality(&self, dim: Dimension) -> usize {
        self.dimension(dim).cardinality()
    }

    /// Find-or-create a member from `(column, value)` pairs in any order.
    /// The pairs must name every attribute column exactly once.
    pub fn resolve_dimension_member(
        &mut self,
        dim: &str,
        attrs: &[(&str, &str)],
    ) -> Result<MemberKey, WarehouseError> {
        let dim: Dimension = dim.parse()?;
        let columns = dim.columns();
        let mut row: Vec<Option<String>> = vec![None; columns.len()];
        for (name, value) in attrs {
            let pos = columns
                .iter()
                .position(|c| c.name == *name)
                .ok_or_else(|| WarehouseError::SchemaMismatch {
                    dimension: dim,
                    reason: format!("no attribute '{name}'"),
                })?;
            if row[pos].replace(value.to_string()).is_some() {
                return Err(WarehouseError::SchemaMismatch {
                    dimension: dim,
                    reason: format!("attribute '{name}' given twice"),
                });
            }
        }
        let row: Option<Vec<String>> = row.into_iter().collect();
        let row = row.ok_or_else(|| WarehouseError::SchemaMismatch {
            dimension: dim,
            reason: "missing attributes".into(),
        })?;
        self.resolve_row(dim, row)
    }

    pub fn resolve_row(
        &mut self,
        dim: Dimension,
        row: Vec<String>,
    ) -> Result<MemberKey, WarehouseError> {
        self.dimensions[dim as usize].find_or_create(row)
    }

    pub fn resolve<M: DimensionMember>(&mut self, member: &M) -> Result<MemberKey, WarehouseError> {
        self.resolve_row(M::DIMENSION, member.to_row())
    }

    pub fn contains_natural_key(&self, traj_id: &str, ordinal: i64) -> bool {
        self.natural_keys.contains(&(traj_id.to_string(), ordinal))
    }

    /// Stores a fact under the next sequential id after checking that every
    /// foreign key resolves and the natural key is new.
    pub fn insert_fact(&mut self, fact: NewFact) -> Result<u64, WarehouseError> {
        for dim in Dimension::ALL {
            let key = fact.keys.get(dim);
            if !self.dimension(dim).contains(key) {
                return Err(WarehouseError::DanglingForeignKey {
                    dimension: dim,
                    key,
                });
            }
        }
        let natural = (fact.traj_id.clone(), fact.segment_ordinal);
        if self.natural_keys.contains(&natural) {
            return Err(WarehouseError::DuplicateFact {
                traj_id: natural.0,
                ordinal: natural.1,
            });
        }
        self.natural_keys.insert(natural);
        let fact_id = self.next_fact_id;
        self.next_fact_id += 1;
        self.facts.push(FactRow {
            fact_id,
            keys: fact.keys,
            traj_id: fact.traj_id,
            object_id: fact.object_id,
            segment_ordinal: fact.segment_ordinal,
            segment_kind: fact.segment_kind,
            measures: fact.measures,
        });
        Ok(fact_id)
    }

    pub fn integrity_check(&self) -> IntegrityReport {
        let mut report = IntegrityReport::default();
        for dim in Dimension::ALL {
            let mut seen: HashMap<&[String], MemberKey> = HashMap::new();
            for (key, row) in self.dimension(dim).rows() {
                if let Some(&first) = seen.get(row) {
                    report.duplicate_members.push(DuplicateMember {
                        dimension: dim,
                        first,
                        duplicate: key,
                    });
                } else {
                    seen.insert(row, key);
                }
            }
        }
        let mut natural: HashSet<(&str, i64)> = HashSet::new();
        for f in &self.facts {
            for dim in Dimension::ALL {
                let key = f.keys.get(dim);
                if !self.dimension(dim).contains(key) {
                    report.dangling_keys.push(DanglingKey {
                        fact_id: f.fact_id,
                        dimension: dim,
                        key,
                    });
                }
            }
            if !natural.insert(f.natural_key()) {
                report.duplicate_facts.push(f.fact_id);
            }
            for (def, value) in schema::MEASURES.iter().zip(f.measures.values()) {
                let v = value.as_f64();
                if !v.is_finite() || v < 0.0 {
                    report.measure_violations.push(MeasureViolation {
                        fact_id: f.fact_id,
                        measure: def.column,
                        stored: v,
                        expected: None,
                    });
                }
            }
            let m = &f.measures;
            let expected = crate::trajectory::average_speed(m.travel_distance_m, m.duration_s);
            if (m.average_speed_mps - expected).abs() > SPEED_REL_TOLERANCE * expected.abs() {
                report.measure_violations.push(MeasureViolation {
                    fact_id: f.fact_id,
                    measure: "AverageTrajectorySpeed",
                    stored: m.average_speed_mps,
                    expected: Some(expected),
                });
            }
        }
        report
    }
}

const SPEED_REL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DanglingKey {
    pub fact_id: u64,
    pub dimension: Dimension,
    pub key: MemberKey,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DuplicateMember {
    pub dimension: Dimension,
    pub first: MemberKey,
    pub duplicate: MemberKey,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureViolation {
    pub fact_id: u64,
    pub measure: &'static str,
    pub stored: f64,
    /// Recomputed value, for derived measures.
    pub expected: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntegrityReport {
    pub dangling_keys: Vec<DanglingKey>,
    pub duplicate_members: Vec<DuplicateMember>,
    /// Fact ids whose natural key repeats an earlier fact.
    pub duplicate_facts: Vec<u64>,
    pub measure_violations: Vec<MeasureViolation>,
}

impl IntegrityReport {
    pub fn is_clean(&self) -> bool {
        self.is_empty()
    }

    pub fn len(&self) -> usize {
        self.dangling_keys.len()
            + self.duplicate_members.len()
            + self.duplicate_facts.len()
            + self.measure_violations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
