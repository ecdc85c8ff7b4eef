//! OLAP queries over the star schema: filtering (including spatial
//! containment), grouping, aggregation, roll-up and drill-down.

pub mod canned;
pub mod engine;
pub mod spec;
pub mod table;

use thiserror::Error;

pub use canned::{canned_query, canned_spec, CannedParams, CannedQuery, RECIFE_REGION_WKT};
pub use engine::{count_matching, drill_down, execute, rollup, spatial_within_filter};
pub use spec::{Aggregate, AggregateFn, Filter, OrderKey, QuerySpec};
pub use table::{Cell, ResultTable};

use crate::warehouse::{Dimension, MemberKey};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QueryError {
    #[error("unknown attribute '{0}'")]
    UnknownAttribute(String),
    #[error("type mismatch on {attribute}: {reason}")]
    TypeMismatch { attribute: String, reason: String },
    #[error("aggregate {0} cannot be rolled up")]
    NonRollableAggregate(String),
    #[error("level {to} is not above {from}")]
    NotAncestorLevel { from: String, to: String },
    #[error("level {to} is not below {from}")]
    NotDescendantLevel { from: String, to: String },
    #[error("result has no column for level {0}")]
    MissingLevelColumn(String),
    #[error("unknown dimension '{0}'")]
    UnknownDimension(String),
    #[error("dimension {dimension} has no level '{level}'")]
    UnknownLevel { dimension: String, level: String },
    #[error("no place named '{0}'")]
    UnknownPoi(String),
    #[error("place name '{0}' matches several footprints")]
    AmbiguousPoi(String),
    #[error("invalid polygon {0}")]
    InvalidPolygon(String),
    #[error("stored geometry is not valid WKT: {0}")]
    InvalidGeometry(String),
    #[error("fact references missing {dimension} member {key}")]
    DanglingKey {
        dimension: Dimension,
        key: MemberKey,
    },
    #[error("invalid query: {0}")]
    InvalidSpec(String),
}
