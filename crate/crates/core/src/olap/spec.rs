//! Declarative query documents.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::QueryError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuerySpec {
    /// Conjunction of predicates over the joined fact/dimension view.
    #[serde(default)]
    pub filters: Vec<Filter>,
    #[serde(default)]
    pub group_by: Vec<String>,
    #[serde(default)]
    pub aggregates: Vec<Aggregate>,
    /// Keep only the groups with the largest row count (all ties).
    #[serde(default)]
    pub argmax_count: bool,
    /// Projection for ungrouped queries, one output row per fact.
    #[serde(default)]
    pub select: Vec<String>,
    /// Remove duplicate projected rows.
    #[serde(default)]
    pub distinct: bool,
    #[serde(default)]
    pub order_by: Vec<OrderKey>,
}

impl QuerySpec {
    pub fn from_json(text: &str) -> Result<Self, QueryError> {
        serde_json::from_str(text).map_err(|e| QueryError::InvalidSpec(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn is_grouped(&self) -> bool {
        !self.group_by.is_empty() || !self.aggregates.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Filter {
    Eq {
        attribute: String,
        value: Value,
    },
    Ne {
        attribute: String,
        value: Value,
    },
    Lt {
        attribute: String,
        value: Value,
    },
    Gt {
        attribute: String,
        value: Value,
    },
    /// Inclusive on both ends.
    Between {
        attribute: String,
        low: Value,
        high: Value,
    },
    /// Geometry attribute contained in a WKT polygon.
    Within {
        attribute: String,
        polygon: String,
    },
}

impl Filter {
    pub fn attribute(&self) -> &str {
        match self {
            Filter::Eq { attribute, .. }
            | Filter::Ne { attribute, .. }
            | Filter::Lt { attribute, .. }
            | Filter::Gt { attribute, .. }
            | Filter::Between { attribute, .. }
            | Filter::Within { attribute, .. } => attribute,
        }
    }

    pub fn eq(attribute: &str, value: impl Into<Value>) -> Self {
        Filter::Eq {
            attribute: attribute.into(),
            value: value.into(),
        }
    }

    pub fn ne(attribute: &str, value: impl Into<Value>) -> Self {
        Filter::Ne {
            attribute: attribute.into(),
            value: value.into(),
        }
    }

    pub fn lt(attribute: &str, value: impl Into<Value>) -> Self {
        Filter::Lt {
            attribute: attribute.into(),
            value: value.into(),
        }
    }

    pub fn gt(attribute: &str, value: impl Into<Value>) -> Self {
        Filter::Gt {
            attribute: attribute.into(),
            value: value.into(),
        }
    }

    pub fn between(attribute: &str, low: impl Into<Value>, high: impl Into<Value>) -> Self {
        Filter::Between {
            attribute: attribute.into(),
            low: low.into(),
            high: high.into(),
        }
    }

    pub fn within(attribute: &str, polygon_wkt: &str) -> Self {
        Filter::Within {
            attribute: attribute.into(),
            polygon: polygon_wkt.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AggregateFn {
    Count,
    Sum,
    Avg,
    Min,
    Max,
    CountDistinct,
}

impl AggregateFn {
    pub const ALL: [AggregateFn; 6] = [
        AggregateFn::Count,
        AggregateFn::Sum,
        AggregateFn::Avg,
        AggregateFn::Min,
        AggregateFn::Max,
        AggregateFn::CountDistinct,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            AggregateFn::Count => "COUNT",
            AggregateFn::Sum => "SUM",
            AggregateFn::Avg => "AVG",
            AggregateFn::Min => "MIN",
            AggregateFn::Max => "MAX",
            AggregateFn::CountDistinct => "COUNT_DISTINCT",
        }
    }
}

impl fmt::Display for AggregateFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub const COUNT_ALL: &str = "*";

fn count_all() -> String {
    COUNT_ALL.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aggregate {
    pub function: AggregateFn,
    /// Column name, or `*` for COUNT.
    #[serde(default = "count_all")]
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alias: Option<String>,
}

impl Aggregate {
    pub fn new(function: AggregateFn, target: &str) -> Self {
        Aggregate {
            function,
            target: target.into(),
            alias: None,
        }
    }

    pub fn count() -> Self {
        Self::new(AggregateFn::Count, COUNT_ALL)
    }

    pub fn alias(mut self, name: &str) -> Self {
        self.alias = Some(name.into());
        self
    }

    /// Output column name: the alias, or `FN(target)`.
    pub fn column_name(&self) -> String {
        self.alias
            .clone()
            .unwrap_or_else(|| format!("{}({})", self.function, self.target))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderKey {
    pub column: String,
    #[serde(default)]
    pub descending: bool,
}

impl OrderKey {
    pub fn asc(column: &str) -> Self {
        OrderKey {
            column: column.into(),
            descending: false,
        }
    }

    pub fn desc(column: &str) -> Self {
        OrderKey {
            column: column.into(),
            descending: true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_json_document() {
        let spec = QuerySpec::from_json(
            r#"{
              "filters": [
                {"op": "eq", "attribute": "CalendarSeason", "value": "Summer"},
                {"op": "between", "attribute": "CalendarYear", "low": "2010", "high": 2015},
                {"op": "within", "attribute": "GeoObjectType", "polygon": "POLYGON((0 0, 1 0, 1 1, 0 0))"}
              ],
              "group_by": ["EventItemName"],
              "aggregates": [{"function": "COUNT"}, {"function": "AVG", "target": "TravelDistance", "alias": "avg_d"}],
              "order_by": [{"column": "avg_d", "descending": true}]
            }"#,
        )
        .unwrap();
        assert_eq!(spec.filters.len(), 3);
        assert_eq!(spec.aggregates[0], Aggregate::count());
        assert_eq!(spec.aggregates[0].column_name(), "COUNT(*)");
        assert_eq!(spec.aggregates[1].column_name(), "avg_d");
        assert!(spec.is_grouped());
        assert_eq!(QuerySpec::from_json(&spec.to_json()).unwrap(), spec);
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(matches!(
            QuerySpec::from_json(r#"{"where": []}"#),
            Err(QueryError::InvalidSpec(_))
        ));
        assert!(QuerySpec::from_json(
            r#"{"filters": [{"op": "like", "attribute": "x", "value": 1}]}"#
        )
        .is_err());
    }
}
