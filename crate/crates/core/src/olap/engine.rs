//! Query execution over the joined fact/dimension view.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use serde_json::Value;

use super::spec::{AggregateFn, Filter, QuerySpec, COUNT_ALL};
use super::table::{AggState, Cell, Grouping, ResultTable};
use super::QueryError;
use crate::geo::{parse_wkt_polygon, Geometry, Polygon};
use crate::warehouse::schema::{
    column_type, dimension_of_column, ColumnType, Dimension, FACT_ATTRIBUTES, FACT_ID_COLUMN,
    MEASURES,
};
use crate::warehouse::{FactRow, MeasureValue, Warehouse, UNKNOWN_VALUE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Source {
    FactId,
    Key(Dimension),
    FactAttribute(usize),
    Measure(usize),
    Member(Dimension, usize),
}

#[derive(Debug, Clone, Copy)]
struct Column {
    source: Source,
    ty: ColumnType,
}

fn resolve_column(name: &str) -> Result<Column, QueryError> {
    let unknown = || QueryError::UnknownAttribute(name.to_string());
    let ty = column_type(name).ok_or_else(unknown)?;
    let source = if name == FACT_ID_COLUMN {
        Source::FactId
    } else if let Some(d) = Dimension::ALL.into_iter().find(|d| d.key_column() == name) {
        Source::Key(d)
    } else if let Some(i) = FACT_ATTRIBUTES.iter().position(|c| c.name == name) {
        Source::FactAttribute(i)
    } else if let Some(i) = MEASURES.iter().position(|m| m.column == name) {
        Source::Measure(i)
    } else {
        let d = dimension_of_column(name).ok_or_else(unknown)?;
        let i = d
            .columns()
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(unknown)?;
        Source::Member(d, i)
    };
    Ok(Column { source, ty })
}

/// Typed text of a stored attribute. Values that do not parse as the
/// column's numeric type (the UNKNOWN member) stay text.
fn typed(raw: &str, ty: ColumnType) -> Cell {
    match ty {
        ColumnType::Integer => raw
            .parse()
            .map(Cell::Int)
            .unwrap_or_else(|_| Cell::Text(raw.to_string())),
        ColumnType::Real => raw
            .parse()
            .map(Cell::Real)
            .unwrap_or_else(|_| Cell::Text(raw.to_string())),
        ColumnType::Text | ColumnType::Geometry => Cell::Text(raw.to_string()),
    }
}

/// The fact table joined to all five dimensions, with member attributes
/// pre-typed.
struct JoinedView<'a> {
    wh: &'a Warehouse,
    members: Vec<Vec<Vec<Cell>>>,
}

impl<'a> JoinedView<'a> {
    fn new(wh: &'a Warehouse) -> Result<Self, QueryError> {
        for f in wh.facts() {
            for d in Dimension::ALL {
                let key = f.keys.get(d);
                if !wh.dimension(d).contains(key) {
                    return Err(QueryError::DanglingKey { dimension: d, key });
                }
            }
        }
        let members = Dimension::ALL
            .iter()
            .map(|d| {
                let cols = d.columns();
                wh.dimension(*d)
                    .rows()
                    .map(|(_, row)| row.iter().zip(cols).map(|(v, c)| typed(v, c.ty)).collect())
                    .collect()
            })
            .collect();
        Ok(JoinedView { wh, members })
    }

    fn fetch(&self, fact: &FactRow, col: Column) -> Cell {
        match col.source {
            Source::FactId => Cell::Int(fact.fact_id as i64),
            Source::Key(d) => Cell::Int(fact.keys.get(d) as i64),
            Source::FactAttribute(i) => match FACT_ATTRIBUTES[i].name {
                "TrajId" => Cell::Text(fact.traj_id.clone()),
                "ObjectId" => Cell::Text(fact.object_id.clone()),
                "SegmentOrdinal" => Cell::Int(fact.segment_ordinal),
                _ => Cell::Text(fact.segment_kind.as_str().to_string()),
            },
            Source::Measure(i) => match fact.measures.values()[i] {
                MeasureValue::Integer(v) => Cell::Int(v),
                MeasureValue::Real(v) => Cell::Real(v),
            },
            Source::Member(d, i) => self.members[d as usize][fact.keys.get(d) as usize][i].clone(),
        }
    }

    fn facts(&self) -> &'a [FactRow] {
        self.wh.facts()
    }
}

fn literal(attribute: &str, ty: ColumnType, value: &Value) -> Result<Cell, QueryError> {
    let mismatch = |reason: String| QueryError::TypeMismatch {
        attribute: attribute.to_string(),
        reason,
    };
    match ty {
        ColumnType::Text | ColumnType::Geometry => match value {
            Value::String(s) => Ok(Cell::Text(s.clone())),
            other => Err(mismatch(format!("expected a string, got {other}"))),
        },
        ColumnType::Integer | ColumnType::Real => {
            let number = match value {
                Value::Number(n) => n
                    .as_i64()
                    .map(Cell::Int)
                    .or_else(|| n.as_f64().map(Cell::Real)),
                Value::String(s) => s.trim().parse::<i64>().map(Cell::Int).ok().or_else(|| {
                    s.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .map(Cell::Real)
                }),
                _ => None,
            };
            number.ok_or_else(|| mismatch(format!("expected a number, got {value}")))
        }
    }
}

fn numeric_cmp(a: &Cell, b: &Cell) -> Option<Ordering> {
    match (a, b) {
        (Cell::Int(x), Cell::Int(y)) => Some(x.cmp(y)),
        _ => Some(a.as_f64()?.total_cmp(&b.as_f64()?)),
    }
}

fn same_value(a: &Cell, b: &Cell) -> bool {
    match (a, b) {
        (Cell::Text(x), Cell::Text(y)) => x == y,
        _ => numeric_cmp(a, b) == Some(Ordering::Equal),
    }
}

enum Predicate {
    Eq(Column, Cell),
    Ne(Column, Cell),
    Lt(Column, Cell),
    Gt(Column, Cell),
    Between(Column, Cell, Cell),
    Within(Column, Polygon),
}

fn require_numeric(attribute: &str, col: Column, op: &str) -> Result<(), QueryError> {
    match col.ty {
        ColumnType::Integer | ColumnType::Real => Ok(()),
        _ => Err(QueryError::TypeMismatch {
            attribute: attribute.to_string(),
            reason: format!("{op} needs a numeric attribute"),
        }),
    }
}

fn compile(filter: &Filter) -> Result<Predicate, QueryError> {
    let name = filter.attribute();
    let col = resolve_column(name)?;
    Ok(match filter {
        Filter::Eq { value, .. } => Predicate::Eq(col, literal(name, col.ty, value)?),
        Filter::Ne { value, .. } => Predicate::Ne(col, literal(name, col.ty, value)?),
        Filter::Lt { value, .. } => {
            require_numeric(name, col, "lt")?;
            Predicate::Lt(col, literal(name, col.ty, value)?)
        }
        Filter::Gt { value, .. } => {
            require_numeric(name, col, "gt")?;
            Predicate::Gt(col, literal(name, col.ty, value)?)
        }
        Filter::Between { low, high, .. } => {
            require_numeric(name, col, "between")?;
            Predicate::Between(
                col,
                literal(name, col.ty, low)?,
                literal(name, col.ty, high)?,
            )
        }
        Filter::Within { polygon, .. } => {
            if col.ty != ColumnType::Geometry {
                return Err(QueryError::TypeMismatch {
                    attribute: name.to_string(),
                    reason: "within needs a geometry attribute".into(),
                });
            }
            let poly = parse_wkt_polygon(polygon)
                .map_err(|e| QueryError::InvalidPolygon(format!("{polygon}: {e}")))?;
            Predicate::Within(col, poly)
        }
    })
}

/// Containment of stored WKT values, memoised per distinct value.
#[derive(Default)]
struct WithinCache {
    seen: HashMap<String, bool>,
}

impl WithinCache {
    fn test(&mut self, cell: &Cell, poly: &Polygon) -> Result<bool, QueryError> {
        let Cell::Text(wkt) = cell else {
            return Ok(false);
        };
        if let Some(&hit) = self.seen.get(wkt) {
            return Ok(hit);
        }
        let hit = if wkt == UNKNOWN_VALUE {
            false
        } else {
            Geometry::parse_wkt(wkt)
                .map_err(|e| QueryError::InvalidGeometry(format!("{wkt}: {e}")))?
                .within(poly)
        };
        self.seen.insert(wkt.clone(), hit);
        Ok(hit)
    }
}

fn matches(
    view: &JoinedView<'_>,
    fact: &FactRow,
    predicates: &[Predicate],
    caches: &mut [WithinCache],
) -> Result<bool, QueryError> {
    for (p, cache) in predicates.iter().zip(caches.iter_mut()) {
        let ok = match p {
            Predicate::Eq(c, v) => same_value(&view.fetch(fact, *c), v),
            Predicate::Ne(c, v) => !same_value(&view.fetch(fact, *c), v),
            Predicate::Lt(c, v) => numeric_cmp(&view.fetch(fact, *c), v) == Some(Ordering::Less),
            Predicate::Gt(c, v) => numeric_cmp(&view.fetch(fact, *c), v) == Some(Ordering::Greater),
            Predicate::Between(c, lo, hi) => {
                let x = view.fetch(fact, *c);
                matches!(
                    numeric_cmp(&x, lo),
                    Some(Ordering::Greater | Ordering::Equal)
                ) && matches!(numeric_cmp(&x, hi), Some(Ordering::Less | Ordering::Equal))
            }
            Predicate::Within(c, poly) => cache.test(&view.fetch(fact, *c), poly)?,
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

fn filtered<'a>(view: &JoinedView<'a>, filters: &[Filter]) -> Result<Vec<&'a FactRow>, QueryError> {
    let predicates = filters.iter().map(compile).collect::<Result<Vec<_>, _>>()?;
    let mut caches: Vec<WithinCache> = predicates.iter().map(|_| WithinCache::default()).collect();
    let mut out = Vec::new();
    for f in view.facts() {
        if matches(view, f, &predicates, &mut caches)? {
            out.push(f);
        }
    }
    Ok(out)
}

/// Facts whose geometry `attribute` lies within `poly`: points by
/// containment, polygons by containment of every vertex.
pub fn spatial_within_filter<'a>(
    wh: &'a Warehouse,
    rows: &[&'a FactRow],
    attribute: &str,
    poly: &Polygon,
) -> Result<Vec<&'a FactRow>, QueryError> {
    let col = resolve_column(attribute)?;
    if col.ty != ColumnType::Geometry {
        return Err(QueryError::TypeMismatch {
            attribute: attribute.to_string(),
            reason: "within needs a geometry attribute".into(),
        });
    }
    let view = JoinedView::new(wh)?;
    let mut cache = WithinCache::default();
    let mut out = Vec::new();
    for f in rows {
        if cache.test(&view.fetch(f, col), poly)? {
            out.push(*f);
        }
    }
    Ok(out)
}

/// Number of joined rows passing `filters`, before any grouping.
pub fn count_matching(wh: &Warehouse, filters: &[Filter]) -> Result<usize, QueryError> {
    let view = JoinedView::new(wh)?;
    Ok(filtered(&view, filters)?.len())
}

struct CompiledAggregate {
    function: AggregateFn,
    target: Option<Column>,
    real_valued: bool,
}

fn compile_aggregate(a: &super::spec::Aggregate) -> Result<CompiledAggregate, QueryError> {
    if a.function == AggregateFn::Count && a.target == COUNT_ALL {
        return Ok(CompiledAggregate {
            function: a.function,
            target: None,
            real_valued: false,
        });
    }
    let col = resolve_column(&a.target)?;
    if matches!(a.function, AggregateFn::Sum | AggregateFn::Avg)
        && !matches!(col.source, Source::Measure(_))
    {
        return Err(QueryError::TypeMismatch {
            attribute: a.target.clone(),
            reason: format!("{} needs a measure column", a.function),
        });
    }
    Ok(CompiledAggregate {
        function: a.function,
        target: Some(col),
        real_valued: col.ty == ColumnType::Real,
    })
}

/// Evaluates `spec` over the fact table joined to every dimension.
///
/// Grouped queries (any `group_by` or `aggregates`) produce one row per
/// group; with no `group_by` the whole filtered set is one group, and an
/// empty filtered set gives no rows. Ungrouped queries project `select`,
/// one row per fact, optionally de-duplicated. Rows are ordered by
/// `order_by` and then by every column.
pub fn execute(wh: &Warehouse, spec: &QuerySpec) -> Result<ResultTable, QueryError> {
    let view = JoinedView::new(wh)?;
    let mut table = if spec.is_grouped() {
        if !spec.select.is_empty() || spec.distinct {
            return Err(QueryError::InvalidSpec(
                "select/distinct cannot be combined with group_by or aggregates".into(),
            ));
        }
        let group_cols = spec
            .group_by
            .iter()
            .map(|c| resolve_column(c))
            .collect::<Result<Vec<_>, _>>()?;
        let aggs = spec
            .aggregates
            .iter()
            .map(compile_aggregate)
            .collect::<Result<Vec<_>, _>>()?;
        let facts = filtered(&view, &spec.filters)?;

        let mut groups: BTreeMap<Vec<Cell>, (u64, Vec<AggState>)> = BTreeMap::new();
        for f in facts {
            let key: Vec<Cell> = group_cols.iter().map(|c| view.fetch(f, *c)).collect();
            let (n, states) = groups.entry(key).or_insert_with(|| {
                (
                    0,
                    aggs.iter()
                        .map(|a| AggState::new(a.function, a.real_valued))
                        .collect(),
                )
            });
            *n += 1;
            for (state, agg) in states.iter_mut().zip(&aggs) {
                let cell = agg.target.map(|c| view.fetch(f, c));
                state.update(cell.as_ref());
            }
        }
        if spec.argmax_count {
            let best = groups.values().map(|(n, _)| *n).max().unwrap_or(0);
            groups.retain(|_, (n, _)| *n == best);
        }

        let mut rows = Vec::with_capacity(groups.len());
        let mut states = Vec::with_capacity(groups.len());
        for (key, (_, st)) in groups {
            let mut row = key;
            row.extend(st.iter().map(AggState::finish));
            rows.push(row);
            states.push(st);
        }
        let columns = spec
            .group_by
            .iter()
            .cloned()
            .chain(spec.aggregates.iter().map(|a| a.column_name()))
            .collect();
        ResultTable {
            columns,
            rows,
            order_by: spec.order_by.clone(),
            grouping: Some(Grouping {
                group_columns: spec.group_by.len(),
                aggregates: spec.aggregates.clone(),
                states,
                argmax: spec.argmax_count,
            }),
        }
    } else {
        if spec.argmax_count {
            return Err(QueryError::InvalidSpec(
                "argmax_count needs a grouped query".into(),
            ));
        }
        if spec.select.is_empty() {
            return Err(QueryError::InvalidSpec(
                "query needs select, group_by or aggregates".into(),
            ));
        }
        let cols = spec
            .select
            .iter()
            .map(|c| resolve_column(c))
            .collect::<Result<Vec<_>, _>>()?;
        let facts = filtered(&view, &spec.filters)?;
        let mut rows: Vec<Vec<Cell>> = facts
            .iter()
            .map(|f| cols.iter().map(|c| view.fetch(f, *c)).collect())
            .collect();
        if spec.distinct {
            rows.sort();
            rows.dedup();
        }
        ResultTable {
            columns: spec.select.clone(),
            rows,
            order_by: spec.order_by.clone(),
            grouping: None,
        }
    };
    if let Some(k) = spec
        .order_by
        .iter()
        .find(|k| table.column_index(&k.column).is_none())
    {
        return Err(QueryError::UnknownAttribute(k.column.clone()));
    }
    table.sort();
    Ok(table)
}

fn level_index(dim: Dimension, level: &str) -> Result<usize, QueryError> {
    dim.level(level)
        .map(|(i, _)| i)
        .ok_or_else(|| QueryError::UnknownLevel {
            dimension: dim.name().to_string(),
            level: level.to_string(),
        })
}

fn parse_dimension(dim: &str) -> Result<Dimension, QueryError> {
    dim.parse()
        .map_err(|_| QueryError::UnknownDimension(dim.to_string()))
}

/// Re-aggregates a grouped result at the coarser `to_level` of `dim`.
///
/// Group columns of `dim` below `to_level` are dropped. COUNT and SUM are
/// summed, MIN and MAX re-taken, and AVG re-derived from its running sum and
/// count; AVG is accepted only when the result also carries SUM and COUNT
/// of the same target. COUNT_DISTINCT and argmax results are not rollable.
pub fn rollup(
    table: &ResultTable,
    dim: &str,
    from_level: &str,
    to_level: &str,
) -> Result<ResultTable, QueryError> {
    let dimension = parse_dimension(dim)?;
    let from = level_index(dimension, from_level)?;
    let to = level_index(dimension, to_level)?;
    if to >= from {
        return Err(QueryError::NotAncestorLevel {
            from: from_level.to_string(),
            to: to_level.to_string(),
        });
    }
    let grouping = table
        .grouping
        .as_ref()
        .ok_or_else(|| QueryError::NonRollableAggregate("result is not grouped".into()))?;
    if grouping.argmax {
        return Err(QueryError::NonRollableAggregate(
            "argmax_count selection".into(),
        ));
    }
    let levels = dimension.levels();
    let group_names = table.group_columns();
    for level in [levels[from].column, levels[to].column] {
        if !group_names.iter().any(|c| c == level) {
            return Err(QueryError::MissingLevelColumn(level.to_string()));
        }
    }
    for a in &grouping.aggregates {
        match a.function {
            AggregateFn::CountDistinct => {
                return Err(QueryError::NonRollableAggregate(a.column_name()))
            }
            AggregateFn::Avg => {
                let carried = |f: AggregateFn| {
                    grouping.aggregates.iter().any(|b| {
                        b.function == f
                            && (b.target == a.target
                                || (f == AggregateFn::Count && b.target == COUNT_ALL))
                    })
                };
                if !(carried(AggregateFn::Sum) && carried(AggregateFn::Count)) {
                    return Err(QueryError::NonRollableAggregate(a.column_name()));
                }
            }
            _ => {}
        }
    }

    let keep: Vec<bool> = group_names
        .iter()
        .map(|c| match dimension_of_column(c) {
            Some(d) if d == dimension => dimension.level_of_column(c).is_some_and(|i| i <= to),
            _ => true,
        })
        .collect();
    let mut groups: BTreeMap<Vec<Cell>, Vec<AggState>> = BTreeMap::new();
    for (row, states) in table.rows.iter().zip(&grouping.states) {
        let key: Vec<Cell> = row[..grouping.group_columns]
            .iter()
            .zip(&keep)
            .filter(|(_, k)| **k)
            .map(|(c, _)| c.clone())
            .collect();
        match groups.get_mut(&key) {
            Some(acc) => acc.iter_mut().zip(states).for_each(|(a, s)| a.merge(s)),
            None => {
                groups.insert(key, states.clone());
            }
        }
    }
    let columns: Vec<String> = group_names
        .iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(c, _)| c.clone())
        .chain(grouping.aggregates.iter().map(|a| a.column_name()))
        .collect();
    let group_columns = keep.iter().filter(|k| **k).count();
    let mut rows = Vec::with_capacity(groups.len());
    let mut states = Vec::with_capacity(groups.len());
    for (key, st) in groups {
        let mut row = key;
        row.extend(st.iter().map(AggState::finish));
        rows.push(row);
        states.push(st);
    }
    let mut out = ResultTable {
        order_by: table
            .order_by
            .iter()
            .filter(|k| columns.contains(&k.column))
            .cloned()
            .collect(),
        columns,
        rows,
        grouping: Some(Grouping {
            group_columns,
            aggregates: grouping.aggregates.clone(),
            states,
            argmax: false,
        }),
    };
    out.sort();
    Ok(out)
}

/// Refines a grouped spec from `from_level` down to `to_level` of `dim` by
/// adding the intermediate level columns after the `from_level` column.
pub fn drill_down(
    spec: &QuerySpec,
    dim: &str,
    from_level: &str,
    to_level: &str,
) -> Result<QuerySpec, QueryError> {
    let dimension = parse_dimension(dim)?;
    let from = level_index(dimension, from_level)?;
    let to = level_index(dimension, to_level)?;
    if to <= from {
        return Err(QueryError::NotDescendantLevel {
            from: from_level.to_string(),
            to: to_level.to_string(),
        });
    }
    let levels = dimension.levels();
    let anchor = spec
        .group_by
        .iter()
        .position(|c| c == levels[from].column)
        .ok_or_else(|| QueryError::MissingLevelColumn(levels[from].column.to_string()))?;
    let mut out = spec.clone();
    let mut insert_at = anchor + 1;
    for level in &levels[from + 1..=to] {
        if !out.group_by.iter().any(|c| c == level.column) {
            out.group_by.insert(insert_at, level.column.to_string());
            insert_at += 1;
        }
    }
    Ok(out)
}
