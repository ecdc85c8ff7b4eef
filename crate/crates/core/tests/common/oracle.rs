//! Brute-force query evaluation over the warehouse CSV files, written
//! without the engine: read every table, join each fact row by scanning, and
//! evaluate the query document row by row.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use semtraj::olap::{AggregateFn, Cell, Filter, QuerySpec};
use semtraj::warehouse::schema::column_type;
use semtraj::warehouse::ColumnType;
use serde_json::Value;

use super::exact::exact_sum;
use super::geometry::{parse_ring, winding_contains};

/// One fully joined fact row: column name to stored text.
pub type FlatRow = BTreeMap<String, String>;

#[derive(Debug, Clone)]
pub struct Flat {
    pub rows: Vec<FlatRow>,
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

impl Flat {
    /// Reads every CSV in `dir`; the table whose first column is `factId`
    /// is the fact table, every other one a dimension keyed by its first
    /// column.
    pub fn load(dir: &Path) -> Flat {
        let mut fact = None;
        let mut dims = Vec::new();
        let mut paths: Vec<_> = fs::read_dir(dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        paths.sort();
        for p in paths {
            let (header, rows) = read_csv(&p);
            if header[0] == "factId" {
                fact = Some((header, rows));
            } else {
                dims.push((header, rows));
            }
        }
        let (fact_header, fact_rows) = fact.expect("fact table present");
        let rows = fact_rows
            .iter()
            .map(|f| {
                let mut row: FlatRow = fact_header.iter().cloned().zip(f.iter().cloned()).collect();
                for (header, members) in &dims {
                    let key = &row[&header[0]];
                    let member = members
                        .iter()
                        .find(|m| &m[0] == key)
                        .unwrap_or_else(|| panic!("no {} = {key}", header[0]));
                    for (name, value) in header.iter().zip(member).skip(1) {
                        row.insert(name.clone(), value.clone());
                    }
                }
                row
            })
            .collect();
        Flat { rows }
    }

    pub fn values(&self, column: &str) -> Vec<&str> {
        let mut v: Vec<&str> = self.rows.iter().map(|r| r[column].as_str()).collect();
        v.sort();
        v.dedup();
        v
    }
}

fn ty(column: &str) -> Result<ColumnType, String> {
    column_type(column).ok_or_else(|| format!("unknown attribute {column}"))
}

fn cell(raw: &str, ty: ColumnType) -> Cell {
    let text = || Cell::Text(raw.to_string());
    match ty {
        ColumnType::Integer => raw.parse::<i64>().map(Cell::Int).unwrap_or_else(|_| text()),
        ColumnType::Real => raw
            .parse::<f64>()
            .map(Cell::Real)
            .unwrap_or_else(|_| text()),
        _ => text(),
    }
}

fn number(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

fn cell_number(c: &Cell) -> Option<f64> {
    match c {
        Cell::Int(i) => Some(*i as f64),
        Cell::Real(r) => Some(*r),
        Cell::Text(_) => None,
    }
}

/// Ordering contract: numbers by value with Int before an equal Real, then
/// text by bytes.
pub fn cmp_cells(a: &Cell, b: &Cell) -> Ordering {
    let rank = |c: &Cell| matches!(c, Cell::Text(_)) as u8;
    match (a, b) {
        (Cell::Text(x), Cell::Text(y)) => x.as_bytes().cmp(y.as_bytes()),
        (Cell::Int(x), Cell::Int(y)) => x.cmp(y),
        _ if rank(a) != rank(b) => rank(a).cmp(&rank(b)),
        _ => {
            let (x, y) = (cell_number(a).unwrap(), cell_number(b).unwrap());
            x.partial_cmp(&y).unwrap().then_with(|| {
                let is_int = |c: &Cell| matches!(c, Cell::Int(_));
                is_int(b).cmp(&is_int(a))
            })
        }
    }
}

/// Strict equality: same variant and, for reals, the same bits.
pub fn identical(a: &Cell, b: &Cell) -> bool {
    match (a, b) {
        (Cell::Int(x), Cell::Int(y)) => x == y,
        (Cell::Real(x), Cell::Real(y)) => x.to_bits() == y.to_bits(),
        (Cell::Text(x), Cell::Text(y)) => x == y,
        _ => false,
    }
}

fn geometry_within(wkt: &str, region: &[(f64, f64)]) -> bool {
    if wkt == "UNKNOWN" {
        return false;
    }
    let vertices = parse_ring(wkt).unwrap_or_else(|| panic!("bad stored geometry {wkt}"));
    vertices.iter().all(|&p| winding_contains(region, p))
}

fn passes(row: &FlatRow, filter: &Filter) -> Result<bool, String> {
    let name = filter.attribute();
    let t = ty(name)?;
    let c = cell(&row[name], t);
    let numeric = matches!(t, ColumnType::Integer | ColumnType::Real);
    let equal = |v: &Value| -> Result<bool, String> {
        if numeric {
            let want = number(v).ok_or("non-numeric literal")?;
            Ok(cell_number(&c) == Some(want))
        } else {
            let want = v.as_str().ok_or("non-string literal")?;
            Ok(row[name] == want)
        }
    };
    let value = |v: &Value| number(v).ok_or_else(|| "non-numeric literal".to_string());
    let need_numeric = || {
        if numeric {
            Ok(())
        } else {
            Err("ordering on text".to_string())
        }
    };
    Ok(match filter {
        Filter::Eq { value: v, .. } => equal(v)?,
        Filter::Ne { value: v, .. } => !equal(v)?,
        Filter::Lt { value: v, .. } => {
            need_numeric()?;
            cell_number(&c).is_some_and(|x| x < value(v).unwrap())
        }
        Filter::Gt { value: v, .. } => {
            need_numeric()?;
            cell_number(&c).is_some_and(|x| x > value(v).unwrap())
        }
        Filter::Between { low, high, .. } => {
            need_numeric()?;
            let (lo, hi) = (value(low)?, value(high)?);
            cell_number(&c).is_some_and(|x| lo <= x && x <= hi)
        }
        Filter::Within { polygon, .. } => {
            if t != ColumnType::Geometry {
                return Err("within on non-geometry".into());
            }
            let region = parse_ring(polygon).ok_or("bad polygon")?;
            geometry_within(&row[name], &region)
        }
    })
}

pub fn filter_rows<'a>(flat: &'a Flat, filters: &[Filter]) -> Result<Vec<&'a FlatRow>, String> {
    let mut out = Vec::new();
    for row in &flat.rows {
        let mut keep = true;
        for f in filters {
            keep &= passes(row, f)?;
        }
        if keep {
            out.push(row);
        }
    }
    Ok(out)
}

const MEASURE_COLUMNS: [&str; 9] = [
    "OverallTemporalDuration",
    "TravelDistance",
    "AverageTrajectorySpeed",
    "NumberOfPoints",
    "NumberOfSemanticStops",
    "NumberOfMobilityModes",
    "SquareArea",
    "EventTimeDuration",
    "ActivityDuration",
];

fn aggregate(function: AggregateFn, target: &str, rows: &[&FlatRow]) -> Result<Cell, String> {
    if function == AggregateFn::Count {
        return Ok(Cell::Int(rows.len() as i64));
    }
    let t = ty(target)?;
    let cells: Vec<Cell> = rows.iter().map(|r| cell(&r[target], t)).collect();
    let sum = || -> Result<Cell, String> {
        if !MEASURE_COLUMNS.contains(&target) {
            return Err("sum of a non-measure".into());
        }
        Ok(match t {
            ColumnType::Integer => Cell::Int(
                cells
                    .iter()
                    .map(|c| match c {
                        Cell::Int(v) => *v,
                        _ => unreachable!(),
                    })
                    .sum(),
            ),
            _ => Cell::Real(exact_sum(cells.iter().map(|c| cell_number(c).unwrap()))),
        })
    };
    Ok(match function {
        AggregateFn::Sum => sum()?,
        AggregateFn::Avg => {
            let total = cell_number(&sum()?).unwrap();
            Cell::Real(total / rows.len() as f64)
        }
        AggregateFn::Min => cells
            .iter()
            .min_by(|a, b| cmp_cells(a, b))
            .cloned()
            .unwrap(),
        AggregateFn::Max => cells
            .iter()
            .max_by(|a, b| cmp_cells(a, b))
            .cloned()
            .unwrap(),
        AggregateFn::CountDistinct => {
            let mut seen: Vec<&Cell> = Vec::new();
            for c in &cells {
                if !seen.iter().any(|s| identical(s, c)) {
                    seen.push(c);
                }
            }
            Cell::Int(seen.len() as i64)
        }
        AggregateFn::Count => unreachable!(),
    })
}

/// Result of a query: column names and ordered rows.
#[derive(Debug, Clone)]
pub struct OracleTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

pub fn evaluate(flat: &Flat, spec: &QuerySpec) -> Result<OracleTable, String> {
    let rows = filter_rows(flat, &spec.filters)?;
    let grouped = !spec.group_by.is_empty() || !spec.aggregates.is_empty();
    let (columns, mut out) = if grouped {
        let types = spec
            .group_by
            .iter()
            .map(|c| ty(c))
            .collect::<Result<Vec<_>, _>>()?;
        let mut groups: Vec<(Vec<Cell>, Vec<&FlatRow>)> = Vec::new();
        for r in rows {
            let key: Vec<Cell> = spec
                .group_by
                .iter()
                .zip(&types)
                .map(|(c, t)| cell(&r[c], *t))
                .collect();
            let same = |k: &Vec<Cell>| k.iter().zip(&key).all(|(a, b)| identical(a, b));
            match groups.iter_mut().find(|(k, _)| same(k)) {
                Some((_, members)) => members.push(r),
                None => groups.push((key, vec![r])),
            }
        }
        if spec.argmax_count {
            let best = groups.iter().map(|(_, m)| m.len()).max().unwrap_or(0);
            groups.retain(|(_, m)| m.len() == best);
        }
        let mut out = Vec::new();
        for (key, members) in groups {
            let mut row = key;
            for a in &spec.aggregates {
                row.push(aggregate(a.function, &a.target, &members)?);
            }
            out.push(row);
        }
        let columns = spec
            .group_by
            .iter()
            .cloned()
            .chain(spec.aggregates.iter().map(|a| {
                a.alias
                    .clone()
                    .unwrap_or_else(|| format!("{}({})", a.function.as_str(), a.target))
            }))
            .collect();
        (columns, out)
    } else {
        let types = spec
            .select
            .iter()
            .map(|c| ty(c))
            .collect::<Result<Vec<_>, _>>()?;
        let mut out: Vec<Vec<Cell>> = rows
            .iter()
            .map(|r| {
                spec.select
                    .iter()
                    .zip(&types)
                    .map(|(c, t)| cell(&r[c], *t))
                    .collect()
            })
            .collect();
        if spec.distinct {
            let mut unique: Vec<Vec<Cell>> = Vec::new();
            for row in out {
                if !unique
                    .iter()
                    .any(|u| u.iter().zip(&row).all(|(a, b)| identical(a, b)))
                {
                    unique.push(row);
                }
            }
            out = unique;
        }
        (spec.select.clone(), out)
    };
    let keys: Vec<(usize, bool)> = spec
        .order_by
        .iter()
        .map(|k| {
            columns
                .iter()
                .position(|c| *c == k.column)
                .map(|i| (i, k.descending))
                .ok_or_else(|| format!("order by unknown column {}", k.column))
        })
        .collect::<Result<_, _>>()?;
    out.sort_by(|a, b| {
        for &(i, desc) in &keys {
            let o = cmp_cells(&a[i], &b[i]);
            let o = if desc { o.reverse() } else { o };
            if o != Ordering::Equal {
                return o;
            }
        }
        for (x, y) in a.iter().zip(b) {
            let o = cmp_cells(x, y);
            if o != Ordering::Equal {
                return o;
            }
        }
        Ordering::Equal
    });
    Ok(OracleTable { columns, rows: out })
}

/// First difference between an engine result and the oracle, if any.
pub fn diff(columns: &[String], rows: &[Vec<Cell>], expected: &OracleTable) -> Option<String> {
    if columns != expected.columns.as_slice() {
        return Some(format!("columns {columns:?} vs {:?}", expected.columns));
    }
    if rows.len() != expected.rows.len() {
        return Some(format!("{} rows vs {}", rows.len(), expected.rows.len()));
    }
    for (i, (a, b)) in rows.iter().zip(&expected.rows).enumerate() {
        if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| !identical(x, y)) {
            return Some(format!("row {i}: {a:?} vs {b:?}"));
        }
    }
    None
}
