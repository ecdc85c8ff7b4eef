//! Typed result cells and result tables.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use super::spec::{Aggregate, AggregateFn, OrderKey};
use crate::numeric::ExactSum;

/// A typed value. Ordering is total: numbers (compared by value) sort
/// before text; an integer sorts before an equal real.
#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Int(v) => Some(v as f64),
            Cell::Real(v) => Some(v),
            Cell::Text(_) => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Cell::Int(_) | Cell::Real(_) => 0,
            Cell::Text(_) => 1,
        }
    }
}

impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Cell::Int(a), Cell::Int(b)) => a.cmp(b),
            (Cell::Real(a), Cell::Real(b)) => a.total_cmp(b),
            (Cell::Int(a), Cell::Real(b)) => (*a as f64).total_cmp(b).then(Ordering::Less),
            (Cell::Real(a), Cell::Int(b)) => a.total_cmp(&(*b as f64)).then(Ordering::Greater),
            (Cell::Text(a), Cell::Text(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Cell {}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Real(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Sum {
    Int(i128),
    Real(ExactSum),
}

impl Sum {
    pub(crate) fn add(&mut self, cell: &Cell) {
        match (self, cell) {
            (Sum::Int(acc), Cell::Int(v)) => *acc += i128::from(*v),
            (Sum::Real(acc), Cell::Real(v)) => acc.add(*v),
            (Sum::Real(acc), Cell::Int(v)) => acc.add(*v as f64),
            (s, c) => unreachable!("sum over mismatched cell {c:?} into {s:?}"),
        }
    }

    fn merge(&mut self, other: &Sum) {
        match (self, other) {
            (Sum::Int(a), Sum::Int(b)) => *a += b,
            (Sum::Real(a), Sum::Real(b)) => a.merge(b),
            (a, b) => unreachable!("merging {a:?} with {b:?}"),
        }
    }

    fn value(&self) -> Cell {
        match self {
            Sum::Int(v) => Cell::Int(i64::try_from(*v).expect("integer sum fits in i64")),
            Sum::Real(s) => Cell::Real(s.value()),
        }
    }

    fn mean(&self, count: u64) -> f64 {
        match self {
            Sum::Int(v) => *v as f64 / count as f64,
            Sum::Real(s) => s.value() / count as f64,
        }
    }
}

/// Running state of one aggregate over one group.
#[derive(Debug, Clone)]
pub(crate) enum AggState {
    Count(u64),
    Sum(Sum),
    Avg { sum: Sum, count: u64 },
    Min(Option<Cell>),
    Max(Option<Cell>),
    Distinct(BTreeSet<Cell>),
}

impl AggState {
    pub(crate) fn new(function: AggregateFn, real_valued: bool) -> Self {
        let sum = || {
            if real_valued {
                Sum::Real(ExactSum::new())
            } else {
                Sum::Int(0)
            }
        };
        match function {
            AggregateFn::Count => AggState::Count(0),
            AggregateFn::Sum => AggState::Sum(sum()),
            AggregateFn::Avg => AggState::Avg {
                sum: sum(),
                count: 0,
            },
            AggregateFn::Min => AggState::Min(None),
            AggregateFn::Max => AggState::Max(None),
            AggregateFn::CountDistinct => AggState::Distinct(BTreeSet::new()),
        }
    }

    pub(crate) fn update(&mut self, cell: Option<&Cell>) {
        match self {
            AggState::Count(n) => *n += 1,
            AggState::Sum(s) => s.add(cell.expect("sum target")),
            AggState::Avg { sum, count } => {
                sum.add(cell.expect("avg target"));
                *count += 1;
            }
            AggState::Min(m) => {
                let c = cell.expect("min target");
                if m.as_ref().is_none_or(|cur| c < cur) {
                    *m = Some(c.clone());
                }
            }
            AggState::Max(m) => {
                let c = cell.expect("max target");
                if m.as_ref().is_none_or(|cur| c > cur) {
                    *m = Some(c.clone());
                }
            }
            AggState::Distinct(set) => {
                set.insert(cell.expect("distinct target").clone());
            }
        }
    }

    pub(crate) fn merge(&mut self, other: &AggState) {
        match (self, other) {
            (AggState::Count(a), AggState::Count(b)) => *a += b,
            (AggState::Sum(a), AggState::Sum(b)) => a.merge(b),
            (AggState::Avg { sum, count }, AggState::Avg { sum: s2, count: c2 }) => {
                sum.merge(s2);
                *count += c2;
            }
            (AggState::Min(a), AggState::Min(Some(b))) => {
                if a.as_ref().is_none_or(|cur| b < cur) {
                    *a = Some(b.clone());
                }
            }
            (AggState::Max(a), AggState::Max(Some(b))) => {
                if a.as_ref().is_none_or(|cur| b > cur) {
                    *a = Some(b.clone());
                }
            }
            (AggState::Min(_), AggState::Min(None)) | (AggState::Max(_), AggState::Max(None)) => {}
            (AggState::Distinct(a), AggState::Distinct(b)) => a.extend(b.iter().cloned()),
            (a, b) => unreachable!("merging {a:?} with {b:?}"),
        }
    }

    pub(crate) fn finish(&self) -> Cell {
        match self {
            AggState::Count(n) => Cell::Int(*n as i64),
            AggState::Sum(s) => s.value(),
            AggState::Avg { sum, count } => Cell::Real(sum.mean(*count)),
            AggState::Min(m) | AggState::Max(m) => m.clone().expect("groups are never empty"),
            AggState::Distinct(set) => Cell::Int(set.len() as i64),
        }
    }
}

/// Aggregation bookkeeping kept alongside grouped results so they can be
/// rolled up without revisiting the facts.
#[derive(Debug, Clone)]
pub(crate) struct Grouping {
    pub(crate) group_columns: usize,
    pub(crate) aggregates: Vec<Aggregate>,
    pub(crate) states: Vec<Vec<AggState>>,
    pub(crate) argmax: bool,
}

#[derive(Debug, Clone)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub(crate) order_by: Vec<OrderKey>,
    pub(crate) grouping: Option<Grouping>,
}

impl PartialEq for ResultTable {
    fn eq(&self, other: &Self) -> bool {
        self.columns == other.columns && self.rows == other.rows
    }
}

impl ResultTable {
    pub fn total_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Group-by columns of a grouped result, empty otherwise.
    pub fn group_columns(&self) -> &[String] {
        let n = self.grouping.as_ref().map_or(0, |g| g.group_columns);
        &self.columns[..n]
    }

    /// Sorts rows by the order keys, then by every column left to right.
    pub(crate) fn sort(&mut self) {
        let keys: Vec<(usize, bool)> = self
            .order_by
            .iter()
            .filter_map(|k| self.column_index(&k.column).map(|i| (i, k.descending)))
            .collect();
        let cmp = |a: &Vec<Cell>, b: &Vec<Cell>| {
            keys.iter()
                .map(|&(i, desc)| {
                    let o = a[i].cmp(&b[i]);
                    if desc {
                        o.reverse()
                    } else {
                        o
                    }
                })
                .chain(a.iter().zip(b).map(|(x, y)| x.cmp(y)))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        };
        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        order.sort_by(|&i, &j| cmp(&self.rows[i], &self.rows[j]));
        self.rows = order.iter().map(|&i| self.rows[i].clone()).collect();
        if let Some(g) = &mut self.grouping {
            g.states = order.iter().map(|&i| g.states[i].clone()).collect();
        }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_string))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
    }

    /// Aligned plain-text rendering.
    pub fn to_text(&self) -> String {
        let rendered: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::to_string).collect())
            .collect();
        let widths: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(i, c)| {
                rendered
                    .iter()
                    .map(|r| r[i].chars().count())
                    .chain(std::iter::once(c.chars().count()))
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join(" | ")
                .trim_end()
                .to_string()
        };
        let mut out = line(&self.columns);
        out.push('\n');
        out.push_str(
            &widths
                .iter()
                .map(|w| "-".repeat(*w))
                .collect::<Vec<_>>()
                .join("-+-"),
        );
        out.push('\n');
        for r in &rendered {
            out.push_str(&line(r));
            out.push('\n');
        }
        out.push_str(&format!("({} rows)\n", self.rows.len()));
        out
    }
}
