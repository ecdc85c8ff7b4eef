//! CSV persistence: one file per table, written through a staging directory.

use std::fs;
use std::path::{Path, PathBuf};

use tempfile::TempDir;

use super::schema::{Dimension, FACT_ATTRIBUTES, FACT_ID_COLUMN, FACT_TABLE, MEASURES};
use super::{DimensionTable, FactKeys, FactRow, Measures, Warehouse, WarehouseError};
use crate::trajectory::EpisodeKind;

pub fn fact_file_name() -> String {
    format!("{FACT_TABLE}.csv")
}

/// All six table file names, fact table first.
pub fn table_file_names() -> Vec<String> {
    std::iter::once(fact_file_name())
        .chain(Dimension::ALL.iter().map(|d| d.file_name()))
        .collect()
}

pub fn fact_header() -> Vec<&'static str> {
    std::iter::once(FACT_ID_COLUMN)
        .chain(Dimension::ALL.iter().map(|d| d.key_column()))
        .chain(FACT_ATTRIBUTES.iter().map(|c| c.name))
        .chain(MEASURES.iter().map(|m| m.column))
        .collect()
}

fn dimension_header(dim: Dimension) -> Vec<&'static str> {
    std::iter::once(dim.key_column())
        .chain(dim.columns().iter().map(|c| c.name))
        .collect()
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>, WarehouseError> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

/// Writes the six table files into `dir`, replacing existing ones in place.
pub fn write_dir(wh: &Warehouse, dir: &Path) -> Result<(), WarehouseError> {
    fs::create_dir_all(dir)?;
    for dim in Dimension::ALL {
        let mut w = writer(&dir.join(dim.file_name()))?;
        w.write_record(dimension_header(dim))?;
        for (key, row) in wh.dimension(dim).rows() {
            w.write_record(std::iter::once(key.to_string()).chain(row.iter().cloned()))?;
        }
        w.flush()?;
    }
    let mut w = writer(&dir.join(fact_file_name()))?;
    w.write_record(fact_header())?;
    for f in wh.facts() {
        let mut rec = vec![f.fact_id.to_string()];
        rec.extend(Dimension::ALL.iter().map(|d| f.keys.get(*d).to_string()));
        rec.push(f.traj_id.clone());
        rec.push(f.object_id.clone());
        rec.push(f.segment_ordinal.to_string());
        rec.push(f.segment_kind.as_str().to_string());
        rec.extend(f.measures.values().iter().map(|v| match v {
            super::MeasureValue::Integer(i) => i.to_string(),
            super::MeasureValue::Real(x) => x.to_string(),
        }));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn corrupt(file: &Path, reason: impl Into<String>) -> WarehouseError {
    WarehouseError::Corrupt {
        file: file.display().to_string(),
        reason: reason.into(),
    }
}

fn read_table(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>, WarehouseError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)?;
    let found: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if found != header {
        return Err(corrupt(path, format!("unexpected header {found:?}")));
    }
    r.records()
        .map(|rec| rec.map_err(WarehouseError::from))
        .collect()
}

fn parse_field<T: std::str::FromStr>(
    path: &Path,
    line: usize,
    column: &str,
    raw: &str,
) -> Result<T, WarehouseError> {
    raw.parse()
        .map_err(|_| corrupt(path, format!("record {line}: bad {column} '{raw}'")))
}

/// Loads a warehouse from `dir`. Either all six files exist (loaded) or none
/// do (empty warehouse); any other combination is an error.
pub fn open_dir(dir: &Path) -> Result<Warehouse, WarehouseError> {
    let names = table_file_names();
    let present: Vec<bool> = names.iter().map(|n| dir.join(n).is_file()).collect();
    if present.iter().all(|p| !p) {
        return Ok(Warehouse::new());
    }
    if let Some(missing) = names.iter().zip(&present).find(|(_, p)| !**p) {
        return Err(corrupt(
            &dir.join(missing.0),
            "missing from a partial warehouse",
        ));
    }

    let mut tables = Vec::with_capacity(5);
    for dim in Dimension::ALL {
        let path = dir.join(dim.file_name());
        let records = read_table(&path, &dimension_header(dim))?;
        let mut rows = Vec::with_capacity(records.len());
        for (i, rec) in records.iter().enumerate() {
            let key: u64 = parse_field(&path, i + 1, dim.key_column(), &rec[0])?;
            if key != i as u64 {
                return Err(corrupt(&path, format!("record {} has key {key}", i + 1)));
            }
            rows.push(rec.iter().skip(1).map(str::to_string).collect());
        }
        tables.push(DimensionTable::from_rows(dim, rows)?);
    }
    let tables: [DimensionTable; 5] = tables.try_into().expect("five dimensions");

    let path = dir.join(fact_file_name());
    let records = read_table(&path, &fact_header())?;
    let mut facts = Vec::with_capacity(records.len());
    for (i, rec) in records.iter().enumerate() {
        let line = i + 1;
        let field = |pos: usize| &rec[pos];
        let mut keys = FactKeys::default();
        for (j, dim) in Dimension::ALL.iter().enumerate() {
            keys.set(
                *dim,
                parse_field(&path, line, dim.key_column(), field(1 + j))?,
            );
        }
        let kind_raw = field(9);
        let segment_kind = EpisodeKind::parse(kind_raw).ok_or_else(|| {
            corrupt(
                &path,
                format!("record {line}: bad SegmentKind '{kind_raw}'"),
            )
        })?;
        let m = |pos: usize| MEASURES[pos - 10].column;
        let measures = Measures {
            duration_s: parse_field(&path, line, m(10), field(10))?,
            travel_distance_m: parse_field(&path, line, m(11), field(11))?,
            average_speed_mps: parse_field(&path, line, m(12), field(12))?,
            num_points: parse_field(&path, line, m(13), field(13))?,
            num_semantic_stops: parse_field(&path, line, m(14), field(14))?,
            num_mobility_modes: parse_field(&path, line, m(15), field(15))?,
            square_area_m2: parse_field(&path, line, m(16), field(16))?,
            event_time_duration_s: parse_field(&path, line, m(17), field(17))?,
            activity_duration_s: parse_field(&path, line, m(18), field(18))?,
        };
        facts.push(FactRow {
            fact_id: parse_field(&path, line, FACT_ID_COLUMN, field(0))?,
            keys,
            traj_id: field(6).to_string(),
            object_id: field(7).to_string(),
            segment_ordinal: parse_field(&path, line, "SegmentOrdinal", field(8))?,
            segment_kind,
            measures,
        });
    }
    Warehouse::from_parts(tables, facts)
}

/// A set of table files written next to their destination and moved into
/// place by [`StagedWrite::commit`]. Dropping an uncommitted stage discards it.
#[derive(Debug)]
pub struct StagedWrite {
    staging: TempDir,
    target: PathBuf,
}

impl StagedWrite {
    pub fn new(target: &Path) -> Result<Self, WarehouseError> {
        fs::create_dir_all(target)?;
        let staging = tempfile::Builder::new()
            .prefix(".staging-")
            .tempdir_in(target)?;
        Ok(StagedWrite {
            staging,
            target: target.to_path_buf(),
        })
    }

    pub fn path(&self) -> &Path {
        self.staging.path()
    }

    pub fn write(&self, wh: &Warehouse) -> Result<(), WarehouseError> {
        write_dir(wh, self.staging.path())
    }

    /// Writes an extra file (such as a report) into the stage.
    pub fn write_file(&self, name: &str, contents: &[u8]) -> Result<(), WarehouseError> {
        fs::write(self.staging.path().join(name), contents)?;
        Ok(())
    }

    /// Renames every staged file into the target directory.
    pub fn commit(self) -> Result<(), WarehouseError> {
        let mut entries: Vec<PathBuf> = fs::read_dir(self.staging.path())?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()?;
        entries.sort();
        for src in entries {
            let name = src.file_name().expect("staged entry has a name");
            fs::rename(&src, self.target.join(name))?;
        }
        Ok(())
    }
}
