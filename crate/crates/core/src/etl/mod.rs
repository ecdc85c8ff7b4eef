//! Extract, transform and load: raw files in, star-schema tables out.

pub mod config;
pub mod extract;
pub mod load;
pub mod transform;

use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{DomainProfile, EtlConfig};
pub use extract::{extract, StagedData};
pub use load::{load, LoadReport};
pub use transform::{transform, FactDraft, Transformed, TransformedTrajectory};

use crate::enrichment::EnrichmentError;
use crate::warehouse::{open_dir, StagedWrite, WarehouseError};

pub const LOAD_REPORT_FILE: &str = "load_report.json";

/// Position of a bad record: a 1-based line for line-oriented files, a
/// 1-based element index for JSON arrays.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Line(usize),
    Record(usize),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Line(n) => write!(f, "{n}"),
            Location::Record(n) => write!(f, "record {n}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum EtlError {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}:{location}: {reason}", .file.display())]
    Parse {
        file: PathBuf,
        location: Location,
        reason: String,
    },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Enrichment(#[from] EnrichmentError),
    #[error(transparent)]
    Warehouse(#[from] WarehouseError),
}

impl EtlError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        if source.kind() == io::ErrorKind::NotFound {
            EtlError::FileNotFound(path.to_path_buf())
        } else {
            EtlError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    }
}

/// Runs extract, transform and load into the warehouse at `out_dir`, which
/// may be empty or hold an earlier load. Tables and the load report are
/// written to a staging directory and renamed into place only on success.
pub fn run_pipeline(config: &EtlConfig, out_dir: &Path) -> Result<LoadReport, EtlError> {
    let mut wh = open_dir(out_dir)?;
    let staged = extract(config)?;
    let transformed = transform(&staged, config)?;
    let report = load(&mut wh, &transformed)?;
    let stage = StagedWrite::new(out_dir)?;
    stage.write(&wh)?;
    stage.write_file(LOAD_REPORT_FILE, report.to_json().as_bytes())?;
    stage.commit()?;
    Ok(report)
}
