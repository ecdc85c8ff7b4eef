#![allow(dead_code)]

pub mod conformance;
pub mod exact;
pub mod gen;
pub mod geometry;
pub mod oracle;
pub mod queries;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use semtraj::etl::{run_pipeline, EtlConfig, LoadReport};
use sha2::{Digest, Sha256};

pub const FIXTURES: [&str; 3] = ["tourism", "birds", "traffic"];

/// The Recife region polygon used by the canned tourism queries.
pub const QUERY_REGION: &str = "POLYGON((-34.954449 -8.124354, -34.904449 -8.124354, -34.904449 -8.084354, -34.954449 -8.084354, -34.954449 -8.124354))";

pub fn fixture_dir(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn fixture_config(name: &str) -> EtlConfig {
    EtlConfig::from_file(&fixture_dir(name).join("config.toml")).expect("fixture config")
}

pub fn run_fixture(name: &str, out: &Path) -> LoadReport {
    run_pipeline(&fixture_config(name), out).expect("fixture pipeline")
}

/// SHA-256 of every file in `dir`, by file name.
pub fn hash_dir(dir: &Path) -> BTreeMap<String, String> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| {
            let digest = Sha256::digest(fs::read(&p).unwrap());
            let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
            (p.file_name().unwrap().to_string_lossy().into_owned(), hex)
        })
        .collect()
}

/// A raw GPS track read straight from a points file.
#[derive(Debug, Clone)]
pub struct RawTrack {
    pub times: Vec<DateTime<Utc>>,
    /// (lat, lon)
    pub coords: Vec<(f64, f64)>,
}

impl RawTrack {
    pub fn span_seconds(&self) -> i64 {
        (self.times[self.times.len() - 1] - self.times[0]).num_seconds()
    }

    /// Sum of haversine legs.
    pub fn path_length(&self) -> f64 {
        self.coords
            .windows(2)
            .map(|w| geometry::haversine_m(w[0].0, w[0].1, w[1].0, w[1].1))
            .sum()
    }
}

pub fn read_tracks(points_csv: &Path) -> BTreeMap<String, RawTrack> {
    let mut r = csv::Reader::from_path(points_csv).unwrap();
    let mut tracks: BTreeMap<String, RawTrack> = BTreeMap::new();
    for rec in r.records() {
        let rec = rec.unwrap();
        let t = DateTime::parse_from_rfc3339(&rec[2])
            .unwrap()
            .with_timezone(&Utc);
        let track = tracks
            .entry(rec[0].to_string())
            .or_insert_with(|| RawTrack {
                times: Vec::new(),
                coords: Vec::new(),
            });
        track.times.push(t);
        track
            .coords
            .push((rec[3].parse().unwrap(), rec[4].parse().unwrap()));
    }
    tracks
}

/// Fact rows of a written warehouse as header-keyed maps.
pub fn read_fact_rows(dir: &Path) -> Vec<BTreeMap<String, String>> {
    let mut r = csv::Reader::from_path(dir.join("fact_traj_tbl.csv")).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    r.records()
        .map(|rec| {
            header
                .iter()
                .cloned()
                .zip(rec.unwrap().iter().map(String::from))
                .collect()
        })
        .collect()
}
