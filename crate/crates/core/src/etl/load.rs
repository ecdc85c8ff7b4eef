use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::transform::{FactDraft, Transformed};
use crate::warehouse::{Dimension, FactKeys, NewFact, Warehouse, WarehouseError, UNKNOWN_KEY};

/// Summary of one load, written next to the warehouse as `load_report.json`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LoadReport {
    pub trajectories_in: usize,
    pub episodes_built: usize,
    pub facts_inserted: usize,
    pub facts_skipped_duplicate: usize,
    /// Members per dimension after the load, excluding UNKNOWN.
    pub dimension_cardinalities: BTreeMap<String, usize>,
    pub orphan_posts: usize,
    pub unmatched_stops: usize,
    pub warnings: Vec<String>,
}

impl LoadReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

fn resolve_keys(wh: &mut Warehouse, draft: &FactDraft) -> Result<FactKeys, WarehouseError> {
    Ok(FactKeys {
        geo_space: wh.resolve(&draft.geo)?,
        temporal: wh.resolve(&draft.temporal)?,
        events: match &draft.events {
            Some(m) => wh.resolve(m)?,
            None => UNKNOWN_KEY,
        },
        trajectory: wh.resolve(&draft.trajectory)?,
        social: match &draft.social {
            Some(m) => wh.resolve(m)?,
            None => UNKNOWN_KEY,
        },
    })
}

/// Resolves dimension members and inserts facts in trajectory-id order,
/// skipping facts whose natural key is already present.
pub fn load(wh: &mut Warehouse, batch: &Transformed) -> Result<LoadReport, WarehouseError> {
    let mut report = LoadReport {
        trajectories_in: batch.trajectories.len(),
        orphan_posts: batch.orphan_posts,
        ..LoadReport::default()
    };
    for t in &batch.trajectories {
        report.unmatched_stops += t.unmatched_stops;
        report.warnings.extend(t.warnings.iter().cloned());
        for draft in &t.facts {
            report.episodes_built += 1;
            if wh.contains_natural_key(&draft.traj_id, draft.ordinal) {
                report.facts_skipped_duplicate += 1;
                continue;
            }
            let keys = resolve_keys(wh, draft)?;
            wh.insert_fact(NewFact {
                keys,
                traj_id: draft.traj_id.clone(),
                object_id: draft.object_id.clone(),
                segment_ordinal: draft.ordinal,
                segment_kind: draft.kind,
                measures: draft.measures,
            })?;
            report.facts_inserted += 1;
        }
    }
    report.dimension_cardinalities = Dimension::ALL
        .iter()
        .map(|d| (d.name().to_string(), wh.cardinality(*d)))
        .collect();
    Ok(report)
}
