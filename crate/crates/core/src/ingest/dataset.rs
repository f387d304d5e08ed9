use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::domain::{FaceRecord, Role};
use crate::error::{Error, Result};

use super::EmbeddingVector;

/// Records joined with their feature vectors.
///
/// Immutable once built. Features are held in 64-bit precision and, when the
/// dataset was built with `normalize`, scaled to unit Euclidean norm.
#[derive(Debug, Clone)]
pub struct Dataset {
    records: Vec<FaceRecord>,
    features: Vec<Vec<f64>>,
    index: HashMap<String, usize>,
    persons: BTreeMap<String, Person>,
    dim: usize,
    normalized: bool,
}

/// Indices of a person's two images within a [`Dataset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Person {
    pub before: usize,
    pub after: usize,
}

impl Person {
    pub fn records(&self) -> [usize; 2] {
        [self.before, self.after]
    }
}

/// Everything `build_dataset` left out, and why.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BuildReport {
    pub orphan_records: Vec<String>,
    pub orphan_embeddings: Vec<String>,
    /// Persons left with only one of their two images after the join.
    pub incomplete_persons: Vec<String>,
}

impl BuildReport {
    pub fn is_clean(&self) -> bool {
        self.orphan_records.is_empty()
            && self.orphan_embeddings.is_empty()
            && self.incomplete_persons.is_empty()
    }
}

/// Inner join of records and embeddings on record_id.
///
/// Records without an embedding, embeddings without a record, and persons
/// missing their before or after image are excluded and listed in the
/// report.
pub fn build_dataset(
    records: Vec<FaceRecord>,
    embeddings: &BTreeMap<String, EmbeddingVector>,
    normalize: bool,
) -> Result<(Dataset, BuildReport)> {
    let mut report = BuildReport::default();

    let mut dim = None;
    for v in embeddings.values() {
        match dim {
            None => dim = Some(v.dim()),
            Some(d) if d != v.dim() => {
                return Err(Error::validation(format!(
                    "embedding {} has dim {} but expected {d}",
                    v.record_id,
                    v.dim()
                )))
            }
            _ => {}
        }
    }
    let dim = dim.unwrap_or(0);

    let record_ids: std::collections::HashSet<&str> =
        records.iter().map(|r| r.record_id.as_str()).collect();
    report.orphan_embeddings = embeddings
        .keys()
        .filter(|k| !record_ids.contains(k.as_str()))
        .cloned()
        .collect();

    let mut joined = Vec::with_capacity(records.len());
    for rec in records {
        if embeddings.contains_key(&rec.record_id) {
            joined.push(rec);
        } else {
            report.orphan_records.push(rec.record_id);
        }
    }

    let mut roles: BTreeMap<&str, (bool, bool)> = BTreeMap::new();
    for rec in &joined {
        let slot = roles.entry(rec.person_id.as_str()).or_default();
        match rec.role {
            Role::Before => slot.0 = true,
            Role::After => slot.1 = true,
        }
    }
    let incomplete: std::collections::HashSet<String> = roles
        .iter()
        .filter(|(_, (b, a))| !(*b && *a))
        .map(|(p, _)| p.to_string())
        .collect();
    report.incomplete_persons = incomplete.iter().cloned().collect();
    report.incomplete_persons.sort();

    let mut kept = Vec::with_capacity(joined.len());
    let mut features = Vec::with_capacity(joined.len());
    for rec in joined {
        if incomplete.contains(&rec.person_id) {
            continue;
        }
        let raw = &embeddings[&rec.record_id].values;
        let mut x: Vec<f64> = raw.iter().map(|&v| v as f64).collect();
        if normalize {
            unit_normalize(&mut x).map_err(|_| {
                Error::validation(format!("{}: zero-norm embedding", rec.record_id))
            })?;
        }
        features.push(x);
        kept.push(rec);
    }

    if kept.is_empty() {
        return Err(Error::validation(
            "no complete records after joining metadata and embeddings",
        ));
    }

    let index = kept
        .iter()
        .enumerate()
        .map(|(i, r)| (r.record_id.clone(), i))
        .collect();
    let mut persons: BTreeMap<String, (Option<usize>, Option<usize>)> = BTreeMap::new();
    for (i, r) in kept.iter().enumerate() {
        let slot = persons.entry(r.person_id.clone()).or_default();
        match r.role {
            Role::Before => slot.0 = Some(i),
            Role::After => slot.1 = Some(i),
        }
    }
    let persons = persons
        .into_iter()
        .map(|(p, (b, a))| {
            (
                p,
                Person {
                    before: b.unwrap(),
                    after: a.unwrap(),
                },
            )
        })
        .collect();

    Ok((
        Dataset {
            records: kept,
            features,
            index,
            persons,
            dim,
            normalized: normalize,
        },
        report,
    ))
}

/// Scales `x` to unit Euclidean norm in place. Fails on a zero vector.
pub(crate) fn unit_normalize(x: &mut [f64]) -> std::result::Result<(), ()> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(());
    }
    x.iter_mut().for_each(|v| *v /= norm);
    Ok(())
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn normalized(&self) -> bool {
        self.normalized
    }

    pub fn records(&self) -> &[FaceRecord] {
        &self.records
    }

    pub fn record(&self, idx: usize) -> &FaceRecord {
        &self.records[idx]
    }

    pub fn feature(&self, idx: usize) -> &[f64] {
        &self.features[idx]
    }

    pub fn index_of(&self, record_id: &str) -> Option<usize> {
        self.index.get(record_id).copied()
    }

    /// Looks up a record id, failing with a validation error when absent.
    pub fn require(&self, record_id: &str) -> Result<usize> {
        self.index_of(record_id)
            .ok_or_else(|| Error::validation(format!("unknown record_id {record_id:?}")))
    }

    /// Complete persons keyed by person_id, in sorted order.
    pub fn persons(&self) -> &BTreeMap<String, Person> {
        &self.persons
    }

    pub fn record_ids(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|r| r.record_id.as_str())
    }
}
