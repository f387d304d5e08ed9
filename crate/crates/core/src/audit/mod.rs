//! Matched-pair demographic bias audit.
//!
//! Records from two groups are paired when their true BMIs differ by less
//! than 1.0, with equally many pairs where each group is truly higher. An
//! unbiased predictor should then rank either group higher about half the
//! time; the tally is tested against 50-50 with an exact binomial test.

mod binomial;

pub use binomial::{binomial_test, BinomialTest};

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::domain::{FaceRecord, Gender};
use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::predictor::{predict_many, Predictor};
use crate::rng::SplitMix64;

/// Pairs must differ in true BMI by strictly less than this.
pub const MAX_BMI_GAP: f64 = 1.0;

pub const TIE_RULE: &str =
    "prediction ties alternate in pair order: even-numbered ties credit the member with the smaller record_id, odd-numbered ties the other";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupAttr {
    Gender,
    Race,
}

impl std::str::FromStr for GroupAttr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gender" => Ok(GroupAttr::Gender),
            "race" => Ok(GroupAttr::Race),
            other => Err(Error::validation(format!(
                "unknown group attribute {other:?}"
            ))),
        }
    }
}

impl GroupAttr {
    /// Canonical label for a user-supplied group name.
    pub fn canonical(self, label: &str) -> Result<String> {
        match self {
            GroupAttr::Gender => label
                .parse::<Gender>()
                .map(|g| g.code().to_string())
                .map_err(Error::Validation),
            GroupAttr::Race => {
                if label.is_empty() {
                    Err(Error::validation("empty race label"))
                } else {
                    Ok(label.to_string())
                }
            }
        }
    }

    pub fn label_of(self, rec: &FaceRecord) -> Option<&str> {
        match self {
            GroupAttr::Gender => Some(rec.gender.code()),
            GroupAttr::Race => rec.race.as_deref(),
        }
    }
}

/// Which records the audit pool was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolKind {
    Test,
    TestAndTrain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditPair {
    pub id_a: String,
    pub id_b: String,
    pub group_a: String,
    pub group_b: String,
    pub true_higher: Side,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditSpec {
    pub attr: GroupAttr,
    pub group_x: String,
    pub group_y: String,
    pub n_pairs: usize,
    pub seed: u64,
    pub pool: PoolKind,
}

/// Audit pairs plus the context needed to report on them.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditSet {
    pub groups: (String, String),
    pub pool: PoolKind,
    pub seed: u64,
    pub pairs: Vec<AuditPair>,
}

/// Builds `n_pairs` matched cross-group pairs from the pool, half with the
/// first group truly higher and half with the second.
///
/// Candidates are put in a label-independent order (by the sorted id pair),
/// shuffled once with the seed, and taken first-come per side. Swapping the
/// two group labels therefore selects the same pairs, transposed.
pub fn build_audit_pairs(ds: &Dataset, pool_ids: &[String], spec: &AuditSpec) -> Result<AuditSet> {
    let gx = spec.attr.canonical(&spec.group_x)?;
    let gy = spec.attr.canonical(&spec.group_y)?;
    if gx == gy {
        return Err(Error::validation("the two groups must differ"));
    }
    if spec.n_pairs == 0 || !spec.n_pairs.is_multiple_of(2) {
        return Err(Error::validation(format!(
            "n_pairs must be positive and even, got {}",
            spec.n_pairs
        )));
    }

    let pool: BTreeSet<usize> = pool_ids
        .iter()
        .map(|id| ds.require(id))
        .collect::<Result<_>>()?;
    let members = |g: &str| -> Vec<usize> {
        let mut v: Vec<usize> = pool
            .iter()
            .copied()
            .filter(|&i| spec.attr.label_of(ds.record(i)) == Some(g))
            .collect();
        v.sort_by(|&a, &b| ds.record(a).bmi.total_cmp(&ds.record(b).bmi));
        v
    };
    let xs = members(&gx);
    let ys = members(&gy);

    // (canonical key, x index, y index, x is higher)
    let mut candidates: Vec<((String, String), usize, usize, bool)> = Vec::new();
    for &x in &xs {
        let rx = ds.record(x);
        let start = ys.partition_point(|&y| ds.record(y).bmi <= rx.bmi - MAX_BMI_GAP);
        for &y in &ys[start..] {
            let ry = ds.record(y);
            let gap = ry.bmi - rx.bmi;
            if gap >= MAX_BMI_GAP {
                break;
            }
            if gap == 0.0 || rx.person_id == ry.person_id {
                continue;
            }
            let key = if rx.record_id < ry.record_id {
                (rx.record_id.clone(), ry.record_id.clone())
            } else {
                (ry.record_id.clone(), rx.record_id.clone())
            };
            candidates.push((key, x, y, rx.bmi > ry.bmi));
        }
    }
    candidates.sort_by(|a, b| a.0.cmp(&b.0));

    let x_higher = candidates.iter().filter(|c| c.3).count();
    let y_higher = candidates.len() - x_higher;
    let half = spec.n_pairs / 2;
    if x_higher < half || y_higher < half {
        return Err(Error::Capacity(format!(
            "only {x_higher} {gx}-higher and {y_higher} {gy}-higher eligible pairs; at most {} balanced pairs are possible",
            2 * x_higher.min(y_higher)
        )));
    }

    let mut rng = SplitMix64::new(spec.seed);
    rng.shuffle(&mut candidates);
    let (mut taken_x, mut taken_y) = (0, 0);
    let mut pairs = Vec::with_capacity(spec.n_pairs);
    for (_, x, y, x_is_higher) in candidates {
        let slot = if x_is_higher {
            &mut taken_x
        } else {
            &mut taken_y
        };
        if *slot == half {
            continue;
        }
        *slot += 1;
        pairs.push(AuditPair {
            id_a: ds.record(x).record_id.clone(),
            id_b: ds.record(y).record_id.clone(),
            group_a: gx.clone(),
            group_b: gy.clone(),
            true_higher: if x_is_higher { Side::A } else { Side::B },
        });
        if pairs.len() == spec.n_pairs {
            break;
        }
    }
    Ok(AuditSet {
        groups: (gx, gy),
        pool: spec.pool,
        seed: spec.seed,
        pairs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub groups: (String, String),
    pub n: usize,
    /// Pairs in which each group's member got the higher prediction.
    pub counts: BTreeMap<String, usize>,
    /// The group predicted higher more often (the first group on a tie).
    pub leading_group: String,
    /// One-sided exact p-value for the leading group's count.
    pub p_one_sided: f64,
    pub p_two_sided: f64,
    pub ties: usize,
    pub tie_rule: &'static str,
    pub pool: PoolKind,
    pub seed: u64,
}

impl AuditReport {
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn summary(&self) -> String {
        let (x, y) = &self.groups;
        format!(
            "{} pairs: higher prediction for {x} in {} and for {y} in {} (ties {}); leading {}: one-sided p = {:.4}, two-sided p = {:.4}",
            self.n, self.counts[x], self.counts[y], self.ties, self.leading_group, self.p_one_sided, self.p_two_sided
        )
    }
}

/// Tallies, per pair, which group's member the predictor ranks higher and
/// tests the tally against 50-50.
pub fn run_audit<P: Predictor + ?Sized>(
    predictor: &P,
    ds: &Dataset,
    set: &AuditSet,
) -> Result<AuditReport> {
    if set.pairs.is_empty() {
        return Err(Error::validation("no audit pairs"));
    }
    let (gx, gy) = &set.groups;
    let mut idxs = Vec::with_capacity(set.pairs.len() * 2);
    let mut seen = HashSet::new();
    for p in &set.pairs {
        if !((p.group_a == *gx && p.group_b == *gy) || (p.group_a == *gy && p.group_b == *gx)) {
            return Err(Error::validation(format!(
                "pair ({}, {}) has groups outside {gx}/{gy}",
                p.id_a, p.id_b
            )));
        }
        if !seen.insert((p.id_a.as_str(), p.id_b.as_str())) {
            return Err(Error::validation(format!(
                "pair ({}, {}) repeated",
                p.id_a, p.id_b
            )));
        }
        idxs.push(ds.require(&p.id_a)?);
        idxs.push(ds.require(&p.id_b)?);
    }
    let pred = predict_many(predictor, ds, &idxs)?;

    let mut counts: BTreeMap<String, usize> = [(gx.clone(), 0), (gy.clone(), 0)].into();
    let mut ties = 0;
    for (k, p) in set.pairs.iter().enumerate() {
        let (pa, pb) = (pred[2 * k], pred[2 * k + 1]);
        let a_wins = if pa != pb {
            pa > pb
        } else {
            let a_smaller = p.id_a < p.id_b;
            let credit_smaller = ties % 2 == 0;
            ties += 1;
            a_smaller == credit_smaller
        };
        let winner = if a_wins { &p.group_a } else { &p.group_b };
        *counts.get_mut(winner).expect("validated above") += 1;
    }

    let n = set.pairs.len();
    let (cx, cy) = (counts[gx], counts[gy]);
    let (leading_group, k) = if cy > cx {
        (gy.clone(), cy)
    } else {
        (gx.clone(), cx)
    };
    let test = binomial_test(k as u64, n as u64, 0.5)?;
    Ok(AuditReport {
        groups: set.groups.clone(),
        n,
        counts,
        leading_group,
        p_one_sided: test.p_one_sided,
        p_two_sided: test.p_two_sided,
        ties,
        tie_rule: TIE_RULE,
        pool: set.pool,
        seed: set.seed,
    })
}
