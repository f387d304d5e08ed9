//! Stratified pair generation and machine answering for the comparison task.
//!
//! A pair falls in bucket `i` when `0.5 + i < |bmi_a - bmi_b| <= 1.5 + i`,
//! for `i` in `0..15`. Each gender category gets the same number of pairs,
//! split evenly across buckets; mixed-gender cells hold as many male-higher
//! as female-higher pairs.
//!
//! Within a cell, candidates are drawn without replacement with weight
//! inversely proportional to how crowded their midpoint-BMI bin is (ten
//! equal-width bins over the cell's midpoint range). This is a heuristic to
//! spread pairs over the whole BMI spectrum instead of concentrating them
//! where most subjects sit.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::Gender;
use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::predictor::{predict_many, Predictor};
use crate::rng::SplitMix64;

pub const N_BUCKETS: usize = 15;
const MIDPOINT_BINS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenderCategory {
    MaleMale,
    FemaleFemale,
    FemaleMale,
}

impl GenderCategory {
    pub const ALL: [GenderCategory; 3] = [
        GenderCategory::MaleMale,
        GenderCategory::FemaleFemale,
        GenderCategory::FemaleMale,
    ];

    pub fn of(a: Gender, b: Gender) -> Self {
        match (a, b) {
            (Gender::Male, Gender::Male) => GenderCategory::MaleMale,
            (Gender::Female, Gender::Female) => GenderCategory::FemaleFemale,
            _ => GenderCategory::FemaleMale,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GenderCategory::MaleMale => "male_male",
            GenderCategory::FemaleFemale => "female_female",
            GenderCategory::FemaleMale => "female_male",
        }
    }
}

impl fmt::Display for GenderCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for GenderCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GenderCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::validation(format!("unknown gender category {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Truth {
    AIsHigher,
    BIsHigher,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonPair {
    pub id_a: String,
    pub id_b: String,
    pub gender_category: GenderCategory,
    pub bucket: u8,
    pub truth: Truth,
}

/// Bucket index of an absolute BMI difference, or `None` outside
/// `(0.5, 15.5]`.
pub fn bucket_of(delta: f64) -> Option<u8> {
    let d = delta.abs();
    if d.is_nan() || d <= 0.5 || d > 0.5 + N_BUCKETS as f64 {
        return None;
    }
    let guess = (d - 1.5).ceil().max(0.0) as i64;
    for i in [guess - 1, guess, guess + 1] {
        if (0..N_BUCKETS as i64).contains(&i) && 0.5 + (i as f64) < d && d <= 1.5 + i as f64 {
            return Some(i as u8);
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct CellKey {
    category: GenderCategory,
    bucket: u8,
    /// Mixed-gender cells only: whether the male member is higher.
    male_higher: bool,
}

/// Draws `per_category` pairs for each gender category from the test pool.
pub fn generate_pairs(
    ds: &Dataset,
    test_ids: &std::collections::BTreeSet<String>,
    per_category: usize,
    seed: u64,
) -> Result<Vec<ComparisonPair>> {
    if per_category == 0 || !per_category.is_multiple_of(N_BUCKETS) {
        return Err(Error::validation(format!(
            "per_category must be a positive multiple of {N_BUCKETS}, got {per_category}"
        )));
    }
    let per_bucket = per_category / N_BUCKETS;
    if !per_bucket.is_multiple_of(2) {
        return Err(Error::validation(format!(
            "per-bucket count {per_bucket} must be even to balance mixed-gender cells"
        )));
    }

    let pool = test_ids
        .iter()
        .map(|id| ds.require(id))
        .collect::<Result<Vec<_>>>()?;

    let mut cells: BTreeMap<CellKey, Vec<(usize, usize)>> = BTreeMap::new();
    for (k, &i) in pool.iter().enumerate() {
        let ri = ds.record(i);
        for &j in &pool[k + 1..] {
            let rj = ds.record(j);
            if ri.person_id == rj.person_id {
                continue;
            }
            let Some(bucket) = bucket_of(ri.bmi - rj.bmi) else {
                continue;
            };
            let category = GenderCategory::of(ri.gender, rj.gender);
            let male_higher = category == GenderCategory::FemaleMale && {
                let (m, f) = if ri.gender == Gender::Male {
                    (ri, rj)
                } else {
                    (rj, ri)
                };
                m.bmi > f.bmi
            };
            cells
                .entry(CellKey {
                    category,
                    bucket,
                    male_higher,
                })
                .or_default()
                .push((i, j));
        }
    }

    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::with_capacity(per_category * GenderCategory::ALL.len());
    for category in GenderCategory::ALL {
        for bucket in 0..N_BUCKETS as u8 {
            let sides: &[(bool, usize)] = if category == GenderCategory::FemaleMale {
                &[(true, per_bucket / 2), (false, per_bucket / 2)]
            } else {
                &[(false, per_bucket)]
            };
            for &(male_higher, need) in sides {
                let key = CellKey {
                    category,
                    bucket,
                    male_higher,
                };
                let candidates = cells.get(&key).map(Vec::as_slice).unwrap_or(&[]);
                if candidates.len() < need {
                    let side = match (category, male_higher) {
                        (GenderCategory::FemaleMale, true) => ", male higher",
                        (GenderCategory::FemaleMale, false) => ", female higher",
                        _ => "",
                    };
                    return Err(Error::Capacity(format!(
                        "cell ({category}, bucket {bucket}{side}) has {} candidate pairs, needs {need}",
                        candidates.len()
                    )));
                }
                for (i, j) in draw_balanced(ds, candidates, need, &mut rng) {
                    let (a, b) = if rng.coin() { (j, i) } else { (i, j) };
                    let (ra, rb) = (ds.record(a), ds.record(b));
                    out.push(ComparisonPair {
                        id_a: ra.record_id.clone(),
                        id_b: rb.record_id.clone(),
                        gender_category: category,
                        bucket,
                        truth: if ra.bmi > rb.bmi {
                            Truth::AIsHigher
                        } else {
                            Truth::BIsHigher
                        },
                    });
                }
            }
        }
    }
    Ok(out)
}

fn draw_balanced(
    ds: &Dataset,
    candidates: &[(usize, usize)],
    need: usize,
    rng: &mut SplitMix64,
) -> Vec<(usize, usize)> {
    let mids: Vec<f64> = candidates
        .iter()
        .map(|&(i, j)| 0.5 * (ds.record(i).bmi + ds.record(j).bmi))
        .collect();
    let lo = mids.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = mids.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / MIDPOINT_BINS as f64;
    let bin = |m: f64| -> usize {
        if width > 0.0 {
            (((m - lo) / width) as usize).min(MIDPOINT_BINS - 1)
        } else {
            0
        }
    };
    let mut counts = [0usize; MIDPOINT_BINS];
    for &m in &mids {
        counts[bin(m)] += 1;
    }
    let mut weights: Vec<f64> = mids.iter().map(|&m| 1.0 / counts[bin(m)] as f64).collect();

    let mut picked = Vec::with_capacity(need);
    let mut total: f64 = weights.iter().sum();
    for _ in 0..need {
        let target = rng.uniform() * total;
        let mut acc = 0.0;
        let mut choice = None;
        for (k, w) in weights.iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            acc += w;
            choice = Some(k);
            if acc > target {
                break;
            }
        }
        let k = choice.expect("enough candidates remain");
        total -= weights[k];
        weights[k] = 0.0;
        picked.push(candidates[k]);
    }
    picked
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellAccuracy {
    pub category: GenderCategory,
    /// `None` for a per-category aggregate.
    pub bucket: Option<u8>,
    pub n: usize,
    pub correct: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairAccuracy {
    pub n_pairs: usize,
    pub n_correct: usize,
    pub overall: f64,
    pub by_category: Vec<CellAccuracy>,
    pub by_cell: Vec<CellAccuracy>,
}

impl PairAccuracy {
    /// Tabulates `(category, bucket, correct)` outcomes.
    pub fn tabulate(outcomes: impl IntoIterator<Item = (GenderCategory, u8, bool)>) -> Self {
        let mut cells: BTreeMap<(GenderCategory, u8), (usize, usize)> = BTreeMap::new();
        let mut cats: BTreeMap<GenderCategory, (usize, usize)> = BTreeMap::new();
        let (mut n, mut c) = (0, 0);
        for (cat, bucket, ok) in outcomes {
            let ok = ok as usize;
            let cell = cells.entry((cat, bucket)).or_default();
            cell.0 += 1;
            cell.1 += ok;
            let agg = cats.entry(cat).or_default();
            agg.0 += 1;
            agg.1 += ok;
            n += 1;
            c += ok;
        }
        let acc = |n: usize, c: usize| if n == 0 { 0.0 } else { c as f64 / n as f64 };
        PairAccuracy {
            n_pairs: n,
            n_correct: c,
            overall: acc(n, c),
            by_category: cats
                .into_iter()
                .map(|(category, (n, c))| CellAccuracy {
                    category,
                    bucket: None,
                    n,
                    correct: c,
                    accuracy: acc(n, c),
                })
                .collect(),
            by_cell: cells
                .into_iter()
                .map(|((category, b), (n, c))| CellAccuracy {
                    category,
                    bucket: Some(b),
                    n,
                    correct: c,
                    accuracy: acc(n, c),
                })
                .collect(),
        }
    }
}

/// Answers each pair with the member of higher predicted BMI. An exact
/// prediction tie counts as a wrong answer.
pub fn answer_pairs<P: Predictor + ?Sized>(
    predictor: &P,
    ds: &Dataset,
    pairs: &[ComparisonPair],
) -> Result<PairAccuracy> {
    let mut idxs = Vec::with_capacity(pairs.len() * 2);
    for p in pairs {
        idxs.push(ds.require(&p.id_a)?);
        idxs.push(ds.require(&p.id_b)?);
    }
    let pred = predict_many(predictor, ds, &idxs)?;
    Ok(PairAccuracy::tabulate(pairs.iter().enumerate().map(
        |(k, p)| {
            let (pa, pb) = (pred[2 * k], pred[2 * k + 1]);
            let ok = match p.truth {
                Truth::AIsHigher => pa > pb,
                Truth::BIsHigher => pb > pa,
            };
            (p.gender_category, p.bucket, ok)
        },
    )))
}
