//! Train/test partitions: person-disjoint ("across people") and
//! sibling-in-train ("within person").

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    AcrossPeople,
    WithinPerson,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::AcrossPeople => "across-people",
            Protocol::WithinPerson => "within-person",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "across-people" => Ok(Protocol::AcrossPeople),
            "within-person" => Ok(Protocol::WithinPerson),
            other => Err(Error::validation(format!("unknown protocol {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPlan {
    pub protocol: Protocol,
    pub train_ids: BTreeSet<String>,
    pub test_ids: BTreeSet<String>,
    pub seed: u64,
}

/// How large the across-people test side should be.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestQuota {
    /// Fraction of all records, rounded to the nearest record.
    Fraction(f64),
    /// Record count.
    Records(usize),
}

/// Person-disjoint split by test fraction.
pub fn split_across_people(ds: &Dataset, test_fraction: f64, seed: u64) -> Result<SplitPlan> {
    split_across_people_with(ds, TestQuota::Fraction(test_fraction), seed)
}

/// Persons are shuffled with the seeded generator and moved whole into the
/// test side until it holds at least the quota of records. The test side can
/// overshoot the quota by one person's records.
pub fn split_across_people_with(ds: &Dataset, quota: TestQuota, seed: u64) -> Result<SplitPlan> {
    let total = ds.len();
    let target = match quota {
        TestQuota::Fraction(f) => {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::validation(format!(
                    "test fraction must be in (0, 1), got {f}"
                )));
            }
            (f * total as f64).round() as usize
        }
        TestQuota::Records(n) => n,
    };
    if target == 0 {
        return Err(Error::validation("test quota rounds to zero records"));
    }

    let mut persons: Vec<&str> = ds.persons().keys().map(String::as_str).collect();
    let mut rng = SplitMix64::new(seed);
    rng.shuffle(&mut persons);

    let mut test_ids = BTreeSet::new();
    for p in persons {
        if test_ids.len() >= target {
            break;
        }
        for idx in ds.persons()[p].records() {
            test_ids.insert(ds.record(idx).record_id.clone());
        }
    }
    if test_ids.len() >= total {
        return Err(Error::validation(format!(
            "test quota {target} leaves no training records"
        )));
    }
    let train_ids = ds
        .record_ids()
        .filter(|id| !test_ids.contains(*id))
        .map(str::to_string)
        .collect();
    Ok(SplitPlan {
        protocol: Protocol::AcrossPeople,
        train_ids,
        test_ids,
        seed,
    })
}

/// Picks `n_test` persons with the seeded generator and moves one of each
/// person's two images (a coin flip per person, in pick order) to the test
/// side.
pub fn split_within_person(ds: &Dataset, n_test: usize, seed: u64) -> Result<SplitPlan> {
    let n_persons = ds.persons().len();
    if n_test == 0 {
        return Err(Error::validation("n_test must be positive"));
    }
    if n_test > n_persons {
        return Err(Error::validation(format!(
            "n_test {n_test} exceeds the {n_persons} complete persons"
        )));
    }
    let mut persons: Vec<&str> = ds.persons().keys().map(String::as_str).collect();
    let mut rng = SplitMix64::new(seed);
    rng.shuffle(&mut persons);

    let mut test_ids = BTreeSet::new();
    for p in &persons[..n_test] {
        let person = ds.persons()[*p];
        let idx = if rng.coin() {
            person.after
        } else {
            person.before
        };
        test_ids.insert(ds.record(idx).record_id.clone());
    }
    let train_ids = ds
        .record_ids()
        .filter(|id| !test_ids.contains(*id))
        .map(str::to_string)
        .collect();
    Ok(SplitPlan {
        protocol: Protocol::WithinPerson,
        train_ids,
        test_ids,
        seed,
    })
}

impl SplitPlan {
    /// Checks the plan against `ds`: a partition of all record ids that
    /// honours the protocol's person constraint.
    pub fn check(&self, ds: &Dataset) -> Result<()> {
        let bad = |m: String| Err(Error::Integrity(m));
        if let Some(id) = self.train_ids.intersection(&self.test_ids).next() {
            return bad(format!("{id} is on both sides"));
        }
        if self.train_ids.len() + self.test_ids.len() != ds.len() {
            return bad(format!(
                "plan covers {} ids, dataset has {}",
                self.train_ids.len() + self.test_ids.len(),
                ds.len()
            ));
        }
        for id in self.train_ids.iter().chain(&self.test_ids) {
            if ds.index_of(id).is_none() {
                return bad(format!("{id} is not in the dataset"));
            }
        }

        let mut test_per_person: HashMap<&str, usize> = HashMap::new();
        for id in &self.test_ids {
            let rec = ds.record(ds.index_of(id).unwrap());
            *test_per_person.entry(rec.person_id.as_str()).or_default() += 1;
        }
        match self.protocol {
            Protocol::AcrossPeople => {
                for id in &self.train_ids {
                    let rec = ds.record(ds.index_of(id).unwrap());
                    if test_per_person.contains_key(rec.person_id.as_str()) {
                        return bad(format!("person {} is on both sides", rec.person_id));
                    }
                }
            }
            Protocol::WithinPerson => {
                for (person, count) in &test_per_person {
                    if *count > 1 {
                        return bad(format!("person {person} has {count} test records"));
                    }
                    let [b, a] = ds.persons()[*person].records();
                    let in_train = |i: usize| self.train_ids.contains(&ds.record(i).record_id);
                    if !(in_train(b) || in_train(a)) {
                        return bad(format!("person {person} has no sibling in train"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn train_vec(&self) -> Vec<String> {
        self.train_ids.iter().cloned().collect()
    }

    pub fn test_vec(&self) -> Vec<String> {
        self.test_ids.iter().cloned().collect()
    }
}

/// Writes `record_id,side` rows sorted by record id, preceded by a
/// `# protocol=... seed=...` comment line.
pub fn write_split(path: impl AsRef<Path>, plan: &SplitPlan) -> Result<()> {
    let path = path.as_ref();
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut rows: BTreeMap<&str, &str> = BTreeMap::new();
    for id in &plan.train_ids {
        rows.insert(id, "train");
    }
    for id in &plan.test_ids {
        rows.insert(id, "test");
    }
    let mut out = format!(
        "# protocol={} seed={}\nrecord_id,side\n",
        plan.protocol, plan.seed
    );
    for (id, side) in rows {
        out.push_str(id);
        out.push(',');
        out.push_str(side);
        out.push('\n');
    }
    file.write_all(out.as_bytes())
        .map_err(|e| Error::io(path, e))
}

pub fn read_split(path: impl AsRef<Path>) -> Result<SplitPlan> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut first = String::new();
    reader
        .read_line(&mut first)
        .map_err(|e| Error::io(path, e))?;

    let mut protocol = None;
    let mut seed = None;
    let meta = first.trim().strip_prefix('#').ok_or_else(|| {
        Error::Format("split file must start with a '# protocol=... seed=...' line".into())
    })?;
    for kv in meta.split_whitespace() {
        match kv.split_once('=') {
            Some(("protocol", v)) => protocol = Some(v.parse::<Protocol>()?),
            Some(("seed", v)) => {
                seed = Some(
                    v.parse::<u64>()
                        .map_err(|_| Error::Format(format!("bad seed {v:?}")))?,
                )
            }
            _ => {}
        }
    }
    let (Some(protocol), Some(seed)) = (protocol, seed) else {
        return Err(Error::Format("split header lacks protocol or seed".into()));
    };

    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    if rdr.headers()?.iter().collect::<Vec<_>>() != ["record_id", "side"] {
        return Err(Error::Format("split columns must be record_id,side".into()));
    }
    let mut plan = SplitPlan {
        protocol,
        train_ids: BTreeSet::new(),
        test_ids: BTreeSet::new(),
        seed,
    };
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map(|p| p.line() + 1).unwrap_or(0);
        let id = row[0].to_string();
        let fresh = match &row[1] {
            "train" => plan.train_ids.insert(id.clone()),
            "test" => plan.test_ids.insert(id.clone()),
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("side must be train|test, got {other:?}"),
                })
            }
        };
        if !fresh {
            return Err(Error::Integrity(format!("{id} listed twice")));
        }
    }
    Ok(plan)
}
