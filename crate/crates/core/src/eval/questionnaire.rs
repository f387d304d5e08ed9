//! Questionnaire export for human raters and scoring of their answers.
//!
//! The questionnaire lists `pair_id,image_a,image_b` with the two images in
//! a seeded random left/right order and no truth. The answer key, written
//! next to it as `<stem>.key.csv`, adds which displayed image is higher
//! along with the pair's stratum. Rater answers come back as
//! `pair_id,answer` rows with `answer` in `{a, b}`; a pair may be answered
//! by several raters and every answer is scored on its own.

use std::collections::HashMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::rng::SplitMix64;

use super::pairs::{ComparisonPair, GenderCategory, PairAccuracy, Truth};

pub fn key_path_for(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.key.csv"))
}

/// Writes the questionnaire to `path` and the answer key alongside it;
/// returns the key's path.
pub fn export_questionnaire(
    pairs: &[ComparisonPair],
    ds: &Dataset,
    path: impl AsRef<Path>,
    seed: u64,
) -> Result<PathBuf> {
    let path = path.as_ref();
    let key_path = key_path_for(path);
    for p in pairs {
        ds.require(&p.id_a)?;
        ds.require(&p.id_b)?;
    }

    let open = |p: &Path| File::create(p).map_err(|e| Error::io(p, e));
    let mut q = csv::Writer::from_writer(open(path)?);
    let mut key = csv::Writer::from_writer(open(&key_path)?);
    q.write_record(["pair_id", "image_a", "image_b"])?;
    key.write_record([
        "pair_id", "image_a", "image_b", "higher", "category", "bucket",
    ])?;

    let mut rng = SplitMix64::new(seed);
    for (k, p) in pairs.iter().enumerate() {
        let swap = rng.coin();
        let (left, right) = if swap {
            (&p.id_b, &p.id_a)
        } else {
            (&p.id_a, &p.id_b)
        };
        let left_higher = (p.truth == Truth::AIsHigher) != swap;
        let id = k.to_string();
        q.write_record([id.as_str(), left, right])?;
        key.write_record([
            id.as_str(),
            left,
            right,
            if left_higher { "a" } else { "b" },
            p.gender_category.as_str(),
            &p.bucket.to_string(),
        ])?;
    }
    q.flush().map_err(|e| Error::io(path, e))?;
    key.flush().map_err(|e| Error::io(&key_path, e))?;
    Ok(key_path)
}

/// Scores rater answers against an answer key.
pub fn score_human_answers(
    key_path: impl AsRef<Path>,
    answers_path: impl AsRef<Path>,
) -> Result<PairAccuracy> {
    let key_path = key_path.as_ref();
    let answers_path = answers_path.as_ref();

    let mut key: HashMap<String, (bool, GenderCategory, u8)> = HashMap::new();
    let mut rdr =
        csv::Reader::from_reader(File::open(key_path).map_err(|e| Error::io(key_path, e))?);
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let bad = |m: &str| Error::Parse {
            line,
            message: format!("{}: {m}", key_path.display()),
        };
        let left_higher = match &row[3] {
            "a" => true,
            "b" => false,
            _ => return Err(bad("higher must be a|b")),
        };
        let category: GenderCategory = row[4].parse()?;
        let bucket: u8 = row[5].parse().map_err(|_| bad("bad bucket"))?;
        key.insert(row[0].to_string(), (left_higher, category, bucket));
    }

    let mut outcomes = Vec::new();
    let mut rdr =
        csv::Reader::from_reader(File::open(answers_path).map_err(|e| Error::io(answers_path, e))?);
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let Some(&(left_higher, category, bucket)) = key.get(&row[0]) else {
            return Err(Error::Parse {
                line,
                message: format!("unknown pair_id {:?}", &row[0]),
            });
        };
        let said_left = match row[1].trim() {
            "a" => true,
            "b" => false,
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("answer must be a|b, got {other:?}"),
                })
            }
        };
        outcomes.push((category, bucket, said_left == left_higher));
    }
    Ok(PairAccuracy::tabulate(outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::generate_pairs;
    use crate::synthetic::{generate, SynthConfig};
    use std::collections::BTreeSet;

    fn setup() -> (Dataset, Vec<ComparisonPair>) {
        let ds = generate(&SynthConfig {
            persons: 500,
            female_fraction: 0.45,
            seed: 3,
            ..SynthConfig::default()
        })
        .unwrap()
        .dataset(true)
        .unwrap();
        let ids: BTreeSet<String> = ds.record_ids().map(str::to_string).collect();
        let pairs = generate_pairs(&ds, &ids, 300, 1).unwrap();
        (ds, pairs)
    }

    #[test]
    fn row_counts_and_reproducibility() {
        let (ds, pairs) = setup();
        let dir = tempfile::tempdir().unwrap();
        let q = dir.path().join("q.csv");
        let key = export_questionnaire(&pairs, &ds, &q, 5).unwrap();
        assert_eq!(key, dir.path().join("q.key.csv"));
        let qtext = std::fs::read_to_string(&q).unwrap();
        let ktext = std::fs::read_to_string(&key).unwrap();
        assert_eq!(qtext.lines().count(), 901);
        assert_eq!(ktext.lines().count(), 901);
        assert_eq!(qtext.lines().next().unwrap(), "pair_id,image_a,image_b");

        let q2 = dir.path().join("q2.csv");
        export_questionnaire(&pairs, &ds, &q2, 5).unwrap();
        assert_eq!(std::fs::read(&q2).unwrap(), qtext.as_bytes());

        let q3 = dir.path().join("q3.csv");
        export_questionnaire(&pairs, &ds, &q3, 6).unwrap();
        assert_ne!(std::fs::read(&q3).unwrap(), qtext.as_bytes());
    }

    #[test]
    fn empty_pairs_write_headers_only() {
        let (ds, _) = setup();
        let dir = tempfile::tempdir().unwrap();
        let q = dir.path().join("empty.csv");
        let key = export_questionnaire(&[], &ds, &q, 1).unwrap();
        assert_eq!(
            std::fs::read_to_string(&q).unwrap(),
            "pair_id,image_a,image_b\n"
        );
        assert_eq!(
            std::fs::read_to_string(&key).unwrap(),
            "pair_id,image_a,image_b,higher,category,bucket\n"
        );
    }

    #[test]
    fn perfect_and_inverted_raters() {
        let (ds, pairs) = setup();
        let dir = tempfile::tempdir().unwrap();
        let q = dir.path().join("q.csv");
        let key = export_questionnaire(&pairs, &ds, &q, 2).unwrap();
        let ktext = std::fs::read_to_string(&key).unwrap();
        let mut right = String::from("pair_id,answer\n");
        let mut wrong = String::from("pair_id,answer\n");
        for line in ktext.lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            // three raters per question
            for _ in 0..3 {
                right.push_str(&format!("{},{}\n", f[0], f[3]));
                wrong.push_str(&format!(
                    "{},{}\n",
                    f[0],
                    if f[3] == "a" { "b" } else { "a" }
                ));
            }
        }
        let good = dir.path().join("good.csv");
        let bad = dir.path().join("bad.csv");
        std::fs::write(&good, right).unwrap();
        std::fs::write(&bad, wrong).unwrap();
        let g = score_human_answers(&key, &good).unwrap();
        assert_eq!((g.n_pairs, g.overall), (2700, 1.0));
        assert_eq!(score_human_answers(&key, &bad).unwrap().overall, 0.0);
    }
}
