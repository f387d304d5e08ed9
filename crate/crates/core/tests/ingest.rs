use std::collections::BTreeMap;
use std::fs;

use f2b_core::ingest::{
    load_dataset, load_metadata, read_embeddings, write_embeddings, EmbeddingVector,
};
use f2b_core::{BmiCategory, Error, Gender, Role};

const HEADER: &str = "record_id,person_id,role,gender,height_m,weight_kg,race\n";

#[test]
fn metadata_file_with_two_people() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("meta.csv");
    fs::write(
        &path,
        format!("{HEADER}p17_b,p17,before,M,1.80,120.0,\np17_a,p17,after,M,1.80,95.0,\np18_b,p18,before,F,1.60,70.0,X\np18_a,p18,after,F,1.60,60.0,X\n"),
    )
    .unwrap();
    let recs = load_metadata(&path).unwrap();
    assert_eq!(recs.len(), 4);
    let first = &recs[0];
    assert!((first.bmi - 120.0 / (1.8 * 1.8)).abs() < 1e-12);
    assert!((first.bmi - 37.037).abs() < 1e-3);
    assert_eq!(first.race, None);
    assert_eq!(first.gender, Gender::Male);
    assert_eq!(first.category().unwrap(), BmiCategory::SeverelyObese);
    assert_eq!(recs[3].role, Role::After);
    assert_eq!(recs[3].race.as_deref(), Some("X"));
    let persons: std::collections::BTreeSet<_> =
        recs.iter().map(|r| r.person_id.as_str()).collect();
    assert_eq!(persons.len(), 2);
}

#[test]
fn malformed_row_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("meta.csv");
    fs::write(
        &path,
        format!("{HEADER}a,p,before,M,1.8,80,\nb,p,after,M,tall,80,\n"),
    )
    .unwrap();
    match load_metadata(&path).unwrap_err() {
        Error::Parse { line, .. } => assert_eq!(line, 3),
        e => panic!("unexpected {e}"),
    }
}

#[test]
fn duplicate_role_is_integrity_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("meta.csv");
    fs::write(
        &path,
        format!("{HEADER}a,p,before,M,1.8,80,\nb,p,before,M,1.8,75,\n"),
    )
    .unwrap();
    assert!(matches!(
        load_metadata(&path).unwrap_err(),
        Error::Integrity(_)
    ));
}

fn vectors(n: usize, dim: usize) -> BTreeMap<String, EmbeddingVector> {
    let mut rng = f2b_core::SplitMix64::new(n as u64);
    (0..n)
        .map(|i| {
            let id = format!("r{i}");
            let v = (0..dim).map(|_| rng.gaussian() as f32).collect();
            (id.clone(), EmbeddingVector::new(id, v))
        })
        .collect()
}

#[test]
fn embeddings_round_trip_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e.f2be");
    let v = vectors(3, 8);
    write_embeddings(&path, &v).unwrap();
    let back = read_embeddings(&path).unwrap();
    assert_eq!(back.len(), 3);
    for (id, e) in &v {
        let bits: Vec<u32> = e.values.iter().map(|x| x.to_bits()).collect();
        let back_bits: Vec<u32> = back[id].values.iter().map(|x| x.to_bits()).collect();
        assert_eq!(bits, back_bits);
    }
    let bytes = fs::read(&path).unwrap();
    assert_eq!(&bytes[..4], b"F2BE");
}

#[test]
fn damaged_embedding_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e.f2be");
    write_embeddings(&path, &vectors(2, 4)).unwrap();
    let bytes = fs::read(&path).unwrap();

    let empty = dir.path().join("empty.f2be");
    fs::write(&empty, b"").unwrap();
    assert!(matches!(
        read_embeddings(&empty).unwrap_err(),
        Error::Format(_)
    ));

    // header still says 2 records but only the first survives
    let record_len = 2 + 2 + 4 * 4;
    let short = dir.path().join("short.f2be");
    fs::write(&short, &bytes[..bytes.len() - record_len]).unwrap();
    assert!(matches!(
        read_embeddings(&short).unwrap_err(),
        Error::Corrupt(_)
    ));

    let mut nan = bytes.clone();
    let n = nan.len();
    nan[n - 4..].copy_from_slice(&f32::NAN.to_le_bytes());
    let nan_path = dir.path().join("nan.f2be");
    fs::write(&nan_path, &nan).unwrap();
    assert!(matches!(
        read_embeddings(&nan_path).unwrap_err(),
        Error::Validation(_)
    ));

    let mut magic = bytes;
    magic[0] = b'X';
    let magic_path = dir.path().join("magic.f2be");
    fs::write(&magic_path, &magic).unwrap();
    assert!(matches!(
        read_embeddings(&magic_path).unwrap_err(),
        Error::Format(_)
    ));
}

#[test]
fn join_reports_orphans_and_normalizes() {
    let dir = tempfile::tempdir().unwrap();
    let meta = dir.path().join("meta.csv");
    fs::write(
        &meta,
        format!("{HEADER}a_b,a,before,F,1.6,60,\na_a,a,after,F,1.6,55,\nb_b,b,before,M,1.8,90,\n"),
    )
    .unwrap();
    let emb = dir.path().join("e.f2be");
    let v: BTreeMap<_, _> = [("a_b", [3.0f32, 4.0]), ("a_a", [0.0, 2.0])]
        .into_iter()
        .map(|(id, x)| (id.to_string(), EmbeddingVector::new(id, x.to_vec())))
        .collect();
    write_embeddings(&emb, &v).unwrap();
    let (ds, report) = load_dataset(&meta, &emb, true).unwrap();
    assert_eq!(ds.len(), 2);
    assert_eq!(report.orphan_records, vec!["b_b".to_string()]);
    let i = ds.index_of("a_b").unwrap();
    assert_eq!(ds.feature(i), &[0.6, 0.8]);
}
