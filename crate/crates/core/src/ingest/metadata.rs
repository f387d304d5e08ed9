use std::collections::HashSet;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::domain::{FaceRecord, Gender, Role};
use crate::error::{Error, Result};

pub const METADATA_HEADER: [&str; 7] = [
    "record_id",
    "person_id",
    "role",
    "gender",
    "height_m",
    "weight_kg",
    "race",
];

pub fn load_metadata(path: impl AsRef<Path>) -> Result<Vec<FaceRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_metadata(file)
}

/// Parses the metadata CSV. Row order is preserved.
pub fn parse_metadata<R: Read>(reader: R) -> Result<Vec<FaceRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(reader);

    let header = rdr.headers()?.clone();
    let cols: Vec<&str> = header.iter().collect();
    if cols != METADATA_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header {:?}, got {:?}",
                METADATA_HEADER.join(","),
                cols.join(",")
            ),
        });
    }

    let mut out = Vec::new();
    let mut ids = HashSet::new();
    let mut slots = HashSet::new();
    for row in rdr.records() {
        let row = row.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            Error::Parse {
                line,
                message: e.to_string(),
            }
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let parse_err = |message: String| Error::Parse { line, message };

        let record_id = &row[0];
        let person_id = &row[1];
        if record_id.is_empty() || person_id.is_empty() {
            return Err(parse_err("empty record_id or person_id".into()));
        }
        let role: Role = row[2].parse().map_err(parse_err)?;
        let gender: Gender = row[3].parse().map_err(parse_err)?;
        let height: f64 = row[4]
            .parse()
            .map_err(|_| parse_err(format!("height_m {:?} is not a number", &row[4])))?;
        let weight: f64 = row[5]
            .parse()
            .map_err(|_| parse_err(format!("weight_kg {:?} is not a number", &row[5])))?;
        let race = (!row[6].is_empty()).then(|| row[6].to_string());

        let rec = FaceRecord::new(record_id, person_id, role, gender, height, weight, race)
            .map_err(|e| parse_err(e.to_string()))?;

        if !ids.insert(rec.record_id.clone()) {
            return Err(Error::Integrity(format!(
                "line {line}: duplicate record_id {:?}",
                rec.record_id
            )));
        }
        if !slots.insert((rec.person_id.clone(), rec.role)) {
            return Err(Error::Integrity(format!(
                "line {line}: duplicate ({}, {}) for person",
                rec.person_id,
                rec.role.as_str()
            )));
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn write_metadata(path: impl AsRef<Path>, records: &[FaceRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(METADATA_HEADER)?;
    for r in records {
        w.write_record([
            r.record_id.as_str(),
            r.person_id.as_str(),
            r.role.as_str(),
            r.gender.code(),
            &r.height_m.to_string(),
            &r.weight_kg.to_string(),
            r.race.as_deref().unwrap_or(""),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
