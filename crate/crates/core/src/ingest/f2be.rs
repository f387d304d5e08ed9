//! The F2BE embedding file.
//!
//! All integers little-endian:
//!
//! ```text
//! magic   "F2BE"         4 bytes
//! version u16 = 1
//! dim     u32
//! count   u64
//! count x { id_len u16, id utf-8 bytes, dim x f32 }
//! ```

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const F2BE_MAGIC: [u8; 4] = *b"F2BE";
pub const F2BE_VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    pub record_id: String,
    pub values: Vec<f32>,
}

impl EmbeddingVector {
    pub fn new(record_id: impl Into<String>, values: Vec<f32>) -> Self {
        Self {
            record_id: record_id.into(),
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

pub fn read_embeddings(path: impl AsRef<Path>) -> Result<BTreeMap<String, EmbeddingVector>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    decode_embeddings(BufReader::new(file))
}

pub fn write_embeddings(
    path: impl AsRef<Path>,
    vectors: &BTreeMap<String, EmbeddingVector>,
) -> Result<()> {
    let path = path.as_ref();
    // validate before touching the file system
    let dim = common_dim(vectors)?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    encode_into(&mut w, dim, vectors).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Serializes vectors in record_id order.
pub fn encode_embeddings(vectors: &BTreeMap<String, EmbeddingVector>) -> Result<Vec<u8>> {
    let dim = common_dim(vectors)?;
    let mut buf = Vec::new();
    encode_into(&mut buf, dim, vectors).expect("writing to Vec cannot fail");
    Ok(buf)
}

fn common_dim(vectors: &BTreeMap<String, EmbeddingVector>) -> Result<usize> {
    let mut dim = None;
    for (key, v) in vectors {
        if key != &v.record_id {
            return Err(Error::validation(format!(
                "map key {key:?} does not match record_id {:?}",
                v.record_id
            )));
        }
        if v.record_id.len() > u16::MAX as usize {
            return Err(Error::validation(format!("record_id {key:?} too long")));
        }
        if let Some(bad) = v.values.iter().find(|x| !x.is_finite()) {
            return Err(Error::validation(format!("{key}: non-finite value {bad}")));
        }
        match dim {
            None => dim = Some(v.dim()),
            Some(d) if d != v.dim() => {
                return Err(Error::validation(format!(
                    "mixed dims: {key} has {} but expected {d}",
                    v.dim()
                )))
            }
            _ => {}
        }
    }
    match dim {
        Some(0) => Err(Error::validation("vectors have zero dimension")),
        Some(d) if d > u32::MAX as usize => Err(Error::validation("dim exceeds u32")),
        // an empty file still needs a dim; 0 marks "no vectors"
        None => Ok(0),
        Some(d) => Ok(d),
    }
}

fn encode_into<W: Write>(
    w: &mut W,
    dim: usize,
    vectors: &BTreeMap<String, EmbeddingVector>,
) -> std::io::Result<()> {
    w.write_all(&F2BE_MAGIC)?;
    w.write_all(&F2BE_VERSION.to_le_bytes())?;
    w.write_all(&(dim as u32).to_le_bytes())?;
    w.write_all(&(vectors.len() as u64).to_le_bytes())?;
    for v in vectors.values() {
        w.write_all(&(v.record_id.len() as u16).to_le_bytes())?;
        w.write_all(v.record_id.as_bytes())?;
        for x in &v.values {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_exact_or<R: Read>(r: &mut R, buf: &mut [u8], what: impl FnOnce() -> Error) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => what(),
        _ => Error::Corrupt(e.to_string()),
    })
}

pub fn decode_embeddings<R: Read>(mut r: R) -> Result<BTreeMap<String, EmbeddingVector>> {
    let mut header = [0u8; 18];
    read_exact_or(&mut r, &mut header, || {
        Error::Format("file shorter than the 18-byte F2BE header".into())
    })?;
    if header[0..4] != F2BE_MAGIC {
        return Err(Error::Format(format!("bad magic {:?}", &header[0..4])));
    }
    let version = u16::from_le_bytes([header[4], header[5]]);
    if version != F2BE_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = u32::from_le_bytes(header[6..10].try_into().unwrap()) as usize;
    let count = u64::from_le_bytes(header[10..18].try_into().unwrap());
    if dim == 0 && count > 0 {
        return Err(Error::Format("dim is zero".into()));
    }

    let mut out = BTreeMap::new();
    let mut row = vec![0u8; dim * 4];
    for i in 0..count {
        let truncated = || Error::Corrupt(format!("truncated at record {i} of {count}"));
        let mut len = [0u8; 2];
        read_exact_or(&mut r, &mut len, truncated)?;
        let mut id = vec![0u8; u16::from_le_bytes(len) as usize];
        read_exact_or(&mut r, &mut id, truncated)?;
        let id = String::from_utf8(id)
            .map_err(|_| Error::Corrupt(format!("record {i}: id is not UTF-8")))?;
        read_exact_or(&mut r, &mut row, truncated)?;
        let values: Vec<f32> = row
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if let Some(bad) = values.iter().find(|x| !x.is_finite()) {
            return Err(Error::validation(format!("{id}: non-finite value {bad}")));
        }
        if out.contains_key(&id) {
            return Err(Error::validation(format!("duplicate record_id {id:?}")));
        }
        out.insert(id.clone(), EmbeddingVector::new(id, values));
    }

    let mut extra = [0u8; 1];
    match r.read(&mut extra) {
        Ok(0) => Ok(out),
        Ok(_) => Err(Error::Corrupt(format!(
            "trailing bytes after {count} records"
        ))),
        Err(e) => Err(Error::Corrupt(e.to_string())),
    }
}
