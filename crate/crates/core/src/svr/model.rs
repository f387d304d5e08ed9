use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::unit_normalize;

use super::{KernelSpec, SvrHyperParams};

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportVector {
    pub id: String,
    pub coeff: f64,
    pub vec: Vec<f64>,
}

/// A trained regressor: `f(x) = sum_i coeff_i K(sv_i, x) + bias`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvrModel {
    pub kernel: KernelSpec,
    pub params: SvrHyperParams,
    /// Whether inputs are unit-normalized before prediction.
    pub normalize: bool,
    pub dim: usize,
    pub bias: f64,
    pub support: Vec<SupportVector>,
}

impl SvrModel {
    /// Predicts from a vector already in the model's feature space.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::validation(format!(
                "input dim {} does not match model dim {}",
                x.len(),
                self.dim
            )));
        }
        let mut acc = 0.0;
        for sv in &self.support {
            acc += sv.coeff * self.kernel.apply(&sv.vec, x);
        }
        Ok(acc + self.bias)
    }

    /// Predicts from a raw embedding, applying the model's normalization.
    pub fn predict_raw(&self, raw: &[f32]) -> Result<f64> {
        let mut x: Vec<f64> = raw.iter().map(|&v| v as f64).collect();
        if self.normalize {
            unit_normalize(&mut x).map_err(|_| Error::validation("zero-norm embedding"))?;
        }
        self.predict(&x)
    }

    pub fn coeff_sum(&self) -> f64 {
        self.support.iter().map(|s| s.coeff).sum()
    }

    fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        self.params.validate()?;
        if self.dim == 0 {
            return Err(Error::Format("model dim must be positive".into()));
        }
        for sv in &self.support {
            if sv.vec.len() != self.dim {
                return Err(Error::Format(format!(
                    "support vector {} has dim {}, model dim is {}",
                    sv.id,
                    sv.vec.len(),
                    self.dim
                )));
            }
        }
        if !self.bias.is_finite() {
            return Err(Error::Format("non-finite bias".into()));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct ParamsOnDisk {
    c: f64,
    epsilon: f64,
    tolerance: f64,
}

#[derive(Serialize, Deserialize)]
struct ModelOnDisk {
    version: u32,
    kernel: KernelSpec,
    params: ParamsOnDisk,
    normalize: bool,
    bias: f64,
    dim: usize,
    support: Vec<SupportVector>,
}

impl SvrModel {
    pub fn to_json(&self) -> Result<String> {
        let disk = ModelOnDisk {
            version: MODEL_VERSION,
            kernel: self.kernel,
            params: ParamsOnDisk {
                c: self.params.c,
                epsilon: self.params.epsilon,
                tolerance: self.params.tolerance,
            },
            normalize: self.normalize,
            bias: self.bias,
            dim: self.dim,
            support: self.support.clone(),
        };
        Ok(serde_json::to_string(&disk)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == MODEL_VERSION as u64 => {}
            other => {
                return Err(Error::Format(format!(
                    "unsupported model version {other:?}, expected {MODEL_VERSION}"
                )))
            }
        }
        let disk: ModelOnDisk = serde_json::from_value(value)?;
        let model = SvrModel {
            kernel: disk.kernel,
            params: SvrHyperParams {
                c: disk.params.c,
                epsilon: disk.params.epsilon,
                tolerance: disk.params.tolerance,
                max_passes: None,
            },
            normalize: disk.normalize,
            dim: disk.dim,
            bias: disk.bias,
            support: disk.support,
        };
        model.validate()?;
        Ok(model)
    }
}

pub fn save_model(path: impl AsRef<Path>, model: &SvrModel) -> Result<()> {
    let path = path.as_ref();
    let json = model.to_json()?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(json.as_bytes())
        .and_then(|_| w.write_all(b"\n"))
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SvrModel> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut text = String::new();
    std::io::Read::read_to_string(&mut BufReader::new(file), &mut text)
        .map_err(|e| Error::io(path, e))?;
    SvrModel::from_json(&text)
}
