use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Rbf,
}

/// Kernel choice. `gamma` is only meaningful (and required) for RBF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub gamma: Option<f64>,
}

impl KernelSpec {
    pub fn linear() -> Self {
        Self {
            kind: KernelKind::Linear,
            gamma: None,
        }
    }

    pub fn rbf(gamma: f64) -> Result<Self> {
        let spec = Self {
            kind: KernelKind::Rbf,
            gamma: Some(gamma),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// RBF with `gamma = 1 / dim`.
    pub fn rbf_default(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::validation("dim must be positive"));
        }
        Self::rbf(1.0 / dim as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == KernelKind::Rbf {
            match self.gamma {
                Some(g) if g.is_finite() && g > 0.0 => {}
                other => {
                    return Err(Error::validation(format!(
                        "rbf gamma must be finite and > 0, got {other:?}"
                    )))
                }
            }
        }
        Ok(())
    }

    /// Kernel value without the dimension check.
    #[inline]
    pub(crate) fn apply(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.kind {
            KernelKind::Linear => dot(x, y),
            KernelKind::Rbf => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-self.gamma.unwrap_or(0.0) * d2).exp()
            }
        }
    }
}

#[inline]
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn kernel_eval(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::validation(format!(
            "kernel dim mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    spec.validate()?;
    Ok(spec.apply(x, y))
}
