//! Seeded synthetic cohorts for tests, demos and the acceptance suite.
//!
//! Each person gets an identity vector orthogonal to a hidden unit direction
//! `w`; an image's embedding is `identity + w * s` where `s` is that image's
//! latent body-mass score, and its BMI is `33 + slope * s + eta` with `eta`
//! Gaussian noise drawn once per person. BMI is therefore linear in the
//! embedding with weights `slope * w`.

use std::collections::BTreeMap;
use std::path::Path;

use crate::domain::{FaceRecord, Gender, Role};
use crate::error::{Error, Result};
use crate::ingest::{build_dataset, write_embeddings, write_metadata, Dataset, EmbeddingVector};
use crate::rng::SplitMix64;

pub const BMI_INTERCEPT: f64 = 33.0;

const MIN_SCORE_BMI: f64 = 16.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub persons: usize,
    pub dim: usize,
    pub seed: u64,
    pub female_fraction: f64,
    /// Standard deviation of the per-person BMI noise.
    pub noise_sigma: f64,
    pub identity_scale: f64,
    pub bmi_slope: f64,
    /// Race labels assigned uniformly per person; empty leaves race unset.
    pub races: Vec<String>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            persons: 200,
            dim: 16,
            seed: 42,
            female_fraction: 0.42,
            noise_sigma: 0.5,
            identity_scale: 1.0,
            bmi_slope: 7.0,
            races: vec!["A".into(), "B".into()],
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthData {
    pub records: Vec<FaceRecord>,
    pub embeddings: BTreeMap<String, EmbeddingVector>,
    /// Generating weights: noiseless BMI is `BMI_INTERCEPT + weights . e`.
    pub weights: Vec<f64>,
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthData> {
    if cfg.persons == 0 || cfg.dim < 2 {
        return Err(Error::validation(
            "synthetic cohort needs persons > 0 and dim >= 2",
        ));
    }
    if !(0.0..=1.0).contains(&cfg.female_fraction) {
        return Err(Error::validation("female_fraction must lie in [0, 1]"));
    }
    for (name, v) in [
        ("noise_sigma", cfg.noise_sigma),
        ("identity_scale", cfg.identity_scale),
        ("bmi_slope", cfg.bmi_slope),
    ] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::validation(format!(
                "{name} must be finite and non-negative"
            )));
        }
    }
    if cfg.bmi_slope == 0.0 {
        return Err(Error::validation("bmi_slope must be positive"));
    }

    let mut root = SplitMix64::new(cfg.seed);
    let mut wr = root.fork(0);
    let mut w: Vec<f64> = (0..cfg.dim).map(|_| wr.gaussian()).collect();
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    w.iter_mut().for_each(|v| *v /= norm);

    let min_score = (MIN_SCORE_BMI - BMI_INTERCEPT) / cfg.bmi_slope;
    let mut records = Vec::with_capacity(cfg.persons * 2);
    let mut embeddings = BTreeMap::new();
    for p in 0..cfg.persons {
        let mut rng = root.fork(p as u64 + 1);
        let mut identity: Vec<f64> = (0..cfg.dim)
            .map(|_| rng.gaussian() * cfg.identity_scale)
            .collect();
        let along: f64 = identity.iter().zip(&w).map(|(a, b)| a * b).sum();
        identity
            .iter_mut()
            .zip(&w)
            .for_each(|(v, wi)| *v -= along * wi);

        let eta = rng.gaussian() * cfg.noise_sigma;
        let before = -1.5 + 3.0 * rng.uniform();
        let after = (before - 0.8 * rng.gaussian().abs()).max(min_score);
        let gender = if rng.uniform() < cfg.female_fraction {
            Gender::Female
        } else {
            Gender::Male
        };
        let (mean_h, sd_h) = match gender {
            Gender::Male => (1.77, 0.07),
            Gender::Female => (1.63, 0.06),
        };
        let height = (mean_h + sd_h * rng.gaussian()).clamp(1.45, 2.05);
        let race = if cfg.races.is_empty() {
            None
        } else {
            Some(cfg.races[rng.below(cfg.races.len() as u64) as usize].clone())
        };

        let person_id = format!("p{p:05}");
        for (role, score, tag) in [(Role::Before, before, "b"), (Role::After, after, "a")] {
            let bmi = BMI_INTERCEPT + cfg.bmi_slope * score + eta;
            let record_id = format!("{person_id}_{tag}");
            let rec = FaceRecord::new(
                &record_id,
                &person_id,
                role,
                gender,
                height,
                bmi * height * height,
                race.clone(),
            )?;
            let vec = identity
                .iter()
                .zip(&w)
                .map(|(id, wi)| (id + wi * score) as f32)
                .collect();
            embeddings.insert(record_id.clone(), EmbeddingVector::new(record_id, vec));
            records.push(rec);
        }
    }
    let weights = w.iter().map(|v| v * cfg.bmi_slope).collect();
    Ok(SynthData {
        records,
        embeddings,
        weights,
    })
}

impl SynthData {
    pub fn dataset(&self, normalize: bool) -> Result<Dataset> {
        build_dataset(self.records.clone(), &self.embeddings, normalize).map(|(ds, _)| ds)
    }

    /// Writes `metadata.csv` and `embeddings.f2be` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_metadata(dir.join("metadata.csv"), &self.records)?;
        write_embeddings(dir.join("embeddings.f2be"), &self.embeddings)
    }
}
