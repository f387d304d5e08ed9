//! Anything that maps a dataset record to a BMI estimate.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::svr::SvrModel;

pub trait Predictor: Sync {
    fn predict_record(&self, ds: &Dataset, idx: usize) -> Result<f64>;
}

impl Predictor for SvrModel {
    fn predict_record(&self, ds: &Dataset, idx: usize) -> Result<f64> {
        if ds.normalized() != self.normalize {
            return Err(Error::validation(format!(
                "model expects normalize={} but dataset was built with normalize={}",
                self.normalize,
                ds.normalized()
            )));
        }
        self.predict(ds.feature(idx))
    }
}

/// Returns the recorded BMI. Useful as an upper-bound baseline.
#[derive(Debug, Clone, Copy, Default)]
pub struct TruthPredictor;

impl Predictor for TruthPredictor {
    fn predict_record(&self, ds: &Dataset, idx: usize) -> Result<f64> {
        Ok(ds.record(idx).bmi)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantPredictor(pub f64);

impl Predictor for ConstantPredictor {
    fn predict_record(&self, _ds: &Dataset, _idx: usize) -> Result<f64> {
        Ok(self.0)
    }
}

impl<F> Predictor for F
where
    F: Fn(&Dataset, usize) -> f64 + Sync,
{
    fn predict_record(&self, ds: &Dataset, idx: usize) -> Result<f64> {
        Ok(self(ds, idx))
    }
}

/// Predicts every index in order. Work may run in parallel; output order is
/// always the input order.
pub fn predict_many<P: Predictor + ?Sized>(
    predictor: &P,
    ds: &Dataset,
    idxs: &[usize],
) -> Result<Vec<f64>> {
    idxs.par_iter()
        .map(|&i| predictor.predict_record(ds, i))
        .collect()
}
