use serde::Serialize;

use crate::domain::Gender;
use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::predictor::{predict_many, Predictor};
use crate::split::SplitPlan;
use crate::svr::SvrModel;

/// Product-moment correlation of two equally long samples.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::validation(format!(
            "pearson: lengths differ ({} vs {})",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::validation("pearson needs at least 2 points"));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation(format!(
            "zero variance ({} side)",
            if sxx == 0.0 { "first" } else { "second" }
        )));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionMetrics {
    pub n_test: usize,
    pub n_male: usize,
    pub n_female: usize,
    pub pearson_overall: f64,
    /// `None` when the male test subset is too small or constant.
    pub pearson_male: Option<f64>,
    pub pearson_female: Option<f64>,
}

/// Predicts every test record of `plan` and correlates predictions with the
/// recorded BMI, overall and per gender.
pub fn evaluate_regression<P: Predictor + ?Sized>(
    predictor: &P,
    ds: &Dataset,
    plan: &SplitPlan,
) -> Result<RegressionMetrics> {
    let idxs = plan
        .test_ids
        .iter()
        .map(|id| ds.require(id))
        .collect::<Result<Vec<_>>>()?;
    let pred = predict_many(predictor, ds, &idxs)?;
    let truth: Vec<f64> = idxs.iter().map(|&i| ds.record(i).bmi).collect();

    let subset = |g: Gender| -> (usize, Option<f64>) {
        let (p, t): (Vec<f64>, Vec<f64>) = idxs
            .iter()
            .zip(pred.iter().zip(&truth))
            .filter(|(i, _)| ds.record(**i).gender == g)
            .map(|(_, (p, t))| (*p, *t))
            .unzip();
        (p.len(), pearson(&p, &t).ok())
    };
    let (n_male, pearson_male) = subset(Gender::Male);
    let (n_female, pearson_female) = subset(Gender::Female);

    Ok(RegressionMetrics {
        n_test: idxs.len(),
        n_male,
        n_female,
        pearson_overall: pearson(&pred, &truth)?,
        pearson_male,
        pearson_female,
    })
}

/// Fails if any support vector of `model` is a test record of `plan`.
pub fn check_trained_on(model: &SvrModel, plan: &SplitPlan) -> Result<()> {
    match model
        .support
        .iter()
        .find(|sv| plan.test_ids.contains(&sv.id))
    {
        Some(sv) => Err(Error::validation(format!(
            "model was trained on test record {}",
            sv.id
        ))),
        None => Ok(()),
    }
}
