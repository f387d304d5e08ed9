//! Sequential minimal optimization for the epsilon-SVR dual.
//!
//! Minimizes `0.5 a'Qa + p'a` subject to `y'a = 0` and `0 <= a <= C`, where
//! for `t < n`: `y[t] = +1`, `p[t] = eps - z[t]`; for `t >= n`: `y[t] = -1`,
//! `p[t] = eps + z[t]`; and `Q[s][t] = y[s] y[t] K(s mod n, t mod n)`.
//!
//! Working pair: `i` is the maximal violator of `-y G` over the "can move
//! up" set, `j` minimizes the second-order gain `-(b^2)/a` over the "can
//! move down" set. Ties go to the lowest index. The solver stops when
//! `max_up(-yG) - min_down(-yG) < tolerance`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Dataset;

use super::cache::{KernelCache, DENSE_CACHE_LIMIT};
use super::model::{SupportVector, SvrModel};
use super::KernelSpec;

/// Floor for a non-positive curvature along the chosen direction.
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvrHyperParams {
    /// Box constraint on each dual coefficient.
    pub c: f64,
    /// Tube half-width in BMI units.
    pub epsilon: f64,
    /// KKT gap at which the solver stops.
    pub tolerance: f64,
    /// Iteration cap in sweeps of `2n` pair updates; `None` means `10 n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_passes: Option<usize>,
}

impl Default for SvrHyperParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            epsilon: 1.0,
            tolerance: 1e-3,
            max_passes: None,
        }
    }
}

impl SvrHyperParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::validation(format!("c must be > 0, got {}", self.c)));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::validation(format!(
                "epsilon must be >= 0, got {}",
                self.epsilon
            )));
        }
        if !(self.tolerance > 0.0 && self.tolerance <= 0.1) {
            return Err(Error::validation(format!(
                "tolerance must be in (0, 0.1], got {}",
                self.tolerance
            )));
        }
        if self.max_passes == Some(0) {
            return Err(Error::validation("max_passes must be positive"));
        }
        Ok(())
    }
}

/// A trained model plus solver diagnostics.
#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub model: SvrModel,
    /// Dual objective at the solution, maximization form.
    pub objective: f64,
    pub iterations: usize,
    /// Final `max_up - min_down` KKT gap.
    pub kkt_gap: f64,
}

/// Trains on the listed record ids of `ds`, in the order given.
pub fn train<S: AsRef<str>>(
    ds: &Dataset,
    ids: &[S],
    kernel: KernelSpec,
    params: SvrHyperParams,
) -> Result<SvrModel> {
    train_detailed(ds, ids, kernel, params).map(|s| s.model)
}

pub fn train_detailed<S: AsRef<str>>(
    ds: &Dataset,
    ids: &[S],
    kernel: KernelSpec,
    params: SvrHyperParams,
) -> Result<TrainSummary> {
    let mut names = Vec::with_capacity(ids.len());
    let mut xs = Vec::with_capacity(ids.len());
    let mut ys = Vec::with_capacity(ids.len());
    for id in ids {
        let idx = ds.require(id.as_ref())?;
        names.push(id.as_ref().to_string());
        xs.push(ds.feature(idx));
        ys.push(ds.record(idx).bmi);
    }
    let mut summary = fit(&names, &xs, &ys, kernel, params)?;
    summary.model.normalize = ds.normalized();
    Ok(summary)
}

/// Trains on raw feature rows. The returned model has `normalize = false`.
pub fn fit(
    ids: &[String],
    xs: &[&[f64]],
    ys: &[f64],
    kernel: KernelSpec,
    params: SvrHyperParams,
) -> Result<TrainSummary> {
    fit_with_cache_limit(ids, xs, ys, kernel, params, DENSE_CACHE_LIMIT)
}

pub(crate) fn fit_with_cache_limit(
    ids: &[String],
    xs: &[&[f64]],
    ys: &[f64],
    kernel: KernelSpec,
    params: SvrHyperParams,
    dense_limit: usize,
) -> Result<TrainSummary> {
    kernel.validate()?;
    params.validate()?;
    let n = xs.len();
    if n < 2 {
        return Err(Error::validation(format!(
            "need at least 2 training points, got {n}"
        )));
    }
    if ids.len() != n || ys.len() != n {
        return Err(Error::validation(
            "ids, features and targets differ in length",
        ));
    }
    let dim = xs[0].len();
    if dim == 0 || xs.iter().any(|x| x.len() != dim) {
        return Err(Error::validation(
            "training vectors must share a positive dim",
        ));
    }
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::validation("non-finite training target"));
    }

    let mut cache = KernelCache::new(kernel, xs, dense_limit);
    let sol = Solver::new(ys, &params, &mut cache).run()?;

    let support = (0..n)
        .filter(|&i| sol.beta[i] != 0.0)
        .map(|i| SupportVector {
            id: ids[i].clone(),
            coeff: sol.beta[i],
            vec: xs[i].to_vec(),
        })
        .collect();

    Ok(TrainSummary {
        model: SvrModel {
            kernel,
            params,
            normalize: false,
            dim,
            bias: sol.bias,
            support,
        },
        objective: sol.objective,
        iterations: sol.iterations,
        kkt_gap: sol.gap,
    })
}

/// Dual objective (maximization form) of coefficients `beta`:
/// `-0.5 b'Kb - eps sum|b| + z'b`.
pub fn dual_objective(
    kernel: &KernelSpec,
    xs: &[&[f64]],
    ys: &[f64],
    epsilon: f64,
    beta: &[f64],
) -> f64 {
    let n = xs.len();
    let mut quad = 0.0;
    for i in 0..n {
        if beta[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            quad += beta[i] * beta[j] * kernel.apply(xs[i], xs[j]);
        }
    }
    let lin: f64 = (0..n)
        .map(|i| ys[i] * beta[i] - epsilon * beta[i].abs())
        .sum();
    -0.5 * quad + lin
}

struct Solution {
    beta: Vec<f64>,
    bias: f64,
    objective: f64,
    iterations: usize,
    gap: f64,
}

struct Solver<'c, 'a> {
    n: usize,
    c: f64,
    tolerance: f64,
    max_iter: usize,
    alpha: Vec<f64>,
    grad: Vec<f64>,
    linear: Vec<f64>,
    cache: &'c mut KernelCache<'a>,
    row_i: Vec<f64>,
}

impl<'c, 'a> Solver<'c, 'a> {
    fn new(ys: &[f64], params: &SvrHyperParams, cache: &'c mut KernelCache<'a>) -> Self {
        let n = ys.len();
        let linear: Vec<f64> = ys
            .iter()
            .map(|z| params.epsilon - z)
            .chain(ys.iter().map(|z| params.epsilon + z))
            .collect();
        let passes = params.max_passes.unwrap_or(10 * n);
        Self {
            n,
            c: params.c,
            tolerance: params.tolerance,
            max_iter: passes.saturating_mul(2 * n),
            alpha: vec![0.0; 2 * n],
            grad: linear.clone(),
            linear,
            cache,
            row_i: vec![0.0; n],
        }
    }

    #[inline]
    fn sign(&self, t: usize) -> f64 {
        if t < self.n {
            1.0
        } else {
            -1.0
        }
    }

    #[inline]
    fn at_upper(&self, t: usize) -> bool {
        self.alpha[t] >= self.c
    }

    #[inline]
    fn at_lower(&self, t: usize) -> bool {
        self.alpha[t] <= 0.0
    }

    /// Returns `(i, j, gap)`, or `None` for `j` when no descent pair exists.
    fn select_pair(&mut self) -> (Option<(usize, usize)>, f64) {
        let l = 2 * self.n;
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..l {
            let v = if t < self.n {
                (!self.at_upper(t)).then(|| -self.grad[t])
            } else {
                (!self.at_lower(t)).then(|| self.grad[t])
            };
            if let Some(v) = v {
                if v > gmax {
                    gmax = v;
                    i_sel = Some(t);
                }
            }
        }
        let Some(i) = i_sel else {
            return (None, 0.0);
        };

        let pi = i % self.n;
        self.row_i.copy_from_slice(self.cache.row(pi));
        let diag = self.cache.diag();
        let qd_i = diag[pi];

        let mut gmax2 = f64::NEG_INFINITY;
        let mut best = f64::INFINITY;
        let mut j_sel = None;
        for t in 0..l {
            let pt = t % self.n;
            let (movable, ygrad) = if t < self.n {
                (!self.at_lower(t), self.grad[t])
            } else {
                (!self.at_upper(t), -self.grad[t])
            };
            if !movable {
                continue;
            }
            gmax2 = gmax2.max(ygrad);
            let b = gmax + ygrad;
            if b > 0.0 {
                let mut a = qd_i + diag[pt] - 2.0 * self.row_i[pt];
                if a <= 0.0 {
                    a = TAU;
                }
                let gain = -(b * b) / a;
                if gain < best {
                    best = gain;
                    j_sel = Some(t);
                }
            }
        }
        let gap = gmax + gmax2;
        if gap < self.tolerance {
            return (None, gap);
        }
        (j_sel.map(|j| (i, j)), gap)
    }

    fn update_pair(&mut self, i: usize, j: usize) {
        let (pi, pj) = (i % self.n, j % self.n);
        let (yi, yj) = (self.sign(i), self.sign(j));
        let c = self.c;
        let k_ij = self.row_i[pj];
        let diag = self.cache.diag();
        let mut quad = diag[pi] + diag[pj] - 2.0 * k_ij;
        if quad <= 0.0 {
            quad = TAU;
        }
        let (old_i, old_j) = (self.alpha[i], self.alpha[j]);
        let (mut ai, mut aj) = (old_i, old_j);

        if yi != yj {
            let delta = (-self.grad[i] - self.grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            // both boxes are [0, C]
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let delta = (self.grad[i] - self.grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        self.alpha[i] = ai;
        self.alpha[j] = aj;

        // G[t] += Q[t][i] dai + Q[t][j] daj, with Q[t][s] = y_t y_s K
        let dai = (ai - old_i) * yi;
        let daj = (aj - old_j) * yj;
        let row_j = self.cache.row(pj);
        let n = self.n;
        for t in 0..2 * n {
            let pt = t % n;
            let yt = if t < n { 1.0 } else { -1.0 };
            self.grad[t] += yt * (self.row_i[pt] * dai + row_j[pt] * daj);
        }
    }

    fn bias(&self) -> f64 {
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut free, mut sum) = (0usize, 0.0);
        for t in 0..2 * self.n {
            let y = self.sign(t);
            let yg = y * self.grad[t];
            if self.at_upper(t) {
                if y < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if self.at_lower(t) {
                if y > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                free += 1;
                sum += yg;
            }
        }
        let rho = if free > 0 {
            sum / free as f64
        } else {
            0.5 * (ub + lb)
        };
        -rho
    }

    fn run(mut self) -> Result<Solution> {
        let mut iterations = 0;
        let gap = loop {
            let (pair, gap) = self.select_pair();
            let Some((i, j)) = pair else {
                break gap;
            };
            if iterations >= self.max_iter {
                return Err(Error::Convergence {
                    iterations,
                    max_violation: gap,
                });
            }
            self.update_pair(i, j);
            iterations += 1;
        };

        let objective = -0.5
            * self
                .alpha
                .iter()
                .zip(self.grad.iter().zip(&self.linear))
                .map(|(a, (g, p))| a * (g + p))
                .sum::<f64>();
        let n = self.n;
        let beta = (0..n).map(|i| self.alpha[i] - self.alpha[i + n]).collect();
        Ok(Solution {
            beta,
            bias: self.bias(),
            objective,
            iterations,
            gap,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("r{i}")).collect()
    }

    #[test]
    fn constant_targets_fit_inside_tube() {
        let data: Vec<Vec<f64>> = (0..6)
            .map(|i| vec![i as f64, (i * i) as f64 * 0.1])
            .collect();
        let xs: Vec<&[f64]> = data.iter().map(|v| v.as_slice()).collect();
        let ys = vec![30.0; 6];
        let s = fit(
            &ids(6),
            &xs,
            &ys,
            KernelSpec::linear(),
            SvrHyperParams::default(),
        )
        .unwrap();
        assert!(s.model.support.is_empty());
        assert_eq!(s.model.bias, 30.0);
        assert_eq!(s.iterations, 0);
        assert_eq!(s.model.predict(&[100.0, -3.0]).unwrap(), 30.0);
    }

    #[test]
    fn too_few_points() {
        let x = [1.0];
        let xs: Vec<&[f64]> = vec![&x];
        let err = fit(
            &ids(1),
            &xs,
            &[1.0],
            KernelSpec::linear(),
            SvrHyperParams::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn iteration_cap_reports_violation() {
        let data: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![(i as f64 * 0.37).sin(), (i as f64).cos()])
            .collect();
        let xs: Vec<&[f64]> = data.iter().map(|v| v.as_slice()).collect();
        let ys: Vec<f64> = (0..30).map(|i| 20.0 + (i % 7) as f64 * 3.0).collect();
        let params = SvrHyperParams {
            c: 100.0,
            epsilon: 0.1,
            tolerance: 1e-9,
            max_passes: Some(1),
        };
        match fit(&ids(30), &xs, &ys, KernelSpec::rbf(1.0).unwrap(), params).unwrap_err() {
            Error::Convergence {
                iterations,
                max_violation,
            } => {
                assert_eq!(iterations, 60);
                assert!(max_violation >= 1e-9);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn lru_path_matches_dense() {
        let data: Vec<Vec<f64>> = (0..25)
            .map(|i| {
                vec![
                    (i as f64 * 0.7).sin(),
                    (i as f64 * 0.2).cos(),
                    0.1 * i as f64,
                ]
            })
            .collect();
        let xs: Vec<&[f64]> = data.iter().map(|v| v.as_slice()).collect();
        let ys: Vec<f64> = data
            .iter()
            .map(|v| 25.0 + 4.0 * v[0] - 2.0 * v[2])
            .collect();
        let k = KernelSpec::rbf(0.8).unwrap();
        let p = SvrHyperParams {
            c: 10.0,
            epsilon: 0.2,
            tolerance: 1e-6,
            max_passes: None,
        };
        let a = fit_with_cache_limit(&ids(25), &xs, &ys, k, p, DENSE_CACHE_LIMIT).unwrap();
        let b = fit_with_cache_limit(&ids(25), &xs, &ys, k, p, 3).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn objective_matches_beta_form() {
        let data: Vec<Vec<f64>> = (0..15)
            .map(|i| vec![(i as f64).sin(), (i as f64 * 1.3).cos()])
            .collect();
        let xs: Vec<&[f64]> = data.iter().map(|v| v.as_slice()).collect();
        let ys: Vec<f64> = data.iter().map(|v| 30.0 + 5.0 * v[0] + v[1]).collect();
        let p = SvrHyperParams {
            c: 5.0,
            epsilon: 0.3,
            tolerance: 1e-8,
            max_passes: None,
        };
        let k = KernelSpec::linear();
        let s = fit(&ids(15), &xs, &ys, k, p).unwrap();
        let mut beta = vec![0.0; 15];
        for sv in &s.model.support {
            beta[sv.id[1..].parse::<usize>().unwrap()] = sv.coeff;
        }
        let w = dual_objective(&k, &xs, &ys, 0.3, &beta);
        assert!((w - s.objective).abs() < 1e-9 * w.abs().max(1.0));
    }

    #[test]
    fn hyperparam_validation() {
        let ok = SvrHyperParams::default();
        assert!(ok.validate().is_ok());
        assert!(SvrHyperParams { c: 0.0, ..ok }.validate().is_err());
        assert!(SvrHyperParams {
            epsilon: -1.0,
            ..ok
        }
        .validate()
        .is_err());
        assert!(SvrHyperParams {
            tolerance: 0.5,
            ..ok
        }
        .validate()
        .is_err());
        assert!(SvrHyperParams {
            tolerance: 0.0,
            ..ok
        }
        .validate()
        .is_err());
        assert!(SvrHyperParams {
            max_passes: Some(0),
            ..ok
        }
        .validate()
        .is_err());
    }
}
