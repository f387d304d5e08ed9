//! Shared test helpers: a brute-force QP oracle for the epsilon-SVR dual and
//! random instance generation.
//!
//! The oracle solves the n-variable form
//!   min 0.5 b'Kb - z'b + eps |b|_1   s.t.  sum(b) = 0,  -C <= b <= C
//! by accelerated proximal gradient with function-value restarts. The prox
//! step soft-thresholds, clips to the box, and finds the equality multiplier
//! by bisection. It shares no code with the library solver.
#![allow(dead_code)]

use f2b_core::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kern {
    Linear,
    Rbf(f64),
}

impl Kern {
    pub fn eval(self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Kern::Linear => x.iter().zip(y).map(|(a, b)| a * b).sum(),
            Kern::Rbf(g) => {
                (-g * x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()).exp()
            }
        }
    }

    pub fn spec(self) -> f2b_core::KernelSpec {
        match self {
            Kern::Linear => f2b_core::KernelSpec::linear(),
            Kern::Rbf(g) => f2b_core::KernelSpec::rbf(g).unwrap(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub beta: Vec<f64>,
    pub bias: f64,
    /// Dual objective in maximization form.
    pub objective: f64,
    pub iterations: usize,
}

pub fn gram(k: Kern, xs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    xs.iter()
        .map(|a| xs.iter().map(|b| k.eval(a, b)).collect())
        .collect()
}

fn matvec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Maximization-form dual objective for coefficients `beta`.
pub fn objective(kmat: &[Vec<f64>], z: &[f64], eps: f64, beta: &[f64]) -> f64 {
    let kb = matvec(kmat, beta);
    let quad: f64 = beta.iter().zip(&kb).map(|(a, b)| a * b).sum();
    let lin: f64 = z.iter().zip(beta).map(|(a, b)| a * b).sum();
    let l1: f64 = beta.iter().map(|b| b.abs()).sum();
    -0.5 * quad + lin - eps * l1
}

fn prox(v: &[f64], t: f64, c: f64) -> Vec<f64> {
    let at = |lambda: f64| -> Vec<f64> {
        v.iter()
            .map(|&vi| {
                let u = vi - lambda;
                let s = u.signum() * (u.abs() - t).max(0.0);
                s.clamp(-c, c)
            })
            .collect()
    };
    let sum = |b: &[f64]| b.iter().sum::<f64>();
    let span = v.iter().fold(0.0f64, |m, x| m.max(x.abs())) + t + c + 1.0;
    let (mut lo, mut hi) = (-span, span);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if sum(&at(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

fn largest_eigenvalue(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 1e-3).collect();
    let mut lambda = 0.0;
    for _ in 0..500 {
        let w = matvec(m, &v);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = norm / v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v = w.into_iter().map(|x| x / norm).collect();
    }
    lambda
}

/// Solves the dual to (near) machine precision; `bias` follows the KKT
/// conditions: the mean over free coefficients, otherwise the midpoint of
/// the feasible interval.
pub fn solve_qp(k: Kern, xs: &[Vec<f64>], z: &[f64], c: f64, eps: f64) -> OracleSolution {
    let n = xs.len();
    let kmat = gram(k, xs);
    let lip = largest_eigenvalue(&kmat) * 1.01 + 1e-12;
    let step = 1.0 / lip;
    let primal = |b: &[f64]| -objective(&kmat, z, eps, b);

    let mut x = vec![0.0; n];
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut fx = primal(&x);
    let mut iterations = 0;
    // stop once the objective has not improved measurably for a while
    let mut best = fx;
    let mut since_best = 0;
    while iterations < 2_000_000 && since_best < 2_000 {
        iterations += 1;
        since_best += 1;
        let g = matvec(&kmat, &y);
        let v: Vec<f64> = y
            .iter()
            .zip(&g)
            .zip(z)
            .map(|((yi, gi), zi)| yi - step * (gi - zi))
            .collect();
        let xn = prox(&v, step * eps, c);
        let fxn = primal(&xn);
        if fxn > fx {
            // restart momentum from the last iterate
            y = x.clone();
            t = 1.0;
            continue;
        }
        let tn = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        y = xn
            .iter()
            .zip(&x)
            .map(|(a, b)| a + (t - 1.0) / tn * (a - b))
            .collect();
        t = tn;
        x = xn;
        fx = fxn;
        if fx < best - 1e-15 * best.abs().max(1.0) {
            best = fx;
            since_best = 0;
        }
    }

    let kb = matvec(&kmat, &x);
    let tol = 1e-9 * c.max(1.0);
    let mut free = Vec::new();
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..n {
        let base = z[i] - kb[i];
        let b = x[i];
        if b.abs() <= tol {
            lo = lo.max(base - eps);
            hi = hi.min(base + eps);
        } else if b >= c - tol {
            hi = hi.min(base - eps);
        } else if b <= -c + tol {
            lo = lo.max(base + eps);
        } else {
            free.push(base - eps * b.signum());
        }
    }
    let bias = if !free.is_empty() {
        free.iter().sum::<f64>() / free.len() as f64
    } else {
        0.5 * (lo + hi)
    };
    OracleSolution {
        objective: objective(&kmat, z, eps, &x),
        beta: x,
        bias,
        iterations,
    }
}

pub fn oracle_predict(k: Kern, xs: &[Vec<f64>], sol: &OracleSolution, q: &[f64]) -> f64 {
    xs.iter()
        .zip(&sol.beta)
        .map(|(x, b)| b * k.eval(x, q))
        .sum::<f64>()
        + sol.bias
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub kern: Kern,
    pub xs: Vec<Vec<f64>>,
    pub ys: Vec<f64>,
    pub held_out: Vec<Vec<f64>>,
    pub c: f64,
    pub eps: f64,
}

/// A random regression problem: `n` in 5..=25, dim in 1..=5, either kernel.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = SplitMix64::new(seed);
    let n = 5 + rng.below(21) as usize;
    let dim = 1 + rng.below(5) as usize;
    let kern = if rng.coin() {
        Kern::Linear
    } else {
        Kern::Rbf(0.1 + 0.9 * rng.uniform())
    };
    let point = |rng: &mut SplitMix64| (0..dim).map(|_| rng.gaussian()).collect::<Vec<f64>>();
    let w = point(&mut rng);
    let xs: Vec<Vec<f64>> = (0..n).map(|_| point(&mut rng)).collect();
    let ys = xs
        .iter()
        .map(|x| 25.0 + 3.0 * x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + rng.gaussian())
        .collect();
    let held_out = (0..10).map(|_| point(&mut rng)).collect();
    let c = [0.5, 2.0, 10.0, 50.0][rng.below(4) as usize];
    let eps = 0.05 + 0.5 * rng.uniform();
    Instance {
        kern,
        xs,
        ys,
        held_out,
        c,
        eps,
    }
}

pub fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("r{i:03}")).collect()
}

/// Dense coefficient vector of a model trained on ids from [`ids`].
pub fn beta_of(model: &f2b_core::SvrModel, n: usize) -> Vec<f64> {
    let mut b = vec![0.0; n];
    for sv in &model.support {
        let i: usize = sv.id[1..].parse().unwrap();
        b[i] = sv.coeff;
    }
    b
}

pub fn rows(xs: &[Vec<f64>]) -> Vec<&[f64]> {
    xs.iter().map(Vec::as_slice).collect()
}
