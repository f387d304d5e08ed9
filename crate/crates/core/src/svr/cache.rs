//! Kernel rows over the training points.
//!
//! Up to [`DENSE_CACHE_LIMIT`] points the full matrix is computed once;
//! above that rows are computed on demand and kept in a bounded LRU.
//! Both paths compute every entry with the same scalar routine, so results
//! do not depend on which one is used.

use std::collections::HashMap;

use rayon::prelude::*;

use super::KernelSpec;

pub(crate) const DENSE_CACHE_LIMIT: usize = 8192;

/// Memory budget for the LRU path.
const LRU_BUDGET_BYTES: usize = 512 << 20;

pub(crate) struct KernelCache<'a> {
    kernel: KernelSpec,
    points: &'a [&'a [f64]],
    diag: Vec<f64>,
    store: Store,
}

enum Store {
    Dense(Vec<f64>),
    Lru {
        capacity: usize,
        clock: u64,
        rows: HashMap<usize, (u64, Vec<f64>)>,
    },
}

impl<'a> KernelCache<'a> {
    pub(crate) fn new(kernel: KernelSpec, points: &'a [&'a [f64]], dense_limit: usize) -> Self {
        let n = points.len();
        let diag = points.iter().map(|x| kernel.apply(x, x)).collect();
        let store = if n <= dense_limit {
            let mut m = vec![0.0; n * n];
            m.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
                for (j, slot) in row.iter_mut().enumerate() {
                    *slot = kernel.apply(points[i], points[j]);
                }
            });
            Store::Dense(m)
        } else {
            Store::Lru {
                capacity: (LRU_BUDGET_BYTES / (8 * n.max(1))).max(2),
                clock: 0,
                rows: HashMap::new(),
            }
        };
        Self {
            kernel,
            points,
            diag,
            store,
        }
    }

    pub(crate) fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub(crate) fn row(&mut self, i: usize) -> &[f64] {
        let n = self.points.len();
        match &mut self.store {
            Store::Dense(m) => &m[i * n..(i + 1) * n],
            Store::Lru {
                capacity,
                clock,
                rows,
            } => {
                *clock += 1;
                let now = *clock;
                if !rows.contains_key(&i) {
                    if rows.len() >= *capacity {
                        let oldest = rows
                            .iter()
                            .min_by_key(|(_, (used, _))| *used)
                            .map(|(k, _)| *k)
                            .expect("capacity >= 2");
                        rows.remove(&oldest);
                    }
                    let (kernel, points) = (self.kernel, self.points);
                    let row: Vec<f64> = (0..n)
                        .into_par_iter()
                        .map(|j| kernel.apply(points[i], points[j]))
                        .collect();
                    rows.insert(i, (now, row));
                }
                let entry = rows.get_mut(&i).expect("just inserted");
                entry.0 = now;
                &entry.1
            }
        }
    }

    #[cfg(test)]
    pub(crate) fn is_dense(&self) -> bool {
        matches!(self.store, Store::Dense(_))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_and_lru_agree() {
        let data: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![(i as f64).sin(), (i as f64 * 0.3).cos(), i as f64 / 7.0])
            .collect();
        let pts: Vec<&[f64]> = data.iter().map(|v| v.as_slice()).collect();
        let k = KernelSpec::rbf(0.7).unwrap();
        let mut dense = KernelCache::new(k, &pts, DENSE_CACHE_LIMIT);
        let mut lru = KernelCache::new(k, &pts, 4);
        assert!(dense.is_dense() && !lru.is_dense());
        for i in [3, 0, 19, 3, 7, 0, 12, 19] {
            let a = dense.row(i).to_vec();
            let b = lru.row(i).to_vec();
            assert_eq!(a, b);
            assert_eq!(a[i], dense.diag()[i]);
        }
    }
}
