//! Finite-dimensional min-max check: every m-dimensional subspace has a
//! maximal Rayleigh quotient of at least λ_m, attained by the first m eigenvectors.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::EigenSet;
use crate::calculus::DiscreteOperator;
use crate::error::{Error, Result};
use crate::linalg::{generalized_eigen, DenseMatrix};
use crate::scalar::Real;

pub const MIN_MAX_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxEntry<T> {
    pub m: usize,
    pub lambda: T,
    /// Largest Rayleigh quotient on the span of the first m eigenvectors.
    pub attained: T,
    /// Smallest over the sampled subspaces of the largest Rayleigh quotient.
    pub min_sampled: T,
    /// Number of sampled subspaces whose maximum falls below `λ_m − tol`.
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxReport<T> {
    pub trials: usize,
    pub entries: Vec<MinMaxEntry<T>>,
}

impl<T: Real> MinMaxReport<T> {
    pub fn passed(&self) -> bool {
        let tol = T::lit(MIN_MAX_TOL);
        self.entries
            .iter()
            .all(|e| e.violations == 0 && (e.attained - e.lambda).abs() <= tol)
    }
}

/// Largest generalized Rayleigh quotient on the column span of `v` (n × m).
fn max_rayleigh<T: Real>(a: &DenseMatrix<T>, mass: T, v: &DenseMatrix<T>) -> Result<T> {
    let av = a.matmul(v);
    let vt = v.transpose();
    let small_a = vt.matmul(&av);
    let small_b = DenseMatrix::from_fn(v.cols(), v.cols(), |i, j| {
        mass * (0..v.rows()).fold(T::zero(), |acc, k| acc + v[(k, i)] * v[(k, j)])
    });
    let mut small_a = small_a;
    small_a.symmetrize();
    let eig = generalized_eigen(&small_a, &small_b)?;
    Ok(*eig.values.last().expect("nonempty subspace"))
}

/// Samples `trials` Gaussian random subspaces per dimension `m = 1..=len`.
///
/// Trials run in parallel; trial `t` of dimension `m` uses the ChaCha stream
/// `m · trials + t` of `seed`, so the report does not depend on scheduling.
pub fn courant_fischer_check<T: Real>(
    eigset: &EigenSet<T>,
    op: &DiscreteOperator<T>,
    trials: usize,
    seed: u64,
) -> Result<MinMaxReport<T>> {
    if eigset.p != T::lit(2.0) {
        return Err(Error::ParameterRange("min-max check needs a p = 2 eigenset".into()));
    }
    let a = op.stiffness();
    let n = op.dofs();
    let w = op.mass_weight();
    let tol = T::lit(MIN_MAX_TOL);
    let vectors: Vec<Vec<T>> = eigset.pairs.iter().map(|e| e.u.dofs()).collect();
    let mut entries = Vec::new();
    for m in 1..=eigset.len() {
        let lambda = eigset.pairs[m - 1].lambda;
        let basis = DenseMatrix::from_fn(n, m, |i, j| vectors[j][i]);
        let attained = max_rayleigh(a, w, &basis)?;
        let maxima: Vec<T> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream((m * trials + t) as u64);
                let data: Vec<T> = (0..n * m)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        T::lit(z)
                    })
                    .collect();
                let v = DenseMatrix::from_row_major(n, m, data)?;
                max_rayleigh(a, w, &v)
            })
            .collect::<Result<_>>()?;
        let min_sampled = maxima.iter().fold(T::infinity(), |acc, v| acc.min(*v));
        let violations = maxima.iter().filter(|v| **v < lambda - tol).count();
        entries.push(MinMaxEntry {
            m,
            lambda,
            attained,
            min_sampled,
            violations,
        });
    }
    Ok(MinMaxReport { trials, entries })
}
