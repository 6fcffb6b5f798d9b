//! Eigenpairs of the nonlocal p-Laplacian with the Dirichlet volume constraint.
//!
//! For p = 2 the generalized problem `A u = λ M u` is solved in full; for
//! p ≠ 2 only the first eigenpair is computed, by inverse power iteration.
//! Pairs are certified by the residual of
//! `M(u) = |u|^{p−2}u − (B(u)/α)(−Δ)_{ρ,p}u` on the level set `∫|∇_ρu|^p = αp`.

mod minmax;
mod store;
pub use store::{eigenfunction_file, MANIFEST_HEADER, MANIFEST_NAME};

pub use minmax::{courant_fischer_check, MinMaxEntry, MinMaxReport, MIN_MAX_TOL};

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculus::{DiscreteOperator, Field, Grid};
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::linalg::{lanczos_largest, symmetric_eigen, Cholesky, DenseMatrix};
use crate::scalar::Real;
use crate::solvers::{minimize_plap, ray_scale, spectral_operator, PLapOperator, PLapOptions};

/// Below this many degrees of freedom the linear eigenproblem is solved densely.
pub const DENSE_EIGEN_LIMIT: usize = 2000;
/// Relative residual accepted as an eigenpair certificate.
pub const CERTIFICATE_TOL: f64 = 1e-5;

/// Default level height α = 1/p, so the level set reads `∫|∇_ρu|^p = 1`.
pub fn default_alpha<T: Real>(p: T) -> T {
    p.recip()
}

/// Residual of `M(u)` at `u` rescaled onto the level set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport<T> {
    pub alpha: T,
    /// `(hⁿ Σ_Ω M_i²)^{1/2}`.
    pub norm: T,
    /// `norm` divided by the same norm of `|u|^{p−2}u`; independent of α.
    pub relative: T,
    pub rayleigh: T,
}

impl<T: Real> ResidualReport<T> {
    pub fn certified(&self) -> bool {
        self.relative <= T::lit(CERTIFICATE_TOL)
    }
}

#[derive(Debug, Clone)]
pub struct EigenPair<T: Real> {
    pub lambda: T,
    pub u: Field<T>,
    pub residual: ResidualReport<T>,
}

/// Eigenpairs ordered by eigenvalue, each normalized to `‖u‖_{L^p(Ω)} = 1`.
#[derive(Debug, Clone)]
pub struct EigenSet<T: Real> {
    pub p: T,
    pub pairs: Vec<EigenPair<T>>,
}

impl<T: Real> EigenSet<T> {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        self.pairs.iter().map(|e| e.lambda).collect()
    }
}

/// Sign convention: the first entry above 1e-3 of the maximum is positive.
fn fix_sign<T: Real>(v: &mut [T]) {
    let max = v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > T::lit(1e-3) * max) {
        if *first < T::zero() {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Eigenpair on the degrees of freedom of a gradient map.
#[derive(Debug, Clone)]
pub struct DofEigenPair<T> {
    pub lambda: T,
    pub x: Vec<T>,
    pub residual: ResidualReport<T>,
}

/// Smallest `m` eigenpairs of `A x = λ w x`, with `w xᵀx = 1` and signs fixed.
fn smallest_pairs<T: Real>(a: &DenseMatrix<T>, w: T, m: usize) -> Result<Vec<(T, Vec<T>)>> {
    let n = a.rows();
    if m == 0 || m > n {
        return Err(Error::TooManyEigenpairs {
            requested: m,
            available: n,
        });
    }
    let (values, vectors): (Vec<T>, Vec<Vec<T>>) = if n < DENSE_EIGEN_LIMIT {
        let scaled = DenseMatrix::from_fn(n, n, |i, j| a[(i, j)] / w);
        let eig = symmetric_eigen(&scaled)?;
        (0..m).map(|k| (eig.values[k], eig.vectors.column(k))).unzip()
    } else {
        let chol = Cholesky::new(a)?;
        // largest eigenvalues of w A⁻¹ are 1/λ for the smallest λ
        let (mu, vecs) = lanczos_largest(
            |x| chol.solve(x).into_iter().map(|v| v * w).collect(),
            n,
            m,
            T::lit(1e-12),
            (4 * m + 60).min(n),
            0x5eed,
        )?;
        (mu.into_iter().map(|v| v.recip()).collect(), vecs)
    };
    if let Some(bad) = values.iter().find(|v| !(**v > T::zero())) {
        return Err(Error::Divergent(format!("nonpositive eigenvalue {}", bad.as_f64())));
    }
    let inv_sqrt_w = w.sqrt().recip();
    Ok(values
        .into_iter()
        .zip(vectors)
        .map(|(lambda, mut v)| {
            let nv = crate::linalg::norm2(&v);
            v.iter_mut().for_each(|x| *x = *x * inv_sqrt_w / nv);
            fix_sign(&mut v);
            (lambda, v)
        })
        .collect())
}

/// Smallest `m` eigenpairs of `A u = λ hⁿ u`.
pub fn eigs_linear<T: Real>(op: &DiscreteOperator<T>, m: usize) -> Result<EigenSet<T>> {
    let plap = PLapOperator::new(Arc::new(op.gradient_map()), T::lit(2.0));
    let pairs = smallest_pairs(op.stiffness(), op.mass_weight(), m)?
        .into_iter()
        .map(|(lambda, v)| {
            let residual = eigen_residual_with(&plap, &v, default_alpha(T::lit(2.0)))?;
            Ok(EigenPair {
                lambda,
                u: Field::from_dofs(op.grid(), &v)?,
                residual,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EigenSet {
        p: T::lit(2.0),
        pairs,
    })
}

/// Smallest `m` eigenpairs of the p = 2 energy of any gradient map.
pub fn linear_eigenpairs<T: Real>(op: &PLapOperator<T>, m: usize) -> Result<Vec<DofEigenPair<T>>> {
    let op = op.with_exponent(T::lit(2.0));
    smallest_pairs(&op.stiffness(), op.mass_weight(), m)?
        .into_iter()
        .map(|(lambda, x)| {
            let residual = eigen_residual_with(&op, &x, default_alpha(T::lit(2.0)))?;
            Ok(DofEigenPair { lambda, x, residual })
        })
        .collect()
}

/// `‖∇_ρu‖^p_{L^p(ℝⁿ)} / ‖u‖^p_{L^p(Ω)}` with the spectral gradient.
pub fn rayleigh<T: Real>(u: &Field<T>, p: T, kernel: &Kernel<T>) -> Result<T> {
    let x = u.dofs();
    if x.iter().all(|v| *v == T::zero()) {
        return Err(Error::ZeroField);
    }
    let op = spectral_operator(u.grid(), kernel, p)?;
    Ok(op.rayleigh(&x))
}

/// Residual report for a field on the grid.
pub fn eigen_residual<T: Real>(u: &Field<T>, p: T, kernel: &Kernel<T>, alpha: T) -> Result<ResidualReport<T>> {
    let op = spectral_operator(u.grid(), kernel, p)?;
    eigen_residual_with(&op, &u.dofs(), alpha)
}

pub fn eigen_residual_with<T: Real>(op: &PLapOperator<T>, x: &[T], alpha: T) -> Result<ResidualReport<T>> {
    if !(alpha > T::zero()) {
        return Err(Error::ParameterRange("level height α must be positive".into()));
    }
    let p = op.p();
    let a = op.dirichlet_integral(x);
    if !(a > T::zero()) {
        return Err(Error::ZeroField);
    }
    let lam = (alpha * p / a).powf(p.recip());
    let y: Vec<T> = x.iter().map(|v| *v * lam).collect();
    let w = op.mass_weight();
    let big_b = op.lp_pow(&y) / p;
    let b: Vec<T> = y.iter().map(|v| signed_power(*v, p - T::one())).collect();
    let dual = op.apply(&y);
    let coef = big_b / alpha / w;
    let (mut r2, mut b2) = (T::zero(), T::zero());
    for (bi, di) in b.iter().zip(&dual) {
        let m = *bi - coef * *di;
        r2 = r2 + m * m;
        b2 = b2 + *bi * *bi;
    }
    let norm = (w * r2).sqrt();
    Ok(ResidualReport {
        alpha,
        norm,
        relative: norm / (w * b2).sqrt(),
        rayleigh: op.rayleigh(x),
    })
}

fn signed_power<T: Real>(v: T, e: T) -> T {
    if v == T::zero() {
        T::zero()
    } else {
        v.signum() * v.abs().powf(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseIterationOptions<T> {
    /// Stop when successive Rayleigh values differ by at most `tol` relative.
    pub tol: T,
    pub max_iter: usize,
    pub seed: u64,
    pub inner: PLapOptions<T>,
}

impl<T: Real> Default for InverseIterationOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-10),
            max_iter: 1000,
            seed: 1,
            inner: PLapOptions {
                gradient_tol: T::lit(1e-12),
                ..PLapOptions::default()
            },
        }
    }
}

/// First eigenpair from inverse power iteration on degrees of freedom.
#[derive(Debug, Clone)]
pub struct FirstEigen<T> {
    pub lambda: T,
    pub x: Vec<T>,
    pub residual: ResidualReport<T>,
    /// Rayleigh value of every iterate, starting with the random start.
    pub rayleigh_history: Vec<T>,
    pub iterations: usize,
}

/// Positive part of a seeded random vector, normalized in `L^p(Ω)`.
pub fn random_positive_start<T: Real>(op: &PLapOperator<T>, seed: u64) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = op.dofs();
    let mut x: Vec<T> = (0..n).map(|_| T::lit(rng.random_range(-1.0..1.0f64)).max(T::zero())).collect();
    if x.iter().all(|v| *v == T::zero()) {
        x = vec![T::one(); n];
    }
    let norm = op.lp_pow(&x).powf(op.p().recip());
    x.iter_mut().for_each(|v| *v = *v / norm);
    x
}

/// Inverse power iteration `(−Δ)_{ρ,p} v = |u_k|^{p−2}u_k`, `u_{k+1} = v/‖v‖_p`.
pub fn inverse_iteration<T: Real>(
    op: &PLapOperator<T>,
    start: Option<&[T]>,
    opts: &InverseIterationOptions<T>,
) -> Result<FirstEigen<T>> {
    let p = op.p();
    if !(p > T::one()) || !p.is_finite() {
        return Err(Error::ParameterRange(format!("p = {} must lie in (1, ∞)", p.as_f64())));
    }
    let w = op.mass_weight();
    let mut u = match start {
        Some(s) => {
            let norm = op.lp_pow(s).powf(p.recip());
            if !(norm > T::zero()) {
                return Err(Error::ZeroField);
            }
            s.iter().map(|v| *v / norm).collect()
        }
        None => random_positive_start(op, opts.seed),
    };
    let mut r = op.rayleigh(&u);
    let mut history = vec![r];
    for it in 1..=opts.max_iter {
        let rhs: Vec<T> = u.iter().map(|v| w * signed_power(*v, p - T::one())).collect();
        let init: Vec<T> = match ray_scale(op, &u, &rhs) {
            Some(c) => u.iter().map(|v| *v * c).collect(),
            None => u.clone(),
        };
        let run = minimize_plap(op, &rhs, Some(&init), &opts.inner)?;
        let norm = op.lp_pow(&run.x).powf(p.recip());
        if !(norm > T::zero()) {
            return Err(Error::ZeroField);
        }
        u = run.x.into_iter().map(|v| v / norm).collect();
        let next = op.rayleigh(&u);
        history.push(next);
        let done = (next - r).abs() <= opts.tol * r;
        r = next;
        if done {
            fix_sign(&mut u);
            let residual = eigen_residual_with(op, &u, default_alpha(p))?;
            return Ok(FirstEigen {
                lambda: r,
                x: u,
                residual,
                rayleigh_history: history,
                iterations: it,
            });
        }
    }
    Err(Error::NoConvergence {
        what: "inverse power iteration",
        iterations: opts.max_iter,
    })
}

/// First eigenpair `(λ₁, u₁)` with `‖u₁‖_{L^p(Ω)} = 1` and its residual report.
pub fn first_eig_p<T: Real>(
    grid: &Arc<Grid<T>>,
    kernel: &Kernel<T>,
    p: T,
    tol: T,
) -> Result<(T, Field<T>, ResidualReport<T>)> {
    let op = spectral_operator(grid, kernel, p)?;
    let opts = InverseIterationOptions {
        tol,
        ..InverseIterationOptions::default()
    };
    let res = inverse_iteration(&op, None, &opts)?;
    Ok((res.lambda, Field::from_dofs(grid, &res.x)?, res.residual))
}

/// Single first eigenpair packaged as an [`EigenSet`].
pub fn first_eig_set<T: Real>(op: &PLapOperator<T>, grid: &Arc<Grid<T>>, opts: &InverseIterationOptions<T>) -> Result<EigenSet<T>> {
    let res = inverse_iteration(op, None, opts)?;
    Ok(EigenSet {
        p: op.p(),
        pairs: vec![EigenPair {
            lambda: res.lambda,
            u: Field::from_dofs(grid, &res.x)?,
            residual: res.residual,
        }],
    })
}
