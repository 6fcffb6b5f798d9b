//! The anisotropic linear problem `−div_ρ(A ∇_ρu) + b u = f` with the
//! Dirichlet volume constraint.

use std::sync::Arc;

use rayon::prelude::*;

use super::operator::weighted_cross_gram;
use crate::calculus::{assemble, Field, GradientMap, Grid, SpectralGradient, SpectralPlan};
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::linalg::{norm2, pcg, Cholesky, DenseMatrix};
use crate::scalar::Real;

/// Below this many degrees of freedom the system is factored directly.
pub const DIRECT_DOF_LIMIT: usize = 4000;
pub const LINEAR_RESIDUAL_TOL: f64 = 1e-10;

/// Symmetric coefficient `A(x)`, sampled at every box node as `[a11, a12, a22]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient<T> {
    Identity,
    Sampled(Vec<[T; 3]>),
}

impl<T: Real> Coefficient<T> {
    pub fn from_fn(grid: &Grid<T>, f: impl Fn(&[T]) -> [T; 3]) -> Self {
        let dim = grid.dim();
        Coefficient::Sampled((0..grid.len()).map(|i| f(&grid.node(i)[..dim])).collect())
    }

    /// Scalar multiple of the identity, `a(x) I`.
    pub fn scalar_fn(grid: &Grid<T>, f: impl Fn(&[T]) -> T) -> Self {
        Self::from_fn(grid, |x| {
            let a = f(x);
            [a, T::zero(), a]
        })
    }

    fn blocks(&self, samples: usize) -> Vec<[T; 3]> {
        match self {
            Coefficient::Identity => vec![[T::one(), T::zero(), T::one()]; samples],
            Coefficient::Sampled(v) => v.clone(),
        }
    }

    /// Smallest eigenvalue over the samples.
    pub fn min_eigenvalue(&self, dim: usize) -> T {
        match self {
            Coefficient::Identity => T::one(),
            Coefficient::Sampled(v) => v.iter().fold(T::infinity(), |m, b| {
                let e = if dim == 1 {
                    b[0]
                } else {
                    let mean = (b[0] + b[2]) * T::lit(0.5);
                    let rad = ((b[0] - b[2]) * T::lit(0.5)).hypot(b[1]);
                    mean - rad
                };
                m.min(e)
            }),
        }
    }
}

/// Data `(A, b, f)` on a grid.
#[derive(Debug, Clone)]
pub struct LinearProblem<T: Real> {
    grid: Arc<Grid<T>>,
    kernel: Kernel<T>,
    coefficient: Coefficient<T>,
    /// Zero-order coefficient on the degrees of freedom.
    zero_order: Option<Vec<T>>,
    rhs: Field<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearMethod {
    Cholesky,
    ConjugateGradient,
}

#[derive(Debug, Clone)]
pub struct LinearSolution<T: Real> {
    pub u: Field<T>,
    pub relative_residual: T,
    pub method: LinearMethod,
    pub iterations: usize,
}

impl<T: Real> LinearProblem<T> {
    /// `A = I`, `b = 0`.
    pub fn new(grid: &Arc<Grid<T>>, kernel: &Kernel<T>, rhs: Field<T>) -> Result<Self> {
        if !Arc::ptr_eq(rhs.grid(), grid) && **rhs.grid() != **grid {
            return Err(Error::Shape("right-hand side lives on another grid".into()));
        }
        Ok(Self {
            grid: grid.clone(),
            kernel: kernel.clone(),
            coefficient: Coefficient::Identity,
            zero_order: None,
            rhs,
        })
    }

    pub fn with_coefficient(mut self, a: Coefficient<T>) -> Result<Self> {
        if let Coefficient::Sampled(v) = &a {
            if v.len() != self.grid.len() {
                return Err(Error::Shape("coefficient must be sampled at every node".into()));
            }
        }
        self.coefficient = a;
        Ok(self)
    }

    /// Zero-order coefficient `b`, read on the nodes of Ω.
    pub fn with_zero_order(mut self, b: &Field<T>) -> Result<Self> {
        b.check_same_grid(&self.rhs)?;
        self.zero_order = Some(b.dofs());
        Ok(self)
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn kernel(&self) -> &Kernel<T> {
        &self.kernel
    }

    pub fn rhs(&self) -> &Field<T> {
        &self.rhs
    }

    pub fn coefficient(&self) -> &Coefficient<T> {
        &self.coefficient
    }

    /// Checks `A ≥ C₁ > 0` and `b ≥ c₁ > 0` or `b ≡ 0`; returns the sampled `C₁`.
    pub fn check_ellipticity(&self) -> Result<T> {
        let c = self.coefficient.min_eigenvalue(self.grid.dim());
        if !(c > T::zero()) {
            return Err(Error::Ellipticity(c.as_f64()));
        }
        if let Some(b) = &self.zero_order {
            let all_zero = b.iter().all(|v| *v == T::zero());
            let min = b.iter().fold(T::infinity(), |m, v| m.min(*v));
            if !all_zero && !(min > T::zero()) {
                return Err(Error::ParameterRange(format!(
                    "zero-order coefficient must be positive or identically zero (min {})",
                    min.as_f64()
                )));
            }
        }
        Ok(c)
    }

    fn map(&self) -> Result<SpectralGradient<T>> {
        let plan = Arc::new(SpectralPlan::new(&self.grid, &self.kernel)?);
        SpectralGradient::new(&self.grid, &plan)
    }

    /// System matrix of `a(u, v) = ∫A∇_ρu·∇_ρv + ∫b uv` on the degrees of freedom.
    pub fn system_matrix(&self) -> Result<DenseMatrix<T>> {
        let w = self.grid.cell_volume();
        let mut m = match &self.coefficient {
            Coefficient::Identity => assemble(&self.grid, &self.kernel)?.stiffness().clone(),
            Coefficient::Sampled(blocks) => {
                let g = self.map()?.matrix();
                weighted_cross_gram(&g, self.grid.dim(), blocks, w)
            }
        };
        if let Some(b) = &self.zero_order {
            for (i, v) in b.iter().enumerate() {
                m[(i, i)] = m[(i, i)] + w * *v;
            }
        }
        Ok(m)
    }

    /// Strong form `(A_h u)/hⁿ` of the discrete operator, zero outside Ω.
    pub fn apply(&self, u: &Field<T>) -> Result<Field<T>> {
        u.check_same_grid(&self.rhs)?;
        let y = self.system_matrix()?.matvec(&u.dofs());
        let w = self.grid.cell_volume();
        Field::from_dofs(&self.grid, &y.into_iter().map(|v| v / w).collect::<Vec<_>>())
    }

    fn apply_matrix_free(&self, map: &SpectralGradient<T>, blocks: &[[T; 3]], x: &[T]) -> Vec<T> {
        let w = self.grid.cell_volume();
        let s = map.samples();
        let g = map.apply(x);
        let mut ag = vec![T::zero(); g.len()];
        for (k, b) in blocks.iter().enumerate() {
            if self.grid.dim() == 1 {
                ag[k] = b[0] * g[k];
            } else {
                ag[k] = b[0] * g[k] + b[1] * g[s + k];
                ag[s + k] = b[1] * g[k] + b[2] * g[s + k];
            }
        }
        let mut y: Vec<T> = map.apply_transpose(&ag).into_iter().map(|v| v * w).collect();
        if let Some(b) = &self.zero_order {
            for (yi, bi) in y.iter_mut().zip(b) {
                *yi = *yi + w * *bi;
            }
        }
        y
    }

    /// Exact diagonal of the system matrix from the gradient impulse response.
    fn diagonal(&self, plan: &SpectralPlan<T>, blocks: &[[T; 3]]) -> Vec<T> {
        let imp = plan.impulse_response();
        let [nx, ny] = self.grid.shape();
        let w = self.grid.cell_volume();
        let dim = self.grid.dim();
        let mut d: Vec<T> = self
            .grid
            .dofs()
            .par_iter()
            .map(|&i| {
                let (ix, iy) = (i % nx, i / nx);
                let mut acc = T::zero();
                for (k, b) in blocks.iter().enumerate() {
                    let (kx, ky) = (k % nx, k / nx);
                    let sft = (kx + nx - ix) % nx + nx * ((ky + ny - iy) % ny);
                    let gx = imp[0][sft];
                    acc = acc
                        + if dim == 1 {
                            b[0] * gx * gx
                        } else {
                            let gy = imp[1][sft];
                            b[0] * gx * gx + T::lit(2.0) * b[1] * gx * gy + b[2] * gy * gy
                        };
                }
                w * acc
            })
            .collect();
        if let Some(b) = &self.zero_order {
            for (di, bi) in d.iter_mut().zip(b) {
                *di = *di + w * *bi;
            }
        }
        d
    }
}

/// Solves `a(u, v) = ∫f v` for every admissible `v`.
pub fn solve_linear<T: Real>(problem: &LinearProblem<T>) -> Result<LinearSolution<T>> {
    problem.check_ellipticity()?;
    let grid = &problem.grid;
    let w = grid.cell_volume();
    let rhs: Vec<T> = problem.rhs.dofs().into_iter().map(|v| v * w).collect();
    let n = rhs.len();
    let tol = T::lit(LINEAR_RESIDUAL_TOL);
    if norm2(&rhs) == T::zero() {
        return Ok(LinearSolution {
            u: Field::zeros(grid),
            relative_residual: T::zero(),
            method: LinearMethod::Cholesky,
            iterations: 0,
        });
    }
    if n < DIRECT_DOF_LIMIT {
        let a = problem.system_matrix()?;
        let chol = Cholesky::new(&a)?;
        let mut x = chol.solve(&rhs);
        let mut res = residual(&a, &x, &rhs);
        // one step of iterative refinement
        if res > tol * T::lit(1e-2) {
            let r: Vec<T> = rhs.iter().zip(a.matvec(&x)).map(|(b, ax)| *b - ax).collect();
            let dx = chol.solve(&r);
            let refined: Vec<T> = x.iter().zip(&dx).map(|(a, b)| *a + *b).collect();
            let rr = residual(&a, &refined, &rhs);
            if rr < res {
                x = refined;
                res = rr;
            }
        }
        if !(res <= tol) {
            return Err(Error::NoConvergence {
                what: "direct linear solve",
                iterations: 1,
            });
        }
        return Ok(LinearSolution {
            u: Field::from_dofs(grid, &x)?,
            relative_residual: res,
            method: LinearMethod::Cholesky,
            iterations: 1,
        });
    }
    let plan = Arc::new(SpectralPlan::new(grid, &problem.kernel)?);
    let map = SpectralGradient::new(grid, &plan)?;
    let blocks = problem.coefficient.blocks(map.samples());
    let diag = problem.diagonal(&plan, &blocks);
    let sol = pcg(|x| problem.apply_matrix_free(&map, &blocks, x), &diag, &rhs, tol * T::lit(0.1), 20 * n)?;
    if !(sol.relative_residual <= tol) {
        return Err(Error::NoConvergence {
            what: "conjugate gradients",
            iterations: sol.iterations,
        });
    }
    Ok(LinearSolution {
        u: Field::from_dofs(grid, &sol.x)?,
        relative_residual: sol.relative_residual,
        method: LinearMethod::ConjugateGradient,
        iterations: sol.iterations,
    })
}

fn residual<T: Real>(a: &DenseMatrix<T>, x: &[T], b: &[T]) -> T {
    let ax = a.matvec(x);
    let r: Vec<T> = b.iter().zip(&ax).map(|(b, ax)| *b - *ax).collect();
    norm2(&r) / norm2(b)
}
