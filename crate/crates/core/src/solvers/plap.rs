//! Minimization of `I[u] = (1/p)∫|∇_ρu|^p − ∫fu` over Dirichlet-admissible fields.

use std::sync::Arc;

use super::operator::PLapOperator;
use crate::calculus::{Field, Grid, SpectralGradient, SpectralPlan};
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::linalg::{dot, norm2, Cholesky, DenseMatrix};
use crate::scalar::Real;

/// Search direction used by [`solve_plap`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescentMethod {
    /// Damped Newton on the (regularized) energy.
    Newton,
    /// Steepest descent in the lumped L² metric.
    Gradient,
}

impl DescentMethod {
    pub fn name(self) -> &'static str {
        match self {
            DescentMethod::Newton => "newton",
            DescentMethod::Gradient => "gradient",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "newton" => Ok(DescentMethod::Newton),
            "gradient" => Ok(DescentMethod::Gradient),
            other => Err(Error::Parse(format!("unknown descent method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PLapOptions<T> {
    /// Relative energy decrement that, sustained over [`STALL_WINDOW`] steps, stops the run.
    pub energy_tol: T,
    /// Relative L² norm of the energy gradient that stops the run.
    pub gradient_tol: T,
    pub max_iter: usize,
    pub method: DescentMethod,
    /// ε in `(|g|²+ε²)^{p/2}` for p < 2, relative to the gradient scale.
    pub regularization: T,
}

impl<T: Real> Default for PLapOptions<T> {
    fn default() -> Self {
        Self {
            energy_tol: T::lit(1e-15),
            gradient_tol: T::lit(1e-10),
            max_iter: 100_000,
            method: DescentMethod::Newton,
            regularization: T::lit(1e-8),
        }
    }
}

pub const STALL_WINDOW: usize = 5;
const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

/// Why a descent run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Gradient,
    EnergyStall,
    /// Zero right-hand side: the minimizer is zero.
    Trivial,
}

#[derive(Debug, Clone)]
pub struct DescentRun<T> {
    pub x: Vec<T>,
    /// Unregularized energy per iterate, starting with the initial field.
    pub energy_history: Vec<T>,
    /// The minimized (possibly regularized) objective per iterate; nonincreasing
    /// up to round-off once Newton steps reach machine precision.
    pub objective_history: Vec<T>,
    pub iterations: usize,
    pub gradient_norm: T,
    pub termination: Termination,
}

/// Energy `(1/p)∫|∇u|^p − ⟨rhs, x⟩` with `rhs` a dual vector.
fn energy<T: Real>(op: &PLapOperator<T>, g: &[T], x: &[T], rhs: &[T], eps: T) -> T {
    op.gradient_power(g, eps) / op.p() - dot(rhs, x)
}

/// Relative L² norm of the energy gradient `r`: `‖r/w_m‖_{L²} / ‖rhs/w_m‖_{L²}`.
fn relative_norm<T: Real>(r: &[T], rhs_norm: T) -> T {
    norm2(r) / rhs_norm
}

/// Scale `c` minimizing `I(c·x)` along the ray through `x`.
pub(crate) fn ray_scale<T: Real>(op: &PLapOperator<T>, x: &[T], rhs: &[T]) -> Option<T> {
    let a = op.dirichlet_integral(x);
    let b = dot(rhs, x);
    (a > T::zero() && b > T::zero()).then(|| (b / a).powf((op.p() - T::one()).recip()))
}

/// Cholesky factor of the quadratic (p = 2) Hessian `w_s GᵀG`.
fn quadratic_factor<T: Real>(op: &PLapOperator<T>) -> Result<Cholesky<T>> {
    let g = op.gradient_matrix();
    let w = vec![op.sample_weight(); g.rows()];
    Cholesky::new(&g.weighted_gram(&w))
}

/// Minimizes `(1/p)∫|∇u|^p − ⟨rhs, x⟩` over degrees of freedom.
///
/// `rhs` is a dual vector (`w_m f` for a nodal right-hand side). Without an
/// initial field the run starts from the p = 2 solution rescaled along its ray.
pub fn minimize_plap<T: Real>(
    op: &PLapOperator<T>,
    rhs: &[T],
    init: Option<&[T]>,
    opts: &PLapOptions<T>,
) -> Result<DescentRun<T>> {
    let n = op.dofs();
    let p = op.p();
    if !(p > T::one()) || !p.is_finite() {
        return Err(Error::ParameterRange(format!("p = {} must lie in (1, ∞)", p.as_f64())));
    }
    if rhs.len() != n || init.is_some_and(|x| x.len() != n) {
        return Err(Error::Shape("right-hand side or initial field has the wrong length".into()));
    }
    if rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::ParameterRange("right-hand side is not finite".into()));
    }
    let rhs_norm = norm2(rhs);
    if rhs_norm == T::zero() {
        // strictly convex with minimum I(0) = 0
        return Ok(DescentRun {
            x: vec![T::zero(); n],
            energy_history: vec![T::zero()],
            objective_history: vec![T::zero()],
            iterations: 0,
            gradient_norm: T::zero(),
            termination: Termination::Trivial,
        });
    }

    // the quadratic Hessian seeds the start, sets ε and backs up singular Newton steps
    let quad = quadratic_factor(op)?;
    let linear = quad.solve(rhs);

    let mut x = match init {
        Some(x0) => x0.to_vec(),
        None => {
            let c = ray_scale(op, &linear, rhs).unwrap_or(T::one());
            linear.iter().map(|v| *v * c).collect()
        }
    };

    let eps = if p < T::lit(2.0) {
        let c = ray_scale(op, &linear, rhs).unwrap_or(T::one());
        let g = op.gradients(&linear);
        let scale = g.iter().fold(T::zero(), |m, v| m.max(v.abs())) * c;
        opts.regularization * scale
    } else {
        T::zero()
    };

    let mut g = op.gradients(&x);
    let mut obj = energy(op, &g, &x, rhs, eps);
    let mut energy_history = vec![energy(op, &g, &x, rhs, T::zero())];
    let mut objective_history = vec![obj];
    let mut stall = 0usize;
    let mut step = T::one();

    for it in 1..=opts.max_iter {
        let grad: Vec<T> = op
            .dual_from_gradients(&g, eps)
            .into_iter()
            .zip(rhs)
            .map(|(a, b)| a - *b)
            .collect();
        let gnorm = relative_norm(&grad, rhs_norm);
        if gnorm <= opts.gradient_tol {
            return Ok(DescentRun {
                x,
                energy_history,
                objective_history,
                iterations: it - 1,
                gradient_norm: gnorm,
                termination: Termination::Gradient,
            });
        }

        let (dir, newton) = match opts.method {
            DescentMethod::Newton => match newton_direction(op, &g, eps, &grad) {
                Some(d) => (d, true),
                None => (quad.solve(&grad).into_iter().map(|v| -v).collect(), false),
            },
            DescentMethod::Gradient => (steepest(op, &grad), false),
        };
        let slope = dot(&grad, &dir);
        if !(slope < T::zero()) {
            return Err(Error::NoConvergence {
                what: "p-Laplacian descent (no descent direction)",
                iterations: it,
            });
        }

        let scale = obj.abs() + (op.gradient_power(&g, eps) / p).abs() + dot(rhs, &x).abs();
        let mut t = if newton { T::one() } else { (step * T::lit(2.0)).min(T::lit(1e30)) };
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<T> = x.iter().zip(&dir).map(|(a, d)| *a + t * *d).collect();
            let gt = op.gradients(&trial);
            let ot = energy(op, &gt, &trial, rhs, eps);
            if ot <= obj + T::lit(ARMIJO) * t * slope {
                accepted = Some((trial, gt, ot));
                break;
            }
            // the predicted decrease is below round-off of the energy: take the full step
            let noise = T::lit(1e3) * T::epsilon() * scale;
            if newton && t == T::one() && -slope <= noise && ot <= obj + noise {
                accepted = Some((trial, gt, ot));
                break;
            }
            t = t * T::lit(0.5);
        }
        let Some((nx, ng, no)) = accepted else {
            return Err(Error::NoConvergence {
                what: "p-Laplacian line search",
                iterations: it,
            });
        };
        step = t;
        let decrement = (obj - no).abs() / obj.abs().max(T::min_positive_value());
        x = nx;
        g = ng;
        obj = no;
        energy_history.push(energy(op, &g, &x, rhs, T::zero()));
        objective_history.push(obj);
        if decrement <= opts.energy_tol {
            stall += 1;
            if stall >= STALL_WINDOW {
                let grad: Vec<T> = op
                    .dual_from_gradients(&g, eps)
                    .into_iter()
                    .zip(rhs)
                    .map(|(a, b)| a - *b)
                    .collect();
                return Ok(DescentRun {
                    x,
                    energy_history,
                    objective_history,
                    iterations: it,
                    gradient_norm: relative_norm(&grad, rhs_norm),
                    termination: Termination::EnergyStall,
                });
            }
        } else {
            stall = 0;
        }
    }
    Err(Error::NoConvergence {
        what: "p-Laplacian descent",
        iterations: opts.max_iter,
    })
}

fn steepest<T: Real>(op: &PLapOperator<T>, grad: &[T]) -> Vec<T> {
    let w = op.mass_weight();
    grad.iter().map(|v| -*v / w).collect()
}

fn newton_direction<T: Real>(op: &PLapOperator<T>, g: &[T], eps: T, grad: &[T]) -> Option<Vec<T>> {
    let h: DenseMatrix<T> = op.hessian(g, eps);
    let chol = Cholesky::new(&h).ok()?;
    let d: Vec<T> = chol.solve(grad).into_iter().map(|v| -v).collect();
    d.iter().all(|v| v.is_finite()).then_some(d)
}

/// Dirichlet problem for `(−Δ)_{ρ,p} u = f` on the nodes of Ω.
#[derive(Debug, Clone)]
pub struct PLapProblem<T: Real> {
    grid: Arc<Grid<T>>,
    kernel: Kernel<T>,
    p: T,
    rhs: Field<T>,
    pub options: PLapOptions<T>,
}

impl<T: Real> PLapProblem<T> {
    pub fn new(grid: &Arc<Grid<T>>, kernel: &Kernel<T>, p: T, rhs: Field<T>) -> Result<Self> {
        if !(p > T::one()) || !p.is_finite() {
            return Err(Error::ParameterRange(format!("p = {} must lie in (1, ∞)", p.as_f64())));
        }
        if !Arc::ptr_eq(rhs.grid(), grid) && **rhs.grid() != **grid {
            return Err(Error::Shape("right-hand side lives on another grid".into()));
        }
        if rhs.dofs().iter().any(|v| !v.is_finite()) {
            return Err(Error::ParameterRange("right-hand side is not finite on Ω".into()));
        }
        Ok(Self {
            grid: grid.clone(),
            kernel: kernel.clone(),
            p,
            rhs,
            options: PLapOptions::default(),
        })
    }

    pub fn with_options(mut self, options: PLapOptions<T>) -> Self {
        self.options = options;
        self
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn kernel(&self) -> &Kernel<T> {
        &self.kernel
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn rhs(&self) -> &Field<T> {
        &self.rhs
    }

    /// Spectral p-Dirichlet operator on this grid.
    pub fn operator(&self) -> Result<PLapOperator<T>> {
        spectral_operator(&self.grid, &self.kernel, self.p)
    }

    pub(crate) fn rhs_dual(&self) -> Vec<T> {
        let w = self.grid.cell_volume();
        self.rhs.dofs().into_iter().map(|v| v * w).collect()
    }
}

/// p-Dirichlet operator backed by the spectral gradient on `grid`.
pub fn spectral_operator<T: Real>(grid: &Arc<Grid<T>>, kernel: &Kernel<T>, p: T) -> Result<PLapOperator<T>> {
    let plan = Arc::new(SpectralPlan::new(grid, kernel)?);
    let map = SpectralGradient::new(grid, &plan)?;
    Ok(PLapOperator::new(Arc::new(map), p))
}

/// `I[u] = (1/p)∫|∇_ρu|^p − ∫fu` by grid quadrature.
pub fn plap_energy<T: Real>(u: &Field<T>, problem: &PLapProblem<T>) -> Result<T> {
    let op = problem.operator()?;
    Ok(plap_energy_with(&op, &u.dofs(), &problem.rhs_dual()))
}

pub fn plap_energy_with<T: Real>(op: &PLapOperator<T>, x: &[T], rhs: &[T]) -> T {
    let g = op.gradients(x);
    energy(op, &g, x, rhs, T::zero())
}

/// Result of [`solve_plap`].
#[derive(Debug, Clone)]
pub struct PLapSolution<T: Real> {
    pub u: Field<T>,
    pub run: DescentRun<T>,
}

/// Minimizer of `I` over Dirichlet-admissible fields.
pub fn solve_plap<T: Real>(problem: &PLapProblem<T>) -> Result<PLapSolution<T>> {
    solve_plap_from(problem, None)
}

/// [`solve_plap`] started from `init` (values outside Ω are ignored).
pub fn solve_plap_from<T: Real>(problem: &PLapProblem<T>, init: Option<&Field<T>>) -> Result<PLapSolution<T>> {
    let op = problem.operator()?;
    let x0 = init.map(|f| f.dofs());
    let run = minimize_plap(&op, &problem.rhs_dual(), x0.as_deref(), &problem.options)?;
    let u = Field::from_dofs(&problem.grid, &run.x)?;
    Ok(PLapSolution { u, run })
}

/// `⟨(−Δ)_{ρ,p}u₁ − (−Δ)_{ρ,p}u₂, u₁ − u₂⟩` with the spectral gradient.
pub fn monotonicity_gap<T: Real>(u1: &Field<T>, u2: &Field<T>, p: T, kernel: &Kernel<T>) -> Result<T> {
    u1.check_same_grid(u2)?;
    let op = spectral_operator(u1.grid(), kernel, p)?;
    Ok(monotonicity_gap_with(&op, &u1.dofs(), &u2.dofs()))
}

pub fn monotonicity_gap_with<T: Real>(op: &PLapOperator<T>, x1: &[T], x2: &[T]) -> T {
    let g1 = op.gradients(x1);
    let g2 = op.gradients(x2);
    let f1 = op.flux(&g1, T::zero());
    let f2 = op.flux(&g2, T::zero());
    let sum: T = f1
        .iter()
        .zip(&f2)
        .zip(g1.iter().zip(&g2))
        .map(|((a, b), (c, d))| (*a - *b) * (*c - *d))
        .sum();
    op.sample_weight() * sum
}

/// Ratio of the monotonicity gap to `‖∇_ρ(u₁−u₂)‖_p^p`; its infimum over a
/// sample is an empirical monotonicity constant.
pub fn monotonicity_ratio_with<T: Real>(op: &PLapOperator<T>, x1: &[T], x2: &[T]) -> T {
    let diff: Vec<T> = x1.iter().zip(x2).map(|(a, b)| *a - *b).collect();
    monotonicity_gap_with(op, x1, x2) / op.dirichlet_integral(&diff)
}
