//! Horizon sweeps: eigenpairs of the δ-horizon operator against the local
//! (δ → 0) and fractional (δ → ∞) limit problems.

mod local;
mod rate;
mod sweep;

pub use local::{LocalGradient, VertexLattice};
pub use rate::{rate_estimate, RateEstimate, RATE_CONFIDENCE};
pub use sweep::{sweep, GridPolicy, SweepConfig, SweepFailure, SweepResult, SweepRow, SWEEP_CSV_HEADER, SWEEP_EIGEN_TOL};

use std::sync::Arc;

use crate::calculus::{assemble, Domain, Field, Grid, NODE_CAP};
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::scalar::Real;
use crate::solvers::{spectral_operator, PLapOperator};
use crate::spectra::{eigs_linear, inverse_iteration, linear_eigenpairs, InverseIterationOptions};

/// Largest relative shift between the two local resolutions accepted as converged.
pub const LOCAL_SPREAD_TOL: f64 = 1e-3;
/// Largest relative R-vs-R/2 shift accepted for the fractional reference.
pub const TRUNCATION_TOL: f64 = 0.02;
/// Smallest truncation radius, in domain diameters.
pub const MIN_TRUNCATION_DIAMETERS: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceKind {
    Local,
    Fractional,
}

impl ReferenceKind {
    pub fn name(self) -> &'static str {
        match self {
            ReferenceKind::Local => "local",
            ReferenceKind::Fractional => "fractional",
        }
    }
}

/// Reference eigenfunction, evaluable anywhere.
#[derive(Debug, Clone)]
pub enum ReferenceFunction<T: Real> {
    Lattice { lattice: Arc<VertexLattice<T>>, values: Vec<T> },
    Grid(Field<T>),
}

impl<T: Real> ReferenceFunction<T> {
    pub fn eval(&self, p: &[T]) -> T {
        match self {
            ReferenceFunction::Lattice { lattice, values } => lattice.eval(values, p),
            ReferenceFunction::Grid(f) => interpolate(f, p),
        }
    }

    /// Samples onto the nodes of Ω of `grid` and normalizes in `L^p(Ω)`.
    pub fn on_grid(&self, grid: &Arc<Grid<T>>, p: T) -> Result<Field<T>> {
        let f = Field::dirichlet_from_fn(grid, |x| self.eval(x));
        let norm = f.lp_norm_domain(p);
        if !(norm > T::zero()) {
            return Err(Error::ZeroField);
        }
        Ok(f.scale(norm.recip()))
    }
}

/// Multilinear interpolation of a cell-centered field; zero off the box.
pub fn interpolate<T: Real>(f: &Field<T>, p: &[T]) -> T {
    let g = f.grid();
    let dim = g.dim();
    let origin = g.origin();
    let shape = g.shape();
    let h = g.h();
    let mut base = [0usize; 2];
    let mut t = [T::zero(); 2];
    for a in 0..dim {
        let s = (p[a] - origin[a]) / h - T::lit(0.5);
        let last = T::from_usize_lossy(shape[a] - 1);
        if !(s >= T::zero()) || s > last {
            return T::zero();
        }
        let i = s.floor().to_usize().unwrap_or(0).min(shape[a].saturating_sub(2));
        base[a] = i;
        t[a] = s - T::from_usize_lossy(i);
    }
    let v = f.values();
    let at = |i: usize, j: usize| v[g.index(i, j)];
    if dim == 1 {
        let i = base[0];
        return at(i, 0) + t[0] * (at(i + 1, 0) - at(i, 0));
    }
    let (i, j) = (base[0], base[1]);
    let lo = at(i, j) + t[0] * (at(i + 1, j) - at(i, j));
    let hi = at(i, j + 1) + t[0] * (at(i + 1, j + 1) - at(i, j + 1));
    lo + t[1] * (hi - lo)
}

/// Limit-problem eigenvalues with eigenfunctions and a resolution check.
#[derive(Debug, Clone)]
pub struct Reference<T: Real> {
    pub kind: ReferenceKind,
    pub p: T,
    /// Reference eigenvalues λ_1..λ_m.
    pub lambdas: Vec<T>,
    pub functions: Vec<ReferenceFunction<T>>,
    /// Eigenvalues at the cheaper resolution (spacing h, or radius R/2).
    pub coarse: Vec<T>,
    /// Eigenvalues at the finer resolution (spacing h/2, or radius R).
    pub fine: Vec<T>,
    /// Largest relative coarse-vs-fine shift.
    pub sensitivity: T,
    pub converged: bool,
}

fn check_index<T: Real>(p: T, m: usize) -> Result<()> {
    if !(p > T::one()) || !p.is_finite() {
        return Err(Error::ParameterRange(format!("p = {} must lie in (1, ∞)", p.as_f64())));
    }
    if m == 0 {
        return Err(Error::ParameterRange("eigen index m starts at 1".into()));
    }
    if p != T::lit(2.0) && m != 1 {
        return Err(Error::ParameterRange(format!(
            "only the first eigenpair is computed for p ≠ 2 (asked for m = {m})"
        )));
    }
    Ok(())
}

/// First `m` eigenpairs (p = 2) or the first eigenpair (p ≠ 2) of a gradient map.
fn solve_map<T: Real>(op: &PLapOperator<T>, m: usize, opts: &InverseIterationOptions<T>) -> Result<Vec<(T, Vec<T>)>> {
    if op.p() == T::lit(2.0) {
        Ok(linear_eigenpairs(op, m)?.into_iter().map(|e| (e.lambda, e.x)).collect())
    } else {
        let e = inverse_iteration(op, None, opts)?;
        Ok(vec![(e.lambda, e.x)])
    }
}

fn relative_spread<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(x, y)| ((*x - *y) / *y).abs())
        .fold(T::zero(), T::max)
}

/// Local Dirichlet p-Laplacian eigenvalues by P1 finite elements at `h` and
/// `h/2`, Richardson-extrapolated as `(4λ_{h/2} − λ_h)/3`.
pub fn local_reference<T: Real>(
    domain: Domain<T>,
    p: T,
    m: usize,
    h: T,
    opts: &InverseIterationOptions<T>,
) -> Result<Reference<T>> {
    check_index(p, m)?;
    let mut runs = Vec::with_capacity(2);
    for hh in [h, h / T::lit(2.0)] {
        let lattice = VertexLattice::new(domain, hh)?;
        let map = LocalGradient::new(lattice.clone());
        let op = PLapOperator::new(Arc::new(map), p);
        let pairs = solve_map(&op, m, opts)?;
        runs.push((Arc::new(lattice), pairs));
    }
    let (_, coarse_pairs) = &runs[0];
    let (lattice, fine_pairs) = &runs[1];
    let coarse: Vec<T> = coarse_pairs.iter().map(|e| e.0).collect();
    let fine: Vec<T> = fine_pairs.iter().map(|e| e.0).collect();
    let lambdas = coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| (T::lit(4.0) * *f - *c) / T::lit(3.0))
        .collect();
    let functions = fine_pairs
        .iter()
        .map(|(_, x)| ReferenceFunction::Lattice {
            lattice: lattice.clone(),
            values: x.clone(),
        })
        .collect();
    let sensitivity = relative_spread(&coarse, &fine);
    Ok(Reference {
        kind: ReferenceKind::Local,
        p,
        lambdas,
        functions,
        coarse,
        fine,
        sensitivity,
        converged: sensitivity <= T::lit(LOCAL_SPREAD_TOL),
    })
}

/// Eigenpairs of the limit kernel `|x|^{−(n+s∞−1)}` truncated at `radius`,
/// on a grid of spacing `h` padded by `radius` around Ω; rerun at `radius/2`
/// to measure the truncation sensitivity.
pub fn fractional_reference<T: Real>(
    domain: Domain<T>,
    kernel: &Kernel<T>,
    p: T,
    m: usize,
    h: T,
    radius: T,
    opts: &InverseIterationOptions<T>,
) -> Result<Reference<T>> {
    check_index(p, m)?;
    if kernel.dim() != domain.dim() {
        return Err(Error::Dimension(kernel.dim()));
    }
    let min_radius = T::lit(MIN_TRUNCATION_DIAMETERS) * domain.diameter();
    if !(radius >= min_radius) || !radius.is_finite() {
        return Err(Error::ParameterRange(format!(
            "truncation radius {} is below {} domain diameters",
            radius.as_f64(),
            MIN_TRUNCATION_DIAMETERS
        )));
    }
    let limit = kernel.limit_kernel(&Kernel::default_s_infinity_deltas())?;
    let mut runs = Vec::with_capacity(2);
    for r in [radius / T::lit(2.0), radius] {
        let k = limit.truncate(r)?;
        let grid = Arc::new(Grid::with_layout(domain, h, r, T::zero(), r, NODE_CAP)?);
        let pairs: Vec<(T, Field<T>)> = if p == T::lit(2.0) {
            let op = assemble(&grid, &k)?;
            eigs_linear(&op, m)?.pairs.into_iter().map(|e| (e.lambda, e.u)).collect()
        } else {
            let op = spectral_operator(&grid, &k, p)?;
            let e = inverse_iteration(&op, None, opts)?;
            vec![(e.lambda, Field::from_dofs(&grid, &e.x)?)]
        };
        runs.push(pairs);
    }
    let coarse: Vec<T> = runs[0].iter().map(|e| e.0).collect();
    let fine: Vec<T> = runs[1].iter().map(|e| e.0).collect();
    let functions = runs
        .pop()
        .expect("two runs")
        .into_iter()
        .map(|(_, u)| ReferenceFunction::Grid(u))
        .collect();
    let sensitivity = relative_spread(&coarse, &fine);
    Ok(Reference {
        kind: ReferenceKind::Fractional,
        p,
        lambdas: fine.clone(),
        functions,
        coarse,
        fine,
        sensitivity,
        converged: sensitivity <= T::lit(TRUNCATION_TOL),
    })
}

/// `min_σ ‖σu − u_ref‖_{L^p(Ω)}` over σ ∈ {+1, −1}.
pub fn align_and_distance<T: Real>(u: &Field<T>, u_ref: &Field<T>, p: T) -> Result<T> {
    if !Arc::ptr_eq(u.grid(), u_ref.grid()) && **u.grid() != **u_ref.grid() {
        return Err(Error::Shape("eigenfunctions live on different grids".into()));
    }
    let plus = u.linear_combination(T::one(), u_ref, -T::one())?.lp_norm_domain(p);
    let minus = u.linear_combination(T::one(), u_ref, T::one())?.lp_norm_domain(p);
    Ok(plus.min(minus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::build_grid;

    #[test]
    fn interpolation_is_exact_for_affine_fields() {
        let grid = build_grid(Domain::unit_square(), 0.1, 0.1).unwrap();
        let f = Field::from_fn(&grid, |x| 1.0 + 2.0 * x[0] - x[1]);
        for q in [[0.33f64, 0.71], [0.5, 0.5], [0.01, 0.99]] {
            assert!((interpolate(&f, &q) - (1.0 + 2.0 * q[0] - q[1])).abs() < 1e-12);
        }
        let g1 = build_grid(Domain::unit_interval(), 0.05, 0.05).unwrap();
        let f1 = Field::from_fn(&g1, |x| 3.0 * x[0]);
        assert!((interpolate(&f1, &[0.437f64]) - 1.311).abs() < 1e-12);
    }

    #[test]
    fn distance_is_sign_blind() {
        let grid = build_grid(Domain::unit_interval(), 0.01, 0.05).unwrap();
        let u = Field::dirichlet_from_fn(&grid, |x| (std::f64::consts::PI * x[0]).sin());
        assert_eq!(align_and_distance(&u, &u, 2.0).unwrap(), 0.0);
        assert_eq!(align_and_distance(&u.scale(-1.0), &u, 2.0).unwrap(), 0.0);
        let other = build_grid(Domain::unit_interval(), 0.02, 0.05).unwrap();
        let v = Field::zeros(&other);
        assert!(matches!(align_and_distance(&u, &v, 2.0), Err(Error::Shape(_))));
    }
}
