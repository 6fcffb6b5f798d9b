//! Grids, fields and the discrete nonlocal calculus: gradient, divergence,
//! translation operators and the assembled ρ-Laplacian.
//!
//! Two backends are available. [`Backend::Quadrature`] evaluates the singular
//! integrals directly with cell-integrated kernel masses; [`Backend::Spectral`]
//! applies the frequency response `2πiξ Q̂_ρ(ξ)` on the periodic box.

mod assemble;
mod dump;
mod field;
mod grid;
mod quadrature;
mod spectral;

use std::sync::Arc;

pub use assemble::{assemble, DiscreteOperator, GradientMap, SpectralGradient, DENSE_DOF_CAP};
pub use dump::{read_dump, write_dump, FieldDump};
pub use field::{Field, VectorField};
pub use grid::{build_grid, Domain, Grid, Region, NODE_CAP};
pub use quadrature::QuadratureStencil;
pub use spectral::{SpectralPlan, PADDING_TOLERANCE, SYMBOL_ZERO_RATIO};

use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Quadrature,
    Spectral,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Quadrature => "quadrature",
            Backend::Spectral => "spectral",
        }
    }
}

fn is_constant<T: Real>(v: &[T]) -> bool {
    v.iter().all(|x| *x == v[0])
}

/// Nonlocal gradient `∇_ρ u` at every node.
///
/// The quadrature backend truncates the stencil at the box boundary, so
/// values within the kernel support of the box edge are only meaningful for
/// fields vanishing there. The spectral backend requires the field to vanish
/// on the padding ring.
pub fn nl_gradient<T: Real>(u: &Field<T>, kernel: &Kernel<T>, backend: Backend) -> Result<VectorField<T>> {
    let grid = u.grid();
    match backend {
        Backend::Quadrature => {
            let st = QuadratureStencil::new(grid, kernel)?;
            VectorField::new(grid, st.gradient(grid, u.values()))
        }
        Backend::Spectral => {
            let plan = SpectralPlan::new(grid, kernel)?;
            spectral_gradient(&plan, u)
        }
    }
}

/// Spectral gradient with a prebuilt plan.
pub fn spectral_gradient<T: Real>(plan: &SpectralPlan<T>, u: &Field<T>) -> Result<VectorField<T>> {
    let grid = u.grid();
    if plan.shape() != grid.shape() {
        return Err(Error::Shape("plan and field grids differ".into()));
    }
    if is_constant(u.values()) {
        // the periodic extension of a constant is constant
        return Ok(VectorField::zeros(grid));
    }
    spectral::check_padding(grid, &[u.values()])?;
    VectorField::new(grid, plan.gradient(u.values()))
}

/// Nonlocal divergence `div_ρ v`.
pub fn nl_divergence<T: Real>(v: &VectorField<T>, kernel: &Kernel<T>, backend: Backend) -> Result<Field<T>> {
    let grid = v.grid();
    match backend {
        Backend::Quadrature => {
            let st = QuadratureStencil::new(grid, kernel)?;
            Field::new(grid, st.divergence(grid, v.components()))
        }
        Backend::Spectral => {
            let plan = SpectralPlan::new(grid, kernel)?;
            spectral_divergence(&plan, v)
        }
    }
}

pub fn spectral_divergence<T: Real>(plan: &SpectralPlan<T>, v: &VectorField<T>) -> Result<Field<T>> {
    let grid = v.grid();
    if plan.shape() != grid.shape() {
        return Err(Error::Shape("plan and field grids differ".into()));
    }
    if v.components().iter().all(|c| is_constant(c)) {
        return Ok(Field::zeros(grid));
    }
    let comps: Vec<&[T]> = v.components().iter().map(|c| c.as_slice()).collect();
    spectral::check_padding(grid, &comps)?;
    Field::new(grid, plan.divergence(v.components()))
}

/// `∫∇_ρu·v + ∫u div_ρv` by grid quadrature with the quadrature backend.
pub fn ibp_defect<T: Real>(u: &Field<T>, v: &VectorField<T>, kernel: &Kernel<T>) -> Result<T> {
    ibp_defect_with(u, v, kernel, Backend::Quadrature)
}

pub fn ibp_defect_with<T: Real>(u: &Field<T>, v: &VectorField<T>, kernel: &Kernel<T>, backend: Backend) -> Result<T> {
    if !Arc::ptr_eq(u.grid(), v.grid()) && **u.grid() != **v.grid() {
        return Err(Error::Shape("fields live on different grids".into()));
    }
    let grad = nl_gradient(u, kernel, backend)?;
    let div = nl_divergence(v, kernel, backend)?;
    let w = u.grid().cell_volume();
    let a = grad.dot(v);
    let b: T = u.values().iter().zip(div.values()).map(|(x, y)| *x * *y).sum();
    Ok(a + w * b)
}

/// `Q_ρ ∗ u` on the periodic box.
pub fn translate_to_local<T: Real>(u: &Field<T>, kernel: &Kernel<T>) -> Result<Field<T>> {
    let plan = SpectralPlan::new(u.grid(), kernel)?;
    spectral::check_padding(u.grid(), &[u.values()])?;
    Field::new(u.grid(), plan.convolve_q(u.values()))
}

/// Inverse of [`translate_to_local`]: division by `Q̂_ρ`. With `floor = 0` a
/// vanishing or sign-changing symbol is an error; otherwise magnitudes below
/// `floor` are clamped.
pub fn translate_from_local<T: Real>(v: &Field<T>, kernel: &Kernel<T>, floor: T) -> Result<Field<T>> {
    let plan = SpectralPlan::new(v.grid(), kernel)?;
    spectral::check_padding(v.grid(), &[v.values()])?;
    Field::new(v.grid(), plan.deconvolve_q(v.values(), floor)?)
}

/// Classical gradient by fourth-order central differences, zero beyond the box.
pub fn central_gradient<T: Real>(u: &Field<T>) -> VectorField<T> {
    let grid = u.grid();
    let [nx, ny] = grid.shape();
    let h = grid.h();
    let vals = u.values();
    let at = |i: isize, j: isize| -> T {
        if i < 0 || j < 0 || i >= nx as isize || j >= ny as isize {
            T::zero()
        } else {
            vals[i as usize + nx * j as usize]
        }
    };
    let c1 = T::lit(8.0) / (T::lit(12.0) * h);
    let c2 = T::one() / (T::lit(12.0) * h);
    let comps = (0..grid.dim())
        .map(|axis| {
            (0..grid.len())
                .map(|idx| {
                    let (i, j) = grid.multi_index(idx);
                    let (i, j) = (i as isize, j as isize);
                    let (di, dj) = if axis == 0 { (1, 0) } else { (0, 1) };
                    c1 * (at(i + di, j + dj) - at(i - di, j - dj)) - c2 * (at(i + 2 * di, j + 2 * dj) - at(i - 2 * di, j - 2 * dj))
                })
                .collect()
        })
        .collect();
    VectorField::new(grid, comps).expect("matching shape")
}
