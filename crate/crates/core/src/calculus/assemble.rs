//! Assembly of the stiffness matrix of `(−Δ)_ρ` over the nodes of Ω.

use std::sync::Arc;

use rayon::prelude::*;

use super::field::Field;
use super::grid::Grid;
use super::spectral::SpectralPlan;
use super::Backend;
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::linalg::DenseMatrix;
use crate::scalar::Real;

/// Largest number of degrees of freedom for which a dense stiffness is built.
pub const DENSE_DOF_CAP: usize = 8192;

/// Linear map from degrees of freedom to sampled gradients.
///
/// Gradient samples are laid out component-major: entry `c * samples() + k`
/// is component `c` at sample point `k`. Energies are `sample_weight · Σ_k f(g_k)`
/// and L² pairings of degrees of freedom are `mass_weight · Σ_i u_i v_i`.
pub trait GradientMap<T: Real>: Send + Sync {
    fn dim(&self) -> usize;
    fn dofs(&self) -> usize;
    fn samples(&self) -> usize;
    fn sample_weight(&self) -> T;
    fn mass_weight(&self) -> T;
    fn apply(&self, u: &[T]) -> Vec<T>;
    fn apply_transpose(&self, g: &[T]) -> Vec<T>;

    /// Dense matrix with `dim · samples` rows and `dofs` columns.
    fn matrix(&self) -> DenseMatrix<T> {
        let rows = self.dim() * self.samples();
        let cols: Vec<Vec<T>> = (0..self.dofs())
            .into_par_iter()
            .map(|j| {
                let mut e = vec![T::zero(); self.dofs()];
                e[j] = T::one();
                self.apply(&e)
            })
            .collect();
        DenseMatrix::from_fn(rows, self.dofs(), |i, j| cols[j][i])
    }
}

/// Spectral gradient restricted to Dirichlet-admissible fields: degrees of
/// freedom are the nodes of Ω, samples are every node of the box.
#[derive(Debug, Clone)]
pub struct SpectralGradient<T: Real> {
    grid: Arc<Grid<T>>,
    plan: Arc<SpectralPlan<T>>,
}

impl<T: Real> SpectralGradient<T> {
    pub fn new(grid: &Arc<Grid<T>>, plan: &Arc<SpectralPlan<T>>) -> Result<Self> {
        if plan.shape() != grid.shape() {
            return Err(Error::Shape("plan and grid differ".into()));
        }
        Ok(Self {
            grid: grid.clone(),
            plan: plan.clone(),
        })
    }

    fn extend(&self, u: &[T]) -> Vec<T> {
        let mut full = vec![T::zero(); self.grid.len()];
        for (&i, &v) in self.grid.dofs().iter().zip(u) {
            full[i] = v;
        }
        full
    }
}

impl<T: Real> GradientMap<T> for SpectralGradient<T> {
    fn dim(&self) -> usize {
        self.grid.dim()
    }

    fn dofs(&self) -> usize {
        self.grid.dofs().len()
    }

    fn samples(&self) -> usize {
        self.grid.len()
    }

    fn sample_weight(&self) -> T {
        self.grid.cell_volume()
    }

    fn mass_weight(&self) -> T {
        self.grid.cell_volume()
    }

    fn apply(&self, u: &[T]) -> Vec<T> {
        self.plan.gradient(&self.extend(u)).concat()
    }

    fn apply_transpose(&self, g: &[T]) -> Vec<T> {
        let n = self.grid.len();
        let comps: Vec<Vec<T>> = g.chunks(n).map(|c| c.to_vec()).collect();
        // the gradient response is imaginary and odd, so Gᵀ = −div
        let div = self.plan.divergence(&comps);
        self.grid.dofs().iter().map(|&i| -div[i]).collect()
    }

    fn matrix(&self) -> DenseMatrix<T> {
        // columns are periodic shifts of the impulse response at node 0
        let impulse = self.plan.impulse_response();
        let [nx, ny] = self.grid.shape();
        let n = self.grid.len();
        let dofs = self.grid.dofs();
        let mut m = DenseMatrix::zeros(self.dim() * n, dofs.len());
        let cols = dofs.len();
        m.as_mut_slice()
            .par_chunks_mut(cols)
            .enumerate()
            .for_each(|(row, out)| {
                let (c, k) = (row / n, row % n);
                let (x, y) = (k % nx, k / nx);
                for (col, &d) in dofs.iter().enumerate() {
                    let (dx, dy) = (d % nx, d / nx);
                    let sx = (x + nx - dx) % nx;
                    let sy = (y + ny - dy) % ny;
                    out[col] = impulse[c][sx + nx * sy];
                }
            });
        m
    }
}

/// Stiffness and lumped mass of `(−Δ)_ρ` over the nodes of Ω.
#[derive(Debug, Clone)]
pub struct DiscreteOperator<T: Real> {
    grid: Arc<Grid<T>>,
    kernel: Kernel<T>,
    plan: Arc<SpectralPlan<T>>,
    stiffness: DenseMatrix<T>,
    mass: T,
    backend: Backend,
}

/// Assembles `A = hⁿ GᵀG` with `G` the spectral gradient of fields extended
/// by zero outside Ω, and the lumped mass `hⁿ I`.
pub fn assemble<T: Real>(grid: &Arc<Grid<T>>, kernel: &Kernel<T>) -> Result<DiscreteOperator<T>> {
    let dofs = grid.dofs();
    if dofs.len() > DENSE_DOF_CAP {
        return Err(Error::MemoryBudget {
            nodes: dofs.len(),
            cap: DENSE_DOF_CAP,
        });
    }
    let plan = Arc::new(SpectralPlan::new(grid, kernel)?);
    let stencil = plan.stiffness_stencil();
    let [nx, ny] = grid.shape();
    let w = grid.cell_volume();
    let n = dofs.len();
    let mut stiffness = DenseMatrix::zeros(n, n);
    stiffness
        .as_mut_slice()
        .par_chunks_mut(n.max(1))
        .enumerate()
        .for_each(|(r, row)| {
            let (ix, iy) = (dofs[r] % nx, dofs[r] / nx);
            for (c, &d) in dofs.iter().enumerate() {
                let (jx, jy) = (d % nx, d / nx);
                let sx = (ix + nx - jx) % nx;
                let sy = (iy + ny - jy) % ny;
                row[c] = w * stencil[sx + nx * sy];
            }
        });
    stiffness.symmetrize();
    Ok(DiscreteOperator {
        grid: grid.clone(),
        kernel: kernel.clone(),
        plan,
        stiffness,
        mass: w,
        backend: Backend::Spectral,
    })
}

impl<T: Real> DiscreteOperator<T> {
    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn kernel(&self) -> &Kernel<T> {
        &self.kernel
    }

    pub fn plan(&self) -> &Arc<SpectralPlan<T>> {
        &self.plan
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn stiffness(&self) -> &DenseMatrix<T> {
        &self.stiffness
    }

    pub fn dofs(&self) -> usize {
        self.stiffness.rows()
    }

    /// Diagonal entry hⁿ of the lumped mass.
    pub fn mass_weight(&self) -> T {
        self.mass
    }

    pub fn mass_diagonal(&self) -> Vec<T> {
        vec![self.mass; self.dofs()]
    }

    pub fn mass_matrix(&self) -> DenseMatrix<T> {
        let mut m = DenseMatrix::zeros(self.dofs(), self.dofs());
        for i in 0..self.dofs() {
            m[(i, i)] = self.mass;
        }
        m
    }

    pub fn gradient_map(&self) -> SpectralGradient<T> {
        SpectralGradient::new(&self.grid, &self.plan).expect("plan built on this grid")
    }

    /// `uᵀ A u` for a field on the grid.
    pub fn energy(&self, u: &Field<T>) -> T {
        let x = u.dofs();
        self.stiffness.bilinear(&x, &x)
    }

    /// Matrix-free `A x` through the Fourier multiplier.
    pub fn apply_stiffness_fft(&self, x: &[T]) -> Vec<T> {
        let mut full = vec![T::zero(); self.grid.len()];
        for (&i, &v) in self.grid.dofs().iter().zip(x) {
            full[i] = v;
        }
        let spec = self.plan.forward(&full);
        let out = self.plan.inverse_real(
            spec.into_iter()
                .enumerate()
                .map(|(i, z)| z * self.plan.multiplier(i))
                .collect(),
        );
        self.grid.dofs().iter().map(|&i| self.mass * out[i]).collect()
    }
}
