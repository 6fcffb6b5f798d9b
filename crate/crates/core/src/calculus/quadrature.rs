//! Direct singular quadrature of the nonlocal gradient and divergence.
//!
//! Each neighbour cell contributes its difference quotient at the cell center
//! weighted by the kernel mass over the cell. Masses are integrated radially
//! in one dimension and, in two, by sub-cell midpoints near the singularity.
//! The self cell contributes `(w₀/n)` times the central-difference gradient.

use rayon::prelude::*;

use super::grid::Grid;
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::scalar::Real;

/// Angular sectors used for the self cell in two dimensions.
const SELF_SECTORS: usize = 8;
/// Sub-cells per axis for near cells in two dimensions.
const NEAR_SUBCELLS: usize = 8;

/// Translation-invariant weights `w(o)` for integer offsets `o ≠ 0`.
#[derive(Debug, Clone)]
pub struct QuadratureStencil<T> {
    dim: usize,
    h: T,
    offsets: Vec<([isize; 2], T)>,
    self_weight: T,
    reach: T,
}

impl<T: Real> QuadratureStencil<T> {
    pub fn new(grid: &Grid<T>, kernel: &Kernel<T>) -> Result<Self> {
        if kernel.dim() != grid.dim() {
            return Err(Error::Shape("kernel and grid dimensions differ".into()));
        }
        if kernel.is_analytic_only() {
            return Err(Error::AnalyticOnly);
        }
        let h = grid.h();
        let support = kernel.support_radius();
        let half = T::lit(0.5);
        let tol = T::lit(1e-13).max(T::quad_eps());
        let mut offsets = Vec::new();
        let reach = (support / h + T::one()).ceil().to_isize().unwrap_or(0);
        if grid.dim() == 1 {
            let mass = |lo: T, hi: T| kernel.radial_quad(|_, rho| rho, lo, hi, None, tol).value;
            let self_weight = mass(T::zero(), half * h) * T::lit(2.0);
            for j in 1..=reach {
                let lo = (T::from_isize(j).expect("offset") - half) * h;
                if lo >= support {
                    break;
                }
                let hi = (T::from_isize(j).expect("offset") + half) * h;
                let w = mass(lo, hi.min(support));
                offsets.push(([j, 0], w));
                offsets.push(([-j, 0], w));
            }
            return Ok(Self {
                dim: 1,
                h,
                offsets,
                self_weight,
                reach: support + h,
            });
        }
        // polar midpoint rule on the self cell
        let sector = T::TAU() / T::from_usize_lossy(SELF_SECTORS);
        let mut self_weight = T::zero();
        for k in 0..SELF_SECTORS {
            let theta = (T::from_usize_lossy(k) + half) * sector;
            let reach_r = half * h / theta.cos().abs().max(theta.sin().abs());
            let m = kernel
                .radial_quad(|r, rho| rho * r, T::zero(), reach_r, None, tol)
                .value;
            self_weight = self_weight + sector * m;
        }
        let sub = T::from_usize_lossy(NEAR_SUBCELLS);
        for a in -reach..=reach {
            for b in -reach..=reach {
                if a == 0 && b == 0 {
                    continue;
                }
                let (fa, fb) = (T::from_isize(a).expect("offset"), T::from_isize(b).expect("offset"));
                // nearest point of the cell to the origin
                let gap = |c: T| (c.abs() - half).max(T::zero());
                let near = gap(fa).hypot(gap(fb)) * h;
                if near >= support {
                    continue;
                }
                let far = (fa.abs() + half).hypot(fb.abs() + half) * h;
                let close = a.abs().max(b.abs()) <= 2;
                let w = if close || far > support {
                    let mut acc = T::zero();
                    for i in 0..NEAR_SUBCELLS {
                        for j in 0..NEAR_SUBCELLS {
                            let x = (fa - half + (T::from_usize_lossy(i) + half) / sub) * h;
                            let y = (fb - half + (T::from_usize_lossy(j) + half) / sub) * h;
                            acc = acc + kernel.profile(x.hypot(y));
                        }
                    }
                    acc * h * h / (sub * sub)
                } else {
                    kernel.profile(fa.hypot(fb) * h) * h * h
                };
                if w > T::zero() {
                    offsets.push(([a, b], w));
                }
            }
        }
        Ok(Self {
            dim: 2,
            h,
            offsets,
            self_weight,
            reach: support + h,
        })
    }

    pub fn self_weight(&self) -> T {
        self.self_weight
    }

    /// Sum of all cell masses, an approximation of `∫ρ`.
    pub fn total_mass(&self) -> T {
        self.self_weight + self.offsets.iter().map(|o| o.1).sum::<T>()
    }

    fn neighbour(grid: &Grid<T>, idx: usize, o: [isize; 2]) -> Option<usize> {
        let [nx, ny] = grid.shape();
        let (i, j) = grid.multi_index(idx);
        let x = i as isize + o[0];
        let y = j as isize + o[1];
        if x < 0 || y < 0 || x >= nx as isize || y >= ny as isize {
            None
        } else {
            Some(x as usize + nx * y as usize)
        }
    }

    /// Central difference of `u` along `axis`, zero beyond the box.
    fn central(&self, grid: &Grid<T>, u: &[T], idx: usize, axis: usize) -> T {
        let mut o = [0isize; 2];
        o[axis] = 1;
        let up = Self::neighbour(grid, idx, o).map_or(T::zero(), |k| u[k]);
        o[axis] = -1;
        let down = Self::neighbour(grid, idx, o).map_or(T::zero(), |k| u[k]);
        (up - down) / (self.h + self.h)
    }

    /// Nodes whose stencil would reach past the box; their values are set to zero.
    fn truncated(&self, grid: &Grid<T>, idx: usize) -> bool {
        grid.distance_to_box_edge(idx) < self.reach
    }

    pub fn gradient(&self, grid: &Grid<T>, u: &[T]) -> Vec<Vec<T>> {
        let dim = self.dim;
        let n = T::from_usize_lossy(dim);
        let per_node: Vec<[T; 2]> = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let mut g = [T::zero(); 2];
                if self.truncated(grid, idx) {
                    return g;
                }
                let ui = u[idx];
                for (o, w) in &self.offsets {
                    if let Some(k) = Self::neighbour(grid, idx, *o) {
                        let r2 = T::from_isize(o[0] * o[0] + o[1] * o[1]).expect("offset");
                        let q = (ui - u[k]) * *w / (r2 * self.h);
                        for c in 0..dim {
                            g[c] = g[c] - q * T::from_isize(o[c]).expect("offset");
                        }
                    }
                }
                for (c, gc) in g.iter_mut().enumerate().take(dim) {
                    *gc = *gc + self.self_weight / n * self.central(grid, u, idx, c);
                }
                g
            })
            .collect();
        (0..dim).map(|c| per_node.iter().map(|g| g[c]).collect()).collect()
    }

    pub fn divergence(&self, grid: &Grid<T>, v: &[Vec<T>]) -> Vec<T> {
        let dim = self.dim;
        let n = T::from_usize_lossy(dim);
        (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let mut acc = T::zero();
                if self.truncated(grid, idx) {
                    return acc;
                }
                for (o, w) in &self.offsets {
                    if let Some(k) = Self::neighbour(grid, idx, *o) {
                        let r2 = T::from_isize(o[0] * o[0] + o[1] * o[1]).expect("offset");
                        for c in 0..dim {
                            let q = (v[c][idx] - v[c][k]) * *w / (r2 * self.h);
                            acc = acc - q * T::from_isize(o[c]).expect("offset");
                        }
                    }
                }
                for (c, vc) in v.iter().enumerate().take(dim) {
                    acc = acc + self.self_weight / n * self.central(grid, vc, idx, c);
                }
                acc
            })
            .collect()
    }
}
