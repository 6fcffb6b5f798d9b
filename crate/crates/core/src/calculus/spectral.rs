//! Fourier-multiplier realization of the nonlocal calculus on the periodic box.

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::grid::{Grid, Region};
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::scalar::Real;

/// Relative size of `Q̂` below which the symbol counts as vanishing.
pub const SYMBOL_ZERO_RATIO: f64 = 1e-6;

/// Relative magnitude tolerated on the padding ring before a spectral application.
pub const PADDING_TOLERANCE: f64 = 1e-6;

/// FFT plans and the sampled symbol `Q̂_ρ` on the frequency grid of a box.
pub struct SpectralPlan<T: Real> {
    dim: usize,
    shape: [usize; 2],
    lengths: [T; 2],
    forward: [Arc<dyn Fft<T>>; 2],
    inverse: [Arc<dyn Fft<T>>; 2],
    qhat: Vec<T>,
    symbol_converged: bool,
}

impl<T: Real> std::fmt::Debug for SpectralPlan<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralPlan")
            .field("shape", &self.shape)
            .field("lengths", &self.lengths)
            .finish()
    }
}

/// Signed frequency of FFT index `k` on a period of length `len`.
fn frequency<T: Real>(k: usize, n: usize, len: T) -> T {
    if 2 * k <= n {
        T::from_usize_lossy(k) / len
    } else {
        -(T::from_usize_lossy(n - k) / len)
    }
}

fn is_nyquist(k: usize, n: usize) -> bool {
    n % 2 == 0 && 2 * k == n
}

impl<T: Real> SpectralPlan<T> {
    pub fn new(grid: &Grid<T>, kernel: &Kernel<T>) -> Result<Self> {
        if kernel.dim() != grid.dim() {
            return Err(Error::Shape(format!(
                "kernel dimension {} on a grid of dimension {}",
                kernel.dim(),
                grid.dim()
            )));
        }
        if kernel.is_analytic_only() {
            return Err(Error::AnalyticOnly);
        }
        let support = kernel.support_radius();
        let ring = grid.ring_width();
        if support > ring * (T::one() + T::lit(1e-12)) {
            return Err(Error::PaddingExceeded {
                support: support.as_f64(),
                padding: ring.as_f64(),
            });
        }
        let dim = grid.dim();
        let shape = grid.shape();
        let lengths = grid.box_lengths();
        let mut planner = FftPlanner::new();
        let forward = [planner.plan_fft_forward(shape[0]), planner.plan_fft_forward(shape[1])];
        let inverse = [planner.plan_fft_inverse(shape[0]), planner.plan_fft_inverse(shape[1])];

        // |ξ| on one quadrant, deduplicated
        let half = [shape[0] / 2 + 1, if dim == 2 { shape[1] / 2 + 1 } else { 1 }];
        let mut radii: Vec<(T, usize, usize)> = Vec::with_capacity(half[0] * half[1]);
        for ky in 0..half[1] {
            for kx in 0..half[0] {
                let fx = T::from_usize_lossy(kx) / lengths[0];
                let fy = if dim == 2 {
                    T::from_usize_lossy(ky) / lengths[1]
                } else {
                    T::zero()
                };
                radii.push((fx.hypot(fy), kx, ky));
            }
        }
        let mut unique: Vec<T> = radii.iter().map(|r| r.0).collect();
        unique.sort_by(|a, b| a.partial_cmp(b).expect("finite frequency"));
        unique.dedup();
        let values: Vec<_> = unique.par_iter().map(|&k| kernel.symbol_qhat(&[k])).collect();
        let symbol_converged = values.iter().all(|v| v.converged);
        if let Some((k, v)) = unique.iter().zip(&values).find(|(_, v)| !v.value.is_finite()) {
            return Err(Error::Divergent(format!("symbol at |xi| = {k} evaluates to {}", v.value)));
        }
        let mut qhat = vec![T::zero(); shape[0] * shape[1]];
        for &(r, kx, ky) in &radii {
            let pos = unique
                .binary_search_by(|x| x.partial_cmp(&r).expect("finite frequency"))
                .expect("radius present");
            let v = values[pos].value;
            let xs = [kx, (shape[0] - kx) % shape[0]];
            let ys = [ky, (shape[1] - ky) % shape[1]];
            for &x in &xs {
                for &y in &ys {
                    qhat[x + shape[0] * y] = v;
                }
            }
        }
        Ok(Self {
            dim,
            shape,
            lengths,
            forward,
            inverse,
            qhat,
            symbol_converged,
        })
    }

    pub fn len(&self) -> usize {
        self.shape[0] * self.shape[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> [usize; 2] {
        self.shape
    }

    /// Sampled `Q̂_ρ`, in grid index order.
    pub fn qhat(&self) -> &[T] {
        &self.qhat
    }

    /// False if any symbol quadrature missed its tolerance.
    pub fn symbol_converged(&self) -> bool {
        self.symbol_converged
    }

    /// Signed frequency vector of index `idx`.
    pub fn xi(&self, idx: usize) -> [T; 2] {
        let (kx, ky) = (idx % self.shape[0], idx / self.shape[0]);
        [
            frequency(kx, self.shape[0], self.lengths[0]),
            frequency(ky, self.shape[1], self.lengths[1]),
        ]
    }

    fn axis_index(&self, idx: usize, axis: usize) -> usize {
        if axis == 0 {
            idx % self.shape[0]
        } else {
            idx / self.shape[0]
        }
    }

    fn transform(&self, data: &mut [Complex<T>], inverse: bool) {
        let plans = if inverse { &self.inverse } else { &self.forward };
        let [nx, ny] = self.shape;
        data.par_chunks_mut(nx).for_each(|row| plans[0].process(row));
        if self.dim == 2 && ny > 1 {
            let mut t = vec![Complex::new(T::zero(), T::zero()); nx * ny];
            for y in 0..ny {
                for x in 0..nx {
                    t[y + ny * x] = data[x + nx * y];
                }
            }
            t.par_chunks_mut(ny).for_each(|col| plans[1].process(col));
            for x in 0..nx {
                for y in 0..ny {
                    data[x + nx * y] = t[y + ny * x];
                }
            }
        }
    }

    pub fn forward(&self, u: &[T]) -> Vec<Complex<T>> {
        assert_eq!(u.len(), self.len(), "field length");
        let mut buf: Vec<Complex<T>> = u.iter().map(|v| Complex::new(*v, T::zero())).collect();
        self.transform(&mut buf, false);
        buf
    }

    /// Real part of the normalized inverse transform.
    pub fn inverse_real(&self, mut spec: Vec<Complex<T>>) -> Vec<T> {
        self.transform(&mut spec, true);
        let scale = T::from_usize_lossy(self.len()).recip();
        spec.into_iter().map(|c| c.re * scale).collect()
    }

    /// Frequency response `2πi ξ_c Q̂(ξ)` of component `c` of the gradient.
    pub fn gradient_response(&self, idx: usize, c: usize) -> Complex<T> {
        let k = self.axis_index(idx, c);
        if is_nyquist(k, self.shape[c]) {
            return Complex::new(T::zero(), T::zero());
        }
        let xi = self.xi(idx)[c];
        Complex::new(T::zero(), T::TAU() * xi * self.qhat[idx])
    }

    /// Discrete symbol of the ρ-Laplacian, `Σ_c |2π ξ_c Q̂|²` with Nyquist modes removed.
    pub fn multiplier(&self, idx: usize) -> T {
        (0..self.dim).map(|c| self.gradient_response(idx, c).norm_sqr()).sum()
    }

    pub fn gradient(&self, u: &[T]) -> Vec<Vec<T>> {
        let spec = self.forward(u);
        (0..self.dim)
            .map(|c| {
                let s: Vec<Complex<T>> = spec
                    .iter()
                    .enumerate()
                    .map(|(i, z)| *z * self.gradient_response(i, c))
                    .collect();
                self.inverse_real(s)
            })
            .collect()
    }

    pub fn divergence(&self, v: &[Vec<T>]) -> Vec<T> {
        let mut acc = vec![Complex::new(T::zero(), T::zero()); self.len()];
        for (c, comp) in v.iter().enumerate().take(self.dim) {
            let spec = self.forward(comp);
            for (i, z) in spec.into_iter().enumerate() {
                acc[i] = acc[i] + z * self.gradient_response(i, c);
            }
        }
        self.inverse_real(acc)
    }

    /// Periodic convolution with `Q_ρ`.
    pub fn convolve_q(&self, u: &[T]) -> Vec<T> {
        let spec = self.forward(u);
        self.inverse_real(spec.into_iter().zip(&self.qhat).map(|(z, q)| z * *q).collect())
    }

    /// Division by `Q̂_ρ`, clamping magnitudes below `floor`.
    pub fn deconvolve_q(&self, v: &[T], floor: T) -> Result<Vec<T>> {
        let q0 = self.qhat[0];
        if floor <= T::zero() {
            let threshold = T::lit(SYMBOL_ZERO_RATIO) * q0.abs();
            for (i, q) in self.qhat.iter().enumerate() {
                if q.abs() < threshold || q.signum() != q0.signum() {
                    let xi = self.xi(i);
                    return Err(Error::SymbolNearZero {
                        xi: xi[0].hypot(xi[1]).as_f64(),
                        value: q.as_f64(),
                    });
                }
            }
        }
        let spec = self.forward(v);
        let out = spec
            .into_iter()
            .zip(&self.qhat)
            .map(|(z, q)| {
                let d = if q.abs() < floor {
                    if *q < T::zero() {
                        -floor
                    } else {
                        floor
                    }
                } else {
                    *q
                };
                z / d
            })
            .collect();
        Ok(self.inverse_real(out))
    }

    /// First row of the circulant `GᵀG`: inverse transform of the multiplier.
    pub fn stiffness_stencil(&self) -> Vec<T> {
        let spec: Vec<Complex<T>> = (0..self.len())
            .map(|i| Complex::new(self.multiplier(i), T::zero()))
            .collect();
        self.inverse_real(spec)
    }

    /// Gradient of the unit impulse at node 0, one vector per component.
    pub fn impulse_response(&self) -> Vec<Vec<T>> {
        let mut e = vec![T::zero(); self.len()];
        e[0] = T::one();
        self.gradient(&e)
    }
}

/// Rejects fields that do not vanish on the padding ring.
pub(crate) fn check_padding<T: Real>(grid: &Grid<T>, comps: &[&[T]]) -> Result<()> {
    let mut pad = T::zero();
    let mut all = T::zero();
    for c in comps {
        for (v, r) in c.iter().zip(grid.regions()) {
            all = all.max(v.abs());
            if *r == Region::Exterior {
                pad = pad.max(v.abs());
            }
        }
    }
    if pad > T::lit(PADDING_TOLERANCE) * all {
        return Err(Error::PaddingNotZero(pad.as_f64()));
    }
    Ok(())
}
