//! The discrete p-Dirichlet energy `(1/p) w_s Σ_k |g_k|^p` over the samples
//! `g = G u` of a [`GradientMap`], with its first and second derivatives.

use std::sync::Arc;

use rayon::prelude::*;

use crate::calculus::GradientMap;
use crate::linalg::DenseMatrix;
use crate::scalar::Real;

/// Largest `rows · cols` for which the gradient matrix is cached densely.
const DENSE_ENTRY_CAP: usize = 1 << 23;

/// Sums `Σ_c G_cᵀ W_c` where `W_c = Σ_d diag(B^{cd}) G_d` and `blocks[k]`
/// holds the symmetric 2×2 block `[b11, b12, b22]` of sample `k`.
pub(crate) fn weighted_cross_gram<T: Real>(g: &DenseMatrix<T>, dim: usize, blocks: &[[T; 3]], scale: T) -> DenseMatrix<T> {
    let n = g.cols();
    let s = blocks.len();
    if dim == 1 {
        let w: Vec<T> = blocks.iter().map(|b| b[0] * scale).collect();
        return g.weighted_gram(&w);
    }
    // W rows for each component
    let entry = |b: &[T; 3], c: usize, d: usize| match (c, d) {
        (0, 0) => b[0],
        (1, 1) => b[2],
        _ => b[1],
    };
    let w: Vec<Vec<T>> = (0..dim)
        .map(|c| {
            let mut out = vec![T::zero(); s * n];
            out.par_chunks_mut(n).enumerate().for_each(|(k, row)| {
                for d in 0..dim {
                    let coef = entry(&blocks[k], c, d) * scale;
                    if coef == T::zero() {
                        continue;
                    }
                    for (o, x) in row.iter_mut().zip(g.row(d * s + k)) {
                        *o = *o + coef * *x;
                    }
                }
            });
            out
        })
        .collect();
    let mut h = DenseMatrix::zeros(n, n);
    h.as_mut_slice().par_chunks_mut(n).enumerate().for_each(|(i, hrow)| {
        for (c, wc) in w.iter().enumerate() {
            for k in 0..s {
                let a = g[(c * s + k, i)];
                if a == T::zero() {
                    continue;
                }
                for (o, x) in hrow.iter_mut().zip(&wc[k * n..(k + 1) * n]) {
                    *o = *o + a * *x;
                }
            }
        }
    });
    h.symmetrize();
    h
}

/// Energy, flux and Hessian of the p-Dirichlet integral for one gradient map.
#[derive(Clone)]
pub struct PLapOperator<T: Real> {
    map: Arc<dyn GradientMap<T>>,
    p: T,
    dense: Option<Arc<DenseMatrix<T>>>,
}

impl<T: Real> std::fmt::Debug for PLapOperator<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PLapOperator")
            .field("p", &self.p)
            .field("dofs", &self.map.dofs())
            .field("samples", &self.map.samples())
            .field("dense", &self.dense.is_some())
            .finish()
    }
}

impl<T: Real> PLapOperator<T> {
    pub fn new(map: Arc<dyn GradientMap<T>>, p: T) -> Self {
        let entries = map.dim() * map.samples() * map.dofs();
        let dense = (entries <= DENSE_ENTRY_CAP).then(|| Arc::new(map.matrix()));
        Self { map, p, dense }
    }

    /// Same map and cached matrix with another exponent.
    pub fn with_exponent(&self, p: T) -> Self {
        Self {
            map: self.map.clone(),
            p,
            dense: self.dense.clone(),
        }
    }

    pub fn map(&self) -> &Arc<dyn GradientMap<T>> {
        &self.map
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn dofs(&self) -> usize {
        self.map.dofs()
    }

    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    pub fn samples(&self) -> usize {
        self.map.samples()
    }

    pub fn mass_weight(&self) -> T {
        self.map.mass_weight()
    }

    pub fn sample_weight(&self) -> T {
        self.map.sample_weight()
    }

    pub fn gradient_matrix(&self) -> DenseMatrix<T> {
        match &self.dense {
            Some(m) => (**m).clone(),
            None => self.map.matrix(),
        }
    }

    pub fn gradients(&self, x: &[T]) -> Vec<T> {
        match &self.dense {
            Some(m) => m.matvec(x),
            None => self.map.apply(x),
        }
    }

    pub fn transpose(&self, g: &[T]) -> Vec<T> {
        match &self.dense {
            Some(m) => m.transpose_matvec(g),
            None => self.map.apply_transpose(g),
        }
    }

    /// `s_k = |g_k|²` per sample.
    pub(crate) fn squared_magnitudes(&self, g: &[T]) -> Vec<T> {
        let s = self.samples();
        (0..s)
            .map(|k| (0..self.dim()).fold(T::zero(), |acc, c| acc + g[c * s + k] * g[c * s + k]))
            .collect()
    }

    /// `w_s Σ_k (|g_k|² + ε²)^{p/2}`, i.e. `∫|∇u|^p` when ε = 0.
    pub fn gradient_power(&self, g: &[T], eps: T) -> T {
        let half_p = self.p * T::lit(0.5);
        let e2 = eps * eps;
        let sum: T = self
            .squared_magnitudes(g)
            .into_iter()
            .map(|s| {
                let v = s + e2;
                if v == T::zero() {
                    T::zero()
                } else {
                    v.powf(half_p)
                }
            })
            .sum();
        self.sample_weight() * sum
    }

    /// `∫|∇u|^p` for degrees of freedom `x`.
    pub fn dirichlet_integral(&self, x: &[T]) -> T {
        self.gradient_power(&self.gradients(x), T::zero())
    }

    /// Flux `(|g|² + ε²)^{p/2−1} g`, component-major.
    pub fn flux(&self, g: &[T], eps: T) -> Vec<T> {
        let s = self.samples();
        let e2 = eps * eps;
        let expo = self.p * T::lit(0.5) - T::one();
        let mags = self.squared_magnitudes(g);
        let mut out = g.to_vec();
        for (k, m) in mags.into_iter().enumerate() {
            let v = m + e2;
            let f = if v == T::zero() { T::zero() } else { v.powf(expo) };
            for c in 0..self.dim() {
                out[c * s + k] = out[c * s + k] * f;
            }
        }
        out
    }

    /// Weak form `w_s Gᵀ(|∇u|^{p−2}∇u)`: the dual vector of `(−Δ)_{ρ,p} u`.
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let g = self.gradients(x);
        self.dual_from_gradients(&g, T::zero())
    }

    pub(crate) fn dual_from_gradients(&self, g: &[T], eps: T) -> Vec<T> {
        let w = self.sample_weight();
        self.transpose(&self.flux(g, eps)).into_iter().map(|v| v * w).collect()
    }

    /// Per-sample symmetric Hessian blocks of `(1/p)(|g|²+ε²)^{p/2}`.
    fn hessian_blocks(&self, g: &[T], eps: T) -> Vec<[T; 3]> {
        let s = self.samples();
        let p = self.p;
        let e2 = eps * eps;
        let two = T::lit(2.0);
        self.squared_magnitudes(g)
            .into_iter()
            .enumerate()
            .map(|(k, m)| {
                let v = m + e2;
                if v == T::zero() {
                    // only reachable for p ≥ 2 without regularization
                    let d = if p == two { T::one() } else { T::zero() };
                    return [d, T::zero(), d];
                }
                let a = v.powf(p / two - T::one());
                let b = (p - two) * v.powf(p / two - two);
                let gx = g[k];
                if self.dim() == 1 {
                    [a + b * gx * gx, T::zero(), T::zero()]
                } else {
                    let gy = g[s + k];
                    [a + b * gx * gx, b * gx * gy, a + b * gy * gy]
                }
            })
            .collect()
    }

    /// Dense Hessian `w_s Gᵀ B(g) G`.
    pub fn hessian(&self, g: &[T], eps: T) -> DenseMatrix<T> {
        let blocks = self.hessian_blocks(g, eps);
        let gm = match &self.dense {
            Some(m) => m.clone(),
            None => Arc::new(self.map.matrix()),
        };
        weighted_cross_gram(&gm, self.dim(), &blocks, self.sample_weight())
    }

    /// `w_s GᵀG`, the Hessian of the p = 2 energy.
    pub fn stiffness(&self) -> DenseMatrix<T> {
        let one = [T::one(), T::zero(), T::one()];
        let blocks = vec![one; self.samples()];
        let gm = match &self.dense {
            Some(m) => m.clone(),
            None => Arc::new(self.map.matrix()),
        };
        weighted_cross_gram(&gm, self.dim(), &blocks, self.sample_weight())
    }

    /// Matrix-free Hessian action.
    pub fn hessian_apply(&self, g: &[T], eps: T, v: &[T]) -> Vec<T> {
        let blocks = self.hessian_blocks(g, eps);
        let s = self.samples();
        let gv = self.gradients(v);
        let mut bg = vec![T::zero(); gv.len()];
        for (k, b) in blocks.iter().enumerate() {
            if self.dim() == 1 {
                bg[k] = b[0] * gv[k];
            } else {
                bg[k] = b[0] * gv[k] + b[1] * gv[s + k];
                bg[s + k] = b[1] * gv[k] + b[2] * gv[s + k];
            }
        }
        let w = self.sample_weight();
        self.transpose(&bg).into_iter().map(|x| x * w).collect()
    }

    /// Rayleigh quotient `∫|∇u|^p / ‖u‖_p^p` on degrees of freedom.
    pub fn rayleigh(&self, x: &[T]) -> T {
        let num = self.dirichlet_integral(x);
        let den = self.lp_pow(x);
        num / den
    }

    /// `w_m Σ |x_i|^p`.
    pub fn lp_pow(&self, x: &[T]) -> T {
        self.mass_weight() * x.iter().map(|v| v.abs().powf(self.p)).sum::<T>()
    }
}
