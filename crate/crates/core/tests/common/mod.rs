#![allow(dead_code)]

use std::sync::Arc;

use nlpl::calculus::{Field, Grid};
use nlpl::kernels::{Cutoff, HorizonMode, Kernel, KernelSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Hard-truncated power kernel with s = 1/2, normalized.
pub fn k1() -> Kernel<f64> {
    Kernel::new(
        KernelSpec::TruncatedPower {
            s: 0.5,
            cutoff: Cutoff::Hard,
        },
        1,
    )
    .unwrap()
    .normalize()
    .unwrap()
}

pub fn k1_2d() -> Kernel<f64> {
    Kernel::new(
        KernelSpec::TruncatedPower {
            s: 0.5,
            cutoff: Cutoff::Hard,
        },
        2,
    )
    .unwrap()
    .normalize()
    .unwrap()
}

pub fn k1_vanishing(delta: f64) -> Kernel<f64> {
    k1().rescale(delta, HorizonMode::Vanishing).unwrap()
}

/// Compactly supported polynomial bump `(1 - ((x - c)/w)²)⁴`.
pub fn bump(x: f64, c: f64, w: f64) -> f64 {
    let t = (x - c) / w;
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - t * t).powi(4)
    }
}

/// Sum of three random bumps inside (lo, hi).
pub fn random_smooth_1d(grid: &Arc<Grid<f64>>, lo: f64, hi: f64, seed: u64) -> Field<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            let w = rng.random_range(0.15..0.35) * (hi - lo);
            let c = rng.random_range(lo + w..hi - w);
            let a = rng.random_range(-1.0..1.0);
            (a, c, w)
        })
        .collect();
    Field::from_fn(grid, |x| terms.iter().map(|(a, c, w)| a * bump(x[0], *c, *w)).sum())
}

pub fn random_smooth_2d(grid: &Arc<Grid<f64>>, seed: u64) -> Field<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<(f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            let w = rng.random_range(0.2..0.35);
            let cx = rng.random_range(w..1.0 - w);
            let cy = rng.random_range(w..1.0 - w);
            (rng.random_range(-1.0..1.0), cx, cy, w)
        })
        .collect();
    Field::from_fn(grid, |x| {
        terms
            .iter()
            .map(|(a, cx, cy, w)| {
                let r = ((x[0] - cx).powi(2) + (x[1] - cy).powi(2)).sqrt();
                a * bump(r, 0.0, *w)
            })
            .sum()
    })
}

/// Random nodal values on Ω, zero elsewhere.
pub fn random_dofs(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn sup(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}
