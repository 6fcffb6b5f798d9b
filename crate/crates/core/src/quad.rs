//! One-dimensional quadrature: adaptive Gauss-Kronrod for smooth panels and
//! tanh-sinh for panels with an integrable endpoint singularity.

use crate::scalar::Real;

/// Outcome of a single quadrature call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: T,
    pub evals: usize,
    pub converged: bool,
}

impl<T: Real> QuadResult<T> {
    fn zero() -> Self {
        Self {
            value: T::zero(),
            error: T::zero(),
            evals: 0,
            converged: true,
        }
    }

    pub(crate) fn add(self, other: Self) -> Self {
        Self {
            value: self.value + other.value,
            error: self.error + other.error,
            evals: self.evals + other.evals,
            converged: self.converged && other.converged,
        }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let fc = f(mid);
    let mut kron = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for i in 0..7 {
        let dx = half * T::lit(XGK[i]);
        let pair = f(mid - dx) + f(mid + dx);
        kron = kron + pair * T::lit(WGK[i]);
        if i % 2 == 1 {
            gauss = gauss + pair * T::lit(WG[i / 2]);
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

/// Adaptive Gauss-Kronrod (7/15) with global error control by bisecting the
/// worst interval.
pub fn gauss_kronrod<T: Real, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    abs_tol: T,
    rel_tol: T,
    max_intervals: usize,
) -> QuadResult<T> {
    if a == b {
        return QuadResult::zero();
    }
    let (v, e) = gk15(f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    let mut evals = 15;
    loop {
        let total: T = intervals.iter().map(|iv| iv.2).sum();
        let err: T = intervals.iter().map(|iv| iv.3).sum();
        let target = abs_tol.max(rel_tol * total.abs());
        if err <= target || !total.is_finite() {
            return QuadResult {
                value: total,
                error: err,
                evals,
                converged: total.is_finite(),
            };
        }
        if intervals.len() >= max_intervals {
            return QuadResult {
                value: total,
                error: err,
                evals,
                converged: false,
            };
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |acc, (i, iv)| {
                if iv.3 > acc.1 {
                    (i, iv.3)
                } else {
                    acc
                }
            });
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = (lo + hi) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            return QuadResult {
                value: total,
                error: err,
                evals,
                converged: false,
            };
        }
        let (v1, e1) = gk15(f, lo, mid);
        let (v2, e2) = gk15(f, mid, hi);
        evals += 30;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

/// Tanh-sinh (double exponential) quadrature on `[a, b]`.
///
/// Abscissae are generated as offsets from the endpoints, so an integrable
/// singularity at `a = 0` is sampled down to the smallest representable radius.
pub fn tanh_sinh<T: Real, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    abs_tol: T,
    rel_tol: T,
) -> QuadResult<T> {
    if a == b {
        return QuadResult::zero();
    }
    if let Some((cut, tail)) = overflow_cut(f, a, b) {
        let mut body = tanh_sinh(f, a + cut, b, abs_tol, rel_tol);
        body.value = body.value + tail;
        body.converged = body.converged && tail.is_finite();
        return body;
    }
    let half = (b - a) * T::lit(0.5);
    let pi_2 = T::FRAC_PI_2();
    let t_max = T::lit(7.0);
    let mid = a + half;

    // sum of weighted samples at abscissae j * step for j of the given parity
    let level_sum = |step: T, odd_only: bool, evals: &mut usize| -> T {
        let mut acc = T::zero();
        let mut j = 1usize;
        loop {
            if odd_only && j % 2 == 0 {
                j += 1;
                continue;
            }
            let t = step * T::from_usize_lossy(j);
            if t > t_max {
                break;
            }
            let u = pi_2 * t.sinh();
            let cu = u.cosh();
            let w = pi_2 * t.cosh() / (cu * cu);
            let d = half * (-u).exp() / cu;
            if !(w > T::zero()) || !(d > T::zero()) {
                break;
            }
            // abscissae that round onto an endpoint are dropped
            let (xl, xr) = (a + d, b - d);
            let fl = if xl > a { f(xl) } else { T::zero() };
            let fr = if xr < b { f(xr) } else { T::zero() };
            *evals += 2;
            let mut term = T::zero();
            if fl.is_finite() {
                term = term + fl;
            }
            if fr.is_finite() {
                term = term + fr;
            }
            acc = acc + w * term;
            j += 1;
        }
        acc
    };

    let mut evals = 1;
    let mut step = T::lit(0.5);
    let mut sum = pi_2 * f(mid) + level_sum(step, false, &mut evals);
    let mut estimate = half * step * sum;
    let mut error = estimate.abs();
    for level in 1..=10 {
        step = step * T::lit(0.5);
        sum = sum + level_sum(step, true, &mut evals);
        let next = half * step * sum;
        error = (next - estimate).abs();
        estimate = next;
        if level >= 3 && error <= abs_tol.max(rel_tol * estimate.abs()) {
            return QuadResult {
                value: estimate,
                error,
                evals,
                converged: estimate.is_finite(),
            };
        }
    }
    QuadResult {
        value: estimate,
        error,
        evals,
        converged: false,
    }
}

/// When `f` overflows next to `a` although its integral converges (an
/// intermediate factor blows up before a compensating power is applied),
/// returns an offset `d` below which `f` is replaced by the power law through
/// `f(a + d)` and `f(a + 2d)`, together with that law's integral over `(a, a + d)`.
fn overflow_cut<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> Option<(T, T)> {
    let half = (b - a) * T::lit(0.5);
    let offset = |k: usize| half * T::lit(0.5).powi(k as i32);
    let finite_at = |k: usize| {
        // offsets that round onto `a` are never sampled
        let x = a + offset(k);
        x <= a || f(x).is_finite()
    };
    let deepest = (half / T::min_positive_value()).log2().to_usize().unwrap_or(0);
    if deepest < 8 || finite_at(deepest) || !finite_at(0) {
        return None;
    }
    // largest k with f(a + half 2^-k) finite
    let (mut lo, mut hi) = (0, deepest);
    while hi - lo > 1 {
        let m = (lo + hi) / 2;
        if finite_at(m) {
            lo = m;
        } else {
            hi = m;
        }
    }
    let k = lo.saturating_sub(4).max(1);
    let d = offset(k);
    let (f1, f2) = (f(a + d), f(a + d * T::lit(2.0)));
    let gamma = if f1 != T::zero() && f2 != T::zero() && (f1 > T::zero()) == (f2 > T::zero()) {
        (f1 / f2).log2()
    } else {
        T::zero()
    };
    let tail = if gamma < T::one() {
        f1 * d / (T::one() - gamma)
    } else {
        T::infinity()
    };
    Some((d, tail))
}

/// Integrates over a sequence of panels `[p0, p1], [p1, p2], ...`.
///
/// The first panel uses tanh-sinh when `singular_left` is set (integrable
/// blow-up at `p0`), every other panel adaptive Gauss-Kronrod.
pub fn panels<T: Real, F: Fn(T) -> T>(
    f: &F,
    breaks: &[T],
    singular_left: bool,
    abs_tol: T,
    rel_tol: T,
) -> QuadResult<T> {
    let mut acc = QuadResult::zero();
    let per_panel_abs = abs_tol / T::from_usize_lossy(breaks.len().max(2));
    for (i, w) in breaks.windows(2).enumerate() {
        if w[1] <= w[0] {
            continue;
        }
        let r = if i == 0 && singular_left {
            tanh_sinh(f, w[0], w[1], per_panel_abs, rel_tol)
        } else {
            gauss_kronrod(f, w[0], w[1], per_panel_abs, rel_tol, 200)
        };
        acc = acc.add(r);
    }
    acc
}

/// Composite Gauss-Legendre nodes and weights on `[a, b]` with `panels`
/// equal panels of the 7-point rule.
pub fn gauss_legendre_nodes<T: Real>(a: T, b: T, panels: usize) -> Vec<(T, T)> {
    let mut out = Vec::with_capacity(panels * 7);
    let width = (b - a) / T::from_usize_lossy(panels);
    let half = width * T::lit(0.5);
    for p in 0..panels {
        let mid = a + width * (T::from_usize_lossy(p) + T::lit(0.5));
        out.push((mid, T::lit(WG[3]) * half));
        for i in 0..3 {
            let x = T::lit(XGK[2 * i + 1]) * half;
            out.push((mid - x, T::lit(WG[i]) * half));
            out.push((mid + x, T::lit(WG[i]) * half));
        }
    }
    out
}
