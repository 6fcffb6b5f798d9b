//! Sampled admissibility checks for the kernel hypotheses H0–H4.
//!
//! Every verdict is a numerical surrogate evaluated on a fixed log grid:
//! monotonicity is checked sample to sample, derivative bounds by finite
//! differences in `log r`, and almost-monotonicity by the worst sampled ratio
//! constant together with the log-log slope over the lowest sampled decade.

use std::fmt::Write as _;

use super::{FamilyTag, Kernel, Raw};
use crate::scalar::{sphere_area, Real};

/// Threshold on sampled almost-monotonicity constants.
pub const RATIO_CONSTANT_FLOOR: f64 = 1e-3;
/// Largest accepted drift of `log F` per unit `log r` near the origin.
pub const SLOPE_SLACK: f64 = 1e-3;
/// Largest accepted fitted constant C(k) in the H2 derivative bound.
pub const H2_CONSTANT_CAP: f64 = 1e3;
/// Exponents ν tried for H1.
const H1_NUS: [f64; 7] = [0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck<T> {
    pub verdict: Verdict,
    /// Radius pair exhibiting the violation (always present on failure).
    pub witness: Option<(T, T)>,
    /// Fitted or sampled constant relevant to the hypothesis.
    pub constant: Option<T>,
}

impl<T: Real> HypothesisCheck<T> {
    fn pass(constant: Option<T>) -> Self {
        Self {
            verdict: Verdict::Pass,
            witness: None,
            constant,
        }
    }

    fn fail(witness: (T, T), constant: Option<T>) -> Self {
        Self {
            verdict: Verdict::Fail,
            witness: Some(witness),
            constant,
        }
    }

    fn inconclusive() -> Self {
        Self {
            verdict: Verdict::Inconclusive,
            witness: None,
            constant: None,
        }
    }
}

/// Sampled verdicts for H0–H4.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport<T> {
    pub epsilon: T,
    pub radii: Vec<T>,
    pub h0: HypothesisCheck<T>,
    pub h1: HypothesisCheck<T>,
    pub h2: HypothesisCheck<T>,
    pub h3: HypothesisCheck<T>,
    pub h4: HypothesisCheck<T>,
    /// Largest ν for which `r^ν f_ρ` is decreasing.
    pub h1_nu: Option<T>,
    /// Fitted C(1), C(2).
    pub h2_constants: [T; 2],
    /// Range of tested s passing H3.
    pub h3_range: Option<(T, T)>,
    /// Range of tested t passing H4.
    pub h4_range: Option<(T, T)>,
}

impl<T: Real> HypothesisReport<T> {
    /// Widest passing `(s, t)` pair: smallest s accepted by H3, largest t accepted by H4.
    pub fn window(&self) -> Option<(T, T)> {
        match (self.h3_range, self.h4_range) {
            (Some((s_lo, _)), Some((_, t_hi))) => Some((s_lo, t_hi)),
            _ => None,
        }
    }

    /// Tightest passing pair: largest s accepted by H3, smallest t accepted by H4.
    pub fn tight_pair(&self) -> Option<(T, T)> {
        match (self.h3_range, self.h4_range) {
            (Some((_, s_hi)), Some((t_lo, _))) => Some((s_hi, t_lo)),
            _ => None,
        }
    }

    pub fn all_pass(&self) -> bool {
        [&self.h0, &self.h1, &self.h2, &self.h3, &self.h4]
            .iter()
            .all(|c| c.verdict == Verdict::Pass)
    }

    /// Flat `key = value` text report.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "epsilon = {:.16e}", self.epsilon.as_f64());
        let _ = writeln!(out, "samples = {}", self.radii.len());
        if let (Some(lo), Some(hi)) = (self.radii.first(), self.radii.last()) {
            let _ = writeln!(out, "radius_min = {:.16e}", lo.as_f64());
            let _ = writeln!(out, "radius_max = {:.16e}", hi.as_f64());
        }
        for (name, c) in [
            ("h0", &self.h0),
            ("h1", &self.h1),
            ("h2", &self.h2),
            ("h3", &self.h3),
            ("h4", &self.h4),
        ] {
            let _ = writeln!(out, "{name}.verdict = {}", c.verdict.name());
            if let Some(k) = c.constant {
                let _ = writeln!(out, "{name}.constant = {:.16e}", k.as_f64());
            }
            if let Some((a, b)) = c.witness {
                let _ = writeln!(out, "{name}.witness = {:.16e}, {:.16e}", a.as_f64(), b.as_f64());
            }
        }
        if let Some(nu) = self.h1_nu {
            let _ = writeln!(out, "h1.nu = {:.16e}", nu.as_f64());
        }
        let _ = writeln!(out, "h2.c1 = {:.16e}", self.h2_constants[0].as_f64());
        let _ = writeln!(out, "h2.c2 = {:.16e}", self.h2_constants[1].as_f64());
        if let Some((a, b)) = self.h3_range {
            let _ = writeln!(out, "h3.s_range = {:.16e}, {:.16e}", a.as_f64(), b.as_f64());
        }
        if let Some((a, b)) = self.h4_range {
            let _ = writeln!(out, "h4.t_range = {:.16e}, {:.16e}", a.as_f64(), b.as_f64());
        }
        if let Some((s, t)) = self.window() {
            let _ = writeln!(out, "window = {:.16e}, {:.16e}", s.as_f64(), t.as_f64());
        }
        out
    }
}

/// Log-spaced radii from `lo` to `hi` with `per_decade` points per decade.
pub fn log_radii<T: Real>(lo: T, hi: T, per_decade: usize) -> Vec<T> {
    let decades = (hi / lo).log10();
    let count = (decades * T::from_usize_lossy(per_decade)).ceil().to_usize().unwrap_or(1).max(1);
    let step = decades / T::from_usize_lossy(count);
    (0..=count)
        .map(|i| {
            if i == count {
                hi
            } else {
                lo * T::lit(10.0).powf(step * T::from_usize_lossy(i))
            }
        })
        .collect()
}

/// Worst constants for almost-decreasing (`F(t) ≥ C F(u)`, t ≤ u) and
/// almost-increasing (`F(t) ≤ F(u) / C`) behaviour, with the witness indices.
fn ratio_constants<T: Real>(f: &[T]) -> ((T, usize, usize), (T, usize, usize)) {
    let mut dec = (T::one(), 0, 0);
    let mut inc = (T::one(), 0, 0);
    let (mut min_i, mut max_i) = (0usize, 0usize);
    for j in 0..f.len() {
        if f[j] < f[min_i] {
            min_i = j;
        }
        if f[j] > f[max_i] {
            max_i = j;
        }
        if f[j] > T::zero() {
            let c = f[min_i] / f[j];
            if c < dec.0 {
                dec = (c, min_i, j);
            }
        }
        if f[max_i] > T::zero() {
            let c = f[j] / f[max_i];
            if c < inc.0 {
                inc = (c, max_i, j);
            }
        }
    }
    (dec, inc)
}

fn loglog_slope<T: Real>(r: &[T], f: &[T]) -> Option<T> {
    let pts: Vec<(T, T)> = r
        .iter()
        .zip(f)
        .filter(|(_, v)| **v > T::zero())
        .map(|(x, v)| (x.ln(), v.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = T::from_usize_lossy(pts.len());
    let mx = pts.iter().map(|p| p.0).sum::<T>() / n;
    let my = pts.iter().map(|p| p.1).sum::<T>() / n;
    let sxy: T = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: T = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

impl<T: Real> Kernel<T> {
    /// Checks H0–H4 on the samples of `radii` lying in `(0, epsilon]`.
    ///
    /// `radii` should reach down to 1e-6 on a log scale; with coarser grids the
    /// almost-monotonicity verdicts are reported as inconclusive.
    pub fn check_hypotheses(&self, radii: &[T], epsilon: T) -> HypothesisReport<T> {
        let mut r: Vec<T> = radii
            .iter()
            .copied()
            .filter(|x| *x > T::zero() && *x <= epsilon)
            .collect();
        r.sort_by(|a, b| a.partial_cmp(b).expect("finite radii"));
        r.dedup();
        let coverage_ok = r.len() >= 3 && r[0] <= T::lit(1e-6) * (T::one() + T::lit(1e-9));
        let n = self.dim as i32;
        let rho: Vec<T> = r.iter().map(|&x| self.profile(x)).collect();

        let h0 = self.check_h0(&r, &rho, epsilon);

        let f: Vec<T> = r.iter().zip(&rho).map(|(x, v)| x.powi(n - 2) * *v).collect();
        let (h1, h1_nu) = check_h1(&r, &f);
        let (h2, h2_constants) = check_h2(&r, &f);

        let (mut h3, mut h4, mut h3_range, mut h4_range) = (
            HypothesisCheck::inconclusive(),
            HypothesisCheck::inconclusive(),
            None,
            None,
        );
        if coverage_ok {
            let lowest_decade = r.iter().take_while(|x| **x <= r[0] * T::lit(10.0)).count().max(3);
            let mut h3_fail = None;
            let mut h4_fail = None;
            let mut h3_best: Option<T> = None;
            let mut h4_best: Option<T> = None;
            for i in 1..100 {
                let s = T::lit(i as f64 / 100.0);
                let exp = T::from_usize_lossy(self.dim) + s - T::one();
                let big_f: Vec<T> = r.iter().zip(&rho).map(|(x, v)| x.powf(exp) * *v).collect();
                let ((c_dec, a_dec, b_dec), (c_inc, a_inc, b_inc)) = ratio_constants(&big_f);
                let slope = loglog_slope(&r[..lowest_decade], &big_f[..lowest_decade]);
                let floor = T::lit(RATIO_CONSTANT_FLOOR);
                let slack = T::lit(SLOPE_SLACK);
                let dec_ok = c_dec >= floor && slope.is_some_and(|m| m <= slack);
                let inc_ok = c_inc >= floor && slope.is_some_and(|m| m >= -slack);
                if dec_ok {
                    h3_range = Some(match h3_range {
                        None => (s, s),
                        Some((lo, _)) => (lo, s),
                    });
                    if h3_best.is_none_or(|c| c_dec < c) {
                        h3_best = Some(c_dec);
                    }
                } else if h3_fail.is_none() {
                    let w = if c_dec < floor {
                        (r[a_dec], r[b_dec])
                    } else {
                        (r[0], r[lowest_decade - 1])
                    };
                    h3_fail = Some((w, c_dec));
                }
                if inc_ok {
                    h4_range = Some(match h4_range {
                        None => (s, s),
                        Some((lo, _)) => (lo, s),
                    });
                    if h4_best.is_none_or(|c| c_inc < c) {
                        h4_best = Some(c_inc);
                    }
                } else if h4_fail.is_none() {
                    let w = if c_inc < floor {
                        (r[a_inc], r[b_inc])
                    } else {
                        (r[0], r[lowest_decade - 1])
                    };
                    h4_fail = Some((w, c_inc));
                }
            }
            h3 = match (h3_range, h3_fail) {
                (Some(_), _) => HypothesisCheck::pass(h3_best),
                (None, Some((w, c))) => HypothesisCheck::fail(w, Some(c)),
                (None, None) => HypothesisCheck::inconclusive(),
            };
            h4 = match (h4_range, h4_fail) {
                (Some(_), _) => HypothesisCheck::pass(h4_best),
                (None, Some((w, c))) => HypothesisCheck::fail(w, Some(c)),
                (None, None) => HypothesisCheck::inconclusive(),
            };
        }

        HypothesisReport {
            epsilon,
            radii: r,
            h0,
            h1,
            h2,
            h3,
            h4,
            h1_nu,
            h2_constants,
            h3_range,
            h4_range,
        }
    }

    fn check_h0(&self, r: &[T], rho: &[T], epsilon: T) -> HypothesisCheck<T> {
        if r.is_empty() {
            return HypothesisCheck::inconclusive();
        }
        // nonnegativity over the whole sampled support, positivity of the infimum near 0
        let support = self.support_radius();
        let top = if support.is_finite() { support } else { epsilon.max(T::one()) };
        let wide = log_radii(r[0], top, 50);
        if let Some(bad) = wide.iter().copied().find(|&x| self.profile(x) < T::zero()) {
            return HypothesisCheck::fail((bad, bad), None);
        }
        let (imin, vmin) = rho
            .iter()
            .copied()
            .enumerate()
            .fold((0, T::infinity()), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
        if !(vmin > T::zero()) {
            return HypothesisCheck::fail((r[0], r[imin]), Some(vmin));
        }
        // ∫ min{1, |x|^{-1}} ρ dx
        let integral = match &self.raw {
            Raw::PurePower { s } if self.family_tag() == FamilyTag::PurePower => {
                // |S| (∫_0^1 r^{-s} dr + ∫_1^∞ r^{-1-s} dr) · scale · dilation^{n+s-1}
                let n = T::from_usize_lossy(self.dim);
                let area: T = sphere_area(self.dim);
                let amp = self.scale * self.dilation.powf(n + *s - T::one());
                // the integrand changes form at |x| = 1 irrespective of the dilation
                Some(area * amp * (T::one() / (T::one() - *s) + T::one() / *s))
            }
            _ => {
                let n = self.dim as i32;
                let q = self.radial_quad(
                    |x, v| v * x.powi(n - 1) * T::one().min(x.recip()),
                    T::zero(),
                    support,
                    None,
                    T::lit(1e-10),
                );
                if q.converged {
                    Some(sphere_area::<T>(self.dim) * q.value)
                } else {
                    None
                }
            }
        };
        match integral {
            Some(v) if v.is_finite() => HypothesisCheck::pass(Some(vmin)),
            Some(_) => HypothesisCheck::fail((r[0], epsilon), Some(vmin)),
            None => HypothesisCheck::inconclusive(),
        }
    }
}

fn first_increase<T: Real>(r: &[T], f: &[T]) -> Option<(T, T)> {
    let tol = T::lit(1e-12);
    f.windows(2)
        .position(|w| w[1] > w[0] * (T::one() + tol) + T::min_positive_value())
        .map(|i| (r[i], r[i + 1]))
}

fn check_h1<T: Real>(r: &[T], f: &[T]) -> (HypothesisCheck<T>, Option<T>) {
    if r.len() < 2 {
        return (HypothesisCheck::inconclusive(), None);
    }
    if let Some(w) = first_increase(r, f) {
        return (HypothesisCheck::fail(w, None), None);
    }
    let mut best = None;
    let mut witness = None;
    for nu in H1_NUS {
        let nu = T::lit(nu);
        let g: Vec<T> = r.iter().zip(f).map(|(x, v)| x.powf(nu) * *v).collect();
        match first_increase(r, &g) {
            None => best = Some(nu),
            Some(w) => {
                if witness.is_none() {
                    witness = Some(w);
                }
            }
        }
    }
    match best {
        Some(nu) => (HypothesisCheck::pass(Some(nu)), Some(nu)),
        None => (
            HypothesisCheck::fail(witness.expect("some ν failed"), None),
            None,
        ),
    }
}

/// Fitted `max |d^k f / dr^k| r^k / f` for k = 1, 2 by central differences in log r.
fn check_h2<T: Real>(r: &[T], f: &[T]) -> (HypothesisCheck<T>, [T; 2]) {
    let mut c = [T::zero(), T::zero()];
    if r.len() < 3 {
        return (HypothesisCheck::inconclusive(), c);
    }
    let mut witness = None;
    for i in 1..r.len() - 1 {
        let (x0, x1, x2) = (r[i - 1].ln(), r[i].ln(), r[i + 1].ln());
        let (hl, hr) = (x1 - x0, x2 - x1);
        // nonuniform central differences in x = log r
        let fx = (f[i + 1] - f[i - 1]) / (hl + hr);
        let fxx = T::lit(2.0) * ((f[i + 1] - f[i]) / hr - (f[i] - f[i - 1]) / hl) / (hl + hr);
        // r f' = f_x, r² f'' = f_xx - f_x
        let d1 = fx.abs();
        let d2 = (fxx - fx).abs();
        let (k1, k2) = if f[i] > T::zero() {
            (d1 / f[i], d2 / f[i])
        } else if d1 == T::zero() && d2 == T::zero() {
            (T::zero(), T::zero())
        } else {
            (T::infinity(), T::infinity())
        };
        if (k1 > c[0] || k2 > c[1]) && witness.is_none() && k1.max(k2) > T::lit(H2_CONSTANT_CAP) {
            witness = Some((r[i - 1], r[i + 1]));
        }
        c[0] = c[0].max(k1);
        c[1] = c[1].max(k2);
    }
    let cap = T::lit(H2_CONSTANT_CAP);
    let check = if c[0] <= cap && c[1] <= cap {
        HypothesisCheck::pass(Some(c[0].max(c[1])))
    } else {
        HypothesisCheck::fail(witness.unwrap_or((r[0], r[r.len() - 1])), Some(c[0].max(c[1])))
    };
    (check, c)
}
