//! The profile `Q_ρ(x) = ∫_{|x|}^∞ ρ̄(t)/t dt`, its Fourier transform and the
//! multiplier `4π²|ξ|² Q̂_ρ(ξ)²` of the ρ-Laplacian.

use super::{Kernel, Raw};
use crate::error::{Error, Result};
use crate::quad;
use crate::scalar::{gamma, Real};

use super::table::interp_loglog;

/// Samples of `Q_ρ` at increasing radii, interpolated log-log.
#[derive(Debug, Clone, PartialEq)]
pub struct QProfile<T> {
    pub radii: Vec<T>,
    pub values: Vec<T>,
}

impl<T: Real> QProfile<T> {
    pub const INTERPOLATION: &'static str = "log-log piecewise linear";

    pub fn value_at(&self, r: T) -> T {
        let n = self.radii.len();
        if n == 0 || r > self.radii[n - 1] {
            return T::zero();
        }
        if r <= self.radii[0] {
            return self.values[0];
        }
        let i = self.radii.partition_point(|x| *x <= r) - 1;
        if i + 1 >= n {
            return self.values[n - 1];
        }
        interp_loglog(self.radii[i], self.radii[i + 1], self.values[i], self.values[i + 1], r)
    }
}

/// Value of `Q̂_ρ(ξ)` with a convergence flag from the quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolValue<T> {
    pub value: T,
    pub converged: bool,
}

const SYMBOL_REL_TOL: f64 = 1e-12;

impl<T: Real> Kernel<T> {
    /// `Q_ρ(r)` for a single radius, by quadrature of `ρ̄(e^u)` in `u = log t`.
    pub fn q(&self, r: T) -> Result<T> {
        if !(r > T::zero()) {
            return Err(Error::ParameterRange("Q is evaluated at positive radii".into()));
        }
        if let Raw::PurePower { s } = self.raw {
            let n = T::from_usize_lossy(self.dim);
            let a = n + s - T::one();
            return Ok(self.profile(r) / a);
        }
        let support = self.support_radius();
        if r >= support {
            return Ok(T::zero());
        }
        let mut breaks = vec![r.ln()];
        for b in self.breakpoints() {
            if b > r && b < support {
                breaks.push(b.ln());
            }
        }
        breaks.push(support.ln());
        let f = |u: T| self.profile(u.exp());
        let res = quad::panels(&f, &breaks, false, T::zero(), T::lit(1e-13).max(T::quad_eps()));
        if !res.converged || !res.value.is_finite() {
            return Err(Error::Divergent(format!("Q at radius {r}")));
        }
        Ok(res.value)
    }

    pub fn q_profile(&self, radii: &[T]) -> Result<QProfile<T>> {
        if radii.iter().any(|r| !(*r > T::zero())) {
            return Err(Error::ParameterRange("Q profile radii must be positive".into()));
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::ParameterRange("Q profile radii must be strictly increasing".into()));
        }
        let values = radii.iter().map(|&r| self.q(r)).collect::<Result<Vec<_>>>()?;
        Ok(QProfile {
            radii: radii.to_vec(),
            values,
        })
    }

    /// `∫ Q_ρ = (1/n) ∫ ρ`, the value of the transform at ξ = 0.
    pub fn q_integral(&self) -> Result<T> {
        Ok(self.mass()? / T::from_usize_lossy(self.dim))
    }

    /// `Q̂_ρ(ξ) = (2π|ξ|)^{-1} ∫ ρ(x) x₁ |x|^{-2} sin(2π|ξ| x₁) dx`.
    ///
    /// In one dimension the integral reduces to the half line; in two it is a
    /// radial integral of an angular integral evaluated by the periodic
    /// trapezoid rule. Pure power kernels are evaluated in closed form.
    pub fn symbol_qhat(&self, xi: &[T]) -> SymbolValue<T> {
        let k = xi.iter().map(|x| *x * *x).sum::<T>().sqrt();
        self.symbol_qhat_radial(k)
    }

    pub(crate) fn symbol_qhat_radial(&self, k: T) -> SymbolValue<T> {
        if k == T::zero() {
            return match self.q_integral() {
                Ok(v) => SymbolValue {
                    value: v,
                    converged: true,
                },
                Err(_) => SymbolValue {
                    value: T::infinity(),
                    converged: true,
                },
            };
        }
        if let Raw::PurePower { s } = self.raw {
            return SymbolValue {
                value: self.pure_power_qhat(s, k),
                converged: true,
            };
        }
        let two_pi = T::TAU();
        let omega = two_pi * k;
        let half_period = (T::lit(2.0) * k).recip();
        let support = self.support_radius();
        let rel = T::lit(SYMBOL_REL_TOL).max(T::quad_eps());
        let res = match self.dim {
            1 => self.radial_quad(
                |r, rho| rho * (omega * r).sin() / r,
                T::zero(),
                support,
                Some(half_period),
                rel,
            ),
            _ => self.radial_quad(
                |r, rho| rho * angular_sine_moment(omega * r),
                T::zero(),
                support,
                Some(half_period),
                rel,
            ),
        };
        let value = match self.dim {
            1 => res.value / (T::PI() * k),
            _ => res.value / (two_pi * k),
        };
        SymbolValue {
            value,
            converged: res.converged && value.is_finite(),
        }
    }

    fn pure_power_qhat(&self, s: T, k: T) -> T {
        // ρ̄(r) = a r^{-(n+s-1)} with a = scale · dilation^{n+s-1}
        let n = T::from_usize_lossy(self.dim);
        let a = self.scale * self.dilation.powf(n + s - T::one());
        let omega = T::TAU() * k;
        match self.dim {
            // (πk)^{-1} ∫_0^∞ r^{-1-s} sin(ωr) dr = (πk)^{-1} ω^s Γ(1-s) sin(πs/2) / s
            1 => {
                a * omega.powf(s) * gamma(T::one() - s) * (T::FRAC_PI_2() * s).sin()
                    / (s * T::PI() * k)
            }
            // k^{-1} ∫_0^∞ r^{-1-s} J₁(ωr) dr = k^{-1} ω^s 2^{-1-s} Γ((1-s)/2) / Γ((3+s)/2)
            _ => {
                let two = T::lit(2.0);
                a * omega.powf(s) * two.powf(-T::one() - s) * gamma((T::one() - s) / two)
                    / gamma((T::lit(3.0) + s) / two)
                    / k
            }
        }
    }

    /// Symbol `4π²|ξ|² Q̂_ρ(ξ)²` of the ρ-Laplacian.
    pub fn multiplier(&self, xi: &[T]) -> T {
        let k2 = xi.iter().map(|x| *x * *x).sum::<T>();
        if k2 == T::zero() {
            return T::zero();
        }
        let q = self.symbol_qhat(xi).value;
        T::lit(4.0) * T::PI() * T::PI() * k2 * q * q
    }
}

/// `∫_0^{2π} cos θ sin(a cos θ) dθ` by the periodic trapezoid rule.
pub(crate) fn angular_sine_moment<T: Real>(a: T) -> T {
    let m = (a.abs().ceil().to_usize().unwrap_or(0) + 40).div_ceil(4) * 4;
    let step = T::TAU() / T::from_usize_lossy(m);
    // quarter-period symmetry: the integrand is even in θ and under θ → π - θ
    let mut acc = T::zero();
    for j in 0..m {
        let c = (step * T::from_usize_lossy(j)).cos();
        acc = acc + c * (a * c).sin();
    }
    acc * step
}
