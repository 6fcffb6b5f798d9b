//! Radial kernels ρ: construction, normalization, horizon rescaling and
//! tail analysis.
//!
//! A [`Kernel`] is a raw radial profile together with an amplitude and a
//! dilation, so that its radial representation reads
//! `ρ̄(r) = scale · raw(r / dilation)`. Normalization and horizon rescaling
//! only touch those two numbers, which keeps every rescaled kernel evaluable
//! directly on its own profile.

mod hypotheses;
mod symbol;
mod table;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad::{self, QuadResult};
use crate::scalar::{sphere_area, Real};

pub use hypotheses::{log_radii, HypothesisCheck, HypothesisReport, Verdict};
pub use symbol::{QProfile, SymbolValue};
pub use table::Table;

/// Smooth or sharp cutoff applied to truncated power kernels on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cutoff {
    /// w ≡ 1 on [0, 1].
    Hard,
    /// w ≡ 1 on [0, 1/2], quintic smoothstep down to 0 at 1.
    Quintic,
}

impl Cutoff {
    pub fn eval<T: Real>(self, r: T) -> T {
        match self {
            Cutoff::Hard => {
                if r <= T::one() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Cutoff::Quintic => {
                if r <= T::lit(0.5) {
                    T::one()
                } else if r >= T::one() {
                    T::zero()
                } else {
                    // 1 - S(2r - 1) = S(2(1 - r)); this form keeps full precision near r = 1
                    let u = T::lit(2.0) * (T::one() - r);
                    u * u * u * (T::lit(10.0) + u * (T::lit(-15.0) + T::lit(6.0) * u))
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Cutoff::Hard => "hard",
            Cutoff::Quintic => "quintic",
        }
    }
}

/// Family tag carried by every kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyTag {
    TruncatedPower,
    PurePower,
    Tabulated,
    Custom,
}

impl FamilyTag {
    pub fn name(self) -> &'static str {
        match self {
            FamilyTag::TruncatedPower => "truncated-power",
            FamilyTag::PurePower => "pure-power",
            FamilyTag::Tabulated => "tabulated",
            FamilyTag::Custom => "custom",
        }
    }
}

/// Input to [`Kernel::new`].
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec<T> {
    /// `w(r) r^{-(n+s-1)}` on the unit ball.
    TruncatedPower { s: T, cutoff: Cutoff },
    /// `r^{-(n+s-1)}` on all of ℝⁿ, with unit constant.
    PurePower { s: T },
    Tabulated(Table<T>),
}

type ProfileFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

#[derive(Clone)]
enum Raw<T> {
    TruncatedPower { s: T, cutoff: Cutoff },
    PurePower { s: T },
    Tabulated(Table<T>),
    Custom {
        f: ProfileFn<T>,
        support: T,
        breaks: Vec<T>,
    },
}

/// Which limit a rescaled kernel is prepared for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HorizonMode {
    /// δ → 0⁺ with `c_δ = δ^{-n}`.
    Vanishing,
    /// δ → ∞ with `c_δ = ρ̄(1/δ)^{-1}`.
    Diverging,
}

impl HorizonMode {
    pub fn name(self) -> &'static str {
        match self {
            HorizonMode::Vanishing => "vanishing",
            HorizonMode::Diverging => "diverging",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Horizon<T> {
    pub delta: T,
    pub c_delta: T,
    pub mode: HorizonMode,
}

/// A radial kernel ρ in dimension 1 or 2.
#[derive(Clone)]
pub struct Kernel<T> {
    raw: Raw<T>,
    dim: usize,
    scale: T,
    dilation: T,
    normalized: bool,
    singularity: Option<(T, T)>,
    horizon: Option<Horizon<T>>,
}

impl<T: Real> fmt::Debug for Kernel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("family", &self.family_tag().name())
            .field("dim", &self.dim)
            .field("scale", &self.scale)
            .field("dilation", &self.dilation)
            .field("support_radius", &self.support_radius())
            .field("normalized", &self.normalized)
            .field("singularity", &self.singularity)
            .field("horizon", &self.horizon)
            .finish()
    }
}

/// Estimate of the asymptotic fractional order of a kernel tail.
#[derive(Debug, Clone, PartialEq)]
pub struct SInfinity<T> {
    pub estimate: T,
    pub error_bar: T,
    /// `(δ, value of the log expression at δ)` along the sequence.
    pub iterates: Vec<(T, T)>,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(Error::Dimension(dim))
    }
}

fn check_order<T: Real>(s: T, what: &str) -> Result<()> {
    if s > T::zero() && s < T::one() {
        Ok(())
    } else {
        Err(Error::ParameterRange(format!(
            "{what} must lie in (0, 1), got {s}"
        )))
    }
}

impl<T: Real> Kernel<T> {
    /// Builds an unnormalized kernel from a family description.
    pub fn new(spec: KernelSpec<T>, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let (raw, singularity) = match spec {
            KernelSpec::TruncatedPower { s, cutoff } => {
                check_order(s, "fractional order s")?;
                (Raw::TruncatedPower { s, cutoff }, Some((s, s)))
            }
            KernelSpec::PurePower { s } => {
                check_order(s, "fractional order s")?;
                (Raw::PurePower { s }, Some((s, s)))
            }
            KernelSpec::Tabulated(table) => (Raw::Tabulated(table), None),
        };
        Ok(Self {
            raw,
            dim,
            scale: T::one(),
            dilation: T::one(),
            normalized: false,
            singularity,
            horizon: None,
        })
    }

    /// Truncated power kernel with the built-in smooth cutoff.
    pub fn truncated_power(s: T, dim: usize) -> Result<Self> {
        Self::new(
            KernelSpec::TruncatedPower {
                s,
                cutoff: Cutoff::Quintic,
            },
            dim,
        )
    }

    pub fn pure_power(s: T, dim: usize) -> Result<Self> {
        Self::new(KernelSpec::PurePower { s }, dim)
    }

    pub fn tabulated(table: Table<T>, dim: usize) -> Result<Self> {
        Self::new(KernelSpec::Tabulated(table), dim)
    }

    /// Kernel defined by an arbitrary profile on `(0, support]`. No admissibility
    /// checks are made; `breaks` lists radii where the profile is not smooth.
    pub fn custom<F>(dim: usize, support: T, breaks: Vec<T>, profile: F) -> Result<Self>
    where
        F: Fn(T) -> T + Send + Sync + 'static,
    {
        check_dim(dim)?;
        if !(support > T::zero()) || !support.is_finite() {
            return Err(Error::ParameterRange("custom support must be finite and positive".into()));
        }
        Ok(Self {
            raw: Raw::Custom {
                f: Arc::new(profile),
                support,
                breaks,
            },
            dim,
            scale: T::one(),
            dilation: T::one(),
            normalized: false,
            singularity: None,
            horizon: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family_tag(&self) -> FamilyTag {
        match self.raw {
            Raw::TruncatedPower { .. } => FamilyTag::TruncatedPower,
            Raw::PurePower { .. } => FamilyTag::PurePower,
            Raw::Tabulated(_) => FamilyTag::Tabulated,
            Raw::Custom { .. } => FamilyTag::Custom,
        }
    }

    /// Fractional order of the power families, if any.
    pub fn family_order(&self) -> Option<T> {
        match self.raw {
            Raw::TruncatedPower { s, .. } | Raw::PurePower { s } => Some(s),
            _ => None,
        }
    }

    pub fn cutoff(&self) -> Option<Cutoff> {
        match self.raw {
            Raw::TruncatedPower { cutoff, .. } => Some(cutoff),
            _ => None,
        }
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn dilation(&self) -> T {
        self.dilation
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn singularity_exponents(&self) -> Option<(T, T)> {
        self.singularity
    }

    pub fn horizon(&self) -> Option<Horizon<T>> {
        self.horizon
    }

    fn raw_support(&self) -> T {
        match &self.raw {
            Raw::TruncatedPower { .. } => T::one(),
            Raw::PurePower { .. } => T::infinity(),
            Raw::Tabulated(t) => t.last_radius(),
            Raw::Custom { support, .. } => *support,
        }
    }

    /// Radius of the support ball; infinite for analytic-only kernels.
    pub fn support_radius(&self) -> T {
        self.raw_support() * self.dilation
    }

    /// True for kernels that can only be evaluated in closed form.
    pub fn is_analytic_only(&self) -> bool {
        !self.support_radius().is_finite()
    }

    fn raw_eval(&self, r: T) -> T {
        let n = T::from_usize_lossy(self.dim);
        match &self.raw {
            Raw::TruncatedPower { s, cutoff } => {
                if r > T::one() {
                    T::zero()
                } else {
                    cutoff.eval(r) * r.powf(-(n + *s - T::one()))
                }
            }
            Raw::PurePower { s } => r.powf(-(n + *s - T::one())),
            Raw::Tabulated(t) => t.eval(r),
            Raw::Custom { f, support, .. } => {
                if r > *support {
                    T::zero()
                } else {
                    f(r)
                }
            }
        }
    }

    /// Radial representation ρ̄(r) for r > 0.
    pub fn profile(&self, r: T) -> T {
        self.scale * self.raw_eval(r / self.dilation)
    }

    /// Radii in `(0, support)` where the profile is not smooth, in increasing order.
    pub(crate) fn breakpoints(&self) -> Vec<T> {
        let raw: Vec<T> = match &self.raw {
            Raw::TruncatedPower {
                cutoff: Cutoff::Quintic,
                ..
            } => vec![T::lit(0.5)],
            Raw::TruncatedPower { .. } | Raw::PurePower { .. } => vec![],
            Raw::Tabulated(t) => {
                let r = t.radii();
                r[..r.len() - 1].to_vec()
            }
            Raw::Custom { breaks, support, .. } => breaks
                .iter()
                .copied()
                .filter(|b| *b > T::zero() && *b < *support)
                .collect(),
        };
        raw.into_iter().map(|b| b * self.dilation).collect()
    }

    /// Integrates `g(r, ρ̄(r))` over `(lo, hi)` radially, splitting at the
    /// profile's breakpoints and at most `max_panel` apart. A singular first
    /// panel is handled by tanh-sinh when `lo == 0`.
    pub(crate) fn radial_quad<G: Fn(T, T) -> T>(
        &self,
        g: G,
        lo: T,
        hi: T,
        max_panel: Option<T>,
        rel_tol: T,
    ) -> QuadResult<T> {
        let hi = hi.min(self.support_radius());
        let mut breaks = vec![lo];
        for b in self.breakpoints() {
            if b > lo && b < hi {
                breaks.push(b);
            }
        }
        breaks.push(hi);
        if let Some(len) = max_panel {
            let mut fine = vec![breaks[0]];
            for w in breaks.windows(2) {
                let pieces = ((w[1] - w[0]) / len).ceil().to_usize().unwrap_or(1).max(1);
                for k in 1..=pieces {
                    fine.push(w[0] + (w[1] - w[0]) * T::from_usize_lossy(k) / T::from_usize_lossy(pieces));
                }
            }
            breaks = fine;
        }
        let f = |r: T| g(r, self.profile(r));
        // first panel sets the absolute scale for the remaining ones
        let first = quad::panels(&f, &breaks[..2.min(breaks.len())], lo == T::zero(), T::zero(), rel_tol);
        if breaks.len() <= 2 {
            return first;
        }
        let floor = first.value.abs().max(T::min_positive_value()) * T::quad_eps();
        let rest = quad::panels(&f, &breaks[1..], false, floor * T::from_usize_lossy(breaks.len()), rel_tol);
        first.add(rest)
    }

    /// Total mass ∫ρ over ℝⁿ.
    pub fn mass(&self) -> Result<T> {
        if self.is_analytic_only() {
            return Err(Error::InfiniteMass);
        }
        let n = self.dim;
        let area: T = sphere_area(n);
        let q = self.radial_quad(
            |r, rho| rho * r.powi(n as i32 - 1),
            T::zero(),
            self.support_radius(),
            None,
            T::quad_eps(),
        );
        if !q.converged || !q.value.is_finite() {
            return Err(Error::InfiniteMass);
        }
        Ok(area * q.value)
    }

    /// Factor that `normalize` would apply after moving the support inside the unit ball.
    pub fn normalization_factor(&self) -> Result<T> {
        let shrunk = self.shrink_support()?;
        let mass = shrunk.mass()?;
        if !(mass > T::zero()) {
            return Err(Error::Divergent("kernel has zero mass".into()));
        }
        Ok(T::from_usize_lossy(self.dim) / mass)
    }

    fn shrink_support(&self) -> Result<Self> {
        let support = self.support_radius();
        if !support.is_finite() {
            return Err(Error::InfiniteSupport);
        }
        let mut out = self.clone();
        if support > T::one() {
            out.dilation = out.dilation / support;
        }
        Ok(out)
    }

    /// Returns the kernel rescaled to `supp ρ ⊂ B(0, 1)` and `∫ρ = n`.
    pub fn normalize(&self) -> Result<Self> {
        let factor = self.normalization_factor()?;
        let mut out = self.shrink_support()?;
        out.scale = out.scale * factor;
        out.normalized = true;
        out.horizon = None;
        Ok(out)
    }

    /// Horizon rescaling `ρ_δ(x) = c_δ ρ(x/δ)`.
    pub fn rescale(&self, delta: T, mode: HorizonMode) -> Result<Self> {
        if !self.normalized {
            return Err(Error::NotNormalized);
        }
        let in_range = match mode {
            HorizonMode::Vanishing => delta > T::zero() && delta <= T::one(),
            HorizonMode::Diverging => delta >= T::one() && delta.is_finite(),
        };
        if !in_range {
            return Err(Error::HorizonRange {
                delta: delta.as_f64(),
                mode: mode.name(),
            });
        }
        let c_delta = match mode {
            HorizonMode::Vanishing => delta.powi(-(self.dim as i32)),
            HorizonMode::Diverging => {
                let v = self.profile(delta.recip());
                if !(v > T::zero()) {
                    return Err(Error::VanishingProfile(delta.recip().as_f64()));
                }
                v.recip()
            }
        };
        let mut out = self.clone();
        out.scale = self.scale * c_delta;
        out.dilation = self.dilation * delta;
        out.normalized = delta == T::one() && c_delta == T::one();
        out.horizon = Some(Horizon {
            delta,
            c_delta,
            mode,
        });
        Ok(out)
    }

    /// Multiplies the profile by a constant.
    pub fn scaled(&self, factor: T) -> Self {
        let mut out = self.clone();
        out.scale = out.scale * factor;
        out.normalized = false;
        out
    }

    /// Default horizon sequence `10^1 .. 10^4` for [`Kernel::s_infinity`].
    pub fn default_s_infinity_deltas() -> Vec<T> {
        (1..=4).map(|k| T::lit(10f64.powi(k))).collect()
    }

    /// Asymptotic fractional order `lim log(ρ̄(1/δ)^{-1} ρ̄(1/(eδ))) − n + 1`.
    ///
    /// The last iterate is reported with the spread of the last two as error bar.
    pub fn s_infinity(&self, deltas: &[T]) -> Result<SInfinity<T>> {
        if !self.normalized && self.family_tag() != FamilyTag::PurePower {
            return Err(Error::NotNormalized);
        }
        if deltas.len() < 2 {
            return Err(Error::TooFewPoints {
                needed: 2,
                got: deltas.len(),
            });
        }
        if deltas.windows(2).any(|w| !(w[1] > w[0])) || !(deltas[0] > T::zero()) {
            return Err(Error::ParameterRange("horizon sequence must be positive and increasing".into()));
        }
        let span = (deltas[deltas.len() - 1] / deltas[0]).log10();
        if span < T::lit(3.0) - T::lit(1e-9) {
            return Err(Error::ParameterRange(format!(
                "horizon sequence spans {span} decades, need at least 3"
            )));
        }
        let n = T::from_usize_lossy(self.dim);
        let mut iterates = Vec::with_capacity(deltas.len());
        for &d in deltas {
            let near = self.profile(d.recip());
            let far = self.profile((T::E() * d).recip());
            if !(near > T::zero()) {
                return Err(Error::VanishingProfile(d.recip().as_f64()));
            }
            if !(far > T::zero()) {
                return Err(Error::VanishingProfile((T::E() * d).recip().as_f64()));
            }
            iterates.push((d, (far / near).ln() - n + T::one()));
        }
        let last = iterates[iterates.len() - 1].1;
        let prev = iterates[iterates.len() - 2].1;
        Ok(SInfinity {
            estimate: last,
            error_bar: (last - prev).abs(),
            iterates,
        })
    }

    /// The δ → ∞ limit `|x|^{-(n+s∞-1)}` as an analytic-only pure power kernel.
    pub fn limit_kernel(&self, deltas: &[T]) -> Result<Self> {
        let s = if let Raw::PurePower { s } = self.raw {
            s
        } else {
            self.s_infinity(deltas)?.estimate
        };
        check_order(s, "asymptotic order s_inf")?;
        Self::pure_power(s, self.dim)
    }

    /// Restricts a pure power kernel to the ball of radius `radius`, keeping its values.
    pub fn truncate(&self, radius: T) -> Result<Self> {
        let Raw::PurePower { s } = self.raw else {
            return Err(Error::ParameterRange("only pure power kernels can be truncated".into()));
        };
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::ParameterRange("truncation radius must be finite and positive".into()));
        }
        let n = T::from_usize_lossy(self.dim);
        let mut out = Self::new(
            KernelSpec::TruncatedPower {
                s,
                cutoff: Cutoff::Hard,
            },
            self.dim,
        )?;
        out.dilation = radius;
        out.scale = self.scale * radius.powf(-(n + s - T::one()));
        Ok(out)
    }
}
