use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use super::{align_and_distance, fractional_reference, local_reference, rate_estimate, RateEstimate, Reference};
use crate::calculus::{assemble, build_grid, write_dump, Domain, Field, Grid};
use crate::error::{Error, Result};
use crate::kernels::{HorizonMode, Kernel};
use crate::scalar::Real;
use crate::solvers::spectral_operator;
use crate::spectra::{eigs_linear, inverse_iteration, InverseIterationOptions, ResidualReport, CERTIFICATE_TOL};

pub const SWEEP_CSV_HEADER: &str = "delta,c_delta,lambda,residual,ref_lambda,eigfun_distance,grid_h,runtime_s";

/// Default inverse-iteration tolerance of a sweep. The Rayleigh quotient
/// converges quadratically in the eigenvector error, so 1e-12 here keeps the
/// residual certificate near 1e-6.
pub const SWEEP_EIGEN_TOL: f64 = 1e-12;

/// Grid spacing per horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridPolicy<T> {
    /// `h = δ / ratio`.
    HorizonRatio(T),
    Fixed(T),
}

impl<T: Real> GridPolicy<T> {
    pub fn spacing(&self, delta: T) -> T {
        match *self {
            GridPolicy::HorizonRatio(r) => delta / r,
            GridPolicy::Fixed(h) => h,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig<T: Real> {
    /// Normalized base kernel ρ.
    pub kernel: Kernel<T>,
    pub domain: Domain<T>,
    pub mode: HorizonMode,
    pub deltas: Vec<T>,
    pub p: T,
    pub m: usize,
    pub grid: GridPolicy<T>,
    /// Spacing of the reference problem: the coarse local spacing in
    /// vanishing mode, the fractional grid spacing in diverging mode.
    pub reference_h: T,
    /// Truncation radius of the fractional reference.
    pub truncation_radius: T,
    pub eigen: InverseIterationOptions<T>,
    /// Rows whose relative residual exceeds this are reported as failures.
    pub certificate_tol: T,
}

impl<T: Real> SweepConfig<T> {
    /// Defaults: `h = δ/8` with a local reference at spacing 1/256 (1D) or
    /// 1/16 (2D) when vanishing; fixed `h` = 1/128 (1D) or 1/16 (2D) shared
    /// with the fractional reference, truncated at 32 diameters, when diverging.
    /// Inverse iteration stops at [`SWEEP_EIGEN_TOL`].
    pub fn new(kernel: Kernel<T>, domain: Domain<T>, mode: HorizonMode, deltas: Vec<T>, p: T, m: usize) -> Self {
        let one_d = domain.dim() == 1;
        let (grid, reference_h) = match mode {
            HorizonMode::Vanishing => (
                GridPolicy::HorizonRatio(T::lit(8.0)),
                T::lit(if one_d { 1.0 / 256.0 } else { 1.0 / 16.0 }),
            ),
            HorizonMode::Diverging => {
                let h = T::lit(if one_d { 1.0 / 128.0 } else { 1.0 / 16.0 });
                (GridPolicy::Fixed(h), h)
            }
        };
        Self {
            kernel,
            domain,
            mode,
            deltas,
            p,
            m,
            grid,
            reference_h,
            truncation_radius: T::lit(32.0) * domain.diameter(),
            eigen: InverseIterationOptions {
                tol: T::lit(SWEEP_EIGEN_TOL),
                ..InverseIterationOptions::default()
            },
            certificate_tol: T::lit(CERTIFICATE_TOL),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Sweep(msg));
        if self.deltas.is_empty() {
            return bad("empty horizon list".into());
        }
        if self.kernel.dim() != self.domain.dim() {
            return bad(format!(
                "kernel dimension {} does not match the domain dimension {}",
                self.kernel.dim(),
                self.domain.dim()
            ));
        }
        if !self.kernel.is_normalized() {
            return Err(Error::NotNormalized);
        }
        if self.deltas.iter().any(|d| !(*d > T::zero()) || !d.is_finite()) {
            return bad("horizons must be finite and positive".into());
        }
        let ordered = match self.mode {
            HorizonMode::Vanishing => self.deltas.windows(2).all(|w| w[1] < w[0]),
            HorizonMode::Diverging => self.deltas.windows(2).all(|w| w[1] > w[0]),
        };
        if !ordered {
            let dir = match self.mode {
                HorizonMode::Vanishing => "decreasing",
                HorizonMode::Diverging => "increasing",
            };
            return bad(format!("horizons must be strictly {dir} in {} mode", self.mode.name()));
        }
        if !(self.p > T::one()) || !self.p.is_finite() {
            return bad(format!("p = {} must lie in (1, ∞)", self.p.as_f64()));
        }
        if self.m == 0 {
            return bad("eigen index m starts at 1".into());
        }
        if self.p != T::lit(2.0) && self.m != 1 {
            return bad(format!("m must be 1 when p ≠ 2 (got m = {})", self.m));
        }
        match self.grid {
            GridPolicy::HorizonRatio(r) if !(r > T::zero()) => return bad("grid ratio must be positive".into()),
            GridPolicy::Fixed(h) if !(h > T::zero()) => return bad("grid spacing must be positive".into()),
            _ => {}
        }
        if self.mode == HorizonMode::Vanishing {
            let quarter = T::lit(0.25) * (T::one() + T::lit(1e-12));
            if let Some(d) = self.deltas.iter().find(|d| self.grid.spacing(**d) > quarter * **d) {
                return bad(format!(
                    "spacing {} does not resolve horizon {} (need h ≤ δ/4)",
                    self.grid.spacing(*d).as_f64(),
                    d.as_f64()
                ));
            }
        }
        if !(self.reference_h > T::zero()) || !(self.certificate_tol > T::zero()) {
            return bad("reference spacing and certificate tolerance must be positive".into());
        }
        Ok(())
    }

    pub fn reference(&self) -> Result<Reference<T>> {
        match self.mode {
            HorizonMode::Vanishing => local_reference(self.domain, self.p, self.m, self.reference_h, &self.eigen),
            HorizonMode::Diverging => fractional_reference(
                self.domain,
                &self.kernel,
                self.p,
                self.m,
                self.reference_h,
                self.truncation_radius,
                &self.eigen,
            ),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow<T: Real> {
    pub delta: T,
    pub c_delta: T,
    pub lambda: T,
    pub residual: ResidualReport<T>,
    pub ref_lambda: T,
    /// `|λ − λ_ref|`.
    pub error: T,
    pub eigfun_distance: T,
    pub grid_h: T,
    pub dofs: usize,
    pub runtime_s: f64,
    pub eigenfunction: Field<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub delta: f64,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct SweepResult<T: Real> {
    pub mode: HorizonMode,
    pub p: T,
    pub m: usize,
    /// Successful rows in sweep order.
    pub rows: Vec<SweepRow<T>>,
    pub reference: Reference<T>,
    /// Fit of `log error` against `log δ`; `None` with fewer than three rows
    /// or a zero error.
    pub rate: Option<RateEstimate>,
    pub failures: Vec<SweepFailure>,
}

impl<T: Real> SweepResult<T> {
    pub fn complete(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn errors(&self) -> Vec<T> {
        self.rows.iter().map(|r| r.error).collect()
    }

    pub fn distances(&self) -> Vec<T> {
        self.rows.iter().map(|r| r.eigfun_distance).collect()
    }

    /// Table with [`SWEEP_CSV_HEADER`], numbers with 17 significant digits,
    /// followed by a `# rate` comment line.
    pub fn to_csv(&self) -> String {
        let e = |v: f64| format!("{v:.16e}");
        let mut out = String::from(SWEEP_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let cols = [
                r.delta.as_f64(),
                r.c_delta.as_f64(),
                r.lambda.as_f64(),
                r.residual.relative.as_f64(),
                r.ref_lambda.as_f64(),
                r.eigfun_distance.as_f64(),
                r.grid_h.as_f64(),
                r.runtime_s,
            ];
            out.push_str(&cols.map(e).join(","));
            out.push('\n');
        }
        match &self.rate {
            Some(r) => out.push_str(&format!(
                "# rate slope={} ci_low={} ci_high={} points={}\n",
                e(r.slope),
                e(r.ci.0),
                e(r.ci.1),
                r.points
            )),
            None => out.push_str("# rate undefined\n"),
        }
        out
    }

    /// Writes `sweep.csv` and one `eigenfunction_{k}.txt` dump per row.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("sweep.csv"), self.to_csv())?;
        for (k, r) in self.rows.iter().enumerate() {
            let dump = write_dump(r.eigenfunction.grid(), &[r.eigenfunction.values()])?;
            std::fs::write(dir.join(format!("eigenfunction_{}.txt", k + 1)), dump)?;
        }
        Ok(())
    }
}

struct Solved<T: Real> {
    c_delta: T,
    grid: Arc<Grid<T>>,
    lambda: T,
    u: Field<T>,
    residual: ResidualReport<T>,
}

fn solve_horizon<T: Real>(config: &SweepConfig<T>, delta: T) -> Result<Solved<T>> {
    let kernel = config.kernel.rescale(delta, config.mode)?;
    let c_delta = kernel.horizon().map_or(T::one(), |h| h.c_delta);
    let grid = build_grid(config.domain, config.grid.spacing(delta), delta)?;
    let (lambda, u, residual) = if config.p == T::lit(2.0) {
        let set = eigs_linear(&assemble(&grid, &kernel)?, config.m)?;
        let pair = set.pairs.into_iter().nth(config.m - 1).expect("m pairs");
        (pair.lambda, pair.u, pair.residual)
    } else {
        let op = spectral_operator(&grid, &kernel, config.p)?;
        let e = inverse_iteration(&op, None, &config.eigen)?;
        (e.lambda, Field::from_dofs(&grid, &e.x)?, e.residual)
    };
    Ok(Solved {
        c_delta,
        grid,
        lambda,
        u,
        residual,
    })
}

/// Runs every horizon of the configuration in parallel and assembles the
/// rows in the configured order. Failing horizons, including rows without a
/// residual certificate, are listed in `failures` instead of `rows`.
pub fn sweep<T: Real>(config: &SweepConfig<T>) -> Result<SweepResult<T>> {
    config.validate()?;
    let reference = config.reference()?;
    let ref_lambda = reference.lambdas[config.m - 1];
    let ref_fn = &reference.functions[config.m - 1];
    let outcomes: Vec<Result<SweepRow<T>>> = config
        .deltas
        .par_iter()
        .map(|&delta| {
            let start = Instant::now();
            let s = solve_horizon(config, delta)?;
            if !(s.residual.relative <= config.certificate_tol) {
                return Err(Error::Sweep(format!(
                    "relative residual {:e} above the certificate threshold {:e}",
                    s.residual.relative.as_f64(),
                    config.certificate_tol.as_f64()
                )));
            }
            let target = ref_fn.on_grid(&s.grid, config.p)?;
            let eigfun_distance = align_and_distance(&s.u, &target, config.p)?;
            Ok(SweepRow {
                delta,
                c_delta: s.c_delta,
                lambda: s.lambda,
                residual: s.residual,
                ref_lambda,
                error: (s.lambda - ref_lambda).abs(),
                eigfun_distance,
                grid_h: s.grid.h(),
                dofs: s.grid.dofs().len(),
                runtime_s: start.elapsed().as_secs_f64(),
                eigenfunction: s.u,
            })
        })
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (delta, o) in config.deltas.iter().zip(outcomes) {
        match o {
            Ok(r) => rows.push(r),
            Err(e) => failures.push(SweepFailure {
                delta: delta.as_f64(),
                message: e.to_string(),
            }),
        }
    }
    let deltas: Vec<T> = rows.iter().map(|r| r.delta).collect();
    let errors: Vec<T> = rows.iter().map(|r| r.error).collect();
    let rate = rate_estimate(&deltas, &errors).ok();
    Ok(SweepResult {
        mode: config.mode,
        p: config.p,
        m: config.m,
        rows,
        reference,
        rate,
        failures,
    })
}
