//! Dirichlet solvers for the linear anisotropic problem and the nonlocal
//! p-Laplacian, with the energy and monotonicity functionals.

mod linear;
mod operator;
mod plap;

pub use linear::{
    solve_linear, Coefficient, LinearMethod, LinearProblem, LinearSolution, DIRECT_DOF_LIMIT, LINEAR_RESIDUAL_TOL,
};
pub use operator::PLapOperator;
pub use plap::{
    minimize_plap, monotonicity_gap, monotonicity_gap_with, monotonicity_ratio_with, plap_energy, plap_energy_with,
    solve_plap, solve_plap_from, spectral_operator, DescentMethod, DescentRun, PLapOptions, PLapProblem, PLapSolution,
    Termination, STALL_WINDOW,
};
pub(crate) use plap::ray_scale;

use std::collections::BTreeMap;

use crate::calculus::{read_dump, write_dump};
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::scalar::Real;

const HEADER_PREFIX: &str = "#! ";

/// Serializes a p-Laplacian problem as a field dump of `f` preceded by
/// `#! key = value` lines (p, tolerances, method, kernel family).
pub fn write_plap_problem<T: Real>(problem: &PLapProblem<T>) -> Result<String> {
    let o = &problem.options;
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        out.push_str(HEADER_PREFIX);
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    kv("p", format!("{:.16e}", problem.p().as_f64()));
    kv("energy_tol", format!("{:.16e}", o.energy_tol.as_f64()));
    kv("gradient_tol", format!("{:.16e}", o.gradient_tol.as_f64()));
    kv("max_iter", o.max_iter.to_string());
    kv("method", o.method.name().to_string());
    kv("regularization", format!("{:.16e}", o.regularization.as_f64()));
    kv("kernel", problem.kernel().family_tag().name().to_string());
    out.push_str(&write_dump(problem.grid(), &[problem.rhs().values()])?);
    Ok(out)
}

/// Inverse of [`write_plap_problem`]; the kernel is supplied by the caller.
pub fn read_plap_problem<T: Real>(text: &str, kernel: &Kernel<T>) -> Result<PLapProblem<T>> {
    let mut header = BTreeMap::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix(HEADER_PREFIX) {
            let (k, v) = rest
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("malformed problem header {line:?}")))?;
            header.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    let get = |k: &str| header.get(k).ok_or_else(|| Error::Parse(format!("missing problem key {k:?}")));
    let num = |k: &str| -> Result<T> {
        get(k)?
            .parse::<f64>()
            .map(T::lit)
            .map_err(|_| Error::Parse(format!("bad number for {k:?}")))
    };
    let dump = read_dump::<T>(text)?;
    let rhs = dump.scalar()?;
    let options = PLapOptions {
        energy_tol: num("energy_tol")?,
        gradient_tol: num("gradient_tol")?,
        max_iter: get("max_iter")?
            .parse()
            .map_err(|_| Error::Parse("bad max_iter".into()))?,
        method: DescentMethod::parse(get("method")?)?,
        regularization: num("regularization")?,
    };
    Ok(PLapProblem::new(&dump.grid, kernel, num("p")?, rhs)?.with_options(options))
}
