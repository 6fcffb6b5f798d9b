//! Command execution and the reproducibility manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nlpl::calculus::{assemble, build_grid, write_dump, Domain, Field, Grid};
use nlpl::horizon::{sweep, GridPolicy, SweepConfig};
use nlpl::kernels::{log_radii, Cutoff, HorizonMode, Kernel, KernelSpec, Table};
use nlpl::solvers::{solve_plap, spectral_operator, DescentMethod, PLapOptions, PLapProblem, Termination};
use nlpl::spectra::{eigenfunction_file, eigs_linear, inverse_iteration, EigenPair, EigenSet, InverseIterationOptions};

use crate::config::{parse_grid, Command, RunConfig};
use crate::error::CliError;
use crate::plot::{emit_plot, PlotKind};

pub const MANIFEST_FILE: &str = "manifest.txt";
pub const ERROR_FILE: &str = "error.json";

/// Files written by a successful run, manifest first.
#[derive(Debug, Clone, Default)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
}

fn e17(v: f64) -> String {
    format!("{v:.16e}")
}

fn write(path: &Path, text: impl AsRef<[u8]>, outcome: &mut RunOutcome) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))?;
    outcome.files.push(path.to_path_buf());
    Ok(())
}

/// Resolved config plus a header naming the build, thread count and defaulted keys.
/// The header is comments only, so the manifest is itself a valid config.
pub fn manifest(config: &RunConfig, threads: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# nlpl {} reproducibility manifest", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "# threads = {threads}");
    let defaulted: Vec<&str> = config.defaulted.iter().map(String::as_str).collect();
    let _ = writeln!(out, "# defaulted = {}", defaulted.join(", "));
    out.push_str(&config.serialize());
    out
}

pub fn output_dir(config: &RunConfig) -> PathBuf {
    PathBuf::from(config.text("out").unwrap_or(crate::config::DEFAULT_OUT))
}

/// Runs `config`, writing the manifest before any results.
pub fn run(config: &RunConfig) -> Result<RunOutcome, CliError> {
    let out = output_dir(config);
    fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
    let mut outcome = RunOutcome::default();
    write(&out.join(MANIFEST_FILE), manifest(config, rayon::current_num_threads()), &mut outcome)?;
    let stale = out.join(ERROR_FILE);
    if stale.exists() {
        fs::remove_file(&stale).map_err(|e| CliError::io(&stale, e))?;
    }
    match config.command {
        Command::KernelCheck => kernel_check(config, &out, &mut outcome)?,
        Command::Symbol => symbol(config, &out, &mut outcome)?,
        Command::Solve => solve(config, &out, &mut outcome)?,
        Command::Eig => eig(config, &out, &mut outcome)?,
        Command::Sweep => run_sweep(config, &out, &mut outcome)?,
    }
    Ok(outcome)
}

fn mode(config: &RunConfig) -> HorizonMode {
    match config.text("mode") {
        Some("diverging") => HorizonMode::Diverging,
        _ => HorizonMode::Vanishing,
    }
}

/// Base kernel in dimension `dim`, normalized unless it is a pure power.
pub fn base_kernel(config: &RunConfig, dim: usize) -> Result<Kernel<f64>, CliError> {
    let spec = match config.text("kernel") {
        Some("tabulated") => {
            let path = Path::new(config.text("kernel.table").unwrap_or_default());
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            KernelSpec::Tabulated(Table::parse(&text)?)
        }
        Some("pure-power") => KernelSpec::PurePower {
            s: config.real("kernel.s").unwrap_or_default(),
        },
        _ => KernelSpec::TruncatedPower {
            s: config.real("kernel.s").unwrap_or_default(),
            cutoff: match config.text("kernel.cutoff") {
                Some("quintic") => Cutoff::Quintic,
                _ => Cutoff::Hard,
            },
        },
    };
    let k = Kernel::new(spec, dim)?;
    Ok(if k.is_analytic_only() { k } else { k.normalize()? })
}

fn domain(config: &RunConfig) -> Result<Domain<f64>, CliError> {
    Ok(Domain::parse(config.text("domain").unwrap_or_default())?)
}

/// Grid and rescaled kernel of a single-horizon problem.
fn problem(config: &RunConfig) -> Result<(Arc<Grid<f64>>, Kernel<f64>), CliError> {
    let d = domain(config)?;
    let delta = config.real("delta").unwrap_or_default();
    let kernel = base_kernel(config, d.dim())?.rescale(delta, mode(config))?;
    let grid = build_grid(d, config.real("h").unwrap_or_default(), delta)?;
    Ok((grid, kernel))
}

fn kernel_check(config: &RunConfig, out: &Path, outcome: &mut RunOutcome) -> Result<(), CliError> {
    let dim = config.count("dim").unwrap_or(1) as usize;
    let kernel = base_kernel(config, dim)?;
    let radii = log_radii(
        config.real("radii.min").unwrap_or_default(),
        config.real("radii.max").unwrap_or_default(),
        config.count("radii.per_decade").unwrap_or(1) as usize,
    );
    let report = kernel.check_hypotheses(&radii, config.real("epsilon").unwrap_or(1.0));
    let mut text = format!("kernel = {}\ndim = {dim}\n", config.text("kernel").unwrap_or_default());
    text.push_str(&report.to_key_value());
    let _ = writeln!(text, "all_pass = {}", report.all_pass());
    match kernel.s_infinity(&Kernel::<f64>::default_s_infinity_deltas()) {
        Ok(s) => {
            let _ = writeln!(text, "s_infinity = {}", e17(s.estimate));
            let _ = writeln!(text, "s_infinity.error_bar = {}", e17(s.error_bar));
        }
        Err(e) => {
            let _ = writeln!(text, "s_infinity = unavailable ({e})");
        }
    }
    write(&out.join("report.txt"), text, outcome)
}

fn symbol(config: &RunConfig, out: &Path, outcome: &mut RunOutcome) -> Result<(), CliError> {
    let dim = config.count("dim").unwrap_or(1) as usize;
    let mut kernel = base_kernel(config, dim)?;
    if let Some(delta) = config.real("delta") {
        kernel = kernel.rescale(delta, mode(config))?;
    }
    let mut csv = String::from("xi,qhat,multiplier,converged\n");
    for xi in config.reals("xi").unwrap_or_default() {
        let mut v = vec![0.0; dim];
        v[0] = *xi;
        let q = kernel.symbol_qhat(&v);
        let _ = writeln!(csv, "{},{},{},{}", e17(*xi), e17(q.value), e17(kernel.multiplier(&v)), q.converged);
    }
    write(&out.join("symbol.csv"), csv, outcome)
}

fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::Gradient => "gradient",
        Termination::EnergyStall => "energy-stall",
        Termination::Trivial => "trivial",
    }
}

fn solve(config: &RunConfig, out: &Path, outcome: &mut RunOutcome) -> Result<(), CliError> {
    let (grid, kernel) = problem(config)?;
    let load = config.real("load").unwrap_or(1.0);
    let rhs = Field::dirichlet_from_fn(&grid, |_| load);
    let options = PLapOptions {
        gradient_tol: config.real("tol").unwrap_or(1e-10),
        max_iter: config.count("max_iter").unwrap_or(100_000) as usize,
        method: DescentMethod::parse(config.text("method").unwrap_or("newton"))?,
        ..PLapOptions::default()
    };
    let pb = PLapProblem::new(&grid, &kernel, config.real("p").unwrap_or(2.0), rhs)?.with_options(options);
    let sol = solve_plap(&pb)?;
    let dump = out.join("solution.txt");
    write(&dump, write_dump(&grid, &[sol.u.values()])?, outcome)?;
    let run = &sol.run;
    let energy = run.energy_history.last().copied().unwrap_or(0.0);
    let csv = format!(
        "p,energy,gradient_norm,iterations,termination\n{},{},{},{},{}\n",
        e17(pb.p()),
        e17(energy),
        e17(run.gradient_norm),
        run.iterations,
        termination_name(run.termination)
    );
    write(&out.join("solve.csv"), csv, outcome)?;
    plot(&dump, PlotKind::Field, &out.join("solution.svg"), outcome)
}

fn eig(config: &RunConfig, out: &Path, outcome: &mut RunOutcome) -> Result<(), CliError> {
    let (grid, kernel) = problem(config)?;
    let p = config.real("p").unwrap_or(2.0);
    let m = config.count("m").unwrap_or(1) as usize;
    let set = if p == 2.0 {
        eigs_linear(&assemble(&grid, &kernel)?, m)?
    } else {
        let op = spectral_operator(&grid, &kernel, p)?;
        let opts = InverseIterationOptions {
            tol: config.real("tol").unwrap_or(1e-10),
            max_iter: config.count("max_iter").unwrap_or(500) as usize,
            seed: config.count("seed").unwrap_or(0),
            ..InverseIterationOptions::default()
        };
        let first = inverse_iteration(&op, None, &opts)?;
        EigenSet {
            p,
            pairs: vec![EigenPair {
                lambda: first.lambda,
                u: Field::from_dofs(&grid, &first.x)?,
                residual: first.residual,
            }],
        }
    };
    set.write_dir(out)?;
    outcome.files.push(out.join(nlpl::spectra::MANIFEST_NAME));
    for k in 1..=set.len() {
        let dump = out.join(eigenfunction_file(k));
        outcome.files.push(dump.clone());
        plot(&dump, PlotKind::Field, &out.join(format!("eigenfunction_{k}.svg")), outcome)?;
    }
    Ok(())
}

fn run_sweep(config: &RunConfig, out: &Path, outcome: &mut RunOutcome) -> Result<(), CliError> {
    let d = domain(config)?;
    let kernel = base_kernel(config, d.dim())?;
    let mut sc = SweepConfig::new(
        kernel,
        d,
        mode(config),
        config.reals("deltas").unwrap_or_default().to_vec(),
        config.real("p").unwrap_or(2.0),
        config.count("m").unwrap_or(1) as usize,
    );
    let (ratio, v) = parse_grid(config.text("grid").unwrap_or_default()).map_err(|reason| {
        crate::error::ConfigError::Invalid {
            key: "grid".into(),
            reason,
        }
    })?;
    sc.grid = if ratio { GridPolicy::HorizonRatio(v) } else { GridPolicy::Fixed(v) };
    if let Some(h) = config.real("reference_h") {
        sc.reference_h = h;
    }
    if let Some(r) = config.real("truncation_radius") {
        sc.truncation_radius = r;
    }
    if let Some(t) = config.real("tol") {
        sc.eigen.tol = t;
    }
    if let Some(t) = config.real("certificate_tol") {
        sc.certificate_tol = t;
    }
    if let Some(n) = config.count("max_iter") {
        sc.eigen.max_iter = n as usize;
    }
    sc.eigen.seed = config.count("seed").unwrap_or(0);
    let result = sweep(&sc)?;
    result.write_dir(out)?;
    let csv = out.join("sweep.csv");
    outcome.files.push(csv.clone());
    for k in 1..=result.rows.len() {
        let dump = out.join(format!("eigenfunction_{k}.txt"));
        outcome.files.push(dump.clone());
        plot(&dump, PlotKind::Field, &out.join(format!("eigenfunction_{k}.svg")), outcome)?;
    }
    if result.rows.is_empty() {
        let reasons: Vec<String> = result.failures.iter().map(|f| format!("δ={}: {}", f.delta, f.message)).collect();
        return Err(CliError::Compute(nlpl::Error::Sweep(format!(
            "no horizon produced a certified eigenpair ({})",
            reasons.join("; ")
        ))));
    }
    plot(&csv, PlotKind::SweepError, &out.join("sweep_error.svg"), outcome)
}

fn plot(input: &Path, kind: PlotKind, output: &Path, outcome: &mut RunOutcome) -> Result<(), CliError> {
    emit_plot(input, kind, output)?;
    outcome.files.push(output.to_path_buf());
    Ok(())
}
