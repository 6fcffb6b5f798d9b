mod common;

use std::sync::Arc;

use common::*;
use nlpl::calculus::*;
use nlpl::solvers::spectral_operator;
use nlpl::spectra::*;
use nlpl::Error;

fn unit(h: f64, delta: f64) -> Arc<Grid<f64>> {
    build_grid(Domain::unit_interval(), h, delta).unwrap()
}

fn small_op() -> DiscreteOperator<f64> {
    let delta = 0.1;
    assemble(&unit(delta / 8.0, delta), &k1_vanishing(delta)).unwrap()
}

/// Classical p-Laplacian on (0, 1) by finite differences: inverse iteration
/// with Newton inner solves on the tridiagonal system.
fn local_fd_first_eigenvalue(p: f64, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let m = n - 1;
    let slopes = |u: &[f64]| -> Vec<f64> {
        (0..=m)
            .map(|i| {
                let left = if i == 0 { 0.0 } else { u[i - 1] };
                let right = if i == m { 0.0 } else { u[i] };
                (right - left) / h
            })
            .collect()
    };
    let rayleigh = |u: &[f64]| -> f64 {
        let num: f64 = slopes(u).iter().map(|s| s.abs().powf(p)).sum::<f64>() * h;
        let den: f64 = u.iter().map(|v| v.abs().powf(p)).sum::<f64>() * h;
        num / den
    };
    let solve_tridiagonal = |lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]| -> Vec<f64> {
        let k = diag.len();
        let mut c = vec![0.0; k];
        let mut d = vec![0.0; k];
        c[0] = upper[0] / diag[0];
        d[0] = rhs[0] / diag[0];
        for i in 1..k {
            let den = diag[i] - lower[i] * c[i - 1];
            c[i] = if i + 1 < k { upper[i] / den } else { 0.0 };
            d[i] = (rhs[i] - lower[i] * d[i - 1]) / den;
        }
        let mut x = vec![0.0; k];
        x[k - 1] = d[k - 1];
        for i in (0..k - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        x
    };
    let mut u: Vec<f64> = (1..=m).map(|i| (std::f64::consts::PI * i as f64 * h).sin()).collect();
    let mut lam = rayleigh(&u);
    for _ in 0..500 {
        let rhs: Vec<f64> = u.iter().map(|v| v.abs().powf(p - 2.0) * v * h).collect();
        let mut v = u.clone();
        for _ in 0..100 {
            let s = slopes(&v);
            let flux: Vec<f64> = s.iter().map(|x| x.abs().powf(p - 2.0) * x).collect();
            let stiff: Vec<f64> = s.iter().map(|x| (p - 1.0) * x.abs().powf(p - 2.0).max(1e-300) / h).collect();
            let grad: Vec<f64> = (0..m).map(|i| flux[i] - flux[i + 1] - rhs[i]).collect();
            let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if gnorm <= 1e-14 * rhs.iter().map(|g| g * g).sum::<f64>().sqrt() {
                break;
            }
            let diag: Vec<f64> = (0..m).map(|i| stiff[i] + stiff[i + 1]).collect();
            let off: Vec<f64> = (0..m).map(|i| -stiff[i + 1]).collect();
            let lower: Vec<f64> = (0..m).map(|i| if i == 0 { 0.0 } else { -stiff[i] }).collect();
            let d = solve_tridiagonal(&lower, &diag, &off, &grad);
            v.iter_mut().zip(&d).for_each(|(a, b)| *a -= b);
        }
        let norm = (v.iter().map(|x| x.abs().powf(p)).sum::<f64>() * h).powf(1.0 / p);
        u = v.iter().map(|x| x / norm).collect();
        let next = rayleigh(&u);
        let done = (next - lam).abs() <= 1e-13 * lam;
        lam = next;
        if done {
            break;
        }
    }
    lam
}

#[test]
fn local_oracle_matches_the_closed_form() {
    // λ₁ = (p − 1) π_p^p with π_p = 2π / (p sin(π/p))
    for p in [2.0, 3.0] {
        let pi_p = 2.0 * std::f64::consts::PI / (p * (std::f64::consts::PI / p).sin());
        let exact = (p - 1.0) * pi_p.powf(p);
        let fd = local_fd_first_eigenvalue(p, 800);
        assert!((fd - exact).abs() <= 1e-4 * exact, "p={p}: {fd} vs {exact}");
    }
}

#[test]
fn first_eigenvalue_approaches_the_local_value() {
    let delta = 0.05;
    let op = assemble(&unit(1.0 / 512.0, delta), &k1_vanishing(delta)).unwrap();
    let set = eigs_linear(&op, 3).unwrap();
    let pi2 = std::f64::consts::PI.powi(2);
    let l1 = set.pairs[0].lambda;
    assert!((l1 - pi2).abs() <= 0.03 * pi2, "{l1}");
    assert!(set.eigenvalues().iter().all(|v| *v > 0.0));
    assert!(set.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
    let w = op.mass_weight();
    for (i, a) in set.pairs.iter().enumerate() {
        for (j, b) in set.pairs.iter().enumerate() {
            let ip: f64 = w * a.u.dofs().iter().zip(b.u.dofs()).map(|(x, y)| x * y).sum::<f64>();
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((ip - expect).abs() <= 1e-8);
        }
        assert!((a.u.lp_norm_domain(2.0) - 1.0).abs() <= 1e-10);
        assert!(a.residual.norm <= 1e-6, "{}", a.residual.norm);
        assert!(a.residual.certified());
    }
}

#[test]
fn rayleigh_quotient_examples() {
    let op = small_op();
    let k = op.kernel().clone();
    let g = op.grid().clone();
    let set = eigs_linear(&op, 2).unwrap();
    for e in &set.pairs {
        let r = rayleigh(&e.u, 2.0, &k).unwrap();
        assert!((r - e.lambda).abs() <= 1e-8 * e.lambda);
    }
    let u = Field::from_dofs(&g, &random_dofs(g.dofs().len(), 3)).unwrap();
    let r = rayleigh(&u, 2.0, &k).unwrap();
    for c in [-3.0, 0.01, 7.5] {
        let rc = rayleigh(&u.scale(c), 2.0, &k).unwrap();
        assert!((rc - r).abs() <= 1e-12 * r);
    }
    let l1 = set.pairs[0].lambda;
    for seed in 0..50 {
        let u = Field::from_dofs(&g, &random_dofs(g.dofs().len(), 100 + seed)).unwrap();
        assert!(rayleigh(&u, 2.0, &k).unwrap() >= l1 - 1e-8);
    }
    assert!(matches!(rayleigh(&Field::zeros(&g), 2.0, &k), Err(Error::ZeroField)));
}

#[test]
fn eigenpairs_are_stationary_points_of_the_rayleigh_quotient() {
    let op = small_op();
    let set = eigs_linear(&op, 3).unwrap();
    let plap = spectral_operator(op.grid(), op.kernel(), 2.0).unwrap();
    let n = op.dofs();
    for e in &set.pairs {
        let x = e.u.dofs();
        for seed in 0..20 {
            let mut v = random_dofs(n, 500 + seed);
            let nv = (op.mass_weight() * v.iter().map(|a| a * a).sum::<f64>()).sqrt();
            v.iter_mut().for_each(|a| *a /= nv);
            let t = 1e-6;
            let plus: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + t * b).collect();
            let minus: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a - t * b).collect();
            let d = (plap.rayleigh(&plus) - plap.rayleigh(&minus)) / (2.0 * t);
            assert!(d.abs() <= 1e-5, "{d}");
        }
    }
}

#[test]
fn inverse_iteration_matches_the_linear_solver() {
    let op = small_op();
    let set = eigs_linear(&op, 1).unwrap();
    let tol = 1e-10;
    let (lambda, u, report) = first_eig_p(op.grid(), op.kernel(), 2.0, tol).unwrap();
    let l1 = set.pairs[0].lambda;
    assert!((lambda - l1).abs() <= 1e-5 * l1, "{lambda} {l1}");
    assert!((u.lp_norm_domain(2.0) - 1.0).abs() <= 1e-10);
    assert!(report.certified());
    assert!((report.rayleigh - lambda).abs() <= tol * lambda);
    let d = max_abs_diff(&u.dofs(), &set.pairs[0].u.dofs()) / sup(&u.dofs());
    assert!(d <= 1e-4, "{d}");
}

#[test]
fn nonlinear_first_eigenpair() {
    let delta = 0.05;
    let p = 3.0;
    let g = unit(delta / 8.0, delta);
    let k = k1_vanishing(delta);
    let op = spectral_operator(&g, &k, p).unwrap();
    let opts = InverseIterationOptions::default();
    let res = inverse_iteration(&op, None, &opts).unwrap();
    for w in res.rayleigh_history.windows(2) {
        assert!(w[1] <= w[0] + 1e-10 * w[0], "{} > {}", w[1], w[0]);
    }
    let norm = (op.mass_weight() * res.x.iter().map(|v| v.abs().powf(p)).sum::<f64>()).powf(1.0 / p);
    assert!((norm - 1.0).abs() <= 1e-10);
    assert!(res.residual.relative <= 1e-5, "{}", res.residual.relative);
    assert!((res.residual.rayleigh - res.lambda).abs() <= opts.tol * res.lambda);
    let oracle = local_fd_first_eigenvalue(p, 800);
    let gap = (res.lambda - oracle).abs() / oracle;
    assert!(gap <= 0.05, "{} vs {oracle}: {gap}", res.lambda);
    // the first eigenfunction does not change sign
    assert!(res.x.iter().all(|v| *v >= -1e-8));
}

#[test]
fn inverse_iteration_is_seed_independent() {
    let delta = 0.1;
    let g = unit(delta / 8.0, delta);
    let op = spectral_operator(&g, &k1_vanishing(delta), 1.5).unwrap();
    let a = inverse_iteration(&op, None, &InverseIterationOptions { seed: 7, ..Default::default() }).unwrap();
    let b = inverse_iteration(&op, None, &InverseIterationOptions { seed: 8, ..Default::default() }).unwrap();
    assert!((a.lambda - b.lambda).abs() <= 1e-8 * a.lambda);
    assert!(max_abs_diff(&a.x, &b.x) <= 1e-5 * sup(&a.x));
}

#[test]
fn residual_certificate_examples() {
    let op = small_op();
    let set = eigs_linear(&op, 2).unwrap();
    let k = op.kernel();
    let g = op.grid();
    let pair = &set.pairs[1];
    let r = eigen_residual(&pair.u, 2.0, k, 0.5).unwrap();
    assert!(r.norm <= 1e-6);
    let flipped = eigen_residual(&pair.u.scale(-1.0), 2.0, k, 0.5).unwrap();
    assert!((flipped.norm - r.norm).abs() <= 1e-12);
    let mut u = Field::from_dofs(g, &random_dofs(g.dofs().len(), 77)).unwrap();
    let nu = u.lp_norm_domain(2.0);
    u = u.scale(1.0 / nu);
    let bad = eigen_residual(&u, 2.0, k, 0.5).unwrap();
    assert!(bad.norm >= 1e-2, "{}", bad.norm);
    for p in [2.0, 3.0] {
        let alphas = [1.0 / p, 1.0, 2.0];
        for field in [&pair.u, &u] {
            let verdicts: Vec<bool> = alphas
                .iter()
                .map(|a| eigen_residual(field, p, k, *a).unwrap().norm <= 1e-6)
                .collect();
            assert!(verdicts.iter().all(|v| *v == verdicts[0]));
            let rel: Vec<f64> = alphas
                .iter()
                .map(|a| eigen_residual(field, p, k, *a).unwrap().relative)
                .collect();
            // exact in theory; converged pairs sit at the round-off floor
            assert!(rel.iter().all(|r| (r - rel[0]).abs() <= 1e-9 * rel[0] + 1e-12), "{rel:?}");
        }
    }
    assert!(matches!(eigen_residual(&Field::zeros(g), 2.0, k, 0.5), Err(Error::ZeroField)));
}

#[test]
fn min_max_characterization() {
    let op = small_op();
    let set = eigs_linear(&op, 3).unwrap();
    let report = courant_fischer_check(&set, &op, 1000, 42).unwrap();
    assert!(report.passed());
    for e in &report.entries {
        assert!((e.attained - e.lambda).abs() <= 1e-8);
        assert!(e.min_sampled >= e.lambda - 1e-8);
        assert_eq!(e.violations, 0);
    }
    let again = courant_fischer_check(&set, &op, 1000, 42).unwrap();
    assert_eq!(report, again);
}

#[test]
fn request_limits() {
    let op = small_op();
    assert!(matches!(eigs_linear(&op, 0), Err(Error::TooManyEigenpairs { .. })));
    assert!(matches!(eigs_linear(&op, op.dofs() + 1), Err(Error::TooManyEigenpairs { .. })));
}

#[test]
fn eigenset_round_trips_through_a_directory() {
    let op = small_op();
    let set = eigs_linear(&op, 2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    set.write_dir(dir.path()).unwrap();
    let back = EigenSet::<f64>::read_dir(dir.path()).unwrap();
    assert_eq!(back.p, 2.0);
    assert_eq!(back.len(), 2);
    for (a, b) in set.pairs.iter().zip(&back.pairs) {
        assert_eq!(a.lambda, b.lambda);
        assert_eq!(a.u.values(), b.u.values());
        assert_eq!(a.residual, b.residual);
    }
}

#[test]
fn large_problems_use_lanczos() {
    let delta = 0.1;
    let g = unit(1.0 / 2048.0, delta);
    assert!(g.dofs().len() >= DENSE_EIGEN_LIMIT);
    let op = assemble(&g, &k1_vanishing(delta)).unwrap();
    let set = eigs_linear(&op, 3).unwrap();
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((set.pairs[0].lambda - pi2).abs() <= 0.1 * pi2);
    assert!(set.eigenvalues().windows(2).all(|w| w[0] < w[1]));
    for e in &set.pairs {
        assert!(e.residual.certified(), "{}", e.residual.relative);
    }
}
