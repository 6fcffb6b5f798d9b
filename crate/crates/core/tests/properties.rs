mod common;

use std::sync::Arc;

use common::*;
use nlpl::calculus::*;
use nlpl::solvers::*;
use nlpl::spectra::*;
use proptest::prelude::*;

fn unit(h: f64, delta: f64) -> Arc<Grid<f64>> {
    build_grid(Domain::unit_interval(), h, delta).unwrap()
}

fn backend() -> impl Strategy<Value = Backend> {
    prop_oneof![Just(Backend::Quadrature), Just(Backend::Spectral)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn gradient_is_linear(
        seed_u in 0u64..1000,
        seed_v in 0u64..1000,
        a in -5.0f64..5.0,
        b in -5.0f64..5.0,
        delta in 0.05f64..0.2,
        backend in backend(),
    ) {
        let g = unit(delta / 8.0, delta);
        let k = k1_vanishing(delta);
        let u = random_smooth_1d(&g, 0.0, 1.0, seed_u);
        let v = random_smooth_1d(&g, 0.0, 1.0, seed_v);
        let gu = nl_gradient(&u, &k, backend).unwrap();
        let gv = nl_gradient(&v, &k, backend).unwrap();
        let gw = nl_gradient(&u.linear_combination(a, &v, b).unwrap(), &k, backend).unwrap();
        let scale = gu.sup_norm() * a.abs() + gv.sup_norm() * b.abs();
        for i in 0..g.len() {
            let expect = a * gu.component(0)[i] + b * gv.component(0)[i];
            prop_assert!((gw.component(0)[i] - expect).abs() <= 1e-12 * scale.max(1e-300));
        }
    }

    #[test]
    fn even_fields_have_odd_gradients(seed in 0u64..1000, delta in 0.05f64..0.2) {
        let g = unit(delta / 8.0, delta);
        let k = k1_vanishing(delta);
        let raw = random_smooth_1d(&g, 0.0, 1.0, seed);
        let n = g.len();
        // symmetrize by averaging with the exact mirror image
        let vals: Vec<f64> = (0..n)
            .map(|i| 0.5 * (raw.values()[i] + raw.values()[n - 1 - i]))
            .collect();
        let u = Field::new(&g, vals).unwrap();
        let grad = nl_gradient(&u, &k, Backend::Spectral).unwrap();
        let c = grad.component(0);
        let scale = grad.sup_norm();
        for i in 0..n {
            prop_assert!((c[i] + c[n - 1 - i]).abs() <= 1e-12 * scale.max(1e-300));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn energy_is_nonincreasing_along_descent(p in 1.3f64..4.0, seed in 0u64..1000) {
        let g = unit(1.0 / 64.0, 0.1);
        let k = k1_vanishing(0.1);
        let f = Field::dirichlet_from_fn(&g, |x| 1.0 + (5.0 * x[0]).cos());
        let pb = PLapProblem::new(&g, &k, p, f).unwrap();
        let init = Field::from_dofs(&g, &random_dofs(g.dofs().len(), seed)).unwrap();
        let sol = solve_plap_from(&pb, Some(&init)).unwrap();
        let h = &sol.run.objective_history;
        let scale = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for w in h.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-13 * scale);
        }
    }

    #[test]
    fn linear_spectrum_is_positive_and_ordered(delta in 0.08f64..0.25) {
        let g = unit(delta / 8.0, delta);
        let op = assemble(&g, &k1_vanishing(delta)).unwrap();
        let set = eigs_linear(&op, 4).unwrap();
        prop_assert!(set.pairs[0].lambda > 0.0);
        for w in set.pairs.windows(2) {
            prop_assert!(w[0].lambda <= w[1].lambda);
        }
    }

    #[test]
    fn residual_is_blind_to_sign(delta in 0.08f64..0.25, k in 0usize..3, alpha in 0.1f64..3.0) {
        let g = unit(delta / 8.0, delta);
        let kernel = k1_vanishing(delta);
        let op = assemble(&g, &kernel).unwrap();
        let set = eigs_linear(&op, 3).unwrap();
        let u = &set.pairs[k].u;
        let r = eigen_residual(u, 2.0, &kernel, alpha).unwrap();
        let flipped = eigen_residual(&u.scale(-1.0), 2.0, &kernel, alpha).unwrap();
        prop_assert!(r.certified() && flipped.certified());
        prop_assert!((r.relative - flipped.relative).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn inverse_iteration_rayleigh_is_nonincreasing(p in 1.5f64..4.0, seed in 0u64..1000) {
        let delta = 0.1;
        let g = unit(delta / 8.0, delta);
        let op = spectral_operator(&g, &k1_vanishing(delta), p).unwrap();
        let opts = InverseIterationOptions { seed, ..Default::default() };
        let res = inverse_iteration(&op, None, &opts).unwrap();
        for w in res.rayleigh_history.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-10 * w[0]);
        }
        prop_assert!((res.residual.rayleigh - res.lambda).abs() <= opts.tol * res.lambda);
    }
}
