mod common;

use std::f64::consts::PI;

use common::k1;
use nlpl::kernels::{log_radii, Cutoff, FamilyTag, HorizonMode, Kernel, KernelSpec, Verdict};
use nlpl::Error;
use proptest::prelude::*;

fn hard(s: f64, dim: usize) -> Kernel<f64> {
    Kernel::new(
        KernelSpec::TruncatedPower {
            s,
            cutoff: Cutoff::Hard,
        },
        dim,
    )
    .unwrap()
}

fn scan_radii() -> Vec<f64> {
    log_radii(1e-6, 1.0, 200)
}

/// Composite Simpson rule with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

#[test]
fn construction_examples() {
    assert!((hard(0.5, 1).profile(0.25) - 2.0).abs() < 1e-15);
    let pure = Kernel::<f64>::pure_power(0.5, 1).unwrap();
    assert!(pure.support_radius().is_infinite() && pure.is_analytic_only());
    assert!(matches!(Kernel::truncated_power(1.2, 1), Err(Error::ParameterRange(_))));
}

#[test]
fn normalization_examples() {
    // ∫_{-1}^{1} |t|^{-1/2} dt = 2 · [2√t]_0^1
    let raw_mass = 2.0 * 2.0;
    let f = hard(0.5, 1).normalization_factor().unwrap();
    assert!((f - 1.0 / raw_mass).abs() < 1e-12);
    let k = k1();
    assert!((k.normalization_factor().unwrap() - 1.0).abs() < 1e-12);
    assert!((k.mass().unwrap() - 1.0).abs() < 1e-8);
    assert_eq!(Kernel::<f64>::pure_power(0.5, 1).unwrap().normalize().unwrap_err(), Error::InfiniteSupport);
    let k2 = hard(0.5, 2).normalize().unwrap();
    assert!((k2.mass().unwrap() - 2.0).abs() < 1e-8 * 2.0);
}

#[test]
fn hypothesis_examples() {
    let report = k1().check_hypotheses(&scan_radii(), 1.0);
    assert!(report.all_pass(), "{}", report.to_key_value());
    let (s, t) = report.window().unwrap();
    assert!(s <= 0.45 && t >= 0.55, "window {s} {t}");

    let annulus = Kernel::custom(1, 1.0, vec![0.5], |r: f64| if r >= 0.5 { 1.0 } else { 0.0 }).unwrap();
    let r = annulus.check_hypotheses(&scan_radii(), 1.0);
    assert_eq!(r.h0.verdict, Verdict::Fail);
    assert!(r.h0.witness.is_some());

    let bounded = Kernel::custom(1, 1.0, vec![], |_r: f64| 1.0).unwrap();
    let r = bounded.check_hypotheses(&scan_radii(), 1.0);
    assert_eq!(r.h3.verdict, Verdict::Fail);
    assert!(r.h3.witness.is_some());

    assert_eq!(
        k1().check_hypotheses(&scan_radii(), 1.0),
        k1().check_hypotheses(&scan_radii(), 1.0)
    );
}

#[test]
fn rescaling_examples() {
    let k = k1();
    let same = k.rescale(1.0, HorizonMode::Vanishing).unwrap();
    assert_eq!(same.horizon().unwrap().c_delta, 1.0);
    let half = k.rescale(0.5, HorizonMode::Vanishing).unwrap();
    assert_eq!(half.horizon().unwrap().c_delta, 2.0);
    assert_eq!(half.support_radius(), 0.5);
    let two = k.rescale(2.0, HorizonMode::Diverging).unwrap();
    // normalized K1 profile is ¼ r^{-1/2}
    let expected = 1.0 / (0.25 * 0.5f64.powf(-0.5));
    assert!((two.horizon().unwrap().c_delta - expected).abs() < 1e-14);
}

#[test]
fn asymptotic_order_examples() {
    let deltas = Kernel::<f64>::default_s_infinity_deltas();
    assert!((k1().s_infinity(&deltas).unwrap().estimate - 0.5).abs() <= 0.01);
    let k09 = hard(0.9, 1).normalize().unwrap();
    assert!((k09.s_infinity(&deltas).unwrap().estimate - 0.9).abs() <= 0.01);
    let pure = Kernel::<f64>::pure_power(0.5, 1).unwrap();
    assert!(pure
        .s_infinity(&deltas)
        .unwrap()
        .iterates
        .iter()
        .all(|(_, v)| (v - 0.5).abs() < 1e-12));
    let lim = k1().limit_kernel(&deltas).unwrap();
    assert_eq!(lim.family_tag(), FamilyTag::PurePower);
    // exponent n + s∞ − 1 = 0.5: ρ(r) = r^{-1/2}
    assert!((lim.profile(0.04) - 5.0).abs() < 1e-9);
    assert_eq!(
        lim.limit_kernel(&deltas).unwrap().family_order(),
        lim.family_order()
    );
}

#[test]
fn profile_examples() {
    let k = k1();
    assert!((k.q(0.25).unwrap() - 0.5).abs() < 1e-8);
    assert_eq!(k.q(1.0).unwrap(), 0.0);
    assert!((k.q(0.01).unwrap() - 4.5).abs() < 1e-8 * 4.5);
    let radii = log_radii(1e-4, 2.0, 20);
    let prof = k.q_profile(&radii).unwrap();
    for (r, v) in prof.radii.iter().zip(&prof.values) {
        let exact = if *r < 1.0 { 0.5 * (r.powf(-0.5) - 1.0) } else { 0.0 };
        assert!((v - exact).abs() <= 1e-8 * exact.max(1e-300) + 1e-14);
    }
}

#[test]
fn symbol_examples() {
    let pure = Kernel::<f64>::pure_power(0.5, 1).unwrap();
    let ratio = pure.symbol_qhat(&[2.0]).value / pure.symbol_qhat(&[1.0]).value;
    assert!((ratio - 2f64.powf(-0.5)).abs() < 1e-10);
    // direct transform 2∫_0^1 Q(x) cos(2πx) dx with Q(x) = ½(x^{-1/2} − 1), x = u²
    let direct = simpson(|u| 2.0 * (1.0 - u) * (2.0 * PI * u * u).cos(), 0.0, 1.0, 20_000);
    let value = k1().symbol_qhat(&[1.0]);
    assert!(value.converged);
    assert!(((value.value - direct) / direct).abs() < 1e-6, "{} vs {direct}", value.value);
}

#[test]
fn multiplier_examples() {
    let k = k1();
    assert_eq!(k.multiplier(&[0.0]), 0.0);
    let pure = Kernel::<f64>::pure_power(0.5, 1).unwrap();
    assert!((pure.multiplier(&[3.0]) / pure.multiplier(&[1.5]) - 2.0).abs() < 1e-6);
}

#[test]
fn rescaled_symbol_follows_the_dilation_rule() {
    // c_δ = δ^{-n} gives Q_δ(x) = δ^{-n} Q(x/δ), hence Q̂_δ(ξ) = Q̂(δξ) and
    // m_δ(ξ) = 4π²|ξ|² Q̂(δξ)² = δ^{-2} m(δξ)
    let k = k1();
    let delta = 0.5;
    let half = k.rescale(delta, HorizonMode::Vanishing).unwrap();
    for xi in [0.3, 1.0, 4.7, 12.0] {
        let qa = half.symbol_qhat(&[xi]).value;
        let qb = k.symbol_qhat(&[delta * xi]).value;
        assert!((qa - qb).abs() <= 1e-8 * qb.abs(), "{xi}: {qa} vs {qb}");
        let a = half.multiplier(&[xi]);
        let b = k.multiplier(&[delta * xi]);
        assert!((a * delta * delta - b).abs() <= 1e-8 * b, "{xi}: {a} vs {b}");
        // the undilated identity m_δ(ξ) = m(δξ) is off by exactly δ^{-2}
        assert!((a / b - 4.0).abs() < 1e-8);
    }
}

#[test]
fn tabulated_kernels_from_text() {
    let text = "# r value\n0.001 31.6227766\n0.01 10\n0.1 3.16227766\n1 1\n";
    let k = Kernel::<f64>::tabulated(nlpl::kernels::Table::parse(text).unwrap(), 1).unwrap();
    assert!((k.profile(0.04) - 5.0).abs() < 1e-6);
}

fn kernel_strategy() -> impl Strategy<Value = Kernel<f64>> {
    (0.05f64..0.95, 1usize..=2, prop::bool::ANY).prop_map(|(s, dim, smooth)| {
        let cutoff = if smooth { Cutoff::Quintic } else { Cutoff::Hard };
        Kernel::new(KernelSpec::TruncatedPower { s, cutoff }, dim)
            .unwrap()
            .normalize()
            .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn normalization_is_idempotent(k in kernel_strategy()) {
        prop_assert!((k.normalization_factor().unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn profile_is_nonincreasing(k in kernel_strategy(), a in 1e-4f64..1.2, b in 1e-4f64..1.2) {
        let (r1, r2) = if a < b { (a, b) } else { (b, a) };
        let (q1, q2) = (k.q(r1).unwrap(), k.q(r2).unwrap());
        prop_assert!(q1 >= q2 && q2 >= 0.0);
    }

    #[test]
    fn rescaled_profile_identity(k in kernel_strategy(), delta in 0.05f64..1.0, r in 1e-3f64..1.0) {
        let kd = k.rescale(delta, HorizonMode::Vanishing).unwrap();
        let c = kd.horizon().unwrap().c_delta;
        let lhs = kd.q(r).unwrap();
        let rhs = c * k.q(r / delta).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1e-12));
    }

    #[test]
    fn symbol_is_even(k in kernel_strategy(), x in -20.0f64..20.0, y in -20.0f64..20.0) {
        let xi: Vec<f64> = if k.dim() == 1 { vec![x] } else { vec![x, y] };
        let neg: Vec<f64> = xi.iter().map(|v| -v).collect();
        let a = k.symbol_qhat(&xi).value;
        prop_assert!(a.is_finite());
        prop_assert_eq!(a, k.symbol_qhat(&neg).value);
    }

    #[test]
    fn multiplier_is_nonnegative(k in kernel_strategy(), x in -50.0f64..50.0, y in -50.0f64..50.0) {
        let xi: Vec<f64> = if k.dim() == 1 { vec![x] } else { vec![x, y] };
        prop_assert!(k.multiplier(&xi) >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn asymptotic_order_lies_in_the_hypothesis_window(s in 0.1f64..0.9) {
        let k = hard(s, 1).normalize().unwrap();
        let est = k.s_infinity(&Kernel::<f64>::default_s_infinity_deltas()).unwrap().estimate;
        let report = k.check_hypotheses(&scan_radii(), 1.0);
        let (lo, hi) = report.window().unwrap();
        prop_assert!(lo <= est && est <= hi, "{} not in [{}, {}]", est, lo, hi);
    }
}
