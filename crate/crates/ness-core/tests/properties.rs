//! Property tests over the model and diagnostic functionals.

use nalgebra::DVector;
use ness_core::*;
use proptest::prelude::*;

fn chain(n: usize) -> ChainSpec {
    ChainSpec::uniform(n, 1.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_distribution_normalizes(n in 2usize..120, t in 1e-2f64..1e6) {
        let p = canonical_distribution(&chain(n), t).unwrap();
        let sum: f64 = p.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|x| *x >= 0.0));
    }

    #[test]
    fn perturbation_round_trip_is_exact(
        eps in 1e-3f64..1e3,
        sigma in 0.0f64..4.0,
        seed in 0u64..1000,
    ) {
        let chain = chain(12);
        let d = DrivingSpec::new(eps, sigma, seed).unwrap();
        let c = sample_couplings(&chain, &d).unwrap();
        let v = build_perturbation_matrix(&chain, &c, &d).unwrap();
        for (k, w) in c.rates().iter().enumerate() {
            let back = eps * eps * v[(k, k + 1)] * v[(k, k + 1)];
            prop_assert!((back / w - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn diffusion_means_are_ordered(
        sigma in 0.0f64..3.5,
        seed in 0u64..500,
        w_beta in 1e-4f64..1e2,
    ) {
        let chain = chain(20);
        let bath = BathSpec::new(10.0, w_beta, 0.0).unwrap();
        let d = DrivingSpec::new(1.0, sigma, seed).unwrap();
        let c = sample_couplings(&chain, &d).unwrap();
        let diff = diffusion_coefficients(&chain, &bath, &c).unwrap();
        prop_assert!(diff.slrt <= diff.eff * (1.0 + 1e-12));
        prop_assert!(diff.eff <= diff.lrt * (1.0 + 1e-12));
    }

    #[test]
    fn slrt_scales_linearly(
        sigma in 0.0f64..3.0,
        seed in 0u64..500,
        scale in 1e-6f64..1e6,
    ) {
        let chain = chain(10);
        let bath = BathSpec::new(10.0, 0.1, 0.0).unwrap();
        let d = DrivingSpec::new(1.0, sigma, seed).unwrap();
        let c = sample_couplings(&chain, &d).unwrap();
        let scaled = Couplings::from_rates(
            c.rates().iter().map(|w| w * scale).collect(),
            *c.spec(),
        ).unwrap();
        let d1 = diffusion_coefficients(&chain, &bath, &c).unwrap().slrt;
        let d2 = diffusion_coefficients(&chain, &bath, &scaled).unwrap().slrt;
        prop_assert!((d2 / (scale * d1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn steady_state_is_normalized_positive_and_balanced(
        eps in 1e-4f64..1e4,
        sigma in 0.0f64..3.5,
        seed in 0u64..300,
    ) {
        let chain = chain(25);
        let bath = BathSpec::new(10.0, 0.1, 0.0).unwrap();
        let d = DrivingSpec::new(eps, sigma, seed).unwrap();
        let c = sample_couplings(&chain, &d).unwrap();
        let w = build_rate_matrix(&chain, &bath, &c).unwrap();
        let ness = solve_ness(&w).unwrap();
        let sum: f64 = ness.populations.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        prop_assert!(ness.populations.iter().all(|p| *p > 0.0));
        prop_assert!(ness.report.balance_rel < 1e-10);
        prop_assert!(ness.report.t_sys >= bath.temperature_b() * (1.0 - 1e-9));
    }
}

#[test]
fn effective_temperature_matches_closed_form_at_high_bath_temperature() {
    // the exact-log weighted estimate and the coupling-only closed form agree
    // when the spacing is far below every temperature in the problem
    let chain = ChainSpec::uniform(25, 1.0).unwrap();
    let bath = BathSpec::new(1e3, 0.1, 0.0).unwrap();
    let d = DrivingSpec::new(1.0, 1.0, 5).unwrap();
    let c = sample_couplings(&chain, &d).unwrap();
    let w = build_rate_matrix(&chain, &bath, &c).unwrap();
    let ness = solve_ness(&w).unwrap();
    let exact = effective_temperature(&chain, &bath, &ness.populations);
    let closed = effective_temperature_closed_form(&bath, &c);
    assert!(
        (exact / closed - 1.0).abs() < 0.02,
        "exact {exact} vs closed {closed}"
    );
}

#[test]
fn uniform_profile_has_infinite_micro_temperatures() {
    let chain = ChainSpec::uniform(8, 1.0).unwrap();
    let p = DVector::from_element(8, 0.125);
    for t in micro_temperatures(&chain, &p) {
        assert!(t.is_infinite() && t > 0.0);
    }
}
