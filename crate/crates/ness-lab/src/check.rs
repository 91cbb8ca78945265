//! The built-in invariant suite behind `ness-lab check`: fast structural and
//! physical checks on fixed seeded instances, one pass/fail line each.

use nalgebra::DMatrix;
use ness_core::*;
use num_complex::Complex64;

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn paper_chain() -> ChainSpec {
    ChainSpec::uniform(25, 1.0).unwrap()
}

fn paper_bath() -> BathSpec {
    BathSpec::new(10.0, 0.1, 0.0).unwrap()
}

fn check(name: &'static str, body: impl FnOnce() -> ness_core::Result<(bool, String)>) -> Outcome {
    match body() {
        Ok((pass, detail)) => Outcome { name, pass, detail },
        Err(e) => Outcome {
            name,
            pass: false,
            detail: format!("error: {e}"),
        },
    }
}

/// Run every invariant check, print one line per check, return overall pass.
pub fn run() -> bool {
    let checks = vec![
        check("bath detailed balance", || {
            let bath = paper_bath();
            let ratio = bath.rate(1.0) / bath.rate(-1.0);
            let expect = (-0.1f64).exp();
            let dev = (ratio / expect - 1.0).abs();
            Ok((dev < 1e-14, format!("ratio deviation {dev:.2e}")))
        }),
        check("steady-state energy balance", || {
            let chain = paper_chain();
            let bath = paper_bath();
            let d = DrivingSpec::new(3.0, 2.0, 1)?;
            let c = sample_couplings(&chain, &d)?;
            let ness = solve_ness(&build_rate_matrix(&chain, &bath, &c)?)?;
            Ok((
                ness.report.balance_rel < 1e-12,
                format!("relative imbalance {:.2e}", ness.report.balance_rel),
            ))
        }),
        check("zero-driving equilibrium", || {
            let chain = paper_chain();
            let bath = paper_bath();
            let d = DrivingSpec::new(1.0, 0.0, 0)?;
            let c = Couplings::from_rates(vec![0.0; chain.n_links()], d)?;
            let ness = solve_ness(&build_rate_matrix(&chain, &bath, &c)?)?;
            let canonical = canonical_distribution(&chain, bath.temperature_b())?;
            let gap = (0..25)
                .map(|n| (ness.populations[n] - canonical[n]).abs())
                .fold(0.0, f64::max)
                / canonical.iter().cloned().fold(0.0, f64::max);
            Ok((gap < 1e-10, format!("max deviation {gap:.2e}")))
        }),
        check("coupling round trip", || {
            let chain = paper_chain();
            let d = DrivingSpec::new(0.8, sigma_for_sparsity(1e-5), 3)?;
            let c = sample_couplings(&chain, &d)?;
            let v = build_perturbation_matrix(&chain, &c, &d)?;
            let dev = c
                .rates()
                .iter()
                .enumerate()
                .map(|(k, w)| {
                    (d.epsilon() * d.epsilon() * v[(k, k + 1)] * v[(k, k + 1)] / w - 1.0).abs()
                })
                .fold(0.0, f64::max);
            Ok((dev < 1e-14, format!("max relative deviation {dev:.2e}")))
        }),
        check("diffusion mean ordering", || {
            let chain = paper_chain();
            let bath = paper_bath();
            let mut ok = true;
            for seed in 0..200 {
                let d = DrivingSpec::new(1.0, 0.015 * seed as f64, seed)?;
                let c = sample_couplings(&chain, &d)?;
                let diff = diffusion_coefficients(&chain, &bath, &c)?;
                ok &= diff.slrt <= diff.eff * (1.0 + 1e-12)
                    && diff.eff <= diff.lrt * (1.0 + 1e-12);
            }
            Ok((ok, "harmonic <= effective <= algebraic on 200 ensembles".into()))
        }),
        check("semi-linearity and non-additivity", || {
            let chain = ChainSpec::uniform(3, 1.0)?;
            let bath = paper_bath();
            let spec = DrivingSpec::new(1.0, 0.0, 0)?;
            let a = Couplings::from_rates(vec![1.0, 4.0], spec)?;
            let b = Couplings::from_rates(vec![4.0, 1.0], spec)?;
            let sum = Couplings::from_rates(vec![5.0, 5.0], spec)?;
            let da = diffusion_coefficients(&chain, &bath, &a)?.slrt;
            let db = diffusion_coefficients(&chain, &bath, &b)?.slrt;
            let dsum = diffusion_coefficients(&chain, &bath, &sum)?.slrt;
            let scaled = Couplings::from_rates(vec![1e3, 4e3], spec)?;
            let ds = diffusion_coefficients(&chain, &bath, &scaled)?.slrt;
            let homogeneous = (ds / (1e3 * da) - 1.0).abs() < 1e-13;
            let nonadditive = (dsum - (da + db)).abs() > 1.0;
            Ok((
                homogeneous && nonadditive,
                format!("slrt(c w) = c slrt(w), slrt(w+w') = {dsum} vs {}", da + db),
            ))
        }),
        check("superoperator trace and hermiticity preservation", || {
            let chain = paper_chain();
            let bath = paper_bath();
            let d = DrivingSpec::new(2.0, 2.0, 7)?;
            let c = sample_couplings(&chain, &d)?;
            let v = build_perturbation_matrix(&chain, &c, &d)?;
            // a fixed non-trivial Hermitian input
            let mut rho = DMatrix::<Complex64>::zeros(25, 25);
            for a in 0..25 {
                rho[(a, a)] = Complex64::new(1.0 / 25.0 + 0.001 * a as f64, 0.0);
                for b in (a + 1)..25 {
                    let z = Complex64::new(
                        0.01 / (1.0 + (a + b) as f64),
                        0.005 / (1.0 + b as f64 - a as f64),
                    );
                    rho[(a, b)] = z;
                    rho[(b, a)] = z.conj();
                }
            }
            let out = apply_generator(&chain, &bath, &v, &d, &rho);
            let scale = out.iter().fold(0.0f64, |m, z| m.max(z.norm())).max(1.0);
            let trace: Complex64 = (0..25).map(|n| out[(n, n)]).sum();
            let mut herm = 0.0f64;
            for a in 0..25 {
                for b in 0..25 {
                    herm = herm.max((out[(a, b)] - out[(b, a)].conj()).norm());
                }
            }
            Ok((
                trace.norm() < 1e-12 * scale && herm < 1e-12 * scale,
                format!("trace {:.2e}, hermiticity {herm:.2e}", trace.norm()),
            ))
        }),
        check("superoperator blocks match printed forms", || {
            let chain = paper_chain();
            let bath = paper_bath();
            let mut worst = 0.0f64;
            for seed in [1, 2] {
                let d = DrivingSpec::new(1.3, 2.0, seed)?;
                let c = sample_couplings(&chain, &d)?;
                let v = build_perturbation_matrix(&chain, &c, &d)?;
                let s = build_superoperator(&chain, &bath, &v, &d)?;
                let eps2 = d.epsilon() * d.epsilon();
                let v2 = &v * &v;
                let scale = s.norm_scale();
                for &(nu, mu) in s.pairs() {
                    let slot = s.coherence_slot(nu, mu);
                    let entry = s.matrix()[(slot, slot)];
                    let gamma = 0.5 * eps2 * (v2[(nu, nu)] + v2[(mu, mu)]) + bath.gamma_beta();
                    let delta = chain.energy(nu) - chain.energy(mu);
                    worst = worst.max((entry.re + gamma).abs() / scale);
                    worst = worst.max((entry.im + delta).abs() / scale);
                    for n in 0..25 {
                        if n != nu && n != mu {
                            let want = eps2 * v[(n, nu)] * v[(mu, n)];
                            worst =
                                worst.max((s.matrix()[(n, slot)].re - want).abs() / scale);
                        }
                    }
                }
            }
            Ok((worst < 1e-13, format!("worst scaled deviation {worst:.2e}")))
        }),
        check("quantum steady state is physical", || {
            let chain = paper_chain();
            let bath = paper_bath();
            let d = DrivingSpec::new(9.3, sigma_for_sparsity(1e-5), 1)?;
            let c = sample_couplings(&chain, &d)?;
            let v = build_perturbation_matrix(&chain, &c, &d)?;
            let s = build_superoperator(&chain, &bath, &v, &d)?;
            let rho = solve_quantum_ness(&s)?;
            let ok = rho.trace_error() < 1e-12
                && rho.hermiticity_error() < 1e-12
                && rho.min_eigenvalue() > -1e-10;
            Ok((
                ok,
                format!(
                    "trace err {:.2e}, herm err {:.2e}, min eig {:.2e}",
                    rho.trace_error(),
                    rho.hermiticity_error(),
                    rho.min_eigenvalue()
                ),
            ))
        }),
        check("strong dephasing recovers stochastic populations", || {
            let chain = paper_chain();
            let d = DrivingSpec::new(3.0, 1.0, 7)?;
            let c = sample_couplings(&chain, &d)?;
            let v = build_perturbation_matrix(&chain, &c, &d)?;
            let v2 = &v * &v;
            let eps2 = d.epsilon() * d.epsilon();
            let vmax = (0..25).map(|n| v2[(n, n)]).fold(0.0f64, f64::max);
            let bath = BathSpec::new(10.0, 0.1, 1e4 * eps2 * vmax)?;
            let s = build_superoperator(&chain, &bath, &v, &d)?;
            let rho = solve_quantum_ness(&s)?;
            let ness = solve_ness(&build_rate_matrix(&chain, &paper_bath(), &c)?)?;
            let gap = (0..25)
                .map(|n| (rho.populations()[n] - ness.populations[n]).abs())
                .fold(0.0, f64::max);
            Ok((gap < 1e-4, format!("population gap {gap:.2e}")))
        }),
    ];

    let mut all = true;
    for outcome in checks {
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{verdict}  {:<52} {}", outcome.name, outcome.detail);
        all &= outcome.pass;
    }
    all
}
