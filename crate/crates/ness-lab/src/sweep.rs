//! The sweep engine: enumerate instances, solve them in parallel, and write
//! deterministic CSV datasets plus a run manifest.
//!
//! Determinism contract: rows are ordered by the parameter tuple (never by
//! completion order), every float is printed with 17 significant digits, and
//! per-instance work depends only on the instance parameters, so reruns and
//! different worker counts produce byte-identical CSVs.

use anyhow::{Context, Result};
use ness_core::*;
use rayon::prelude::*;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::config::{Picture, SweepConfig};
use crate::table::{fmt_bool, fmt_f64, fmt_u64, fmt_usize, write_csv};

/// Outcome of one solved instance.
struct InstanceResult {
    picture: Picture,
    sigma: f64,
    seed: u64,
    epsilon: f64,
    report: Option<NessReport>,
    populations: Option<Vec<f64>>,
    /// quantum extras: trace error, hermiticity error, min eigenvalue
    quantum_checks: Option<(f64, f64, f64)>,
    eigenbasis: Option<Vec<(f64, f64)>>,
    error: Option<String>,
    wall_ms: u64,
}

#[derive(Clone, Copy)]
struct InstanceKey {
    picture: Picture,
    sigma_idx: usize,
    seed_idx: usize,
    eps_idx: usize,
}

/// Summary returned to the CLI.
pub struct RunSummary {
    pub n_instances: usize,
    pub n_failed: usize,
    pub out_dir: PathBuf,
}

#[derive(Serialize)]
struct ManifestInstance {
    picture: String,
    sigma: f64,
    seed: u64,
    epsilon: f64,
    status: String,
    residual: f64,
    wall_ms: u64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'static str,
    started_unix_ms: u128,
    wall_ms: u128,
    n_instances: usize,
    n_failed: usize,
    workers: usize,
    seed_base: u64,
    config: &'a SweepConfig,
    instance: Vec<ManifestInstance>,
}

fn solve_instance(
    config: &SweepConfig,
    key: InstanceKey,
    grid: &[f64],
    detail_idx: &[usize],
    seed_base: u64,
) -> InstanceResult {
    let started = Instant::now();
    let chain = config.chain_spec();
    let bath = config.bath_spec();
    let sigma = config.drive.sigma_list[key.sigma_idx];
    let seed = seed_base.wrapping_add(config.drive.seeds[key.seed_idx]);
    let epsilon = grid[key.eps_idx];
    let want_detail = detail_idx.contains(&key.eps_idx);

    let outcome = (|| -> ness_core::Result<(
        NessReport,
        Vec<f64>,
        Option<(f64, f64, f64)>,
        Option<Vec<(f64, f64)>>,
    )> {
        let driving = DrivingSpec::new(epsilon, sigma, seed)?;
        let couplings = sample_couplings(&chain, &driving)?;
        match key.picture {
            Picture::Stochastic => {
                let w = build_rate_matrix(&chain, &bath, &couplings)?;
                let ness = solve_ness(&w)?;
                let p = ness.populations.iter().copied().collect();
                Ok((ness.report, p, None, None))
            }
            Picture::Quantum => {
                let v = build_perturbation_matrix(&chain, &couplings, &driving)?;
                let sup = build_superoperator(&chain, &bath, &v, &driving)?;
                let rho = solve_quantum_ness(&sup)?;
                let report = quantum_ness_report(&chain, &bath, &v, &driving, &rho)?;
                let p = rho.populations().iter().copied().collect();
                let checks = (
                    rho.trace_error(),
                    rho.hermiticity_error(),
                    rho.min_eigenvalue(),
                );
                let eigen = if want_detail {
                    let eb = eigenbasis_analysis(&chain, &v, &rho)?;
                    Some(
                        eb.mean_energies
                            .iter()
                            .zip(&eb.weights)
                            .map(|(&e, &w)| (e, w))
                            .collect(),
                    )
                } else {
                    None
                };
                Ok((report, p, Some(checks), eigen))
            }
        }
    })();

    let wall_ms = started.elapsed().as_millis() as u64;
    match outcome {
        Ok((report, populations, quantum_checks, eigenbasis)) => InstanceResult {
            picture: key.picture,
            sigma,
            seed,
            epsilon,
            report: Some(report),
            populations: if want_detail { Some(populations) } else { None },
            quantum_checks,
            eigenbasis,
            error: None,
            wall_ms,
        },
        Err(e) => InstanceResult {
            picture: key.picture,
            sigma,
            seed,
            epsilon,
            report: None,
            populations: None,
            quantum_checks: None,
            eigenbasis: None,
            error: Some(e.to_string()),
            wall_ms,
        },
    }
}

/// Execute the sweep and write `ness.csv`, per-level detail files, aggregated
/// figure datasets, crossover markers, and `manifest.toml` under `out_dir`.
pub fn run_sweep(
    config: &SweepConfig,
    out_dir: &Path,
    workers: usize,
    seed_base: u64,
) -> Result<RunSummary> {
    let started = Instant::now();
    let started_unix_ms = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0);
    config.validate()?;
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;

    let grid = config.epsilon_grid();
    let detail_idx: Vec<usize> = config
        .outputs
        .detail_epsilons
        .iter()
        .map(|&e| nearest_index(&grid, e))
        .collect();

    let mut pictures = config.run.pictures.clone();
    pictures.sort();
    pictures.dedup();

    // Parameter-ordered instance list; results keep this order.
    let mut keys = Vec::new();
    for &picture in &pictures {
        for sigma_idx in 0..config.drive.sigma_list.len() {
            for seed_idx in 0..config.drive.seeds.len() {
                for eps_idx in 0..grid.len() {
                    keys.push(InstanceKey {
                        picture,
                        sigma_idx,
                        seed_idx,
                        eps_idx,
                    });
                }
            }
        }
    }

    let n_workers = if workers == 0 {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    } else {
        workers
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n_workers)
        .build()
        .context("cannot build worker pool")?;
    let results: Vec<InstanceResult> = pool.install(|| {
        keys.par_iter()
            .map(|&key| solve_instance(config, key, &grid, &detail_idx, seed_base))
            .collect()
    });

    write_outputs(config, out_dir, &grid, &results, seed_base)?;

    let n_failed = results.iter().filter(|r| r.error.is_some()).count();
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        started_unix_ms,
        wall_ms: started.elapsed().as_millis(),
        n_instances: results.len(),
        n_failed,
        workers: n_workers,
        seed_base,
        config,
        instance: results
            .iter()
            .map(|r| ManifestInstance {
                picture: r.picture.to_string(),
                sigma: r.sigma,
                seed: r.seed,
                epsilon: r.epsilon,
                status: r
                    .error
                    .clone()
                    .unwrap_or_else(|| "ok".into()),
                residual: r
                    .report
                    .as_ref()
                    .map(|rep| rep.residual_inf)
                    .unwrap_or(f64::NAN),
                wall_ms: r.wall_ms,
            })
            .collect(),
    };
    let manifest_text =
        toml::to_string_pretty(&manifest).context("cannot serialize manifest")?;
    std::fs::write(out_dir.join("manifest.toml"), manifest_text)?;

    Ok(RunSummary {
        n_instances: results.len(),
        n_failed,
        out_dir: out_dir.to_path_buf(),
    })
}

fn nearest_index(grid: &[f64], value: f64) -> usize {
    let mut best = 0;
    for (i, &g) in grid.iter().enumerate() {
        if (g.ln() - value.ln()).abs() < (grid[best].ln() - value.ln()).abs() {
            best = i;
        }
    }
    best
}

fn write_outputs(
    config: &SweepConfig,
    out_dir: &Path,
    grid: &[f64],
    results: &[InstanceResult],
    seed_base: u64,
) -> Result<()> {
    let chain = config.chain_spec();
    let bath = config.bath_spec();

    // ness.csv: one flat row per instance
    let header = [
        "picture",
        "sigma",
        "seed",
        "epsilon",
        "ear",
        "cooling",
        "balance_rel",
        "ear_fdr",
        "t_sys",
        "t_sys_closed",
        "d_eff",
        "d_lrt",
        "d_slrt",
        "d_bath",
        "residual_inf",
        "trace_err",
        "herm_err",
        "min_eig",
        "status",
    ];
    let mut rows = Vec::with_capacity(results.len());
    for r in results {
        let rep = r.report.as_ref();
        let g = |f: &dyn Fn(&NessReport) -> f64| rep.map(f).unwrap_or(f64::NAN);
        let (tr, he, me) = r.quantum_checks.unwrap_or((f64::NAN, f64::NAN, f64::NAN));
        rows.push(vec![
            r.picture.to_string(),
            fmt_f64(r.sigma),
            fmt_u64(r.seed),
            fmt_f64(r.epsilon),
            fmt_f64(g(&|x| x.ear)),
            fmt_f64(g(&|x| x.cooling)),
            fmt_f64(g(&|x| x.balance_rel)),
            fmt_f64(g(&|x| x.ear_fdr.unwrap_or(f64::NAN))),
            fmt_f64(g(&|x| x.t_sys)),
            fmt_f64(g(&|x| x.t_sys_closed)),
            fmt_f64(g(&|x| x.d_eff)),
            fmt_f64(g(&|x| x.d_lrt)),
            fmt_f64(g(&|x| x.d_slrt)),
            fmt_f64(g(&|x| x.d_bath)),
            fmt_f64(g(&|x| x.residual_inf)),
            fmt_f64(tr),
            fmt_f64(he),
            fmt_f64(me),
            r.error.clone().unwrap_or_else(|| "ok".into()),
        ]);
    }
    write_csv(&out_dir.join("ness.csv"), &header, &rows)?;

    // populations.csv for flagged instances
    let mut rows = Vec::new();
    for r in results {
        if let Some(p) = &r.populations {
            for (n, &pn) in p.iter().enumerate() {
                rows.push(vec![
                    r.picture.to_string(),
                    fmt_f64(r.sigma),
                    fmt_u64(r.seed),
                    fmt_f64(r.epsilon),
                    fmt_usize(n),
                    fmt_f64(chain.energy(n)),
                    fmt_f64(pn),
                ]);
            }
        }
    }
    write_csv(
        &out_dir.join("populations.csv"),
        &["picture", "sigma", "seed", "epsilon", "level", "energy", "population"],
        &rows,
    )?;

    // eigenbasis.csv for flagged quantum instances
    let mut rows = Vec::new();
    for r in results {
        if let Some(eb) = &r.eigenbasis {
            for (rr, &(e, w)) in eb.iter().enumerate() {
                rows.push(vec![
                    fmt_f64(r.sigma),
                    fmt_u64(r.seed),
                    fmt_f64(r.epsilon),
                    fmt_usize(rr),
                    fmt_f64(e),
                    fmt_f64(w),
                ]);
            }
        }
    }
    write_csv(
        &out_dir.join("eigenbasis.csv"),
        &["sigma", "seed", "epsilon", "r", "mean_energy", "weight"],
        &rows,
    )?;

    // aggregated per-figure datasets with a median-over-seeds column
    write_aggregate(
        out_dir,
        "ear_vs_eps.csv",
        "ear",
        results,
        |rep| rep.ear,
    )?;
    write_aggregate(
        out_dir,
        "tsys_vs_eps.csv",
        "t_sys",
        results,
        |rep| rep.t_sys,
    )?;

    // heatmap: median t_sys per (picture, sigma, epsilon)
    let mut rows = Vec::new();
    let mut pictures: Vec<Picture> = results.iter().map(|r| r.picture).collect();
    pictures.sort();
    pictures.dedup();
    for &picture in &pictures {
        for &sigma in &config.drive.sigma_list {
            for &eps in grid {
                let values: Vec<f64> = results
                    .iter()
                    .filter(|r| {
                        r.picture == picture && r.sigma == sigma && r.epsilon == eps
                    })
                    .filter_map(|r| r.report.as_ref().map(|rep| rep.t_sys))
                    .collect();
                rows.push(vec![
                    picture.to_string(),
                    fmt_f64(sigma),
                    fmt_f64(eps),
                    fmt_f64(ness_core::numeric::median(&values)),
                ]);
            }
        }
    }
    write_csv(
        &out_dir.join("tsys_heatmap.csv"),
        &["picture", "sigma", "epsilon", "t_sys_median"],
        &rows,
    )?;

    // crossover markers: drive amplitudes where the sampled mean and harmonic
    // mean of the couplings equal the bath rate
    let mut rows = Vec::new();
    for &sigma in &config.drive.sigma_list {
        for &seed in &config.drive.seeds {
            let seed = seed_base.wrapping_add(seed);
            let driving = DrivingSpec::new(1.0, sigma, seed)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            let c = sample_couplings(&chain, &driving).map_err(|e| anyhow::anyhow!("{e}"))?;
            let n = c.len() as f64;
            let mean = c.rates().iter().sum::<f64>() / n;
            let harm = n / c.rates().iter().map(|w| 1.0 / w).sum::<f64>();
            rows.push(vec![
                fmt_f64(sigma),
                fmt_u64(seed),
                fmt_f64((bath.w_beta() / mean).sqrt()),
                fmt_f64((bath.w_beta() / harm).sqrt()),
            ]);
        }
    }
    write_csv(
        &out_dir.join("crossovers.csv"),
        &["sigma", "seed", "eps_lrt", "eps_slrt"],
        &rows,
    )?;

    // saturation temperature per (sigma, seed) from the quantum scan
    let mut rows = Vec::new();
    if results.iter().any(|r| r.picture == Picture::Quantum) {
        for &sigma in &config.drive.sigma_list {
            let mut per_seed = Vec::new();
            for &seed in &config.drive.seeds {
                let seed = seed_base.wrapping_add(seed);
                let curve: Vec<(f64, f64)> = results
                    .iter()
                    .filter(|r| {
                        r.picture == Picture::Quantum && r.sigma == sigma && r.seed == seed
                    })
                    .filter_map(|r| r.report.as_ref().map(|rep| (r.epsilon, rep.t_sys)))
                    .collect();
                if curve.len() < 2 {
                    continue;
                }
                let t_inf = curve[curve.len() - 1].1;
                let t_prev = curve[curve.len() - 2].1;
                let converged = t_inf.is_finite() && ((t_inf - t_prev) / t_inf).abs() < 0.01;
                let driving = DrivingSpec::new(1.0, sigma, seed)
                    .map_err(|e| anyhow::anyhow!("{e}"))?;
                let c =
                    sample_couplings(&chain, &driving).map_err(|e| anyhow::anyhow!("{e}"))?;
                let v = build_perturbation_matrix(&chain, &c, &driving)
                    .map_err(|e| anyhow::anyhow!("{e}"))?;
                let (_, energies) = eigenbasis_mean_energies(&chain, &v);
                let span_r = energies.iter().cloned().fold(f64::MIN, f64::max)
                    - energies.iter().cloned().fold(f64::MAX, f64::min);
                let bound = if span_r > 0.0 {
                    chain.spectral_span() / span_r * bath.temperature_b()
                } else {
                    f64::INFINITY
                };
                per_seed.push((seed, t_inf, converged, bound, span_r));
            }
            let med = ness_core::numeric::median(
                &per_seed.iter().map(|x| x.1).collect::<Vec<_>>(),
            );
            for (seed, t_inf, converged, bound, span_r) in per_seed {
                rows.push(vec![
                    fmt_f64(sigma),
                    fmt_u64(seed),
                    fmt_f64(t_inf),
                    fmt_bool(converged),
                    fmt_f64(bound),
                    fmt_f64(span_r),
                    fmt_f64(med),
                ]);
            }
        }
    }
    write_csv(
        &out_dir.join("tinf_vs_sigma.csv"),
        &["sigma", "seed", "t_inf", "converged", "lower_bound", "span_r", "t_inf_median"],
        &rows,
    )?;

    Ok(())
}

fn write_aggregate(
    out_dir: &Path,
    name: &str,
    value_col: &str,
    results: &[InstanceResult],
    get: impl Fn(&NessReport) -> f64,
) -> Result<()> {
    let mut rows = Vec::new();
    for r in results {
        let Some(rep) = r.report.as_ref() else {
            continue;
        };
        // median across seeds at the same (picture, sigma, epsilon)
        let values: Vec<f64> = results
            .iter()
            .filter(|q| {
                q.picture == r.picture && q.sigma == r.sigma && q.epsilon == r.epsilon
            })
            .filter_map(|q| q.report.as_ref().map(&get))
            .collect();
        rows.push(vec![
            r.picture.to_string(),
            fmt_f64(r.sigma),
            fmt_u64(r.seed),
            fmt_f64(r.epsilon),
            fmt_f64(get(rep)),
            fmt_f64(ness_core::numeric::median(&values)),
        ]);
    }
    let median_col = format!("{value_col}_median");
    write_csv(
        &out_dir.join(name),
        &["picture", "sigma", "seed", "epsilon", value_col, &median_col],
        &rows,
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> SweepConfig {
        let mut c = SweepConfig::default();
        c.drive.epsilon_grid = vec![0.1, 1.0, 10.0];
        c.drive.sigma_list = vec![1.0];
        c.drive.seeds = vec![1, 2];
        c.outputs.detail_epsilons = vec![1.0];
        c
    }

    #[test]
    fn sweep_writes_complete_row_set() {
        let dir = tempfile::tempdir().unwrap();
        let config = tiny_config();
        let summary = run_sweep(&config, dir.path(), 2, 0).unwrap();
        assert_eq!(summary.n_instances, 2 * 1 * 2 * 3);
        assert_eq!(summary.n_failed, 0);
        let t = crate::table::Table::read(&dir.path().join("ness.csv")).unwrap();
        assert_eq!(t.rows.len(), 12);
        // every row resolves back to finite diagnostics
        for row in &t.rows {
            assert_eq!(t.str(row, "status").unwrap(), "ok");
            assert!(t.f64(row, "t_sys").unwrap().is_finite());
        }
        for name in [
            "populations.csv",
            "eigenbasis.csv",
            "ear_vs_eps.csv",
            "tsys_vs_eps.csv",
            "tsys_heatmap.csv",
            "tinf_vs_sigma.csv",
            "crossovers.csv",
            "manifest.toml",
        ] {
            assert!(dir.path().join(name).exists(), "{name} missing");
        }
        // detail file: 25 levels x 2 pictures x 2 seeds at the flagged epsilon
        let p = crate::table::Table::read(&dir.path().join("populations.csv")).unwrap();
        assert_eq!(p.rows.len(), 25 * 2 * 2);
    }

    #[test]
    fn reruns_are_byte_identical_across_worker_counts() {
        let dir1 = tempfile::tempdir().unwrap();
        let dir2 = tempfile::tempdir().unwrap();
        let config = tiny_config();
        run_sweep(&config, dir1.path(), 1, 0).unwrap();
        run_sweep(&config, dir2.path(), 4, 0).unwrap();
        for name in [
            "ness.csv",
            "populations.csv",
            "eigenbasis.csv",
            "ear_vs_eps.csv",
            "tsys_vs_eps.csv",
            "tsys_heatmap.csv",
            "tinf_vs_sigma.csv",
            "crossovers.csv",
        ] {
            let a = std::fs::read(dir1.path().join(name)).unwrap();
            let b = std::fs::read(dir2.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs across worker counts");
        }
    }

    #[test]
    fn seed_base_shifts_realizations() {
        let dir1 = tempfile::tempdir().unwrap();
        let dir2 = tempfile::tempdir().unwrap();
        let config = tiny_config();
        run_sweep(&config, dir1.path(), 2, 0).unwrap();
        run_sweep(&config, dir2.path(), 2, 1000).unwrap();
        let a = std::fs::read(dir1.path().join("ness.csv")).unwrap();
        let b = std::fs::read(dir2.path().join("ness.csv")).unwrap();
        assert_ne!(a, b);
    }
}
