//! Stochastic picture: the rate-equation generator, its steady state, and the
//! fluctuation-dissipation diagnostics (absorbed power, cooling rate,
//! microscopic and effective temperatures, diffusion coefficients).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{NessError, Result};
use crate::model::{BathSpec, ChainSpec, Couplings};
use crate::numeric::{dd_prod, Dd};

/// Relative balance checks divide by `max(|ear|, BALANCE_FLOOR)` so the
/// zero-driving limit does not produce 0/0.
pub const BALANCE_FLOOR: f64 = 1e-30;

/// The stochastic generator `W` for the nearest-neighbor chain.
///
/// Off-diagonal entries are transition rates (`w[(n, m)]` is the rate of
/// `m -> n`), the diagonal carries minus the column sums, so probability is
/// conserved under `dp/dt = W p`. Each link combines a symmetric driving rate
/// with directed bath rates whose up/down ratio is the Boltzmann factor.
#[derive(Clone, Debug)]
pub struct RateMatrix {
    matrix: DMatrix<f64>,
    chain: ChainSpec,
    bath: BathSpec,
    couplings: Couplings,
    /// Directed bath rate up each link (level k -> k+1).
    bath_up: Vec<f64>,
    /// Directed bath rate down each link (level k+1 -> k).
    bath_down: Vec<f64>,
}

impl RateMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn chain(&self) -> &ChainSpec {
        &self.chain
    }

    pub fn bath(&self) -> &BathSpec {
        &self.bath
    }

    pub fn couplings(&self) -> &Couplings {
        &self.couplings
    }

    pub fn bath_up(&self) -> &[f64] {
        &self.bath_up
    }

    pub fn bath_down(&self) -> &[f64] {
        &self.bath_down
    }

    /// Largest diagonal magnitude (the stiffest total escape rate).
    pub fn max_diagonal(&self) -> f64 {
        (0..self.chain.n_levels())
            .map(|n| self.matrix[(n, n)].abs())
            .fold(0.0, f64::max)
    }
}

/// Assemble the generator from the chain, bath, and sampled couplings.
pub fn build_rate_matrix(
    chain: &ChainSpec,
    bath: &BathSpec,
    couplings: &Couplings,
) -> Result<RateMatrix> {
    let n = chain.n_levels();
    let links = chain.n_links();
    if couplings.len() != links {
        return Err(NessError::dims(format!(
            "couplings carry {} rates but the chain has {links} links",
            couplings.len()
        )));
    }
    let mut bath_up = Vec::with_capacity(links);
    let mut bath_down = Vec::with_capacity(links);
    for k in 0..links {
        let de = chain.energy(k + 1) - chain.energy(k);
        bath_up.push(bath.rate(de));
        bath_down.push(bath.rate(-de));
    }
    let w = couplings.rates();
    let mut m = DMatrix::zeros(n, n);
    for k in 0..links {
        m[(k + 1, k)] = w[k] + bath_up[k]; // k -> k+1
        m[(k, k + 1)] = w[k] + bath_down[k]; // k+1 -> k
    }
    for j in 0..n {
        let mut out = 0.0;
        if j > 0 {
            out += m[(j - 1, j)];
        }
        if j + 1 < n {
            out += m[(j + 1, j)];
        }
        m[(j, j)] = -out;
    }
    Ok(RateMatrix {
        matrix: m,
        chain: chain.clone(),
        bath: *bath,
        couplings: couplings.clone(),
        bath_up,
        bath_down,
    })
}

/// Flat steady-state diagnostics attached to a solved NESS.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NessReport {
    /// Energy absorption rate from the populations.
    pub ear: f64,
    /// Cooling rate into the bath from the populations.
    pub cooling: f64,
    /// |ear - cooling| / max(|ear|, BALANCE_FLOOR).
    pub balance_rel: f64,
    /// Chain closed-form absorption rate from the couplings alone
    /// (stochastic picture only).
    pub ear_fdr: Option<f64>,
    /// Microscopic temperature of each transition (exact log form).
    pub micro_temps: Vec<f64>,
    /// Effective system temperature: population-weighted harmonic mean of the
    /// microscopic temperatures.
    pub t_sys: f64,
    /// Plain harmonic-mean effective temperature from the couplings alone.
    pub t_sys_closed: f64,
    /// Effective diffusion coefficient. Stochastic: resistor-network form
    /// from the couplings. Quantum: defined through `ear = d_eff / t_sys`.
    pub d_eff: f64,
    /// Linear-response (algebraic-mean) diffusion limit.
    pub d_lrt: f64,
    /// Semi-linear (harmonic-mean) diffusion limit.
    pub d_slrt: f64,
    /// Bath-induced diffusion coefficient.
    pub d_bath: f64,
    /// Max-norm residual of the steady-state equation.
    pub residual_inf: f64,
}

/// A solved stochastic steady state.
#[derive(Clone, Debug)]
pub struct StochasticNess {
    pub populations: DVector<f64>,
    pub report: NessReport,
}

// ---------------------------------------------------------------------------
// Steady-state solve with compensated refinement
// ---------------------------------------------------------------------------

/// Residual of the steady-state system, evaluated in double-double precision
/// against the exact column-sum generator (gain and loss reuse identical
/// products, so probability conservation holds exactly term by term).
///
/// Row 0 is the normalization constraint `sum(p) = 1`.
fn residual_dd(w: &RateMatrix, p: &[Dd]) -> Vec<Dd> {
    let n = p.len();
    let rates = w.couplings.rates();
    let mut r = vec![Dd::ZERO; n];
    let mut norm = Dd::from_f64(-1.0);
    for pn in p {
        norm = norm.add(*pn);
    }
    r[0] = norm.neg();
    for level in 1..n {
        let mut acc = Dd::ZERO;
        // inflow from below via link level-1, outflow down the same link
        let k = level - 1;
        acc = acc.add(p[k].mul_f64(rates[k]));
        acc = acc.add(p[k].mul_f64(w.bath_up[k]));
        acc = acc.sub(p[level].mul_f64(rates[k]));
        acc = acc.sub(p[level].mul_f64(w.bath_down[k]));
        // inflow from above via link `level`, outflow up the same link
        if level + 1 < n {
            let k = level;
            acc = acc.add(p[k + 1].mul_f64(rates[k]));
            acc = acc.add(p[k + 1].mul_f64(w.bath_down[k]));
            acc = acc.sub(p[level].mul_f64(rates[k]));
            acc = acc.sub(p[level].mul_f64(w.bath_up[k]));
        }
        r[level] = acc.neg();
    }
    r
}

/// Solve `W p = 0`, `sum(p) = 1` by a dense LU solve with the first row
/// replaced by the normalization constraint, followed by iterative refinement
/// with compensated residuals.
pub fn solve_ness(w: &RateMatrix) -> Result<StochasticNess> {
    let n = w.chain.n_levels();
    let mut a = w.matrix.clone();
    for j in 0..n {
        a[(0, j)] = 1.0;
    }
    let lu = a.lu();
    let mut rhs = DVector::zeros(n);
    rhs[0] = 1.0;
    let Some(p0) = lu.solve(&rhs) else {
        let null_dim = generator_null_dim(&w.matrix);
        return Err(NessError::DegenerateSteadyState { null_dim });
    };

    let mut p: Vec<Dd> = p0.iter().map(|&x| Dd::from_f64(x)).collect();
    for _ in 0..3 {
        let r = residual_dd(w, &p);
        let r_f64 = DVector::from_iterator(n, r.iter().map(|x| x.to_f64()));
        let Some(delta) = lu.solve(&r_f64) else {
            return Err(NessError::SolveFailed {
                context: "refinement solve failed".into(),
            });
        };
        for (pi, di) in p.iter_mut().zip(delta.iter()) {
            *pi = pi.add_f64(*di);
        }
    }

    let residual = residual_dd(w, &p);
    let residual_inf = residual
        .iter()
        .skip(1)
        .map(|r| r.to_f64().abs())
        .fold(0.0, f64::max);
    let scale = w.max_diagonal().max(1.0);
    if !residual_inf.is_finite() || residual_inf > 1e-12 * scale {
        let null_dim = generator_null_dim(&w.matrix);
        if null_dim != 1 {
            return Err(NessError::DegenerateSteadyState { null_dim });
        }
        return Err(NessError::SolveFailed {
            context: format!("residual {residual_inf:e} exceeds tolerance"),
        });
    }

    let populations = DVector::from_iterator(n, p.iter().map(|x| x.to_f64()));
    let report = build_report(w, &p, residual_inf)?;
    Ok(StochasticNess {
        populations,
        report,
    })
}

fn generator_null_dim(m: &DMatrix<f64>) -> usize {
    let svd = m.clone().svd(false, false);
    let smax = svd
        .singular_values
        .iter()
        .cloned()
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    svd.singular_values
        .iter()
        .filter(|s| **s <= 1e-12 * smax)
        .count()
}

fn build_report(w: &RateMatrix, p: &[Dd], residual_inf: f64) -> Result<NessReport> {
    let chain = &w.chain;
    let bath = &w.bath;
    let rates = w.couplings.rates();
    let links = chain.n_links();

    // Absorbed and dissipated power from the same compensated products that
    // define the solver residual; at a converged NESS they agree to the
    // residual level rather than to f64 round-off of the one-way flows.
    let mut ear_dd = Dd::ZERO;
    let mut cool_dd = Dd::ZERO;
    for k in 0..links {
        let de = chain.energy(k + 1) - chain.energy(k);
        let drive = p[k].mul_f64(rates[k]).sub(p[k + 1].mul_f64(rates[k]));
        ear_dd = ear_dd.add(drive.mul_f64(de));
        let bathflow = p[k + 1]
            .mul_f64(w.bath_down[k])
            .sub(p[k].mul_f64(w.bath_up[k]));
        cool_dd = cool_dd.add(bathflow.mul_f64(de));
    }
    let ear = ear_dd.to_f64();
    let cooling = cool_dd.to_f64();
    let balance_rel = ear_dd.sub(cool_dd).to_f64().abs() / ear.abs().max(BALANCE_FLOOR);

    // Microscopic temperatures from compensated population ratios: at strong
    // driving adjacent populations agree to ~1e-12 and the log of their ratio
    // would otherwise drown in representation noise.
    let mut micro_temps = Vec::with_capacity(links);
    let mut inv_t = Vec::with_capacity(links);
    for k in 0..links {
        let de = chain.energy(k + 1) - chain.energy(k);
        let ratio = p[k + 1].div(p[k]);
        if ratio.hi == 1.0 && ratio.lo == 0.0 {
            micro_temps.push(f64::INFINITY);
            inv_t.push(0.0);
        } else {
            let log_ratio = ratio.ln();
            micro_temps.push(-de / log_ratio);
            inv_t.push(-log_ratio / de);
        }
    }

    // Weighted harmonic mean with weights p_bar * w_beta * dE^2.
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..links {
        let de = chain.energy(k + 1) - chain.energy(k);
        let p_bar = 0.5 * (p[k].to_f64() + p[k + 1].to_f64());
        let weight = p_bar * bath.w_beta() * de * de;
        num += weight;
        den += weight * inv_t[k];
    }
    let t_sys = if den > 0.0 { num / den } else { f64::INFINITY };

    let diff = diffusion_coefficients(chain, bath, &w.couplings)?;
    let d_bath = bath.w_beta() * chain.delta0() * chain.delta0();

    Ok(NessReport {
        ear,
        cooling,
        balance_rel,
        ear_fdr: Some(ear_closed_form(chain, bath, &w.couplings)),
        micro_temps,
        t_sys,
        t_sys_closed: effective_temperature_closed_form(bath, &w.couplings),
        d_eff: diff.eff,
        d_lrt: diff.lrt,
        d_slrt: diff.slrt,
        d_bath,
        residual_inf,
    })
}

// ---------------------------------------------------------------------------
// Explicit time evolution (independent oracle for the steady state)
// ---------------------------------------------------------------------------

/// Integrate `dp/dt = W p` with classical fixed-step fourth-order Runge-Kutta.
///
/// Requires `dt * max|W_nn| < 0.1`; the zero mode is a fixed point of the
/// update polynomial, so the iteration converges onto the steady state
/// without secular drift, and the column-sum structure conserves `sum(p)`
/// to round-off.
pub fn evolve(w: &RateMatrix, p0: &DVector<f64>, t: f64, dt: f64) -> Result<DVector<f64>> {
    let n = w.chain.n_levels();
    if p0.len() != n {
        return Err(NessError::dims(format!(
            "initial state has {} entries, chain has {n} levels",
            p0.len()
        )));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(NessError::invalid("t", "must be finite and nonnegative"));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(NessError::invalid("dt", "must be finite and positive"));
    }
    let stiffest = w.max_diagonal();
    if dt * stiffest >= 0.1 {
        return Err(NessError::Stiffness {
            dt,
            suggested_dt: 0.05 / stiffest,
        });
    }
    if t == 0.0 {
        return Ok(p0.clone());
    }
    let m = w.matrix();
    let mut p = p0.clone();
    let mut remaining = t;
    let mut k1 = DVector::zeros(n);
    let mut k2 = DVector::zeros(n);
    let mut k3 = DVector::zeros(n);
    let mut k4 = DVector::zeros(n);
    let mut tmp = DVector::zeros(n);
    while remaining > 0.0 {
        let h = dt.min(remaining);
        k1.gemv(1.0, m, &p, 0.0);
        tmp.copy_from(&p);
        tmp.axpy(0.5 * h, &k1, 1.0);
        k2.gemv(1.0, m, &tmp, 0.0);
        tmp.copy_from(&p);
        tmp.axpy(0.5 * h, &k2, 1.0);
        k3.gemv(1.0, m, &tmp, 0.0);
        tmp.copy_from(&p);
        tmp.axpy(h, &k3, 1.0);
        k4.gemv(1.0, m, &tmp, 0.0);
        p.axpy(h / 6.0, &k1, 1.0);
        p.axpy(h / 3.0, &k2, 1.0);
        p.axpy(h / 3.0, &k3, 1.0);
        p.axpy(h / 6.0, &k4, 1.0);
        remaining -= h;
    }
    Ok(p)
}

// ---------------------------------------------------------------------------
// Flow diagnostics on plain f64 populations
// ---------------------------------------------------------------------------

/// Energy absorption rate `sum_{n,m} (E_n - E_m) w^eps_{nm} p_m` over the
/// nearest-neighbor band (each ordered pair once).
pub fn ear(chain: &ChainSpec, couplings: &Couplings, p: &DVector<f64>) -> f64 {
    let mut acc = Dd::ZERO;
    for (k, &w) in couplings.rates().iter().enumerate() {
        let de = chain.energy(k + 1) - chain.energy(k);
        let term = dd_prod(w, p[k]).sub(dd_prod(w, p[k + 1])).mul_f64(de);
        acc = acc.add(term);
    }
    acc.to_f64()
}

/// Cooling rate `-sum_{n,m} (E_n - E_m) w^beta_{nm} p_m` with the directed
/// bath rates of the generator.
pub fn cooling_rate(chain: &ChainSpec, bath: &BathSpec, p: &DVector<f64>) -> f64 {
    let mut acc = Dd::ZERO;
    for k in 0..chain.n_links() {
        let de = chain.energy(k + 1) - chain.energy(k);
        let down = bath.rate(-de);
        let up = bath.rate(de);
        let term = dd_prod(down, p[k + 1]).sub(dd_prod(up, p[k])).mul_f64(de);
        acc = acc.add(term);
    }
    acc.to_f64()
}

/// Microscopic temperature of each transition from the populations:
/// `T_k = -(E_{k+1} - E_k) / ln(p_{k+1} / p_k)`.
///
/// Equal adjacent populations map to `+inf` (an infinite-temperature
/// transition, reached at strong driving), inverted ones to a negative value.
pub fn micro_temperatures(chain: &ChainSpec, p: &DVector<f64>) -> Vec<f64> {
    (0..chain.n_links())
        .map(|k| {
            let de = chain.energy(k + 1) - chain.energy(k);
            let ratio = p[k + 1] / p[k];
            if ratio == 1.0 {
                f64::INFINITY
            } else {
                -de / ratio.ln()
            }
        })
        .collect()
}

/// High-temperature closed form of the microscopic temperatures:
/// `T_k = (w_k + w_beta) / w_beta * T_B`, accurate for spacing much smaller
/// than the bath temperature.
pub fn micro_temperatures_closed_form(bath: &BathSpec, couplings: &Couplings) -> Vec<f64> {
    couplings
        .rates()
        .iter()
        .map(|w| (w + bath.w_beta()) / bath.w_beta() * bath.temperature_b())
        .collect()
}

/// Weighted harmonic mean of positive values; weights must be nonnegative.
/// Infinite values contribute zero to the mean of inverses.
pub fn weighted_harmonic_mean(values: &[f64], weights: &[f64]) -> f64 {
    assert_eq!(values.len(), weights.len());
    let mut num = 0.0;
    let mut den = 0.0;
    for (v, w) in values.iter().zip(weights) {
        num += w;
        den += if v.is_infinite() { 0.0 } else { w / v };
    }
    if den > 0.0 {
        num / den
    } else {
        f64::INFINITY
    }
}

/// Effective NESS temperature: harmonic mean of the microscopic temperatures
/// weighted by `p_bar * w_beta * dE^2`, the combination that makes the
/// linearized cooling rate read `D_B/T_B - D_B/T_sys`.
pub fn effective_temperature(chain: &ChainSpec, bath: &BathSpec, p: &DVector<f64>) -> f64 {
    let temps = micro_temperatures(chain, p);
    let weights: Vec<f64> = (0..chain.n_links())
        .map(|k| {
            let de = chain.energy(k + 1) - chain.energy(k);
            0.5 * (p[k] + p[k + 1]) * bath.w_beta() * de * de
        })
        .collect();
    weighted_harmonic_mean(&temps, &weights)
}

/// Unweighted closed-form effective temperature from the couplings alone:
/// `T_sys = T_B / mean(w_beta / (w_beta + w_n))`.
pub fn effective_temperature_closed_form(bath: &BathSpec, couplings: &Couplings) -> f64 {
    let wb = bath.w_beta();
    let mean: f64 = couplings
        .rates()
        .iter()
        .map(|w| wb / (wb + w))
        .sum::<f64>()
        / couplings.len() as f64;
    if mean > 0.0 {
        bath.temperature_b() / mean
    } else {
        f64::INFINITY
    }
}

/// The three diffusion coefficients of the chain.
#[derive(Clone, Copy, Debug)]
pub struct DiffusionCoefficients {
    /// Effective coefficient interpolating between the two limits.
    pub eff: f64,
    /// Linear-response limit: algebraic mean of the couplings.
    pub lrt: f64,
    /// Semi-linear limit: harmonic mean of the couplings (series resistors).
    pub slrt: f64,
}

/// Resistor-network diffusion coefficients:
/// `d_eff = mean(w/(wb+w)) / mean(1/(wb+w)) * delta0^2`,
/// `d_lrt = mean(w) * delta0^2`, `d_slrt = 1/mean(1/w) * delta0^2`.
pub fn diffusion_coefficients(
    chain: &ChainSpec,
    bath: &BathSpec,
    couplings: &Couplings,
) -> Result<DiffusionCoefficients> {
    let wb = bath.w_beta();
    let rates = couplings.rates();
    let has_zero = rates.iter().any(|w| *w == 0.0);
    if wb == 0.0 && has_zero {
        return Err(NessError::DegenerateNetwork);
    }
    let d0sq = chain.delta0() * chain.delta0();
    let n = rates.len() as f64;
    let lrt = rates.iter().sum::<f64>() / n * d0sq;
    let slrt = if has_zero {
        0.0
    } else {
        n / rates.iter().map(|w| 1.0 / w).sum::<f64>() * d0sq
    };
    let m1 = rates.iter().map(|w| w / (wb + w)).sum::<f64>() / n;
    let m2 = rates.iter().map(|w| 1.0 / (wb + w)).sum::<f64>() / n;
    let eff = m1 / m2 * d0sq;
    Ok(DiffusionCoefficients { eff, lrt, slrt })
}

/// Chain closed-form absorption rate `mean(w/(wb+w)) * D_B / T_B`, equal to
/// `d_eff / t_sys_closed` as an algebraic identity.
pub fn ear_closed_form(chain: &ChainSpec, bath: &BathSpec, couplings: &Couplings) -> f64 {
    let wb = bath.w_beta();
    let mean: f64 = couplings
        .rates()
        .iter()
        .map(|w| w / (wb + w))
        .sum::<f64>()
        / couplings.len() as f64;
    let d_bath = wb * chain.delta0() * chain.delta0();
    mean * d_bath / bath.temperature_b()
}

/// Linear-response diffusion with state-weighted averaging:
/// `sum_k p_bar_k w_k dE^k^2` (canonical averaging over the initial state).
pub fn lrt_diffusion_weighted(chain: &ChainSpec, couplings: &Couplings, p: &DVector<f64>) -> f64 {
    couplings
        .rates()
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let de = chain.energy(k + 1) - chain.energy(k);
            0.5 * (p[k] + p[k + 1]) * w * de * de
        })
        .sum()
}

/// Linearized high-temperature forms of the two energy flows compared with
/// the exact sums.
#[derive(Clone, Debug)]
pub struct HighTemperatureCheck {
    pub q_dot_exact: f64,
    pub q_dot_linearized: f64,
    pub w_dot_exact: f64,
    pub w_dot_linearized: f64,
    pub q_rel_dev: f64,
    pub w_rel_dev: f64,
    pub d_lrt_weighted: f64,
}

/// Evaluate the tanh-linearized flow expressions (valid for spacing much
/// smaller than all temperatures) and report their relative deviation from
/// the exact flows.
pub fn high_temperature_cross_check(
    chain: &ChainSpec,
    bath: &BathSpec,
    couplings: &Couplings,
    p: &DVector<f64>,
) -> HighTemperatureCheck {
    let temps = micro_temperatures(chain, p);
    let tb = bath.temperature_b();
    let mut q_lin = 0.0;
    let mut w_lin = 0.0;
    for k in 0..chain.n_links() {
        let de = chain.energy(k + 1) - chain.energy(k);
        let p_bar = 0.5 * (p[k] + p[k + 1]);
        let inv_t = if temps[k].is_infinite() {
            0.0
        } else {
            1.0 / temps[k]
        };
        q_lin += p_bar * bath.w_beta() * de * de * (1.0 / tb - inv_t);
        w_lin += p_bar * couplings.rates()[k] * de * de * inv_t;
    }
    let q_exact = cooling_rate(chain, bath, p);
    let w_exact = ear(chain, couplings, p);
    HighTemperatureCheck {
        q_dot_exact: q_exact,
        q_dot_linearized: q_lin,
        w_dot_exact: w_exact,
        w_dot_linearized: w_lin,
        q_rel_dev: (q_lin - q_exact).abs() / q_exact.abs().max(BALANCE_FLOOR),
        w_rel_dev: (w_lin - w_exact).abs() / w_exact.abs().max(BALANCE_FLOOR),
        d_lrt_weighted: lrt_diffusion_weighted(chain, couplings, p),
    }
}
