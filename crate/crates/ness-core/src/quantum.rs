//! Quantum picture: the master-equation superoperator on the vectorized
//! density matrix, its steady state, and the eigenbasis analysis behind the
//! finite saturation temperature of a driven sparse system.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{NessError, Result};
use crate::model::{BathSpec, ChainSpec, Couplings, DrivingSpec};
use crate::numeric::Dd;
use crate::stochastic::{
    cooling_rate, diffusion_coefficients, effective_temperature,
    effective_temperature_closed_form, micro_temperatures, NessReport,
};

type CMatrix = DMatrix<Complex64>;

/// The master-equation generator as a dense matrix on the vectorized density
/// matrix, in the block layout (populations; ordered coherences).
///
/// Index `n < N` addresses the population `rho_nn`; index `N + c` addresses
/// the coherence `rho_{nu mu}` for the `c`-th ordered pair `(nu, mu)`,
/// `nu != mu`, enumerated row-major. The generator is built by applying the
/// three terms of the equation of motion (Hamiltonian commutator, double
/// commutator of the drive, bath action) to every basis matrix; the printed
/// block formulas are used as cross-checks, not as the construction.
#[derive(Clone, Debug)]
pub struct Superoperator {
    n_levels: usize,
    matrix: CMatrix,
    pairs: Vec<(usize, usize)>,
    pair_slot: Vec<usize>,
    chain: ChainSpec,
    bath: BathSpec,
    driving: DrivingSpec,
    v: DMatrix<f64>,
    v_c: CMatrix,
    v2_c: CMatrix,
}

fn lift_complex(v: &DMatrix<f64>) -> CMatrix {
    CMatrix::from_iterator(
        v.nrows(),
        v.ncols(),
        v.iter().map(|&x| Complex64::new(x, 0.0)),
    )
}

/// Apply the generator to a density matrix:
/// `drho = -i [H0, rho] - (eps^2 / 2) [V, [V, rho]] + bath(rho)`,
/// where the bath moves populations with the detailed-balance rates and
/// decays every coherence at the uniform rate `gamma_beta`.
fn apply_terms(
    chain: &ChainSpec,
    bath: &BathSpec,
    v_c: &CMatrix,
    v2_c: &CMatrix,
    eps2: f64,
    rho: &CMatrix,
) -> CMatrix {
    let n = chain.n_levels();
    // driving: eps^2 V rho V - (eps^2 / 2)(V^2 rho + rho V^2)
    let vrv = v_c * rho * v_c;
    let v2r = v2_c * rho;
    let rv2 = rho * v2_c;
    let mut out = vrv * Complex64::new(eps2, 0.0)
        + (v2r + rv2) * Complex64::new(-0.5 * eps2, 0.0);
    // Hamiltonian commutator: H0 is diagonal, so it acts elementwise.
    for a in 0..n {
        for b in 0..n {
            let de = chain.energy(a) - chain.energy(b);
            out[(a, b)] += Complex64::new(0.0, -de) * rho[(a, b)];
        }
    }
    // bath: population transport on the nearest-neighbor band
    for k in 0..chain.n_links() {
        let de = chain.energy(k + 1) - chain.energy(k);
        let up = bath.rate(de);
        let down = bath.rate(-de);
        let flow_up = rho[(k, k)] * up;
        let flow_down = rho[(k + 1, k + 1)] * down;
        out[(k + 1, k + 1)] += flow_up - flow_down;
        out[(k, k)] += flow_down - flow_up;
    }
    // bath: uniform dephasing of every coherence
    let gamma_beta = bath.gamma_beta();
    for a in 0..n {
        for b in 0..n {
            if a != b {
                out[(a, b)] -= Complex64::new(gamma_beta, 0.0) * rho[(a, b)];
            }
        }
    }
    out
}

/// Apply the master-equation generator to an arbitrary density matrix.
pub fn apply_generator(
    chain: &ChainSpec,
    bath: &BathSpec,
    v: &DMatrix<f64>,
    driving: &DrivingSpec,
    rho: &CMatrix,
) -> CMatrix {
    let v_c = lift_complex(v);
    let v2_c = &v_c * &v_c;
    let eps2 = driving.epsilon() * driving.epsilon();
    apply_terms(chain, bath, &v_c, &v2_c, eps2, rho)
}

/// Assemble the superoperator by applying the generator to every basis matrix.
pub fn build_superoperator(
    chain: &ChainSpec,
    bath: &BathSpec,
    v: &DMatrix<f64>,
    driving: &DrivingSpec,
) -> Result<Superoperator> {
    let n = chain.n_levels();
    if v.nrows() != n || v.ncols() != n {
        return Err(NessError::dims(format!(
            "perturbation matrix is {}x{}, chain has {n} levels",
            v.nrows(),
            v.ncols()
        )));
    }
    let asym = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (v[(i, j)] - v[(j, i)]).abs())
        .fold(0.0f64, f64::max);
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    if asym > 1e-12 * scale {
        return Err(NessError::invalid(
            "v",
            format!("must be symmetric; max asymmetry {asym:e}"),
        ));
    }

    let mut pairs = Vec::with_capacity(n * n - n);
    let mut pair_slot = vec![usize::MAX; n * n];
    for nu in 0..n {
        for mu in 0..n {
            if nu != mu {
                pair_slot[nu * n + mu] = n + pairs.len();
                pairs.push((nu, mu));
            }
        }
    }

    let v_c = lift_complex(v);
    let v2_c = &v_c * &v_c;
    let eps2 = driving.epsilon() * driving.epsilon();
    let dim = n * n;
    let mut matrix = CMatrix::zeros(dim, dim);
    let mut basis = CMatrix::zeros(n, n);
    let slot_of = |a: usize, b: usize| if a == b { a } else { pair_slot[a * n + b] };
    for col in 0..dim {
        let (k, l) = if col < n {
            (col, col)
        } else {
            pairs[col - n]
        };
        basis[(k, l)] = Complex64::new(1.0, 0.0);
        let image = apply_terms(chain, bath, &v_c, &v2_c, eps2, &basis);
        basis[(k, l)] = Complex64::new(0.0, 0.0);
        for a in 0..n {
            for b in 0..n {
                matrix[(slot_of(a, b), col)] = image[(a, b)];
            }
        }
    }

    Ok(Superoperator {
        n_levels: n,
        matrix,
        pairs,
        pair_slot,
        chain: chain.clone(),
        bath: *bath,
        driving: *driving,
        v: v.clone(),
        v_c,
        v2_c,
    })
}

impl Superoperator {
    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    pub fn dim(&self) -> usize {
        self.n_levels * self.n_levels
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn chain(&self) -> &ChainSpec {
        &self.chain
    }

    pub fn bath(&self) -> &BathSpec {
        &self.bath
    }

    pub fn driving(&self) -> &DrivingSpec {
        &self.driving
    }

    pub fn perturbation(&self) -> &DMatrix<f64> {
        &self.v
    }

    /// Ordered coherence pairs, in slot order.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Vector-slot index of the coherence `(nu, mu)`, `nu != mu`.
    pub fn coherence_slot(&self, nu: usize, mu: usize) -> usize {
        let slot = self.pair_slot[nu * self.n_levels + mu];
        assert_ne!(slot, usize::MAX, "diagonal entries are population slots");
        slot
    }

    /// Population block: the stochastic generator with `w = eps^2 |V|^2`.
    pub fn population_block(&self) -> CMatrix {
        self.matrix.view((0, 0), (self.n_levels, self.n_levels)).into()
    }

    /// Coherence-to-population block.
    pub fn lambda(&self) -> CMatrix {
        let n = self.n_levels;
        let d = self.dim();
        self.matrix.view((0, n), (n, d - n)).into()
    }

    /// Population-to-coherence block.
    pub fn lambda_dagger(&self) -> CMatrix {
        let n = self.n_levels;
        let d = self.dim();
        self.matrix.view((n, 0), (d - n, n)).into()
    }

    /// Coherence-to-coherence block.
    pub fn coherence_block(&self) -> CMatrix {
        let n = self.n_levels;
        let d = self.dim();
        self.matrix.view((n, n), (d - n, d - n)).into()
    }

    /// Largest entry magnitude, the scale used by residual tolerances.
    pub fn norm_scale(&self) -> f64 {
        self.matrix.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    /// Apply the generator to a density matrix (matrix-free).
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let eps2 = self.driving.epsilon() * self.driving.epsilon();
        apply_terms(&self.chain, &self.bath, &self.v_c, &self.v2_c, eps2, rho)
    }

    /// Max-norm of the generator applied to `rho`.
    pub fn residual_inf(&self, rho: &DensityMatrix) -> f64 {
        self.apply(rho.matrix())
            .iter()
            .fold(0.0f64, |m, z| m.max(z.norm()))
    }

    /// Real representation of the generator restricted to Hermitian matrices,
    /// in the coordinates (populations; Re/Im of each upper coherence).
    ///
    /// Columns are exact linear combinations of the stored complex columns,
    /// so this is the same operator, not a reconstruction.
    fn hermitian_split(&self) -> DMatrix<f64> {
        let n = self.n_levels;
        let dim = self.dim();
        let uppers: Vec<(usize, usize)> = (0..n)
            .flat_map(|nu| ((nu + 1)..n).map(move |mu| (nu, mu)))
            .collect();
        let mut m = DMatrix::zeros(dim, dim);
        let mut y = DVector::<Complex64>::zeros(dim);
        for col in 0..dim {
            // image of the col-th Hermitian basis matrix
            if col < n {
                y.copy_from(&self.matrix.column(col));
            } else {
                let q = (col - n) / 2;
                let (nu, mu) = uppers[q];
                let c_up = self.coherence_slot(nu, mu);
                let c_dn = self.coherence_slot(mu, nu);
                if (col - n) % 2 == 0 {
                    // E_{nu mu} + E_{mu nu}
                    for r in 0..dim {
                        y[r] = self.matrix[(r, c_up)] + self.matrix[(r, c_dn)];
                    }
                } else {
                    // i (E_{nu mu} - E_{mu nu})
                    let i = Complex64::new(0.0, 1.0);
                    for r in 0..dim {
                        y[r] = i * (self.matrix[(r, c_up)] - self.matrix[(r, c_dn)]);
                    }
                }
            }
            for r in 0..n {
                m[(r, col)] = y[r].re;
            }
            for (q, &(nu, mu)) in uppers.iter().enumerate() {
                let a = y[self.coherence_slot(nu, mu)];
                m[(n + 2 * q, col)] = a.re;
                m[(n + 2 * q + 1, col)] = a.im;
            }
        }
        m
    }
}

/// A density matrix with the validity checks used across the solvers.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    rho: CMatrix,
}

impl DensityMatrix {
    pub fn new(rho: CMatrix) -> Result<Self> {
        if rho.nrows() != rho.ncols() {
            return Err(NessError::dims("density matrix must be square"));
        }
        Ok(DensityMatrix { rho })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    /// Diagonal populations (real parts).
    pub fn populations(&self) -> DVector<f64> {
        DVector::from_iterator(self.dim(), (0..self.dim()).map(|n| self.rho[(n, n)].re))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|n| self.rho[(n, n)]).sum()
    }

    pub fn trace_error(&self) -> f64 {
        (self.trace() - Complex64::new(1.0, 0.0)).norm()
    }

    /// Max-norm of `rho - rho^dagger`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut err = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                err = err.max((self.rho[(a, b)] - self.rho[(b, a)].conj()).norm());
            }
        }
        err
    }

    /// Smallest eigenvalue, from the real symmetric embedding
    /// `[[Re, -Im], [Im, Re]]` whose spectrum doubles the Hermitian one.
    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.dim();
        let mut s = DMatrix::zeros(2 * n, 2 * n);
        for a in 0..n {
            for b in 0..n {
                let z = self.rho[(a, b)];
                s[(a, b)] = z.re;
                s[(a, n + b)] = -z.im;
                s[(n + a, b)] = z.im;
                s[(n + a, n + b)] = z.re;
            }
        }
        let eig = s.symmetric_eigen();
        eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Solve the steady state of the superoperator: the trace-one null vector.
///
/// The solve runs in the Hermitian real representation (the physical state
/// space), with one row replaced by the trace constraint, followed by
/// compensated-residual refinement to undo the conditioning loss at extreme
/// drive amplitudes. A singular-vector extraction handles the cases the
/// direct solve cannot.
pub fn solve_quantum_ness(s: &Superoperator) -> Result<DensityMatrix> {
    let n = s.n_levels;
    let dim = s.dim();
    let m = s.hermitian_split();
    let scale = m.iter().fold(0.0f64, |acc, x| acc.max(x.abs())).max(1e-300);
    let mut a = &m / scale;
    for j in 0..dim {
        a[(0, j)] = if j < n { 1.0 } else { 0.0 };
    }
    let mut rhs = DVector::zeros(dim);
    rhs[0] = 1.0;

    let lu = a.clone().lu();
    let x = match lu.solve(&rhs) {
        Some(x0) => {
            let mut x: Vec<Dd> = x0.iter().map(|&v| Dd::from_f64(v)).collect();
            for _ in 0..2 {
                let mut r = DVector::zeros(dim);
                for i in 0..dim {
                    let mut acc = if i == 0 {
                        Dd::from_f64(1.0)
                    } else {
                        Dd::ZERO
                    };
                    for j in 0..dim {
                        let aij = a[(i, j)];
                        if aij != 0.0 {
                            acc = acc.sub(x[j].mul_f64(aij));
                        }
                    }
                    r[i] = acc.to_f64();
                }
                match lu.solve(&r) {
                    Some(delta) => {
                        for (xi, di) in x.iter_mut().zip(delta.iter()) {
                            *xi = xi.add_f64(*di);
                        }
                    }
                    None => break,
                }
            }
            Some(DVector::from_iterator(dim, x.iter().map(|v| v.to_f64())))
        }
        None => None,
    };

    let tol = 1e-10 * s.norm_scale();
    if let Some(x) = x {
        let rho = split_to_density(n, &x);
        if s.residual_inf(&rho) <= tol {
            return Ok(rho);
        }
    }

    // Fallback: smallest singular vector of the split generator.
    let svd = m.svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0f64, f64::max).max(1e-300);
    let null_dim = sv.iter().filter(|x| **x <= 1e-12 * smax).count();
    if null_dim != 1 {
        return Err(NessError::DegenerateSteadyState { null_dim });
    }
    let idx = (0..sv.len())
        .min_by(|&i, &j| sv[i].partial_cmp(&sv[j]).unwrap())
        .unwrap();
    let v_t = svd.v_t.as_ref().ok_or_else(|| NessError::SolveFailed {
        context: "SVD did not return right singular vectors".into(),
    })?;
    let null: DVector<f64> = v_t.row(idx).transpose();
    let trace: f64 = (0..n).map(|k| null[k]).sum();
    if trace.abs() < 1e-10 {
        return Err(NessError::SolveFailed {
            context: "null vector carries no trace".into(),
        });
    }
    let x = null / trace;
    let rho = split_to_density(n, &x);
    let res = s.residual_inf(&rho);
    if res > tol {
        return Err(NessError::SolveFailed {
            context: format!("residual {res:e} exceeds tolerance {tol:e}"),
        });
    }
    Ok(rho)
}

fn split_to_density(n: usize, x: &DVector<f64>) -> DensityMatrix {
    let mut rho = CMatrix::zeros(n, n);
    for k in 0..n {
        rho[(k, k)] = Complex64::new(x[k], 0.0);
    }
    let mut q = 0;
    for nu in 0..n {
        for mu in (nu + 1)..n {
            let re = x[n + 2 * q];
            let im = x[n + 2 * q + 1];
            rho[(nu, mu)] = Complex64::new(re, im);
            rho[(mu, nu)] = Complex64::new(re, -im);
            q += 1;
        }
    }
    DensityMatrix { rho }
}

/// Recover the per-link driving rates `w_k = eps^2 |V_{k,k+1}|^2` from the
/// perturbation matrix.
pub fn couplings_from_perturbation(
    chain: &ChainSpec,
    v: &DMatrix<f64>,
    driving: &DrivingSpec,
) -> Result<Couplings> {
    let eps2 = driving.epsilon() * driving.epsilon();
    let rates = (0..chain.n_links())
        .map(|k| eps2 * v[(k, k + 1)] * v[(k, k + 1)])
        .collect();
    Couplings::from_rates(rates, *driving)
}

/// Diagnostics of a quantum steady state, on the shared report layout.
///
/// The absorbed power is defined through the cooling rate (they balance at a
/// steady state), and the effective diffusion through `ear = d_eff / t_sys`.
pub fn quantum_ness_report(
    chain: &ChainSpec,
    bath: &BathSpec,
    v: &DMatrix<f64>,
    driving: &DrivingSpec,
    rho: &DensityMatrix,
) -> Result<NessReport> {
    let p = rho.populations();
    let cooling = cooling_rate(chain, bath, &p);
    let ear = cooling;
    let micro_temps = micro_temperatures(chain, &p);
    let t_sys = effective_temperature(chain, bath, &p);
    let couplings = couplings_from_perturbation(chain, v, driving)?;
    let diff = diffusion_coefficients(chain, bath, &couplings)?;
    let d_bath = bath.w_beta() * chain.delta0() * chain.delta0();
    let residual_inf = apply_generator(chain, bath, v, driving, rho.matrix())
        .iter()
        .fold(0.0f64, |m, z| m.max(z.norm()));
    Ok(NessReport {
        ear,
        cooling,
        balance_rel: 0.0,
        ear_fdr: None,
        micro_temps,
        t_sys,
        t_sys_closed: effective_temperature_closed_form(bath, &couplings),
        d_eff: if t_sys.is_finite() { ear * t_sys } else { f64::NAN },
        d_lrt: diff.lrt,
        d_slrt: diff.slrt,
        d_bath,
        residual_inf,
    })
}

/// Decomposition of a state over the eigenbasis of the perturbation matrix.
#[derive(Clone, Debug)]
pub struct EigenbasisAnalysis {
    /// Eigenvectors of `V`, one per column, sorted by mean energy.
    pub eigvecs: DMatrix<f64>,
    /// Mean energy of each eigenvector.
    pub mean_energies: Vec<f64>,
    /// Occupation of each eigenvector in the given state.
    pub weights: Vec<f64>,
    /// Mixture temperature from a weighted fit of `ln p_r` against the mean
    /// energies; `None` when the energies are quasi-degenerate.
    pub t_mix: Option<f64>,
    /// Spread of the mean energies.
    pub spectral_span_r: f64,
}

/// Mean energies of the eigenvectors of `V` (state independent).
pub fn eigenbasis_mean_energies(chain: &ChainSpec, v: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let eig = v.clone().symmetric_eigen();
    let n = chain.n_levels();
    let mut vecs = eig.eigenvectors;
    // Deterministic sign: largest-magnitude component positive.
    for mut col in vecs.column_iter_mut() {
        let mut imax = 0;
        for i in 1..n {
            if col[i].abs() > col[imax].abs() {
                imax = i;
            }
        }
        if col[imax] < 0.0 {
            col.neg_mut();
        }
    }
    let mut energies: Vec<f64> = (0..n)
        .map(|r| {
            (0..n)
                .map(|i| vecs[(i, r)] * vecs[(i, r)] * chain.energy(i))
                .sum()
        })
        .collect();
    // Sort columns by mean energy.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| energies[a].partial_cmp(&energies[b]).unwrap());
    let sorted = DMatrix::from_fn(n, n, |i, r| vecs[(i, order[r])]);
    energies = order.iter().map(|&r| energies[r]).collect();
    (sorted, energies)
}

/// Diagonalize `V` and decompose the state over its eigenbasis.
pub fn eigenbasis_analysis(
    chain: &ChainSpec,
    v: &DMatrix<f64>,
    rho: &DensityMatrix,
) -> Result<EigenbasisAnalysis> {
    let n = chain.n_levels();
    if v.nrows() != n || rho.dim() != n {
        return Err(NessError::dims(
            "perturbation and state must match the chain",
        ));
    }
    let (eigvecs, mean_energies) = eigenbasis_mean_energies(chain, v);
    let weights: Vec<f64> = (0..n)
        .map(|r| {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    acc += Complex64::new(eigvecs[(i, r)] * eigvecs[(j, r)], 0.0)
                        * rho.matrix()[(i, j)];
                }
            }
            acc.re
        })
        .collect();
    let e_max = mean_energies.iter().cloned().fold(f64::MIN, f64::max);
    let e_min = mean_energies.iter().cloned().fold(f64::MAX, f64::min);
    let span = e_max - e_min;
    let t_mix = if span < 1e-9 * chain.spectral_span() {
        None
    } else {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut ws = Vec::new();
        for r in 0..n {
            if weights[r] > 1e-12 {
                xs.push(mean_energies[r]);
                ys.push(weights[r].ln());
                ws.push(weights[r]);
            }
        }
        crate::numeric::weighted_line_fit(&xs, &ys, &ws)
            .map(|(_, slope)| -1.0 / slope)
            .filter(|t| t.is_finite())
    };
    Ok(EigenbasisAnalysis {
        eigvecs,
        mean_energies,
        weights,
        t_mix,
        spectral_span_r: span,
    })
}

/// Saturation of the effective temperature along a drive scan.
#[derive(Clone, Debug)]
pub struct SaturationTemperature {
    /// Effective temperature at the largest drive amplitude.
    pub estimate: f64,
    /// `spectral_span(E_n) / spectral_span(E_r) * T_B`.
    pub lower_bound: f64,
    /// Whether the last two scan points agree within one percent.
    pub converged: bool,
    /// Spread of the eigenvector mean energies.
    pub spectral_span_r: f64,
    /// The scanned `(epsilon, t_sys)` curve.
    pub curve: Vec<(f64, f64)>,
}

/// Scan the quantum steady state over a grid of drive amplitudes and estimate
/// the saturation temperature together with its localization lower bound.
pub fn saturation_temperature(
    chain: &ChainSpec,
    bath: &BathSpec,
    v: &DMatrix<f64>,
    driving: &DrivingSpec,
    epsilon_grid: &[f64],
) -> Result<SaturationTemperature> {
    if epsilon_grid.len() < 2 {
        return Err(NessError::invalid(
            "epsilon_grid",
            "need at least two drive amplitudes",
        ));
    }
    if epsilon_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(NessError::invalid(
            "epsilon_grid",
            "must be strictly increasing",
        ));
    }
    let mut curve = Vec::with_capacity(epsilon_grid.len());
    for &eps in epsilon_grid {
        let d = driving.with_epsilon(eps)?;
        let sup = build_superoperator(chain, bath, v, &d)?;
        let rho = solve_quantum_ness(&sup)?;
        let t = effective_temperature(chain, bath, &rho.populations());
        curve.push((eps, t));
    }
    let last = curve[curve.len() - 1].1;
    let prev = curve[curve.len() - 2].1;
    let converged = last.is_finite() && ((last - prev) / last).abs() < 0.01;
    let (_, mean_energies) = eigenbasis_mean_energies(chain, v);
    let e_max = mean_energies.iter().cloned().fold(f64::MIN, f64::max);
    let e_min = mean_energies.iter().cloned().fold(f64::MAX, f64::min);
    let span_r = e_max - e_min;
    let lower_bound = if span_r > 0.0 {
        chain.spectral_span() / span_r * bath.temperature_b()
    } else {
        f64::INFINITY
    };
    Ok(SaturationTemperature {
        estimate: last,
        lower_bound,
        converged,
        spectral_span_r: span_r,
        curve,
    })
}
