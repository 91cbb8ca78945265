//! System definition: energy ladder, bath parameters, driving parameters, and
//! the sampler producing log-normally distributed sparse couplings.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{NessError, Result};

/// The energy ladder: `n_levels` levels with energies `E_n`.
///
/// The canonical chain has uniform spacing `E_n = n * delta0`, so the spectral
/// span is `(n_levels - 1) * delta0`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainSpec {
    n_levels: usize,
    delta0: f64,
    energies: Vec<f64>,
}

impl ChainSpec {
    /// Uniformly spaced ladder `E_n = n * delta0`, `n = 0..n_levels-1`.
    pub fn uniform(n_levels: usize, delta0: f64) -> Result<Self> {
        if n_levels < 2 {
            return Err(NessError::invalid("n_levels", "need at least two levels"));
        }
        if !(delta0.is_finite() && delta0 > 0.0) {
            return Err(NessError::invalid("delta0", "must be finite and positive"));
        }
        let energies = (0..n_levels).map(|n| n as f64 * delta0).collect();
        Ok(ChainSpec {
            n_levels,
            delta0,
            energies,
        })
    }

    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn energy(&self, n: usize) -> f64 {
        self.energies[n]
    }

    /// Number of nearest-neighbor transitions.
    pub fn n_links(&self) -> usize {
        self.n_levels - 1
    }

    /// Spectral span `max(E) - min(E)`.
    pub fn spectral_span(&self) -> f64 {
        let max = self.energies.iter().cloned().fold(f64::MIN, f64::max);
        let min = self.energies.iter().cloned().fold(f64::MAX, f64::min);
        max - min
    }
}

/// Thermal bath: temperature `T_B` (k_B = 1), coupling rate `w_beta`, and the
/// pure-dephasing rate `gamma_phi` relevant only to the quantum picture.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BathSpec {
    temperature_b: f64,
    w_beta: f64,
    gamma_phi: f64,
}

impl BathSpec {
    pub fn new(temperature_b: f64, w_beta: f64, gamma_phi: f64) -> Result<Self> {
        if !(temperature_b.is_finite() && temperature_b > 0.0) {
            return Err(NessError::invalid("temperature_b", "must be positive"));
        }
        if !(w_beta.is_finite() && w_beta >= 0.0) {
            return Err(NessError::invalid("w_beta", "must be nonnegative"));
        }
        if !(gamma_phi.is_finite() && gamma_phi >= 0.0) {
            return Err(NessError::invalid("gamma_phi", "must be nonnegative"));
        }
        Ok(BathSpec {
            temperature_b,
            w_beta,
            gamma_phi,
        })
    }

    pub fn temperature_b(&self) -> f64 {
        self.temperature_b
    }

    pub fn w_beta(&self) -> f64 {
        self.w_beta
    }

    pub fn gamma_phi(&self) -> f64 {
        self.gamma_phi
    }

    /// Total dephasing rate acting on every coherence.
    pub fn gamma_beta(&self) -> f64 {
        self.w_beta + self.gamma_phi
    }

    /// Directed bath rate for a transition with energy change `de = E_to - E_from`.
    ///
    /// The up/down ratio is the Boltzmann factor exp(-de/T_B), as required by
    /// detailed balance.
    pub fn rate(&self, de: f64) -> f64 {
        2.0 * self.w_beta / (1.0 + (de / self.temperature_b).exp())
    }
}

/// Driving source: amplitude `epsilon` (intensity eps^2), log-normal dispersion
/// `sigma`, and the RNG seed identifying the disorder realization.
///
/// The log-normal location is fixed to `mu = 2 ln(eps) - sigma^2 / 2` so the
/// ensemble mean of the sampled rates is exactly eps^2.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DrivingSpec {
    epsilon: f64,
    sigma: f64,
    seed: u64,
}

impl DrivingSpec {
    pub fn new(epsilon: f64, sigma: f64, seed: u64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(NessError::invalid("epsilon", "must be finite and positive"));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(NessError::invalid("sigma", "must be finite and nonnegative"));
        }
        Ok(DrivingSpec {
            epsilon,
            sigma,
            seed,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Sparsity `s = exp(-sigma^2)`, in (0, 1].
    pub fn sparsity(&self) -> f64 {
        (-self.sigma * self.sigma).exp()
    }

    /// Log-normal location `mu = 2 ln(eps) - sigma^2 / 2`.
    pub fn log_mean(&self) -> f64 {
        2.0 * self.epsilon.ln() - 0.5 * self.sigma * self.sigma
    }

    /// Same realization and width at a different drive amplitude.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        DrivingSpec::new(epsilon, self.sigma, self.seed)
    }
}

/// Dispersion that realizes a given sparsity: `sigma = sqrt(-ln s)`.
pub fn sigma_for_sparsity(s: f64) -> f64 {
    assert!(s > 0.0 && s <= 1.0, "sparsity must lie in (0, 1]");
    (-s.ln()).sqrt()
}

/// Sampled nearest-neighbor driving rates `w_n > 0`, one per link.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Couplings {
    rates: Vec<f64>,
    spec: DrivingSpec,
}

impl Couplings {
    /// Wrap explicit rates (used for tests and counterexamples).
    ///
    /// Rates must be finite and nonnegative; the sampler only ever produces
    /// strictly positive ones.
    pub fn from_rates(rates: Vec<f64>, spec: DrivingSpec) -> Result<Self> {
        if rates.is_empty() {
            return Err(NessError::invalid("rates", "must be non-empty"));
        }
        if rates.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(NessError::invalid(
                "rates",
                "must be finite and nonnegative",
            ));
        }
        Ok(Couplings { rates, spec })
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn spec(&self) -> &DrivingSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }
}

/// Draw the `n_levels - 1` nearest-neighbor driving rates `w_n = exp(x_n)`,
/// `x_n ~ Normal(mu, sigma)` with `mu = 2 ln(eps) - sigma^2 / 2`.
///
/// Stream semantics: the generator is ChaCha8 seeded with `driving.seed`, and
/// exactly one standard-normal draw is consumed per link, independent of
/// `epsilon` and `sigma`. Rescanning `epsilon` or `sigma` at a fixed seed
/// therefore keeps the same underlying Gaussian realization, and the sampled
/// rates scale exactly as eps^2 along an epsilon scan.
pub fn sample_couplings(chain: &ChainSpec, driving: &DrivingSpec) -> Result<Couplings> {
    let mut rng = ChaCha8Rng::seed_from_u64(driving.seed());
    let mu = driving.log_mean();
    let sigma = driving.sigma();
    let eps = driving.epsilon();
    let rates = (0..chain.n_links())
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            if sigma == 0.0 {
                // Zero dispersion collapses the distribution onto its mean.
                eps * eps
            } else {
                (mu + sigma * z).exp()
            }
        })
        .collect();
    Couplings::from_rates(rates, *driving)
}

/// Canonical (Boltzmann) distribution `p_n ∝ exp(-E_n / T)` on the ladder.
pub fn canonical_distribution(chain: &ChainSpec, temperature: f64) -> Result<DVector<f64>> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(NessError::invalid("temperature", "must be positive"));
    }
    let e_min = chain
        .energies()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let mut p = DVector::from_iterator(
        chain.n_levels(),
        chain
            .energies()
            .iter()
            .map(|e| (-(e - e_min) / temperature).exp()),
    );
    let z: f64 = p.iter().sum();
    p /= z;
    Ok(p)
}

/// Assemble the perturbation matrix `V` of the quantum picture: real
/// symmetric, zero diagonal, nearest-neighbor band with
/// `V_{n,n+1} = sqrt(w_n) / eps`, so `eps^2 |V_{n,n+1}|^2 = w_n` exactly.
///
/// Because `w_n ∝ eps^2` at a fixed seed, `V` does not depend on the drive
/// amplitude: it encodes the disorder realization alone.
pub fn build_perturbation_matrix(
    chain: &ChainSpec,
    couplings: &Couplings,
    driving: &DrivingSpec,
) -> Result<DMatrix<f64>> {
    if couplings.len() != chain.n_links() {
        return Err(NessError::dims(format!(
            "couplings carry {} rates but the chain has {} links",
            couplings.len(),
            chain.n_links()
        )));
    }
    let n = chain.n_levels();
    let eps = driving.epsilon();
    let mut v = DMatrix::zeros(n, n);
    for (k, w) in couplings.rates().iter().enumerate() {
        let amp = w.sqrt() / eps;
        v[(k, k + 1)] = amp;
        v[(k + 1, k)] = amp;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn paper_chain() -> ChainSpec {
        ChainSpec::uniform(25, 1.0).unwrap()
    }

    #[test]
    fn uniform_chain_energies_and_span() {
        let chain = paper_chain();
        assert_eq!(chain.n_levels(), 25);
        assert_eq!(chain.n_links(), 24);
        for n in 0..25 {
            assert_eq!(chain.energy(n), n as f64);
        }
        assert_eq!(chain.spectral_span(), 24.0);
    }

    #[test]
    fn chain_rejects_bad_parameters() {
        assert!(ChainSpec::uniform(1, 1.0).is_err());
        assert!(ChainSpec::uniform(10, 0.0).is_err());
        assert!(ChainSpec::uniform(10, f64::NAN).is_err());
    }

    #[test]
    fn bath_rates_obey_detailed_balance() {
        let bath = BathSpec::new(10.0, 0.1, 0.0).unwrap();
        let up = bath.rate(1.0);
        let down = bath.rate(-1.0);
        assert_abs_diff_eq!(up / down, (-1.0f64 / 10.0).exp(), epsilon = 1e-15);
        // One-way rates add up to 2 w_beta for any energy difference.
        assert_abs_diff_eq!(up + down, 0.2, epsilon = 1e-16);
        assert_eq!(bath.gamma_beta(), 0.1);
    }

    #[test]
    fn infinite_temperature_limit_of_bath_rate() {
        let bath = BathSpec::new(1e12, 0.1, 0.0).unwrap();
        assert_abs_diff_eq!(bath.rate(1.0), 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(bath.rate(-1.0), 0.1, epsilon = 1e-12);
    }

    #[test]
    fn sparsity_and_log_mean() {
        // s = 1e-5  =>  sigma = sqrt(-ln 1e-5) ~= 3.3931
        let sigma = sigma_for_sparsity(1e-5);
        assert_abs_diff_eq!(sigma, 3.3930702122075563, epsilon = 1e-12);
        let d = DrivingSpec::new(2.0, sigma, 0).unwrap();
        assert_abs_diff_eq!(d.sparsity(), 1e-5, epsilon = 1e-19);
        assert_abs_diff_eq!(
            d.log_mean(),
            2.0 * 2.0f64.ln() - 0.5 * sigma * sigma,
            epsilon = 1e-15
        );
    }

    #[test]
    fn zero_dispersion_collapses_to_intensity() {
        let chain = paper_chain();
        let d = DrivingSpec::new(2.0, 0.0, 7).unwrap();
        let c = sample_couplings(&chain, &d).unwrap();
        assert_eq!(c.len(), 24);
        for &w in c.rates() {
            assert_eq!(w, 4.0);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_positive() {
        let chain = paper_chain();
        let d = DrivingSpec::new(1.0, 2.0, 42).unwrap();
        let a = sample_couplings(&chain, &d).unwrap();
        let b = sample_couplings(&chain, &d).unwrap();
        assert_eq!(a.rates(), b.rates());
        assert!(a.rates().iter().all(|w| *w > 0.0));
        let other = sample_couplings(&chain, &DrivingSpec::new(1.0, 2.0, 43).unwrap()).unwrap();
        assert_ne!(a.rates(), other.rates());
    }

    #[test]
    fn epsilon_scan_rescales_rates_exactly() {
        let chain = paper_chain();
        let d1 = DrivingSpec::new(1.0, 2.0, 11).unwrap();
        let d2 = d1.with_epsilon(10.0).unwrap();
        let c1 = sample_couplings(&chain, &d1).unwrap();
        let c2 = sample_couplings(&chain, &d2).unwrap();
        for (a, b) in c1.rates().iter().zip(c2.rates()) {
            // w(10) / w(1) = 100 up to the rounding of exp(mu + sigma z).
            assert_abs_diff_eq!(b / a, 100.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn monte_carlo_mean_matches_intensity() {
        // 1e6 samples at sigma = 2, eps = 1: the sample mean must sit within
        // three standard errors of 1.0. SE = sqrt((e^4 - 1) e^{0}) / 1000.
        let n = 1_000_001;
        let chain = ChainSpec::uniform(n, 1.0).unwrap();
        let d = DrivingSpec::new(1.0, 2.0, 123).unwrap();
        let c = sample_couplings(&chain, &d).unwrap();
        let mean: f64 = c.rates().iter().sum::<f64>() / c.len() as f64;
        let se = ((4.0f64.exp() - 1.0).sqrt()) / 1000.0;
        assert!(
            (mean - 1.0).abs() < 3.0 * se,
            "sample mean {mean} departs from 1.0 by more than 3 SE = {}",
            3.0 * se
        );
    }

    #[test]
    fn log_rates_pass_moment_normality_check() {
        // Skewness and excess kurtosis of ln(w) over 1e4 samples stay within
        // four standard errors of zero.
        let n = 10_001;
        let chain = ChainSpec::uniform(n, 1.0).unwrap();
        let d = DrivingSpec::new(1.3, 1.7, 7).unwrap();
        let c = sample_couplings(&chain, &d).unwrap();
        let logs: Vec<f64> = c.rates().iter().map(|w| w.ln()).collect();
        let m = logs.len() as f64;
        let mean = logs.iter().sum::<f64>() / m;
        let var = logs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / m;
        let sd = var.sqrt();
        let skew = logs.iter().map(|x| ((x - mean) / sd).powi(3)).sum::<f64>() / m;
        let kurt = logs.iter().map(|x| ((x - mean) / sd).powi(4)).sum::<f64>() / m - 3.0;
        let se_skew = (6.0 / m).sqrt();
        let se_kurt = (24.0 / m).sqrt();
        assert!(skew.abs() < 4.0 * se_skew, "skewness z = {}", skew / se_skew);
        assert!(kurt.abs() < 4.0 * se_kurt, "kurtosis z = {}", kurt / se_kurt);
        assert_abs_diff_eq!(mean, d.log_mean(), epsilon = 5.0 * sd / m.sqrt());
    }

    #[test]
    fn median_below_mean_for_wide_dispersion() {
        // Pooled over 100 seeds at sigma = 1, the median of the rates sits
        // strictly below their mean.
        let chain = paper_chain();
        let mut pooled = Vec::new();
        for seed in 0..100 {
            let d = DrivingSpec::new(1.0, 1.0, seed).unwrap();
            pooled.extend_from_slice(sample_couplings(&chain, &d).unwrap().rates());
        }
        let mean = pooled.iter().sum::<f64>() / pooled.len() as f64;
        let med = crate::numeric::median(&pooled);
        assert!(
            med < mean,
            "median {med} should be strictly below mean {mean}"
        );
    }

    #[test]
    fn canonical_distribution_limits() {
        let chain = paper_chain();
        // Effectively infinite temperature: uniform to 1e-10.
        let p = canonical_distribution(&chain, 1e12).unwrap();
        for &pi in p.iter() {
            assert_abs_diff_eq!(pi, 1.0 / 25.0, epsilon = 1e-10);
        }
        // Two-level Boltzmann ratio.
        let two = ChainSpec::uniform(2, 1.0).unwrap();
        let p = canonical_distribution(&two, 1.0).unwrap();
        assert_abs_diff_eq!(p[1] / p[0], (-1.0f64).exp(), epsilon = 1e-15);
        // Constant spacing forces a constant ratio e^{-0.1}.
        let p = canonical_distribution(&chain, 10.0).unwrap();
        for n in 1..25 {
            assert_abs_diff_eq!(p[n] / p[n - 1], (-0.1f64).exp(), epsilon = 1e-14);
        }
        let sum: f64 = p.iter().sum();
        assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn canonical_distribution_rejects_nonpositive_temperature() {
        let chain = paper_chain();
        assert!(canonical_distribution(&chain, 0.0).is_err());
        assert!(canonical_distribution(&chain, -1.0).is_err());
    }

    #[test]
    fn perturbation_matrix_round_trip() {
        let chain = paper_chain();
        let d = DrivingSpec::new(0.7, sigma_for_sparsity(1e-5), 3).unwrap();
        let c = sample_couplings(&chain, &d).unwrap();
        let v = build_perturbation_matrix(&chain, &c, &d).unwrap();
        let eps2 = d.epsilon() * d.epsilon();
        for k in 0..24 {
            let w_back = eps2 * v[(k, k + 1)] * v[(k, k + 1)];
            assert_abs_diff_eq!(w_back / c.rates()[k], 1.0, epsilon = 1e-15);
            assert_eq!(v[(k, k + 1)], v[(k + 1, k)]);
        }
        // Zero diagonal and zero off-band entries; band spans many decades.
        let mut min_band = f64::INFINITY;
        let mut max_band = 0.0f64;
        for i in 0..25usize {
            for j in 0..25usize {
                if i.abs_diff(j) == 1 {
                    min_band = min_band.min(v[(i, j)]);
                    max_band = max_band.max(v[(i, j)]);
                } else {
                    assert_eq!(v[(i, j)], 0.0);
                }
            }
        }
        // amplitude ratio ~ e^{sigma * range(z) / 2}; the squared rates span
        // twice as many decades
        assert!(
            max_band / min_band > 1e2,
            "band should span decades at s = 1e-5, got ratio {}",
            max_band / min_band
        );
    }

    #[test]
    fn perturbation_matrix_uniform_when_sigma_zero() {
        let chain = paper_chain();
        let d = DrivingSpec::new(2.0, 0.0, 0).unwrap();
        let c = sample_couplings(&chain, &d).unwrap();
        let v = build_perturbation_matrix(&chain, &c, &d).unwrap();
        for k in 0..24 {
            assert_eq!(v[(k, k + 1)], 1.0);
        }
    }

    #[test]
    fn perturbation_matrix_dimension_mismatch() {
        let chain = paper_chain();
        let d = DrivingSpec::new(1.0, 1.0, 0).unwrap();
        let short = Couplings::from_rates(vec![1.0; 5], d).unwrap();
        assert!(matches!(
            build_perturbation_matrix(&chain, &short, &d),
            Err(NessError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn driving_spec_rejects_nonfinite() {
        assert!(DrivingSpec::new(f64::NAN, 1.0, 0).is_err());
        assert!(DrivingSpec::new(1.0, f64::INFINITY, 0).is_err());
        assert!(DrivingSpec::new(0.0, 1.0, 0).is_err());
        assert!(DrivingSpec::new(1.0, -0.5, 0).is_err());
    }
}
