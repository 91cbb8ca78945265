//! Non-equilibrium steady states (NESS) of a driven sparse multilevel system
//! coupled to a thermal bath.
//!
//! The library models an energy ladder ("chain") whose levels are connected by
//! two kinds of transitions: driving-induced rates drawn from a log-normal
//! (log-wide) ensemble, and bath-induced rates obeying detailed balance at the
//! bath temperature. It solves for the steady state in two pictures and
//! extracts fluctuation-dissipation diagnostics from both:
//!
//! * [`stochastic`] — the classical rate equation `dp/dt = W p`, its NESS,
//!   the energy absorption rate, the cooling rate, microscopic and effective
//!   temperatures, and the resistor-network diffusion coefficients with their
//!   linear (algebraic-mean) and semi-linear (harmonic-mean) limits.
//! * [`quantum`] — the master equation for the full density matrix, built as
//!   a superoperator on the vectorized state, its NESS, and the eigenbasis
//!   analysis behind the finite saturation temperature of the driven system.
//!
//! [`model`] holds the shared system definition (spectrum, bath, driving,
//! sampled couplings) and [`numeric`] a few numerical utilities, including the
//! compensated arithmetic used to certify steady-state energy balance far
//! below what plain f64 accumulation can resolve.

pub mod error;
pub mod model;
pub mod numeric;
pub mod quantum;
pub mod stochastic;

pub use error::{NessError, Result};
pub use model::{
    build_perturbation_matrix, canonical_distribution, sample_couplings, sigma_for_sparsity,
    BathSpec, ChainSpec, Couplings, DrivingSpec,
};
pub use quantum::{
    apply_generator, build_superoperator, couplings_from_perturbation, eigenbasis_analysis,
    eigenbasis_mean_energies, quantum_ness_report, saturation_temperature, solve_quantum_ness,
    DensityMatrix, EigenbasisAnalysis, SaturationTemperature, Superoperator,
};
pub use stochastic::{
    build_rate_matrix, cooling_rate, diffusion_coefficients, ear, ear_closed_form,
    effective_temperature, effective_temperature_closed_form, evolve, high_temperature_cross_check,
    lrt_diffusion_weighted, micro_temperatures, micro_temperatures_closed_form, solve_ness,
    weighted_harmonic_mean, DiffusionCoefficients, HighTemperatureCheck, NessReport, RateMatrix,
    StochasticNess, BALANCE_FLOOR,
};
