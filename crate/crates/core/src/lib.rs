//! Minimum measured phase variance of single-mode optical states.
//!
//! A phase measurement is summarized by its excess-noise vector `h(m)`
//! ([`schemes`]). States are optimized for minimum `V = 2 - 2⟨cos φ⟩` under
//! a fixed mean photon number or a photon-number cap ([`number_opt`]), in
//! the continuum limit for very large n̄ ([`continuum`]), or within the
//! squeezed-state family ([`squeezed`]). [`asymptotics`] collects the
//! closed-form laws the numerics are compared against.

pub mod asymptotics;
pub mod continuum;
pub mod error;
pub mod golden;
pub mod number_opt;
pub mod schemes;
pub mod squeezed;
pub mod tridiag;

pub use asymptotics::{
    perturbation_constants, reference_curves, vmin_general, vmin_truncated_asym, z_mark_i_corrected, z_param,
    PerturbationConstants, ReferenceCurve,
};
pub use continuum::{discretize, solve_continuum, solve_continuum_at_nbar, ContinuumConfig, ContinuumResult};
pub use error::{Error, Result};
pub use number_opt::{
    build_tridiagonal, optimize_at_mu, optimize_at_nbar, optimize_truncated, variance_of_state, OptimizationResult,
    OptimizerConfig, StateVector,
};
pub use schemes::{h_het_exact, h_het_series, leading_params, load_h_table, PowerTail, SchemeKind, SchemeModel};
pub use squeezed::{amplitudes, appendix_sum_check, optimize_squeezed, squeezed_variance, SqueezedPoint};
pub use tridiag::ground_pair;
