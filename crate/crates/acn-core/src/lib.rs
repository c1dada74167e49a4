//! Design and evaluation of analog combining networks (ACNs) for
//! multi-antenna burst links.
//!
//! An ACN feeds `L` antenna branches through analog phase shifters
//! `phi_l(t) = alpha_l * t + beta_l` into a single adder, so a receiver with
//! one RF chain sees a single effective far-field pattern that rotates over
//! time. A periodic message survives as long as at least one of the `K`
//! packets it is repeated in gets through, so the quantity to optimize is the
//! worst-case burst error probability over the angle of arrival and the
//! phase-shifter offsets. With well-chosen rotation rates the combiner
//! guarantees, for every angle of arrival, a burst SNR sum no worse than the
//! array's mean branch gain, without any feedback to the transmitter.
//!
//! The crate is organized around that workflow:
//!
//! - [`patterns`]: far-field azimuth patterns, array geometry, CSV pattern I/O
//! - [`combining`]: effective far field, per-packet average SNR, combining-scheme SNR sums
//! - [`pep`]: packet-error-probability models and burst error probability
//! - [`design`]: rotation-kernel closed form, optimal rate design, minimax searches
//! - [`montecarlo`]: seeded burst-error and multipath-fading validation
//!
//! # Example
//!
//! ```
//! use acn_core::{design_rates, x_star_membership, AntennaArray, FarFieldPattern};
//!
//! // Two-element array, half-wavelength spacing along x.
//! let lambda = 0.125;
//! let array = AntennaArray::new(
//!     vec![FarFieldPattern::Isotropic, FarFieldPattern::Isotropic],
//!     vec![(0.0, 0.0), (lambda / 2.0, 0.0)],
//!     lambda,
//! )
//! .unwrap();
//!
//! // Smallest optimal rotation rates for bursts of K = 5 packets sent every 0.1 s.
//! let rates = design_rates(array.len(), 5, 0.1).unwrap();
//! assert_eq!(rates[0], 0.0);
//! assert!(x_star_membership(rates[1] * 0.1 / 2.0, 5, 1e-9));
//! ```

pub mod combining;
pub mod design;
mod error;
pub mod montecarlo;
pub mod patterns;
pub mod pep;
mod util;

pub use combining::{
    burst_snr_sum, effective_farfield, packet_avg_snr, rho, CombiningScheme, LinkBudget,
    OmegaMode, PhaseSchedule,
};
pub use design::{
    burst_objective, design_rates, f_kernel, minimax_rates, minimax_rates_pep, mismatch_sweep,
    multi_period_check, optimal_burst_objective, worst_case_aoa, worst_mismatch_objective,
    x_star_membership, x_star_set, CrossTerms, GridSpec, MinimaxResult,
};
pub use error::AcnError;
pub use montecarlo::{
    binomial_ci99_contains, ks_critical_value, ks_statistic_exponential, simulate_bursts,
    simulate_scenario2, validate_packet_snr, BurstSim, BurstTrialConfig, Scenario2Config,
    Scenario2Sim,
};
pub use patterns::{
    load_pattern_csv, save_pattern_csv, AntennaArray, FarFieldPattern, TabulatedPattern,
};
pub use pep::{burst_error_prob, q_function, worst_offset_bep, PepModel};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, AcnError>;
