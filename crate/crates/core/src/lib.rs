//! Two-hop interference-channel simulator with interference alignment at the
//! sources and power-splitting energy-harvesting amplify-and-forward relays.
//!
//! The crate is organised as a pipeline:
//!
//! 1. [`channel`] draws seeded Rayleigh MIMO channel realizations for a
//!    K-source / K-relay / K-destination network with path loss.
//! 2. [`ia`] computes precoders and decoders for the first hop by distributed
//!    leakage-minimization alternation.
//! 3. [`relay`] evaluates the power-splitting relay signal model: harvested
//!    energy, amplify-and-forward normalization, and end-to-end SINR and rate.
//! 4. [`optimizer`] finds the per-relay power-splitting ratios that maximize
//!    each link's SINR via safeguarded Newton root finding inside a
//!    Gauss-Seidel coordinate sweep.
//! 5. [`sim`] runs seeded Monte Carlo trials, benchmark schemes, and sweeps,
//!    emitting CSV tables.

pub mod channel;
pub mod error;
pub mod ia;
pub mod linalg;
pub mod optimizer;
pub mod relay;
pub mod sim;

pub use channel::{path_loss, sample_channels, ChannelRealization, NetworkConfig};
pub use error::Error;
pub use ia::{feasible_streams, run_iterative_ia, verify_alignment, AlignmentSolution};
pub use optimizer::{
    grid_oracle, init_ps_high_snr, newton_root, optimize_ps, sinr_derivative, InitMode,
    OptimizerSettings, OptimizerTrace,
};
pub use relay::{
    amplification_coeff, compute_aggregates, harvested_energy, link_rate, sinr_destination,
    sinr_high_snr, sum_rate, LinkAggregates, PsVector,
};
pub use sim::{emit_csv, no_ia_baseline, run_sweep, run_trial, Scheme, SweepSpec, TrialReport};

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
