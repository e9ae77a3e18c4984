//! Link-level analysis of wireless-powered ambient backscatter devices under
//! Rayleigh fading.
//!
//! A device splits each slot into a sensing phase (fraction `alpha`) and a
//! harvest-and-backscatter phase, and splits received power between the
//! harvester (`rho`) and the backscatter path (`1 - rho`). This crate gives
//! the closed-form energies, rate and outage probability of that link, the
//! power split that balances harvest against rate, and a seeded Monte Carlo
//! simulator that checks the closed forms independently.

pub mod analytics;
pub mod channel;
pub mod cli;
pub mod error;
pub mod monte_carlo;
pub mod params;
pub mod sweep;

pub use analytics::{
    achievable_rate, backscatter_energy, balancing_rho, conditional_rate_outage_prob,
    energy_shortage_prob, energy_surplus_prob, energy_threshold, expected_link_metrics,
    harvested_energy, outage_probability, outage_probability_composed, sensing_energy, sum_rate,
    LinkMetrics,
};
pub use channel::{sample_gain, ChannelDraw, RngStream};
pub use error::{Error, Result, ValidationReport, Violation};
pub use monte_carlo::{
    estimate_mean_harvest, estimate_mean_rate, estimate_outage, Estimand, MonteCarlo,
    MonteCarloResult,
};
pub use params::{load_params, parse_params, path_loss, validate, SystemParams};
pub use sweep::{
    emit, figure_preset, run_figure, run_sweep, FigurePreset, Metric, OutputFormat, SweepSpec,
    SweepTable,
};
