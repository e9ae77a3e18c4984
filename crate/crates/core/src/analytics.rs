//! Closed-form link quantities: per-slot energies, achievable rate, the
//! outage probability under Rayleigh fading, and the balancing split ρ*.
//!
//! Outage is the event that the harvested energy falls short of the
//! threshold ψ, or that the rate to the gateway falls below φ. With both
//! gains exponential and independent, each event contributes one exponent:
//!
//! ```text
//! A = P_l1 ψ / (γ̄1 ρ η (1-α) T β Ω1)           energy exponent
//! C = P_l2 (2^(φ/((1-α)BT)) - 1) / (γ̄2 (1-ρ) β Ω2)   rate exponent
//! P_out = 1 - exp(-A - C)
//! ```
//!
//! The balancing split ρ* is the ρ at which the harvested-energy expression
//! equals the backscatter SNR expression for a given pair of gains.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::channel::ChannelDraw;
use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Energies, rate and outage indicator for one channel realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkMetrics {
    pub harvested_energy: f64,
    pub sensing_energy: f64,
    pub backscatter_energy: f64,
    pub psi: f64,
    pub rate: f64,
    pub in_outage: bool,
}

/// Harvest factor ρη(1-α)TβΩ1, energy per unit gain before path loss.
fn harvest_factor(p: &SystemParams) -> f64 {
    p.rho * p.eta * (1.0 - p.alpha) * p.slot_duration * p.beta * p.omega1
}

pub fn harvested_energy(p: &SystemParams, g1: f64) -> f64 {
    harvest_factor(p) * g1 / p.path_loss_1()
}

pub fn sensing_energy(p: &SystemParams) -> f64 {
    p.alpha * p.sample_rate * f64::from(p.num_signals) * p.energy_per_sample * p.slot_duration
}

/// Circuit energy of the backscatter phase, with Ω2 standing in for P_b.
pub fn backscatter_energy(p: &SystemParams) -> f64 {
    (1.0 - p.alpha) * p.omega2 * p.slot_duration
}

/// ψ: the override when set, otherwise E_b + E_s + E_m.
pub fn energy_threshold(p: &SystemParams) -> f64 {
    match p.psi_override {
        Some(psi) => psi,
        None => backscatter_energy(p) + sensing_energy(p) + p.mcu_energy,
    }
}

/// Received SNR at the gateway, (1-ρ)βΩ2|h2|²/P_l2.
pub fn backscatter_snr(p: &SystemParams, g2: f64) -> f64 {
    (1.0 - p.rho) * p.beta * p.omega2 * g2 / p.path_loss_2()
}

/// Bits delivered in one slot.
pub fn achievable_rate(p: &SystemParams, g2: f64) -> f64 {
    (1.0 - p.alpha) * p.bandwidth * p.slot_duration * backscatter_snr(p, g2).ln_1p() / LN_2
}

/// Sum of per-device rates over the given realizations.
pub fn sum_rate(p: &SystemParams, draws: &[ChannelDraw]) -> Result<f64> {
    if draws.is_empty() {
        return Err(Error::Domain("sum rate needs at least one device".into()));
    }
    Ok(draws.iter().map(|d| achievable_rate(p, d.g2)).sum())
}

/// The energy exponent A.
pub fn energy_exponent(p: &SystemParams) -> Result<f64> {
    let factor = harvest_factor(p);
    if factor == 0.0 || !factor.is_finite() {
        return Err(Error::Degenerate(
            "ρη(1-α)TβΩ1 is zero, so harvesting never happens",
        ));
    }
    Ok(p.path_loss_1() * energy_threshold(p) / (p.gamma1_bar * factor))
}

/// The rate exponent C.
pub fn rate_exponent(p: &SystemParams) -> Result<f64> {
    let airtime = (1.0 - p.alpha) * p.bandwidth * p.slot_duration;
    if airtime == 0.0 {
        return Err(Error::Degenerate("(1-α)BT is zero, so no bits are sent"));
    }
    let snr_factor = (1.0 - p.rho) * p.beta * p.omega2;
    if snr_factor == 0.0 || !snr_factor.is_finite() {
        return Err(Error::Degenerate(
            "(1-ρ)βΩ2 is zero, so nothing reaches the gateway",
        ));
    }
    let required_snr = (p.phi / airtime * LN_2).exp_m1();
    Ok(p.path_loss_2() * required_snr / (p.gamma2_bar * snr_factor))
}

/// Pr(E_h < ψ).
pub fn energy_shortage_prob(p: &SystemParams) -> Result<f64> {
    Ok(-(-energy_exponent(p)?).exp_m1())
}

/// Pr(E_h > ψ). Computed as the complement of the shortage probability so
/// the two always sum to one.
pub fn energy_surplus_prob(p: &SystemParams) -> Result<f64> {
    Ok(1.0 - energy_shortage_prob(p)?)
}

/// Pr(R < φ | E_h > ψ), which reduces to the CDF of |h2|² since the hops
/// fade independently.
pub fn conditional_rate_outage_prob(p: &SystemParams) -> Result<f64> {
    Ok(-(-rate_exponent(p)?).exp_m1())
}

/// Closed-form outage probability `1 - exp(-A - C)`.
pub fn outage_probability(p: &SystemParams) -> Result<f64> {
    let exponent = energy_exponent(p)? + rate_exponent(p)?;
    Ok(-(-exponent).exp_m1())
}

/// Outage by total probability: shortage (certain outage) plus surplus
/// times the conditional rate outage. Algebraically equal to
/// [`outage_probability`].
pub fn outage_probability_composed(p: &SystemParams) -> Result<f64> {
    let shortage = energy_shortage_prob(p)?;
    let surplus = energy_surplus_prob(p)?;
    let rate_outage = conditional_rate_outage_prob(p)?;
    Ok(shortage + surplus * rate_outage)
}

/// Power split at which harvested energy equals the backscatter SNR for the
/// given gains:
///
/// ```text
/// ρ* = |h2|²Ω2 P_l1 / (|h2|²Ω2 P_l1 + η(1-α)TΩ1|h1|² P_l2)
/// ```
///
/// β scales both sides of the equality and cancels.
pub fn balancing_rho(p: &SystemParams, g1: f64, g2: f64) -> Result<f64> {
    if g1 == 0.0 && g2 == 0.0 {
        return Err(Error::Degenerate("ρ* is undefined when both gains are zero"));
    }
    let rate_side = g2 * p.omega2 * p.path_loss_1();
    let harvest_side = p.eta * (1.0 - p.alpha) * p.slot_duration * p.omega1 * g1 * p.path_loss_2();
    let denom = rate_side + harvest_side;
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::Degenerate("ρ* denominator vanishes"));
    }
    Ok(rate_side / denom)
}

/// All per-realization quantities at once; `in_outage` is
/// `E_h < ψ || R < φ`.
pub fn expected_link_metrics(p: &SystemParams, draw: &ChannelDraw) -> LinkMetrics {
    let harvested_energy = harvested_energy(p, draw.g1);
    let psi = energy_threshold(p);
    let rate = achievable_rate(p, draw.g2);
    LinkMetrics {
        harvested_energy,
        sensing_energy: sensing_energy(p),
        backscatter_energy: backscatter_energy(p),
        psi,
        rate,
        in_outage: harvested_energy < psi || rate < p.phi,
    }
}
