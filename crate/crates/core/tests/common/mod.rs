//! Test-only oracles, written from the model equations without going
//! through the library's evaluation path.

#![allow(dead_code)]

use backscatter::SystemParams;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// ψ from its components, or the override.
pub fn oracle_psi(p: &SystemParams) -> f64 {
    p.psi_override.unwrap_or_else(|| {
        let e_b = (1.0 - p.alpha) * p.omega2 * p.slot_duration;
        let e_s = p.alpha * p.sample_rate * p.num_signals as f64 * p.energy_per_sample * p.slot_duration;
        e_b + e_s + p.mcu_energy
    })
}

/// Outage probability straight from `1 - exp(-A - C)`.
pub fn oracle_outage(p: &SystemParams) -> f64 {
    let a = p.d1.powf(p.theta) * oracle_psi(p)
        / (p.gamma1_bar * p.rho * p.eta * (1.0 - p.alpha) * p.slot_duration * p.beta * p.omega1);
    let c = p.d2.powf(p.theta)
        * (2f64.powf(p.phi / ((1.0 - p.alpha) * p.bandwidth * p.slot_duration)) - 1.0)
        / (p.gamma2_bar * (1.0 - p.rho) * p.beta * p.omega2);
    1.0 - (-(a + c)).exp()
}

/// Rate by direct arithmetic, `(1-α)BT log2(1 + (1-ρ)βΩ2 g2 / d2^θ)`.
pub fn oracle_rate(p: &SystemParams, g2: f64) -> f64 {
    (1.0 - p.alpha)
        * p.bandwidth
        * p.slot_duration
        * (1.0 + (1.0 - p.rho) * p.beta * p.omega2 * g2 / p.d2.powf(p.theta)).log2()
}

/// One-sample Kolmogorov-Smirnov statistic against `cdf`.
pub fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let lo = i as f64 / n;
            let hi = (i + 1) as f64 / n;
            (hi - f).max(f - lo)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// A valid parameter vector with moderate ranges. ψ comes from an
/// override so it does not move with Ω2.
pub fn random_params(rng: &mut StdRng) -> SystemParams {
    let db = |rng: &mut StdRng, lo: f64, hi: f64| 10f64.powf(rng.random_range(lo..hi) / 10.0);
    SystemParams {
        rho: rng.random_range(0.05..0.95),
        alpha: rng.random_range(0.0..0.6),
        eta: rng.random_range(0.2..1.0),
        beta: rng.random_range(0.2..1.0),
        theta: rng.random_range(2.0..3.5),
        slot_duration: rng.random_range(0.5..2.0),
        bandwidth: rng.random_range(1e5..2e6),
        omega1: db(rng, 0.0, 30.0),
        omega2: db(rng, -5.0, 20.0),
        d1: rng.random_range(1.0..8.0),
        d2: rng.random_range(1.0..8.0),
        phi: rng.random_range(0.0..20_000.0),
        gamma1_bar: rng.random_range(0.5..2.0),
        gamma2_bar: rng.random_range(0.5..2.0),
        psi_override: Some(rng.random_range(0.0..0.05)),
        ..Default::default()
    }
}

/// Random parameters whose closed-form outage lies in [lo, hi], so a
/// simulation of 10^6 trials is informative.
pub fn random_informative_params(rng: &mut StdRng, lo: f64, hi: f64) -> SystemParams {
    loop {
        let mut p = random_params(rng);
        // half the vectors keep the physical threshold E_b + E_s + E_m
        if rng.random_bool(0.5) {
            p.psi_override = None;
            p.omega1 = 10f64.powf(rng.random_range(20.0..50.0) / 10.0);
            p.omega2 = 10f64.powf(rng.random_range(-10.0..0.0) / 10.0);
        }
        let pout = oracle_outage(&p);
        if (lo..=hi).contains(&pout) {
            return p;
        }
    }
}
