//! Rayleigh block fading: each hop's power gain |h|^2 is exponential with
//! mean `gamma_bar`, drawn by inverse CDF from a counter-addressed stream.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

use crate::error::{Error, Result};

/// Substream label for the source to device gain.
pub const SUBSTREAM_G1: u64 = 0;
/// Substream label for the device to gateway gain.
pub const SUBSTREAM_G2: u64 = 1;

// Each substream starts 2^40 ChaCha words into the stream.
const SUBSTREAM_SHIFT: u32 = 40;

/// A reproducible uniform source addressed by `(seed, index)`.
///
/// The index selects an independent ChaCha8 stream, so trial `i` of a
/// simulation sees the same numbers no matter which worker runs it.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, index: u64) -> Self {
        Self::substream(seed, index, 0)
    }

    /// Stream `index`, positioned at the start of substream `label`.
    pub fn substream(seed: u64, index: u64, label: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        rng.set_word_pos(u128::from(label) << SUBSTREAM_SHIFT);
        Self { seed, index, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on (0, 1] with 53 bits of resolution.
    pub fn next_uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Inverse exponential CDF: `-gamma_bar * ln(u)` for `u` in (0, 1].
pub fn exponential_from_uniform(u: f64, gamma_bar: f64) -> f64 {
    (0.0 - u.ln()) * gamma_bar
}

/// One exponential power gain with mean `gamma_bar`.
pub fn sample_gain(stream: &mut RngStream, gamma_bar: f64) -> Result<f64> {
    if !(gamma_bar > 0.0) || !gamma_bar.is_finite() {
        return Err(Error::Domain(format!(
            "mean channel gain must be positive, got {gamma_bar}"
        )));
    }
    Ok(exponential_from_uniform(stream.next_uniform(), gamma_bar))
}

/// Fraction of `n` draws strictly below `threshold`.
pub fn empirical_cdf_check(
    stream: &mut RngStream,
    gamma_bar: f64,
    threshold: f64,
    n: u64,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("empirical CDF needs at least one draw".into()));
    }
    let mut below = 0u64;
    for _ in 0..n {
        if sample_gain(stream, gamma_bar)? < threshold {
            below += 1;
        }
    }
    Ok(below as f64 / n as f64)
}

/// Power gains of both hops for one fading realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelDraw {
    /// |h1|^2, source to device.
    pub g1: f64,
    /// |h2|^2, device to gateway.
    pub g2: f64,
}

impl ChannelDraw {
    pub fn new(g1: f64, g2: f64) -> Self {
        Self { g1, g2 }
    }

    /// Both gains at their means, the deterministic operating point.
    pub fn at_mean(gamma1_bar: f64, gamma2_bar: f64) -> Self {
        Self::new(gamma1_bar, gamma2_bar)
    }

    /// The draw for Monte Carlo trial `trial`; g1 and g2 come from separate
    /// substreams of that trial's stream, so the hops are independent.
    pub fn for_trial(seed: u64, trial: u64, gamma1_bar: f64, gamma2_bar: f64) -> Result<Self> {
        let g1 = sample_gain(
            &mut RngStream::substream(seed, trial, SUBSTREAM_G1),
            gamma1_bar,
        )?;
        let g2 = sample_gain(
            &mut RngStream::substream(seed, trial, SUBSTREAM_G2),
            gamma2_bar,
        )?;
        Ok(Self { g1, g2 })
    }
}
