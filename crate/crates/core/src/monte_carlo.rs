//! Plain Monte Carlo over independent fading realizations.
//!
//! Trial `i` always draws its gains from stream index `i`, and trials are
//! grouped into fixed-size chunks whose partial results are merged in chunk
//! order. The estimate is therefore bitwise identical for any worker count.

use rayon::prelude::*;
use serde::Serialize;

use crate::analytics::{achievable_rate, harvested_energy, expected_link_metrics};
use crate::channel::ChannelDraw;
use crate::error::{Error, Result};
use crate::params::SystemParams;

const CHUNK_TRIALS: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloResult {
    pub estimate: f64,
    pub std_error: f64,
    pub n_trials: u64,
    pub seed: u64,
}

/// What a run averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimand {
    /// Fraction of trials with `E_h < ψ` or `R < φ`.
    Outage,
    /// Mean bits per slot.
    MeanRate,
    /// Mean harvested energy per slot.
    MeanHarvest,
}

impl Estimand {
    fn is_probability(self) -> bool {
        matches!(self, Estimand::Outage)
    }

    fn evaluate(self, p: &SystemParams, draw: &ChannelDraw) -> f64 {
        match self {
            Estimand::Outage => {
                if expected_link_metrics(p, draw).in_outage {
                    1.0
                } else {
                    0.0
                }
            }
            Estimand::MeanRate => achievable_rate(p, draw.g2),
            Estimand::MeanHarvest => harvested_energy(p, draw.g1),
        }
    }
}

/// Running count, mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let (na, nb, n) = (self.count as f64, other.count as f64, count as f64);
        Moments {
            count,
            mean: self.mean + delta * nb / n,
            m2: self.m2 + other.m2 + delta * delta * na * nb / n,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct ChunkStats {
    hits: u64,
    moments: Moments,
}

/// Monte Carlo driver. `workers = None` uses the global rayon pool.
#[derive(Debug, Clone, Copy, Default)]
pub struct MonteCarlo {
    workers: Option<usize>,
}

impl MonteCarlo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_workers(workers: usize) -> Self {
        Self {
            workers: Some(workers.max(1)),
        }
    }

    /// Validates `params`, then runs `n` trials.
    pub fn estimate(
        &self,
        params: &SystemParams,
        estimand: Estimand,
        n: u64,
        seed: u64,
    ) -> Result<MonteCarloResult> {
        let params = params.clone().validated()?;
        self.estimate_unchecked(&params, estimand, n, seed)
    }

    /// Like [`MonteCarlo::estimate`] but accepts parameters outside the
    /// validated ranges, for probing limits such as β = 0.
    pub fn estimate_unchecked(
        &self,
        params: &SystemParams,
        estimand: Estimand,
        n: u64,
        seed: u64,
    ) -> Result<MonteCarloResult> {
        let (g1, g2) = (params.gamma1_bar, params.gamma2_bar);
        self.estimate_with_draws(params, estimand, n, seed, |trial| {
            ChannelDraw::for_trial(seed, trial, g1, g2)
        })
    }

    /// Runs `n` trials with gains supplied by `draw(trial)`.
    pub fn estimate_with_draws<F>(
        &self,
        params: &SystemParams,
        estimand: Estimand,
        n: u64,
        seed: u64,
        draw: F,
    ) -> Result<MonteCarloResult>
    where
        F: Fn(u64) -> Result<ChannelDraw> + Sync,
    {
        if n == 0 {
            return Err(Error::Domain("Monte Carlo needs at least one trial".into()));
        }
        let chunks = n.div_ceil(CHUNK_TRIALS);
        let run_chunk = |chunk: u64| -> Result<ChunkStats> {
            let start = chunk * CHUNK_TRIALS;
            let end = (start + CHUNK_TRIALS).min(n);
            let mut stats = ChunkStats::default();
            for trial in start..end {
                let x = estimand.evaluate(params, &draw(trial)?);
                if estimand.is_probability() {
                    stats.hits += x as u64;
                } else {
                    stats.moments.push(x);
                }
            }
            Ok(stats)
        };
        let collect = || {
            (0..chunks)
                .into_par_iter()
                .map(run_chunk)
                .collect::<Result<Vec<_>>>()
        };
        let partials = match self.workers {
            None => collect()?,
            Some(w) => rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::Workers(e.to_string()))?
                .install(collect)?,
        };

        let nf = n as f64;
        let (estimate, std_error) = if estimand.is_probability() {
            let hits: u64 = partials.iter().map(|c| c.hits).sum();
            let p_hat = hits as f64 / nf;
            (p_hat, (p_hat * (1.0 - p_hat) / nf).sqrt())
        } else {
            let m = partials
                .iter()
                .fold(Moments::default(), |acc, c| acc.merge(c.moments));
            let var = if n > 1 { m.m2 / (nf - 1.0) } else { 0.0 };
            (m.mean, (var.max(0.0) / nf).sqrt())
        };
        Ok(MonteCarloResult {
            estimate,
            std_error,
            n_trials: n,
            seed,
        })
    }
}

pub fn estimate_outage(params: &SystemParams, n: u64, seed: u64) -> Result<MonteCarloResult> {
    MonteCarlo::new().estimate(params, Estimand::Outage, n, seed)
}

pub fn estimate_mean_rate(params: &SystemParams, n: u64, seed: u64) -> Result<MonteCarloResult> {
    MonteCarlo::new().estimate(params, Estimand::MeanRate, n, seed)
}

pub fn estimate_mean_harvest(
    params: &SystemParams,
    n: u64,
    seed: u64,
) -> Result<MonteCarloResult> {
    MonteCarlo::new().estimate(params, Estimand::MeanHarvest, n, seed)
}
