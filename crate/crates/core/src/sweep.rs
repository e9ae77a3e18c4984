//! One-axis parameter sweeps, the figure presets built from them, and
//! CSV/JSON table output.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::analytics::{
    achievable_rate, balancing_rho, harvested_energy, outage_probability,
};
use crate::error::{Error, Result};
use crate::monte_carlo::{Estimand, MonteCarlo};
use crate::params::SystemParams;

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_MC_TRIALS: u64 = 100_000;

/// Fixed energy threshold of the outage-vs-SNR preset. With ψ taken from
/// its components the backscatter circuit energy alone exceeds the mean
/// harvest at 5 m and every point saturates at P_out = 1.
pub const FIG5_PSI: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    /// Closed-form outage probability.
    OutageClosed,
    /// Simulated outage frequency.
    OutageMc,
    /// Simulated mean rate.
    RateMean,
    /// Simulated mean harvested energy.
    HarvestMean,
    /// Rate with g2 = γ̄2.
    RateDet,
    /// Harvested energy with g1 = γ̄1.
    HarvestDet,
    /// ρ* with both gains at their means.
    RhoStarAtMeanGains,
}

impl Metric {
    pub const ALL: [Metric; 7] = [
        Metric::OutageClosed,
        Metric::OutageMc,
        Metric::RateMean,
        Metric::HarvestMean,
        Metric::RateDet,
        Metric::HarvestDet,
        Metric::RhoStarAtMeanGains,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::OutageClosed => "outage_closed",
            Metric::OutageMc => "outage_mc",
            Metric::RateMean => "rate_mean",
            Metric::HarvestMean => "harvest_mean",
            Metric::RateDet => "rate_det",
            Metric::HarvestDet => "harvest_det",
            Metric::RhoStarAtMeanGains => "rho_star_at_mean_gains",
        }
    }

    fn estimand(self) -> Option<Estimand> {
        match self {
            Metric::OutageMc => Some(Estimand::Outage),
            Metric::RateMean => Some(Estimand::MeanRate),
            Metric::HarvestMean => Some(Estimand::MeanHarvest),
            _ => None,
        }
    }

    pub fn is_monte_carlo(self) -> bool {
        self.estimand().is_some()
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMetric(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Config key of the swept parameter, or `omega1_db` / `omega2_db`.
    pub axis: String,
    pub values: Vec<f64>,
    pub base: SystemParams,
    pub metrics: Vec<Metric>,
    pub mc_trials: u64,
    pub seed: u64,
    /// Curve identifiers emitted as leading constant columns, e.g. `alpha`.
    pub labels: Vec<(String, f64)>,
}

impl SweepSpec {
    pub fn new(axis: impl Into<String>, values: Vec<f64>, base: SystemParams) -> Self {
        Self {
            axis: axis.into(),
            values,
            base,
            metrics: Vec::new(),
            mc_trials: DEFAULT_MC_TRIALS,
            seed: DEFAULT_SEED,
            labels: Vec::new(),
        }
    }

    pub fn metrics(mut self, metrics: &[Metric]) -> Self {
        self.metrics = metrics.to_vec();
        self
    }

    pub fn check(&self) -> Result<()> {
        if !SystemParams::is_known_key(&self.axis) {
            return Err(Error::UnknownAxis(self.axis.clone()));
        }
        if self.values.is_empty() {
            return Err(Error::InvalidSweep("no axis values".into()));
        }
        if self.metrics.is_empty() {
            return Err(Error::InvalidSweep("no metrics requested".into()));
        }
        for (i, m) in self.metrics.iter().enumerate() {
            if self.metrics[..i].contains(m) {
                return Err(Error::InvalidSweep(format!("metric `{m}` listed twice")));
            }
        }
        if self.mc_trials == 0 && self.metrics.iter().any(|m| m.is_monte_carlo()) {
            return Err(Error::InvalidSweep(
                "Monte Carlo metrics need at least one trial".into(),
            ));
        }
        for (key, _) in &self.labels {
            if !SystemParams::is_known_key(key) {
                return Err(Error::UnknownAxis(key.clone()));
            }
        }
        Ok(())
    }

    pub fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = self.labels.iter().map(|(k, _)| k.clone()).collect();
        cols.push(self.axis.clone());
        for m in &self.metrics {
            cols.push(m.name().to_string());
            if m.is_monte_carlo() {
                cols.push(format!("{}_se", m.name()));
            }
        }
        cols
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub params: SystemParams,
    pub seed: u64,
}

impl SweepTable {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Rows whose `key` column equals `value`.
    pub fn filter(&self, key: &str, value: f64) -> SweepTable {
        let i = self.column_index(key);
        SweepTable {
            columns: self.columns.clone(),
            rows: self
                .rows
                .iter()
                .filter(|r| i.is_some_and(|i| r[i] == value))
                .cloned()
                .collect(),
            params: self.params.clone(),
            seed: self.seed,
        }
    }

    /// Concatenates tables with identical columns.
    pub fn stack(tables: Vec<SweepTable>, params: SystemParams, seed: u64) -> Result<SweepTable> {
        let mut iter = tables.into_iter();
        let mut out = iter
            .next()
            .ok_or_else(|| Error::InvalidSweep("nothing to stack".into()))?;
        for t in iter {
            if t.columns != out.columns {
                return Err(Error::InvalidSweep("stacked tables differ in columns".into()));
            }
            out.rows.extend(t.rows);
        }
        out.params = params;
        out.seed = seed;
        Ok(out)
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    run_sweep_with(spec, &MonteCarlo::new())
}

pub fn run_sweep_with(spec: &SweepSpec, mc: &MonteCarlo) -> Result<SweepTable> {
    spec.check()?;
    let mut base = spec.base.clone();
    for (key, value) in &spec.labels {
        base.set(key, *value)?;
    }

    let mut rows = Vec::with_capacity(spec.values.len());
    for (row, &value) in spec.values.iter().enumerate() {
        let row_err = |source: Error| Error::SweepRow {
            row,
            axis: spec.axis.clone(),
            value,
            source: Box::new(source),
        };
        let params = base
            .with(&spec.axis, value)
            .and_then(SystemParams::validated)
            .map_err(row_err)?;

        let mut cells: Vec<f64> = spec.labels.iter().map(|(_, v)| *v).collect();
        cells.push(value);
        for &metric in &spec.metrics {
            match metric.estimand() {
                Some(estimand) => {
                    let r = mc
                        .estimate_unchecked(&params, estimand, spec.mc_trials, spec.seed)
                        .map_err(row_err)?;
                    cells.push(r.estimate);
                    cells.push(r.std_error);
                }
                None => {
                    cells.push(deterministic_metric(&params, metric).map_err(row_err)?);
                }
            }
        }
        if let Some(bad) = cells.iter().position(|c| !c.is_finite()) {
            return Err(row_err(Error::InvalidSweep(format!(
                "non-finite value in column `{}`",
                spec.columns()[bad]
            ))));
        }
        rows.push(cells);
    }

    Ok(SweepTable {
        columns: spec.columns(),
        rows,
        params: spec.base.clone(),
        seed: spec.seed,
    })
}

fn deterministic_metric(p: &SystemParams, metric: Metric) -> Result<f64> {
    match metric {
        Metric::OutageClosed => outage_probability(p),
        Metric::RateDet => Ok(achievable_rate(p, p.gamma2_bar)),
        Metric::HarvestDet => Ok(harvested_energy(p, p.gamma1_bar)),
        Metric::RhoStarAtMeanGains => balancing_rho(p, p.gamma1_bar, p.gamma2_bar),
        Metric::OutageMc | Metric::RateMean | Metric::HarvestMean => {
            unreachable!("Monte Carlo metrics are handled by the caller")
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigurePreset {
    /// Harvest vs d1.
    Fig4,
    /// Outage vs backscatter SNR.
    Fig5,
    /// Rate vs SNR at 5 m.
    Fig6a,
    /// Rate vs SNR at 10 m.
    Fig6b,
    /// Rate and harvest vs ρ at 5 m.
    Fig7a,
    /// Rate and harvest vs ρ at 10 m.
    Fig7b,
}

impl FigurePreset {
    pub const ALL: [FigurePreset; 6] = [
        FigurePreset::Fig4,
        FigurePreset::Fig5,
        FigurePreset::Fig6a,
        FigurePreset::Fig6b,
        FigurePreset::Fig7a,
        FigurePreset::Fig7b,
    ];

    pub fn id(self) -> &'static str {
        match self {
            FigurePreset::Fig4 => "fig4",
            FigurePreset::Fig5 => "fig5",
            FigurePreset::Fig6a => "fig6a",
            FigurePreset::Fig6b => "fig6b",
            FigurePreset::Fig7a => "fig7a",
            FigurePreset::Fig7b => "fig7b",
        }
    }

    /// Parameters shared by every curve of the preset.
    pub fn base(self) -> SystemParams {
        let d = |d: f64| SystemParams {
            d1: d,
            d2: d,
            ..Default::default()
        };
        match self {
            FigurePreset::Fig4 => SystemParams::default(),
            FigurePreset::Fig5 => SystemParams {
                psi_override: Some(FIG5_PSI),
                ..Default::default()
            },
            FigurePreset::Fig6a => d(5.0),
            FigurePreset::Fig6b => d(10.0),
            FigurePreset::Fig7a => SystemParams { eta: 0.3, ..d(5.0) },
            FigurePreset::Fig7b => SystemParams { eta: 0.3, ..d(10.0) },
        }
    }

    pub fn specs(self) -> Vec<SweepSpec> {
        let base = self.base();
        let grid = |axis: &str, values: &[f64], outer: (&str, &[f64]), inner: (&str, &[f64]), metrics: &[Metric]| {
            let mut specs = Vec::new();
            for &a in outer.1 {
                for &b in inner.1 {
                    let mut s =
                        SweepSpec::new(axis, values.to_vec(), base.clone()).metrics(metrics);
                    s.labels = vec![(outer.0.to_string(), a), (inner.0.to_string(), b)];
                    specs.push(s);
                }
            }
            specs
        };
        let snr = snr_grid_db();
        match self {
            FigurePreset::Fig4 => grid(
                "d1",
                &distance_grid(),
                ("omega1_db", &[0.0, 5.0]),
                ("alpha", &PRESET_ALPHAS),
                &[Metric::HarvestDet, Metric::HarvestMean],
            ),
            FigurePreset::Fig5 => grid(
                "omega2_db",
                &snr,
                ("alpha", &[0.1, 0.5]),
                ("rho", &[0.3, 0.7]),
                &[Metric::OutageClosed, Metric::OutageMc],
            ),
            FigurePreset::Fig6a | FigurePreset::Fig6b => grid(
                "omega2_db",
                &snr,
                ("rho", &[base.rho]),
                ("alpha", &PRESET_ALPHAS),
                &[Metric::RateDet, Metric::RateMean],
            ),
            FigurePreset::Fig7a | FigurePreset::Fig7b => grid(
                "rho",
                &rho_grid(),
                ("eta", &[base.eta]),
                ("alpha", &PRESET_ALPHAS),
                &[
                    Metric::HarvestDet,
                    Metric::RateDet,
                    Metric::HarvestMean,
                    Metric::RateMean,
                    Metric::RhoStarAtMeanGains,
                ],
            ),
        }
    }
}

impl FromStr for FigurePreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigurePreset::ALL
            .into_iter()
            .find(|p| p.id() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

pub const PRESET_ALPHAS: [f64; 3] = [0.1, 0.3, 0.5];

/// 0 dB to 20 dB in 2 dB steps.
pub fn snr_grid_db() -> Vec<f64> {
    (0..=10).map(|i| f64::from(2 * i)).collect()
}

/// 1 m to 20 m in 1 m steps.
pub fn distance_grid() -> Vec<f64> {
    (1..=20).map(f64::from).collect()
}

/// 0.05 to 0.95 in steps of 0.05.
pub fn rho_grid() -> Vec<f64> {
    (1..=19).map(|i| f64::from(i) / 20.0).collect()
}

/// The sweep specs of a figure preset, by id.
pub fn figure_preset(id: &str) -> Result<Vec<SweepSpec>> {
    Ok(id.parse::<FigurePreset>()?.specs())
}

/// Runs every curve of a preset and stacks them into one table.
pub fn run_figure(
    preset: FigurePreset,
    mc_trials: u64,
    seed: u64,
    mc: &MonteCarlo,
    overrides: &[(String, f64)],
) -> Result<SweepTable> {
    let mut base = preset.base();
    for (k, v) in overrides {
        base.set(k, *v)?;
    }
    let tables = preset
        .specs()
        .into_iter()
        .map(|mut s| {
            for (k, v) in overrides {
                s.base.set(k, *v)?;
            }
            s.mc_trials = mc_trials;
            s.seed = seed;
            run_sweep_with(&s, mc)
        })
        .collect::<Result<Vec<_>>>()?;
    SweepTable::stack(tables, base, seed)
}

/// First crossing of two curves after dividing each by its own scale,
/// located by linear interpolation between grid points.
pub fn normalized_crossing(
    xs: &[f64],
    a: &[f64],
    a_scale: f64,
    b: &[f64],
    b_scale: f64,
) -> Option<f64> {
    let diff: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(a, b)| a / a_scale - b / b_scale)
        .collect();
    for i in 1..diff.len().min(xs.len()) {
        let (d0, d1) = (diff[i - 1], diff[i]);
        if d0 == 0.0 {
            return Some(xs[i - 1]);
        }
        if d0.signum() != d1.signum() {
            let t = d0 / (d0 - d1);
            return Some(xs[i - 1] + t * (xs[i] - xs[i - 1]));
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidSweep(format!("unknown format `{other}`"))),
        }
    }
}

/// `value` rounded to 12 significant digits, without exponent where the
/// magnitude allows, trailing zeros trimmed.
pub fn format_sig12(value: f64) -> String {
    if value == 0.0 {
        return "0".into();
    }
    let sci = format!("{value:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("`e` format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        trim_zeros(format!("{value:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn write_csv<W: Write>(table: &SweepTable, mut w: W) -> Result<()> {
    writeln!(w, "{}", table.columns.join(","))?;
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|&v| format_sig12(v)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn write_json<W: Write>(table: &SweepTable, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, table)?;
    writeln!(w)?;
    Ok(())
}

/// Writes `table` to `destination`, or standard output when `None`.
pub fn emit(table: &SweepTable, format: OutputFormat, destination: Option<&Path>) -> Result<()> {
    let write = |w: &mut dyn Write| match format {
        OutputFormat::Csv => write_csv(table, w),
        OutputFormat::Json => write_json(table, w),
    };
    match destination {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
        }
    }
    Ok(())
}
