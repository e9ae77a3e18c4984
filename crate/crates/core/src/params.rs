//! Link parameters, their admissible ranges, and the `key = value` config format.
//!
//! Powers never appear on their own: the source and the backscatter circuit
//! enter only through their noise-normalized SNRs `omega1 = P/N0` and
//! `omega2 = P_b/N0`, so every energy in this crate is measured in joules per
//! unit noise power.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result, ValidationReport};

/// All model inputs for one backscatter device and its two hops.
///
/// Field names in the config format (and in sweep axes) are the serde names,
/// e.g. `t` for the slot duration and `e_m` for the microcontroller energy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemParams {
    /// Fraction of received power routed to the harvester.
    pub rho: f64,
    /// Fraction of the slot spent on compressive sensing.
    pub alpha: f64,
    /// RF-to-DC conversion efficiency.
    pub eta: f64,
    /// Reflection coefficient.
    pub beta: f64,
    /// Path loss exponent.
    pub theta: f64,
    /// Slot duration in seconds.
    #[serde(rename = "t")]
    pub slot_duration: f64,
    /// Bandwidth in hertz.
    #[serde(rename = "b")]
    pub bandwidth: f64,
    /// Source transmit SNR, linear.
    pub omega1: f64,
    /// Backscatter circuit SNR, linear.
    pub omega2: f64,
    /// Source to device distance in meters.
    pub d1: f64,
    /// Device to gateway distance in meters.
    pub d2: f64,
    /// Required bits per slot.
    pub phi: f64,
    /// Mean of |h1|^2.
    pub gamma1_bar: f64,
    /// Mean of |h2|^2.
    pub gamma2_bar: f64,
    /// Sensing sample rate, samples per second.
    #[serde(rename = "f")]
    pub sample_rate: f64,
    /// Number of wideband signals sensed.
    #[serde(rename = "m")]
    pub num_signals: u32,
    /// Energy per sensing sample.
    #[serde(rename = "e")]
    pub energy_per_sample: f64,
    /// Microcontroller energy per slot.
    #[serde(rename = "e_m")]
    pub mcu_energy: f64,
    /// Number of devices, only used by the sum-rate helper.
    #[serde(rename = "n")]
    pub num_devices: u32,
    /// Replaces the computed energy threshold when present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi_override: Option<f64>,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            rho: 0.3,
            alpha: 0.1,
            eta: 0.5,
            beta: 0.5,
            theta: 2.0,
            slot_duration: 1.0,
            bandwidth: 1e6,
            omega1: db_to_linear(5.0),
            omega2: 1.0,
            d1: 5.0,
            d2: 5.0,
            phi: 2000.0,
            gamma1_bar: 1.0,
            gamma2_bar: 1.0,
            sample_rate: 1000.0,
            num_signals: 5,
            energy_per_sample: 1e-6,
            mcu_energy: 1e-4,
            num_devices: 1,
            psi_override: None,
        }
    }
}

/// Config keys in the order they are written by [`SystemParams::to_config_string`].
pub const PARAM_KEYS: &[&str] = &[
    "rho",
    "alpha",
    "eta",
    "beta",
    "theta",
    "t",
    "b",
    "omega1",
    "omega2",
    "d1",
    "d2",
    "phi",
    "gamma1_bar",
    "gamma2_bar",
    "f",
    "m",
    "e",
    "e_m",
    "n",
    "psi_override",
];

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Distance-dependent attenuation divisor `d^theta`.
pub fn path_loss(distance: f64, theta: f64) -> Result<f64> {
    if !(distance > 0.0) || !distance.is_finite() {
        return Err(Error::Domain(format!(
            "path loss needs a positive distance, got {distance}"
        )));
    }
    Ok(distance.powf(theta))
}

fn to_count(key: &str, value: f64) -> Result<u32> {
    if value.is_finite() && value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
        Ok(value as u32)
    } else {
        Err(Error::Domain(format!(
            "{key} must be a non-negative integer, got {value}"
        )))
    }
}

impl SystemParams {
    /// Canonical field a key writes to; `_db` aliases resolve to their linear field.
    pub fn canonical_key(key: &str) -> Option<&'static str> {
        match key {
            "omega1_db" => Some("omega1"),
            "omega2_db" => Some("omega2"),
            _ => PARAM_KEYS.iter().copied().find(|k| *k == key),
        }
    }

    pub fn is_known_key(key: &str) -> bool {
        Self::canonical_key(key).is_some()
    }

    /// Reads a parameter by config key. SNR keys with a `_db` suffix return
    /// decibels; `psi_override` returns `None` when unset.
    pub fn get(&self, key: &str) -> Option<f64> {
        let v = match key {
            "rho" => self.rho,
            "alpha" => self.alpha,
            "eta" => self.eta,
            "beta" => self.beta,
            "theta" => self.theta,
            "t" => self.slot_duration,
            "b" => self.bandwidth,
            "omega1" => self.omega1,
            "omega2" => self.omega2,
            "omega1_db" => linear_to_db(self.omega1),
            "omega2_db" => linear_to_db(self.omega2),
            "d1" => self.d1,
            "d2" => self.d2,
            "phi" => self.phi,
            "gamma1_bar" => self.gamma1_bar,
            "gamma2_bar" => self.gamma2_bar,
            "f" => self.sample_rate,
            "m" => f64::from(self.num_signals),
            "e" => self.energy_per_sample,
            "e_m" => self.mcu_energy,
            "n" => f64::from(self.num_devices),
            "psi_override" => return self.psi_override,
            _ => return None,
        };
        Some(v)
    }

    /// Writes a parameter by config key without validating the result.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        match key {
            "rho" => self.rho = value,
            "alpha" => self.alpha = value,
            "eta" => self.eta = value,
            "beta" => self.beta = value,
            "theta" => self.theta = value,
            "t" => self.slot_duration = value,
            "b" => self.bandwidth = value,
            "omega1" => self.omega1 = value,
            "omega2" => self.omega2 = value,
            "omega1_db" => self.omega1 = db_to_linear(value),
            "omega2_db" => self.omega2 = db_to_linear(value),
            "d1" => self.d1 = value,
            "d2" => self.d2 = value,
            "phi" => self.phi = value,
            "gamma1_bar" => self.gamma1_bar = value,
            "gamma2_bar" => self.gamma2_bar = value,
            "f" => self.sample_rate = value,
            "m" => self.num_signals = to_count(key, value)?,
            "e" => self.energy_per_sample = value,
            "e_m" => self.mcu_energy = value,
            "n" => self.num_devices = to_count(key, value)?,
            "psi_override" => self.psi_override = Some(value),
            _ => return Err(Error::UnknownAxis(key.to_string())),
        }
        Ok(())
    }

    /// Copy with one key replaced.
    pub fn with(&self, key: &str, value: f64) -> Result<Self> {
        let mut p = self.clone();
        p.set(key, value)?;
        Ok(p)
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }

    /// Fails with [`Error::Validation`] unless every bound holds.
    pub fn validated(self) -> Result<Self> {
        let report = validate(&self);
        if report.is_empty() {
            Ok(self)
        } else {
            Err(Error::Validation(report))
        }
    }

    /// `d1^theta`.
    pub fn path_loss_1(&self) -> f64 {
        self.d1.powf(self.theta)
    }

    /// `d2^theta`.
    pub fn path_loss_2(&self) -> f64 {
        self.d2.powf(self.theta)
    }

    /// Serializes into the config format; [`parse_params`] inverts it exactly.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        for key in PARAM_KEYS {
            match (key, self.get(key)) {
                (&"m", Some(v)) | (&"n", Some(v)) => {
                    let _ = writeln!(out, "{key} = {}", v as u64);
                }
                (_, Some(v)) => {
                    let _ = writeln!(out, "{key} = {v:?}");
                }
                (_, None) => {}
            }
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_config_string())?;
        Ok(())
    }
}

/// Lists every field outside its admissible range.
pub fn validate(p: &SystemParams) -> ValidationReport {
    let mut r = ValidationReport::default();
    let in_range = |x: f64, ok: bool| x.is_finite() && ok;

    if !in_range(p.rho, p.rho > 0.0 && p.rho <= 1.0) {
        r.push("rho", "rho must satisfy 0<ρ≤1");
    }
    if !in_range(p.alpha, p.alpha >= 0.0 && p.alpha < 1.0) {
        r.push("alpha", "alpha must satisfy 0≤α<1");
    }
    if !in_range(p.eta, p.eta > 0.0 && p.eta <= 1.0) {
        r.push("eta", "eta must satisfy 0<η≤1");
    }
    if !in_range(p.beta, p.beta > 0.0 && p.beta <= 1.0) {
        r.push("beta", "beta must satisfy 0<β≤1");
    }
    if !in_range(p.theta, p.theta >= 1.0) {
        r.push("theta", "theta must satisfy θ≥1");
    }
    let positive: [(&'static str, f64); 8] = [
        ("t", p.slot_duration),
        ("b", p.bandwidth),
        ("omega1", p.omega1),
        ("omega2", p.omega2),
        ("d1", p.d1),
        ("d2", p.d2),
        ("gamma1_bar", p.gamma1_bar),
        ("gamma2_bar", p.gamma2_bar),
    ];
    for (field, v) in positive {
        if !in_range(v, v > 0.0) {
            r.push(field, format!("{field} must be positive and finite"));
        }
    }
    let non_negative: [(&'static str, f64); 4] = [
        ("phi", p.phi),
        ("f", p.sample_rate),
        ("e", p.energy_per_sample),
        ("e_m", p.mcu_energy),
    ];
    for (field, v) in non_negative {
        if !in_range(v, v >= 0.0) {
            r.push(field, format!("{field} must be non-negative and finite"));
        }
    }
    if p.num_devices < 1 {
        r.push("n", "n must be at least 1");
    }
    if let Some(psi) = p.psi_override {
        if !in_range(psi, psi >= 0.0) {
            r.push("psi_override", "psi_override must be non-negative and finite");
        }
    }
    r
}

/// Parses the flat config format. Unlisted keys keep their defaults.
pub fn parse_params(text: &str) -> Result<SystemParams> {
    let mut params = SystemParams::default();
    let mut seen: Vec<&'static str> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let key = key.trim();
        let value = value.trim();

        let canonical = SystemParams::canonical_key(key).ok_or_else(|| Error::UnknownKey {
            line: line_no,
            key: key.to_string(),
        })?;
        if seen.contains(&canonical) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("`{canonical}` set more than once"),
            });
        }
        seen.push(canonical);

        let number: f64 = value.parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("`{value}` is not a number"),
        })?;
        params.set(key, number).map_err(|e| match e {
            Error::Domain(message) => Error::Parse {
                line: line_no,
                message,
            },
            other => other,
        })?;
    }

    params.validated()
}

pub fn load_params(path: impl AsRef<Path>) -> Result<SystemParams> {
    let text = fs::read_to_string(path)?;
    parse_params(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        assert!(validate(&SystemParams::default()).is_empty());
    }

    #[test]
    fn rho_zero_rejected() {
        let p = SystemParams {
            rho: 0.0,
            ..Default::default()
        };
        let r = validate(&p);
        assert_eq!(r.len(), 1);
        assert_eq!(r.violations[0].message, "rho must satisfy 0<ρ≤1");
    }

    #[test]
    fn alpha_one_rejected() {
        let p = SystemParams {
            alpha: 1.0,
            ..Default::default()
        };
        let r = validate(&p);
        assert_eq!(r.len(), 1);
        assert_eq!(r.violations[0].message, "alpha must satisfy 0≤α<1");
    }

    #[test]
    fn nan_is_never_valid() {
        let p = SystemParams {
            d2: f64::NAN,
            psi_override: Some(f64::NAN),
            ..Default::default()
        };
        let r = validate(&p);
        assert!(r.contains("d2"));
        assert!(r.contains("psi_override"));
    }

    #[test]
    fn path_loss_values() {
        assert_eq!(path_loss(5.0, 2.0).unwrap(), 25.0);
        assert_eq!(path_loss(1.0, 3.7).unwrap(), 1.0);
        assert_eq!(path_loss(10.0, 2.0).unwrap(), 100.0);
        assert!(matches!(path_loss(0.0, 2.0), Err(Error::Domain(_))));
        assert!(matches!(path_loss(-1.0, 2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn empty_config_gives_defaults() {
        let p = parse_params("").unwrap();
        assert_eq!(p, SystemParams::default());
        assert_eq!(p.eta, 0.5);
        assert_eq!(p.bandwidth, 1e6);
        assert_eq!(p.beta, 0.5);
        assert_eq!((p.d1, p.d2), (5.0, 5.0));
        assert_eq!(p.phi, 2000.0);
        assert_eq!(p.theta, 2.0);
        assert_eq!(p.rho, 0.3);
    }

    #[test]
    fn single_override() {
        let p = parse_params("rho = 0.5\n").unwrap();
        assert_eq!(
            p,
            SystemParams {
                rho: 0.5,
                ..Default::default()
            }
        );
    }

    #[test]
    fn out_of_range_value() {
        match parse_params("rho = 1.5") {
            Err(Error::Validation(r)) => assert!(r.contains("rho")),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn comments_scientific_and_db() {
        let text = "# link\nb = 2e6 # wider\n\nomega1_db = 10\nomega2_db=-3\n";
        let p = parse_params(text).unwrap();
        assert_eq!(p.bandwidth, 2e6);
        assert!((p.omega1 - 10.0).abs() < 1e-12);
        assert!((p.omega2 - 10f64.powf(-0.3)).abs() < 1e-15);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_params("rho 0.3"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_params("\nrho = abc"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_params("RHO = 0.3"),
            Err(Error::UnknownKey { line: 1, .. })
        ));
        assert!(matches!(
            parse_params("omega1 = 2\nomega1_db = 3"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_params("m = 2.5"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn psi_override_round_trips() {
        let p = SystemParams {
            psi_override: Some(0.25),
            ..Default::default()
        };
        assert_eq!(parse_params(&p.to_config_string()).unwrap(), p);
    }
}
