//! Command-line front end. Exit codes: 0 success, 1 usage or I/O error,
//! 2 invalid parameters.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{error::ErrorKind, Args, Parser, Subcommand};

use crate::analytics::{
    balancing_rho, backscatter_snr, conditional_rate_outage_prob, energy_shortage_prob,
    expected_link_metrics, harvested_energy, outage_probability,
};
use crate::channel::ChannelDraw;
use crate::error::{Error, Result};
use crate::monte_carlo::{Estimand, MonteCarlo};
use crate::params::{load_params, SystemParams};
use crate::sweep::{
    format_sig12, run_figure, run_sweep_with, write_csv, write_json, FigurePreset, Metric,
    OutputFormat, SweepSpec, SweepTable, DEFAULT_MC_TRIALS, DEFAULT_SEED,
};

#[derive(Debug, Parser)]
#[command(name = "backscatter", version, about = "Ambient backscatter link analyzer")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Parameter file in `key = value` format.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override one parameter, e.g. `--set rho=0.5` or `--set omega2_db=10`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Output format; `analyze`, `simulate` and `balance` default to text.
    #[arg(long, value_parser = ["csv", "json"], global = true)]
    format: Option<String>,

    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Monte Carlo trials per point.
    #[arg(long, default_value_t = DEFAULT_MC_TRIALS, global = true)]
    trials: u64,

    #[arg(long, default_value_t = DEFAULT_SEED, global = true)]
    seed: u64,

    /// Worker threads for Monte Carlo; results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form link metrics at the mean channel gains.
    Analyze,
    /// Monte Carlo estimates next to the closed form.
    Simulate,
    /// Sweep one parameter.
    Sweep {
        /// Parameter key, or omega1_db / omega2_db.
        #[arg(long)]
        axis: String,
        /// Comma-separated axis values.
        #[arg(long, value_delimiter = ',', conflicts_with = "range", required_unless_present = "range")]
        values: Vec<f64>,
        /// Inclusive `start:stop:step` grid.
        #[arg(long)]
        range: Option<String>,
        /// Comma-separated metric names.
        #[arg(long, value_delimiter = ',', default_value = "outage_closed")]
        metrics: Vec<String>,
    },
    /// Regenerate the data behind a figure preset.
    Figure {
        /// fig4, fig5, fig6a, fig6b, fig7a or fig7b.
        id: String,
    },
    /// Balancing power split for given gains.
    Balance {
        /// |h1|^2; defaults to gamma1_bar.
        #[arg(long)]
        g1: Option<f64>,
        /// |h2|^2; defaults to gamma2_bar.
        #[arg(long)]
        g2: Option<f64>,
    },
}

/// Parses `argv` (program name first) and runs the command.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    0
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    1
                }
            };
        }
    };

    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_validation() {
                2
            } else {
                1
            }
        }
    }
}

fn parse_overrides(raw: &[String]) -> Result<Vec<(String, f64)>> {
    raw.iter()
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::InvalidSweep(format!("`--set {kv}` is not KEY=VALUE")))?;
            let (k, v) = (k.trim(), v.trim());
            if !SystemParams::is_known_key(k) {
                return Err(Error::UnknownKey {
                    line: 0,
                    key: k.to_string(),
                });
            }
            let v: f64 = v
                .parse()
                .map_err(|_| Error::InvalidSweep(format!("`{v}` is not a number")))?;
            Ok((k.to_string(), v))
        })
        .collect()
}

fn base_params(common: &CommonArgs) -> Result<SystemParams> {
    let mut p = match &common.config {
        Some(path) => load_params(path)?,
        None => SystemParams::default(),
    };
    for (k, v) in parse_overrides(&common.overrides)? {
        p.set(&k, v)?;
    }
    p.validated()
}

fn parse_range(raw: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidSweep(format!("`{raw}` is not start:stop:step"));
    let parts: Vec<f64> = raw
        .split(':')
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as u64;
    Ok((0..=count).map(|i| start + i as f64 * step).collect())
}

fn monte_carlo(common: &CommonArgs) -> MonteCarlo {
    match common.workers {
        Some(w) => MonteCarlo::with_workers(w),
        None => MonteCarlo::new(),
    }
}

fn format(common: &CommonArgs) -> Option<OutputFormat> {
    common
        .format
        .as_deref()
        .map(|f| f.parse().expect("clap restricts --format"))
}

/// Key/value report printed by `analyze`, `simulate` and `balance`.
fn write_report(
    fields: &[(&str, f64)],
    params: &SystemParams,
    seed: u64,
    format: Option<OutputFormat>,
    w: &mut dyn Write,
) -> Result<()> {
    let table = || SweepTable {
        columns: fields.iter().map(|(k, _)| k.to_string()).collect(),
        rows: vec![fields.iter().map(|(_, v)| *v).collect()],
        params: params.clone(),
        seed,
    };
    match format {
        None => {
            for (k, v) in fields {
                writeln!(w, "{k} = {}", format_sig12(*v))?;
            }
            Ok(())
        }
        Some(OutputFormat::Csv) => write_csv(&table(), w),
        Some(OutputFormat::Json) => write_json(&table(), w),
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    let common = &cli.common;
    let mut file;
    let out: &mut dyn Write = match &common.out {
        Some(path) => {
            file = BufWriter::new(File::create(path)?);
            &mut file
        }
        None => stdout,
    };

    match &cli.command {
        Command::Analyze => {
            let p = base_params(common)?;
            let m = expected_link_metrics(&p, &ChannelDraw::at_mean(p.gamma1_bar, p.gamma2_bar));
            let fields = [
                ("psi", m.psi),
                ("sensing_energy", m.sensing_energy),
                ("backscatter_energy", m.backscatter_energy),
                ("harvested_energy", m.harvested_energy),
                ("rate", m.rate),
                ("in_outage", f64::from(u8::from(m.in_outage))),
                ("energy_shortage_prob", energy_shortage_prob(&p)?),
                ("conditional_rate_outage_prob", conditional_rate_outage_prob(&p)?),
                ("outage_probability", outage_probability(&p)?),
                ("rho_star", balancing_rho(&p, p.gamma1_bar, p.gamma2_bar)?),
            ];
            write_report(&fields, &p, common.seed, format(common), out)?;
        }
        Command::Simulate => {
            let p = base_params(common)?;
            let mc = monte_carlo(common);
            let (n, seed) = (common.trials, common.seed);
            let outage = mc.estimate(&p, Estimand::Outage, n, seed)?;
            let rate = mc.estimate(&p, Estimand::MeanRate, n, seed)?;
            let harvest = mc.estimate(&p, Estimand::MeanHarvest, n, seed)?;
            let fields = [
                ("trials", n as f64),
                ("seed", seed as f64),
                ("outage_mc", outage.estimate),
                ("outage_mc_se", outage.std_error),
                ("outage_closed", outage_probability(&p)?),
                ("rate_mean", rate.estimate),
                ("rate_mean_se", rate.std_error),
                ("harvest_mean", harvest.estimate),
                ("harvest_mean_se", harvest.std_error),
                ("harvest_closed", harvested_energy(&p, p.gamma1_bar)),
            ];
            write_report(&fields, &p, seed, format(common), out)?;
        }
        Command::Sweep {
            axis,
            values,
            range,
            metrics,
        } => {
            let p = base_params(common)?;
            let values = match range {
                Some(r) => parse_range(r)?,
                None => values.clone(),
            };
            let metrics = metrics
                .iter()
                .map(|m| m.trim().parse::<Metric>())
                .collect::<Result<Vec<_>>>()?;
            let mut spec = SweepSpec::new(axis.clone(), values, p).metrics(&metrics);
            spec.mc_trials = common.trials;
            spec.seed = common.seed;
            let table = run_sweep_with(&spec, &monte_carlo(common))?;
            write_table(&table, format(common), out)?;
        }
        Command::Figure { id } => {
            let preset: FigurePreset = id.parse()?;
            if common.config.is_some() {
                return Err(Error::InvalidSweep(
                    "figure presets take --set overrides, not --config".into(),
                ));
            }
            let overrides = parse_overrides(&common.overrides)?;
            let table = run_figure(
                preset,
                common.trials,
                common.seed,
                &monte_carlo(common),
                &overrides,
            )?;
            write_table(&table, format(common), out)?;
        }
        Command::Balance { g1, g2 } => {
            let p = base_params(common)?;
            let g1 = g1.unwrap_or(p.gamma1_bar);
            let g2 = g2.unwrap_or(p.gamma2_bar);
            if !(g1 >= 0.0) || !(g2 >= 0.0) {
                return Err(Error::Domain("channel gains must be non-negative".into()));
            }
            let rho_star = balancing_rho(&p, g1, g2)?;
            let at_balance = SystemParams {
                rho: rho_star,
                ..p.clone()
            };
            let fields = [
                ("g1", g1),
                ("g2", g2),
                ("rho_star", rho_star),
                ("harvested_energy", harvested_energy(&at_balance, g1)),
                ("backscatter_snr", backscatter_snr(&at_balance, g2)),
            ];
            write_report(&fields, &p, common.seed, format(common), out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn write_table(table: &SweepTable, format: Option<OutputFormat>, w: &mut dyn Write) -> Result<()> {
    match format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => write_csv(table, w),
        OutputFormat::Json => write_json(table, w),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("backscatter").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn analyze_defaults() {
        let (code, out, _) = run_args(&["analyze"]);
        assert_eq!(code, 0);
        assert!(out.contains("psi = 0.9006\n"), "{out}");
        assert!(out.contains("rate = 18051.8871071\n"), "{out}");
        assert!(out.contains("outage_probability = 1\n"), "{out}");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_args(&[]).0, 1);
        assert_eq!(run_args(&["frobnicate"]).0, 1);
        assert_eq!(run_args(&["--help"]).0, 0);
        assert_eq!(run_args(&["analyze", "--set", "rho=1.5"]).0, 2);
        assert_eq!(run_args(&["analyze", "--set", "speed=3"]).0, 2);
        assert_eq!(run_args(&["figure", "fig9"]).0, 2);
        assert_eq!(run_args(&["balance", "--g1", "0", "--g2", "0"]).0, 2);
    }

    #[test]
    fn range_grid() {
        assert_eq!(parse_range("0:20:5").unwrap(), vec![0.0, 5.0, 10.0, 15.0, 20.0]);
        assert_eq!(parse_range("0.1:0.3:0.1").unwrap().len(), 3);
        assert!(parse_range("1:0:1").is_err());
        assert!(parse_range("0:1").is_err());
    }

    #[test]
    fn balance_prints_rho_star() {
        let (code, out, _) = run_args(&[
            "balance", "--g1", "1", "--g2", "1", "--set", "omega1=1", "--set", "omega2=1",
        ]);
        assert_eq!(code, 0);
        assert!(out.contains("rho_star = 0.689655172414\n"), "{out}");
    }

    #[test]
    fn sweep_csv() {
        let (code, out, _) = run_args(&[
            "sweep", "--axis", "omega2_db", "--values", "0", "--metrics", "rate_det",
        ]);
        assert_eq!(code, 0);
        assert_eq!(out, "omega2_db,rate_det\n0,18051.8871071\n");
    }
}
