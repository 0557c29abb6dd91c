use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "cribcap",
    version,
    about = "Achievable rates for state-dependent channels with a rate-limited cribbing helper"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalArgs {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Root seed for every randomized step.
    #[arg(long, global = true, env = "CRIBCAP_SEED", default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate I(UV;Y), I(U;X|VT) and their minimum for one auxiliary system.
    Rates(RatesArgs),
    /// Search for the best auxiliary system (a capacity lower bound).
    Capacity(CapacityArgs),
    /// Monte Carlo error rate of the block-Markov cribbing scheme.
    Simulate(SimulateArgs),
    /// The two-bit example channel and its α-family of schemes.
    Example(ExampleArgs),
    /// Alphabet-size bounds for the auxiliaries.
    Bounds(BoundsArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RatesArgs {
    /// Channel file (JSON).
    #[arg(long)]
    pub channel: PathBuf,
    /// Auxiliary-system file (JSON).
    #[arg(long)]
    pub aux: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoundsArgs {
    /// Channel file (JSON).
    #[arg(long)]
    pub channel: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CapacityArgs {
    /// Channel file (JSON).
    #[arg(long)]
    pub channel: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub u_size: usize,
    #[arg(long, default_value_t = 4)]
    pub v_size: usize,
    /// Map pairs (h, f) visited by the outer search.
    #[arg(long, default_value_t = 256)]
    pub max_map_candidates: usize,
    /// Hill-climb starts of each kind.
    #[arg(long, default_value_t = 4)]
    pub restarts: usize,
    /// Simplex grid resolution for start points.
    #[arg(long, default_value_t = 2)]
    pub grid_resolution: usize,
    /// Improving moves per step size.
    #[arg(long, default_value_t = 64)]
    pub local_steps: usize,
    /// Also evaluate the deterministic maps of these auxiliary files first.
    #[arg(long = "with-aux")]
    pub with_aux: Vec<PathBuf>,
    /// Also evaluate the example scheme's maps (example channel shape only).
    #[arg(long)]
    pub include_example_maps: bool,
    /// Only consider helpers that ignore V.
    #[arg(long)]
    pub helper_ignores_v: bool,
    /// Refine the best candidate over stochastic kernels.
    #[arg(long)]
    pub stochastic: bool,
    /// Write the best auxiliary system to this file.
    #[arg(long)]
    pub emit_aux: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    /// Channel file (JSON).
    #[arg(long)]
    pub channel: PathBuf,
    /// Auxiliary-system file (JSON).
    #[arg(long)]
    pub aux: PathBuf,
    /// Sub-block length; a comma-separated list runs a sweep.
    #[arg(long, value_delimiter = ',', default_value = "8")]
    pub n: Vec<usize>,
    /// Number of sub-blocks B.
    #[arg(long, default_value_t = 4)]
    pub blocks: usize,
    /// Rate in bits per channel use.
    #[arg(long, default_value_t = 0.5)]
    pub rate: f64,
    /// Typicality slack.
    #[arg(long, default_value_t = cribcap_core::sim::DEFAULT_DELTA)]
    pub delta: f64,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Reuse a single codebook across trials.
    #[arg(long)]
    pub fixed_codebook: bool,
    /// Give the helper the true previous messages.
    #[arg(long)]
    pub oracle_helper: bool,
    /// Cap on the nominal codebook size M²·n·B.
    #[arg(long, default_value_t = cribcap_core::sim::DEFAULT_CELL_BUDGET)]
    #[serde(serialize_with = "as_string")]
    pub cell_budget: u128,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExampleArgs {
    /// α of the scheme (decimal or fraction such as 1/3).
    #[arg(long, value_parser = parse_number, default_value = "1/3", conflicts_with = "alpha_sweep")]
    pub alpha: f64,
    /// α grid `lo:hi:step`, e.g. 0:1:0.01.
    #[arg(long, value_parser = parse_sweep)]
    pub alpha_sweep: Option<Sweep>,
    /// Write the example channel file here.
    #[arg(long)]
    pub emit_channel: Option<PathBuf>,
    /// Write the α-scheme auxiliary file here.
    #[arg(long)]
    pub emit_aux: Option<PathBuf>,
    /// Search for auxiliary systems that would reach rate 2.
    #[arg(long)]
    pub probe: bool,
    #[arg(long, default_value_t = 2000)]
    pub probe_candidates: usize,
    #[arg(long, default_value_t = 4)]
    pub probe_u_size: usize,
    #[arg(long, default_value_t = 4)]
    pub probe_v_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sweep {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

fn as_string<S: serde::Serializer>(v: &u128, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Accepts decimals and `p/q` fractions.
pub fn parse_number(s: &str) -> Result<f64, String> {
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let q = parse(q)?;
            if q == 0.0 {
                return Err("zero denominator".into());
            }
            Ok(parse(p)? / q)
        }
        None => parse(s),
    }
}

pub fn parse_sweep(s: &str) -> Result<Sweep, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, step] = parts[..] else {
        return Err(format!("expected lo:hi:step, got `{s}`"));
    };
    Ok(Sweep {
        lo: parse_number(lo)?,
        hi: parse_number(hi)?,
        step: parse_number(step)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn numbers_and_sweeps() {
        assert_eq!(parse_number("1/3").unwrap(), 1.0 / 3.0);
        assert_eq!(parse_number("0.25").unwrap(), 0.25);
        assert!(parse_number("1/0").is_err());
        let s = parse_sweep("0:1:0.01").unwrap();
        assert_eq!((s.lo, s.hi, s.step), (0.0, 1.0, 0.01));
        assert!(parse_sweep("0:1").is_err());
    }
}
