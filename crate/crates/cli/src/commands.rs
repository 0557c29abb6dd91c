use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use cribcap_core::example::{self, EXAMPLE_V_SIZE};
use cribcap_core::search::{self, MapPair, SearchBudget, SearchOptions};
use cribcap_core::sim::{self, HelperMode, SchemeParams, SimOptions, SimReport};
use cribcap_core::{AuxiliarySystem, ChannelSpec, Mapping};

use crate::args::{BoundsArgs, CapacityArgs, ExampleArgs, GlobalArgs, RatesArgs, SimulateArgs};
use crate::report::Report;

/// A problem with an input file: unreadable, malformed or failing validation.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())).into())
}

pub fn load_channel(path: &Path) -> Result<ChannelSpec> {
    let text = read(path)?;
    ChannelSpec::from_json_str(&text).with_context(|| format!("channel file {}", path.display()))
}

pub fn load_aux(path: &Path) -> Result<AuxiliarySystem> {
    let text = read(path)?;
    AuxiliarySystem::from_json_str(&text).with_context(|| format!("aux file {}", path.display()))
}

fn load_pair(path: &Path, ch: &ChannelSpec) -> Result<AuxiliarySystem> {
    let aux = load_aux(path)?;
    aux.check_compatible(ch)
        .with_context(|| format!("aux file {} against the channel", path.display()))?;
    Ok(aux)
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(v)? + "\n";
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

#[derive(Serialize)]
struct Config<'a, T: Serialize> {
    #[serde(flatten)]
    args: &'a T,
    #[serde(flatten)]
    global: &'a GlobalArgs,
}

fn report(command: &str, args: &impl Serialize, global: &GlobalArgs) -> Result<Report> {
    Report::new(command, &Config { args, global })
}

pub fn bounds(a: &BoundsArgs, g: &GlobalArgs) -> Result<Report> {
    let ch = load_channel(&a.channel)?;
    let mut r = report("bounds", a, g)?;
    let b = search::cardinality_bounds(&ch);
    r.insert("L", as_number(b.l))?;
    r.insert("v_max", as_number(b.v_max))?;
    r.insert("u_max", as_number(b.u_max))?;
    Ok(r)
}

/// Bounds overflowing `u64` are written as strings.
fn as_number(v: u128) -> serde_json::Value {
    u64::try_from(v).map_or_else(|_| v.to_string().into(), Into::into)
}

pub fn rates(a: &RatesArgs, g: &GlobalArgs) -> Result<Report> {
    let ch = load_channel(&a.channel)?;
    let aux = load_pair(&a.aux, &ch)?;
    let rp = cribcap_core::rate_pair(&ch, &aux)?;
    let mut r = report("rates", a, g)?;
    r.insert("i_uv_y", rp.i_uv_y)?;
    r.insert("i_u_x_given_vt", rp.i_u_x_given_vt)?;
    r.insert("rate_bound", rp.min())?;
    r.insert("help_rate", cribcap_core::help_rate(&ch))?;
    Ok(r)
}

/// The maps of `aux` as tables, accepting 0-1 kernels.
fn deterministic_pair(aux: &AuxiliarySystem) -> Option<MapPair> {
    match (
        aux.helper().clone().simplified(),
        aux.encoder().clone().simplified(),
    ) {
        (Mapping::Deterministic { table: h, .. }, Mapping::Deterministic { table: f, .. }) => {
            Some(MapPair {
                helper: h,
                encoder: f,
            })
        }
        _ => None,
    }
}

pub fn capacity(a: &CapacityArgs, g: &GlobalArgs) -> Result<Report> {
    let ch = load_channel(&a.channel)?;
    let mut extra = Vec::new();
    for path in &a.with_aux {
        let aux = load_pair(path, &ch)?;
        if aux.u_size() != a.u_size || aux.v_size() != a.v_size {
            return Err(InputError(format!(
                "{}: aux has |U|={}, |V|={} but the search uses {} and {}",
                path.display(),
                aux.u_size(),
                aux.v_size(),
                a.u_size,
                a.v_size
            ))
            .into());
        }
        let pair = deterministic_pair(&aux)
            .ok_or_else(|| InputError(format!("{}: maps must be deterministic", path.display())))?;
        extra.push(pair);
    }
    if a.include_example_maps {
        let shape = (ch.x_size(), ch.s_size(), ch.t_size());
        if shape != (4, 4, 2) || a.v_size != EXAMPLE_V_SIZE {
            return Err(InputError(
                "--include-example-maps needs |X|=|S|=4, |T|=2 and --v-size 4".into(),
            )
            .into());
        }
        extra.push(example::example_map_pair(a.u_size)?);
    }
    let budget = SearchBudget {
        max_map_candidates: a.max_map_candidates,
        restarts: a.restarts,
        grid_resolution: a.grid_resolution,
        local_steps: a.local_steps,
        seed: g.seed,
    };
    let opts = SearchOptions {
        extra_candidates: extra,
        helper_ignores_v: a.helper_ignores_v,
        stochastic: a.stochastic,
    };
    let res = search::capacity_lower_bound_with(&ch, a.u_size, a.v_size, &budget, &opts)?;
    if let Some(p) = &a.emit_aux {
        write_json(p, &res.best_aux.to_file())?;
    }
    let mut r = report("capacity", a, g)?;
    r.insert("best_rate", res.best_rate)?;
    r.insert("rate_pair", res.rate_pair)?;
    r.insert("evaluations", res.evaluations)?;
    r.insert("candidates_evaluated", res.candidates_evaluated)?;
    r.insert("seed", res.seed)?;
    r.insert("bounds", search::cardinality_bounds(&ch))?;
    r.insert("best_candidate", &res.best_candidate)?;
    r.insert("best_aux", res.best_aux.to_file())?;
    if let Some(s) = &res.stochastic {
        r.insert(
            "stochastic",
            serde_json::json!({
                "deterministic_rate": s.deterministic_rate,
                "refined_rate": s.refined_rate,
                "gap": s.gap(),
                "refined_pair": s.refined_pair,
                "refined_aux": s.refined_aux.to_file(),
            }),
        )?;
    }
    Ok(r)
}

#[derive(Serialize)]
struct SimRow {
    n: usize,
    blocks: usize,
    rate: f64,
    delta: f64,
    messages: u64,
    realized_rate: f64,
    effective_rate: f64,
    trials: usize,
    errors: usize,
    overall_error_rate: f64,
    wilson_low: f64,
    wilson_high: f64,
    wilson_halfwidth: f64,
}

impl From<&SimReport> for SimRow {
    fn from(s: &SimReport) -> Self {
        Self {
            n: s.params.n,
            blocks: s.params.blocks,
            rate: s.params.rate,
            delta: s.params.delta,
            messages: s.messages,
            realized_rate: s.realized_rate,
            effective_rate: s.effective_rate,
            trials: s.trials,
            errors: s.errors,
            overall_error_rate: s.overall_error_rate,
            wilson_low: s.wilson_low,
            wilson_high: s.wilson_high,
            wilson_halfwidth: s.wilson_halfwidth,
        }
    }
}

pub fn simulate(a: &SimulateArgs, g: &GlobalArgs) -> Result<Report> {
    let ch = load_channel(&a.channel)?;
    let aux = load_pair(&a.aux, &ch)?;
    let all_params: Vec<SchemeParams> =
        a.n.iter()
            .map(|&n| SchemeParams {
                n,
                blocks: a.blocks,
                rate: a.rate,
                delta: a.delta,
                seed: g.seed,
                trials: a.trials,
            })
            .collect();
    let opts = SimOptions {
        helper_mode: if a.oracle_helper {
            HelperMode::Oracle
        } else {
            HelperMode::Decoding
        },
        fixed_codebook: a.fixed_codebook,
        fault: None,
        cell_budget: a.cell_budget,
    };
    // validate every point before running any
    for p in &all_params {
        sim::Codebook::generate(p, &aux, 0, a.cell_budget)?;
    }
    let reports = all_params
        .iter()
        .map(|p| sim::estimate_error_with(p, &ch, &aux, &opts))
        .collect::<cribcap_core::Result<Vec<_>>>()?;
    let mut r = report("simulate", a, g)?;
    if let [single] = reports.as_slice() {
        r.extend(single)?;
    } else {
        r.insert("reports", &reports)?;
    }
    r.set_rows(&reports.iter().map(SimRow::from).collect::<Vec<_>>())?;
    Ok(r)
}

pub fn example_cmd(a: &ExampleArgs, g: &GlobalArgs) -> Result<Report> {
    let ch = example::make_example_channel();
    if let Some(p) = &a.emit_channel {
        write_json(p, &ch.to_file())?;
    }
    if let Some(p) = &a.emit_aux {
        write_json(p, &example::make_example_aux(a.alpha)?.aux.to_file())?;
    }
    let mut r = report("example", a, g)?;
    let b = example::baselines();
    r.insert("baselines", b)?;
    r.insert(
        "ordering_holds",
        b.oblivious < b.cribbing_lb && b.cribbing_lb < b.cognizant,
    )?;
    match a.alpha_sweep {
        Some(s) => {
            let rows = example::sweep(&example::alpha_grid(s.lo, s.hi, s.step)?)?;
            let best = rows
                .iter()
                .fold(None::<&example::SweepRow>, |acc, row| match acc {
                    Some(b) if b.rate_bound >= row.rate_bound => Some(b),
                    _ => Some(row),
                })
                .copied();
            r.insert("argmax", best)?;
            r.insert("rows", &rows)?;
            r.set_rows(&rows)?;
        }
        None => {
            let row = example::sweep_row(&ch, a.alpha)?;
            r.extend(row)?;
            r.set_rows(&[row])?;
        }
    }
    if a.probe {
        let p =
            example::strict_gap_probe(a.probe_u_size, a.probe_v_size, a.probe_candidates, g.seed)?;
        r.insert("probe", p)?;
    }
    Ok(r)
}
