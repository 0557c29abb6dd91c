//! Monte Carlo simulation of the block-Markov scheme: random superposition
//! codebooks, a helper that cribs and decodes each sub-block, and backward
//! decoding at the receiver.

pub mod codebook;
pub mod params;
pub mod scheme;
pub mod typicality;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{AuxiliarySystem, ChannelSpec};
use crate::error::Result;
use crate::seed::{derive, rng};

pub use codebook::{generate_codebooks, Codebook};
pub use params::{SchemeParams, DEFAULT_CELL_BUDGET, DEFAULT_DELTA, MAX_MESSAGES};
pub use scheme::{
    backward_decode, decode_block, encoder_step, helper_end_decode, helper_step, run_trial,
    transmit_block, DecodeError, Decoded, EncoderStep, FaultInjection, HelperMode, HelperStep,
    SchemeModel, TrialOutcome, UseDraws,
};
pub use typicality::TypicalityTest;

const CODEBOOK_LABEL: u64 = 0xc0de;
const CHANNEL_LABEL: u64 = 0xc4a7;

/// 97.5% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub helper_mode: HelperMode,
    /// Reuse one codebook (drawn from the root seed) for every trial.
    pub fixed_codebook: bool,
    pub fault: Option<FaultInjection>,
    pub cell_budget: u128,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            helper_mode: HelperMode::Decoding,
            fixed_codebook: false,
            fault: None,
            cell_budget: DEFAULT_CELL_BUDGET,
        }
    }
}

/// Wilson score interval `(low, high, halfwidth)` at 95%.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0), half)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub params: SchemeParams,
    pub options: SimOptions,
    pub messages: u64,
    pub realized_rate: f64,
    pub effective_rate: f64,
    pub trials: usize,
    pub errors: usize,
    pub overall_error_rate: f64,
    pub wilson_halfwidth: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    /// Per sub-block `1..B−1`: fraction of trials where the helper's estimate was wrong.
    pub helper_error_rate: Vec<f64>,
    /// Per message `m_1..m_{B−1}`: fraction of trials where the receiver's estimate was wrong.
    pub decoder_error_rate: Vec<f64>,
    pub helper_no_index: usize,
    pub helper_ambiguous: usize,
    pub decoder_no_index: usize,
    pub decoder_ambiguous: usize,
}

#[derive(Debug, Clone, Default)]
struct Tally {
    errors: usize,
    helper: Vec<usize>,
    decoder: Vec<usize>,
    helper_no_index: usize,
    helper_ambiguous: usize,
    decoder_no_index: usize,
    decoder_ambiguous: usize,
}

impl Tally {
    fn new(k: usize) -> Self {
        Self {
            helper: vec![0; k],
            decoder: vec![0; k],
            ..Default::default()
        }
    }

    fn add(mut self, o: &TrialOutcome) -> Self {
        self.errors += usize::from(!o.success());
        for (c, e) in self.helper.iter_mut().zip(o.helper_errors()) {
            *c += usize::from(e);
        }
        for (c, e) in self.decoder.iter_mut().zip(o.decoder_errors()) {
            *c += usize::from(e);
        }
        let count = |v: &[Decoded], e| v.iter().filter(|d| **d == Err(e)).count();
        self.helper_no_index += count(&o.helper, DecodeError::NoIndex);
        self.helper_ambiguous += count(&o.helper, DecodeError::Ambiguous);
        self.decoder_no_index += count(&o.decoder, DecodeError::NoIndex);
        self.decoder_ambiguous += count(&o.decoder, DecodeError::Ambiguous);
        self
    }

    fn merge(mut self, o: Tally) -> Self {
        self.errors += o.errors;
        self.helper
            .iter_mut()
            .zip(o.helper)
            .for_each(|(a, b)| *a += b);
        self.decoder
            .iter_mut()
            .zip(o.decoder)
            .for_each(|(a, b)| *a += b);
        self.helper_no_index += o.helper_no_index;
        self.helper_ambiguous += o.helper_ambiguous;
        self.decoder_no_index += o.decoder_no_index;
        self.decoder_ambiguous += o.decoder_ambiguous;
        self
    }
}

/// Outcome of trial `k`, seeded by `params.seed + k`.
pub fn simulate_trial(
    params: &SchemeParams,
    ch: &ChannelSpec,
    aux: &AuxiliarySystem,
    model: &SchemeModel,
    opts: &SimOptions,
    fixed: Option<&Codebook>,
    k: usize,
) -> Result<TrialOutcome> {
    let trial_seed = params.seed.wrapping_add(k as u64);
    let fresh;
    let code = match fixed {
        Some(c) => c,
        None => {
            fresh = Codebook::generate(
                params,
                aux,
                derive(trial_seed, CODEBOOK_LABEL),
                opts.cell_budget,
            )?;
            &fresh
        }
    };
    let mut r = rng(derive(trial_seed, CHANNEL_LABEL));
    Ok(run_trial(
        ch,
        aux,
        model,
        code,
        opts.helper_mode,
        opts.fault,
        &mut r,
    ))
}

pub fn estimate_error(
    params: &SchemeParams,
    ch: &ChannelSpec,
    aux: &AuxiliarySystem,
) -> Result<SimReport> {
    estimate_error_with(params, ch, aux, &SimOptions::default())
}

pub fn estimate_error_with(
    params: &SchemeParams,
    ch: &ChannelSpec,
    aux: &AuxiliarySystem,
    opts: &SimOptions,
) -> Result<SimReport> {
    params.validate()?;
    aux.check_compatible(ch)?;
    let model = SchemeModel::new(ch, aux, params.delta)?;
    let fixed = if opts.fixed_codebook {
        Some(Codebook::generate(
            params,
            aux,
            derive(params.seed, CODEBOOK_LABEL),
            opts.cell_budget,
        )?)
    } else {
        // Fail on the budget before spawning trials.
        Codebook::generate(params, aux, 0, opts.cell_budget)?;
        None
    };
    let k = params.blocks - 1;
    let tally = (0..params.trials)
        .into_par_iter()
        .map(|t| {
            simulate_trial(params, ch, aux, &model, opts, fixed.as_ref(), t)
                .map(|o| Tally::new(k).add(&o))
        })
        .try_reduce(|| Tally::new(k), |a, b| Ok(a.merge(b)))?;
    let n = params.trials as f64;
    let (low, high, half) = wilson_interval(tally.errors, params.trials);
    Ok(SimReport {
        params: *params,
        options: *opts,
        messages: params.message_count()?,
        realized_rate: params.realized_rate()?,
        effective_rate: params.effective_rate(),
        trials: params.trials,
        errors: tally.errors,
        overall_error_rate: tally.errors as f64 / n,
        wilson_halfwidth: half,
        wilson_low: low,
        wilson_high: high,
        helper_error_rate: tally.helper.iter().map(|&c| c as f64 / n).collect(),
        decoder_error_rate: tally.decoder.iter().map(|&c| c as f64 / n).collect(),
        helper_no_index: tally.helper_no_index,
        helper_ambiguous: tally.helper_ambiguous,
        decoder_no_index: tally.decoder_no_index,
        decoder_ambiguous: tally.decoder_ambiguous,
    })
}
