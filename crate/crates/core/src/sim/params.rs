use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Codeword index streams are addressed as `m * M + j`, so `M²` must fit in a `u64`.
pub const MAX_MESSAGES: u64 = 1 << 31;

/// Default cap on the nominal codebook size `M²·n·B` (cells).
pub const DEFAULT_CELL_BUDGET: u128 = 1 << 53;

pub const DEFAULT_DELTA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    /// Sub-block length.
    pub n: usize,
    /// Number of sub-blocks `B`; `B − 1` fresh messages are sent.
    pub blocks: usize,
    /// Nominal rate in bits per channel use.
    pub rate: f64,
    /// Typicality slack.
    pub delta: f64,
    pub seed: u64,
    pub trials: usize,
}

impl SchemeParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::OutOfRange("n must be ≥ 1".into()));
        }
        if self.blocks < 2 {
            return Err(Error::OutOfRange(format!(
                "blocks must be ≥ 2, got {}",
                self.blocks
            )));
        }
        if !self.rate.is_finite() || self.rate < 0.0 {
            return Err(Error::OutOfRange(format!(
                "rate must be ≥ 0, got {}",
                self.rate
            )));
        }
        if self.delta.is_nan() || self.delta <= 0.0 {
            return Err(Error::OutOfRange(format!(
                "delta must be > 0, got {}",
                self.delta
            )));
        }
        if self.trials == 0 {
            return Err(Error::OutOfRange("trials must be ≥ 1".into()));
        }
        self.message_count().map(|_| ())
    }

    /// `M = floor(2^{nR})`.
    pub fn message_count(&self) -> Result<u64> {
        let exp = self.n as f64 * self.rate;
        let m = exp.exp2().floor();
        if m.is_nan() || m > MAX_MESSAGES as f64 {
            return Err(Error::ResourceLimit(format!(
                "2^(nR) = 2^{exp:.3} messages exceeds the limit of {MAX_MESSAGES}"
            )));
        }
        Ok((m as u64).max(1))
    }

    /// `log₂ M / n`, the rate actually carried per sub-block.
    pub fn realized_rate(&self) -> Result<f64> {
        Ok((self.message_count()? as f64).log2() / self.n as f64)
    }

    /// `R (B − 1) / B`: one sub-block carries no fresh information.
    pub fn effective_rate(&self) -> f64 {
        self.rate * (self.blocks - 1) as f64 / self.blocks as f64
    }

    /// Nominal number of codebook cells `M²·n·B`.
    pub fn codebook_cells(&self) -> Result<u128> {
        let m = self.message_count()? as u128;
        Ok(m * m * self.n as u128 * self.blocks as u128)
    }
}
