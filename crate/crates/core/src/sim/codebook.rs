//! Lazily evaluated random codebooks.
//!
//! Every symbol is a pure function of `(seed, block, codeword index, position)`,
//! so encoder, helper and decoder share one codebook without materializing the
//! `M² n B` satellite cells.

use crate::channel::{sample_index, AuxiliarySystem};
use crate::error::{Error, Result};
use crate::prob::{CondPmf, Pmf};
use crate::seed::{derive, mix64};

use super::params::{SchemeParams, DEFAULT_CELL_BUDGET};

const CENTER_KIND: u64 = 1;
const SATELLITE_KIND: u64 = 2;
const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn unit(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[derive(Debug, Clone)]
pub struct Codebook {
    seed: u64,
    n: usize,
    blocks: usize,
    messages: u64,
    p_v: Pmf,
    p_u_given_v: CondPmf,
    center_keys: Vec<u64>,
    satellite_keys: Vec<u64>,
}

/// Codebooks for `params` drawn from `params.seed` under the default cell budget.
pub fn generate_codebooks(params: &SchemeParams, aux: &AuxiliarySystem) -> Result<Codebook> {
    Codebook::generate(params, aux, params.seed, DEFAULT_CELL_BUDGET)
}

impl Codebook {
    /// Errors with [`Error::ResourceLimit`] when `M² n B` exceeds `cell_budget`.
    pub fn generate(
        params: &SchemeParams,
        aux: &AuxiliarySystem,
        seed: u64,
        cell_budget: u128,
    ) -> Result<Self> {
        params.validate()?;
        let cells = params.codebook_cells()?;
        if cells > cell_budget {
            return Err(Error::ResourceLimit(format!(
                "codebook needs M²·n·B = {cells} cells, above the budget of {cell_budget}"
            )));
        }
        let key = |kind: u64, b: usize| derive(seed, (kind << 32) | b as u64);
        Ok(Self {
            seed,
            n: params.n,
            blocks: params.blocks,
            messages: params.message_count()?,
            p_v: aux.p_v().clone(),
            p_u_given_v: aux.p_u_given_v().clone(),
            center_keys: (0..params.blocks).map(|b| key(CENTER_KIND, b)).collect(),
            satellite_keys: (0..params.blocks).map(|b| key(SATELLITE_KIND, b)).collect(),
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn blocks(&self) -> usize {
        self.blocks
    }
    /// `M`; codeword indices run over `0..M`.
    pub fn messages(&self) -> u64 {
        self.messages
    }

    #[inline]
    fn stream(key: u64, id: u64) -> u64 {
        derive(key, id)
    }

    #[inline]
    fn draw(stream: u64, i: usize) -> f64 {
        unit(mix64(stream.wrapping_add((i as u64).wrapping_mul(GOLDEN))))
    }

    /// Symbol `i` of cloud center `v^(b)(j)` (blocks are 0-based).
    #[inline]
    pub fn center_symbol(&self, b: usize, j: u64, i: usize) -> usize {
        let s = Self::stream(self.center_keys[b], j);
        sample_index(self.p_v.probs(), Self::draw(s, i))
    }

    /// Symbol `i` of satellite `u^(b)(m|j)`, given the center symbol `v_i^(b)(j)`.
    #[inline]
    pub fn satellite_symbol(&self, b: usize, m: u64, j: u64, i: usize, v: usize) -> usize {
        let s = Self::stream(self.satellite_keys[b], m * self.messages + j);
        sample_index(self.p_u_given_v.row(v), Self::draw(s, i))
    }

    pub fn center(&self, b: usize, j: u64) -> Vec<usize> {
        (0..self.n).map(|i| self.center_symbol(b, j, i)).collect()
    }

    pub fn satellite(&self, b: usize, m: u64, j: u64) -> Vec<usize> {
        let center = self.center(b, j);
        (0..self.n)
            .map(|i| self.satellite_symbol(b, m, j, i, center[i]))
            .collect()
    }

    /// Streaming `(u_i, v_i)` pairs of `(u^(b)(m|j), v^(b)(j))`.
    pub(crate) fn pair_symbols(
        &self,
        b: usize,
        m: u64,
        j: u64,
    ) -> impl Iterator<Item = (usize, usize)> + '_ {
        let cs = Self::stream(self.center_keys[b], j);
        let ss = Self::stream(self.satellite_keys[b], m * self.messages + j);
        (0..self.n).map(move |i| {
            let v = sample_index(self.p_v.probs(), Self::draw(cs, i));
            let u = sample_index(self.p_u_given_v.row(v), Self::draw(ss, i));
            (u, v)
        })
    }
}
