//! Block-Markov transmission with a cribbing helper, and both decoders.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{build_joint, sample_index, AuxiliarySystem, ChannelSpec};
use crate::error::Result;
use crate::prob::marginalize;

use super::codebook::Codebook;
use super::typicality::{Scanner, TypicalityTest};

/// Why a decoder produced no index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecodeError {
    NoIndex,
    Ambiguous,
}

pub type Decoded = std::result::Result<u64, DecodeError>;

/// Typicality tests for the helper, over `(U, X, V, T)`, and for the receiver, over `(U, V, Y)`.
#[derive(Debug, Clone)]
pub struct SchemeModel {
    pub helper_test: TypicalityTest,
    pub decoder_test: TypicalityTest,
    nu: usize,
    nv: usize,
    nt: usize,
    nx: usize,
    ny: usize,
}

impl SchemeModel {
    pub fn new(ch: &ChannelSpec, aux: &AuxiliarySystem, delta: f64) -> Result<Self> {
        let joint = build_joint(ch, aux)?;
        let uxvt = marginalize(&joint, &["U", "X", "V", "T"])?;
        let uvy = marginalize(&joint, &["U", "V", "Y"])?;
        Ok(Self {
            helper_test: TypicalityTest::new(uxvt.values().to_vec(), delta),
            decoder_test: TypicalityTest::new(uvy.values().to_vec(), delta),
            nu: aux.u_size(),
            nv: aux.v_size(),
            nt: ch.t_size(),
            nx: ch.x_size(),
            ny: ch.y_size(),
        })
    }

    #[inline]
    fn helper_cell(&self, u: usize, x: usize, v: usize, t: usize) -> usize {
        ((u * self.nx + x) * self.nv + v) * self.nt + t
    }

    #[inline]
    fn decoder_cell(&self, u: usize, v: usize, y: usize) -> usize {
        (u * self.nv + v) * self.ny + y
    }

    pub fn u_size(&self) -> usize {
        self.nu
    }
}

/// The helper during one sub-block: `t_i = h(s_i, v_i)` with the center it believes in.
pub struct HelperStep<'a> {
    aux: &'a AuxiliarySystem,
    center: Vec<usize>,
}

impl<'a> HelperStep<'a> {
    /// `decoded_prev` is the helper's estimate `m̂_{b−1}`.
    pub fn new(aux: &'a AuxiliarySystem, code: &Codebook, b: usize, decoded_prev: u64) -> Self {
        Self {
            aux,
            center: code.center(b, decoded_prev),
        }
    }

    pub fn center(&self) -> &[usize] {
        &self.center
    }

    /// Sees only the current state symbol; `r` drives a stochastic helper.
    pub fn step(&self, i: usize, s_i: usize, r: f64) -> usize {
        self.aux
            .helper()
            .apply(self.aux.helper_row(s_i, self.center[i]), r)
    }
}

/// The encoder during one sub-block: `x_i = f(u_i(m_b|m_{b−1}), v_i(m_{b−1}), t_i)`.
pub struct EncoderStep<'a> {
    aux: &'a AuxiliarySystem,
    center: Vec<usize>,
    satellite: Vec<usize>,
}

impl<'a> EncoderStep<'a> {
    pub fn new(aux: &'a AuxiliarySystem, code: &Codebook, b: usize, m: u64, m_prev: u64) -> Self {
        Self {
            aux,
            center: code.center(b, m_prev),
            satellite: code.satellite(b, m, m_prev),
        }
    }

    /// Sees only the current helper symbol.
    pub fn step(&self, i: usize, t_i: usize, r: f64) -> usize {
        let row = self.aux.encoder_row(self.satellite[i], self.center[i], t_i);
        self.aux.encoder().apply(row, r)
    }
}

pub fn helper_step(
    aux: &AuxiliarySystem,
    code: &Codebook,
    b: usize,
    i: usize,
    s_i: usize,
    decoded_prev: u64,
    r: f64,
) -> usize {
    let v = code.center_symbol(b, decoded_prev, i);
    aux.helper().apply(aux.helper_row(s_i, v), r)
}

#[allow(clippy::too_many_arguments)]
pub fn encoder_step(
    aux: &AuxiliarySystem,
    code: &Codebook,
    b: usize,
    i: usize,
    m: u64,
    m_prev: u64,
    t_i: usize,
    r: f64,
) -> usize {
    let v = code.center_symbol(b, m_prev, i);
    let u = code.satellite_symbol(b, m, m_prev, i, v);
    aux.encoder().apply(aux.encoder_row(u, v, t_i), r)
}

/// Uniform draws consumed at one channel use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UseDraws {
    pub helper: f64,
    pub encoder: f64,
    pub channel: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSignals {
    pub t: Vec<usize>,
    pub x: Vec<usize>,
    pub y: Vec<usize>,
}

/// Runs one sub-block in the per-use order helper → encoder → channel.
///
/// Only the first `states.len()` uses are run, so a truncated input yields a
/// prefix of the full output.
pub fn transmit_block(
    ch: &ChannelSpec,
    helper: &HelperStep<'_>,
    encoder: &EncoderStep<'_>,
    states: &[usize],
    draws: &[UseDraws],
) -> BlockSignals {
    let mut out = BlockSignals {
        t: Vec::with_capacity(states.len()),
        x: Vec::with_capacity(states.len()),
        y: Vec::with_capacity(states.len()),
    };
    for (i, (&s, d)) in states.iter().zip(draws).enumerate() {
        let t = helper.step(i, s, d.helper);
        let x = encoder.step(i, t, d.encoder);
        let y = sample_index(ch.w_row(x, s), d.channel);
        out.t.push(t);
        out.x.push(x);
        out.y.push(y);
    }
    out
}

/// Unique `j` with `(u^(b)(j|m̂_{b−1}), x, v, t)` jointly typical; a single-message
/// codebook decodes to `0` without a test.
pub fn helper_end_decode(
    model: &SchemeModel,
    code: &Codebook,
    b: usize,
    decoded_prev: u64,
    x: &[usize],
    t: &[usize],
) -> Decoded {
    if code.messages() == 1 {
        return Ok(0);
    }
    let v = code.center(b, decoded_prev);
    let mut scan = Scanner::new(&model.helper_test);
    let mut found = None;
    for j in 0..code.messages() {
        let typical = scan.check((0..code.n()).map(|i| {
            let u = code.satellite_symbol(b, j, decoded_prev, i, v[i]);
            model.helper_cell(u, x[i], v[i], t[i])
        }));
        if typical {
            if found.is_some() {
                return Err(DecodeError::Ambiguous);
            }
            found = Some(j);
        }
    }
    found.ok_or(DecodeError::NoIndex)
}

/// Unique `j` with `(u^(b)(m|j), v^(b)(j), y)` jointly typical, `m` being the
/// already decoded message of block `b`.
pub fn decode_block(
    model: &SchemeModel,
    code: &Codebook,
    b: usize,
    m: u64,
    y: &[usize],
) -> Decoded {
    if code.messages() == 1 {
        return Ok(0);
    }
    let mut scan = Scanner::new(&model.decoder_test);
    let mut found = None;
    for j in 0..code.messages() {
        let typical = scan.check(
            code.pair_symbols(b, m, j)
                .zip(y)
                .map(|((u, v), &y)| model.decoder_cell(u, v, y)),
        );
        if typical {
            if found.is_some() {
                return Err(DecodeError::Ambiguous);
            }
            found = Some(j);
        }
    }
    found.ok_or(DecodeError::NoIndex)
}

/// Backward decoding from the last block with the known final message `0`.
///
/// Entry `k` of the result is the outcome for message `m_{k+1}`, decoded in
/// block `k + 1` (0-based). The first block's output is never used. After a
/// failure the next-earlier block is decoded with satellite index `0`.
pub fn backward_decode(
    model: &SchemeModel,
    code: &Codebook,
    y_blocks: &[Vec<usize>],
) -> Vec<Decoded> {
    let nb = code.blocks();
    let mut out = vec![Err(DecodeError::NoIndex); nb - 1];
    let mut m = 0u64;
    for b in (1..nb).rev() {
        let r = decode_block(model, code, b, m, &y_blocks[b]);
        m = r.unwrap_or(0);
        out[b - 1] = r;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HelperMode {
    /// The helper uses its own estimates of the previous messages.
    #[default]
    Decoding,
    /// The helper is handed the true previous messages.
    Oracle,
}

/// Forces the helper's estimate after block `block` (0-based) to `index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultInjection {
    pub block: usize,
    pub index: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    /// Messages `m_1..m_{B−1}`.
    pub messages: Vec<u64>,
    /// Helper estimates after blocks `1..B−1`.
    pub helper: Vec<Decoded>,
    /// Receiver estimates of `m_1..m_{B−1}`.
    pub decoder: Vec<Decoded>,
}

impl TrialOutcome {
    pub fn helper_errors(&self) -> Vec<bool> {
        wrong(&self.helper, &self.messages)
    }
    pub fn decoder_errors(&self) -> Vec<bool> {
        wrong(&self.decoder, &self.messages)
    }
    pub fn success(&self) -> bool {
        !self.decoder_errors().into_iter().any(|e| e)
    }
}

fn wrong(est: &[Decoded], truth: &[u64]) -> Vec<bool> {
    est.iter().zip(truth).map(|(e, &m)| *e != Ok(m)).collect()
}

/// One run over `B` sub-blocks. Messages are uniform, states IID `P_S`, and
/// every use consumes one state draw plus three uniforms from `rng`.
pub fn run_trial<R: Rng + ?Sized>(
    ch: &ChannelSpec,
    aux: &AuxiliarySystem,
    model: &SchemeModel,
    code: &Codebook,
    mode: HelperMode,
    fault: Option<FaultInjection>,
    rng: &mut R,
) -> TrialOutcome {
    let nb = code.blocks();
    let n = code.n();
    let mm = code.messages();
    let messages: Vec<u64> = (0..nb - 1).map(|_| rng.random_range(0..mm)).collect();
    let msg = |b: usize| if b < nb - 1 { messages[b] } else { 0 };
    let mut helper_est = Vec::with_capacity(nb - 1);
    let mut y_blocks = Vec::with_capacity(nb);
    let (mut m_prev, mut m_hat_prev) = (0u64, 0u64);
    for b in 0..nb {
        let m = msg(b);
        let believed = match mode {
            HelperMode::Decoding => m_hat_prev,
            HelperMode::Oracle => m_prev,
        };
        let states: Vec<usize> = (0..n)
            .map(|_| sample_index(ch.p_s().probs(), rng.random()))
            .collect();
        let draws: Vec<UseDraws> = (0..n)
            .map(|_| UseDraws {
                helper: rng.random(),
                encoder: rng.random(),
                channel: rng.random(),
            })
            .collect();
        let helper = HelperStep::new(aux, code, b, believed);
        let encoder = EncoderStep::new(aux, code, b, m, m_prev);
        let sig = transmit_block(ch, &helper, &encoder, &states, &draws);
        if b < nb - 1 {
            let mut est = helper_end_decode(model, code, b, believed, &sig.x, &sig.t);
            if let Some(f) = fault.filter(|f| f.block == b) {
                est = Ok(f.index);
            }
            m_hat_prev = est.unwrap_or(0);
            helper_est.push(est);
        }
        y_blocks.push(sig.y);
        m_prev = m;
    }
    let decoder = backward_decode(model, code, &y_blocks);
    TrialOutcome {
        messages,
        helper: helper_est,
        decoder,
    }
}
