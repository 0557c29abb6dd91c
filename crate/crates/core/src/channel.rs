//! Problem instances and candidate auxiliary systems.
//!
//! Index conventions (all row-major, last component fastest):
//!
//! * channel rows `W(y | x, s)`: row `x * |S| + s`
//! * helper `h(s, v)` / `P(t | v, s)`: row `s * |V| + v`
//! * encoder `f(u, v, t)` / `P(x | u, v, t)`: row `(u * |V| + v) * |T| + t`
//! * `P(u, v)` as a flat vector: index `u * |V| + v`
//!
//! Product-alphabet symbols such as a pair of bits `(a, b)` are flattened the
//! same way, `a * 2 + b`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{self, Alphabet, CondPmf, JointTable, Pmf};

/// Names of the variables in [`build_joint`]'s table, in order.
pub const JOINT_VARS: [&str; 6] = ["S", "U", "V", "T", "X", "Y"];

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    pub x_alpha: Alphabet,
    pub s_alpha: Alphabet,
    pub y_alpha: Alphabet,
    pub t_alpha: Alphabet,
    w: CondPmf,
    p_s: Pmf,
}

impl ChannelSpec {
    pub fn new(
        x_alpha: Alphabet,
        s_alpha: Alphabet,
        y_alpha: Alphabet,
        t_alpha: Alphabet,
        w: CondPmf,
        p_s: Pmf,
    ) -> Result<Self> {
        let (nx, ns, ny) = (x_alpha.size(), s_alpha.size(), y_alpha.size());
        if t_alpha.size() < 2 {
            return Err(Error::OutOfRange(format!(
                "assistance alphabet must have at least 2 symbols, got {}",
                t_alpha.size()
            )));
        }
        if w.n_rows() != nx * ns {
            return Err(Error::DimensionMismatch(format!(
                "W has {} rows, expected |X|·|S| = {}",
                w.n_rows(),
                nx * ns
            )));
        }
        if w.n_cols() != ny {
            return Err(Error::DimensionMismatch(format!(
                "W rows have {} entries, expected |Y| = {ny}",
                w.n_cols()
            )));
        }
        if p_s.len() != ns {
            return Err(Error::DimensionMismatch(format!(
                "P_S has {} entries, expected |S| = {ns}",
                p_s.len()
            )));
        }
        Ok(Self {
            x_alpha,
            s_alpha,
            y_alpha,
            t_alpha,
            w,
            p_s,
        })
    }

    /// Builds a channel from plain sizes and matrices.
    pub fn from_parts(
        x_size: usize,
        s_size: usize,
        y_size: usize,
        t_size: usize,
        w_rows: Vec<Vec<f64>>,
        p_s: Vec<f64>,
    ) -> Result<Self> {
        ChannelFile {
            x_size,
            s_size,
            y_size,
            t_size,
            p_s,
            w: w_rows,
            labels: None,
        }
        .into_spec()
    }

    pub fn x_size(&self) -> usize {
        self.x_alpha.size()
    }
    pub fn s_size(&self) -> usize {
        self.s_alpha.size()
    }
    pub fn y_size(&self) -> usize {
        self.y_alpha.size()
    }
    pub fn t_size(&self) -> usize {
        self.t_alpha.size()
    }

    pub fn w(&self) -> &CondPmf {
        &self.w
    }

    /// `W(y | x, s)`.
    pub fn w_prob(&self, y: usize, x: usize, s: usize) -> f64 {
        self.w.get(x * self.s_size() + s, y)
    }

    pub fn w_row(&self, x: usize, s: usize) -> &[f64] {
        self.w.row(x * self.s_size() + s)
    }

    pub fn p_s(&self) -> &Pmf {
        &self.p_s
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: ChannelFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        file.into_spec()
    }

    pub fn to_file(&self) -> ChannelFile {
        let labels = |a: &Alphabet| a.labels().map(<[String]>::to_vec);
        let any_labels = [&self.x_alpha, &self.s_alpha, &self.y_alpha, &self.t_alpha]
            .iter()
            .any(|a| a.labels().is_some());
        ChannelFile {
            x_size: self.x_size(),
            s_size: self.s_size(),
            y_size: self.y_size(),
            t_size: self.t_size(),
            p_s: self.p_s.probs().to_vec(),
            w: self.w.to_rows(),
            labels: any_labels.then(|| ChannelLabels {
                x: labels(&self.x_alpha),
                s: labels(&self.s_alpha),
                y: labels(&self.y_alpha),
                t: labels(&self.t_alpha),
            }),
        }
    }
}

/// On-disk channel description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub x_size: usize,
    pub s_size: usize,
    pub y_size: usize,
    pub t_size: usize,
    #[serde(rename = "P_S")]
    pub p_s: Vec<f64>,
    /// `|X|·|S|` rows in `(x, s)` row-major order, each a distribution over `Y`.
    #[serde(rename = "W")]
    pub w: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<ChannelLabels>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ChannelLabels {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Vec<String>>,
}

fn alphabet(what: &str, size: usize, labels: Option<Vec<String>>) -> Result<Alphabet> {
    match labels {
        None => Alphabet::new(size).map_err(|_| Error::OutOfRange(format!("{what} must be ≥ 1"))),
        Some(l) => {
            if l.len() != size {
                return Err(Error::InvalidLabels(format!(
                    "{what}: {} labels for {size} symbols",
                    l.len()
                )));
            }
            Alphabet::with_labels(l)
        }
    }
}

impl ChannelFile {
    pub fn into_spec(self) -> Result<ChannelSpec> {
        let labels = self.labels.unwrap_or_default();
        let x = alphabet("x_size", self.x_size, labels.x)?;
        let s = alphabet("s_size", self.s_size, labels.s)?;
        let y = alphabet("y_size", self.y_size, labels.y)?;
        let t = alphabet("t_size", self.t_size, labels.t)?;
        let p_s = Pmf::new(self.p_s).map_err(|e| match e {
            Error::InvalidPmf(m) => Error::InvalidPmf(format!("P_S: {m}")),
            other => other,
        })?;
        if self.w.len() != self.x_size * self.s_size {
            return Err(Error::DimensionMismatch(format!(
                "W has {} rows, expected x_size·s_size = {}",
                self.w.len(),
                self.x_size * self.s_size
            )));
        }
        let ns = self.s_size;
        let w = CondPmf::new_named("W", self.w).map_err(|e| match e {
            Error::InvalidRow { what, row, reason } => Error::InvalidRow {
                what,
                row,
                reason: format!("(x={}, s={}) {reason}", row / ns, row % ns),
            },
            other => other,
        })?;
        ChannelSpec::new(x, s, y, t, w, p_s)
    }
}

/// A helper or encoder map: a deterministic function table or a stochastic kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum Mapping {
    Deterministic { table: Vec<usize>, range: usize },
    Kernel(CondPmf),
}

impl Mapping {
    pub fn deterministic(table: Vec<usize>, range: usize) -> Result<Self> {
        if let Some((row, &v)) = table.iter().enumerate().find(|(_, &v)| v >= range) {
            return Err(Error::InvalidRow {
                what: "deterministic map".into(),
                row,
                reason: format!("value {v} outside alphabet of size {range}"),
            });
        }
        Ok(Mapping::Deterministic { table, range })
    }

    pub fn domain_size(&self) -> usize {
        match self {
            Mapping::Deterministic { table, .. } => table.len(),
            Mapping::Kernel(k) => k.n_rows(),
        }
    }

    pub fn range_size(&self) -> usize {
        match self {
            Mapping::Deterministic { range, .. } => *range,
            Mapping::Kernel(k) => k.n_cols(),
        }
    }

    /// Probability of output `col` on input `row`.
    #[inline]
    pub fn prob(&self, row: usize, col: usize) -> f64 {
        match self {
            Mapping::Deterministic { table, .. } => {
                if table[row] == col {
                    1.0
                } else {
                    0.0
                }
            }
            Mapping::Kernel(k) => k.get(row, col),
        }
    }

    /// Output for input `row` given a uniform draw `r ∈ [0,1)` (ignored when deterministic).
    pub fn apply(&self, row: usize, r: f64) -> usize {
        match self {
            Mapping::Deterministic { table, .. } => table[row],
            Mapping::Kernel(k) => sample_index(k.row(row), r),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self, Mapping::Deterministic { .. })
    }

    /// The induced kernel (0-1 rows for a deterministic map).
    pub fn to_kernel(&self) -> CondPmf {
        match self {
            Mapping::Deterministic { table, range } => CondPmf::deterministic(table, *range)
                .expect("deterministic map validated on construction"),
            Mapping::Kernel(k) => k.clone(),
        }
    }

    /// Collapses a 0-1 kernel back to a function table.
    pub fn simplified(self) -> Self {
        match self {
            Mapping::Kernel(k) => match k.as_deterministic() {
                Some(table) => Mapping::Deterministic {
                    table,
                    range: k.n_cols(),
                },
                None => Mapping::Kernel(k),
            },
            d => d,
        }
    }
}

/// Inverse-CDF lookup; falls back to the last positive-mass symbol on round-off.
pub(crate) fn sample_index(p: &[f64], r: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &q) in p.iter().enumerate() {
        if q > 0.0 {
            acc += q;
            last = i;
            if r < acc {
                return i;
            }
        }
    }
    last
}

/// One candidate `(U, V, P_V, P_{U|V}, helper, encoder)` in the rate maximization.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliarySystem {
    pub u_alpha: Alphabet,
    pub v_alpha: Alphabet,
    p_v: Pmf,
    p_u_given_v: CondPmf,
    helper: Mapping,
    encoder: Mapping,
}

impl AuxiliarySystem {
    pub fn new(
        u_alpha: Alphabet,
        v_alpha: Alphabet,
        p_v: Pmf,
        p_u_given_v: CondPmf,
        helper: Mapping,
        encoder: Mapping,
    ) -> Result<Self> {
        let (nu, nv) = (u_alpha.size(), v_alpha.size());
        if p_v.len() != nv {
            return Err(Error::DimensionMismatch(format!(
                "P_V has {} entries, expected |V| = {nv}",
                p_v.len()
            )));
        }
        if p_u_given_v.n_rows() != nv || p_u_given_v.n_cols() != nu {
            return Err(Error::DimensionMismatch(format!(
                "P_U|V is {}x{}, expected |V|x|U| = {nv}x{nu}",
                p_u_given_v.n_rows(),
                p_u_given_v.n_cols()
            )));
        }
        if !helper.domain_size().is_multiple_of(nv) {
            return Err(Error::DimensionMismatch(format!(
                "helper map has {} rows, not a multiple of |V| = {nv}",
                helper.domain_size()
            )));
        }
        let t_size = helper.range_size();
        if encoder.domain_size() != nu * nv * t_size {
            return Err(Error::DimensionMismatch(format!(
                "encoder map has {} rows, expected |U|·|V|·|T| = {}",
                encoder.domain_size(),
                nu * nv * t_size
            )));
        }
        Ok(Self {
            u_alpha,
            v_alpha,
            p_v,
            p_u_given_v,
            helper,
            encoder,
        })
    }

    /// Factors a flat joint `P(u, v)` (index `u * |V| + v`) into `P_V · P_{U|V}`.
    /// Zero-mass `v` rows get a uniform `P_{U|V}`.
    pub fn from_puv(
        u_size: usize,
        v_size: usize,
        p_uv: &[f64],
        helper: Mapping,
        encoder: Mapping,
    ) -> Result<Self> {
        if p_uv.len() != u_size * v_size {
            return Err(Error::DimensionMismatch(format!(
                "P_UV has {} entries, expected {}",
                p_uv.len(),
                u_size * v_size
            )));
        }
        let joint = Pmf::new(p_uv.to_vec())?;
        let p = joint.probs();
        let mut p_v: Vec<f64> = (0..v_size)
            .map(|v| (0..u_size).map(|u| p[u * v_size + v]).sum())
            .collect();
        let total: f64 = p_v.iter().sum();
        p_v.iter_mut().for_each(|x| *x /= total);
        let rows = (0..v_size)
            .map(|v| {
                let mass: f64 = (0..u_size).map(|u| p[u * v_size + v]).sum();
                if mass > 0.0 {
                    let mut row: Vec<f64> = (0..u_size).map(|u| p[u * v_size + v] / mass).collect();
                    let s: f64 = row.iter().sum();
                    row.iter_mut().for_each(|x| *x /= s);
                    row
                } else {
                    vec![1.0 / u_size as f64; u_size]
                }
            })
            .collect();
        Self::new(
            Alphabet::new(u_size)?,
            Alphabet::new(v_size)?,
            Pmf::new(p_v)?,
            CondPmf::new_named("P_U|V", rows)?,
            helper,
            encoder,
        )
    }

    pub fn u_size(&self) -> usize {
        self.u_alpha.size()
    }
    pub fn v_size(&self) -> usize {
        self.v_alpha.size()
    }
    pub fn p_v(&self) -> &Pmf {
        &self.p_v
    }
    pub fn p_u_given_v(&self) -> &CondPmf {
        &self.p_u_given_v
    }
    pub fn helper(&self) -> &Mapping {
        &self.helper
    }
    pub fn encoder(&self) -> &Mapping {
        &self.encoder
    }

    /// Flat `P(u, v) = P_V(v) P_{U|V}(u|v)`, index `u * |V| + v`.
    pub fn p_uv(&self) -> Vec<f64> {
        let (nu, nv) = (self.u_size(), self.v_size());
        let mut out = vec![0.0; nu * nv];
        for u in 0..nu {
            for v in 0..nv {
                out[u * nv + v] = self.p_v.probs()[v] * self.p_u_given_v.get(v, u);
            }
        }
        out
    }

    pub fn p_uv_table(&self) -> Result<JointTable> {
        JointTable::new(
            vec![("U", self.u_alpha.clone()), ("V", self.v_alpha.clone())],
            self.p_uv(),
        )
    }

    #[inline]
    pub fn helper_row(&self, s: usize, v: usize) -> usize {
        s * self.v_size() + v
    }

    #[inline]
    pub fn encoder_row(&self, u: usize, v: usize, t: usize) -> usize {
        (u * self.v_size() + v) * self.helper.range_size() + t
    }

    /// The same system with both maps replaced by their induced kernels.
    pub fn with_kernels(&self) -> Self {
        Self {
            helper: Mapping::Kernel(self.helper.to_kernel()),
            encoder: Mapping::Kernel(self.encoder.to_kernel()),
            ..self.clone()
        }
    }

    /// Replaces `U` by `U' = (U, V)` (index `u * |V| + v`), keeping `V`.
    ///
    /// Both rate terms are unchanged, and `V` becomes a function of `U'`, so
    /// `V - U' - (X, T, S) - Y` holds for the resulting joint law.
    pub fn with_v_in_u(&self) -> Result<Self> {
        let (nu, nv) = (self.u_size(), self.v_size());
        let nt = self.helper.range_size();
        let wide = nu * nv;
        let rows = (0..nv)
            .map(|v| {
                let mut row = vec![0.0; wide];
                for u in 0..nu {
                    row[u * nv + v] = self.p_u_given_v.get(v, u);
                }
                row
            })
            .collect();
        let encoder = match &self.encoder {
            Mapping::Deterministic { table, range } => {
                let mut t2 = Vec::with_capacity(wide * nv * nt);
                for up in 0..wide {
                    for v in 0..nv {
                        for t in 0..nt {
                            t2.push(table[self.encoder_row(up / nv, v, t)]);
                        }
                    }
                }
                Mapping::deterministic(t2, *range)?
            }
            Mapping::Kernel(k) => {
                let mut r2 = Vec::with_capacity(wide * nv * nt);
                for up in 0..wide {
                    for v in 0..nv {
                        for t in 0..nt {
                            r2.push(k.row(self.encoder_row(up / nv, v, t)).to_vec());
                        }
                    }
                }
                Mapping::Kernel(CondPmf::new(r2)?)
            }
        };
        Self::new(
            Alphabet::new(wide)?,
            self.v_alpha.clone(),
            self.p_v.clone(),
            CondPmf::new_named("P_U|V", rows)?,
            self.helper.clone(),
            encoder,
        )
    }

    pub fn with_maps(&self, helper: Mapping, encoder: Mapping) -> Result<Self> {
        Self::new(
            self.u_alpha.clone(),
            self.v_alpha.clone(),
            self.p_v.clone(),
            self.p_u_given_v.clone(),
            helper,
            encoder,
        )
    }

    pub fn check_compatible(&self, ch: &ChannelSpec) -> Result<()> {
        let expect_helper = ch.s_size() * self.v_size();
        if self.helper.domain_size() != expect_helper || self.helper.range_size() != ch.t_size() {
            return Err(Error::DimensionMismatch(format!(
                "helper map is {}→{}, channel needs |S|·|V| = {expect_helper} → |T| = {}",
                self.helper.domain_size(),
                self.helper.range_size(),
                ch.t_size()
            )));
        }
        if self.encoder.range_size() != ch.x_size() {
            return Err(Error::DimensionMismatch(format!(
                "encoder map outputs {} symbols, channel has |X| = {}",
                self.encoder.range_size(),
                ch.x_size()
            )));
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: AuxFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        file.into_aux()
    }

    pub fn to_file(&self) -> AuxFile {
        let map_file = |m: &Mapping| match m {
            Mapping::Deterministic { table, .. } => MappingFile::Map(table.clone()),
            Mapping::Kernel(k) => MappingFile::Kernel(k.to_rows()),
        };
        AuxFile {
            u_size: self.u_size(),
            v_size: self.v_size(),
            t_size: self.helper.range_size(),
            x_size: self.encoder.range_size(),
            p_v: self.p_v.probs().to_vec(),
            p_u_given_v: self.p_u_given_v.to_rows(),
            helper: map_file(&self.helper),
            encoder: map_file(&self.encoder),
        }
    }
}

/// On-disk auxiliary system. Map tables follow the module-level index conventions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuxFile {
    pub u_size: usize,
    pub v_size: usize,
    pub t_size: usize,
    pub x_size: usize,
    #[serde(rename = "P_V")]
    pub p_v: Vec<f64>,
    /// One row per `v`, each a distribution over `U`.
    #[serde(rename = "P_U_given_V")]
    pub p_u_given_v: Vec<Vec<f64>>,
    pub helper: MappingFile,
    pub encoder: MappingFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MappingFile {
    Map(Vec<usize>),
    Kernel(Vec<Vec<f64>>),
}

impl MappingFile {
    fn into_mapping(self, what: &str, range: usize) -> Result<Mapping> {
        match self {
            MappingFile::Map(table) => Mapping::deterministic(table, range).map_err(|e| match e {
                Error::InvalidRow { row, reason, .. } => Error::InvalidRow {
                    what: what.into(),
                    row,
                    reason,
                },
                other => other,
            }),
            MappingFile::Kernel(rows) => {
                let k = CondPmf::new_named(what, rows)?;
                if k.n_cols() != range {
                    return Err(Error::DimensionMismatch(format!(
                        "{what} rows have {} entries, expected {range}",
                        k.n_cols()
                    )));
                }
                Ok(Mapping::Kernel(k))
            }
        }
    }
}

impl AuxFile {
    pub fn into_aux(self) -> Result<AuxiliarySystem> {
        let helper = self.helper.into_mapping("helper", self.t_size)?;
        let encoder = self.encoder.into_mapping("encoder", self.x_size)?;
        AuxiliarySystem::new(
            Alphabet::new(self.u_size)?,
            Alphabet::new(self.v_size)?,
            Pmf::new(self.p_v).map_err(|e| Error::InvalidPmf(format!("P_V: {e}")))?,
            CondPmf::new_named("P_U_given_V", self.p_u_given_v)?,
            helper,
            encoder,
        )
    }
}

/// The two terms of the rate bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePair {
    /// `I(UV;Y)`: what the receiver can resolve.
    pub i_uv_y: f64,
    /// `I(U;X|VT)`: what the cribbing helper can resolve.
    pub i_u_x_given_vt: f64,
}

impl RatePair {
    pub fn min(&self) -> f64 {
        self.i_uv_y.min(self.i_u_x_given_vt)
    }

    /// Larger minimum wins; ties go to the larger `I(UV;Y)`.
    pub fn better_than(&self, other: &RatePair) -> bool {
        let (a, b) = (self.min(), other.min());
        a > b || (a == b && self.i_uv_y > other.i_uv_y)
    }
}

/// `log₂ |T|`.
pub fn help_rate(ch: &ChannelSpec) -> f64 {
    (ch.t_size() as f64).log2()
}

/// The joint law of `(S, U, V, T, X, Y)`:
/// `P_S(s) P_UV(u,v) P_{T|VS}(t|v,s) P_{X|UVT}(x|u,v,t) W(y|x,s)`.
pub fn build_joint(ch: &ChannelSpec, aux: &AuxiliarySystem) -> Result<JointTable> {
    aux.check_compatible(ch)?;
    let p_s = ch.p_s().probs();
    let p_uv = aux.p_uv();
    let nv = aux.v_size();
    let vars = vec![
        ("S", ch.s_alpha.clone()),
        ("U", aux.u_alpha.clone()),
        ("V", aux.v_alpha.clone()),
        ("T", ch.t_alpha.clone()),
        ("X", ch.x_alpha.clone()),
        ("Y", ch.y_alpha.clone()),
    ];
    JointTable::from_fn(vars, |c| {
        let (s, u, v, t, x, y) = (c[0], c[1], c[2], c[3], c[4], c[5]);
        p_s[s]
            * p_uv[u * nv + v]
            * aux.helper().prob(aux.helper_row(s, v), t)
            * aux.encoder().prob(aux.encoder_row(u, v, t), x)
            * ch.w_prob(y, x, s)
    })
}

pub fn rate_pair(ch: &ChannelSpec, aux: &AuxiliarySystem) -> Result<RatePair> {
    let joint = build_joint(ch, aux)?;
    rate_pair_of_joint(&joint)
}

pub fn rate_pair_of_joint(joint: &JointTable) -> Result<RatePair> {
    Ok(RatePair {
        i_uv_y: prob::mutual_information(joint, &["U", "V"], &["Y"], &[])?,
        i_u_x_given_vt: prob::mutual_information(joint, &["U"], &["X"], &["V", "T"])?,
    })
}

/// `min{I(UV;Y), I(U;X|VT)}`.
pub fn rate_bound(ch: &ChannelSpec, aux: &AuxiliarySystem) -> Result<f64> {
    Ok(rate_pair(ch, aux)?.min())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{check_markov, marginalize, mutual_information};
    use approx::assert_abs_diff_eq;

    fn bsc(p: f64, t_size: usize) -> ChannelSpec {
        ChannelSpec::from_parts(
            2,
            1,
            2,
            t_size,
            vec![vec![1.0 - p, p], vec![p, 1.0 - p]],
            vec![1.0],
        )
        .unwrap()
    }

    /// U = X uniform binary, V and T ignored.
    fn copy_aux(t_size: usize) -> AuxiliarySystem {
        let enc: Vec<usize> = (0..2)
            .flat_map(|u| std::iter::repeat_n(u, t_size))
            .collect();
        AuxiliarySystem::new(
            Alphabet::new(2).unwrap(),
            Alphabet::new(1).unwrap(),
            Pmf::new(vec![1.0]).unwrap(),
            CondPmf::new(vec![vec![0.5, 0.5]]).unwrap(),
            Mapping::deterministic(vec![0], t_size).unwrap(),
            Mapping::deterministic(enc, 2).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn help_rate_values() {
        assert_eq!(help_rate(&bsc(0.1, 2)), 1.0);
        assert_eq!(help_rate(&bsc(0.1, 4)), 2.0);
        assert_abs_diff_eq!(help_rate(&bsc(0.1, 3)), 3f64.log2(), epsilon = 1e-15);
    }

    #[test]
    fn channel_requires_two_assistance_symbols() {
        let err =
            ChannelSpec::from_parts(2, 1, 2, 1, vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![1.0]);
        assert!(matches!(err, Err(Error::OutOfRange(_))));
    }

    #[test]
    fn channel_file_errors_name_the_row() {
        let text = r#"{"x_size":2,"s_size":2,"y_size":2,"t_size":2,"P_S":[0.5,0.5],
            "W":[[1,0],[0,1],[0.5,0.5],[0.7,0.7]]}"#;
        match ChannelSpec::from_json_str(text) {
            Err(Error::InvalidRow { what, row, reason }) => {
                assert_eq!(what, "W");
                assert_eq!(row, 3);
                assert!(reason.starts_with("(x=1, s=1)"), "{reason}");
            }
            other => panic!("unexpected {other:?}"),
        }
        let short = r#"{"x_size":2,"s_size":2,"y_size":2,"t_size":2,"P_S":[0.5,0.5],"W":[[1,0]]}"#;
        assert!(matches!(
            ChannelSpec::from_json_str(short),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn channel_file_roundtrip_with_labels() {
        let text = r#"{"x_size":2,"s_size":1,"y_size":2,"t_size":2,"P_S":[1.0],
            "W":[[0.9,0.1],[0.1,0.9]],"labels":{"x":["a","b"]}}"#;
        let ch = ChannelSpec::from_json_str(text).unwrap();
        assert_eq!(ch.x_alpha.label(1), "b");
        let back = serde_json::to_string(&ch.to_file()).unwrap();
        assert_eq!(ChannelSpec::from_json_str(&back).unwrap(), ch);
    }

    #[test]
    fn state_independent_product_law() {
        let ch = bsc(0.11, 2);
        let aux = copy_aux(2);
        let joint = build_joint(&ch, &aux).unwrap();
        assert_abs_diff_eq!(joint.total_mass(), 1.0, epsilon = 1e-12);
        let i_uv_y = mutual_information(&joint, &["U", "V"], &["Y"], &[]).unwrap();
        let i_x_y = mutual_information(&joint, &["X"], &["Y"], &[]).unwrap();
        assert_abs_diff_eq!(i_uv_y, i_x_y, epsilon = 1e-12);
        let rp = rate_pair(&ch, &aux).unwrap();
        assert_abs_diff_eq!(rp.i_u_x_given_vt, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rate_bound(&ch, &aux).unwrap(), i_x_y, epsilon = 1e-12);
    }

    #[test]
    fn joint_markov_and_marginals() {
        let ch = ChannelSpec::from_parts(
            2,
            2,
            2,
            2,
            vec![
                vec![0.9, 0.1],
                vec![0.3, 0.7],
                vec![0.2, 0.8],
                vec![0.5, 0.5],
            ],
            vec![0.4, 0.6],
        )
        .unwrap();
        let aux = AuxiliarySystem::new(
            Alphabet::new(2).unwrap(),
            Alphabet::new(2).unwrap(),
            Pmf::new(vec![0.3, 0.7]).unwrap(),
            CondPmf::new(vec![vec![0.2, 0.8], vec![0.6, 0.4]]).unwrap(),
            Mapping::Kernel(CondPmf::new(vec![vec![0.1, 0.9]; 4]).unwrap()),
            Mapping::deterministic(vec![0, 1, 1, 0, 1, 1, 0, 0], 2).unwrap(),
        )
        .unwrap();
        let joint = build_joint(&ch, &aux).unwrap();
        let s = marginalize(&joint, &["S"]).unwrap();
        assert_abs_diff_eq!(s.values()[0], 0.4, epsilon = 1e-15);
        let i = mutual_information(&joint, &["U", "V"], &["S"], &[]).unwrap();
        assert!(i < 1e-10);
        // chains implied by the factorization
        for chain in [
            [&["S", "T"][..], &["V"][..], &["U"][..]],
            [&["S"], &["T", "V"], &["U"]],
            [&["U", "V", "T"], &["X", "S"], &["Y"]],
        ] {
            assert!(
                check_markov(&joint, chain, 1e-10).unwrap().holds,
                "{chain:?}"
            );
        }
        // T depends on V directly, so V - U - (X,T,S) needs U to carry V
        let raw = check_markov(&joint, [&["V"], &["U"], &["X", "T", "S"]], 1e-10).unwrap();
        assert!(!raw.holds);
        let wide = aux.with_v_in_u().unwrap();
        let joint2 = build_joint(&ch, &wide).unwrap();
        let r = check_markov(&joint2, [&["V"], &["U"], &["X", "T", "S"]], 1e-10).unwrap();
        assert!(r.holds, "{r:?}");
        let (a, b) = (
            rate_pair(&ch, &aux).unwrap(),
            rate_pair(&ch, &wide).unwrap(),
        );
        assert_abs_diff_eq!(a.i_uv_y, b.i_uv_y, epsilon = 1e-12);
        assert_abs_diff_eq!(a.i_u_x_given_vt, b.i_u_x_given_vt, epsilon = 1e-12);
    }

    #[test]
    fn constant_u_gives_zero_helper_term() {
        let ch = bsc(0.2, 2);
        let aux = AuxiliarySystem::new(
            Alphabet::new(1).unwrap(),
            Alphabet::new(1).unwrap(),
            Pmf::new(vec![1.0]).unwrap(),
            CondPmf::new(vec![vec![1.0]]).unwrap(),
            Mapping::deterministic(vec![1], 2).unwrap(),
            Mapping::deterministic(vec![0, 1], 2).unwrap(),
        )
        .unwrap();
        assert_eq!(rate_pair(&ch, &aux).unwrap().i_u_x_given_vt, 0.0);
    }

    #[test]
    fn incompatible_aux_is_rejected() {
        let ch = bsc(0.2, 3);
        assert!(matches!(
            build_joint(&ch, &copy_aux(2)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn aux_file_roundtrip() {
        let aux = copy_aux(2);
        let text = serde_json::to_string(&aux.to_file()).unwrap();
        assert_eq!(AuxiliarySystem::from_json_str(&text).unwrap(), aux);
        let bad = text.replace("\"map\":[0]", "\"map\":[5]");
        assert!(matches!(
            AuxiliarySystem::from_json_str(&bad),
            Err(Error::InvalidRow { .. })
        ));
    }

    #[test]
    fn from_puv_factors_and_fills_empty_rows() {
        let aux = copy_aux(2);
        let p = [0.1, 0.0, 0.9, 0.0];
        let a = AuxiliarySystem::from_puv(2, 2, &p, aux.helper().clone(), aux.encoder().clone());
        // helper domain is |S|·|V| = 1 here, so it does not fit a 2-symbol V
        assert!(a.is_err());
        let h = Mapping::deterministic(vec![0, 1], 2).unwrap();
        let f = Mapping::deterministic(vec![0; 8], 2).unwrap();
        let a = AuxiliarySystem::from_puv(2, 2, &p, h, f).unwrap();
        assert_eq!(a.p_v().probs(), &[1.0, 0.0]);
        assert_eq!(a.p_u_given_v().row(1), &[0.5, 0.5]);
        let back = a.p_uv();
        for (x, y) in back.iter().zip(p) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-15);
        }
    }

    #[test]
    fn sample_index_respects_support() {
        assert_eq!(sample_index(&[0.0, 0.5, 0.5], 0.0), 1);
        assert_eq!(sample_index(&[0.0, 0.5, 0.5], 0.75), 2);
        assert_eq!(sample_index(&[0.5, 0.5, 0.0], 0.9999999999999), 1);
    }
}
