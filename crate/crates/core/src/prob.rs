//! Exact finite-alphabet probability engine.
//!
//! Everything here works on dense tables in double precision. Entropies are in
//! bits, with the conventions `0·log 0 = 0` and that conditional terms whose
//! conditioning event has zero mass contribute nothing.
//!
//! A [`JointTable`] is the workhorse: an ordered list of named variables and a
//! row-major array of probabilities (the last variable varies fastest).
//! Mutual informations are computed from marginal entropies,
//! `I(A;B|C) = H(AC) + H(BC) - H(ABC) - H(C)`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on total mass accepted by every constructor.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// A finite alphabet `{0, .., size-1}` with optional display labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    size: usize,
    labels: Option<Vec<String>>,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyAlphabet);
        }
        Ok(Self { size, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidLabels(format!("duplicate label `{l}`")));
            }
        }
        Ok(Self {
            size: labels.len(),
            labels: Some(labels),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Display string for symbol `i`: its label if present, else the index.
    pub fn label(&self, i: usize) -> String {
        match &self.labels {
            Some(l) => l[i].clone(),
            None => i.to_string(),
        }
    }
}

fn check_distribution(p: &[f64]) -> std::result::Result<(), String> {
    if p.is_empty() {
        return Err("empty probability vector".into());
    }
    for (i, &x) in p.iter().enumerate() {
        if !x.is_finite() || x < 0.0 {
            return Err(format!(
                "entry {i} is {x}, expected a finite nonnegative number"
            ));
        }
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(format!("entries sum to {total:.15}, expected 1"));
    }
    Ok(())
}

/// A probability vector over a finite alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Pmf(Vec<f64>);

impl Pmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_distribution(&probs).map_err(Error::InvalidPmf)?;
        Ok(Self(probs))
    }

    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyAlphabet);
        }
        Ok(Self(vec![1.0 / size as f64; size]))
    }

    pub fn point_mass(size: usize, at: usize) -> Result<Self> {
        if at >= size {
            return Err(Error::OutOfRange(format!(
                "point mass at {at} in alphabet of size {size}"
            )));
        }
        let mut p = vec![0.0; size];
        p[at] = 1.0;
        Ok(Self(p))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for Pmf {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Pmf::new(v)
    }
}

impl From<Pmf> for Vec<f64> {
    fn from(p: Pmf) -> Self {
        p.0
    }
}

/// A row-stochastic kernel: one distribution over `cols` symbols per conditioning symbol.
///
/// Product conditioning alphabets are flattened row-major by the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct CondPmf {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CondPmf {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new_named("conditional pmf", rows)
    }

    /// Like [`CondPmf::new`], with `what` naming the kernel in validation errors.
    pub fn new_named(what: &str, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_rows = rows.len();
        if n_rows == 0 {
            return Err(Error::InvalidRow {
                what: what.into(),
                row: 0,
                reason: "kernel has no rows".into(),
            });
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(n_rows * cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(Error::InvalidRow {
                    what: what.into(),
                    row: i,
                    reason: format!("has {} entries, expected {cols}", row.len()),
                });
            }
            check_distribution(&row).map_err(|reason| Error::InvalidRow {
                what: what.into(),
                row: i,
                reason,
            })?;
            data.extend_from_slice(&row);
        }
        Ok(Self {
            rows: n_rows,
            cols,
            data,
        })
    }

    /// The 0-1 kernel induced by a deterministic map `row -> map[row]`.
    pub fn deterministic(map: &[usize], cols: usize) -> Result<Self> {
        if map.is_empty() {
            return Err(Error::DimensionMismatch(
                "deterministic map is empty".into(),
            ));
        }
        let mut data = vec![0.0; map.len() * cols];
        for (r, &c) in map.iter().enumerate() {
            if c >= cols {
                return Err(Error::InvalidRow {
                    what: "deterministic map".into(),
                    row: r,
                    reason: format!("value {c} outside alphabet of size {cols}"),
                });
            }
            data[r * cols + c] = 1.0;
        }
        Ok(Self {
            rows: map.len(),
            cols,
            data,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.cols)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// `Some(map)` when every row is a point mass.
    pub fn as_deterministic(&self) -> Option<Vec<usize>> {
        self.rows()
            .map(|row| {
                let hot = row.iter().position(|&p| p == 1.0)?;
                row.iter()
                    .enumerate()
                    .all(|(c, &p)| c == hot || p == 0.0)
                    .then_some(hot)
            })
            .collect()
    }
}

/// `-Σ p log₂ p` over a raw slice, skipping zeros. No validation.
pub fn entropy_bits(p: &[f64]) -> f64 {
    let h: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum();
    h.max(0.0)
}

pub fn binary_entropy(p: f64) -> f64 {
    entropy_bits(&[p, 1.0 - p])
}

/// Shannon entropy in bits.
pub fn entropy(p: &Pmf) -> f64 {
    entropy_bits(p.probs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub alphabet: Alphabet,
}

/// Normalized joint distribution over an ordered tuple of named finite variables.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    vars: Vec<Variable>,
    values: Vec<f64>,
}

impl JointTable {
    pub fn new<S: Into<String>>(vars: Vec<(S, Alphabet)>, values: Vec<f64>) -> Result<Self> {
        let vars: Vec<Variable> = vars
            .into_iter()
            .map(|(name, alphabet)| Variable {
                name: name.into(),
                alphabet,
            })
            .collect();
        let mut seen = HashSet::new();
        for v in &vars {
            if !seen.insert(v.name.as_str()) {
                return Err(Error::DuplicateVariable(v.name.clone()));
            }
        }
        let cells: usize = vars.iter().map(|v| v.alphabet.size()).product();
        if values.len() != cells {
            return Err(Error::DimensionMismatch(format!(
                "table has {} values, variables span {cells} cells",
                values.len()
            )));
        }
        check_distribution(&values).map_err(Error::InvalidPmf)?;
        Ok(Self { vars, values })
    }

    /// Builds a table by evaluating `f` at every cell (coordinates in variable order).
    pub fn from_fn<S: Into<String>>(
        vars: Vec<(S, Alphabet)>,
        mut f: impl FnMut(&[usize]) -> f64,
    ) -> Result<Self> {
        let shape: Vec<usize> = vars.iter().map(|(_, a)| a.size()).collect();
        let cells: usize = shape.iter().product();
        let mut values = Vec::with_capacity(cells);
        let mut coord = vec![0usize; shape.len()];
        for _ in 0..cells {
            values.push(f(&coord));
            advance(&mut coord, &shape);
        }
        Self::new(vars, values)
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn names(&self) -> Vec<&str> {
        self.vars.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn shape(&self) -> Vec<usize> {
        self.vars.iter().map(|v| v.alphabet.size()).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn get(&self, coord: &[usize]) -> f64 {
        let shape = self.shape();
        let idx = coord
            .iter()
            .zip(&shape)
            .fold(0, |acc, (&c, &s)| acc * s + c);
        self.values[idx]
    }

    /// Probability vector of the table flattened (only meaningful for one variable,
    /// or as the row-major joint law of several).
    pub fn to_pmf(&self) -> Result<Pmf> {
        Pmf::new(self.values.clone())
    }

    fn positions(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut seen = HashSet::new();
        names
            .iter()
            .map(|n| {
                if !seen.insert(*n) {
                    return Err(Error::DuplicateVariable(n.to_string()));
                }
                self.position(n)
            })
            .collect()
    }

    /// Entropy in bits of the marginal on `names` (0 for an empty group).
    pub fn entropy_of(&self, names: &[&str]) -> Result<f64> {
        if names.is_empty() {
            return Ok(0.0);
        }
        Ok(entropy_bits(&marginalize(self, names)?.values))
    }
}

fn advance(coord: &mut [usize], shape: &[usize]) {
    for k in (0..coord.len()).rev() {
        coord[k] += 1;
        if coord[k] < shape[k] {
            return;
        }
        coord[k] = 0;
    }
}

/// Sums out every variable not in `keep`; the result lists variables in `keep` order.
pub fn marginalize(j: &JointTable, keep: &[&str]) -> Result<JointTable> {
    let pos = j.positions(keep)?;
    let shape = j.shape();
    let out_cells: usize = pos.iter().map(|&p| shape[p]).product();
    let mut out = vec![0.0; out_cells];
    let mut coord = vec![0usize; shape.len()];
    for &v in &j.values {
        let oi = pos.iter().fold(0, |acc, &p| acc * shape[p] + coord[p]);
        out[oi] += v;
        advance(&mut coord, &shape);
    }
    Ok(JointTable {
        vars: pos.iter().map(|&p| j.vars[p].clone()).collect(),
        values: out,
    })
}

fn check_disjoint(groups: &[&[&str]]) -> Result<()> {
    let mut seen = HashSet::new();
    for g in groups {
        let mut local = HashSet::new();
        for n in g.iter() {
            if !local.insert(*n) {
                return Err(Error::DuplicateVariable(n.to_string()));
            }
            if !seen.insert(*n) {
                return Err(Error::OverlappingGroups(n.to_string()));
            }
        }
    }
    Ok(())
}

/// Conditional mutual information `I(A;B|C)` in bits.
pub fn mutual_information(j: &JointTable, a: &[&str], b: &[&str], given: &[&str]) -> Result<f64> {
    check_disjoint(&[a, b, given])?;
    for n in a.iter().chain(b).chain(given) {
        j.position(n)?;
    }
    let h = |groups: &[&[&str]]| -> Result<f64> {
        let names: Vec<&str> = groups.iter().flat_map(|g| g.iter().copied()).collect();
        j.entropy_of(&names)
    };
    let ac = h(&[a, given])?;
    let bc = h(&[b, given])?;
    let abc = h(&[a, b, given])?;
    let c = h(&[given])?;
    Ok((ac + bc - abc - c).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovCheck {
    pub holds: bool,
    pub max_violation: f64,
}

/// Tests `A - B - C`: the largest `|P(a,b,c) − P(a,b)P(b,c)/P(b)|` over all cells
/// (cells with `P(b) = 0` contribute 0) against `tol`.
pub fn check_markov(j: &JointTable, chain: [&[&str]; 3], tol: f64) -> Result<MarkovCheck> {
    let [a, b, c] = chain;
    check_disjoint(&[a, b, c])?;
    let names: Vec<&str> = a.iter().chain(b).chain(c).copied().collect();
    let m = marginalize(j, &names)?;
    let shape = m.shape();
    let size = |r: std::ops::Range<usize>| -> usize { shape[r].iter().product() };
    let na = size(0..a.len());
    let nb = size(a.len()..a.len() + b.len());
    let nc = size(a.len() + b.len()..shape.len());

    let mut p_ab = vec![0.0; na * nb];
    let mut p_bc = vec![0.0; nb * nc];
    let mut p_b = vec![0.0; nb];
    for ia in 0..na {
        for ib in 0..nb {
            for ic in 0..nc {
                let p = m.values[(ia * nb + ib) * nc + ic];
                p_ab[ia * nb + ib] += p;
                p_bc[ib * nc + ic] += p;
                p_b[ib] += p;
            }
        }
    }
    let mut worst = 0.0f64;
    for ia in 0..na {
        for ib in 0..nb {
            if p_b[ib] <= 0.0 {
                continue;
            }
            for ic in 0..nc {
                let p = m.values[(ia * nb + ib) * nc + ic];
                let q = p_ab[ia * nb + ib] * p_bc[ib * nc + ic] / p_b[ib];
                worst = worst.max((p - q).abs());
            }
        }
    }
    Ok(MarkovCheck {
        holds: worst <= tol,
        max_violation: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bits(n: usize) -> Alphabet {
        Alphabet::new(n).unwrap()
    }

    #[test]
    fn entropy_reference_values() {
        assert_abs_diff_eq!(entropy(&Pmf::uniform(2).unwrap()), 1.0, epsilon = 1e-15);
        assert_eq!(entropy(&Pmf::point_mass(5, 3).unwrap()), 0.0);
        assert_abs_diff_eq!(
            entropy(&Pmf::new(vec![0.25; 4]).unwrap()),
            2.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn pmf_rejects_bad_input() {
        assert!(Pmf::new(vec![0.5, 0.6]).is_err());
        assert!(Pmf::new(vec![1.5, -0.5]).is_err());
        assert!(Pmf::new(vec![]).is_err());
        assert!(Pmf::new(vec![f64::NAN, 1.0]).is_err());
        // not renormalized
        assert!(Pmf::new(vec![0.5, 0.5 + 1e-9]).is_err());
    }

    #[test]
    fn condpmf_names_offending_row() {
        let err = CondPmf::new_named("W", vec![vec![1.0, 0.0], vec![0.3, 0.3]]).unwrap_err();
        assert_eq!(
            err,
            Error::InvalidRow {
                what: "W".into(),
                row: 1,
                reason: "entries sum to 0.600000000000000, expected 1".into()
            }
        );
    }

    #[test]
    fn deterministic_roundtrip() {
        let k = CondPmf::deterministic(&[2, 0, 1], 3).unwrap();
        assert_eq!(k.as_deterministic(), Some(vec![2, 0, 1]));
        let s = CondPmf::new(vec![vec![0.5, 0.5]]).unwrap();
        assert_eq!(s.as_deterministic(), None);
    }

    #[test]
    fn labels_must_be_unique() {
        assert!(Alphabet::with_labels(vec!["a".into(), "a".into()]).is_err());
        let a = Alphabet::with_labels(vec!["a".into(), "b".into()]).unwrap();
        assert_eq!(a.size(), 2);
        assert_eq!(a.label(1), "b");
        assert!(Alphabet::new(0).is_err());
    }

    #[test]
    fn mutual_information_basic() {
        let indep = JointTable::new(vec![("A", bits(2)), ("B", bits(2))], vec![0.25; 4]).unwrap();
        assert_abs_diff_eq!(
            mutual_information(&indep, &["A"], &["B"], &[]).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        let equal = JointTable::new(
            vec![("A", bits(2)), ("B", bits(2))],
            vec![0.5, 0.0, 0.0, 0.5],
        )
        .unwrap();
        assert_abs_diff_eq!(
            mutual_information(&equal, &["A"], &["B"], &[]).unwrap(),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn bsc_mutual_information() {
        // joint-table evaluation against the closed form 1 - h2(0.11)
        let p = 0.11;
        let t = JointTable::new(
            vec![("X", bits(2)), ("Y", bits(2))],
            vec![0.5 * (1.0 - p), 0.5 * p, 0.5 * p, 0.5 * (1.0 - p)],
        )
        .unwrap();
        let i = mutual_information(&t, &["X"], &["Y"], &[]).unwrap();
        assert_abs_diff_eq!(i, 0.5, epsilon = 1e-3);
        assert_abs_diff_eq!(i, 1.0 - binary_entropy(p), epsilon = 1e-12);
    }

    #[test]
    fn mutual_information_errors() {
        let t = JointTable::new(vec![("A", bits(2)), ("B", bits(2))], vec![0.25; 4]).unwrap();
        assert_eq!(
            mutual_information(&t, &["A"], &["Z"], &[]),
            Err(Error::UnknownVariable("Z".into()))
        );
        assert_eq!(
            mutual_information(&t, &["A"], &["A"], &[]),
            Err(Error::OverlappingGroups("A".into()))
        );
    }

    #[test]
    fn marginalize_cases() {
        let pa = [0.2, 0.8];
        let pb = [0.1, 0.3, 0.6];
        let t = JointTable::from_fn(vec![("A", bits(2)), ("B", bits(3))], |c| {
            pa[c[0]] * pb[c[1]]
        })
        .unwrap();
        let full = marginalize(&t, &["A", "B"]).unwrap();
        assert_eq!(full, t);
        let a = marginalize(&t, &["A"]).unwrap();
        assert_abs_diff_eq!(a.values()[0], 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(a.values()[1], 0.8, epsilon = 1e-15);
        let swapped = marginalize(&t, &["B", "A"]).unwrap();
        assert_eq!(swapped.names(), vec!["B", "A"]);
        assert_abs_diff_eq!(swapped.get(&[2, 1]), 0.6 * 0.8, epsilon = 1e-15);
        assert_eq!(
            marginalize(&t, &["C"]).unwrap_err(),
            Error::UnknownVariable("C".into())
        );
    }

    #[test]
    fn markov_by_construction_and_counterexample() {
        let pa = [0.3, 0.7];
        let k1 = [[0.9, 0.1], [0.2, 0.8]];
        let k2 = [[0.6, 0.4], [0.25, 0.75]];
        let chain =
            JointTable::from_fn(vec![("A", bits(2)), ("B", bits(2)), ("C", bits(2))], |c| {
                pa[c[0]] * k1[c[0]][c[1]] * k2[c[1]][c[2]]
            })
            .unwrap();
        let r = check_markov(&chain, [&["A"], &["B"], &["C"]], 1e-12).unwrap();
        assert!(r.holds, "{r:?}");

        // A = C fair bit, B independent
        let copy = JointTable::from_fn(vec![("A", bits(2)), ("B", bits(2)), ("C", bits(2))], |c| {
            if c[0] == c[2] {
                0.25
            } else {
                0.0
            }
        })
        .unwrap();
        let r = check_markov(&copy, [&["A"], &["B"], &["C"]], 1e-6).unwrap();
        assert!(!r.holds);
        assert_abs_diff_eq!(r.max_violation, 0.125, epsilon = 1e-15);

        assert!(matches!(
            check_markov(&copy, [&["A"], &["A"], &["C"]], 1e-6),
            Err(Error::OverlappingGroups(_))
        ));
    }

    #[test]
    fn table_validation() {
        assert!(matches!(
            JointTable::new(vec![("A", bits(2)), ("A", bits(2))], vec![0.25; 4]),
            Err(Error::DuplicateVariable(_))
        ));
        assert!(matches!(
            JointTable::new(vec![("A", bits(2))], vec![0.25; 4]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(JointTable::new(vec![("A", bits(2))], vec![0.5, 0.4]).is_err());
    }
}
