#![allow(dead_code)]

use cribcap_core::channel::{AuxiliarySystem, ChannelSpec, Mapping};
use cribcap_core::prob::{Alphabet, CondPmf, JointTable};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    cribcap_core::seed::rng(seed)
}

/// Random pmf; with `sparse` some entries are exactly zero.
pub fn pmf(r: &mut impl Rng, n: usize, sparse: bool) -> Vec<f64> {
    let mut p: Vec<f64> = (0..n)
        .map(|_| {
            if sparse && r.random_bool(0.3) {
                0.0
            } else {
                -(1.0 - r.random::<f64>()).ln()
            }
        })
        .collect();
    if p.iter().all(|&x| x == 0.0) {
        p[r.random_range(0..n)] = 1.0;
    }
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= s);
    p
}

pub fn rows(r: &mut impl Rng, n_rows: usize, n_cols: usize, sparse: bool) -> Vec<Vec<f64>> {
    (0..n_rows).map(|_| pmf(r, n_cols, sparse)).collect()
}

pub fn table(names: &[&str], sizes: &[usize], values: Vec<f64>) -> JointTable {
    let vars = names
        .iter()
        .zip(sizes)
        .map(|(n, &s)| (*n, Alphabet::new(s).unwrap()))
        .collect();
    JointTable::new(vars, values).unwrap()
}

/// Random joint law of `(A, B, C)` with alphabet sizes in `2..=3`.
pub fn random_abc(r: &mut impl Rng) -> JointTable {
    let sizes: Vec<usize> = (0..3).map(|_| r.random_range(2..=3)).collect();
    let n = sizes.iter().product();
    let sparse = r.random_bool(0.5);
    table(&["A", "B", "C"], &sizes, pmf(r, n, sparse))
}

/// `P(a, b) P(c | b)`, a Markov chain `A - B - C`.
pub fn random_markov_abc(r: &mut impl Rng) -> JointTable {
    let (na, nb, nc) = (
        r.random_range(2..=3),
        r.random_range(2..=3),
        r.random_range(2..=3),
    );
    let (s1, s2) = (r.random_bool(0.5), r.random_bool(0.5));
    let p_ab = pmf(r, na * nb, s1);
    let p_c = rows(r, nb, nc, s2);
    let mut v = vec![0.0; na * nb * nc];
    for a in 0..na {
        for b in 0..nb {
            for c in 0..nc {
                v[(a * nb + b) * nc + c] = p_ab[a * nb + b] * p_c[b][c];
            }
        }
    }
    table(&["A", "B", "C"], &[na, nb, nc], v)
}

pub fn random_channel(r: &mut impl Rng, nx: usize, ns: usize, ny: usize, nt: usize) -> ChannelSpec {
    let sparse = r.random_bool(0.5);
    ChannelSpec::from_parts(
        nx,
        ns,
        ny,
        nt,
        rows(r, nx * ns, ny, sparse),
        pmf(r, ns, false),
    )
    .unwrap()
}

pub fn random_map(r: &mut impl Rng, domain: usize, range: usize) -> Mapping {
    Mapping::deterministic(
        (0..domain).map(|_| r.random_range(0..range)).collect(),
        range,
    )
    .unwrap()
}

pub fn random_kernel(r: &mut impl Rng, domain: usize, range: usize) -> Mapping {
    Mapping::Kernel(CondPmf::new(rows(r, domain, range, true)).unwrap())
}

/// Random auxiliary system for `ch`; maps are deterministic or stochastic.
pub fn random_aux(r: &mut impl Rng, ch: &ChannelSpec, nu: usize, nv: usize) -> AuxiliarySystem {
    let (ns, nt, nx) = (ch.s_size(), ch.t_size(), ch.x_size());
    let stochastic = r.random_bool(0.5);
    let (h, f) = if stochastic {
        (
            random_kernel(r, ns * nv, nt),
            random_kernel(r, nu * nv * nt, nx),
        )
    } else {
        (random_map(r, ns * nv, nt), random_map(r, nu * nv * nt, nx))
    };
    let sparse = r.random_bool(0.3);
    let p_uv = pmf(r, nu * nv, sparse);
    AuxiliarySystem::from_puv(nu, nv, &p_uv, h, f).unwrap()
}

/// Small random channel and auxiliary system.
pub fn random_instance(seed: u64) -> (ChannelSpec, AuxiliarySystem) {
    let mut r = rng(seed);
    let (nx, ns, ny) = (
        r.random_range(2..=3),
        r.random_range(1..=3),
        r.random_range(2..=3),
    );
    let ch = random_channel(&mut r, nx, ns, ny, 2);
    let (nu, nv) = (r.random_range(1..=3), r.random_range(1..=3));
    let aux = random_aux(&mut r, &ch, nu, nv);
    (ch, aux)
}
