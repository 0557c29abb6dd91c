//! The two-bit example channel.
//!
//! Inputs, states and outputs are bit pairs: `X = (A, B)`, `S = (S0, S1)`
//! with IID fair components, and the channel is deterministic,
//! `Y = (A, B ⊕ S^(A))`. The helper sends one bit per channel use.
//!
//! The α-family of schemes takes `U = (A, Ũ)` uniform, a Bernoulli(α) switch
//! `σ` independent of `U`, `Ṽ = A` when `σ = 1` and `0` otherwise,
//! `V = (Ṽ, σ)`, helper `T = S^(Ṽ)`, and encoder `X = (A, Ũ ⊕ T)` (the
//! encoder ignores `V`). It achieves `min{(3+α)/2, 2−α}`, maximized at
//! `α = 1/3` with value `5/3`.
//!
//! Symbol indices: `X = 2A + B`, `S = 2·S0 + S1`, `Y = 2·Y0 + Y1`,
//! `U = 2A + Ũ`, `V = 2Ṽ + σ`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{rate_pair, AuxiliarySystem, ChannelSpec, Mapping, RatePair};
use crate::error::{Error, Result};
use crate::prob::{Alphabet, CondPmf, Pmf};
use crate::search::MapPair;
use crate::seed;

pub const EXAMPLE_U_SIZE: usize = 4;
pub const EXAMPLE_V_SIZE: usize = 4;

/// Component `k` of a bit pair encoded as `2·b0 + b1`.
fn bit(pair: usize, k: usize) -> usize {
    if k == 0 {
        pair >> 1
    } else {
        pair & 1
    }
}

fn pair_labels() -> Vec<String> {
    ["00", "01", "10", "11"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

/// Output symbol for input `x` and state `s`.
pub fn example_output(x: usize, s: usize) -> usize {
    let (a, b) = (bit(x, 0), bit(x, 1));
    2 * a + (b ^ bit(s, a))
}

pub fn make_example_channel() -> ChannelSpec {
    let w: Vec<Vec<f64>> = (0..4)
        .flat_map(|x| {
            (0..4).map(move |s| {
                let mut row = vec![0.0; 4];
                row[example_output(x, s)] = 1.0;
                row
            })
        })
        .collect();
    ChannelSpec::new(
        Alphabet::with_labels(pair_labels()).expect("distinct labels"),
        Alphabet::with_labels(pair_labels()).expect("distinct labels"),
        Alphabet::with_labels(pair_labels()).expect("distinct labels"),
        Alphabet::new(2).expect("nonempty"),
        CondPmf::new_named("W", w).expect("one-hot rows"),
        Pmf::uniform(4).expect("nonempty"),
    )
    .expect("example channel is well formed")
}

/// `h(s, v) = s^(ṽ)`, table index `s * 4 + v`.
pub fn example_helper_table() -> Vec<usize> {
    (0..4)
        .flat_map(|s| (0..EXAMPLE_V_SIZE).map(move |v| bit(s, bit(v, 0))))
        .collect()
}

/// `f(u, v, t) = (A, Ũ ⊕ t)` for `u_size ≥ 4`; symbols `u ≥ 4` reuse `u mod 4`.
pub fn example_encoder_table(u_size: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(u_size * EXAMPLE_V_SIZE * 2);
    for u in 0..u_size {
        let (a, ut) = (bit(u % 4, 0), bit(u % 4, 1));
        for _v in 0..EXAMPLE_V_SIZE {
            for t in 0..2 {
                out.push(2 * a + (ut ^ t));
            }
        }
    }
    out
}

/// The construction's helper/encoder maps as a search candidate with `|V| = 4`.
pub fn example_map_pair(u_size: usize) -> Result<MapPair> {
    if u_size < EXAMPLE_U_SIZE {
        return Err(Error::OutOfRange(format!(
            "example maps need u_size ≥ {EXAMPLE_U_SIZE}, got {u_size}"
        )));
    }
    Ok(MapPair {
        helper: example_helper_table(),
        encoder: example_encoder_table(u_size),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExampleAux {
    pub alpha: f64,
    pub aux: AuxiliarySystem,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::OutOfRange(format!(
            "alpha must lie in [0,1], got {alpha}"
        )));
    }
    Ok(())
}

pub fn make_example_aux(alpha: f64) -> Result<ExampleAux> {
    check_alpha(alpha)?;
    // V = (Ṽ, σ): (0,0), (0,1), (1,0), (1,1); (1,0) never occurs
    let p_v = Pmf::new(vec![1.0 - alpha, alpha / 2.0, 0.0, alpha / 2.0])?;
    let p_u_given_v = CondPmf::new_named(
        "P_U|V",
        vec![
            vec![0.25; 4],
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.25; 4],
            vec![0.0, 0.0, 0.5, 0.5],
        ],
    )?;
    let labels = |l: &[&str]| Alphabet::with_labels(l.iter().map(|s| s.to_string()).collect());
    let aux = AuxiliarySystem::new(
        labels(&["A0U0", "A0U1", "A1U0", "A1U1"])?,
        labels(&["V0s0", "V0s1", "V1s0", "V1s1"])?,
        p_v,
        p_u_given_v,
        Mapping::deterministic(example_helper_table(), 2)?,
        Mapping::deterministic(example_encoder_table(EXAMPLE_U_SIZE), 4)?,
    )?;
    Ok(ExampleAux { alpha, aux })
}

/// `((3+α)/2, 2−α)`: the receiver-side and helper-side rate of the α-scheme.
pub fn closed_form_rates(alpha: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    Ok(((3.0 + alpha) / 2.0, 2.0 - alpha))
}

/// Reference capacities for the example channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Baselines {
    /// Capacity with a message-cognizant helper (cited value).
    pub cognizant: f64,
    /// Capacity with a message-oblivious helper (cited value).
    pub oblivious: f64,
    /// Rate achieved by the α = 1/3 cribbing scheme.
    pub cribbing_lb: f64,
}

pub fn baselines() -> Baselines {
    Baselines {
        cognizant: 2.0,
        oblivious: 3f64.log2(),
        cribbing_lb: 5.0 / 3.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub decoder_rate: f64,
    pub helper_rate: f64,
    /// `min` of the two numerically evaluated terms.
    pub rate_bound: f64,
    pub i_uv_y: f64,
    pub i_u_x_given_vt: f64,
}

pub fn sweep_row(ch: &ChannelSpec, alpha: f64) -> Result<SweepRow> {
    let (decoder_rate, helper_rate) = closed_form_rates(alpha)?;
    let RatePair {
        i_uv_y,
        i_u_x_given_vt,
    } = rate_pair(ch, &make_example_aux(alpha)?.aux)?;
    Ok(SweepRow {
        alpha,
        decoder_rate,
        helper_rate,
        rate_bound: i_uv_y.min(i_u_x_given_vt),
        i_uv_y,
        i_u_x_given_vt,
    })
}

/// Evenly spaced α values `lo, lo+step, …, hi` (count rounded, endpoints exact).
pub fn alpha_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    check_alpha(lo)?;
    check_alpha(hi)?;
    if step.is_nan() || step <= 0.0 || hi < lo {
        return Err(Error::OutOfRange(format!(
            "alpha grid needs lo ≤ hi and step > 0, got {lo}:{hi}:{step}"
        )));
    }
    let k = ((hi - lo) / step).round() as usize;
    Ok((0..=k)
        .map(|i| if i == k { hi } else { lo + i as f64 * step })
        .collect())
}

pub fn sweep(alphas: &[f64]) -> Result<Vec<SweepRow>> {
    let ch = make_example_channel();
    alphas.iter().map(|&a| sweep_row(&ch, a)).collect()
}

/// Outcome of searching for auxiliary systems that would reach rate 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapProbeReport {
    pub candidates: usize,
    /// Candidates with `I(U;X|VT) ≥ 2 − 1e-6`.
    pub probed: usize,
    /// Largest `I(UV;Y)` among probed candidates (`None` when none were probed).
    pub max_i_uv_y: Option<f64>,
    /// Every probed candidate must have `I(UV;Y) < 2 − threshold`.
    pub threshold: f64,
    pub passed: bool,
}

pub const GAP_PROBE_HELPER_TOL: f64 = 1e-6;
pub const GAP_PROBE_THRESHOLD: f64 = 1e-6;

fn random_simplex(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut p: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= s);
    p
}

/// Falsification probe for "rate 2 is not achievable with a cribbing helper".
///
/// Half of the candidates are built to make `X` uniform given `(V, T)` and a
/// function of `U` (so `I(U;X|VT) = 2`); the rest are unstructured. Among
/// those reaching the helper-side value 2, the largest `I(UV;Y)` is recorded.
/// When `u_size ≥ 4` the first candidate is `U = X` with constant `V` and `T`.
pub fn strict_gap_probe(
    u_size: usize,
    v_size: usize,
    n_candidates: usize,
    seed_value: u64,
) -> Result<GapProbeReport> {
    if u_size == 0 || v_size == 0 {
        return Err(Error::OutOfRange("u_size and v_size must be ≥ 1".into()));
    }
    let ch = make_example_channel();
    let mut rng = seed::rng(seed_value);
    let (ns, nt, nx) = (4, 2, 4);
    let mut probed = 0;
    let mut max_i: Option<f64> = None;

    for k in 0..n_candidates {
        let (p_v, p_u_given_v, helper, encoder) = if u_size >= 4 && k == 0 {
            let mut enc = vec![0; u_size * v_size * nt];
            for u in 0..u_size {
                for v in 0..v_size {
                    for t in 0..nt {
                        enc[(u * v_size + v) * nt + t] = u % 4;
                    }
                }
            }
            let mut rows = vec![vec![0.0; u_size]; v_size];
            rows.iter_mut().for_each(|r| r[..4].fill(0.25));
            let mut pv = vec![0.0; v_size];
            pv[0] = 1.0;
            (pv, rows, vec![0; ns * v_size], enc)
        } else if u_size >= 4 && k % 2 == 1 {
            // X a bijective image of a uniform 4-subset of U for every (v, t)
            let helper: Vec<usize> = (0..ns * v_size).map(|_| rng.random_range(0..nt)).collect();
            let mut enc: Vec<usize> = (0..u_size * v_size * nt)
                .map(|_| rng.random_range(0..nx))
                .collect();
            let mut rows = Vec::with_capacity(v_size);
            for v in 0..v_size {
                let mut us: Vec<usize> = (0..u_size).collect();
                for i in 0..4 {
                    let j = rng.random_range(i..u_size);
                    us.swap(i, j);
                }
                let mut row = vec![0.0; u_size];
                for &u in &us[..4] {
                    row[u] = 0.25;
                }
                rows.push(row);
                for t in 0..nt {
                    let mut perm = [0usize, 1, 2, 3];
                    for i in (1..4).rev() {
                        perm.swap(i, rng.random_range(0..=i));
                    }
                    for (i, &u) in us[..4].iter().enumerate() {
                        enc[(u * v_size + v) * nt + t] = perm[i];
                    }
                }
            }
            (random_simplex(&mut rng, v_size), rows, helper, enc)
        } else {
            let helper = (0..ns * v_size).map(|_| rng.random_range(0..nt)).collect();
            let enc = (0..u_size * v_size * nt)
                .map(|_| rng.random_range(0..nx))
                .collect();
            let rows = (0..v_size)
                .map(|_| random_simplex(&mut rng, u_size))
                .collect();
            (random_simplex(&mut rng, v_size), rows, helper, enc)
        };
        let aux = AuxiliarySystem::new(
            Alphabet::new(u_size)?,
            Alphabet::new(v_size)?,
            Pmf::new(p_v)?,
            CondPmf::new(p_u_given_v)?,
            Mapping::deterministic(helper, nt)?,
            Mapping::deterministic(encoder, nx)?,
        )?;
        let rp = rate_pair(&ch, &aux)?;
        if rp.i_u_x_given_vt >= 2.0 - GAP_PROBE_HELPER_TOL {
            probed += 1;
            max_i = Some(max_i.map_or(rp.i_uv_y, |m: f64| m.max(rp.i_uv_y)));
        }
    }
    Ok(GapProbeReport {
        candidates: n_candidates,
        probed,
        max_i_uv_y: max_i,
        threshold: GAP_PROBE_THRESHOLD,
        passed: max_i.is_none_or(|m| m < 2.0 - GAP_PROBE_THRESHOLD),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{build_joint, rate_bound};
    use crate::prob::{check_markov, marginalize, mutual_information};
    use approx::assert_abs_diff_eq;

    #[test]
    fn channel_law() {
        // (A,B) = (0,1), state (1,0) → (0, 1 ⊕ 1) = (0,0)
        assert_eq!(example_output(0b01, 0b10), 0b00);
        for b in 0..2 {
            for s in 0..4 {
                assert_eq!(bit(example_output(2 + b, s), 0), 1);
            }
        }
        let ch = make_example_channel();
        for row in ch.w().rows() {
            assert_eq!(row.iter().filter(|&&p| p == 1.0).count(), 1);
            assert_eq!(row.iter().sum::<f64>(), 1.0);
        }
        assert_eq!(ch.t_size(), 2);
    }

    #[test]
    fn alpha_one_is_noiseless() {
        let ch = make_example_channel();
        let aux = make_example_aux(1.0).unwrap().aux;
        let joint = build_joint(&ch, &aux).unwrap();
        // Y = U exactly
        let uy = marginalize(&joint, &["U", "Y"]).unwrap();
        for u in 0..4 {
            for y in 0..4 {
                if u != y {
                    assert_eq!(uy.get(&[u, y]), 0.0);
                }
            }
        }
        // T = S^(A)
        let ust = marginalize(&joint, &["U", "S", "T"]).unwrap();
        for u in 0..4 {
            for s in 0..4 {
                for t in 0..2 {
                    if t != bit(s, bit(u, 0)) {
                        assert_eq!(ust.get(&[u, s, t]), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn alpha_zero_helper_sends_first_state_bit() {
        let ch = make_example_channel();
        let joint = build_joint(&ch, &make_example_aux(0.0).unwrap().aux).unwrap();
        let st = marginalize(&joint, &["S", "T"]).unwrap();
        for s in 0..4 {
            for t in 0..2 {
                if t != bit(s, 0) {
                    assert_eq!(st.get(&[s, t]), 0.0);
                }
            }
        }
    }

    #[test]
    fn construction_invariants() {
        let ch = make_example_channel();
        for alpha in [0.0, 0.2, 1.0 / 3.0, 0.8, 1.0] {
            let ex = make_example_aux(alpha).unwrap();
            let joint = build_joint(&ch, &ex.aux).unwrap();
            assert_eq!(joint.shape(), vec![4, 4, 4, 2, 4, 4]);
            assert_abs_diff_eq!(joint.total_mass(), 1.0, epsilon = 1e-12);
            let s = marginalize(&joint, &["S"]).unwrap();
            for &p in s.values() {
                assert_abs_diff_eq!(p, 0.25, epsilon = 1e-15);
            }
            assert!(mutual_information(&joint, &["U", "V"], &["S"], &[]).unwrap() < 1e-10);
            let wide = build_joint(&ch, &ex.aux.with_v_in_u().unwrap()).unwrap();
            let m = check_markov(&wide, [&["V"], &["U"], &["X", "T", "S"]], 1e-10).unwrap();
            assert!(m.holds);
            let m = check_markov(&wide, [&["V", "U"], &["X", "T", "S"], &["Y"]], 1e-10).unwrap();
            assert!(m.holds);
            // with U = (A, Ũ) alone, T = S^(σ) still depends on σ when A = 1
            let raw = check_markov(&joint, [&["V"], &["U"], &["X", "T", "S"]], 1e-10).unwrap();
            assert_eq!(raw.holds, alpha == 0.0 || alpha == 1.0, "α={alpha} {raw:?}");
            // P(σ=1) = α and U independent of σ
            let pv = ex.aux.p_v().probs();
            assert_abs_diff_eq!(pv[1] + pv[3], alpha, epsilon = 1e-15);
        }
    }

    #[test]
    fn encoder_ignores_v() {
        let f = example_encoder_table(4);
        for u in 0..4 {
            for t in 0..2 {
                let first = f[(u * 4) * 2 + t];
                assert!((0..4).all(|v| f[(u * 4 + v) * 2 + t] == first));
            }
        }
    }

    #[test]
    fn closed_forms() {
        let (d, h) = closed_form_rates(1.0 / 3.0).unwrap();
        assert_abs_diff_eq!(d, 5.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h, 5.0 / 3.0, epsilon = 1e-15);
        assert_eq!(closed_form_rates(0.0).unwrap(), (1.5, 2.0));
        assert_eq!(closed_form_rates(1.0).unwrap(), (2.0, 1.0));
        assert!(closed_form_rates(1.5).is_err());
        assert!(make_example_aux(-0.1).is_err());
    }

    #[test]
    fn rate_bound_endpoints() {
        let ch = make_example_channel();
        let at = |a: f64| rate_bound(&ch, &make_example_aux(a).unwrap().aux).unwrap();
        assert_abs_diff_eq!(at(1.0 / 3.0), 5.0 / 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(at(0.0), 1.5, epsilon = 1e-9);
        assert_abs_diff_eq!(at(1.0), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn baseline_constants() {
        let b = baselines();
        assert_eq!(b.cognizant, 2.0);
        assert_abs_diff_eq!(b.oblivious, 1.584_962_500_721_156, epsilon = 1e-12);
        assert_abs_diff_eq!(b.cribbing_lb, 1.666_666_666_666_667, epsilon = 1e-12);
    }

    #[test]
    fn alpha_grid_has_101_points() {
        let g = alpha_grid(0.0, 1.0, 0.01).unwrap();
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[100], 1.0);
        assert!(alpha_grid(0.5, 0.2, 0.1).is_err());
        assert!(alpha_grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn gap_probe_cases() {
        // α = 1 construction has helper term 1 < 2, so it would not be probed
        let ch = make_example_channel();
        let rp = rate_pair(&ch, &make_example_aux(1.0).unwrap().aux).unwrap();
        assert_abs_diff_eq!(rp.i_u_x_given_vt, 1.0, epsilon = 1e-9);

        // U = X, V and T constant: helper term 2, receiver term strictly below 2
        let r = strict_gap_probe(4, 1, 1, 0).unwrap();
        assert_eq!(r.probed, 1);
        assert!(r.passed);
        assert_abs_diff_eq!(r.max_i_uv_y.unwrap(), 1.0, epsilon = 1e-9);

        let vacuous = strict_gap_probe(1, 2, 50, 0).unwrap();
        assert_eq!(vacuous.probed, 0);
        assert!(vacuous.passed);
        assert_eq!(vacuous.max_i_uv_y, None);

        let many = strict_gap_probe(4, 2, 200, 9).unwrap();
        assert!(many.probed >= 100, "{many:?}");
        assert!(many.passed, "{many:?}");
    }
}
