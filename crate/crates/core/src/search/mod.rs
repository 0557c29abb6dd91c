//! Numerical lower bounds on the cribbing capacity.
//!
//! The outer search runs over deterministic helper maps `h: S×V → T` and
//! encoder maps `f: U×V×T → X` (exhaustively when the product space fits the
//! budget, otherwise by seeded sampling without replacement). For each map
//! pair the inner problem, maximizing `min{I(UV;Y), I(U;X|VT)}` over the
//! simplex of `P(u,v)`, is solved by multi-start hill climbing with pairwise
//! mass transfers and a geometrically shrinking step.
//!
//! Every reported value is the rate of an explicit auxiliary system, hence a
//! valid lower bound. Nothing here certifies optimality.

mod evaluator;

use std::cmp::Ordering;
use std::collections::HashSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{rate_pair, AuxiliarySystem, ChannelSpec, Mapping, RatePair};
use crate::error::{Error, Result};
use crate::seed;

pub use evaluator::{Climber, RateEvaluator};

/// Largest step of the hill climb.
pub const STEP_START: f64 = 0.25;
/// The climb stops once the step falls below this.
pub const STEP_MIN: f64 = 1e-4;
pub const STEP_DECAY: f64 = 0.5;
/// Cap on the number of simplex-grid start points scored per map pair.
pub const GRID_CAP: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Map pairs `(h, f)` visited by the outer search.
    pub max_map_candidates: usize,
    /// Hill-climb starts of each kind (best grid points, Dirichlet draws).
    pub restarts: usize,
    pub grid_resolution: usize,
    /// Improving moves allowed per step size.
    pub local_steps: usize,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            max_map_candidates: 256,
            restarts: 4,
            grid_resolution: 2,
            local_steps: 64,
            seed: 1,
        }
    }
}

impl SearchBudget {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("max_map_candidates", self.max_map_candidates),
            ("restarts", self.restarts),
            ("grid_resolution", self.grid_resolution),
            ("local_steps", self.local_steps),
        ];
        for (name, v) in fields {
            if v == 0 {
                return Err(Error::OutOfRange(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

/// Alphabet-size limits under which the maximum is attained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardinalityBounds {
    #[serde(rename = "L")]
    pub l: u128,
    pub v_max: u128,
    pub u_max: u128,
}

pub fn cardinality_bounds(ch: &ChannelSpec) -> CardinalityBounds {
    let (x, s, t) = (
        ch.x_size() as u128,
        ch.s_size() as u128,
        ch.t_size() as u128,
    );
    let l = x * t * s + 1;
    CardinalityBounds {
        l,
        v_max: l * l * s * (t - 1) + l,
        u_max: l * l * l * t * (x - 1) + l,
    }
}

/// Number of functions from a `domain`-set into a `range`-set, `None` on overflow.
pub fn map_space_size(domain: usize, range: usize) -> Option<u128> {
    (range as u128).checked_pow(u32::try_from(domain).ok()?)
}

/// Deterministic maps as value tables, exhaustive when the whole space fits in
/// `max_candidates`, otherwise a seeded uniform sample without replacement.
#[derive(Debug, Clone)]
pub struct MapStream {
    domain: usize,
    range: usize,
    remaining: usize,
    mode: StreamMode,
}

#[derive(Debug, Clone)]
enum StreamMode {
    Exhaustive(Option<Vec<usize>>),
    Sampled {
        rng: ChaCha8Rng,
        seen: HashSet<Vec<usize>>,
    },
}

impl MapStream {
    pub fn new(domain: usize, range: usize, max_candidates: usize, seed: u64) -> Self {
        let fits = map_space_size(domain, range).is_some_and(|n| n <= max_candidates as u128);
        if fits {
            let total = map_space_size(domain, range).unwrap_or(0) as usize;
            Self {
                domain,
                range,
                remaining: total,
                mode: StreamMode::Exhaustive(Some(vec![0; domain])),
            }
        } else {
            Self {
                domain,
                range,
                remaining: max_candidates,
                mode: StreamMode::Sampled {
                    rng: seed::rng(seed),
                    seen: HashSet::new(),
                },
            }
        }
    }

    pub fn is_exhaustive(&self) -> bool {
        matches!(self.mode, StreamMode::Exhaustive(_))
    }
}

impl Iterator for MapStream {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let range = self.range;
        match &mut self.mode {
            StreamMode::Exhaustive(next) => {
                let cur = next.take()?;
                let mut succ = cur.clone();
                let mut carried = true;
                for k in (0..succ.len()).rev() {
                    succ[k] += 1;
                    if succ[k] < range {
                        carried = false;
                        break;
                    }
                    succ[k] = 0;
                }
                if !carried {
                    *next = Some(succ);
                }
                Some(cur)
            }
            StreamMode::Sampled { rng, seen } => loop {
                let m: Vec<usize> = (0..self.domain)
                    .map(|_| rng.random_range(0..range))
                    .collect();
                if seen.insert(m.clone()) {
                    return Some(m);
                }
            },
        }
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

/// Helper maps `h(s, v)` (table index `s * v_size + v`).
pub fn enumerate_helper_maps(
    ch: &ChannelSpec,
    v_size: usize,
    max_candidates: usize,
    seed: u64,
) -> MapStream {
    MapStream::new(ch.s_size() * v_size, ch.t_size(), max_candidates, seed)
}

/// Encoder maps `f(u, v, t)` (table index `(u * v_size + v) * |T| + t`).
pub fn enumerate_encoder_maps(
    ch: &ChannelSpec,
    u_size: usize,
    v_size: usize,
    max_candidates: usize,
    seed: u64,
) -> MapStream {
    MapStream::new(
        u_size * v_size * ch.t_size(),
        ch.x_size(),
        max_candidates,
        seed,
    )
}

/// A deterministic (helper, encoder) pair as raw tables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MapPair {
    pub helper: Vec<usize>,
    pub encoder: Vec<usize>,
}

impl MapPair {
    pub fn mappings(&self, ch: &ChannelSpec) -> Result<(Mapping, Mapping)> {
        Ok((
            Mapping::deterministic(self.helper.clone(), ch.t_size())?,
            Mapping::deterministic(self.encoder.clone(), ch.x_size())?,
        ))
    }

    /// True when `h(s, v)` does not depend on `v`.
    pub fn helper_ignores_v(&self, v_size: usize) -> bool {
        self.helper
            .chunks(v_size)
            .all(|row| row.iter().all(|&t| t == row[0]))
    }

    fn fingerprint(&self) -> u64 {
        seed::fnv1a(
            self.helper
                .iter()
                .copied()
                .chain([usize::MAX])
                .chain(self.encoder.iter().copied()),
        )
    }
}

/// Result of the inner maximization over `P(u, v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PuvOptimum {
    /// Flat `P(u, v)`, index `u * v_size + v`.
    pub p_uv: Vec<f64>,
    pub rates: RatePair,
    pub evaluations: u64,
}

fn rank(a: &RatePair, b: &RatePair) -> Ordering {
    // descending by objective, then by I(UV;Y)
    b.min()
        .partial_cmp(&a.min())
        .unwrap_or(Ordering::Equal)
        .then(b.i_uv_y.partial_cmp(&a.i_uv_y).unwrap_or(Ordering::Equal))
}

/// Visits simplex-grid points `k / resolution` over `cells` coordinates, up to `cap`.
fn simplex_grid(cells: usize, resolution: usize, cap: usize, mut visit: impl FnMut(&[usize])) {
    fn rec(
        pos: usize,
        left: usize,
        buf: &mut Vec<usize>,
        count: &mut usize,
        cap: usize,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if *count >= cap {
            return;
        }
        if pos + 1 == buf.len() {
            buf[pos] = left;
            visit(buf);
            *count += 1;
            return;
        }
        for k in (0..=left).rev() {
            buf[pos] = k;
            rec(pos + 1, left - k, buf, count, cap, visit);
        }
    }
    let mut buf = vec![0; cells];
    let mut count = 0;
    rec(0, resolution, &mut buf, &mut count, cap, &mut visit);
}

fn dirichlet_one(rng: &mut ChaCha8Rng, cells: usize) -> Vec<f64> {
    let mut p: Vec<f64> = (0..cells).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= s);
    p
}

/// Pairwise-transfer hill climb from `start`. Returns the final point, its
/// rates and the number of objective evaluations.
pub fn climb(ev: &RateEvaluator, start: Vec<f64>, local_steps: usize) -> (Vec<f64>, RatePair, u64) {
    let cells = ev.cells();
    let mut cl = Climber::new(ev, start);
    let mut evals = 1u64;
    let mut step = STEP_START;
    while step >= STEP_MIN {
        for _ in 0..local_steps {
            let mut best: Option<(usize, usize, f64, RatePair)> = None;
            let current = cl.rates();
            for from in 0..cells {
                let mass = cl.point()[from];
                if mass <= 0.0 {
                    continue;
                }
                let d = step.min(mass);
                for to in 0..cells {
                    if to == from {
                        continue;
                    }
                    let r = cl.try_move(from, to, d);
                    evals += 1;
                    let incumbent = best.as_ref().map_or(&current, |b| &b.3);
                    if r.better_than(incumbent) {
                        best = Some((from, to, d, r));
                    }
                }
            }
            match best {
                Some((from, to, d, _)) => cl.apply(from, to, d),
                None => break,
            }
        }
        step *= STEP_DECAY;
    }
    let rates = cl.rates();
    (cl.into_point(), rates, evals)
}

/// Maximizes `min{I(UV;Y), I(U;X|VT)}` over `P(u, v)` for fixed maps.
///
/// Start points are the best `restarts` points of the simplex grid at
/// `grid_resolution` plus `restarts` Dirichlet(1) draws; each is refined by
/// [`climb`]. Deterministic given `budget.seed`.
pub fn optimize_puv(
    ch: &ChannelSpec,
    helper: &Mapping,
    encoder: &Mapping,
    u_size: usize,
    v_size: usize,
    budget: &SearchBudget,
) -> Result<PuvOptimum> {
    budget.validate()?;
    let ev = RateEvaluator::new(ch, u_size, v_size, helper, encoder)?;
    Ok(optimize_with(&ev, budget, budget.seed, &[]))
}

fn optimize_with(
    ev: &RateEvaluator,
    budget: &SearchBudget,
    seed: u64,
    warm: &[Vec<f64>],
) -> PuvOptimum {
    let cells = ev.cells();
    let res = budget.grid_resolution;
    let mut evaluations = 0u64;

    let mut scored: Vec<(RatePair, Vec<usize>)> = Vec::new();
    simplex_grid(cells, res, GRID_CAP, |k| {
        let p: Vec<f64> = k.iter().map(|&c| c as f64 / res as f64).collect();
        scored.push((ev.evaluate(&p), k.to_vec()));
    });
    evaluations += scored.len() as u64;
    // stable sort keeps enumeration order among ties
    scored.sort_by(|a, b| rank(&a.0, &b.0));

    let mut starts: Vec<Vec<f64>> = warm.to_vec();
    starts.extend(
        scored
            .iter()
            .take(budget.restarts)
            .map(|(_, k)| k.iter().map(|&c| c as f64 / res as f64).collect()),
    );
    let mut rng = seed::rng(seed);
    starts.extend((0..budget.restarts).map(|_| dirichlet_one(&mut rng, cells)));

    let mut best: Option<(Vec<f64>, RatePair)> = None;
    for s in starts {
        let (p, r, e) = climb(ev, s, budget.local_steps);
        evaluations += e;
        if best.as_ref().is_none_or(|b| r.better_than(&b.1)) {
            best = Some((p, r));
        }
    }
    let (p_uv, rates) = best.expect("at least one start point");
    PuvOptimum {
        p_uv,
        rates,
        evaluations,
    }
}

#[derive(Debug, Clone, Default)]
pub struct SearchOptions {
    /// Map pairs evaluated before the enumerated/sampled ones.
    pub extra_candidates: Vec<MapPair>,
    /// Only consider helpers that ignore `V` (symbol-by-symbol helpers).
    pub helper_ignores_v: bool,
    /// After the deterministic search, refine the winner with stochastic kernels.
    pub stochastic: bool,
}

/// Outcome of refining the best deterministic candidate over stochastic kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticRefinement {
    pub deterministic_rate: f64,
    pub refined_rate: f64,
    pub refined_aux: AuxiliarySystem,
    pub refined_pair: RatePair,
}

impl StochasticRefinement {
    pub fn gap(&self) -> f64 {
        self.refined_rate - self.deterministic_rate
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best_aux: AuxiliarySystem,
    /// `rate_bound(best_aux)`, re-evaluated on the full joint table.
    pub best_rate: f64,
    pub rate_pair: RatePair,
    pub evaluations: u64,
    pub candidates_evaluated: usize,
    pub best_candidate: MapPair,
    pub seed: u64,
    pub stochastic: Option<StochasticRefinement>,
}

/// The candidate map pairs the search visits, in order.
pub fn candidate_pairs(
    ch: &ChannelSpec,
    u_size: usize,
    v_size: usize,
    budget: &SearchBudget,
    opts: &SearchOptions,
) -> Vec<MapPair> {
    let (ns, nt, nx) = (ch.s_size(), ch.t_size(), ch.x_size());
    let helper_domain = if opts.helper_ignores_v {
        ns
    } else {
        ns * v_size
    };
    let encoder_domain = u_size * v_size * nt;
    let expand = |g: Vec<usize>| -> Vec<usize> {
        if opts.helper_ignores_v {
            g.iter()
                .flat_map(|&t| std::iter::repeat_n(t, v_size))
                .collect()
        } else {
            g
        }
    };

    let mut seen: HashSet<MapPair> = HashSet::new();
    let mut out = Vec::new();
    for p in &opts.extra_candidates {
        if seen.insert(p.clone()) {
            out.push(p.clone());
        }
    }
    let budget_left = budget.max_map_candidates;
    let space = map_space_size(helper_domain, nt)
        .and_then(|h| map_space_size(encoder_domain, nx).and_then(|f| h.checked_mul(f)));
    let mut added = 0;
    let mut push = |p: MapPair, out: &mut Vec<MapPair>| -> bool {
        if seen.insert(p.clone()) {
            out.push(p);
        }
        added += 1;
        added < budget_left
    };
    if space.is_some_and(|n| n <= budget_left as u128) {
        'outer: for g in MapStream::new(helper_domain, nt, usize::MAX, 0) {
            let h = expand(g);
            for f in MapStream::new(encoder_domain, nx, usize::MAX, 0) {
                if !push(
                    MapPair {
                        helper: h.clone(),
                        encoder: f,
                    },
                    &mut out,
                ) {
                    break 'outer;
                }
            }
        }
    } else {
        let mut rng = seed::rng(seed::derive(budget.seed, 0x6d61_7073));
        let mut drawn: HashSet<MapPair> = HashSet::new();
        loop {
            let g: Vec<usize> = (0..helper_domain)
                .map(|_| rng.random_range(0..nt))
                .collect();
            let f: Vec<usize> = (0..encoder_domain)
                .map(|_| rng.random_range(0..nx))
                .collect();
            let p = MapPair {
                helper: expand(g),
                encoder: f,
            };
            if drawn.insert(p.clone()) && !push(p, &mut out) {
                break;
            }
        }
    }
    out
}

/// Best `min{I(UV;Y), I(U;X|VT)}` found over the candidate map pairs.
pub fn capacity_lower_bound(
    ch: &ChannelSpec,
    u_size: usize,
    v_size: usize,
    budget: &SearchBudget,
) -> Result<SearchResult> {
    capacity_lower_bound_with(ch, u_size, v_size, budget, &SearchOptions::default())
}

pub fn capacity_lower_bound_with(
    ch: &ChannelSpec,
    u_size: usize,
    v_size: usize,
    budget: &SearchBudget,
    opts: &SearchOptions,
) -> Result<SearchResult> {
    budget.validate()?;
    if u_size == 0 || v_size == 0 {
        return Err(Error::OutOfRange("u_size and v_size must be ≥ 1".into()));
    }
    let candidates = candidate_pairs(ch, u_size, v_size, budget, opts);
    search_over(ch, u_size, v_size, budget, &candidates, opts.stochastic)
}

/// Runs the inner optimizer on exactly `candidates`. Each pair's optimizer seed
/// depends only on `budget.seed` and the pair itself, so a pair scores the same
/// in every candidate set it belongs to.
pub fn search_over(
    ch: &ChannelSpec,
    u_size: usize,
    v_size: usize,
    budget: &SearchBudget,
    candidates: &[MapPair],
    stochastic: bool,
) -> Result<SearchResult> {
    budget.validate()?;
    if candidates.is_empty() {
        return Err(Error::OutOfRange("no candidate map pairs".into()));
    }
    let outcomes: Vec<PuvOptimum> = candidates
        .par_iter()
        .map(|pair| {
            let (h, f) = pair.mappings(ch)?;
            let ev = RateEvaluator::new(ch, u_size, v_size, &h, &f)?;
            let s = seed::derive(budget.seed, pair.fingerprint());
            Ok(optimize_with(&ev, budget, s, &[]))
        })
        .collect::<Result<_>>()?;

    // ordered reduction: first index wins ties
    let mut best_idx = 0;
    for (i, o) in outcomes.iter().enumerate().skip(1) {
        if o.rates.better_than(&outcomes[best_idx].rates) {
            best_idx = i;
        }
    }
    let evaluations = outcomes.iter().map(|o| o.evaluations).sum();
    let pair = &candidates[best_idx];
    let (h, f) = pair.mappings(ch)?;
    let best_aux = AuxiliarySystem::from_puv(u_size, v_size, &outcomes[best_idx].p_uv, h, f)?;
    let rp = rate_pair(ch, &best_aux)?;

    let stochastic = if stochastic {
        Some(refine_stochastic(ch, &best_aux, rp.min(), budget)?)
    } else {
        None
    };
    Ok(SearchResult {
        best_rate: rp.min(),
        rate_pair: rp,
        best_aux,
        evaluations,
        candidates_evaluated: candidates.len(),
        best_candidate: pair.clone(),
        seed: budget.seed,
        stochastic,
    })
}

/// Coordinate ascent over kernel rows (pairwise transfers within a row) alternated
/// with re-climbing `P(u, v)`, starting from `aux`'s 0-1 kernels.
pub fn refine_stochastic(
    ch: &ChannelSpec,
    aux: &AuxiliarySystem,
    deterministic_rate: f64,
    budget: &SearchBudget,
) -> Result<StochasticRefinement> {
    let (nu, nv) = (aux.u_size(), aux.v_size());
    let mut kernels = [
        aux.helper().to_kernel().to_rows(),
        aux.encoder().to_kernel().to_rows(),
    ];
    let build = |k: &[Vec<Vec<f64>>; 2]| -> Result<RateEvaluator> {
        let h = Mapping::Kernel(crate::prob::CondPmf::new(k[0].clone())?);
        let f = Mapping::Kernel(crate::prob::CondPmf::new(k[1].clone())?);
        RateEvaluator::new(ch, nu, nv, &h, &f)
    };
    let mut p = aux.p_uv();
    let mut current = build(&kernels)?.evaluate(&p);

    let mut step = STEP_START;
    while step >= STEP_MIN {
        for _ in 0..budget.local_steps {
            let mut improved = false;
            for which in 0..2 {
                for r in 0..kernels[which].len() {
                    let cols = kernels[which][r].len();
                    for a in 0..cols {
                        for b in 0..cols {
                            let mass = kernels[which][r][a];
                            if a == b || mass <= 0.0 {
                                continue;
                            }
                            let d = step.min(mass);
                            let saved = kernels[which][r].clone();
                            kernels[which][r][a] -= d;
                            kernels[which][r][b] += d;
                            let row_sum: f64 = kernels[which][r].iter().sum();
                            kernels[which][r].iter_mut().for_each(|x| *x /= row_sum);
                            let cand = build(&kernels)?.evaluate(&p);
                            if cand.better_than(&current) {
                                current = cand;
                                improved = true;
                            } else {
                                kernels[which][r] = saved;
                            }
                        }
                    }
                }
            }
            let ev = build(&kernels)?;
            let (q, r, _) = climb(&ev, p.clone(), budget.local_steps);
            if r.better_than(&current) {
                p = q;
                current = r;
                improved = true;
            }
            if !improved {
                break;
            }
        }
        step *= STEP_DECAY;
    }
    let h = Mapping::Kernel(crate::prob::CondPmf::new(kernels[0].clone())?).simplified();
    let f = Mapping::Kernel(crate::prob::CondPmf::new(kernels[1].clone())?).simplified();
    let refined_aux = AuxiliarySystem::from_puv(nu, nv, &p, h, f)?;
    let refined_pair = rate_pair(ch, &refined_aux)?;
    Ok(StochasticRefinement {
        deterministic_rate,
        refined_rate: refined_pair.min(),
        refined_aux,
        refined_pair,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::rate_bound;
    use crate::prob::binary_entropy;

    fn bsc(p: f64) -> ChannelSpec {
        ChannelSpec::from_parts(
            2,
            1,
            2,
            2,
            vec![vec![1.0 - p, p], vec![p, 1.0 - p]],
            vec![1.0],
        )
        .unwrap()
    }

    fn small_budget() -> SearchBudget {
        SearchBudget {
            max_map_candidates: 64,
            restarts: 2,
            grid_resolution: 2,
            local_steps: 32,
            seed: 7,
        }
    }

    #[test]
    fn cardinality_formulas() {
        let ch =
            ChannelSpec::from_parts(2, 2, 2, 2, vec![vec![1.0, 0.0]; 4], vec![0.5, 0.5]).unwrap();
        let b = cardinality_bounds(&ch);
        assert_eq!(b.l, 9);
        assert_eq!(b.v_max, 171);
        assert_eq!(b.u_max, 9 * 9 * 9 * 2 + 9);
        let b = cardinality_bounds(&bsc(0.1));
        assert_eq!(b.l, 5);
    }

    #[test]
    fn map_stream_counts() {
        let two_states =
            ChannelSpec::from_parts(2, 2, 2, 2, vec![vec![1.0, 0.0]; 4], vec![0.5, 0.5]).unwrap();
        let maps: Vec<_> = enumerate_helper_maps(&two_states, 1, 1000, 0).collect();
        assert_eq!(maps.len(), 4);
        let uniq: HashSet<_> = maps.iter().cloned().collect();
        assert_eq!(uniq.len(), 4);

        let four = MapStream::new(8, 2, 1000, 0);
        assert!(four.is_exhaustive());
        assert_eq!(four.count(), 256);

        let sampled: Vec<_> = MapStream::new(8, 2, 100, 3).collect();
        assert_eq!(sampled.len(), 100);
        let uniq: HashSet<_> = sampled.iter().cloned().collect();
        assert_eq!(uniq.len(), 100);

        let enc: Vec<_> = enumerate_encoder_maps(&bsc(0.1), 2, 1, 1000, 0).collect();
        assert_eq!(enc.len(), 16);
        let capped: Vec<_> = enumerate_encoder_maps(&bsc(0.1), 2, 1, 5, 0).collect();
        assert_eq!(capped.len(), 5);
    }

    #[test]
    fn map_stream_is_seeded() {
        let a: Vec<_> = MapStream::new(10, 3, 50, 11).collect();
        let b: Vec<_> = MapStream::new(10, 3, 50, 11).collect();
        let c: Vec<_> = MapStream::new(10, 3, 50, 12).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
        // a smaller budget is a prefix
        let short: Vec<_> = MapStream::new(10, 3, 20, 11).collect();
        assert_eq!(short[..], a[..20]);
    }

    #[test]
    fn simplex_grid_points() {
        let mut pts = Vec::new();
        simplex_grid(3, 2, 100, |k| pts.push(k.to_vec()));
        assert_eq!(pts.len(), 6);
        assert!(pts.iter().all(|k| k.iter().sum::<usize>() == 2));
        let mut n = 0;
        simplex_grid(32, 3, 100, |_| n += 1);
        assert_eq!(n, 100);
    }

    #[test]
    fn useless_channel_gives_zero() {
        // Y independent of X
        let ch = ChannelSpec::from_parts(2, 1, 2, 2, vec![vec![0.3, 0.7]; 2], vec![1.0]).unwrap();
        let h = Mapping::deterministic(vec![0, 0], 2).unwrap();
        let f = Mapping::deterministic((0..8).map(|i| (i / 4) % 2).collect(), 2).unwrap();
        let o = optimize_puv(&ch, &h, &f, 2, 2, &small_budget()).unwrap();
        assert!(o.rates.min().abs() < 1e-12);
    }

    #[test]
    fn constant_u_gives_zero() {
        let ch = bsc(0.11);
        let h = Mapping::deterministic(vec![0], 2).unwrap();
        let f = Mapping::deterministic(vec![0, 1], 2).unwrap();
        let o = optimize_puv(&ch, &h, &f, 1, 1, &small_budget()).unwrap();
        assert_eq!(o.rates.min(), 0.0);
    }

    #[test]
    fn bsc_inner_optimum() {
        let ch = bsc(0.11);
        let h = Mapping::deterministic(vec![0], 2).unwrap();
        let f = Mapping::deterministic(vec![0, 0, 1, 1], 2).unwrap();
        let o = optimize_puv(&ch, &h, &f, 2, 1, &small_budget()).unwrap();
        assert!(
            (o.rates.min() - (1.0 - binary_entropy(0.11))).abs() < 1e-6,
            "{o:?}"
        );
    }

    #[test]
    fn search_result_is_reevaluated_and_deterministic() {
        let ch = bsc(0.11);
        let b = small_budget();
        let r = capacity_lower_bound(&ch, 2, 1, &b).unwrap();
        assert_eq!(r.best_rate, rate_bound(&ch, &r.best_aux).unwrap());
        assert!(r.best_rate <= 1.0);
        let again = capacity_lower_bound(&ch, 2, 1, &b).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn exhaustive_candidate_product() {
        let ch = bsc(0.11);
        // 2^1 helpers × 2^4 encoders
        let pairs = candidate_pairs(&ch, 2, 1, &small_budget(), &SearchOptions::default());
        assert_eq!(pairs.len(), 32);
        let capped = SearchBudget {
            max_map_candidates: 10,
            ..small_budget()
        };
        assert_eq!(
            candidate_pairs(&ch, 2, 1, &capped, &SearchOptions::default()).len(),
            10
        );
    }

    #[test]
    fn helper_restriction_expands_tables() {
        let ch =
            ChannelSpec::from_parts(2, 2, 2, 2, vec![vec![1.0, 0.0]; 4], vec![0.5, 0.5]).unwrap();
        let opts = SearchOptions {
            helper_ignores_v: true,
            ..Default::default()
        };
        let pairs = candidate_pairs(&ch, 2, 3, &small_budget(), &opts);
        assert!(pairs
            .iter()
            .all(|p| p.helper.len() == 6 && p.helper_ignores_v(3)));
    }

    #[test]
    fn budget_validation() {
        let b = SearchBudget {
            restarts: 0,
            ..small_budget()
        };
        assert!(capacity_lower_bound(&bsc(0.1), 2, 1, &b).is_err());
        assert!(capacity_lower_bound(&bsc(0.1), 0, 1, &small_budget()).is_err());
    }

    #[test]
    fn stochastic_refinement_never_loses() {
        let ch = bsc(0.11);
        let opts = SearchOptions {
            stochastic: true,
            ..Default::default()
        };
        let b = SearchBudget {
            max_map_candidates: 4,
            local_steps: 8,
            ..small_budget()
        };
        let r = capacity_lower_bound_with(&ch, 2, 1, &b, &opts).unwrap();
        let s = r.stochastic.unwrap();
        assert!(s.gap() >= -1e-12, "{}", s.gap());
    }
}
