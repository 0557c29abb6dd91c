//! Fast evaluation of the rate pair for fixed helper/encoder maps.
//!
//! With the maps fixed, both terms depend on `P(u,v)` only through a few
//! precomputed per-cell quantities, because `T` is independent of `U` given `V`:
//!
//! * `I(UV;Y) = H(Y) − Σ P(u,v) H(Y | u,v)`
//! * `I(U;X|VT) = H(X|VT) − Σ P(u,v) Σ_t P(t|v) H(X | u,v,t)`
//!
//! [`Climber`] keeps these sums and updates them in `O(|Y| + |T|·|X|)` when a
//! mass transfer between two cells is tried.

use crate::channel::{ChannelSpec, Mapping, RatePair};
use crate::error::{Error, Result};
use crate::prob::entropy_bits;

#[derive(Debug, Clone)]
pub struct RateEvaluator {
    nv: usize,
    nt: usize,
    nx: usize,
    ny: usize,
    cells: usize,
    /// `P(y | u,v)`, row per cell.
    y_given_cell: Vec<f64>,
    h_y_given_cell: Vec<f64>,
    /// `P(t | v) P(x | u,v,t)`, row of `|T|·|X|` per cell.
    tx_given_cell: Vec<f64>,
    /// `Σ_t P(t|v) H(X | u,v,t)` per cell.
    h_x_given_cell: Vec<f64>,
}

/// `−Σ q log q + Σ_t P_t log P_t` over one `v` slice laid out `t * nx + x`,
/// i.e. `P(v) H(X | T, V=v)` for an unnormalized slice.
fn cond_entropy_slice(slice: &[f64], nx: usize) -> f64 {
    let mut h = 0.0;
    for row in slice.chunks(nx) {
        let pt: f64 = row.iter().sum();
        if pt > 0.0 {
            h += pt * pt.log2();
            for &q in row {
                if q > 0.0 {
                    h -= q * q.log2();
                }
            }
        }
    }
    h
}

impl RateEvaluator {
    pub fn new(
        ch: &ChannelSpec,
        u_size: usize,
        v_size: usize,
        helper: &Mapping,
        encoder: &Mapping,
    ) -> Result<Self> {
        let (ns, nt, nx, ny) = (ch.s_size(), ch.t_size(), ch.x_size(), ch.y_size());
        let (nu, nv) = (u_size, v_size);
        if helper.domain_size() != ns * nv || helper.range_size() != nt {
            return Err(Error::DimensionMismatch(format!(
                "helper map must be {}→{}, got {}→{}",
                ns * nv,
                nt,
                helper.domain_size(),
                helper.range_size()
            )));
        }
        if encoder.domain_size() != nu * nv * nt || encoder.range_size() != nx {
            return Err(Error::DimensionMismatch(format!(
                "encoder map must be {}→{}, got {}→{}",
                nu * nv * nt,
                nx,
                encoder.domain_size(),
                encoder.range_size()
            )));
        }
        let p_s = ch.p_s().probs();
        let mut p_t_given_v = vec![0.0; nv * nt];
        for v in 0..nv {
            for s in 0..ns {
                for t in 0..nt {
                    p_t_given_v[v * nt + t] += p_s[s] * helper.prob(s * nv + v, t);
                }
            }
        }
        let cells = nu * nv;
        let mut y_given_cell = vec![0.0; cells * ny];
        let mut tx_given_cell = vec![0.0; cells * nt * nx];
        let mut h_x_given_cell = vec![0.0; cells];
        for u in 0..nu {
            for v in 0..nv {
                let c = u * nv + v;
                for t in 0..nt {
                    let row = (u * nv + v) * nt + t;
                    let fx: Vec<f64> = (0..nx).map(|x| encoder.prob(row, x)).collect();
                    let pt = p_t_given_v[v * nt + t];
                    h_x_given_cell[c] += pt * entropy_bits(&fx);
                    for x in 0..nx {
                        tx_given_cell[c * nt * nx + t * nx + x] = pt * fx[x];
                    }
                    for s in 0..ns {
                        let pst = p_s[s] * helper.prob(s * nv + v, t);
                        if pst == 0.0 {
                            continue;
                        }
                        for (x, &q) in fx.iter().enumerate() {
                            if q == 0.0 {
                                continue;
                            }
                            let w = ch.w_row(x, s);
                            for y in 0..ny {
                                y_given_cell[c * ny + y] += pst * q * w[y];
                            }
                        }
                    }
                }
            }
        }
        let h_y_given_cell = y_given_cell.chunks(ny).map(entropy_bits).collect();
        Ok(Self {
            nv,
            nt,
            nx,
            ny,
            cells,
            y_given_cell,
            h_y_given_cell,
            tx_given_cell,
            h_x_given_cell,
        })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn evaluate(&self, p_uv: &[f64]) -> RatePair {
        debug_assert_eq!(p_uv.len(), self.cells);
        let (nv, ny, ntx) = (self.nv, self.ny, self.nt * self.nx);
        let mut p_y = vec![0.0; ny];
        let mut vtx = vec![0.0; nv * ntx];
        let mut hyc = 0.0;
        let mut hxc = 0.0;
        for (c, &p) in p_uv.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let v = c % nv;
            for y in 0..ny {
                p_y[y] += p * self.y_given_cell[c * ny + y];
            }
            for k in 0..ntx {
                vtx[v * ntx + k] += p * self.tx_given_cell[c * ntx + k];
            }
            hyc += p * self.h_y_given_cell[c];
            hxc += p * self.h_x_given_cell[c];
        }
        let hx_vt: f64 = vtx
            .chunks(ntx)
            .map(|s| cond_entropy_slice(s, self.nx))
            .sum();
        RatePair {
            i_uv_y: (entropy_bits(&p_y) - hyc).max(0.0),
            i_u_x_given_vt: (hx_vt - hxc).max(0.0),
        }
    }
}

/// Incremental state for pairwise mass-transfer moves.
pub struct Climber<'a> {
    ev: &'a RateEvaluator,
    p: Vec<f64>,
    p_y: Vec<f64>,
    vtx: Vec<f64>,
    hx_v: Vec<f64>,
    hx_total: f64,
    hyc: f64,
    hxc: f64,
    rates: RatePair,
    scratch_y: Vec<f64>,
    scratch_tx: Vec<f64>,
}

impl<'a> Climber<'a> {
    pub fn new(ev: &'a RateEvaluator, p: Vec<f64>) -> Self {
        let ntx = ev.nt * ev.nx;
        let mut c = Self {
            ev,
            p,
            p_y: vec![0.0; ev.ny],
            vtx: vec![0.0; ev.nv * ntx],
            hx_v: vec![0.0; ev.nv],
            hx_total: 0.0,
            hyc: 0.0,
            hxc: 0.0,
            rates: RatePair {
                i_uv_y: 0.0,
                i_u_x_given_vt: 0.0,
            },
            scratch_y: vec![0.0; ev.ny],
            scratch_tx: vec![0.0; ntx],
        };
        c.recompute();
        c
    }

    fn recompute(&mut self) {
        let ev = self.ev;
        let (nv, ny, ntx) = (ev.nv, ev.ny, ev.nt * ev.nx);
        self.p_y.iter_mut().for_each(|x| *x = 0.0);
        self.vtx.iter_mut().for_each(|x| *x = 0.0);
        self.hyc = 0.0;
        self.hxc = 0.0;
        for (c, &p) in self.p.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let v = c % nv;
            for y in 0..ny {
                self.p_y[y] += p * ev.y_given_cell[c * ny + y];
            }
            for k in 0..ntx {
                self.vtx[v * ntx + k] += p * ev.tx_given_cell[c * ntx + k];
            }
            self.hyc += p * ev.h_y_given_cell[c];
            self.hxc += p * ev.h_x_given_cell[c];
        }
        for v in 0..nv {
            self.hx_v[v] = cond_entropy_slice(&self.vtx[v * ntx..(v + 1) * ntx], ev.nx);
        }
        self.hx_total = self.hx_v.iter().sum();
        self.rates = RatePair {
            i_uv_y: (entropy_bits(&self.p_y) - self.hyc).max(0.0),
            i_u_x_given_vt: (self.hx_total - self.hxc).max(0.0),
        };
    }

    pub fn point(&self) -> &[f64] {
        &self.p
    }

    pub fn rates(&self) -> RatePair {
        self.rates
    }

    pub fn into_point(self) -> Vec<f64> {
        self.p
    }

    /// Rate pair after moving `d` mass from cell `from` to cell `to` (not applied).
    pub fn try_move(&mut self, from: usize, to: usize, d: f64) -> RatePair {
        let ev = self.ev;
        let (nv, ny, nx, ntx) = (ev.nv, ev.ny, ev.nx, ev.nt * ev.nx);
        for y in 0..ny {
            self.scratch_y[y] =
                self.p_y[y] + d * (ev.y_given_cell[to * ny + y] - ev.y_given_cell[from * ny + y]);
        }
        let hy = entropy_bits(&self.scratch_y);
        let hyc = self.hyc + d * (ev.h_y_given_cell[to] - ev.h_y_given_cell[from]);
        let hxc = self.hxc + d * (ev.h_x_given_cell[to] - ev.h_x_given_cell[from]);

        let (vf, vt) = (from % nv, to % nv);
        let mut hx_total = self.hx_total;
        if vf == vt {
            for k in 0..ntx {
                self.scratch_tx[k] = self.vtx[vf * ntx + k]
                    + d * (ev.tx_given_cell[to * ntx + k] - ev.tx_given_cell[from * ntx + k]);
            }
            hx_total += cond_entropy_slice(&self.scratch_tx, nx) - self.hx_v[vf];
        } else {
            for (v, cell, sign) in [(vf, from, -1.0), (vt, to, 1.0)] {
                for k in 0..ntx {
                    self.scratch_tx[k] =
                        self.vtx[v * ntx + k] + sign * d * ev.tx_given_cell[cell * ntx + k];
                }
                hx_total += cond_entropy_slice(&self.scratch_tx, nx) - self.hx_v[v];
            }
        }
        RatePair {
            i_uv_y: (hy - hyc).max(0.0),
            i_u_x_given_vt: (hx_total - hxc).max(0.0),
        }
    }

    /// Applies a move and refreshes all sums from scratch.
    pub fn apply(&mut self, from: usize, to: usize, d: f64) {
        self.p[from] -= d;
        self.p[to] += d;
        if self.p[from] < 1e-15 {
            self.p[to] += self.p[from];
            self.p[from] = 0.0;
        }
        self.recompute();
    }
}
