//! Energy bookkeeping: discrete conservation for the free solver and the
//! measured two-sided energy-trading ratios across the characteristic wedge.

use super::record::{RecordSpec, TimeSlice};
use super::slab::CharacteristicSlab;
use super::solver::{solve, BoundarySignal, SolveParams, WaveOperator};
use super::trace::h1_sq;
use crate::error::Result;
use crate::util::signals::{plateau, rng_for, BandLimited};
use crate::util::C64;
use std::sync::Arc;

/// Discrete field energy at a recorded time slice:
/// Σ w (|u_t|² + Σ g^{jk} ∂_j u conj(∂_k u)) h^n.
pub fn slice_energy(op: &WaveOperator, slice: &TimeSlice) -> f64 {
    let grid = &op.grid;
    let nn = grid.n_normal();
    let hn = grid.h_normal();
    let cell = if grid.dim == 2 {
        grid.h[0] * grid.h[1]
    } else {
        grid.h[0]
    };
    let mut e = 0.0;
    for it in 0..grid.n_tang() {
        for inorm in 1..nn - 1 {
            if grid.dim == 2 && (it == 0 || it + 1 == grid.n_tang()) {
                continue;
            }
            let idx = grid.idx(it, inorm);
            let dn = (slice.u[idx + 1] - slice.u[idx - 1]) / (2.0 * hn);
            let m = op.metric.at(it, inorm);
            let mut grad = m.get(grid.dim - 1, grid.dim - 1) * dn.norm_sqr();
            if grid.dim == 2 {
                let dt_ = (slice.u[idx + nn] - slice.u[idx - nn]) / (2.0 * grid.h[0]);
                grad += m.a[0] * dt_.norm_sqr() + 2.0 * m.a[1] * (dt_ * dn.conj()).re;
            }
            e += op.weight[idx] * (slice.u_t[idx].norm_sqr() + grad) * cell;
        }
    }
    e
}

/// Norms entering the wedge estimates for one solve.
#[derive(Debug, Clone)]
pub struct WedgeNorms {
    /// H¹ norm² of the trace on the incoming characteristic piece.
    pub incoming_h1: f64,
    /// H¹ norm² on the outgoing piece.
    pub outgoing_h1: f64,
    /// H¹ norm² + |u_t|² at the top time slice (y_n ≤ T − T₁).
    pub top: f64,
    /// H¹ norm of the boundary datum over the control window.
    pub data_h1: f64,
}

#[derive(Debug, Clone)]
pub struct EnergyRatios {
    /// max over the ensemble of top / (incoming + outgoing).
    pub ratio_forward: f64,
    /// max over the ensemble of (incoming + outgoing) / top.
    pub ratio_reverse: f64,
    /// max over the ensemble of data_h1 / sqrt(top): an upper bound for the
    /// control-cost ratio of the exact-controllability estimate.
    pub control_ratio: f64,
    pub per_member: Vec<WedgeNorms>,
    pub skipped: usize,
}

fn top_norms(op: &WaveOperator, slab: &CharacteristicSlab, slice: &TimeSlice) -> f64 {
    // H¹ + L₂(u_t) over { y_n ≤ T − T₁ }
    let grid = &op.grid;
    let nn = grid.n_normal();
    let hn = grid.h_normal();
    let cell = if grid.dim == 2 {
        grid.h[0] * grid.h[1]
    } else {
        grid.h[0]
    };
    let nmax = (((slab.t - slab.t1) / hn).ceil() as usize).min(nn - 2);
    let mut e = 0.0;
    for it in 0..grid.n_tang() {
        if grid.dim == 2 && (it == 0 || it + 1 == grid.n_tang()) {
            continue;
        }
        for inorm in 1..=nmax {
            let idx = grid.idx(it, inorm);
            let dn = (slice.u[idx + 1] - slice.u[idx - 1]) / (2.0 * hn);
            let mut s = slice.u[idx].norm_sqr() + slice.u_t[idx].norm_sqr() + dn.norm_sqr();
            if grid.dim == 2 {
                let dt_ = (slice.u[idx + nn] - slice.u[idx - nn]) / (2.0 * grid.h[0]);
                s += dt_.norm_sqr();
            }
            e += s * cell;
        }
    }
    e
}

fn h1_of_signal(f: &BandLimited, t1: f64, t: f64) -> f64 {
    let n = 400;
    let h = (t - t1) / n as f64;
    let mut s = 0.0;
    for i in 0..=n {
        let ti = t1 + i as f64 * h;
        let v = f.eval(ti);
        let d = (f.eval(ti + 1e-6) - f.eval(ti - 1e-6)) / 2e-6;
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        s += w * (v.norm_sqr() + d.norm_sqr()) * h;
    }
    s.sqrt()
}

/// Solve the reduced operator over an ensemble of seeded band-limited
/// boundary data and measure the wedge energy-trading ratios. Members with
/// degenerate (near-zero) traces are skipped with a count.
pub fn energy_ratio_check(
    op: &WaveOperator,
    slab: &CharacteristicSlab,
    ensemble: usize,
    modes: usize,
    seed: u64,
    cfl: f64,
) -> Result<EnergyRatios> {
    let mut per_member = Vec::new();
    let mut skipped = 0;
    let mut ratio_forward: f64 = 0.0;
    let mut ratio_reverse: f64 = 0.0;
    let mut control_ratio: f64 = 0.0;
    let (g_lo, g_hi) = slab.grid.gamma_tang_range();
    let tang_center = 0.5
        * (slab.grid.tang_coord(g_lo) + slab.grid.tang_coord(g_hi.saturating_sub(1).max(g_lo)));
    let tang_halfwidth = if slab.grid.dim == 2 {
        0.5 * (slab.grid.tang_coord(g_hi - 1) - slab.grid.tang_coord(g_lo)).max(slab.grid.h_tang())
    } else {
        1.0
    };
    for member in 0..ensemble {
        let mut rng = rng_for(seed, 0x454e + member as u64);
        let profile = BandLimited::sample(&mut rng, slab.t1, slab.t, modes, 0.12);
        let dim = slab.grid.dim;
        let f_h1 = h1_of_signal(&profile, slab.t1, slab.t);
        let signal: BoundarySignal = {
            let profile = std::sync::Arc::new(profile);
            let p = profile.clone();
            Arc::new(move |yp: f64, t: f64| -> C64 {
                let cut = if dim == 2 {
                    plateau(yp, tang_center, 0.5 * tang_halfwidth, tang_halfwidth)
                } else {
                    1.0
                };
                p.eval(t) * cut
            })
        };
        let record = RecordSpec {
            incoming: vec![slab.wedge_incoming()],
            outgoing: vec![slab.wedge_outgoing()],
            time_slices: vec![slab.t],
            ..Default::default()
        };
        let out = solve(
            op,
            &signal,
            &SolveParams::new(slab.t1, slab.t, cfl),
            &record,
        )?;
        let incoming_h1 = h1_sq(&out.incoming[0]);
        let outgoing_h1 = h1_sq(&out.outgoing[0]);
        let top = top_norms(op, slab, &out.slices[0]);
        let norms = WedgeNorms {
            incoming_h1,
            outgoing_h1,
            top,
            data_h1: f_h1,
        };
        let char_sum = incoming_h1 + outgoing_h1;
        if char_sum < 1e-24 || top < 1e-24 {
            skipped += 1;
            per_member.push(norms);
            continue;
        }
        ratio_forward = ratio_forward.max(top / char_sum);
        ratio_reverse = ratio_reverse.max(char_sum / top);
        control_ratio = control_ratio.max(f_h1 / top.sqrt());
        per_member.push(norms);
    }
    Ok(EnergyRatios {
        ratio_forward,
        ratio_reverse,
        control_ratio,
        per_member,
        skipped,
    })
}
