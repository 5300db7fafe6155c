//! Leapfrog time-domain solver for the raw and reduced operators with
//! Dirichlet boundary control and zero initial data.
//!
//! The scheme is the classical three-level leapfrog with centred spatial
//! stencils; the first-order time term (from the time-slot potential) is
//! discretized with a centred two-point average, which keeps second order
//! and time reversibility in the self-adjoint case. Traces on characteristic
//! surfaces, time slices, and the boundary are sampled during the march
//! through a four-level time window, so memory stays at O(grid) unless the
//! full space-time field is requested.

use super::record::{RecordPlan, RecordSpec, SolveOutput};
use crate::error::{LabError, Result};
use crate::fields::reduction::ReducedCoefficients;
use crate::fields::sampler::{FieldRef, Materialized};
use crate::fields::potentials::PotentialSet;
use crate::geometry::{Grid, MetricField};
use crate::util::{C64, I};
use rayon::prelude::*;
use std::sync::Arc;

/// Dirichlet data on the measured face: (tangential coordinate, t) → value.
pub type BoundarySignal = Arc<dyn Fn(f64, f64) -> C64 + Sync + Send>;

pub fn zero_signal() -> BoundarySignal {
    Arc::new(|_, _| C64::new(0.0, 0.0))
}

/// Coefficients of one second-order operator in divergence form, shared by
/// the raw (weight = sqrt g) and reduced (weight = 1) cases.
pub struct WaveOperator {
    pub grid: Grid,
    pub metric: MetricField,
    /// w per node: sqrt(g) for the raw operator, 1 for the reduced one.
    pub weight: Vec<f64>,
    /// a[0] = time-slot potential, a[1..=dim] spatial slots.
    pub a: Vec<FieldRef>,
    pub v: FieldRef,
    pub self_adjoint: bool,
}

impl WaveOperator {
    pub fn raw(metric: MetricField, pot: &PotentialSet) -> WaveOperator {
        let weight = metric.sqrt_g.clone();
        WaveOperator {
            grid: metric.grid.clone(),
            metric,
            weight,
            a: pot.a.clone(),
            v: pot.v.clone(),
            self_adjoint: pot.self_adjoint,
        }
    }

    /// Reduced characteristic-form operator: no determinant weight, the
    /// time and normal slots share the null-gauged potential.
    pub fn reduced(rc: &ReducedCoefficients) -> WaveOperator {
        let grid = rc.grid.clone();
        let mut a: Vec<FieldRef> = Vec::with_capacity(grid.dim + 1);
        a.push(rc.a_n1.clone());
        if grid.dim == 2 {
            a.push(rc.a_tang1[0].clone());
        }
        a.push(rc.a_n1.clone());
        WaveOperator {
            weight: vec![1.0; grid.total_nodes()],
            metric: rc.metric.clone(),
            grid,
            a,
            v: rc.v1.clone(),
            self_adjoint: rc.self_adjoint,
        }
    }

    pub fn adjoint(&self) -> WaveOperator {
        use crate::fields::sampler::{field, ConjFn};
        WaveOperator {
            grid: self.grid.clone(),
            metric: self.metric.clone(),
            weight: self.weight.clone(),
            a: self.a.iter().map(|f| field(ConjFn(f.clone()))).collect(),
            v: crate::fields::sampler::field(ConjFn(self.v.clone())),
            self_adjoint: self.self_adjoint,
        }
    }

    pub fn max_speed(&self) -> f64 {
        self.metric.max_eigenvalue().sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct SolveParams {
    pub t_start: f64,
    pub t_end: f64,
    /// dt = cfl · h_min / max_speed (then rounded down to land on t_end).
    pub cfl: f64,
    pub dt_override: Option<f64>,
}

impl SolveParams {
    pub fn new(t_start: f64, t_end: f64, cfl: f64) -> SolveParams {
        SolveParams {
            t_start,
            t_end,
            cfl,
            dt_override: None,
        }
    }
}

struct StepScratch {
    a0: Vec<C64>,
    a0t: Vec<C64>,
    v: Vec<C64>,
    asp: Vec<Vec<C64>>,
    beta: Vec<Vec<C64>>,
    wbeta: Vec<Vec<C64>>,
    s0coef: Vec<C64>,
}

/// Static per-run stencil data.
struct Stencil {
    nt: usize,
    nn: usize,
    dim: usize,
    h_t: f64,
    h_n: f64,
    inv_w: Vec<f64>,
    /// face-averaged w·q^{nn} between (it, inorm) and (it, inorm+1)
    wqn: Vec<f64>,
    /// face-averaged w·q^{11} between (it, inorm) and (it+1, inorm)
    wqt: Vec<f64>,
    /// w·q^{12} per node (2-D cross term)
    wg12: Vec<f64>,
    /// g^{jk} rows per node for beta assembly
    g_rows: Vec<[f64; 3]>,
}

impl Stencil {
    fn build(op: &WaveOperator) -> Stencil {
        let grid = &op.grid;
        let nt = grid.n_tang();
        let nn = grid.n_normal();
        let total = grid.total_nodes();
        let norm_axis = grid.normal_axis();
        let mut inv_w = vec![0.0; total];
        let mut wqn = vec![0.0; total];
        let mut wqt = vec![0.0; total];
        let mut wg12 = vec![0.0; total];
        let mut g_rows = vec![[0.0; 3]; total];
        for it in 0..nt {
            for inorm in 0..nn {
                let idx = grid.idx(it, inorm);
                let m = op.metric.at(it, inorm);
                let w = op.weight[idx];
                inv_w[idx] = 1.0 / w;
                g_rows[idx] = [m.a[0], m.a[1], m.a[2]];
                let qnn = m.get(norm_axis, norm_axis);
                if inorm + 1 < nn {
                    let m2 = op.metric.at(it, inorm + 1);
                    let w2 = op.weight[grid.idx(it, inorm + 1)];
                    wqn[idx] = 0.5 * (w * qnn + w2 * m2.get(norm_axis, norm_axis));
                }
                if grid.dim == 2 {
                    wg12[idx] = w * m.a[1];
                    if it + 1 < nt {
                        let m2 = op.metric.at(it + 1, inorm);
                        let w2 = op.weight[grid.idx(it + 1, inorm)];
                        wqt[idx] = 0.5 * (w * m.a[0] + w2 * m2.a[0]);
                    }
                }
            }
        }
        Stencil {
            nt,
            nn,
            dim: grid.dim,
            h_t: grid.h_tang(),
            h_n: grid.h_normal(),
            inv_w,
            wqn,
            wqt,
            wg12,
            g_rows,
        }
    }
}

fn refresh_scratch(
    op: &WaveOperator,
    mats: &[Materialized],
    vmat: &Materialized,
    st: &Stencil,
    t: f64,
    sc: &mut StepScratch,
) {
    let grid = &op.grid;
    mats[0].fill(grid, t, false, &mut sc.a0);
    mats[0].fill(grid, t, true, &mut sc.a0t);
    vmat.fill(grid, t, false, &mut sc.v);
    for ax in 0..st.dim {
        let (head, tail) = sc.asp.split_at_mut(ax + 1);
        let _ = head;
        let _ = tail;
    }
    for ax in 0..st.dim {
        mats[ax + 1].fill(grid, t, false, &mut sc.asp[ax]);
    }
    // beta_j = Σ_k g^{jk} a_k, wbeta = w·beta, s0coef = a0² − i a0_t − v − Σ a_j beta_j
    let total = grid.total_nodes();
    for idx in 0..total {
        let g = &st.g_rows[idx];
        let (b_t, b_n) = if st.dim == 2 {
            let a1 = sc.asp[0][idx];
            let a2 = sc.asp[1][idx];
            (a1 * g[0] + a2 * g[1], a1 * g[1] + a2 * g[2])
        } else {
            (C64::new(0.0, 0.0), sc.asp[0][idx] * g[0])
        };
        let w = 1.0 / st.inv_w[idx];
        if st.dim == 2 {
            sc.beta[0][idx] = b_t;
            sc.wbeta[0][idx] = b_t * w;
        }
        let nax = st.dim - 1;
        sc.beta[nax][idx] = b_n;
        sc.wbeta[nax][idx] = b_n * w;
        let qaa = if st.dim == 2 {
            sc.asp[0][idx] * b_t + sc.asp[1][idx] * b_n
        } else {
            sc.asp[0][idx] * b_n
        };
        let a0 = sc.a0[idx];
        sc.s0coef[idx] = a0 * a0 - I * sc.a0t[idx] - sc.v[idx] - qaa;
    }
}

#[allow(clippy::too_many_arguments)]
fn step_row(
    st: &Stencil,
    sc: &StepScratch,
    u: &[C64],
    u_prev: &[C64],
    out_row: &mut [C64],
    it: usize,
    dt: f64,
) {
    let nn = st.nn;
    let row0 = it * nn;
    let hn2 = st.h_n * st.h_n;
    let nax = st.dim - 1;
    for inorm in 1..nn - 1 {
        let idx = row0 + inorm;
        // divergence-form principal part along the normal axis
        let mut lap = (st.wqn[idx] * (u[idx + 1] - u[idx]) - st.wqn[idx - 1] * (u[idx] - u[idx - 1]))
            / hn2;
        if st.dim == 2 {
            let ht2 = st.h_t * st.h_t;
            lap += (st.wqt[idx] * (u[idx + nn] - u[idx])
                - st.wqt[idx - nn] * (u[idx] - u[idx - nn]))
                / ht2;
            // cross terms D_t(w g12 D_n u) + D_n(w g12 D_t u)
            let dn = |j: usize| (u[j + 1] - u[j - 1]) / (2.0 * st.h_n);
            let dtan = |j: usize| (u[j + nn] - u[j - nn]) / (2.0 * st.h_t);
            lap += (st.wg12[idx + nn] * dn(idx + nn) - st.wg12[idx - nn] * dn(idx - nn))
                / (2.0 * st.h_t)
                + (st.wg12[idx + 1] * dtan(idx + 1) - st.wg12[idx - 1] * dtan(idx - 1))
                    / (2.0 * st.h_n);
        }
        // first-order potential terms
        let mut s1 = (sc.wbeta[nax][idx + 1] * u[idx + 1] - sc.wbeta[nax][idx - 1] * u[idx - 1])
            / (2.0 * st.h_n)
            * st.inv_w[idx]
            + sc.beta[nax][idx] * (u[idx + 1] - u[idx - 1]) / (2.0 * st.h_n);
        if st.dim == 2 {
            s1 += (sc.wbeta[0][idx + nn] * u[idx + nn] - sc.wbeta[0][idx - nn] * u[idx - nn])
                / (2.0 * st.h_t)
                * st.inv_w[idx]
                + sc.beta[0][idx] * (u[idx + nn] - u[idx - nn]) / (2.0 * st.h_t);
        }
        let rhs = lap * st.inv_w[idx] + I * s1 + sc.s0coef[idx] * u[idx];
        let ia0dt = I * sc.a0[idx] * dt;
        out_row[inorm] = ((u[idx] * 2.0 - u_prev[idx] * (C64::new(1.0, 0.0) - ia0dt))
            + rhs * dt * dt)
            / (C64::new(1.0, 0.0) + ia0dt);
    }
}

/// Run the march. Boundary data: `signal` on the measured (normal-low) face,
/// homogeneous Dirichlet on every other face.
pub fn solve(
    op: &WaveOperator,
    signal: &BoundarySignal,
    params: &SolveParams,
    record: &RecordSpec,
) -> Result<SolveOutput> {
    let grid = &op.grid;
    let nt = grid.n_tang();
    let nn = grid.n_normal();
    let total = grid.total_nodes();
    let span = params.t_end - params.t_start;
    if span <= 0.0 {
        return Err(LabError::Config("t_end must exceed t_start".into()));
    }
    let c_max = op.max_speed();
    let h_min = (0..grid.dim).map(|j| grid.h[j]).fold(f64::INFINITY, f64::min);
    let dt_req = params
        .dt_override
        .unwrap_or(params.cfl * h_min / c_max);
    // sharp stability bound for the centred stencil
    let inv_h2: f64 = (0..grid.dim).map(|j| 1.0 / (grid.h[j] * grid.h[j])).sum();
    let dt_stable = 0.999 / (c_max * inv_h2.sqrt());
    if dt_req > dt_stable {
        return Err(LabError::CflViolation {
            dt: dt_req,
            suggested: dt_stable,
        });
    }
    let steps = (span / dt_req).ceil() as usize;
    let dt = span / steps as f64;

    let st = Stencil::build(op);
    let mats: Vec<Materialized> = op.a.iter().map(|f| Materialized::build(f, grid)).collect();
    let vmat = Materialized::build(&op.v, grid);
    let mut sc = StepScratch {
        a0: vec![C64::new(0.0, 0.0); total],
        a0t: vec![C64::new(0.0, 0.0); total],
        v: vec![C64::new(0.0, 0.0); total],
        asp: vec![vec![C64::new(0.0, 0.0); total]; grid.dim],
        beta: vec![vec![C64::new(0.0, 0.0); total]; grid.dim],
        wbeta: vec![vec![C64::new(0.0, 0.0); total]; grid.dim],
        s0coef: vec![C64::new(0.0, 0.0); total],
    };

    let mut plan = RecordPlan::new(record, grid, params.t_start, dt, steps)?;

    let mut u_prev = vec![C64::new(0.0, 0.0); total];
    let mut u_curr = vec![C64::new(0.0, 0.0); total];
    let mut u_next = vec![C64::new(0.0, 0.0); total];
    apply_boundary(grid, signal, params.t_start, &mut u_prev);
    apply_boundary(grid, signal, params.t_start + dt, &mut u_curr);
    plan.push_level(params.t_start, &u_prev);
    plan.push_level(params.t_start + dt, &u_curr);

    for m in 1..steps {
        let t_m = params.t_start + m as f64 * dt;
        refresh_scratch(op, &mats, &vmat, &st, t_m, &mut sc);
        {
            let sc_ref = &sc;
            let st_ref = &st;
            let u_ref = &u_curr;
            let up_ref = &u_prev;
            if nt >= 8 {
                u_next
                    .par_chunks_mut(nn)
                    .enumerate()
                    .for_each(|(it, row)| {
                        if it > 0 && it + 1 < nt {
                            step_row(st_ref, sc_ref, u_ref, up_ref, row, it, dt);
                        }
                    });
            } else {
                for it in 0..nt {
                    if grid.dim == 2 && (it == 0 || it + 1 == nt) {
                        continue;
                    }
                    let row = &mut u_next[it * nn..(it + 1) * nn];
                    step_row(st_ref, sc_ref, u_ref, up_ref, row, it, dt);
                }
            }
        }
        let t_next = t_m + dt;
        apply_boundary(grid, signal, t_next, &mut u_next);
        if m % 50 == 0 || m + 1 == steps {
            let probe = u_next[total / 2].norm_sqr() + u_next[total / 3].norm_sqr();
            if !probe.is_finite() {
                return Err(LabError::Instability { step: m, t: t_next });
            }
        }
        plan.push_level(t_next, &u_next);
        std::mem::swap(&mut u_prev, &mut u_curr);
        std::mem::swap(&mut u_curr, &mut u_next);
    }

    if u_curr.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(LabError::Instability {
            step: steps,
            t: params.t_end,
        });
    }
    plan.finish(dt, steps)
}

fn apply_boundary(grid: &Grid, signal: &BoundarySignal, t: f64, u: &mut [C64]) {
    let nt = grid.n_tang();
    let nn = grid.n_normal();
    // measured face: normal-low
    for it in 0..nt {
        u[grid.idx(it, 0)] = signal(grid.tang_coord(it), t);
        u[grid.idx(it, nn - 1)] = C64::new(0.0, 0.0);
    }
    if grid.dim == 2 {
        for inorm in 0..nn {
            u[grid.idx(0, inorm)] = C64::new(0.0, 0.0);
            u[grid.idx(nt - 1, inorm)] = C64::new(0.0, 0.0);
        }
    }
}
