//! Discrete application of the raw and reduced operators to test functions.
//!
//! These mirror the operators' product structure with nested centred
//! differences and serve as independent oracles for manufactured-solution
//! residuals and the reduction round trip; the time marcher does not use
//! them.

use super::potentials::PotentialSet;
use super::reduction::ReducedCoefficients;
use crate::geometry::MetricSampler;
use crate::util::{C64, I};

type Fun<'a> = &'a dyn Fn(&[f64], f64) -> C64;

fn dt_c(u: Fun, x: &[f64], t: f64, dt: f64) -> C64 {
    (u(x, t + dt) - u(x, t - dt)) / (2.0 * dt)
}

fn dx_c(u: Fun, axis: usize, x: &[f64], t: f64, h: f64) -> C64 {
    let mut xp = [0.0; 2];
    let mut xm = [0.0; 2];
    xp[..x.len()].copy_from_slice(x);
    xm[..x.len()].copy_from_slice(x);
    xp[axis] += h;
    xm[axis] -= h;
    (u(&xp[..x.len()], t) - u(&xm[..x.len()], t)) / (2.0 * h)
}

/// Apply the raw operator
/// (−i∂_t + A₀)²u − Σ_j (1/w)(−i∂_j + A_j) w Σ_k g^{jk} (−i∂_k + A_k) u − V u
/// at a point, w = sqrt(g).
pub fn apply_raw_operator(
    metric: &dyn MetricSampler,
    pot: &PotentialSet,
    u: Fun,
    x: &[f64],
    t: f64,
    h: f64,
    dt: f64,
) -> C64 {
    let dim = pot.dim;
    // time factor applied twice
    let qt = |x: &[f64], t: f64| -> C64 { -I * dt_c(u, x, t, dt) + pot.a[0].eval(x, t) * u(x, t) };
    let time_part = -I * dt_c(&qt, x, t, dt) + pot.a[0].eval(x, t) * qt(x, t);

    let w = |x: &[f64]| -> f64 { (1.0 / metric.ginv(x).det()).sqrt() };
    // inner covector: F_j = w Σ_k g^{jk} (−i u_k + A_k u)
    let inner = |j: usize, x: &[f64], t: f64| -> C64 {
        let gi = metric.ginv(x);
        let mut s = C64::new(0.0, 0.0);
        for k in 0..dim {
            let pk = -I * dx_c(u, k, x, t, h) + pot.a[k + 1].eval(x, t) * u(x, t);
            s += gi.get(j, k) * pk;
        }
        s * w(x)
    };
    let mut spatial = C64::new(0.0, 0.0);
    for j in 0..dim {
        let fj = |x: &[f64], t: f64| inner(j, x, t);
        spatial += (-I * dx_c(&fj, j, x, t, h) + pot.a[j + 1].eval(x, t) * fj(x, t)) / w(x);
    }
    time_part - spatial - pot.v.eval(x, t) * u(x, t)
}

/// Apply the reduced operator
/// (−i∂_t + a_n)²u − (−i∂_{y_n} + a_n)²u − Σ_{j,k<n} (−i∂_j + a_j) g^{jk} (−i∂_k + a_k) u − V₁ u
/// at a point.
pub fn apply_reduced_operator(
    rc: &ReducedCoefficients,
    u: Fun,
    x: &[f64],
    t: f64,
    h: f64,
    dt: f64,
) -> C64 {
    let dim = rc.grid.dim;
    let na = dim - 1;
    let an = &rc.a_n1;
    let qt = |x: &[f64], t: f64| -> C64 { -I * dt_c(u, x, t, dt) + an.eval(x, t) * u(x, t) };
    let time_part = -I * dt_c(&qt, x, t, dt) + an.eval(x, t) * qt(x, t);
    let qn = |x: &[f64], t: f64| -> C64 { -I * dx_c(u, na, x, t, h) + an.eval(x, t) * u(x, t) };
    let normal_part = -I * dx_c(&qn, na, x, t, h) + an.eval(x, t) * qn(x, t);
    let mut tang = C64::new(0.0, 0.0);
    if dim == 2 {
        let a1 = &rc.a_tang1[0];
        let inner = |x: &[f64], t: f64| -> C64 {
            let g11 = rc.metric.ginv(x).a[0];
            g11 * (-I * dx_c(u, 0, x, t, h) + a1.eval(x, t) * u(x, t))
        };
        tang = -I * dx_c(&inner, 0, x, t, h) + a1.eval(x, t) * inner(x, t);
    }
    time_part - normal_part - tang - rc.v1.eval(x, t) * u(x, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::sampler::AnalyticField;
    use crate::geometry::{Face, Grid, MetricField};
    use crate::util::c;
    use std::sync::Arc;

    #[test]
    fn raw_operator_on_dalembert_solution_vanishes() {
        // flat, zero potentials: u = f(t − x) is annihilated
        let g = Grid::new(1, &[2.0], &[21], vec![Face::Low(0)], None).unwrap();
        let m = MetricField::flat(&g);
        let p = PotentialSet::zero(1);
        let u = |x: &[f64], t: f64| c(((t - x[0]) * 1.3).sin());
        let r = apply_raw_operator(&m, &p, &u, &[0.9], 1.1, 1e-3, 1e-3);
        assert!(r.norm() < 1e-5, "residual {r}");
    }

    #[test]
    fn raw_operator_picks_up_scalar_potential() {
        // u = 1 constant: Lu = (A₀² − Σ g A A − V)u → −V for zero A
        let g = Grid::new(1, &[2.0], &[21], vec![Face::Low(0)], None).unwrap();
        let m = MetricField::flat(&g);
        let mut p = PotentialSet::zero(1);
        p.v = Arc::new(AnalyticField::constant(1, c(0.7)));
        let u = |_x: &[f64], _t: f64| c(1.0);
        let r = apply_raw_operator(&m, &p, &u, &[1.0], 0.5, 1e-3, 1e-3);
        assert!((r + c(0.7)).norm() < 1e-9, "residual {r}");
    }

    #[test]
    fn reduced_operator_annihilates_phase_solution() {
        // constant a_n = α, V1 = 0: u = e^{ik(t−y) − 2iαy} solves the reduced
        // equation (plane-wave check of the characteristic form)
        let g = Grid::new(1, &[1.5], &[21], vec![Face::Low(0)], None).unwrap();
        let m = MetricField::flat(&g);
        let alpha = 0.4;
        let k = 3.0;
        let rc = ReducedCoefficients::from_presets(
            &g,
            m,
            Arc::new(AnalyticField::constant(1, c(alpha))),
            vec![],
            Arc::new(AnalyticField::zero(1)),
            true,
        )
        .unwrap();
        let u = |x: &[f64], t: f64| (I * (k * (t - x[0]) - 2.0 * alpha * x[0])).exp();
        let r = apply_reduced_operator(&rc, &u, &[0.7], 0.9, 1e-3, 1e-3);
        assert!(r.norm() < 1e-4, "residual {r}");
    }
}
