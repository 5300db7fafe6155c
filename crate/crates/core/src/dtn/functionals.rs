//! Boundary functionals determined by the D-to-N operator: the Green-identity
//! gap, the characteristic-surface functionals A₀ and A, the localized
//! functional A₁ via the constant-in-s projection, and the two-operator
//! consistency report.

use super::map::DtnMap;
use crate::error::{LabError, Result};
use crate::forward::{
    solve, BoundarySignal, CharacteristicSlab, RecordSpec, SolveParams, SurfaceTrace,
    WaveOperator,
};
use crate::util::quad::cumint4;
use crate::util::C64;
use ndarray::Array2;

/// Orientation factor linking the boundary pairing to the surface
/// functional: with the characteristic surface parameterized by increasing
/// s (the same orientation under which A₀ = A − corner and the probe
/// extraction hold), the divergence theorem over the region below the
/// surface gives
///   (Λf, g) − (f, Λ*g) = A0_ORIENTATION · ∫_Y (u_s v̄ − u v̄_s) ds dy′.
/// The factor is pinned here once and surfaced by the identity check, not
/// absorbed into either functional.
pub const A0_ORIENTATION: f64 = -1.0;

/// (Λf, g) − (f, Λ*g): boundary pairing on the basis row lattice.
/// f, g are coefficient vectors in the common basis.
pub fn green_gap(
    lam: &DtnMap,
    lam_star: &DtnMap,
    f: &[C64],
    g: &[C64],
    grid: &crate::geometry::Grid,
) -> Result<C64> {
    if lam.basis.len() != lam_star.basis.len() {
        return Err(LabError::Config("basis mismatch between the two maps".into()));
    }
    if lam.provenance != lam_star.provenance {
        return Err(LabError::Provenance(
            "green gap across maps with different provenance".into(),
        ));
    }
    let w = lam.basis.row_weights(grid);
    let lf = lam.apply(f);
    let lsg = lam_star.apply(g);
    let mut s = C64::new(0.0, 0.0);
    for r in 0..w.len() {
        s += (lf[r] * g[r].conj() - f[r] * lsg[r].conj()) * w[r];
    }
    Ok(s)
}

fn check_matched(u: &SurfaceTrace, v: &SurfaceTrace) {
    assert_eq!(u.param.len(), v.param.len(), "trace lattices differ");
    assert_eq!(u.tang0, v.tang0);
    assert_eq!(u.u.shape(), v.u.shape());
}

fn tang_weights(tr: &SurfaceTrace) -> Vec<f64> {
    let ntang = tr.u.shape()[1];
    if ntang == 1 {
        return vec![1.0];
    }
    let mut w = vec![tr.h_tang; ntang];
    w[0] *= 0.5;
    w[ntang - 1] *= 0.5;
    w
}

/// Reduce a (param × tang) integrand to a per-parameter line by tangential
/// trapezoid quadrature.
fn tang_reduce(tr: &SurfaceTrace, f: &Array2<C64>) -> Vec<C64> {
    let w = tang_weights(tr);
    (0..f.shape()[0])
        .map(|ip| (0..w.len()).map(|it| f[[ip, it]] * w[it]).sum())
        .collect()
}

/// A₀ = ∫ (u_s v̄ − u v̄_s) ds dy′ over the matched incoming surface.
pub fn volume_functional_a0(u: &SurfaceTrace, v: &SurfaceTrace) -> C64 {
    check_matched(u, v);
    let us = u.u_s();
    let vs = v.u_s();
    let shape = (u.param.len(), u.u.shape()[1]);
    let mut integrand = Array2::zeros(shape);
    for ip in 0..shape.0 {
        for it in 0..shape.1 {
            integrand[[ip, it]] =
                us[[ip, it]] * v.u[[ip, it]].conj() - u.u[[ip, it]] * vs[[ip, it]].conj();
        }
    }
    let line = tang_reduce(u, &integrand);
    let ds = u.param[1] - u.param[0];
    *cumint4(&line, ds).last().unwrap()
}

/// A = 2 ∫ u_s v̄ ds dy′.
pub fn functional_a(u: &SurfaceTrace, v: &SurfaceTrace) -> C64 {
    check_matched(u, v);
    let us = u.u_s();
    let shape = (u.param.len(), u.u.shape()[1]);
    let mut integrand = Array2::zeros(shape);
    for ip in 0..shape.0 {
        for it in 0..shape.1 {
            integrand[[ip, it]] = us[[ip, it]] * v.u[[ip, it]].conj() * 2.0;
        }
    }
    let line = tang_reduce(u, &integrand);
    let ds = u.param[1] - u.param[0];
    *cumint4(&line, ds).last().unwrap()
}

/// The corner path for A: A₀ plus the line integral of u v̄ at the corner
/// s = T (y_n = 0, t = T), where the traces carry the boundary data values.
pub fn functional_a_corner_path(u: &SurfaceTrace, v: &SurfaceTrace) -> C64 {
    check_matched(u, v);
    let a0 = volume_functional_a0(u, v);
    let w = tang_weights(u);
    let last = u.param.len() - 1;
    let mut corner = C64::new(0.0, 0.0);
    for it in 0..w.len() {
        corner += u.u[[last, it]] * v.u[[last, it]].conj() * w[it];
    }
    a0 + corner
}

fn s_index(tr: &SurfaceTrace, s0: f64) -> Result<usize> {
    let ds = tr.param[1] - tr.param[0];
    let q = (s0 - tr.param[0]) / ds;
    let i = q.round() as isize;
    if i < 0 || i as usize >= tr.param.len() || (q - i as f64).abs() > 1e-6 {
        return Err(LabError::Config(format!(
            "s0 = {s0} is not a lattice point of the surface trace"
        )));
    }
    Ok(i as usize)
}

/// A₁ = 2 ∫_{s ≤ s0} u_s v̄ ds dy′ (the localized functional, direct path).
pub fn functional_a1_direct(u: &SurfaceTrace, v: &SurfaceTrace, s0: f64) -> Result<C64> {
    check_matched(u, v);
    let is0 = s_index(u, s0)?;
    let us = u.u_s();
    let shape = (u.param.len(), u.u.shape()[1]);
    let mut integrand = Array2::zeros(shape);
    for ip in 0..shape.0 {
        for it in 0..shape.1 {
            integrand[[ip, it]] = us[[ip, it]] * v.u[[ip, it]].conj() * 2.0;
        }
    }
    let line = tang_reduce(u, &integrand);
    let ds = u.param[1] - u.param[0];
    Ok(cumint4(&line, ds)[is0])
}

/// ∫_{s ≤ s0} u v̄_s ds dy′ (the second localized functional).
pub fn functional_uvs(u: &SurfaceTrace, v: &SurfaceTrace, s0: f64) -> Result<C64> {
    check_matched(u, v);
    let is0 = s_index(u, s0)?;
    let vs = v.u_s();
    let shape = (u.param.len(), u.u.shape()[1]);
    let mut integrand = Array2::zeros(shape);
    for ip in 0..shape.0 {
        for it in 0..shape.1 {
            integrand[[ip, it]] = u.u[[ip, it]] * vs[[ip, it]].conj();
        }
    }
    let line = tang_reduce(u, &integrand);
    let ds = u.param[1] - u.param[0];
    Ok(cumint4(&line, ds)[is0])
}

/// A(u₀, v) for the projection u₀: supported on {s ≥ s0} within the
/// expanded patch, where u₀s = u_s (the constant-in-s extension drops out
/// of the s-derivative). Integrated as a clean segment over [s0, s_hi].
pub fn functional_a_projected(
    u: &SurfaceTrace,
    v: &SurfaceTrace,
    s0: f64,
    r2_tang: (usize, usize),
) -> Result<C64> {
    check_matched(u, v);
    let is0 = s_index(u, s0)?;
    let us = u.u_s();
    let npar = u.param.len();
    let ntang = u.u.shape()[1];
    let mut integrand = Array2::zeros((npar - is0, ntang));
    for ip in is0..npar {
        for it in 0..ntang {
            let node = u.tang0 + it;
            if node >= r2_tang.0 && node < r2_tang.1 {
                integrand[[ip - is0, it]] = us[[ip, it]] * v.u[[ip, it]].conj() * 2.0;
            }
        }
    }
    let w = tang_weights(u);
    let line: Vec<C64> = (0..npar - is0)
        .map(|ip| (0..ntang).map(|it| integrand[[ip, it]] * w[it]).sum())
        .collect();
    let ds = u.param[1] - u.param[0];
    Ok(*cumint4(&line, ds).last().unwrap())
}

/// Both evaluation paths of A₁: the direct localized integral and
/// A(u, v) − A(u₀, v).
pub fn functional_a1_two_path(
    u: &SurfaceTrace,
    v: &SurfaceTrace,
    slab: &CharacteristicSlab,
    s0: f64,
) -> Result<(C64, C64)> {
    let direct = functional_a1_direct(u, v, s0)?;
    let a_full = functional_a(u, v);
    let a_proj = functional_a_projected(u, v, s0, slab.gamma_j(2))?;
    Ok((direct, a_full - a_proj))
}

/// Restriction of a trace to a parameter range and tangential node range.
pub fn trace_subset(
    tr: &SurfaceTrace,
    p_range: (f64, f64),
    tang: (usize, usize),
) -> SurfaceTrace {
    let sel: Vec<usize> = tr
        .param
        .iter()
        .enumerate()
        .filter(|(_, &p)| p >= p_range.0 - 1e-12 && p <= p_range.1 + 1e-12)
        .map(|(i, _)| i)
        .collect();
    let t0 = tang.0.max(tr.tang0);
    let t1 = tang.1.min(tr.tang0 + tr.u.shape()[1]);
    let cols: Vec<usize> = (t0..t1).map(|n| n - tr.tang0).collect();
    let shape = (sel.len(), cols.len());
    let mut u = Array2::zeros(shape);
    let mut u_t = Array2::zeros(shape);
    let mut u_yn = Array2::zeros(shape);
    for (i, &ip) in sel.iter().enumerate() {
        for (j, &c) in cols.iter().enumerate() {
            u[[i, j]] = tr.u[[ip, c]];
            u_t[[i, j]] = tr.u_t[[ip, c]];
            u_yn[[i, j]] = tr.u_yn[[ip, c]];
        }
    }
    SurfaceTrace {
        kind: tr.kind,
        c: tr.c,
        param: sel.iter().map(|&i| tr.param[i]).collect(),
        tang0: t0,
        h_tang: tr.h_tang,
        u,
        u_t,
        u_yn,
    }
}

/// Report of the two-operator functional equality and trace-norm
/// equivalence for an equivalent coefficient pair.
#[derive(Debug, Clone)]
pub struct PairConsistency {
    /// |(u_{0s}^{(1)}, v₁) − (u_{0s}^{(2)}, v₂)|.
    pub pairing_diff: f64,
    pub pairing_scale: f64,
    /// ‖u₂‖_{1,Y₂} / ‖u₁‖_{1,Y₂}.
    pub norm_ratio: f64,
}

/// Solve both operators with common data and compare the projected pairing
/// and the Y₂ trace norms.
pub fn verify_pair_consistency(
    op1: &WaveOperator,
    op2: &WaveOperator,
    slab: &CharacteristicSlab,
    f: &BoundarySignal,
    g: &BoundarySignal,
    s0: f64,
    cfl: f64,
) -> Result<PairConsistency> {
    let surf = slab.y_surface(3, slab.t1, slab.t);
    let record = RecordSpec {
        incoming: vec![surf],
        ..Default::default()
    };
    let params = SolveParams::new(slab.t1, slab.t, cfl);
    let mut pairings = Vec::new();
    let mut norms = Vec::new();
    for op in [op1, op2] {
        let uf = solve(op, f, &params, &record)?;
        let vg = solve(&op.adjoint(), g, &params, &record)?;
        let ut = &uf.incoming[0];
        let vt = &vg.incoming[0];
        // (u_{0s}, v) = ½ A(u₀, v)
        let pairing = functional_a_projected(ut, vt, s0, slab.gamma_j(2))? * 0.5;
        pairings.push(pairing);
        let y2 = trace_subset(ut, (s0, slab.t), slab.y_tang_range(2, s0));
        norms.push(crate::forward::h1_sq(&y2).sqrt());
    }
    Ok(PairConsistency {
        pairing_diff: (pairings[0] - pairings[1]).norm(),
        pairing_scale: pairings[0].norm().max(pairings[1].norm()),
        norm_ratio: norms[1] / norms[0].max(1e-300),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::record::SurfaceKind;
    use crate::util::c;

    /// Trace with prescribed u and u_s on a lattice (u_t, u_yn chosen so
    /// u_s = ½(u_t − u_yn) matches).
    fn manufactured(
        s: Vec<f64>,
        ntang: usize,
        h_tang: f64,
        u: impl Fn(f64, usize) -> C64,
        us: impl Fn(f64, usize) -> C64,
    ) -> SurfaceTrace {
        let npar = s.len();
        let mut uu = Array2::zeros((npar, ntang));
        let mut ut = Array2::zeros((npar, ntang));
        let mut uyn = Array2::zeros((npar, ntang));
        for ip in 0..npar {
            for it in 0..ntang {
                uu[[ip, it]] = u(s[ip], it);
                ut[[ip, it]] = us(s[ip], it);
                uyn[[ip, it]] = -us(s[ip], it);
            }
        }
        SurfaceTrace {
            kind: SurfaceKind::Incoming,
            c: *s.last().unwrap(),
            param: s,
            tang0: 0,
            h_tang,
            u: uu,
            u_t: ut,
            u_yn: uyn,
        }
    }

    fn lattice(n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
    }

    #[test]
    fn a0_antisymmetry_for_real_equal_traces() {
        let s = lattice(40, 0.0, 1.0);
        let u = manufactured(s, 5, 0.1, |sv, _| c(sv * sv), |sv, _| c(2.0 * sv));
        let a0 = volume_functional_a0(&u, &u);
        assert!(a0.norm() < 1e-12, "{a0}");
    }

    #[test]
    fn a0_direct_integral_on_unit_surface() {
        // u = s, v = 1 on a unit-measure surface: A₀ = ∫ 1 = |Y|
        let s = lattice(50, 0.0, 1.0);
        let u = manufactured(s.clone(), 11, 0.1, |sv, _| c(sv), |_, _| c(1.0));
        let v = manufactured(s, 11, 0.1, |_, _| c(1.0), |_, _| c(0.0));
        let a0 = volume_functional_a0(&u, &v);
        assert!((a0 - c(1.0)).norm() < 1e-10, "{a0}");
    }

    #[test]
    fn a_two_paths_agree_on_smooth_traces() {
        let s = lattice(60, 0.2, 1.4);
        let u = manufactured(
            s.clone(),
            9,
            0.05,
            |sv, it| c((1.3 * sv).sin() * (1.0 + 0.1 * it as f64)),
            |sv, it| c(1.3 * (1.3 * sv).cos() * (1.0 + 0.1 * it as f64)),
        );
        let v = manufactured(
            s,
            9,
            0.05,
            |sv, it| c((0.9 * sv + 0.3).cos() * (1.0 + 0.05 * it as f64)),
            |sv, it| c(-0.9 * (0.9 * sv + 0.3).sin() * (1.0 + 0.05 * it as f64)),
        );
        let direct = functional_a(&u, &v);
        let corner = functional_a_corner_path(&u, &v);
        // the corner identity holds when v vanishes at the inflow end s = s_lo;
        // these traces do not vanish there, so compare after windowing:
        // instead check the algebraic identity A = A₀ + corner + inflow term
        let a0 = volume_functional_a0(&u, &v);
        let inflow: C64 = {
            let w = 0.05;
            let mut sum = C64::new(0.0, 0.0);
            for it in 0..9 {
                let wt = if it == 0 || it == 8 { 0.5 * w } else { w };
                sum += u.u[[0, it]] * v.u[[0, it]].conj() * wt;
            }
            sum
        };
        let reconstructed = a0 + (corner - a0) - inflow;
        // A − (A₀ + corner − inflow) should vanish to quadrature accuracy
        assert!(
            (direct - reconstructed).norm() < 1e-6,
            "direct {direct} vs {reconstructed}"
        );
    }

    #[test]
    fn a1_direct_matches_projection_for_localized_traces() {
        // u vanishing near the inflow end: the two A₁ paths agree
        let s = lattice(80, 0.0, 2.0);
        let bump = |sv: f64| {
            if sv <= 0.3 || sv >= 1.9 {
                0.0
            } else {
                ((sv - 0.3) * (1.9 - sv)).powi(2)
            }
        };
        let dbump = |sv: f64| {
            let e = 1e-6;
            (bump(sv + e) - bump(sv - e)) / (2.0 * e)
        };
        let u = manufactured(s.clone(), 1, 0.0, |sv, _| c(bump(sv)), |sv, _| c(dbump(sv)));
        let v = manufactured(
            s,
            1,
            0.0,
            |sv, _| c((0.8 * sv).cos()),
            |sv, _| c(-0.8 * (0.8 * sv).sin()),
        );
        let s0 = 1.2;
        let direct = functional_a1_direct(&u, &v, s0).unwrap();
        // A(u,v) − A(u₀,v) with u₀ = u_s on {s ≥ s0} (1-D: full tang range)
        let a_full = functional_a(&u, &v);
        let a_proj = functional_a_projected(&u, &v, s0, (0, 1)).unwrap();
        let via = a_full - a_proj;
        assert!(
            (direct - via).norm() < 1e-6,
            "direct {direct} vs projection {via}"
        );
    }

    #[test]
    fn a1_equals_a_when_support_below_s0() {
        let s = lattice(80, 0.0, 2.0);
        let bump = |sv: f64| {
            if sv <= 0.2 || sv >= 1.0 {
                0.0
            } else {
                ((sv - 0.2) * (1.0 - sv)).powi(3)
            }
        };
        let dbump = |sv: f64| {
            let e = 1e-6;
            (bump(sv + e) - bump(sv - e)) / (2.0 * e)
        };
        let u = manufactured(s.clone(), 1, 0.0, |sv, _| c(bump(sv)), |sv, _| c(dbump(sv)));
        let v = manufactured(s, 1, 0.0, |sv, _| c(1.0 + 0.3 * sv), |_, _| c(0.3));
        let a1 = functional_a1_direct(&u, &v, 1.5).unwrap();
        let a = functional_a(&u, &v);
        assert!((a1 - a).norm() < 1e-9);
    }
}
