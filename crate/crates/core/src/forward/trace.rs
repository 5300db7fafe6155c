//! Post-hoc surface tracing from stored fields and Sobolev norms on traces.

use super::record::{IncomingSurface, SurfaceKind, SurfaceTrace, WaveField};
use crate::error::{LabError, Result};
use crate::util::interp::{cubic, cubic_deriv};
use crate::util::C64;
use ndarray::Array2;

/// Extract u, u_t, u_{y_n} on an incoming characteristic surface from a
/// stored space-time field (manufactured-field tests and small runs).
pub fn trace_incoming(field: &WaveField, surf: &IncomingSurface) -> Result<SurfaceTrace> {
    let grid = &field.grid;
    let nn = grid.n_normal();
    let hn = grid.h_normal();
    let nlev = field.levels.len();
    if nlev < 4 {
        return Err(LabError::Config("field too short for cubic tracing".into()));
    }
    let depth = grid.extent[grid.normal_axis()];
    let npar = surf.s.len();
    let ntang = surf.tang.1 - surf.tang.0;
    let mut u = Array2::zeros((npar, ntang));
    let mut u_t = Array2::zeros((npar, ntang));
    let mut u_yn = Array2::zeros((npar, ntang));
    for (ip, &s) in surf.s.iter().enumerate() {
        let yn = 0.5 * (surf.c - s);
        let t = 0.5 * (surf.c + s);
        if yn < -1e-12 || yn > depth + 1e-12 || t < field.t0 - 1e-9 || t > field.t_end() + 1e-9 {
            return Err(LabError::Support(format!(
                "surface point (s={s}) leaves the stored field box"
            )));
        }
        let q = (t - field.t0) / field.dt;
        let l0 = (q.floor() as isize - 1).clamp(0, nlev as isize - 4) as usize;
        let t_win0 = field.t0 + l0 as f64 * field.dt;
        for (col, it) in (surf.tang.0..surf.tang.1).enumerate() {
            let mut vals = [C64::new(0.0, 0.0); 4];
            let mut dvals = [C64::new(0.0, 0.0); 4];
            for l in 0..4 {
                let line = &field.levels[l0 + l][it * nn..(it + 1) * nn];
                vals[l] = cubic(line, 0.0, hn, yn.max(0.0));
                dvals[l] = cubic_deriv(line, 0.0, hn, yn.max(0.0));
            }
            u[[ip, col]] = cubic(&vals, t_win0, field.dt, t);
            u_t[[ip, col]] = cubic_deriv(&vals, t_win0, field.dt, t);
            u_yn[[ip, col]] = cubic(&dvals, t_win0, field.dt, t);
        }
    }
    Ok(SurfaceTrace {
        kind: SurfaceKind::Incoming,
        c: surf.c,
        param: surf.s.clone(),
        tang0: surf.tang.0,
        h_tang: grid.h_tang(),
        u,
        u_t,
        u_yn,
    })
}

/// Trapezoid weights in both surface directions.
fn surface_weights(trace: &SurfaceTrace) -> (Vec<f64>, Vec<f64>) {
    let npar = trace.param.len();
    let dp = if npar > 1 {
        trace.param[1] - trace.param[0]
    } else {
        1.0
    };
    let mut wp = vec![dp; npar];
    wp[0] = 0.5 * dp;
    wp[npar - 1] = 0.5 * dp;
    let ntang = trace.u.shape()[1];
    let mut wt = vec![trace.h_tang.max(1e-300); ntang];
    if ntang == 1 {
        wt[0] = 1.0;
    } else {
        wt[0] *= 0.5;
        wt[ntang - 1] *= 0.5;
    }
    (wp, wt)
}

/// ∫ f ḡ over the surface lattice (trapezoid in both directions).
pub fn surface_pairing(trace_w: &SurfaceTrace, f: &Array2<C64>, g: &Array2<C64>) -> C64 {
    let (wp, wt) = surface_weights(trace_w);
    let mut s = C64::new(0.0, 0.0);
    for ip in 0..wp.len() {
        for it in 0..wt.len() {
            s += f[[ip, it]] * g[[ip, it]].conj() * (wp[ip] * wt[it]);
        }
    }
    s
}

/// Tangential derivative of a trace array by centred differences.
pub fn tangential_deriv(trace: &SurfaceTrace, f: &Array2<C64>) -> Array2<C64> {
    let (npar, ntang) = (f.shape()[0], f.shape()[1]);
    let mut out = Array2::zeros((npar, ntang));
    if ntang < 3 || trace.h_tang == 0.0 {
        return out;
    }
    let h = trace.h_tang;
    for ip in 0..npar {
        for it in 0..ntang {
            out[[ip, it]] = if it == 0 {
                (-3.0 * f[[ip, 0]] + 4.0 * f[[ip, 1]] - f[[ip, 2]]) / (2.0 * h)
            } else if it + 1 == ntang {
                (3.0 * f[[ip, ntang - 1]] - 4.0 * f[[ip, ntang - 2]] + f[[ip, ntang - 3]])
                    / (2.0 * h)
            } else {
                (f[[ip, it + 1]] - f[[ip, it - 1]]) / (2.0 * h)
            };
        }
    }
    out
}

/// Derivative of a trace array along the surface parameter.
pub fn param_deriv(trace: &SurfaceTrace, f: &Array2<C64>) -> Array2<C64> {
    let (npar, ntang) = (f.shape()[0], f.shape()[1]);
    let mut out = Array2::zeros((npar, ntang));
    if npar < 3 {
        return out;
    }
    let h = trace.param[1] - trace.param[0];
    for it in 0..ntang {
        for ip in 0..npar {
            out[[ip, it]] = if ip == 0 {
                (-3.0 * f[[0, it]] + 4.0 * f[[1, it]] - f[[2, it]]) / (2.0 * h)
            } else if ip + 1 == npar {
                (3.0 * f[[npar - 1, it]] - 4.0 * f[[npar - 2, it]] + f[[npar - 3, it]]) / (2.0 * h)
            } else {
                (f[[ip + 1, it]] - f[[ip - 1, it]]) / (2.0 * h)
            };
        }
    }
    out
}

/// Squared L₂ norm of a trace array over the surface lattice.
pub fn l2_sq(trace: &SurfaceTrace, f: &Array2<C64>) -> f64 {
    let (wp, wt) = surface_weights(trace);
    let mut s = 0.0;
    for ip in 0..wp.len() {
        for it in 0..wt.len() {
            s += f[[ip, it]].norm_sqr() * wp[ip] * wt[it];
        }
    }
    s
}

/// Squared H¹ norm on the surface: |u|² + |∂_param u|² + |∂_tang u|², with
/// the parameter derivative taken from the recorded time/normal derivatives
/// (u_s on incoming surfaces, u_τ on outgoing ones) rather than lattice
/// differencing.
pub fn h1_sq(trace: &SurfaceTrace) -> f64 {
    let dpar = match trace.kind {
        SurfaceKind::Incoming => trace.u_s(),
        SurfaceKind::Outgoing => trace.u_tau(),
    };
    let dtang = tangential_deriv(trace, &trace.u);
    l2_sq(trace, &trace.u) + l2_sq(trace, &dpar) + l2_sq(trace, &dtang)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Face, Grid};
    use crate::util::c;

    fn grid1() -> Grid {
        Grid::new(1, &[2.0], &[81], vec![Face::Low(0)], None).unwrap()
    }

    #[test]
    fn manufactured_s_gives_unit_u_s() {
        // u = s = t − y_n: u_s ≡ 1 on any incoming surface
        let g = grid1();
        let field = WaveField::from_fn(&g, 0.0, 0.02, 100, |x, t| c(t - x[0]));
        let surf = IncomingSurface {
            c: 1.6,
            s: (0..30).map(|i| 0.1 + i as f64 * 0.04).collect(),
            tang: (0, 1),
        };
        let tr = trace_incoming(&field, &surf).unwrap();
        let us = tr.u_s();
        for v in us.iter() {
            assert!((v - c(1.0)).norm() < 1e-9, "{v}");
        }
    }

    #[test]
    fn manufactured_tau_gives_zero_u_s() {
        // u = τ = c − t − y_n is constant in s on the surface t + y_n = c
        let g = grid1();
        let cval = 1.6;
        let field = WaveField::from_fn(&g, 0.0, 0.02, 100, |x, t| c(cval - t - x[0]));
        let surf = IncomingSurface {
            c: cval,
            s: (0..30).map(|i| 0.1 + i as f64 * 0.04).collect(),
            tang: (0, 1),
        };
        let tr = trace_incoming(&field, &surf).unwrap();
        for v in tr.u_s().iter() {
            assert!(v.norm() < 1e-9, "{v}");
        }
        // and u on the surface is identically 0 there (τ = 0)
        for v in tr.u.iter() {
            assert!(v.norm() < 1e-9);
        }
    }

    #[test]
    fn trace_rejects_out_of_box() {
        let g = grid1();
        let field = WaveField::from_fn(&g, 0.0, 0.02, 50, |_, _| c(0.0));
        let surf = IncomingSurface {
            c: 9.0,
            s: vec![0.0, 0.5, 1.0, 1.5],
            tang: (0, 1),
        };
        assert!(trace_incoming(&field, &surf).is_err());
    }
}
