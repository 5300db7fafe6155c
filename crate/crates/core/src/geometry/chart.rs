//! Boundary-normal (semi-geodesic) chart built by integrating the geodesic
//! flow from the measured face, and the residual check of its defining
//! normal-form conditions.

use super::diffeo::Diffeomorphism;
use super::grid::Grid;
use super::metric::{MetricField, MetricSampler};
use crate::error::{LabError, Result};
use crate::util::c;
use crate::util::interp::cubic;

/// Threshold on the flow-map Jacobian determinant under which we declare a
/// caustic. Well inside float accuracy; flags genuine focusing.
pub const CAUSTIC_THRESHOLD: f64 = 1e-3;

/// Chart lattice: `x(y', y_n)` with `y_n` the arclength along the
/// boundary-normal geodesic started at `(y', 0)`.
pub struct SemiGeodesicChart {
    /// Tangential boundary coordinates of the geodesic feet.
    pub yprime: Vec<f64>,
    /// Normal lattice values 0, h_c, 2 h_c, ...
    pub yn: Vec<f64>,
    /// x positions, row-major [i_yprime][i_yn], each [x1, x2].
    pub x: Vec<[f64; 2]>,
    pub dim: usize,
}

fn christoffel(metric: &dyn MetricSampler, x: &[f64]) -> [[[f64; 2]; 2]; 2] {
    // Γ^m_{ab} = ½ g^{mc} (∂_a G_{cb} + ∂_b G_{ca} − ∂_c G_{ab}), G = ginv⁻¹,
    // ∂G = −G (∂ginv) G
    let dim = metric.dim();
    let gi = metric.ginv(x);
    let g = gi.inverse();
    let mut dg = [[[0.0; 2]; 2]; 2]; // dg[axis][j][k] = ∂_axis G_{jk}
    for axis in 0..dim {
        let dgi = metric.dginv(axis, x);
        // −G dgi G
        for j in 0..dim {
            for k in 0..dim {
                let mut s = 0.0;
                for p in 0..dim {
                    for q in 0..dim {
                        s += g.get(j, p) * dgi.get(p, q) * g.get(q, k);
                    }
                }
                dg[axis][j][k] = -s;
            }
        }
    }
    let mut gamma = [[[0.0; 2]; 2]; 2];
    for m in 0..dim {
        for a in 0..dim {
            for b in 0..dim {
                let mut s = 0.0;
                for cc in 0..dim {
                    s += gi.get(m, cc) * (dg[a][cc][b] + dg[b][cc][a] - dg[cc][a][b]);
                }
                gamma[m][a][b] = 0.5 * s;
            }
        }
    }
    gamma
}

fn geodesic_rhs(metric: &dyn MetricSampler, state: &[f64; 4], dim: usize) -> [f64; 4] {
    let x = [state[0], state[1]];
    let v = [state[2], state[3]];
    let gam = christoffel(metric, &x[..dim]);
    let mut acc = [0.0; 2];
    for m in 0..dim {
        let mut s = 0.0;
        for a in 0..dim {
            for b in 0..dim {
                s += gam[m][a][b] * v[a] * v[b];
            }
        }
        acc[m] = -s;
    }
    [v[0], v[1], acc[0], acc[1]]
}

fn rk4_step(metric: &dyn MetricSampler, state: &mut [f64; 4], ds: f64, dim: usize) {
    let k1 = geodesic_rhs(metric, state, dim);
    let mut s2 = *state;
    for i in 0..4 {
        s2[i] += 0.5 * ds * k1[i];
    }
    let k2 = geodesic_rhs(metric, &s2, dim);
    let mut s3 = *state;
    for i in 0..4 {
        s3[i] += 0.5 * ds * k2[i];
    }
    let k3 = geodesic_rhs(metric, &s3, dim);
    let mut s4 = *state;
    for i in 0..4 {
        s4[i] += ds * k3[i];
    }
    let k4 = geodesic_rhs(metric, &s4, dim);
    for i in 0..4 {
        state[i] += ds / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

/// Build the boundary chart over the probing patch of `grid`, integrating the
/// geodesic flow with a classical 4th-order one-step method at step h/2. The
/// initial velocity at a foot point is the inward unit co-normal
/// `g^{·n}/sqrt(g^{nn})`.
pub fn semigeodesic_chart(
    metric: &dyn MetricSampler,
    grid: &Grid,
    depth: f64,
) -> Result<SemiGeodesicChart> {
    grid.require_measured_low_face()?;
    let dim = grid.dim;
    let h = grid.h_normal();
    let ds = 0.5 * h;
    let n_steps = (depth / ds).ceil() as usize;
    let (t0, t1) = grid.gamma_tang_range();
    let yprime: Vec<f64> = (t0..t1).map(|it| grid.tang_coord(it)).collect();
    let n_feet = yprime.len().max(1);

    let yn: Vec<f64> = (0..=n_steps).map(|i| i as f64 * ds).collect();
    let mut x = vec![[0.0; 2]; n_feet * yn.len()];

    for (fi, &yp) in yprime.iter().enumerate() {
        let foot = if dim == 2 { [yp, 0.0] } else { [0.0, 0.0] };
        let gi = metric.ginv(&foot[..dim]);
        let norm_axis = dim - 1;
        let gnn = gi.get(norm_axis, norm_axis);
        let scale = 1.0 / gnn.sqrt();
        let v = if dim == 2 {
            [gi.get(0, 1) * scale, gi.get(1, 1) * scale]
        } else {
            [gi.get(0, 0) * scale, 0.0]
        };
        let mut state = [foot[0], foot[1], v[0], v[1]];
        x[fi * yn.len()] = [foot[0], foot[1]];
        for step in 1..=n_steps {
            rk4_step(metric, &mut state, ds, dim);
            x[fi * yn.len() + step] = [state[0], state[1]];
        }
    }

    let chart = SemiGeodesicChart {
        yprime,
        yn,
        x,
        dim,
    };
    chart.check_caustics()?;
    Ok(chart)
}

impl SemiGeodesicChart {
    fn nf(&self) -> usize {
        self.yprime.len().max(1)
    }

    fn xat(&self, fi: usize, ni: usize) -> [f64; 2] {
        self.x[fi * self.yn.len() + ni]
    }

    /// Flow-map Jacobian determinant at lattice point, by centred (one-sided
    /// at edges) differences of the lattice positions.
    fn flow_jacobian_det(&self, fi: usize, ni: usize) -> f64 {
        let nn = self.yn.len();
        let dyn_ = self.yn[1] - self.yn[0];
        let dxdn = {
            let (a, b, s) = if ni == 0 {
                (self.xat(fi, 0), self.xat(fi, 1), dyn_)
            } else if ni + 1 == nn {
                (self.xat(fi, nn - 2), self.xat(fi, nn - 1), dyn_)
            } else {
                (self.xat(fi, ni - 1), self.xat(fi, ni + 1), 2.0 * dyn_)
            };
            [(b[0] - a[0]) / s, (b[1] - a[1]) / s]
        };
        if self.dim == 1 {
            return dxdn[0];
        }
        let nf = self.nf();
        let dyp = if nf > 1 {
            self.yprime[1] - self.yprime[0]
        } else {
            1.0
        };
        let dxdp = if nf == 1 {
            [1.0, 0.0]
        } else {
            let (a, b, s) = if fi == 0 {
                (self.xat(0, ni), self.xat(1, ni), dyp)
            } else if fi + 1 == nf {
                (self.xat(nf - 2, ni), self.xat(nf - 1, ni), dyp)
            } else {
                (self.xat(fi - 1, ni), self.xat(fi + 1, ni), 2.0 * dyp)
            };
            [(b[0] - a[0]) / s, (b[1] - a[1]) / s]
        };
        dxdp[0] * dxdn[1] - dxdp[1] * dxdn[0]
    }

    fn check_caustics(&self) -> Result<()> {
        let mut max_depth = self.yn[self.yn.len() - 1];
        for ni in 0..self.yn.len() {
            for fi in 0..self.nf() {
                if self.flow_jacobian_det(fi, ni).abs() < CAUSTIC_THRESHOLD {
                    max_depth = if ni > 0 { self.yn[ni - 1] } else { 0.0 };
                    return Err(LabError::Caustic {
                        threshold: CAUSTIC_THRESHOLD,
                        depth: self.yn[ni],
                        max_depth,
                    });
                }
            }
        }
        let _ = max_depth;
        Ok(())
    }

    /// Interpolated flow map x(y).
    pub fn x_of_y(&self, y: &[f64]) -> [f64; 2] {
        let nn = self.yn.len();
        let hn = self.yn[1] - self.yn[0];
        let ynv = if self.dim == 2 { y[1] } else { y[0] };
        if self.dim == 1 {
            let line: Vec<_> = (0..nn).map(|ni| c(self.xat(0, ni)[0])).collect();
            return [cubic(&line, 0.0, hn, ynv).re, 0.0];
        }
        let nf = self.nf();
        let hp = self.yprime[1] - self.yprime[0];
        let mut out = [0.0; 2];
        for comp in 0..2 {
            // interpolate along yn per foot, then across feet
            let q = (y[0] - self.yprime[0]) / hp;
            let i0 = (q.floor() as isize - 1).clamp(0, nf as isize - 4) as usize;
            let mut vals = [0.0; 4];
            for (j, v) in vals.iter_mut().enumerate() {
                let line: Vec<_> = (0..nn).map(|ni| c(self.xat(i0 + j, ni)[comp])).collect();
                *v = cubic(&line, 0.0, hn, ynv).re;
            }
            let cv: Vec<_> = vals.iter().map(|&v| c(v)).collect();
            out[comp] = cubic(&cv, self.yprime[0] + i0 as f64 * hp, hp, y[0]).re;
        }
        out
    }

    /// Convert to a `Diffeomorphism` (forward y(x) by Newton on the flow map).
    pub fn into_diffeomorphism(self) -> Diffeomorphism {
        let dim = self.dim;
        let chart = std::sync::Arc::new(self);
        let c1 = chart.clone();
        let inverse = Box::new(move |y: &[f64]| c1.x_of_y(y));
        let c2 = chart.clone();
        let jac_xy = move |y: &[f64]| -> [f64; 4] {
            // Dx/Dy by centred differences of the interpolated flow map
            let h = 1e-5;
            let mut j = [0.0; 4];
            for a in 0..dim {
                let mut yp = [0.0; 2];
                let mut ym = [0.0; 2];
                yp[..y.len()].copy_from_slice(y);
                ym[..y.len()].copy_from_slice(y);
                yp[a] += h;
                ym[a] -= h;
                let xp = c2.x_of_y(&yp[..dim]);
                let xm = c2.x_of_y(&ym[..dim]);
                for b in 0..dim {
                    j[b * 2 + a] = (xp[b] - xm[b]) / (2.0 * h);
                }
            }
            if dim == 1 {
                [j[0], 0.0, 0.0, 1.0]
            } else {
                j
            }
        };
        let c3 = chart.clone();
        let jac_fn = {
            let jac_xy = jac_xy.clone();
            Box::new(move |x: &[f64]| -> [f64; 4] {
                // Dy/Dx = (Dx/Dy)^{-1} at y(x): invert Newton then the matrix
                let y = newton_forward(&c3, x, dim);
                let j = jac_xy(&y[..dim]);
                if dim == 1 {
                    [1.0 / j[0], 0.0, 0.0, 1.0]
                } else {
                    let det = j[0] * j[3] - j[1] * j[2];
                    [j[3] / det, -j[1] / det, -j[2] / det, j[0] / det]
                }
            })
        };
        let c4 = chart.clone();
        let forward = Box::new(move |x: &[f64]| newton_forward(&c4, x, dim));
        Diffeomorphism::new(dim, forward, inverse, jac_fn)
    }
}

fn newton_forward(chart: &SemiGeodesicChart, x: &[f64], dim: usize) -> [f64; 2] {
    // initial guess: boundary foot below x, arclength = euclidean height
    let mut y = if dim == 2 { [x[0], x[1]] } else { [x[0], 0.0] };
    for _ in 0..60 {
        let xx = chart.x_of_y(&y[..dim]);
        let mut r = [0.0; 2];
        for b in 0..dim {
            r[b] = xx[b] - x[b];
        }
        let resid: f64 = r[..dim].iter().map(|v| v.abs()).sum();
        if resid < 1e-13 {
            break;
        }
        // finite-difference Jacobian of the flow map
        let h = 1e-6;
        let mut j = [0.0; 4];
        for a in 0..dim {
            let mut yp = y;
            yp[a] += h;
            let xp = chart.x_of_y(&yp[..dim]);
            for b in 0..dim {
                j[b * 2 + a] = (xp[b] - xx[b]) / h;
            }
        }
        if dim == 1 {
            y[0] -= r[0] / j[0];
        } else {
            let det = j[0] * j[3] - j[1] * j[2];
            y[0] -= (j[3] * r[0] - j[1] * r[1]) / det;
            y[1] -= (-j[2] * r[0] + j[0] * r[1]) / det;
        }
    }
    y
}

/// Residual of the semi-geodesic normal form: max over nodes of
/// |g^{nn} − 1| + Σ_j |g^{nj}|.
pub fn verify_semigeodesic(metric: &MetricField) -> f64 {
    let grid = &metric.grid;
    let na = grid.normal_axis();
    let mut worst: f64 = 0.0;
    for it in 0..grid.n_tang() {
        for inorm in 0..grid.n_normal() {
            let m = metric.at(it, inorm);
            let mut r = (m.get(na, na) - 1.0).abs();
            for j in 0..grid.dim {
                if j != na {
                    r += m.get(na, j).abs();
                }
            }
            worst = worst.max(r);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::grid::Face;
    use crate::geometry::metric::{pullback_metric, SymMat};
    use crate::util::quad::adaptive_simpson;

    #[test]
    fn flat_chart_is_identity() {
        let g = Grid::new(2, &[1.0, 1.0], &[9, 9], vec![Face::Low(1)], None).unwrap();
        let m = MetricField::flat(&g);
        let chart = semigeodesic_chart(&m, &g, 0.9).unwrap();
        for (fi, &yp) in chart.yprime.iter().enumerate() {
            for (ni, &yn) in chart.yn.iter().enumerate() {
                let x = chart.xat(fi, ni);
                assert!((x[0] - yp).abs() < 1e-10);
                assert!((x[1] - yn).abs() < 1e-10);
            }
        }
    }

    struct Conformal1d;
    impl MetricSampler for Conformal1d {
        fn dim(&self) -> usize {
            1
        }
        fn ginv(&self, x: &[f64]) -> SymMat {
            let c = 1.0 + 0.3 * (2.0 * x[0]).sin();
            SymMat::new1(c * c)
        }
        fn dginv(&self, _axis: usize, x: &[f64]) -> SymMat {
            let c = 1.0 + 0.3 * (2.0 * x[0]).sin();
            SymMat::new1(2.0 * c * 0.6 * (2.0 * x[0]).cos())
        }
    }

    #[test]
    fn arclength_matches_quadrature_oracle_1d() {
        // y_n(x) = ∫_0^x dξ/c(ξ) for g^{11} = c²; verify the flow inverse
        let g = Grid::new(1, &[1.2], &[61], vec![Face::Low(0)], None).unwrap();
        let chart = semigeodesic_chart(&Conformal1d, &g, 0.8).unwrap();
        let cfun = |x: f64| 1.0 + 0.3 * (2.0 * x).sin();
        // chart gives x(y_n); oracle gives y_n(x): compose
        for &yn in chart.yn.iter().skip(1).step_by(7) {
            let x = chart.x_of_y(&[yn]);
            let oracle =
                adaptive_simpson(&|t: f64| crate::util::c(1.0 / cfun(t)), 0.0, x[0], 1e-12).re;
            assert!(
                (oracle - yn).abs() < 1e-7,
                "yn={yn} oracle={oracle} at x={}",
                x[0]
            );
        }
    }

    struct Conformal2d;
    impl MetricSampler for Conformal2d {
        fn dim(&self) -> usize {
            2
        }
        fn ginv(&self, x: &[f64]) -> SymMat {
            let c = 1.0 + 0.15 * (1.3 * x[0]).sin() * (0.9 * x[1] + 0.2).cos();
            SymMat::new2(c * c, 0.0, c * c)
        }
        fn dginv(&self, axis: usize, x: &[f64]) -> SymMat {
            let c = 1.0 + 0.15 * (1.3 * x[0]).sin() * (0.9 * x[1] + 0.2).cos();
            let dc = match axis {
                0 => 0.15 * 1.3 * (1.3 * x[0]).cos() * (0.9 * x[1] + 0.2).cos(),
                _ => -0.15 * 0.9 * (1.3 * x[0]).sin() * (0.9 * x[1] + 0.2).sin(),
            };
            SymMat::new2(2.0 * c * dc, 0.0, 2.0 * c * dc)
        }
    }

    #[test]
    fn chart_normalizes_smooth_2d_metric() {
        let g = Grid::new(2, &[2.0, 1.0], &[41, 21], vec![Face::Low(1)], None).unwrap();
        let chart = semigeodesic_chart(&Conformal2d, &g, 0.8);
        let chart = chart.unwrap();
        let phi = chart.into_diffeomorphism();
        // pull back onto a chart-box grid and measure the normal-form residual
        let gy = Grid::new(2, &[2.0, 0.7], &[41, 15], vec![Face::Low(1)], None).unwrap();
        let pulled = pullback_metric(&Conformal2d, &phi, &gy).unwrap();
        let resid = verify_semigeodesic(&pulled);
        let tol = 10.0 * gy.h[1] * gy.h[1];
        assert!(resid <= tol.max(2e-3), "residual {resid} tol {tol}");
        // identity on the boundary face
        for it in (0..41).step_by(8) {
            let yp = gy.tang_coord(it);
            let x = phi.inverse(&[yp, 0.0]);
            assert!((x[0] - yp).abs() < 1e-9 && x[1].abs() < 1e-9);
        }
    }

    #[test]
    fn verify_residual_detects_offset() {
        // g^{nn} = 1 + eps constant: residual = eps
        struct Off;
        impl MetricSampler for Off {
            fn dim(&self) -> usize {
                1
            }
            fn ginv(&self, _x: &[f64]) -> SymMat {
                SymMat::new1(1.0 + 0.01)
            }
            fn dginv(&self, _a: usize, _x: &[f64]) -> SymMat {
                SymMat::new1(0.0)
            }
        }
        let g = Grid::new(1, &[1.0], &[11], vec![Face::Low(0)], None).unwrap();
        let m = MetricField::sample(&Off, &g).unwrap();
        assert!((verify_semigeodesic(&m) - 0.01).abs() < 1e-12);
        let flat = MetricField::flat(&g);
        assert_eq!(verify_semigeodesic(&flat), 0.0);
    }
}
