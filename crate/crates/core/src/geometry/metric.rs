//! Inverse-metric fields `g^{jk}` on grids and their pullbacks.

use super::diffeo::Diffeomorphism;
use super::grid::{Grid, MAX_DIM};
use crate::error::{LabError, Result};

/// Symmetric 1x1 or 2x2 matrix, stored as [a11, a12, a22].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMat {
    pub dim: usize,
    pub a: [f64; 3],
}

impl SymMat {
    pub fn identity(dim: usize) -> SymMat {
        SymMat {
            dim,
            a: [1.0, 0.0, 1.0],
        }
    }

    pub fn new1(a11: f64) -> SymMat {
        SymMat {
            dim: 1,
            a: [a11, 0.0, 0.0],
        }
    }

    pub fn new2(a11: f64, a12: f64, a22: f64) -> SymMat {
        SymMat {
            dim: 2,
            a: [a11, a12, a22],
        }
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> f64 {
        match (self.dim, j, k) {
            (1, 0, 0) => self.a[0],
            (2, 0, 0) => self.a[0],
            (2, 0, 1) | (2, 1, 0) => self.a[1],
            (2, 1, 1) => self.a[2],
            _ => panic!("SymMat index out of range"),
        }
    }

    pub fn det(&self) -> f64 {
        if self.dim == 1 {
            self.a[0]
        } else {
            self.a[0] * self.a[2] - self.a[1] * self.a[1]
        }
    }

    pub fn inverse(&self) -> SymMat {
        if self.dim == 1 {
            SymMat::new1(1.0 / self.a[0])
        } else {
            let d = self.det();
            SymMat::new2(self.a[2] / d, -self.a[1] / d, self.a[0] / d)
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        if self.dim == 1 {
            self.a[0]
        } else {
            let tr = self.a[0] + self.a[2];
            let disc = ((self.a[0] - self.a[2]).powi(2) + 4.0 * self.a[1] * self.a[1]).sqrt();
            0.5 * (tr - disc)
        }
    }

    pub fn max_eigenvalue(&self) -> f64 {
        if self.dim == 1 {
            self.a[0]
        } else {
            let tr = self.a[0] + self.a[2];
            let disc = ((self.a[0] - self.a[2]).powi(2) + 4.0 * self.a[1] * self.a[1]).sqrt();
            0.5 * (tr + disc)
        }
    }

    /// Quadratic form v^T A v.
    pub fn quad(&self, v: &[f64]) -> f64 {
        if self.dim == 1 {
            self.a[0] * v[0] * v[0]
        } else {
            self.a[0] * v[0] * v[0] + 2.0 * self.a[1] * v[0] * v[1] + self.a[2] * v[1] * v[1]
        }
    }

    /// Congruence J A J^T for the 2x2 Jacobian rows j (row-major [j00,j01,j10,j11]);
    /// in 1-D j = [j00].
    pub fn congruence(&self, j: &[f64]) -> SymMat {
        if self.dim == 1 {
            SymMat::new1(j[0] * j[0] * self.a[0])
        } else {
            let (a, b, c) = (self.a[0], self.a[1], self.a[2]);
            let r0 = [j[0], j[1]];
            let r1 = [j[2], j[3]];
            let av0 = [a * r0[0] + b * r0[1], b * r0[0] + c * r0[1]];
            let av1 = [a * r1[0] + b * r1[1], b * r1[0] + c * r1[1]];
            SymMat::new2(
                r0[0] * av0[0] + r0[1] * av0[1],
                r1[0] * av0[0] + r1[1] * av0[1],
                r1[0] * av1[0] + r1[1] * av1[1],
            )
        }
    }
}

/// Anything that can produce `g^{jk}(x)` and its spatial derivatives.
pub trait MetricSampler: Sync {
    fn dim(&self) -> usize;
    fn ginv(&self, x: &[f64]) -> SymMat;
    /// Component-wise derivative of `g^{jk}` along `axis`.
    fn dginv(&self, axis: usize, x: &[f64]) -> SymMat;
}

/// Sampled inverse metric with derived determinant weights.
#[derive(Debug, Clone)]
pub struct MetricField {
    pub grid: Grid,
    /// Per-node components: stride 1 (dim 1) or 3 (dim 2).
    comps: Vec<f64>,
    /// g(x) = det ||g^{jk}||^{-1} per node.
    pub g_det: Vec<f64>,
    pub sqrt_g: Vec<f64>,
}

impl MetricField {
    pub fn sample(sampler: &dyn MetricSampler, grid: &Grid) -> Result<MetricField> {
        let stride = if grid.dim == 1 { 1 } else { 3 };
        let total = grid.total_nodes();
        let mut comps = vec![0.0; total * stride];
        let mut g_det = vec![0.0; total];
        let mut sqrt_g = vec![0.0; total];
        for it in 0..grid.n_tang() {
            for inorm in 0..grid.n_normal() {
                let x = grid.coords(it, inorm);
                let m = sampler.ginv(&x[..grid.dim]);
                let idx = grid.idx(it, inorm);
                if m.min_eigenvalue() <= 0.0 {
                    return Err(LabError::Numerical(format!(
                        "metric not positive definite at node ({it},{inorm})"
                    )));
                }
                comps[idx * stride] = m.a[0];
                if stride == 3 {
                    comps[idx * stride + 1] = m.a[1];
                    comps[idx * stride + 2] = m.a[2];
                }
                let det = m.det();
                g_det[idx] = 1.0 / det;
                sqrt_g[idx] = (1.0 / det).sqrt();
            }
        }
        Ok(MetricField {
            grid: grid.clone(),
            comps,
            g_det,
            sqrt_g,
        })
    }

    pub fn flat(grid: &Grid) -> MetricField {
        MetricField::sample(&FlatMetric { dim: grid.dim }, grid).expect("flat metric")
    }

    #[inline]
    pub fn at(&self, it: usize, inorm: usize) -> SymMat {
        let idx = self.grid.idx(it, inorm);
        if self.grid.dim == 1 {
            SymMat::new1(self.comps[idx])
        } else {
            SymMat::new2(
                self.comps[idx * 3],
                self.comps[idx * 3 + 1],
                self.comps[idx * 3 + 2],
            )
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let mut m = f64::INFINITY;
        for it in 0..self.grid.n_tang() {
            for inorm in 0..self.grid.n_normal() {
                m = m.min(self.at(it, inorm).min_eigenvalue());
            }
        }
        m
    }

    pub fn max_eigenvalue(&self) -> f64 {
        let mut m: f64 = 0.0;
        for it in 0..self.grid.n_tang() {
            for inorm in 0..self.grid.n_normal() {
                m = m.max(self.at(it, inorm).max_eigenvalue());
            }
        }
        m
    }

    /// Consistency of the stored determinant weights with the components.
    pub fn check_consistency(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for it in 0..self.grid.n_tang() {
            for inorm in 0..self.grid.n_normal() {
                let idx = self.grid.idx(it, inorm);
                let d = 1.0 / self.at(it, inorm).det();
                worst = worst.max((d - self.g_det[idx]).abs());
                worst = worst.max((d.sqrt() - self.sqrt_g[idx]).abs());
            }
        }
        worst
    }
}

struct FlatMetric {
    dim: usize,
}

impl MetricSampler for FlatMetric {
    fn dim(&self) -> usize {
        self.dim
    }
    fn ginv(&self, _x: &[f64]) -> SymMat {
        SymMat::identity(self.dim)
    }
    fn dginv(&self, _axis: usize, _x: &[f64]) -> SymMat {
        SymMat {
            dim: self.dim,
            a: [0.0; 3],
        }
    }
}

/// Cubic interpolation makes a sampled field usable wherever an analytic
/// metric is expected (gridded pullbacks, composed charts). Derivatives come
/// from differentiating the interpolant.
impl MetricSampler for MetricField {
    fn dim(&self) -> usize {
        self.grid.dim
    }

    fn ginv(&self, x: &[f64]) -> SymMat {
        self.interp(x, None)
    }

    fn dginv(&self, axis: usize, x: &[f64]) -> SymMat {
        self.interp(x, Some(axis))
    }
}

impl MetricField {
    fn comp_line(&self, comp: usize, it: usize) -> Vec<f64> {
        let stride = if self.grid.dim == 1 { 1 } else { 3 };
        (0..self.grid.n_normal())
            .map(|inorm| self.comps[self.grid.idx(it, inorm) * stride + comp])
            .collect()
    }

    fn interp(&self, x: &[f64], deriv: Option<usize>) -> SymMat {
        use crate::util::interp::{cubic, cubic_deriv};
        use crate::util::c;
        let g = &self.grid;
        let ncomp = if g.dim == 1 { 1 } else { 3 };
        let mut out = [0.0; 3];
        if g.dim == 1 {
            let line: Vec<_> = self.comp_line(0, 0).iter().map(|&v| c(v)).collect();
            out[0] = match deriv {
                None => cubic(&line, 0.0, g.h[0], x[0]).re,
                Some(_) => cubic_deriv(&line, 0.0, g.h[0], x[0]).re,
            };
            return SymMat { dim: 1, a: out };
        }
        // tensor cubic: interpolate along normal per tangential node, then across
        let q = x[0] / g.h[0];
        let i0 = (q.floor() as isize - 1).clamp(0, g.n[0] as isize - 4) as usize;
        for (comp, o) in out.iter_mut().enumerate().take(ncomp) {
            let mut vals = [0.0f64; 4];
            for (j, v) in vals.iter_mut().enumerate() {
                let line: Vec<_> = self.comp_line(comp, i0 + j).iter().map(|&w| c(w)).collect();
                *v = match deriv {
                    Some(1) => cubic_deriv(&line, 0.0, g.h[1], x[1]).re,
                    _ => cubic(&line, 0.0, g.h[1], x[1]).re,
                };
            }
            let cvals: Vec<_> = vals.iter().map(|&w| c(w)).collect();
            *o = match deriv {
                Some(0) => cubic_deriv(&cvals, i0 as f64 * g.h[0], g.h[0], x[0]).re,
                _ => cubic(&cvals, i0 as f64 * g.h[0], g.h[0], x[0]).re,
            };
        }
        SymMat { dim: 2, a: out }
    }
}

/// Pull back an inverse metric through a diffeomorphism:
/// `g0^{jk}(y(x)) = J g^{jk}(x) J^T` with `J = Dy/Dx`, sampled on the image
/// grid (the image domain is assumed to be the same box; the shipped
/// diffeomorphisms fix the boundary).
pub fn pullback_metric(
    metric: &dyn MetricSampler,
    phi: &Diffeomorphism,
    grid: &Grid,
) -> Result<MetricField> {
    struct Pulled<'a> {
        metric: &'a dyn MetricSampler,
        phi: &'a Diffeomorphism,
    }
    impl MetricSampler for Pulled<'_> {
        fn dim(&self) -> usize {
            self.metric.dim()
        }
        fn ginv(&self, y: &[f64]) -> SymMat {
            let x = self.phi.inverse(y);
            let j = self.phi.jacobian(&x[..self.dim()]);
            self.metric.ginv(&x[..self.dim()]).congruence(&j)
        }
        fn dginv(&self, axis: usize, y: &[f64]) -> SymMat {
            // centred difference of the pulled-back components
            let h = 1e-5;
            let mut yp = [0.0; MAX_DIM];
            let mut ym = [0.0; MAX_DIM];
            yp[..y.len()].copy_from_slice(y);
            ym[..y.len()].copy_from_slice(y);
            yp[axis] += h;
            ym[axis] -= h;
            let a = self.ginv(&yp[..y.len()]);
            let b = self.ginv(&ym[..y.len()]);
            SymMat {
                dim: a.dim,
                a: [
                    (a.a[0] - b.a[0]) / (2.0 * h),
                    (a.a[1] - b.a[1]) / (2.0 * h),
                    (a.a[2] - b.a[2]) / (2.0 * h),
                ],
            }
        }
    }
    // singular-Jacobian guard on the node set
    for it in 0..grid.n_tang() {
        for inorm in 0..grid.n_normal() {
            let y = grid.coords(it, inorm);
            let x = phi.inverse(&y[..grid.dim]);
            let j = phi.jacobian(&x[..grid.dim]);
            let det = if grid.dim == 1 {
                j[0]
            } else {
                j[0] * j[3] - j[1] * j[2]
            };
            if det.abs() < 1e-10 {
                return Err(LabError::SingularJacobian {
                    node: vec![it, inorm],
                    det,
                });
            }
        }
    }
    MetricField::sample(&Pulled { metric, phi }, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::grid::Face;

    fn grid1(n: usize) -> Grid {
        Grid::new(1, &[1.0], &[n], vec![Face::Low(0)], None).unwrap()
    }

    fn grid2(n: usize) -> Grid {
        Grid::new(2, &[1.0, 1.0], &[n, n], vec![Face::Low(1)], None).unwrap()
    }

    #[test]
    fn identity_pullback_preserves_metric() {
        let g = grid2(9);
        let m = MetricField::flat(&g);
        let id = Diffeomorphism::identity(2);
        let pulled = pullback_metric(&m, &id, &g).unwrap();
        for it in 0..g.n_tang() {
            for inorm in 0..g.n_normal() {
                let a = pulled.at(it, inorm);
                assert!((a.a[0] - 1.0).abs() < 1e-9);
                assert!(a.a[1].abs() < 1e-9);
                assert!((a.a[2] - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn scaling_1d_forces_pullback_values() {
        // y = 2x with g^{11} = 1: image components g0^{11} = 4, g0 = 1/4
        let g = grid1(11);
        let m = MetricField::flat(&g);
        let phi = Diffeomorphism::scale_1d(2.0);
        let pulled = pullback_metric(&m, &phi, &g).unwrap();
        assert!((pulled.at(0, 5).a[0] - 4.0).abs() < 1e-12);
        assert!((pulled.g_det[5] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn rotation_preserves_flat_metric() {
        let g = grid2(7);
        let m = MetricField::flat(&g);
        let phi = Diffeomorphism::rotation_2d(0.37);
        // sample on interior points only through the sampler (the rotated grid
        // leaves the box, but the closed forms extend smoothly)
        struct FlatAll;
        impl MetricSampler for FlatAll {
            fn dim(&self) -> usize {
                2
            }
            fn ginv(&self, _x: &[f64]) -> SymMat {
                SymMat::identity(2)
            }
            fn dginv(&self, _a: usize, _x: &[f64]) -> SymMat {
                SymMat { dim: 2, a: [0.0; 3] }
            }
        }
        let pulled = pullback_metric(&FlatAll, &phi, &g).unwrap();
        let a = pulled.at(3, 4);
        assert!((a.a[0] - 1.0).abs() < 1e-12);
        assert!(a.a[1].abs() < 1e-12);
        assert!((a.a[2] - 1.0).abs() < 1e-12);
        let _ = m;
    }

    #[test]
    fn consistency_of_determinant_weights() {
        let g = grid2(8);
        let m = MetricField::flat(&g);
        assert!(m.check_consistency() < 1e-14);
    }

    #[test]
    fn pullback_composes_functorially() {
        // two successive 1-D scalings equal the composed scaling
        let g = grid1(9);
        let m = MetricField::flat(&g);
        let p1 = Diffeomorphism::scale_1d(1.5);
        let p2 = Diffeomorphism::scale_1d(2.0);
        let once = pullback_metric(
            &pullback_metric(&m, &p1, &g).unwrap(),
            &p2,
            &g,
        )
        .unwrap();
        let composed = pullback_metric(&m, &Diffeomorphism::scale_1d(3.0), &g).unwrap();
        for i in 0..g.n_normal() {
            assert!((once.at(0, i).a[0] - composed.at(0, i).a[0]).abs() < 1e-6);
        }
        assert!(once.min_eigenvalue() > 0.0);
    }
}
