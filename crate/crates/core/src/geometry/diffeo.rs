//! Diffeomorphisms of the closed box, with forward/inverse maps and Jacobians.

use super::grid::{Grid, MAX_DIM};
use crate::error::{LabError, Result};

type MapFn = Box<dyn Fn(&[f64]) -> [f64; MAX_DIM] + Sync + Send>;
/// Row-major Jacobian Dy/Dx: 1-D [j00], 2-D [j00, j01, j10, j11].
type JacFn = Box<dyn Fn(&[f64]) -> [f64; 4] + Sync + Send>;

pub struct Diffeomorphism {
    pub dim: usize,
    forward_fn: MapFn,
    inverse_fn: MapFn,
    jacobian_fn: JacFn,
}

impl Diffeomorphism {
    pub fn new(dim: usize, forward: MapFn, inverse: MapFn, jacobian: JacFn) -> Diffeomorphism {
        Diffeomorphism {
            dim,
            forward_fn: forward,
            inverse_fn: inverse,
            jacobian_fn: jacobian,
        }
    }

    pub fn forward(&self, x: &[f64]) -> [f64; MAX_DIM] {
        (self.forward_fn)(x)
    }

    pub fn inverse(&self, y: &[f64]) -> [f64; MAX_DIM] {
        (self.inverse_fn)(y)
    }

    pub fn jacobian(&self, x: &[f64]) -> [f64; 4] {
        (self.jacobian_fn)(x)
    }

    pub fn identity(dim: usize) -> Diffeomorphism {
        Diffeomorphism::new(
            dim,
            Box::new(move |x| {
                let mut y = [0.0; MAX_DIM];
                y[..x.len()].copy_from_slice(x);
                y
            }),
            Box::new(move |y| {
                let mut x = [0.0; MAX_DIM];
                x[..y.len()].copy_from_slice(y);
                x
            }),
            Box::new(move |_| [1.0, 0.0, 0.0, 1.0]),
        )
    }

    pub fn scale_1d(a: f64) -> Diffeomorphism {
        Diffeomorphism::new(
            1,
            Box::new(move |x| [a * x[0], 0.0]),
            Box::new(move |y| [y[0] / a, 0.0]),
            Box::new(move |_| [a, 0.0, 0.0, 1.0]),
        )
    }

    pub fn rotation_2d(theta: f64) -> Diffeomorphism {
        let (s, c) = theta.sin_cos();
        Diffeomorphism::new(
            2,
            Box::new(move |x| [c * x[0] - s * x[1], s * x[0] + c * x[1]]),
            Box::new(move |y| [c * y[0] + s * y[1], -s * y[0] + c * y[1]]),
            Box::new(move |_| [c, -s, s, c]),
        )
    }

    /// Interior displacement vanishing on the whole box boundary:
    /// `y = x + (a1, a2) * w(x)` with `w = sin(pi x1/L1) sin(pi x2/L2)`.
    /// Fixes Γ₀ pointwise and maps the box onto itself. The inverse is a
    /// Newton iteration on the closed form.
    pub fn interior_bump_2d(extent: [f64; 2], a: [f64; 2]) -> Diffeomorphism {
        let pi = std::f64::consts::PI;
        let w = move |x: &[f64]| (pi * x[0] / extent[0]).sin() * (pi * x[1] / extent[1]).sin();
        let dw = move |x: &[f64]| {
            [
                pi / extent[0] * (pi * x[0] / extent[0]).cos() * (pi * x[1] / extent[1]).sin(),
                pi / extent[1] * (pi * x[0] / extent[0]).sin() * (pi * x[1] / extent[1]).cos(),
            ]
        };
        let fwd = move |x: &[f64]| {
            let ww = w(x);
            [x[0] + a[0] * ww, x[1] + a[1] * ww]
        };
        let jac = move |x: &[f64]| {
            let g = dw(x);
            [
                1.0 + a[0] * g[0],
                a[0] * g[1],
                a[1] * g[0],
                1.0 + a[1] * g[1],
            ]
        };
        let inv = move |y: &[f64]| {
            let mut x = [y[0], y[1]];
            for _ in 0..50 {
                let f = {
                    let ww = w(&x);
                    [x[0] + a[0] * ww - y[0], x[1] + a[1] * ww - y[1]]
                };
                if f[0].abs() + f[1].abs() < 1e-14 {
                    break;
                }
                let j = {
                    let g = dw(&x);
                    [
                        1.0 + a[0] * g[0],
                        a[0] * g[1],
                        a[1] * g[0],
                        1.0 + a[1] * g[1],
                    ]
                };
                let det = j[0] * j[3] - j[1] * j[2];
                x[0] -= (j[3] * f[0] - j[1] * f[1]) / det;
                x[1] -= (-j[2] * f[0] + j[0] * f[1]) / det;
            }
            [x[0], x[1]]
        };
        Diffeomorphism::new(2, Box::new(fwd), Box::new(inv), Box::new(jac))
    }

    /// Check forward∘inverse ≈ identity, boundary fixing on Γ₀ nodes, and
    /// Jacobian determinant bounded away from zero, on the grid node set.
    pub fn validate(&self, grid: &Grid, fix_gamma0: bool) -> Result<f64> {
        let mut min_det = f64::INFINITY;
        for it in 0..grid.n_tang() {
            for inorm in 0..grid.n_normal() {
                let x = grid.coords(it, inorm);
                let x = &x[..grid.dim];
                let y = self.forward(x);
                let back = self.inverse(&y[..grid.dim]);
                let err: f64 = (0..grid.dim).map(|j| (back[j] - x[j]).abs()).sum();
                if err > 1e-8 {
                    return Err(LabError::Numerical(format!(
                        "forward/inverse mismatch {err:.3e} at node ({it},{inorm})"
                    )));
                }
                let j = self.jacobian(x);
                let det = if grid.dim == 1 {
                    j[0]
                } else {
                    j[0] * j[3] - j[1] * j[2]
                };
                min_det = min_det.min(det.abs());
                if fix_gamma0 && grid.on_gamma0(it, inorm) {
                    let drift: f64 = (0..grid.dim).map(|k| (y[k] - x[k]).abs()).sum();
                    if drift > 1e-12 {
                        return Err(LabError::Numerical(format!(
                            "diffeomorphism moves a gamma0 node by {drift:.3e}"
                        )));
                    }
                }
            }
        }
        if min_det < 1e-6 {
            return Err(LabError::Numerical(format!(
                "Jacobian determinant approaches zero: {min_det:.3e}"
            )));
        }
        Ok(min_det)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::grid::Face;

    #[test]
    fn bump_map_fixes_boundary_and_inverts() {
        let g = Grid::new(2, &[2.0, 1.0], &[9, 7], vec![Face::Low(1)], None).unwrap();
        let phi = Diffeomorphism::interior_bump_2d([2.0, 1.0], [0.08, -0.05]);
        let min_det = phi.validate(&g, true).unwrap();
        assert!(min_det > 0.5);
        let y = phi.forward(&[0.9, 0.4]);
        assert!((y[0] - 0.9).abs() > 1e-3); // genuinely moves interior points
        let x = phi.inverse(&y);
        assert!((x[0] - 0.9).abs() < 1e-12 && (x[1] - 0.4).abs() < 1e-12);
    }
}
