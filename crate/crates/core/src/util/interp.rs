//! Local cubic interpolation on uniform lattices.
//!
//! All characteristic-surface traces go through these kernels, so they are the
//! single place the "cubic interpolation" convention of the trace extractors
//! lives. The stencil is 4-point Lagrange, clamped at lattice ends.

use super::C64;

/// Stencil start index for a 4-point window around fractional index `q` on a
/// lattice of `n` points.
fn stencil_start(q: f64, n: usize) -> usize {
    assert!(n >= 4, "cubic interpolation needs at least 4 points");
    let i = q.floor() as isize - 1;
    i.clamp(0, n as isize - 4) as usize
}

fn lagrange_weights(q: f64, i0: usize) -> [f64; 4] {
    let t = q - i0 as f64; // position relative to stencil start, in [(-inf),3+]
    let mut w = [0.0; 4];
    for (j, wj) in w.iter_mut().enumerate() {
        let mut p = 1.0;
        for k in 0..4 {
            if k != j {
                p *= (t - k as f64) / (j as f64 - k as f64);
            }
        }
        *wj = p;
    }
    w
}

fn lagrange_deriv_weights(q: f64, i0: usize) -> [f64; 4] {
    let t = q - i0 as f64;
    let mut w = [0.0; 4];
    for (j, wj) in w.iter_mut().enumerate() {
        let mut denom = 1.0;
        for k in 0..4 {
            if k != j {
                denom *= j as f64 - k as f64;
            }
        }
        // d/dt of prod_{k != j} (t - k): sum over leave-one-out products
        let mut s = 0.0;
        for m in 0..4 {
            if m == j {
                continue;
            }
            let mut p = 1.0;
            for k in 0..4 {
                if k != j && k != m {
                    p *= t - k as f64;
                }
            }
            s += p;
        }
        *wj = s / denom;
    }
    w
}

/// Interpolate `values` (uniform spacing `h`, first node at `x0`) at `x`.
pub fn cubic(values: &[C64], x0: f64, h: f64, x: f64) -> C64 {
    let q = (x - x0) / h;
    let i0 = stencil_start(q, values.len());
    let w = lagrange_weights(q, i0);
    (0..4).map(|j| values[i0 + j] * w[j]).sum()
}

/// Derivative of the cubic interpolant at `x`.
pub fn cubic_deriv(values: &[C64], x0: f64, h: f64, x: f64) -> C64 {
    let q = (x - x0) / h;
    let i0 = stencil_start(q, values.len());
    let w = lagrange_deriv_weights(q, i0);
    (0..4).map(|j| values[i0 + j] * w[j]).sum::<C64>() / h
}

/// Interpolation weights at `x` for assembling linear functionals of lattice
/// values: returns (start index, 4 weights).
pub fn cubic_weights(n: usize, x0: f64, h: f64, x: f64) -> (usize, [f64; 4]) {
    let q = (x - x0) / h;
    let i0 = stencil_start(q, n);
    (i0, lagrange_weights(q, i0))
}

pub fn cubic_deriv_weights(n: usize, x0: f64, h: f64, x: f64) -> (usize, [f64; 4]) {
    let q = (x - x0) / h;
    let i0 = stencil_start(q, n);
    let mut w = lagrange_deriv_weights(q, i0);
    for wj in &mut w {
        *wj /= h;
    }
    (i0, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::c;

    #[test]
    fn cubic_reproduces_cubics_exactly() {
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x + 0.25 * x * x * x;
        let h = 0.1;
        let vals: Vec<_> = (0..12).map(|i| c(f(i as f64 * h))).collect();
        for &x in &[0.03, 0.514, 0.99, 1.07] {
            assert!((cubic(&vals, 0.0, h, x).re - f(x)).abs() < 1e-12);
            let df = -2.0 + x + 0.75 * x * x;
            assert!((cubic_deriv(&vals, 0.0, h, x).re - df).abs() < 1e-10);
        }
    }

    #[test]
    fn cubic_converges_fourth_order_on_smooth() {
        let f = |x: f64| (3.0 * x).sin();
        let mut errs = Vec::new();
        for &n in &[20usize, 40] {
            let h = 1.0 / n as f64;
            let vals: Vec<_> = (0..=n).map(|i| c(f(i as f64 * h))).collect();
            let x = 0.437;
            errs.push((cubic(&vals, 0.0, h, x).re - f(x)).abs());
        }
        let ratio = errs[0] / errs[1];
        assert!(ratio > 10.0, "expected ~16x error drop, got {ratio}");
    }
}
