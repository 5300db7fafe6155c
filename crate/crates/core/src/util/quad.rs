//! Quadrature on uniform lattices plus an adaptive reference rule.

use super::C64;

/// Trapezoid weights for a uniform lattice of `n` points, spacing `h`.
pub fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 2);
    let mut w = vec![h; n];
    w[0] = 0.5 * h;
    w[n - 1] = 0.5 * h;
    w
}

/// Trapezoid integral of complex samples.
pub fn trapezoid(values: &[C64], h: f64) -> C64 {
    let n = values.len();
    if n < 2 {
        return C64::new(0.0, 0.0);
    }
    let mut s: C64 = values[1..n - 1].iter().sum();
    s += (values[0] + values[n - 1]) * 0.5;
    s * h
}

/// Fourth-order cumulative integral on a uniform lattice: returns the running
/// integral at every node (first entry 0). Each panel integrates the local
/// cubic interpolant; interior panels use the centred 4-point rule
/// h/24·(-1, 13, 13, -1), end panels the one-sided h/24·(9, 19, -5, 1).
pub fn cumint4(values: &[C64], h: f64) -> Vec<C64> {
    let n = values.len();
    let mut out = vec![C64::new(0.0, 0.0); n];
    if n < 2 {
        return out;
    }
    if n < 4 {
        // fall back to trapezoid panels for tiny lattices
        for i in 1..n {
            out[i] = out[i - 1] + (values[i - 1] + values[i]) * (0.5 * h);
        }
        return out;
    }
    let k = h / 24.0;
    for i in 0..n - 1 {
        let panel = if i == 0 {
            (values[0] * 9.0 + values[1] * 19.0 - values[2] * 5.0 + values[3]) * k
        } else if i == n - 2 {
            (values[n - 1] * 9.0 + values[n - 2] * 19.0 - values[n - 3] * 5.0 + values[n - 4]) * k
        } else {
            (values[i] * 13.0 + values[i + 1] * 13.0 - values[i - 1] - values[i + 2]) * k
        };
        out[i + 1] = out[i] + panel;
    }
    out
}

/// Fourth-order integral over the whole lattice.
pub fn int4(values: &[C64], h: f64) -> C64 {
    *cumint4(values, h).last().unwrap_or(&C64::new(0.0, 0.0))
}

/// Adaptive Simpson quadrature of a complex-valued function; reference rule
/// for oracle comparisons.
pub fn adaptive_simpson<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64, tol: f64) -> C64 {
    fn simpson(a: f64, fa: C64, b: f64, fb: C64, fm: C64) -> C64 {
        (fa + fm * 4.0 + fb) * ((b - a) / 6.0)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> C64>(
        f: &F,
        a: f64,
        fa: C64,
        b: f64,
        fb: C64,
        fm: C64,
        whole: C64,
        tol: f64,
        depth: usize,
    ) -> C64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        let delta = left + right - whole;
        if depth == 0 || delta.norm() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1)
                + rec(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(a, fa, b, fb, fm);
    rec(&f, a, fa, b, fb, fm, whole, tol, 40)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::{c, I};

    #[test]
    fn cumint4_is_exact_on_cubics() {
        let f = |x: f64| 2.0 + x - 3.0 * x * x + 0.5 * x * x * x;
        let pf = |x: f64| 2.0 * x + 0.5 * x * x - x * x * x + 0.125 * x * x * x * x;
        let n = 17;
        let h = 0.25;
        let vals: Vec<_> = (0..n).map(|i| c(f(i as f64 * h))).collect();
        let cum = cumint4(&vals, h);
        for (i, v) in cum.iter().enumerate() {
            assert!((v.re - pf(i as f64 * h)).abs() < 1e-12);
        }
    }

    #[test]
    fn cumint4_fourth_order_on_oscillation() {
        let f = |x: f64| (I * 5.0 * x).exp();
        let exact = ((I * 5.0).exp() - c(1.0)) / (I * 5.0);
        let mut errs = Vec::new();
        for &n in &[41usize, 81] {
            let h = 1.0 / (n - 1) as f64;
            let vals: Vec<_> = (0..n).map(|i| f(i as f64 * h)).collect();
            errs.push((int4(&vals, h) - exact).norm());
        }
        assert!(errs[0] / errs[1] > 12.0);
    }

    #[test]
    fn adaptive_matches_closed_form() {
        let g = |x: f64| c((x * x).exp());
        let v = adaptive_simpson(&g, 0.0, 1.0, 1e-12);
        assert!((v.re - 1.462_651_745_907_181_6).abs() < 1e-10);
    }
}
