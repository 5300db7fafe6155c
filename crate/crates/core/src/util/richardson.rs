//! Richardson extrapolation of sequences in a small parameter.
//!
//! Used for the high-frequency limit (parameter 1/k with a geometric k-list)
//! and for the mollifier limit (parameter ε², symmetric bumps cancel the odd
//! term). The tableau is the standard polynomial one in the given parameter.

use super::C64;
use crate::error::{LabError, Result};

#[derive(Debug, Clone)]
pub struct Extrapolated {
    pub value: C64,
    /// Difference between the last two tableau entries; crude error estimate.
    pub err_estimate: f64,
    /// Full tableau, row i = column of i-th order eliminations.
    pub tableau: Vec<Vec<C64>>,
}

/// Extrapolate samples `(p_i, v_i)` to p → 0. The p_i must be strictly
/// decreasing. With a single sample the value passes through unchanged.
pub fn extrapolate(samples: &[(f64, C64)]) -> Result<Extrapolated> {
    if samples.is_empty() {
        return Err(LabError::Extrapolation("empty sample list".into()));
    }
    for w in samples.windows(2) {
        if w[1].0 >= w[0].0 {
            return Err(LabError::Extrapolation(format!(
                "parameters not strictly decreasing: {} then {}",
                w[0].0, w[1].0
            )));
        }
    }
    let n = samples.len();
    let p: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let mut tableau = vec![samples.iter().map(|s| s.1).collect::<Vec<_>>()];
    for col in 1..n {
        let prev = &tableau[col - 1];
        let mut next = Vec::with_capacity(n - col);
        for i in 0..n - col {
            // Neville step for polynomial in p through (p_i..p_{i+col})
            let pi = p[i];
            let pic = p[i + col];
            next.push((prev[i + 1] * pi - prev[i] * pic) / (pi - pic));
        }
        tableau.push(next);
    }
    let value = tableau[n - 1][0];
    let err_estimate = if n >= 2 {
        (tableau[n - 1][0] - tableau[n - 2][0]).norm()
    } else {
        f64::INFINITY
    };
    Ok(Extrapolated {
        value,
        err_estimate,
        tableau,
    })
}

/// Extrapolate with a monotonicity diagnostic: the magnitude of successive
/// column corrections should not grow. Non-monotone tableaux signal that the
/// sequence is outside its asymptotic regime.
pub fn extrapolate_checked(samples: &[(f64, C64)]) -> Result<Extrapolated> {
    let ex = extrapolate(samples)?;
    let n = ex.tableau.len();
    if n >= 3 {
        let d1 = (ex.tableau[1][0] - ex.tableau[0][0]).norm();
        let d2 = (ex.tableau[2][0] - ex.tableau[1][0]).norm();
        let scale = ex.tableau[n - 1][0].norm().max(1e-300);
        if d2 > 4.0 * d1 && d2 / scale > 1e-6 {
            return Err(LabError::Extrapolation(format!(
                "non-monotone tableau: corrections {:.3e} then {:.3e} (value {:.3e})",
                d1, d2, scale
            )));
        }
    }
    Ok(ex)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::c;

    #[test]
    fn recovers_polynomial_limit() {
        // v(p) = 3 + 2p - p^2: three samples pin the limit exactly
        let v = |p: f64| c(3.0 + 2.0 * p - p * p);
        let samples: Vec<_> = [0.4, 0.2, 0.1].iter().map(|&p| (p, v(p))).collect();
        let ex = extrapolate(&samples).unwrap();
        assert!((ex.value.re - 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_sample_passes_through() {
        let ex = extrapolate(&[(0.5, c(7.0))]).unwrap();
        assert_eq!(ex.value.re, 7.0);
    }

    #[test]
    fn rejects_nonmonotone() {
        let samples = [(0.4, c(1.0)), (0.2, c(1.01)), (0.1, c(5.0))];
        assert!(extrapolate_checked(&samples).is_err());
    }
}
