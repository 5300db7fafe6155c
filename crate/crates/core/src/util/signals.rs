//! Seeded smooth boundary signals and C^∞ cutoffs.

use super::{C64, I};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic RNG for a given scenario seed and role tag, so independent
/// ensembles never share streams.
pub fn rng_for(seed: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Smooth transition: 0 for x <= 0, 1 for x >= 1, C^∞ in between.
pub fn smoothstep_inf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / x).exp();
        let b = (-1.0 / (1.0 - x)).exp();
        a / (a + b)
    }
}

/// C^∞ plateau cutoff: 1 on |x - x0| <= w1, 0 on |x - x0| >= w2.
pub fn plateau(x: f64, x0: f64, w1: f64, w2: f64) -> f64 {
    assert!(w2 > w1 && w1 >= 0.0);
    let d = (x - x0).abs();
    smoothstep_inf((w2 - d) / (w2 - w1))
}

/// C^∞ bump supported on |x| < 1, value exp(-1/(1-x^2)) inside, not normalized.
pub fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

/// Truncated Fourier series in t on [a, b], vanishing at both ends with an
/// extra C^∞ ramp near t = a so all time derivatives vanish at the start
/// (compatibility with zero initial data). Complex coefficients from the
/// given RNG, amplitudes decaying like 1/m.
pub struct BandLimited {
    pub a: f64,
    pub b: f64,
    coeffs: Vec<C64>,
    ramp_frac: f64,
}

impl BandLimited {
    pub fn sample(rng: &mut ChaCha8Rng, a: f64, b: f64, modes: usize, ramp_frac: f64) -> Self {
        let coeffs = (0..modes)
            .map(|m| {
                let re: f64 = rng.gen_range(-1.0..1.0);
                let im: f64 = rng.gen_range(-1.0..1.0);
                (C64::new(re, 0.0) + I * im) / (m + 1) as f64
            })
            .collect();
        BandLimited {
            a,
            b,
            coeffs,
            ramp_frac,
        }
    }

    pub fn eval(&self, t: f64) -> C64 {
        if t <= self.a || t >= self.b {
            return C64::new(0.0, 0.0);
        }
        let len = self.b - self.a;
        let z = (t - self.a) / len;
        let mut s = C64::new(0.0, 0.0);
        for (m, c) in self.coeffs.iter().enumerate() {
            s += c * ((m + 1) as f64 * std::f64::consts::PI * z).sin();
        }
        s * smoothstep_inf(z / self.ramp_frac)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_shape() {
        assert_eq!(plateau(0.0, 0.0, 0.2, 0.4), 1.0);
        assert_eq!(plateau(0.5, 0.0, 0.2, 0.4), 0.0);
        let mid = plateau(0.3, 0.0, 0.2, 0.4);
        assert!(mid > 0.0 && mid < 1.0);
    }

    #[test]
    fn band_limited_deterministic_and_compatible() {
        let mut r1 = rng_for(42, 7);
        let mut r2 = rng_for(42, 7);
        let f1 = BandLimited::sample(&mut r1, 0.0, 2.0, 6, 0.15);
        let f2 = BandLimited::sample(&mut r2, 0.0, 2.0, 6, 0.15);
        assert_eq!(f1.eval(0.73), f2.eval(0.73));
        assert_eq!(f1.eval(0.0).norm(), 0.0);
        assert!(f1.eval(1e-4).norm() < 1e-10);
    }
}
