//! Complex space-time coefficient functions.
//!
//! Scenario presets are sums of separable terms `coef * space(x) * time(t)`
//! with closed-form first derivatives; composed coefficients (gauged,
//! null-gauged, pulled back) implement the same trait with analytic parts
//! where available and centred differences otherwise.

use crate::error::{LabError, Result};
use crate::geometry::Grid;
use crate::util::{c, C64, I};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

const FD_STEP: f64 = 1e-5;

pub trait SpaceTimeFn: Sync + Send {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64], t: f64) -> C64;

    fn dt(&self, x: &[f64], t: f64) -> C64 {
        (self.eval(x, t + FD_STEP) - self.eval(x, t - FD_STEP)) / (2.0 * FD_STEP)
    }

    fn dx(&self, axis: usize, x: &[f64], t: f64) -> C64 {
        let mut xp = [0.0; 2];
        let mut xm = [0.0; 2];
        xp[..x.len()].copy_from_slice(x);
        xm[..x.len()].copy_from_slice(x);
        xp[axis] += FD_STEP;
        xm[axis] -= FD_STEP;
        (self.eval(&xp[..x.len()], t) - self.eval(&xm[..x.len()], t)) / (2.0 * FD_STEP)
    }

    /// Does the value change with t? Lets the solver cache static fields.
    fn time_dependent(&self) -> bool {
        true
    }

    /// Downcast hook for the separable materialization fast path.
    fn as_analytic(&self) -> Option<&AnalyticField> {
        None
    }
}

pub type FieldRef = Arc<dyn SpaceTimeFn>;

/// One multiplicative factor along a single axis.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AxisProfile {
    One,
    /// sin(freq * x + phase)
    Sin { freq: f64, phase: f64 },
    /// cos(freq * x + phase)
    Cos { freq: f64, phase: f64 },
    /// exp(-(x-center)^2 / (2 width^2))
    Gauss { center: f64, width: f64 },
    /// c0 + c1 x + c2 x^2 + ...
    Poly { coeffs: Vec<f64> },
}

impl AxisProfile {
    fn eval(&self, x: f64) -> f64 {
        match self {
            AxisProfile::One => 1.0,
            AxisProfile::Sin { freq, phase } => (freq * x + phase).sin(),
            AxisProfile::Cos { freq, phase } => (freq * x + phase).cos(),
            AxisProfile::Gauss { center, width } => {
                let z = (x - center) / width;
                (-0.5 * z * z).exp()
            }
            AxisProfile::Poly { coeffs } => {
                let mut p = 0.0;
                for &co in coeffs.iter().rev() {
                    p = p * x + co;
                }
                p
            }
        }
    }

    fn deriv(&self, x: f64) -> f64 {
        match self {
            AxisProfile::One => 0.0,
            AxisProfile::Sin { freq, phase } => freq * (freq * x + phase).cos(),
            AxisProfile::Cos { freq, phase } => -freq * (freq * x + phase).sin(),
            AxisProfile::Gauss { center, width } => {
                let z = (x - center) / width;
                -(z / width) * (-0.5 * z * z).exp()
            }
            AxisProfile::Poly { coeffs } => {
                let mut p = 0.0;
                for (k, &co) in coeffs.iter().enumerate().skip(1).rev() {
                    p = p * x + k as f64 * co;
                }
                p
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeProfile {
    /// Σ (re_k + i im_k) t^k
    Poly { coeffs: Vec<[f64; 2]> },
    /// cos(freq t + phase)
    Cos { freq: f64, phase: f64 },
}

impl TimeProfile {
    fn eval(&self, t: f64) -> C64 {
        match self {
            TimeProfile::Poly { coeffs } => {
                let mut p = C64::new(0.0, 0.0);
                for co in coeffs.iter().rev() {
                    p = p * t + C64::new(co[0], co[1]);
                }
                p
            }
            TimeProfile::Cos { freq, phase } => c((freq * t + phase).cos()),
        }
    }

    fn deriv(&self, t: f64) -> C64 {
        match self {
            TimeProfile::Poly { coeffs } => {
                let mut p = C64::new(0.0, 0.0);
                for (k, co) in coeffs.iter().enumerate().skip(1).rev() {
                    p = p * t + C64::new(co[0], co[1]) * k as f64;
                }
                p
            }
            TimeProfile::Cos { freq, phase } => c(-freq * (freq * t + phase).sin()),
        }
    }

    fn constant(&self) -> bool {
        match self {
            TimeProfile::Poly { coeffs } => coeffs.len() <= 1,
            TimeProfile::Cos { .. } => false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Term {
    pub coef: [f64; 2],
    pub space: Vec<AxisProfile>,
    pub time: TimeProfile,
}

/// Sum of separable analytic terms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyticField {
    pub dim: usize,
    pub terms: Vec<Term>,
}

impl AnalyticField {
    pub fn zero(dim: usize) -> AnalyticField {
        AnalyticField { dim, terms: vec![] }
    }

    pub fn constant(dim: usize, z: C64) -> AnalyticField {
        AnalyticField {
            dim,
            terms: vec![Term {
                coef: [z.re, z.im],
                space: vec![AxisProfile::One; dim],
                time: TimeProfile::Poly { coeffs: vec![[1.0, 0.0]] },
            }],
        }
    }

    /// rate * t
    pub fn linear_t(dim: usize, rate: f64) -> AnalyticField {
        AnalyticField {
            dim,
            terms: vec![Term {
                coef: [rate, 0.0],
                space: vec![AxisProfile::One; dim],
                time: TimeProfile::Poly {
                    coeffs: vec![[0.0, 0.0], [1.0, 0.0]],
                },
            }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for t in &self.terms {
            if t.space.len() != self.dim {
                return Err(LabError::Config(format!(
                    "term has {} axis profiles, dim is {}",
                    t.space.len(),
                    self.dim
                )));
            }
        }
        Ok(())
    }

    fn space_val(term: &Term, x: &[f64]) -> f64 {
        term.space
            .iter()
            .zip(x)
            .map(|(p, &xi)| p.eval(xi))
            .product()
    }
}

impl SpaceTimeFn for AnalyticField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64], t: f64) -> C64 {
        self.terms
            .iter()
            .map(|tm| {
                C64::new(tm.coef[0], tm.coef[1]) * Self::space_val(tm, x) * tm.time.eval(t)
            })
            .sum()
    }

    fn dt(&self, x: &[f64], t: f64) -> C64 {
        self.terms
            .iter()
            .map(|tm| {
                C64::new(tm.coef[0], tm.coef[1]) * Self::space_val(tm, x) * tm.time.deriv(t)
            })
            .sum()
    }

    fn dx(&self, axis: usize, x: &[f64], t: f64) -> C64 {
        self.terms
            .iter()
            .map(|tm| {
                let mut sp = 1.0;
                for (j, p) in tm.space.iter().enumerate() {
                    sp *= if j == axis { p.deriv(x[j]) } else { p.eval(x[j]) };
                }
                C64::new(tm.coef[0], tm.coef[1]) * sp * tm.time.eval(t)
            })
            .sum()
    }

    fn time_dependent(&self) -> bool {
        self.terms.iter().any(|t| !t.time.constant())
    }

    fn as_analytic(&self) -> Option<&AnalyticField> {
        Some(self)
    }
}

/// Pointwise conjugate of a field (adjoint-operator coefficients).
pub struct ConjFn(pub FieldRef);

impl SpaceTimeFn for ConjFn {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn eval(&self, x: &[f64], t: f64) -> C64 {
        self.0.eval(x, t).conj()
    }
    fn dt(&self, x: &[f64], t: f64) -> C64 {
        self.0.dt(x, t).conj()
    }
    fn dx(&self, axis: usize, x: &[f64], t: f64) -> C64 {
        self.0.dx(axis, x, t).conj()
    }
    fn time_dependent(&self) -> bool {
        self.0.time_dependent()
    }
}

/// Sum of two fields.
pub struct SumFn(pub FieldRef, pub FieldRef);

impl SpaceTimeFn for SumFn {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn eval(&self, x: &[f64], t: f64) -> C64 {
        self.0.eval(x, t) + self.1.eval(x, t)
    }
    fn dt(&self, x: &[f64], t: f64) -> C64 {
        self.0.dt(x, t) + self.1.dt(x, t)
    }
    fn dx(&self, axis: usize, x: &[f64], t: f64) -> C64 {
        self.0.dx(axis, x, t) + self.1.dx(axis, x, t)
    }
    fn time_dependent(&self) -> bool {
        self.0.time_dependent() || self.1.time_dependent()
    }
}

/// Static complex field sampled on a grid, evaluated by cubic interpolation.
#[derive(Clone)]
pub struct GriddedField {
    pub grid: Grid,
    pub values: Vec<C64>,
}

impl GriddedField {
    pub fn sample(grid: &Grid, f: impl Fn(&[f64]) -> C64) -> GriddedField {
        let mut values = vec![C64::new(0.0, 0.0); grid.total_nodes()];
        for it in 0..grid.n_tang() {
            for inorm in 0..grid.n_normal() {
                let x = grid.coords(it, inorm);
                values[grid.idx(it, inorm)] = f(&x[..grid.dim]);
            }
        }
        GriddedField {
            grid: grid.clone(),
            values,
        }
    }

    fn line(&self, it: usize) -> &[C64] {
        let nn = self.grid.n_normal();
        &self.values[it * nn..(it + 1) * nn]
    }

    fn interp(&self, x: &[f64], deriv: Option<usize>) -> C64 {
        use crate::util::interp::{cubic, cubic_deriv};
        let g = &self.grid;
        if g.dim == 1 {
            return match deriv {
                Some(_) => cubic_deriv(self.line(0), 0.0, g.h[0], x[0]),
                None => cubic(self.line(0), 0.0, g.h[0], x[0]),
            };
        }
        let q = x[0] / g.h[0];
        let i0 = (q.floor() as isize - 1).clamp(0, g.n[0] as isize - 4) as usize;
        let mut vals = [C64::new(0.0, 0.0); 4];
        for (j, v) in vals.iter_mut().enumerate() {
            *v = match deriv {
                Some(1) => cubic_deriv(self.line(i0 + j), 0.0, g.h[1], x[1]),
                _ => cubic(self.line(i0 + j), 0.0, g.h[1], x[1]),
            };
        }
        match deriv {
            Some(0) => cubic_deriv(&vals, i0 as f64 * g.h[0], g.h[0], x[0]),
            _ => cubic(&vals, i0 as f64 * g.h[0], g.h[0], x[0]),
        }
    }
}

impl SpaceTimeFn for GriddedField {
    fn dim(&self) -> usize {
        self.grid.dim
    }
    fn eval(&self, x: &[f64], _t: f64) -> C64 {
        self.interp(x, None)
    }
    fn dt(&self, _x: &[f64], _t: f64) -> C64 {
        C64::new(0.0, 0.0)
    }
    fn dx(&self, axis: usize, x: &[f64], _t: f64) -> C64 {
        self.interp(x, Some(axis))
    }
    fn time_dependent(&self) -> bool {
        false
    }
}

/// Materialized per-node representation the solver consumes. Separable
/// analytic fields split into static spatial factors times scalar time
/// profiles, so per-step refreshes are a handful of AXPYs.
pub enum Materialized {
    Static(Vec<C64>),
    Separable {
        spatial: Vec<Vec<C64>>,
        time: Vec<TimeProfile>,
    },
    Dynamic(FieldRef),
}

impl Materialized {
    pub fn build(f: &FieldRef, grid: &Grid) -> Materialized {
        let nodes: Vec<[f64; 2]> = (0..grid.n_tang())
            .flat_map(|it| (0..grid.n_normal()).map(move |inorm| (it, inorm)))
            .map(|(it, inorm)| grid.coords(it, inorm))
            .collect();
        if !f.time_dependent() {
            let vals = nodes.iter().map(|x| f.eval(&x[..grid.dim], 0.0)).collect();
            return Materialized::Static(vals);
        }
        // try the separable fast path for analytic sums
        if let Some(af) = f.as_analytic() {
            let mut spatial = Vec::new();
            let mut time = Vec::new();
            for tm in &af.terms {
                let co = C64::new(tm.coef[0], tm.coef[1]);
                spatial.push(
                    nodes
                        .iter()
                        .map(|x| co * AnalyticField::space_val(tm, &x[..grid.dim]))
                        .collect(),
                );
                time.push(tm.time.clone());
            }
            return Materialized::Separable { spatial, time };
        }
        Materialized::Dynamic(f.clone())
    }

    /// Fill `out` with values at time `t` (`deriv_t` = true for ∂t).
    pub fn fill(&self, grid: &Grid, t: f64, deriv_t: bool, out: &mut [C64]) {
        match self {
            Materialized::Static(v) => {
                if deriv_t {
                    out.fill(C64::new(0.0, 0.0));
                } else {
                    out.copy_from_slice(v);
                }
            }
            Materialized::Separable { spatial, time } => {
                out.fill(C64::new(0.0, 0.0));
                for (sp, tp) in spatial.iter().zip(time) {
                    let tv = if deriv_t { tp.deriv(t) } else { tp.eval(t) };
                    if tv.norm_sqr() == 0.0 {
                        continue;
                    }
                    for (o, s) in out.iter_mut().zip(sp) {
                        *o += s * tv;
                    }
                }
            }
            Materialized::Dynamic(f) => {
                let nn = grid.n_normal();
                for it in 0..grid.n_tang() {
                    for inorm in 0..nn {
                        let x = grid.coords(it, inorm);
                        let x = &x[..grid.dim];
                        out[it * nn + inorm] =
                            if deriv_t { f.dt(x, t) } else { f.eval(x, t) };
                    }
                }
            }
        }
    }
}

pub fn field(f: impl SpaceTimeFn + 'static) -> FieldRef {
    Arc::new(f)
}

/// i as a convenience re-export for building complex presets.
pub fn imag(v: f64) -> C64 {
    I * v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_derivatives_match_fd() {
        let f = AnalyticField {
            dim: 2,
            terms: vec![Term {
                coef: [0.7, 0.2],
                space: vec![
                    AxisProfile::Sin { freq: 1.3, phase: 0.2 },
                    AxisProfile::Gauss { center: 0.5, width: 0.3 },
                ],
                time: TimeProfile::Poly {
                    coeffs: vec![[1.0, 0.0], [0.5, -0.1]],
                },
            }],
        };
        let x = [0.4, 0.7];
        let t = 0.9;
        let fd_t = (f.eval(&x, t + 1e-6) - f.eval(&x, t - 1e-6)) / 2e-6;
        assert!((f.dt(&x, t) - fd_t).norm() < 1e-8);
        for axis in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[axis] += 1e-6;
            xm[axis] -= 1e-6;
            let fd = (f.eval(&xp, t) - f.eval(&xm, t)) / 2e-6;
            assert!((f.dx(axis, &x, t) - fd).norm() < 1e-8);
        }
    }

    #[test]
    fn gridded_field_interpolates_smoothly() {
        use crate::geometry::{Face, Grid};
        let g = Grid::new(1, &[1.0], &[41], vec![Face::Low(0)], None).unwrap();
        let gf = GriddedField::sample(&g, |x| c((2.0 * x[0]).sin()));
        let v = gf.eval(&[0.437], 0.0);
        assert!((v.re - (2.0 * 0.437f64).sin()).abs() < 1e-6);
        let d = gf.dx(0, &[0.437], 0.0);
        assert!((d.re - 2.0 * (2.0 * 0.437f64).cos()).abs() < 1e-4);
    }
}
