//! Potential sets, the gauge group, and gauge/diffeomorphism action on
//! potentials.

use super::sampler::{field, FieldRef, SpaceTimeFn};
use crate::error::{LabError, Result};
use crate::geometry::{Diffeomorphism, Grid};
use crate::util::{C64, I};
use std::sync::Arc;

pub const C_MIN: f64 = 1e-6;

/// The n+1 electromagnetic potentials and the scalar potential: `a[0]` is
/// the time-slot potential, `a[1..=n]` the spatial ones.
#[derive(Clone)]
pub struct PotentialSet {
    pub dim: usize,
    pub a: Vec<FieldRef>,
    pub v: FieldRef,
    pub self_adjoint: bool,
}

impl PotentialSet {
    pub fn new(dim: usize, a: Vec<FieldRef>, v: FieldRef, self_adjoint: bool) -> Result<Self> {
        if a.len() != dim + 1 {
            return Err(LabError::Config(format!(
                "need {} potentials (time slot + {} spatial), got {}",
                dim + 1,
                dim,
                a.len()
            )));
        }
        Ok(PotentialSet {
            dim,
            a,
            v,
            self_adjoint,
        })
    }

    pub fn zero(dim: usize) -> PotentialSet {
        use super::sampler::AnalyticField;
        let z = || -> FieldRef { Arc::new(AnalyticField::zero(dim)) };
        PotentialSet {
            dim,
            a: (0..=dim).map(|_| z()).collect(),
            v: z(),
            self_adjoint: true,
        }
    }

    /// Largest imaginary part over a sample lattice; must vanish when the
    /// set claims self-adjointness.
    pub fn max_imag_on(&self, grid: &Grid, times: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for it in (0..grid.n_tang()).step_by(3.max(grid.n_tang() / 16)) {
            for inorm in (0..grid.n_normal()).step_by(3.max(grid.n_normal() / 16)) {
                let x = grid.coords(it, inorm);
                let x = &x[..grid.dim];
                for &t in times {
                    for f in &self.a {
                        worst = worst.max(f.eval(x, t).im.abs());
                    }
                    worst = worst.max(self.v.eval(x, t).im.abs());
                }
            }
        }
        worst
    }

    pub fn validate(&self, grid: &Grid, t_max: f64) -> Result<()> {
        if self.self_adjoint {
            let im = self.max_imag_on(grid, &[0.0, 0.5 * t_max, t_max]);
            if im > 1e-10 {
                return Err(LabError::Config(format!(
                    "self_adjoint set but imaginary parts reach {im:.3e}"
                )));
            }
        }
        Ok(())
    }

    pub fn conjugated(&self) -> PotentialSet {
        use super::sampler::ConjFn;
        PotentialSet {
            dim: self.dim,
            a: self.a.iter().map(|f| field(ConjFn(f.clone()))).collect(),
            v: field(ConjFn(self.v.clone())),
            self_adjoint: self.self_adjoint,
        }
    }
}

/// Member of the gauge group: nonvanishing c(y,t) equal to 1 on the measured
/// patch, given either directly or through an exponent c = e^{iψ}.
#[derive(Clone)]
pub enum GaugeFunction {
    Exponent(FieldRef),
    Direct(FieldRef),
}

impl GaugeFunction {
    pub fn c_value(&self, x: &[f64], t: f64) -> C64 {
        match self {
            GaugeFunction::Exponent(psi) => (I * psi.eval(x, t)).exp(),
            GaugeFunction::Direct(cf) => cf.eval(x, t),
        }
    }

    /// −i c⁻¹ ∂c along the given slot (axis < dim spatial, axis == dim time).
    /// Analytic when the exponent is given, centred differences otherwise.
    pub fn shift(&self, slot: usize, dim: usize, x: &[f64], t: f64) -> C64 {
        match self {
            GaugeFunction::Exponent(psi) => {
                if slot == dim {
                    psi.dt(x, t)
                } else {
                    psi.dx(slot, x, t)
                }
            }
            GaugeFunction::Direct(cf) => {
                let c = cf.eval(x, t);
                let dc = if slot == dim {
                    cf.dt(x, t)
                } else {
                    cf.dx(slot, x, t)
                };
                -I * dc / c
            }
        }
    }

    /// Node-wise checks: |c| ≥ c_min everywhere, c = 1 on Γ₀ (ψ = 0 there).
    pub fn validate(&self, grid: &Grid, t_max: f64) -> Result<()> {
        let times = [0.0, 0.33 * t_max, 0.71 * t_max, t_max];
        for it in 0..grid.n_tang() {
            for inorm in 0..grid.n_normal() {
                let x = grid.coords(it, inorm);
                let x = &x[..grid.dim];
                for &t in &times {
                    let c = self.c_value(x, t);
                    if c.norm() < C_MIN {
                        return Err(LabError::Numerical(format!(
                            "|c| = {:.3e} < c_min at node ({it},{inorm}), t={t}",
                            c.norm()
                        )));
                    }
                    if grid.on_gamma0(it, inorm) && (c - C64::new(1.0, 0.0)).norm() > 1e-12 {
                        return Err(LabError::Config(format!(
                            "gauge not 1 on the measured patch at node ({it},{inorm}), t={t}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

struct GaugedPotential {
    base: FieldRef,
    gauge: GaugeFunction,
    slot: usize,
    dim: usize,
}

impl SpaceTimeFn for GaugedPotential {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &[f64], t: f64) -> C64 {
        self.base.eval(x, t) + self.gauge.shift(self.slot, self.dim, x, t)
    }
    // dt/dx fall back to centred differences of the composed value
}

/// Gauge action on potentials: each slot shifts by −i c⁻¹ ∂c, the scalar
/// potential is unchanged.
pub fn gauge_apply(p: &PotentialSet, gauge: &GaugeFunction, grid: &Grid, t_max: f64) -> Result<PotentialSet> {
    gauge.validate(grid, t_max)?;
    let dim = p.dim;
    let mut a = Vec::with_capacity(dim + 1);
    for (slot_idx, base) in p.a.iter().enumerate() {
        // slot 0 is the time potential
        let slot = if slot_idx == 0 { dim } else { slot_idx - 1 };
        a.push(field(GaugedPotential {
            base: base.clone(),
            gauge: gauge.clone(),
            slot,
            dim,
        }));
    }
    Ok(PotentialSet {
        dim,
        a,
        v: p.v.clone(),
        self_adjoint: false,
    })
}

struct PulledScalar {
    base: FieldRef,
    phi: Arc<Diffeomorphism>,
    dim: usize,
}

impl SpaceTimeFn for PulledScalar {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, y: &[f64], t: f64) -> C64 {
        let x = self.phi.inverse(y);
        self.base.eval(&x[..self.dim], t)
    }
}

struct PulledVector {
    base: Vec<FieldRef>,
    phi: Arc<Diffeomorphism>,
    comp: usize,
    dim: usize,
}

impl SpaceTimeFn for PulledVector {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, y: &[f64], t: f64) -> C64 {
        // A(x) = J^T A0(y(x)) with J = Dy/Dx, so A0(y) = J^{-T} A(x(y))
        let x = self.phi.inverse(y);
        let j = self.phi.jacobian(&x[..self.dim]);
        let ax: Vec<C64> = self.base.iter().map(|f| f.eval(&x[..self.dim], t)).collect();
        if self.dim == 1 {
            ax[0] / j[0]
        } else {
            let det = j[0] * j[3] - j[1] * j[2];
            // J^{-T} rows: [[j11, -j10], [-j01, j00]] / det
            match self.comp {
                0 => (ax[0] * j[3] - ax[1] * j[2]) / det,
                _ => (-ax[0] * j[1] + ax[1] * j[0]) / det,
            }
        }
    }
}

/// Transport a potential set through a diffeomorphism: the time-slot and
/// scalar potentials move as scalars, the spatial slots as a covector.
pub fn pullback_potentials(p: &PotentialSet, phi: Arc<Diffeomorphism>) -> PotentialSet {
    let dim = p.dim;
    let mut a: Vec<FieldRef> = Vec::with_capacity(dim + 1);
    a.push(field(PulledScalar {
        base: p.a[0].clone(),
        phi: phi.clone(),
        dim,
    }));
    let spatial: Vec<FieldRef> = p.a[1..].to_vec();
    for comp in 0..dim {
        a.push(field(PulledVector {
            base: spatial.clone(),
            phi: phi.clone(),
            comp,
            dim,
        }));
    }
    PotentialSet {
        dim,
        a,
        v: field(PulledScalar {
            base: p.v.clone(),
            phi,
            dim,
        }),
        self_adjoint: p.self_adjoint,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::sampler::{AnalyticField, AxisProfile, TimeProfile, Term};
    use crate::geometry::Face;
    use crate::util::c;

    fn grid1() -> Grid {
        Grid::new(1, &[1.0], &[21], vec![Face::Low(0)], None).unwrap()
    }

    /// ψ = α x (vanishes at the measured end x = 0)
    fn psi_linear(alpha: f64) -> FieldRef {
        Arc::new(AnalyticField {
            dim: 1,
            terms: vec![Term {
                coef: [alpha, 0.0],
                space: vec![AxisProfile::Poly { coeffs: vec![0.0, 1.0] }],
                time: TimeProfile::Poly { coeffs: vec![[1.0, 0.0]] },
            }],
        })
    }

    #[test]
    fn identity_gauge_is_identity() {
        let g = grid1();
        let p = PotentialSet::zero(1);
        let gauge = GaugeFunction::Exponent(Arc::new(AnalyticField::zero(1)));
        let q = gauge_apply(&p, &gauge, &g, 1.0).unwrap();
        for f in &q.a {
            assert!(f.eval(&[0.5], 0.7).norm() < 1e-14);
        }
    }

    #[test]
    fn linear_exponent_shifts_normal_slot() {
        // ψ = α x: spatial slot shifts by α, time slot and V unchanged
        let g = grid1();
        let p = PotentialSet::zero(1);
        let gauge = GaugeFunction::Exponent(psi_linear(0.4));
        let q = gauge_apply(&p, &gauge, &g, 1.0).unwrap();
        assert!((q.a[1].eval(&[0.6], 0.3) - c(0.4)).norm() < 1e-12);
        assert!(q.a[0].eval(&[0.6], 0.3).norm() < 1e-12);
        assert!(q.v.eval(&[0.6], 0.3).norm() < 1e-14);
    }

    #[test]
    fn group_inverse_round_trips() {
        let g = grid1();
        let mut p = PotentialSet::zero(1);
        p.a[1] = Arc::new(AnalyticField::constant(1, c(0.3)));
        let gauge = GaugeFunction::Exponent(psi_linear(0.25));
        let inv = GaugeFunction::Exponent(psi_linear(-0.25));
        let q = gauge_apply(&gauge_apply(&p, &gauge, &g, 1.0).unwrap(), &inv, &g, 1.0).unwrap();
        assert!((q.a[1].eval(&[0.8], 0.2) - c(0.3)).norm() < 1e-12);
    }

    #[test]
    fn gauge_composition_matches_product() {
        let g = grid1();
        let p = PotentialSet::zero(1);
        let g1 = GaugeFunction::Exponent(psi_linear(0.2));
        let g2 = GaugeFunction::Exponent(psi_linear(0.35));
        let prod = GaugeFunction::Exponent(psi_linear(0.55));
        let seq = gauge_apply(&gauge_apply(&p, &g2, &g, 1.0).unwrap(), &g1, &g, 1.0).unwrap();
        let once = gauge_apply(&p, &prod, &g, 1.0).unwrap();
        assert!((seq.a[1].eval(&[0.5], 0.1) - once.a[1].eval(&[0.5], 0.1)).norm() < 1e-12);
    }

    #[test]
    fn direct_gauge_rejects_small_modulus() {
        let g = grid1();
        // c = x vanishes at an interior sample -> must be rejected; it also
        // violates c = 1 on the patch, either error is acceptable
        let cf: FieldRef = Arc::new(AnalyticField {
            dim: 1,
            terms: vec![Term {
                coef: [1.0, 0.0],
                space: vec![AxisProfile::Poly { coeffs: vec![0.0, 1.0] }],
                time: TimeProfile::Poly { coeffs: vec![[1.0, 0.0]] },
            }],
        });
        let gauge = GaugeFunction::Direct(cf);
        assert!(gauge.validate(&g, 1.0).is_err());
    }
}
