//! The characteristic slab over the probing patch: null coordinates
//! s = t − y_n, τ = T − t − y_n, the nested boundary patches obtained from
//! domains of influence, and lattice builders for the surfaces the boundary
//! functionals integrate over.

use super::record::{IncomingSurface, OutgoingSurface};
use crate::error::{LabError, Result};
use crate::geometry::{Grid, MetricField};

#[derive(Debug, Clone)]
pub struct CharacteristicSlab {
    pub grid: Grid,
    pub t1: f64,
    /// Final time T.
    pub t: f64,
    pub s0: f64,
    /// Max tangential propagation speed (0 in 1-D).
    pub c_tang: f64,
    /// Lattice step in the surface parameter s.
    pub ds: f64,
}

impl CharacteristicSlab {
    pub fn new(grid: &Grid, metric: &MetricField, t1: f64, t: f64, s0: f64) -> Result<Self> {
        grid.require_measured_low_face()?;
        if !(t1 <= s0 && s0 < t) {
            return Err(LabError::Config(format!(
                "need t1 <= s0 < t, got t1={t1}, s0={s0}, t={t}"
            )));
        }
        let c_tang = if grid.dim == 2 {
            let mut m: f64 = 0.0;
            for it in 0..grid.n_tang() {
                for inorm in 0..grid.n_normal() {
                    m = m.max(metric.at(it, inorm).a[0]);
                }
            }
            m.sqrt()
        } else {
            0.0
        };
        // default surface lattice resolution: twice the normal spacing in s
        let ds = grid.h_normal();
        Ok(CharacteristicSlab {
            grid: grid.clone(),
            t1,
            t,
            s0,
            c_tang,
            ds,
        })
    }

    pub fn with_ds(mut self, ds: f64) -> Self {
        self.ds = ds;
        self
    }

    /// y_n for a surface point of the incoming surface at level `c`.
    pub fn yn_of_s(c: f64, s: f64) -> f64 {
        0.5 * (c - s)
    }

    /// Tangential index range of Γ^{(j)}, j = 1, 2, 3: the probing patch
    /// expanded (j−1) times by the tangential influence radius over the
    /// window, clipped to the grid.
    pub fn gamma_j(&self, j: usize) -> (usize, usize) {
        let base = self.grid.gamma_tang_range();
        if self.grid.dim == 1 {
            return base;
        }
        let radius = self.c_tang * (self.t - self.t1) * (j.saturating_sub(1)) as f64;
        self.expand_range(base, radius)
    }

    fn expand_range(&self, (lo, hi): (usize, usize), radius: f64) -> (usize, usize) {
        if self.grid.dim == 1 {
            return (lo, hi);
        }
        let cells = (radius / self.grid.h_tang()).ceil() as usize;
        (lo.saturating_sub(cells), (hi + cells).min(self.grid.n[0]))
    }

    /// Tangential range of the surface Y_{j s0} (influence of Δ_{j s0} on the
    /// incoming surface at the final time).
    pub fn y_tang_range(&self, j: usize, s0: f64) -> (usize, usize) {
        self.expand_range(self.gamma_j(j), self.c_tang * (self.t - s0))
    }

    /// s-lattice covering [s_lo, s_hi] with spacing ~ds, endpoints included.
    pub fn s_lattice(&self, s_lo: f64, s_hi: f64) -> Vec<f64> {
        let n = ((s_hi - s_lo) / self.ds).round().max(4.0) as usize;
        (0..=n)
            .map(|i| s_lo + (s_hi - s_lo) * i as f64 / n as f64)
            .collect()
    }

    /// Incoming surface spec for Y_{j s0} with final time `t_final`
    /// (t_final = T for the master surface; smaller values give the τ > 0
    /// slices used by the recovery).
    pub fn y_surface(&self, j: usize, s0: f64, t_final: f64) -> IncomingSurface {
        IncomingSurface {
            c: t_final,
            s: self.s_lattice(self.t1, t_final.min(self.t)),
            tang: self.y_tang_range(j, s0),
        }
    }

    /// Energy-wedge boundary: incoming piece (τ = 0, y_n up to (T−T1)/2),
    /// the whole s-range [T1, T] of the surface t + y_n = T.
    pub fn wedge_incoming(&self) -> IncomingSurface {
        IncomingSurface {
            c: self.t,
            s: self.s_lattice(self.t1, self.t),
            tang: self.y_tang_range(3, self.t1),
        }
    }

    /// Energy-wedge outgoing piece (s = T1, y_n from (T−T1)/2 to T−T1).
    pub fn wedge_outgoing(&self) -> OutgoingSurface {
        let lo = 0.5 * (self.t - self.t1);
        let hi = self.t - self.t1;
        let n = ((hi - lo) / self.ds).round().max(4.0) as usize;
        OutgoingSurface {
            c: self.t1,
            yn: (0..=n)
                .map(|i| lo + (hi - lo) * i as f64 / n as f64)
                .collect(),
            tang: self.y_tang_range(3, self.t1),
        }
    }

    /// Index-set nesting of the regions used by the localized functionals:
    /// (Y_{1T1} ∩ {s ≥ s0}) ⊆ R_{2s0} ⊆ Y_{2s0} ⊆ R_{3s0} ⊆ Y_{3s0}.
    pub fn check_nesting(&self, s0: f64) -> bool {
        let contains = |outer: (usize, usize), inner: (usize, usize)| {
            outer.0 <= inner.0 && inner.1 <= outer.1
        };
        let y1 = self.y_tang_range(1, self.t1);
        let r2 = self.gamma_j(2);
        let y2 = self.y_tang_range(2, s0);
        let r3 = self.gamma_j(3);
        let y3 = self.y_tang_range(3, s0);
        contains(r2, y1) && contains(y2, r2) && contains(r3, y2) && contains(y3, r3)
    }

    /// All points of X₀ = {y′ ∈ Γ, T1 ≤ s + τ ≤ T} have y_n ≥ 0.
    pub fn x0_contains(&self, s: f64, tau: f64) -> bool {
        let sum = s + tau;
        self.t1 - 1e-12 <= sum && sum <= self.t + 1e-12 && (self.t - s - tau) >= -1e-12
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Face, MetricSampler, SymMat};

    fn slab2() -> CharacteristicSlab {
        struct M;
        impl MetricSampler for M {
            fn dim(&self) -> usize {
                2
            }
            fn ginv(&self, _x: &[f64]) -> SymMat {
                SymMat::new2(1.2, 0.0, 1.0)
            }
            fn dginv(&self, _a: usize, _x: &[f64]) -> SymMat {
                SymMat { dim: 2, a: [0.0; 3] }
            }
        }
        let g = Grid::new(
            2,
            &[4.0, 2.0],
            &[41, 21],
            vec![Face::Low(1)],
            Some((1.5, 2.5)),
        )
        .unwrap();
        let m = MetricField::sample(&M, &g).unwrap();
        CharacteristicSlab::new(&g, &m, 0.0, 1.5, 0.8).unwrap()
    }

    #[test]
    fn patches_nest() {
        let slab = slab2();
        assert!(slab.check_nesting(0.8));
        let g1 = slab.gamma_j(1);
        let g2 = slab.gamma_j(2);
        let g3 = slab.gamma_j(3);
        assert!(g2.0 < g1.0 && g1.1 < g2.1);
        assert!(g3.0 <= g2.0 && g2.1 <= g3.1);
    }

    #[test]
    fn surface_points_stay_above_floor() {
        let slab = slab2();
        let surf = slab.y_surface(1, slab.t1, slab.t);
        for &s in &surf.s {
            assert!(CharacteristicSlab::yn_of_s(surf.c, s) >= -1e-12);
        }
        assert!(slab.x0_contains(0.5, 0.7));
        assert!(!slab.x0_contains(1.4, 0.7));
    }

    #[test]
    fn rejects_bad_window() {
        struct M;
        impl MetricSampler for M {
            fn dim(&self) -> usize {
                1
            }
            fn ginv(&self, _x: &[f64]) -> SymMat {
                SymMat::new1(1.0)
            }
            fn dginv(&self, _a: usize, _x: &[f64]) -> SymMat {
                SymMat::new1(0.0)
            }
        }
        let g = Grid::new(1, &[2.0], &[11], vec![Face::Low(0)], None).unwrap();
        let m = MetricField::sample(&M, &g).unwrap();
        assert!(CharacteristicSlab::new(&g, &m, 0.5, 1.5, 1.6).is_err());
    }
}
