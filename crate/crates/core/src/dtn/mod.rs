//! Assembly of the discrete D-to-N operator, invariance checks, and the
//! Green-identity boundary functionals.

pub mod assemble;
pub mod functionals;
pub mod map;

pub use assemble::{adjoint_dtn, assemble_dtn};
pub use functionals::{
    A0_ORIENTATION,
    functional_a, functional_a1_direct, functional_a1_two_path, functional_a_corner_path,
    functional_a_projected, functional_uvs, green_gap, trace_subset, verify_pair_consistency,
    volume_functional_a0, PairConsistency,
};
pub use map::{
    export_csv, hex32, operator_norm, read_dtn, relative_difference, write_dtn, DtnBasis,
    DtnConvention, DtnMap,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{
        field, gauge_apply, AnalyticField, GaugeFunction, PotentialSet, ReducedCoefficients,
    };
    use crate::fields::sampler::{AxisProfile, Term, TimeProfile};
    use crate::forward::{solve, BoundarySignal, CharacteristicSlab, RecordSpec, SolveParams, WaveOperator};
    use crate::geometry::{Face, Grid, MetricField};
    use crate::util::signals::plateau;
    use crate::util::{c, C64};
    use std::sync::Arc;

    fn slab_setup() -> (Grid, ReducedCoefficients, CharacteristicSlab) {
        let grid = Grid::new(1, &[2.0], &[241], vec![Face::Low(0)], None).unwrap();
        let metric = MetricField::flat(&grid);
        let rc = ReducedCoefficients::from_presets(
            &grid,
            metric.clone(),
            Arc::new(AnalyticField::constant(1, c(0.3))),
            vec![],
            Arc::new(AnalyticField::constant(1, c(0.2))),
            true,
        )
        .unwrap();
        let slab = CharacteristicSlab::new(&grid, &metric, 0.0, 1.6, 0.8).unwrap();
        (grid, rc, slab)
    }

    fn band_signal(seed: u64, t1: f64, t: f64) -> BoundarySignal {
        use crate::util::signals::{rng_for, BandLimited};
        let mut rng = rng_for(seed, 0x61);
        let f = Arc::new(BandLimited::sample(&mut rng, t1, t, 5, 0.15));
        Arc::new(move |_, tt| f.eval(tt))
    }

    #[test]
    fn green_gap_matches_volume_functional() {
        // the Green identity: (Λf,g) − (f,Λ*g) = ∫_Y (u_s v̄ − u v̄_s)
        let (grid, rc, slab) = slab_setup();
        let op = WaveOperator::reduced(&rc);
        let basis = DtnBasis::new(&grid, (slab.t1, slab.t), 32, 1).unwrap();
        let params = SolveParams::new(slab.t1, slab.t, 0.5);
        let lam = assemble_dtn(&op, &basis, &params, DtnConvention::InteriorNormalReduced, [1; 32]).unwrap();
        let lam_star = adjoint_dtn(&op, &basis, &params, DtnConvention::InteriorNormalReduced, [1; 32]).unwrap();

        // smooth pair expanded in the basis
        let fsig = band_signal(11, slab.t1, slab.t);
        let gsig = band_signal(12, slab.t1, slab.t);
        let fc: Vec<C64> = basis.time_centers.iter().map(|&t| fsig(0.0, t)).collect();
        let gc: Vec<C64> = basis.time_centers.iter().map(|&t| gsig(0.0, t)).collect();
        // boundary signals reconstructed from the hat expansion so both sides
        // see the same data
        let fexp: BoundarySignal = {
            let b = basis.clone();
            let g2 = grid.clone();
            let fc = fc.clone();
            Arc::new(move |yp, t| b.expand(&g2, &fc, yp, t))
        };
        let gexp: BoundarySignal = {
            let b = basis.clone();
            let g2 = grid.clone();
            let gc = gc.clone();
            Arc::new(move |yp, t| b.expand(&g2, &gc, yp, t))
        };
        let gap = green_gap(&lam, &lam_star, &fc, &gc, &grid).unwrap();

        let record = RecordSpec {
            incoming: vec![slab.y_surface(3, slab.t1, slab.t)],
            ..Default::default()
        };
        let uf = solve(&op, &fexp, &params, &record).unwrap();
        let vg = solve(&op.adjoint(), &gexp, &params, &record).unwrap();
        let a0 = volume_functional_a0(&uf.incoming[0], &vg.incoming[0]);
        let scale = gap.norm().max(a0.norm()).max(1e-12);
        let rel = (gap - a0 * functionals::A0_ORIENTATION).norm() / scale;
        assert!(rel < 0.05, "gap {gap} vs A0 {a0} (rel {rel})");
    }

    #[test]
    fn self_adjoint_maps_coincide() {
        let (grid, rc, slab) = slab_setup();
        let op = WaveOperator::reduced(&rc);
        let basis = DtnBasis::new(&grid, (slab.t1, slab.t), 24, 1).unwrap();
        let params = SolveParams::new(slab.t1, slab.t, 0.5);
        let lam = assemble_dtn(&op, &basis, &params, DtnConvention::InteriorNormalReduced, [2; 32]).unwrap();
        let lam_star = adjoint_dtn(&op, &basis, &params, DtnConvention::InteriorNormalReduced, [2; 32]).unwrap();
        let rel = relative_difference(&lam, &lam_star).unwrap();
        assert!(rel < 1e-3, "‖Λ − Λ*‖/‖Λ‖ = {rel}");
    }

    #[test]
    fn gauge_leaves_map_invariant() {
        // raw 1-D operator with a gauge exponent vanishing on the measured
        // end: the two assembled maps agree to discretization accuracy
        let grid = Grid::new(1, &[2.5], &[281], vec![Face::Low(0)], None).unwrap();
        let metric = MetricField::flat(&grid);
        let mut pot = PotentialSet::zero(1);
        pot.v = Arc::new(AnalyticField::constant(1, c(0.15)));
        let psi = AnalyticField {
            dim: 1,
            terms: vec![Term {
                coef: [0.35, 0.0],
                space: vec![AxisProfile::Poly {
                    coeffs: vec![0.0, 1.0, -0.2],
                }],
                time: TimeProfile::Poly {
                    coeffs: vec![[1.0, 0.0], [0.3, 0.0]],
                },
            }],
        };
        let gauge = GaugeFunction::Exponent(field(psi));
        let t_end = 1.8;
        let gauged = gauge_apply(&pot, &gauge, &grid, t_end).unwrap();
        let basis = DtnBasis::new(&grid, (0.0, t_end), 24, 1).unwrap();
        let params = SolveParams::new(0.0, t_end, 0.5);
        let lam = assemble_dtn(
            &WaveOperator::raw(metric.clone(), &pot),
            &basis,
            &params,
            DtnConvention::ExteriorConormal,
            [3; 32],
        )
        .unwrap();
        let lam_g = assemble_dtn(
            &WaveOperator::raw(metric, &gauged),
            &basis,
            &params,
            DtnConvention::ExteriorConormal,
            [3; 32],
        )
        .unwrap();
        let rel = relative_difference(&lam, &lam_g).unwrap();
        assert!(rel < 1e-2, "gauge moved the map by {rel}");
    }

    #[test]
    fn pair_consistency_identical_sets() {
        let (_, rc, slab) = slab_setup();
        let op = WaveOperator::reduced(&rc);
        let f: BoundarySignal = Arc::new(|_, t| c(plateau(t, 0.5, 0.1, 0.3)));
        let g: BoundarySignal = Arc::new(|_, t| c(plateau(t, 0.7, 0.1, 0.3)));
        let rep = verify_pair_consistency(&op, &op, &slab, &f, &g, 0.8, 0.5).unwrap();
        assert!(rep.pairing_diff < 1e-12);
        assert!((rep.norm_ratio - 1.0).abs() < 1e-12);
    }
}
