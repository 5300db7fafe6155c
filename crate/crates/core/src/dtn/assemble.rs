//! Column-by-column D-to-N assembly: one forward solve per basis element,
//! one-sided second-order normal trace plus the zeroth-order potential term.

use super::map::{DtnBasis, DtnConvention, DtnMap};
use crate::error::Result;
use crate::forward::{solve, BoundaryKit, BoundarySignal, RecordSpec, SolveParams, WaveOperator};
use crate::forward::record::BoundarySpec;
use crate::util::C64;
use crate::util::I;
use ndarray::Array2;
use rayon::prelude::*;
use std::sync::Arc;

/// Trace rows from the recorded first three normal rows.
fn trace_rows(
    op: &WaveOperator,
    kit: &BoundaryKit,
    basis: &DtnBasis,
    convention: DtnConvention,
) -> Vec<C64> {
    let grid = &op.grid;
    let h = grid.h_normal();
    let na = grid.normal_axis();
    let mut out = vec![C64::new(0.0, 0.0); basis.len()];
    for (jt, &t) in kit.times.iter().enumerate() {
        for (isp, &node) in basis.space_nodes.iter().enumerate() {
            let col = node - kit.tang0;
            let u0 = kit.u0[[jt, col]];
            let u1 = kit.u1[[jt, col]];
            let u2 = kit.u2[[jt, col]];
            let dn = (-3.0 * u0 + 4.0 * u1 - u2) / (2.0 * h);
            let x = grid.coords(node, 0);
            let x = &x[..grid.dim];
            let v = match convention {
                DtnConvention::InteriorNormalReduced => {
                    let an = op.a[na + 1].eval(x, t);
                    dn + I * an * u0
                }
                DtnConvention::ExteriorConormal => {
                    // exterior normal on the measured face is −e_n
                    let m = op.metric.at(node, 0);
                    let gnn = m.get(na, na);
                    let mut s = m.get(na, na) * (dn + I * op.a[na + 1].eval(x, t) * u0);
                    if grid.dim == 2 {
                        // tangential derivative of the boundary row
                        let dt_u = tang_deriv_row(kit, jt, col, grid.h_tang());
                        s += m.get(0, 1) * (dt_u + I * op.a[1].eval(x, t) * u0);
                    }
                    -s / gnn.sqrt()
                }
            };
            out[basis.col(isp, jt)] = v;
        }
    }
    out
}

fn tang_deriv_row(kit: &BoundaryKit, jt: usize, col: usize, h: f64) -> C64 {
    let n = kit.u0.shape()[1];
    if n < 3 || h == 0.0 {
        return C64::new(0.0, 0.0);
    }
    if col == 0 {
        (-3.0 * kit.u0[[jt, 0]] + 4.0 * kit.u0[[jt, 1]] - kit.u0[[jt, 2]]) / (2.0 * h)
    } else if col + 1 == n {
        (3.0 * kit.u0[[jt, n - 1]] - 4.0 * kit.u0[[jt, n - 2]] + kit.u0[[jt, n - 3]]) / (2.0 * h)
    } else {
        (kit.u0[[jt, col + 1]] - kit.u0[[jt, col - 1]]) / (2.0 * h)
    }
}

/// Assemble the D-to-N matrix: column j is the trace of the solve with the
/// j-th basis hat as Dirichlet data, sampled at the basis lattice. Columns
/// run in parallel; each writes its own slot.
pub fn assemble_dtn(
    op: &WaveOperator,
    basis: &DtnBasis,
    params: &SolveParams,
    convention: DtnConvention,
    provenance: [u8; 32],
) -> Result<DtnMap> {
    let grid = op.grid.clone();
    let n = basis.len();
    let record = RecordSpec {
        boundary: Some(BoundarySpec {
            times: basis.time_centers.clone(),
            tang: (0, grid.n_tang()),
        }),
        ..Default::default()
    };
    let cols: Vec<Result<Vec<C64>>> = (0..n)
        .into_par_iter()
        .map(|colidx| {
            let isp = colidx / basis.n_time();
            let jt = colidx % basis.n_time();
            let b = basis.clone();
            let g = grid.clone();
            let signal: BoundarySignal =
                Arc::new(move |yp: f64, t: f64| C64::new(b.eval(&g, isp, jt, yp, t), 0.0));
            let out = solve(op, &signal, params, &record).map_err(|e| {
                crate::error::LabError::Numerical(format!("column {colidx}: {e}"))
            })?;
            Ok(trace_rows(op, out.boundary.as_ref().unwrap(), basis, convention))
        })
        .collect();
    let mut matrix = Array2::zeros((n, n));
    for (colidx, col) in cols.into_iter().enumerate() {
        let col = col?;
        for r in 0..n {
            matrix[[r, colidx]] = col[r];
        }
    }
    Ok(DtnMap {
        convention,
        dim: grid.dim,
        basis: basis.clone(),
        matrix,
        provenance,
    })
}

/// Adjoint-operator D-to-N: conjugated coefficients, same window and basis.
pub fn adjoint_dtn(
    op: &WaveOperator,
    basis: &DtnBasis,
    params: &SolveParams,
    convention: DtnConvention,
    provenance: [u8; 32],
) -> Result<DtnMap> {
    assemble_dtn(&op.adjoint(), basis, params, convention, provenance)
}
