//! Graph-geodesic distance to a boundary patch and the horizon time T*.
//!
//! Dijkstra on the grid graph (2 neighbors in 1-D, 8 in 2-D) with edge
//! weights from the metric tensor, averaged between edge endpoints. O(h)
//! accurate, which is enough because the distance only sizes time windows.


use super::metric::MetricField;
use crate::error::{LabError, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone)]
pub struct DistanceField {
    pub d: Vec<f64>,
    /// T* = max over nodes of d(x, Γ₀).
    pub t_star: f64,
}

struct HeapItem {
    dist: f64,
    node: usize,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.dist == other.dist && self.node == other.node
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, ties broken by node index for determinism
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Distance from every node to Γ₀ in the metric ‖g^{jk}‖⁻¹.
pub fn boundary_distance(metric: &MetricField) -> Result<DistanceField> {
    let grid = &metric.grid;
    let nt = grid.n_tang();
    let nn = grid.n_normal();
    let total = grid.total_nodes();

    // metric tensor (lower index) per node
    let tensors: Vec<_> = (0..nt)
        .flat_map(|it| (0..nn).map(move |inorm| (it, inorm)))
        .map(|(it, inorm)| metric.at(it, inorm).inverse())
        .collect();

    let mut dist = vec![f64::INFINITY; total];
    let mut heap = BinaryHeap::new();
    let mut any_source = false;
    for it in 0..nt {
        for inorm in 0..nn {
            if grid.on_gamma0(it, inorm) {
                let idx = grid.idx(it, inorm);
                dist[idx] = 0.0;
                heap.push(HeapItem { dist: 0.0, node: idx });
                any_source = true;
            }
        }
    }
    if !any_source {
        return Err(LabError::Config("gamma0 contains no grid nodes".into()));
    }

    let offsets_1d: &[(isize, isize)] = &[(0, -1), (0, 1)];
    let offsets_2d: &[(isize, isize)] = &[
        (-1, -1),
        (-1, 0),
        (-1, 1),
        (0, -1),
        (0, 1),
        (1, -1),
        (1, 0),
        (1, 1),
    ];
    let offsets = if grid.dim == 1 { offsets_1d } else { offsets_2d };

    while let Some(HeapItem { dist: du, node }) = heap.pop() {
        if du > dist[node] {
            continue;
        }
        let it = node / nn;
        let inorm = node % nn;
        for &(dt, dn) in offsets {
            let jt = it as isize + dt;
            let jn = inorm as isize + dn;
            if jt < 0 || jn < 0 || jt >= nt as isize || jn >= nn as isize {
                continue;
            }
            let (jt, jn) = (jt as usize, jn as usize);
            let nb = grid.idx(jt, jn);
            let step = if grid.dim == 1 {
                [dn as f64 * grid.h[0], 0.0]
            } else {
                [dt as f64 * grid.h[0], dn as f64 * grid.h[1]]
            };
            let la = tensors[node].quad(&step[..grid.dim]).sqrt();
            let lb = tensors[nb].quad(&step[..grid.dim]).sqrt();
            let w = 0.5 * (la + lb);
            let cand = du + w;
            if cand < dist[nb] {
                dist[nb] = cand;
                heap.push(HeapItem { dist: cand, node: nb });
            }
        }
    }

    if dist.iter().any(|d| !d.is_finite()) {
        return Err(LabError::Disconnected);
    }
    let t_star = dist.iter().cloned().fold(0.0, f64::max);
    Ok(DistanceField { d: dist, t_star })
}
