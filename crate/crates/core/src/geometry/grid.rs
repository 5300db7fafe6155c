//! Uniform axis-aligned grids with named boundary patches.

use crate::error::{LabError, Result};
use serde::{Deserialize, Serialize};

pub const MAX_DIM: usize = 2;

/// A whole grid face. The measured patch is a union of faces; slab and
/// D-to-N operations additionally require the low face of the normal (last)
/// axis to be part of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Face {
    Low(usize),
    High(usize),
}

impl Face {
    pub fn axis(&self) -> usize {
        match self {
            Face::Low(a) | Face::High(a) => *a,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Grid {
    pub dim: usize,
    /// Box extent per axis; domain is [0, extent_j].
    pub extent: [f64; MAX_DIM],
    /// Node count per axis (>= 3).
    pub n: [usize; MAX_DIM],
    /// Spacing per axis.
    pub h: [f64; MAX_DIM],
    /// Measured patch Γ₀: union of whole faces.
    pub gamma0: Vec<Face>,
    /// Probing sub-patch Γ ⊂ Γ₀ on the measured face, as a tangential
    /// coordinate interval (2-D only; in 1-D the face is a single point).
    pub gamma: Option<(f64, f64)>,
}

impl Grid {
    pub fn new(
        dim: usize,
        extent: &[f64],
        n: &[usize],
        gamma0: Vec<Face>,
        gamma: Option<(f64, f64)>,
    ) -> Result<Grid> {
        if dim == 0 || dim > MAX_DIM {
            return Err(LabError::Config(format!("dim must be 1 or 2, got {dim}")));
        }
        if extent.len() != dim || n.len() != dim {
            return Err(LabError::Config("extent/n length must equal dim".into()));
        }
        let mut e = [1.0; MAX_DIM];
        let mut nn = [1usize; MAX_DIM];
        let mut h = [1.0; MAX_DIM];
        for j in 0..dim {
            if extent[j] <= 0.0 {
                return Err(LabError::Config(format!("extent[{j}] must be > 0")));
            }
            if n[j] < 3 {
                return Err(LabError::Config(format!("n[{j}] must be >= 3")));
            }
            e[j] = extent[j];
            nn[j] = n[j];
            h[j] = extent[j] / (n[j] - 1) as f64;
        }
        if gamma0.is_empty() {
            return Err(LabError::Config("gamma0 must be a nonempty face union".into()));
        }
        for f in &gamma0 {
            if f.axis() >= dim {
                return Err(LabError::Config(format!("face {f:?} axis out of range")));
            }
        }
        if let Some((lo, hi)) = gamma {
            if dim < 2 {
                return Err(LabError::Config("gamma sub-patch requires dim = 2".into()));
            }
            if !(0.0 <= lo && lo < hi && hi <= e[0]) {
                return Err(LabError::Config(format!(
                    "gamma range ({lo}, {hi}) outside tangential extent [0, {}]",
                    e[0]
                )));
            }
        }
        Ok(Grid {
            dim,
            extent: e,
            n: nn,
            h,
            gamma0,
            gamma,
        })
    }

    /// Normal (last) axis index.
    pub fn normal_axis(&self) -> usize {
        self.dim - 1
    }

    /// Number of tangential nodes (1 when dim = 1).
    pub fn n_tang(&self) -> usize {
        if self.dim == 2 {
            self.n[0]
        } else {
            1
        }
    }

    pub fn n_normal(&self) -> usize {
        self.n[self.normal_axis()]
    }

    pub fn h_normal(&self) -> f64 {
        self.h[self.normal_axis()]
    }

    pub fn h_tang(&self) -> f64 {
        if self.dim == 2 {
            self.h[0]
        } else {
            0.0
        }
    }

    pub fn total_nodes(&self) -> usize {
        self.n_tang() * self.n_normal()
    }

    /// Flat index: normal axis contiguous.
    #[inline]
    pub fn idx(&self, it: usize, inorm: usize) -> usize {
        it * self.n_normal() + inorm
    }

    #[inline]
    pub fn coords(&self, it: usize, inorm: usize) -> [f64; MAX_DIM] {
        let mut x = [0.0; MAX_DIM];
        if self.dim == 2 {
            x[0] = it as f64 * self.h[0];
            x[1] = inorm as f64 * self.h[1];
        } else {
            x[0] = inorm as f64 * self.h[0];
        }
        x
    }

    /// Tangential coordinate of tangential node `it` (0 in 1-D).
    pub fn tang_coord(&self, it: usize) -> f64 {
        if self.dim == 2 {
            it as f64 * self.h[0]
        } else {
            0.0
        }
    }

    /// Is the node on any grid boundary?
    pub fn is_boundary(&self, it: usize, inorm: usize) -> bool {
        if inorm == 0 || inorm + 1 == self.n_normal() {
            return true;
        }
        self.dim == 2 && (it == 0 || it + 1 == self.n_tang())
    }

    /// Does the node lie on the given face?
    pub fn on_face(&self, face: Face, it: usize, inorm: usize) -> bool {
        let norm = self.normal_axis();
        match face {
            Face::Low(a) if a == norm => inorm == 0,
            Face::High(a) if a == norm => inorm + 1 == self.n_normal(),
            Face::Low(0) if self.dim == 2 => it == 0,
            Face::High(0) if self.dim == 2 => it + 1 == self.n_tang(),
            _ => false,
        }
    }

    pub fn on_gamma0(&self, it: usize, inorm: usize) -> bool {
        self.gamma0.iter().any(|&f| self.on_face(f, it, inorm))
    }

    /// Tangential node index range of the probing patch Γ (whole face when
    /// no sub-patch is set).
    pub fn gamma_tang_range(&self) -> (usize, usize) {
        if self.dim == 1 {
            return (0, 1);
        }
        match self.gamma {
            Some((lo, hi)) => {
                let i0 = (lo / self.h[0]).ceil() as usize;
                let i1 = ((hi / self.h[0]).floor() as usize).min(self.n[0] - 1);
                (i0, i1 + 1)
            }
            None => (0, self.n[0]),
        }
    }

    /// Grid refined by the given integer factor on every axis (same extent).
    pub fn refined(&self, factor: usize) -> Grid {
        let mut g = self.clone();
        for j in 0..self.dim {
            g.n[j] = (self.n[j] - 1) * factor + 1;
            g.h[j] = self.extent[j] / (g.n[j] - 1) as f64;
        }
        g
    }

    /// Measured face must be the low end of the normal axis for slab work.
    pub fn require_measured_low_face(&self) -> Result<()> {
        let want = Face::Low(self.normal_axis());
        if self.gamma0.contains(&want) {
            Ok(())
        } else {
            Err(LabError::Config(
                "this operation requires gamma0 to contain the low face of the normal axis".into(),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_validates() {
        assert!(Grid::new(1, &[2.0], &[5], vec![Face::Low(0)], None).is_ok());
        assert!(Grid::new(1, &[2.0], &[2], vec![Face::Low(0)], None).is_err());
        assert!(Grid::new(1, &[0.0], &[5], vec![Face::Low(0)], None).is_err());
        assert!(Grid::new(1, &[2.0], &[5], vec![], None).is_err());
        assert!(Grid::new(1, &[2.0], &[5], vec![Face::Low(0)], Some((0.0, 1.0))).is_err());
    }

    #[test]
    fn indexing_round_trip() {
        let g = Grid::new(2, &[1.0, 2.0], &[5, 9], vec![Face::Low(1)], None).unwrap();
        assert_eq!(g.total_nodes(), 45);
        assert_eq!(g.normal_axis(), 1);
        let x = g.coords(2, 3);
        assert!((x[0] - 0.5).abs() < 1e-14);
        assert!((x[1] - 0.75).abs() < 1e-14);
        assert!(g.on_face(Face::Low(1), 2, 0));
        assert!(!g.on_face(Face::Low(1), 2, 1));
        assert!(g.on_face(Face::High(0), 4, 3));
    }

    #[test]
    fn gamma_range_maps_to_indices() {
        let g = Grid::new(
            2,
            &[4.0, 2.0],
            &[9, 5],
            vec![Face::Low(1)],
            Some((1.0, 3.0)),
        )
        .unwrap();
        let (a, b) = g.gamma_tang_range();
        assert_eq!((a, b), (2, 7));
    }
}
