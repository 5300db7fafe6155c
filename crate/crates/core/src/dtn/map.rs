//! The discrete D-to-N operator: a matrix over a tensor hat basis on the
//! measured patch, tagged with its trace convention and provenance.

use crate::error::{LabError, Result};
use crate::geometry::Grid;
use crate::util::C64;
use ndarray::Array2;
use std::io::{Read, Write};
use std::path::Path;

/// Trace conventions. The exterior co-normal and the interior normal
/// derivative of the reduced form differ by sign and metric weights, and
/// the two are never compared without an explicit conversion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtnConvention {
    /// Σ g^{jk}(∂_j u + i A_j u) ν_k (Σ g^{pr} ν_p ν_r)^{-1/2}, ν exterior.
    ExteriorConormal,
    /// (∂u/∂y_n + i a_n u)|_{y_n = 0} for the reduced characteristic form.
    InteriorNormalReduced,
}

impl DtnConvention {
    pub fn byte(self) -> u8 {
        match self {
            DtnConvention::ExteriorConormal => 0,
            DtnConvention::InteriorNormalReduced => 1,
        }
    }

    pub fn from_byte(b: u8) -> Result<Self> {
        match b {
            0 => Ok(DtnConvention::ExteriorConormal),
            1 => Ok(DtnConvention::InteriorNormalReduced),
            other => Err(LabError::DtnFormat(format!("unknown convention byte {other}"))),
        }
    }
}

/// Tensor hat basis over the measured patch: temporal hats vanishing at the
/// window start (data support condition), spatial hats snapped to grid
/// nodes inside the probing patch.
#[derive(Debug, Clone)]
pub struct DtnBasis {
    pub dim: usize,
    /// Hat centers in time; spacing dt_b; the first hat sits one spacing
    /// after the window start, the last peaks at the window end.
    pub time_centers: Vec<f64>,
    pub dt_b: f64,
    /// Tangential node indices (grid-snapped hat centers); [0] in 1-D.
    pub space_nodes: Vec<usize>,
    /// Hat half-width in the tangential coordinate.
    pub dspace: f64,
}

impl DtnBasis {
    pub fn new(grid: &Grid, t_window: (f64, f64), n_time: usize, n_space: usize) -> Result<DtnBasis> {
        if n_time < 3 {
            return Err(LabError::Config("need at least 3 temporal hats".into()));
        }
        let (t0, t1) = t_window;
        if t1 <= t0 {
            return Err(LabError::Config("empty time window".into()));
        }
        let dt_b = (t1 - t0) / n_time as f64;
        let time_centers = (1..=n_time).map(|j| t0 + j as f64 * dt_b).collect();
        let (space_nodes, dspace) = if grid.dim == 1 {
            (vec![0usize], 1.0)
        } else {
            if n_space < 2 {
                return Err(LabError::Config("need at least 2 spatial hats in 2-D".into()));
            }
            let (lo, hi) = grid.gamma_tang_range();
            let (ylo, yhi) = (grid.tang_coord(lo), grid.tang_coord(hi - 1));
            let dsp = (yhi - ylo) / (n_space + 1) as f64;
            let nodes: Vec<usize> = (1..=n_space)
                .map(|i| {
                    let y = ylo + i as f64 * dsp;
                    (y / grid.h_tang()).round() as usize
                })
                .collect();
            (nodes, dsp)
        };
        Ok(DtnBasis {
            dim: grid.dim,
            time_centers,
            dt_b,
            space_nodes,
            dspace,
        })
    }

    pub fn n_time(&self) -> usize {
        self.time_centers.len()
    }

    pub fn n_space(&self) -> usize {
        self.space_nodes.len()
    }

    pub fn len(&self) -> usize {
        self.n_time() * self.n_space()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn col(&self, ispace: usize, jtime: usize) -> usize {
        ispace * self.n_time() + jtime
    }

    /// Hat value of basis element (ispace, jtime) at (tangential coord, t).
    pub fn eval(&self, grid: &Grid, ispace: usize, jtime: usize, yp: f64, t: f64) -> f64 {
        let ht = (1.0 - (t - self.time_centers[jtime]).abs() / self.dt_b).max(0.0);
        if self.dim == 1 {
            ht
        } else {
            let yc = grid.tang_coord(self.space_nodes[ispace]);
            let hs = (1.0 - (yp - yc).abs() / self.dspace).max(0.0);
            ht * hs
        }
    }

    /// Evaluate the expansion with the given coefficient vector at (yp, t).
    pub fn expand(&self, grid: &Grid, coeffs: &[C64], yp: f64, t: f64) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for isp in 0..self.n_space() {
            for jt in 0..self.n_time() {
                let h = self.eval(grid, isp, jt, yp, t);
                if h > 0.0 {
                    s += coeffs[self.col(isp, jt)] * h;
                }
            }
        }
        s
    }

    /// Trapezoid quadrature weights on the row lattice (space × time).
    pub fn row_weights(&self, grid: &Grid) -> Vec<f64> {
        let nt = self.n_time();
        let nsp = self.n_space();
        let mut w = vec![0.0; nt * nsp];
        for isp in 0..nsp {
            let ws = if self.dim == 1 {
                1.0
            } else if nsp == 1 {
                self.dspace
            } else {
                let edge = isp == 0 || isp + 1 == nsp;
                let yc_next = grid.h_tang(); // uniform-ish snapped lattice
                let _ = yc_next;
                if edge {
                    0.75 * self.dspace
                } else {
                    self.dspace
                }
            };
            for jt in 0..nt {
                let wt = if jt == 0 || jt + 1 == nt {
                    0.5 * self.dt_b
                } else {
                    self.dt_b
                };
                w[self.col(isp, jt)] = ws * wt;
            }
        }
        w
    }
}

#[derive(Debug, Clone)]
pub struct DtnMap {
    pub convention: DtnConvention,
    pub dim: usize,
    pub basis: DtnBasis,
    /// Rows = trace samples at the basis lattice points, columns = basis
    /// elements.
    pub matrix: Array2<C64>,
    /// Scenario/coefficient provenance hash.
    pub provenance: [u8; 32],
}

impl DtnMap {
    pub fn apply(&self, coeffs: &[C64]) -> Vec<C64> {
        let n = self.basis.len();
        assert_eq!(coeffs.len(), n);
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (r, o) in out.iter_mut().enumerate() {
            let mut s = C64::new(0.0, 0.0);
            for c in 0..n {
                s += self.matrix[[r, c]] * coeffs[c];
            }
            *o = s;
        }
        out
    }

    /// Largest upper-time-block entry magnitude: exact causality means the
    /// response at a row time earlier than the column's hat onset vanishes.
    pub fn causality_defect(&self) -> f64 {
        let nt = self.basis.n_time();
        let mut worst: f64 = 0.0;
        for rsp in 0..self.basis.n_space() {
            for rt in 0..nt {
                for csp in 0..self.basis.n_space() {
                    for ct in 0..nt {
                        // column hat (ct) is zero before time_centers[ct] − dt_b
                        if self.basis.time_centers[rt]
                            <= self.basis.time_centers[ct] - self.basis.dt_b + 1e-12
                        {
                            worst = worst
                                .max(self.matrix[[self.basis.col(rsp, rt), self.basis.col(csp, ct)]].norm());
                        }
                    }
                }
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Spectral norm by power iteration on MᴴM (deterministic start).
pub fn operator_norm(m: &Array2<C64>) -> f64 {
    let n = m.shape()[1];
    let rows = m.shape()[0];
    if n == 0 || rows == 0 {
        return 0.0;
    }
    let mut v: Vec<C64> = (0..n)
        .map(|i| C64::new(1.0 + (i as f64 * 0.7).sin() * 0.1, 0.0))
        .collect();
    let norm = |v: &[C64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let nv = norm(&v);
    v.iter_mut().for_each(|z| *z /= nv);
    let mut lambda = 0.0;
    for _ in 0..60 {
        // w = Mᴴ (M v)
        let mut mv = vec![C64::new(0.0, 0.0); rows];
        for r in 0..rows {
            let mut s = C64::new(0.0, 0.0);
            for c in 0..n {
                s += m[[r, c]] * v[c];
            }
            mv[r] = s;
        }
        let mut w = vec![C64::new(0.0, 0.0); n];
        for c in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for r in 0..rows {
                s += m[[r, c]].conj() * mv[r];
            }
            w[c] = s;
        }
        let nw = norm(&w);
        if nw == 0.0 {
            return 0.0;
        }
        let new_lambda = nw;
        w.iter_mut().for_each(|z| *z /= nw);
        v = w;
        if (new_lambda - lambda).abs() <= 1e-12 * new_lambda.max(1.0) {
            lambda = new_lambda;
            break;
        }
        lambda = new_lambda;
    }
    lambda.sqrt()
}

/// Relative operator-norm difference ‖a − b‖ / ‖a‖ on the common basis.
pub fn relative_difference(a: &DtnMap, b: &DtnMap) -> Result<f64> {
    if a.matrix.shape() != b.matrix.shape() {
        return Err(LabError::Config("D-to-N maps have different basis sizes".into()));
    }
    if a.convention != b.convention {
        return Err(LabError::Config("D-to-N maps use different conventions".into()));
    }
    let diff = &a.matrix - &b.matrix;
    Ok(operator_norm(&diff) / operator_norm(&a.matrix))
}

const MAGIC: &[u8; 4] = b"DTN1";

/// Write the little-endian binary format: magic, dim u16, convention u8,
/// n_space u32, n_time u32, hash[32], time centers, space nodes (as u64),
/// dt_b, dspace, then the matrix row-major as (re, im) f64 pairs.
pub fn write_dtn(map: &DtnMap, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(MAGIC)?;
    f.write_all(&(map.dim as u16).to_le_bytes())?;
    f.write_all(&[map.convention.byte()])?;
    f.write_all(&(map.basis.n_space() as u32).to_le_bytes())?;
    f.write_all(&(map.basis.n_time() as u32).to_le_bytes())?;
    f.write_all(&map.provenance)?;
    for &t in &map.basis.time_centers {
        f.write_all(&t.to_le_bytes())?;
    }
    for &s in &map.basis.space_nodes {
        f.write_all(&(s as u64).to_le_bytes())?;
    }
    f.write_all(&map.basis.dt_b.to_le_bytes())?;
    f.write_all(&map.basis.dspace.to_le_bytes())?;
    for z in map.matrix.iter() {
        f.write_all(&z.re.to_le_bytes())?;
        f.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_dtn(path: &Path) -> Result<DtnMap> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 4];
    f.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(LabError::DtnFormat("bad magic".into()));
    }
    let mut b2 = [0u8; 2];
    f.read_exact(&mut b2)?;
    let dim = u16::from_le_bytes(b2) as usize;
    let mut b1 = [0u8; 1];
    f.read_exact(&mut b1)?;
    let convention = DtnConvention::from_byte(b1[0])?;
    let mut b4 = [0u8; 4];
    f.read_exact(&mut b4)?;
    let n_space = u32::from_le_bytes(b4) as usize;
    f.read_exact(&mut b4)?;
    let n_time = u32::from_le_bytes(b4) as usize;
    let mut provenance = [0u8; 32];
    f.read_exact(&mut provenance)?;
    let mut b8 = [0u8; 8];
    let mut time_centers = Vec::with_capacity(n_time);
    for _ in 0..n_time {
        f.read_exact(&mut b8)?;
        time_centers.push(f64::from_le_bytes(b8));
    }
    let mut space_nodes = Vec::with_capacity(n_space);
    for _ in 0..n_space {
        f.read_exact(&mut b8)?;
        space_nodes.push(u64::from_le_bytes(b8) as usize);
    }
    f.read_exact(&mut b8)?;
    let dt_b = f64::from_le_bytes(b8);
    f.read_exact(&mut b8)?;
    let dspace = f64::from_le_bytes(b8);
    let n = n_space * n_time;
    let mut matrix = Array2::zeros((n, n));
    for r in 0..n {
        for c in 0..n {
            f.read_exact(&mut b8)?;
            let re = f64::from_le_bytes(b8);
            f.read_exact(&mut b8)?;
            let im = f64::from_le_bytes(b8);
            matrix[[r, c]] = C64::new(re, im);
        }
    }
    // trailing data is a format error
    let mut one = [0u8; 1];
    if f.read(&mut one)? != 0 {
        return Err(LabError::DtnFormat("trailing bytes".into()));
    }
    Ok(DtnMap {
        convention,
        dim,
        basis: DtnBasis {
            dim,
            time_centers,
            dt_b,
            space_nodes,
            dspace,
        },
        matrix,
        provenance,
    })
}

/// CSV export for small maps: one row per matrix row, complex entries as
/// re+imj pairs.
pub fn export_csv(map: &DtnMap, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "# dtn convention={:?} dim={}", map.convention, map.dim)?;
    writeln!(f, "# provenance={}", hex32(&map.provenance))?;
    let n = map.basis.len();
    for r in 0..n {
        let parts: Vec<String> = (0..n)
            .map(|c| {
                let z = map.matrix[[r, c]];
                format!("{}{}{}j", z.re, if z.im >= 0.0 { "+" } else { "" }, z.im)
            })
            .collect();
        writeln!(f, "{}", parts.join(","))?;
    }
    Ok(())
}

pub fn hex32(bytes: &[u8; 32]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operator_norm_matches_known_matrix() {
        // [[3, 0], [0, 4i]] has spectral norm 4
        let mut m = Array2::zeros((2, 2));
        m[[0, 0]] = C64::new(3.0, 0.0);
        m[[1, 1]] = C64::new(0.0, 4.0);
        assert!((operator_norm(&m) - 4.0).abs() < 1e-9);
    }

    #[test]
    fn file_round_trip() {
        let basis = DtnBasis {
            dim: 1,
            time_centers: vec![0.5, 1.0, 1.5],
            dt_b: 0.5,
            space_nodes: vec![0],
            dspace: 1.0,
        };
        let mut matrix = Array2::zeros((3, 3));
        for r in 0..3 {
            for c in 0..3 {
                matrix[[r, c]] = C64::new(r as f64 + 0.25, c as f64 - 1.5);
            }
        }
        let map = DtnMap {
            convention: DtnConvention::InteriorNormalReduced,
            dim: 1,
            basis,
            matrix,
            provenance: [7u8; 32],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.dtn");
        write_dtn(&map, &path).unwrap();
        let back = read_dtn(&path).unwrap();
        assert_eq!(back.convention, map.convention);
        assert_eq!(back.provenance, map.provenance);
        assert_eq!(back.basis.time_centers, map.basis.time_centers);
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(back.matrix[[r, c]], map.matrix[[r, c]]);
            }
        }
    }

    #[test]
    fn malformed_file_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.dtn");
        std::fs::write(&path, b"NOTD").unwrap();
        assert!(read_dtn(&path).is_err());
    }
}
