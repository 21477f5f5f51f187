use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Domain;

/// Marks a stencil leg that ends on the boundary.
pub const NO_NODE: u32 = u32::MAX;
/// Arms shorter than this fraction of the mesh size are lengthened to it,
/// with the boundary value taken at the lengthened end.
pub const MIN_ARM: f64 = 1e-4;
/// Cells required across the slab diameter.
pub const MIN_CELLS_ACROSS: f64 = 8.0;
const ARM_TOL: f64 = 1e-12;

/// Uniform Cartesian lattice over the bounding box of a domain, padded by
/// one cell, with the nodes strictly inside the domain numbered in
/// lexicographic lattice order (last axis fastest).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    domain: Domain,
    mesh_size: f64,
    dim: usize,
    /// Coordinates of lattice index 0 on each axis.
    origin: Vec<f64>,
    shape: Vec<usize>,
    /// Lattice index of each node, row major.
    lattice: Vec<u64>,
    coords: Vec<f64>,
    /// Per node and leg (axis a, side s) at slot 2a+s with s = 0 for −e_a:
    /// neighbouring node or NO_NODE.
    neighbors: Vec<u32>,
    /// Fractional leg lengths in (0, 1]; 1 for legs to another node.
    arms: Vec<f64>,
}

impl Grid {
    pub fn new(domain: &Domain, mesh_size: f64) -> Result<Self> {
        let required = domain.slab_diameter() / MIN_CELLS_ACROSS;
        if !(mesh_size > 0.0 && mesh_size.is_finite()) || mesh_size > required * (1.0 + 1e-12) {
            return Err(Error::MeshTooCoarse {
                mesh_size,
                required,
            });
        }
        let h = mesh_size;
        let dim = domain.dim();
        let (lo, hi) = domain.bounding_box();
        let origin: Vec<f64> = lo.iter().map(|l| l - h).collect();
        let shape: Vec<usize> = lo
            .iter()
            .zip(&hi)
            .map(|(l, u)| ((u - l) / h).ceil() as usize + 3)
            .collect();
        let total: u64 = shape.iter().map(|&s| s as u64).product();
        let coord = |axis: usize, i: usize| lo[axis] + (i as f64 - 1.0) * h;

        let mut lattice = Vec::new();
        let mut coords = Vec::new();
        let mut idx = vec![0usize; dim];
        let mut x = vec![0.0; dim];
        for linear in 0..total {
            for a in 0..dim {
                x[a] = coord(a, idx[a]);
            }
            if domain.signed_distance(&x) < 0.0 {
                lattice.push(linear);
                coords.extend_from_slice(&x);
            }
            // advance the odometer, last axis fastest
            for a in (0..dim).rev() {
                idx[a] += 1;
                if idx[a] < shape[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        if lattice.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "no lattice point of spacing {h} lies inside the domain"
            )));
        }

        let mut strides = vec![1u64; dim];
        for a in (0..dim.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * shape[a + 1] as u64;
        }
        let count = lattice.len();
        let mut neighbors = vec![NO_NODE; 2 * dim * count];
        let mut arms = vec![1.0; 2 * dim * count];
        for i in 0..count {
            let p = &coords[i * dim..(i + 1) * dim];
            for a in 0..dim {
                for (s, sign) in [(0usize, -1.0), (1, 1.0)] {
                    let slot = (2 * dim) * i + 2 * a + s;
                    let target = if s == 0 {
                        lattice[i] - strides[a]
                    } else {
                        lattice[i] + strides[a]
                    };
                    if let Ok(j) = lattice.binary_search(&target) {
                        neighbors[slot] = j as u32;
                    } else {
                        arms[slot] = boundary_arm(domain, p, a, sign, h);
                    }
                }
            }
        }
        Ok(Self {
            domain: domain.clone(),
            mesh_size: h,
            dim,
            origin,
            shape,
            lattice,
            coords,
            neighbors,
            arms,
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn mesh_size(&self) -> f64 {
        self.mesh_size
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.lattice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lattice.is_empty()
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn lattice_index(&self, i: usize) -> u64 {
        self.lattice[i]
    }

    /// Lattice coordinates of node i.
    pub fn lattice_coords(&self, i: usize) -> Vec<usize> {
        let mut rest = self.lattice[i];
        let mut out = vec![0; self.dim];
        for a in (0..self.dim).rev() {
            out[a] = (rest % self.shape[a] as u64) as usize;
            rest /= self.shape[a] as u64;
        }
        out
    }

    /// Node at a lattice index, if it is interior.
    pub fn node_at(&self, lattice: u64) -> Option<usize> {
        self.lattice.binary_search(&lattice).ok()
    }

    pub fn neighbor(&self, i: usize, axis: usize, side: usize) -> Option<usize> {
        let n = self.neighbors[(2 * self.dim) * i + 2 * axis + side];
        (n != NO_NODE).then_some(n as usize)
    }

    /// Fractional length of a stencil leg, 1 unless it ends on the boundary.
    pub fn arm(&self, i: usize, axis: usize, side: usize) -> f64 {
        self.arms[(2 * self.dim) * i + 2 * axis + side]
    }

    /// End point of a boundary leg.
    pub fn arm_point(&self, i: usize, axis: usize, side: usize) -> Vec<f64> {
        let mut p = self.point(i).to_vec();
        let sign = if side == 0 { -1.0 } else { 1.0 };
        p[axis] += sign * self.arm(i, axis, side) * self.mesh_size;
        p
    }

    pub fn is_near_boundary(&self, i: usize) -> bool {
        self.neighbors[(2 * self.dim) * i..(2 * self.dim) * (i + 1)].contains(&NO_NODE)
    }

    pub fn boundary_leg_count(&self) -> usize {
        self.neighbors.iter().filter(|&&n| n == NO_NODE).count()
    }

    /// Volume weight hⁿ of one node.
    pub fn cell_volume(&self) -> f64 {
        self.mesh_size.powi(self.dim as i32)
    }

    pub(crate) fn neighbors_raw(&self) -> &[u32] {
        &self.neighbors
    }

    pub(crate) fn arms_raw(&self) -> &[f64] {
        &self.arms
    }

    /// The same lattice pattern on the dilated domain d·Ω with spacing d·h.
    /// Requires the origin to be interior, like [`Domain::scale`].
    pub fn scaled(&self, d: f64) -> Result<Self> {
        let domain = self.domain.scale(d)?;
        Ok(Self {
            domain,
            mesh_size: self.mesh_size * d,
            dim: self.dim,
            origin: self.origin.iter().map(|x| x * d).collect(),
            shape: self.shape.clone(),
            lattice: self.lattice.clone(),
            coords: self.coords.iter().map(|x| x * d).collect(),
            neighbors: self.neighbors.clone(),
            arms: self.arms.clone(),
        })
    }
}

/// Fraction θ of the leg from p in direction sign·e_axis at which the signed
/// distance changes sign, by bisection.
fn boundary_arm(domain: &Domain, p: &[f64], axis: usize, sign: f64, h: f64) -> f64 {
    let mut q = p.to_vec();
    let mut phi = |t: f64| {
        q[axis] = p[axis] + sign * t * h;
        domain.signed_distance(&q)
    };
    if phi(1.0) == 0.0 {
        return 1.0;
    }
    let (mut a, mut b) = (0.0, 1.0);
    while b - a > ARM_TOL {
        let m = 0.5 * (a + b);
        if phi(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    (0.5 * (a + b)).max(MIN_ARM)
}
