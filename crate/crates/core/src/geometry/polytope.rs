use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::linalg;
use crate::error::{Error, Result};

const NORMAL_TOL: f64 = 1e-12;

/// The half-space `normal · x <= offset` with a unit normal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Self {
        Self { normal, offset }
    }

    fn excess(&self, x: &[f64]) -> f64 {
        super::dot(&self.normal, x) - self.offset
    }
}

/// Bounded intersection of half-spaces with nonempty interior. Vertices and
/// edges are enumerated once at construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolytopeSpec", into = "PolytopeSpec")]
pub struct Polytope {
    halfspaces: Vec<Halfspace>,
    vertices: Vec<Vec<f64>>,
    edges: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct PolytopeSpec {
    halfspaces: Vec<Halfspace>,
}

impl TryFrom<PolytopeSpec> for Polytope {
    type Error = Error;
    fn try_from(s: PolytopeSpec) -> Result<Self> {
        Polytope::new(s.halfspaces)
    }
}

impl From<Polytope> for PolytopeSpec {
    fn from(p: Polytope) -> Self {
        PolytopeSpec {
            halfspaces: p.halfspaces,
        }
    }
}

impl Polytope {
    pub fn new(halfspaces: Vec<Halfspace>) -> Result<Self> {
        let dim = halfspaces
            .first()
            .map(|h| h.normal.len())
            .ok_or_else(|| Error::InvalidDomain("polytope without half-spaces".into()))?;
        for (i, h) in halfspaces.iter().enumerate() {
            if h.normal.len() != dim {
                return Err(Error::InvalidDomain(format!(
                    "half-space {i} has dimension {}, expected {dim}",
                    h.normal.len()
                )));
            }
            if !h.offset.is_finite() || h.normal.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidDomain(format!(
                    "half-space {i} is not finite"
                )));
            }
            let n = super::norm(&h.normal);
            if (n - 1.0).abs() > NORMAL_TOL {
                return Err(Error::InvalidDomain(format!(
                    "half-space {i} normal has length {n}, expected 1"
                )));
            }
        }
        let scale = halfspaces
            .iter()
            .map(|h| h.offset.abs())
            .fold(1.0f64, f64::max);
        check_bounded(&halfspaces, dim)?;
        let (vertices, active) = enumerate_vertices(&halfspaces, dim, scale)?;

        // The centroid of all vertices of a full-dimensional polytope is an
        // interior point; for a flat one some constraint is tight there.
        let centroid: Vec<f64> = (0..dim)
            .map(|k| vertices.iter().map(|v| v[k]).sum::<f64>() / vertices.len() as f64)
            .collect();
        let slack = halfspaces
            .iter()
            .map(|h| h.excess(&centroid))
            .fold(f64::NEG_INFINITY, f64::max);
        if slack > -1e-9 * scale {
            return Err(Error::InvalidDomain(format!(
                "polytope has empty interior (vertex centroid slack {slack:e})"
            )));
        }

        let mut edges = Vec::new();
        for i in 0..vertices.len() {
            for j in (i + 1)..vertices.len() {
                let shared = active[i].iter().filter(|a| active[j].contains(a)).count();
                if shared >= dim - 1 {
                    edges.push((i, j));
                }
            }
        }
        Ok(Self {
            halfspaces,
            vertices,
            edges,
        })
    }

    pub fn dim(&self) -> usize {
        self.halfspaces[0].normal.len()
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub(crate) fn edge_directions(&self) -> Vec<Vec<f64>> {
        self.edges
            .iter()
            .map(|&(i, j)| {
                self.vertices[j]
                    .iter()
                    .zip(&self.vertices[i])
                    .map(|(a, b)| a - b)
                    .collect()
            })
            .collect()
    }

    pub(crate) fn max_affine(&self, x: &[f64]) -> f64 {
        self.halfspaces
            .iter()
            .map(|h| h.excess(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub(crate) fn support(&self, u: &[f64]) -> f64 {
        self.vertices
            .iter()
            .map(|v| super::dot(u, v))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub(crate) fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let dim = self.dim();
        let lo = (0..dim)
            .map(|k| {
                self.vertices
                    .iter()
                    .map(|v| v[k])
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let hi = (0..dim)
            .map(|k| {
                self.vertices
                    .iter()
                    .map(|v| v[k])
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        (lo, hi)
    }

    pub(crate) fn vertex_diameter(&self) -> f64 {
        self.vertices
            .iter()
            .tuple_combinations()
            .map(|(a, b)| super::dist(a, b))
            .fold(0.0, f64::max)
    }

    pub(crate) fn scaled(&self, d: f64) -> Self {
        Self {
            halfspaces: self
                .halfspaces
                .iter()
                .map(|h| Halfspace::new(h.normal.clone(), h.offset * d))
                .collect(),
            vertices: self
                .vertices
                .iter()
                .map(|v| v.iter().map(|x| x * d).collect())
                .collect(),
            edges: self.edges.clone(),
        }
    }
}

/// The recession cone {d : N d <= 0} must be trivial. With rank(N) = n the
/// cone is pointed, so it is nontrivial iff it has an extreme ray, and every
/// extreme ray spans the null space of n-1 independent rows of N.
fn check_bounded(hs: &[Halfspace], dim: usize) -> Result<()> {
    let normals: Vec<Vec<f64>> = hs.iter().map(|h| h.normal.clone()).collect();
    if linalg::rank(&normals, 1e-10) < dim {
        // a lineality direction: anything orthogonal to all normals
        let direction = (0..dim)
            .map(|k| {
                let mut e = vec![0.0; dim];
                e[k] = 1.0;
                e
            })
            .find(|e| normals.iter().all(|n| super::dot(n, e).abs() < 1e-10))
            .unwrap_or_default();
        return Err(Error::UnboundedPolytope { direction });
    }
    for combo in (0..hs.len()).combinations(dim - 1) {
        let rows: Vec<Vec<f64>> = combo.iter().map(|&i| normals[i].clone()).collect();
        let Some(ray) = linalg::null_vector(&rows) else {
            continue;
        };
        for sign in [1.0, -1.0] {
            let d: Vec<f64> = ray.iter().map(|x| sign * x).collect();
            if normals.iter().all(|n| super::dot(n, &d) <= 1e-12) {
                return Err(Error::UnboundedPolytope { direction: d });
            }
        }
    }
    Ok(())
}

type Vertices = (Vec<Vec<f64>>, Vec<Vec<usize>>);

fn enumerate_vertices(hs: &[Halfspace], dim: usize, scale: f64) -> Result<Vertices> {
    let feas_tol = 1e-9 * scale;
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    for combo in (0..hs.len()).combinations(dim) {
        let m: Vec<Vec<f64>> = combo.iter().map(|&i| hs[i].normal.clone()).collect();
        let rhs: Vec<f64> = combo.iter().map(|&i| hs[i].offset).collect();
        let Some(x) = linalg::solve(&m, &rhs, 1e-12) else {
            continue;
        };
        if hs.iter().all(|h| h.excess(&x) <= feas_tol)
            && !vertices.iter().any(|v| super::dist(v, &x) <= feas_tol)
        {
            vertices.push(x);
        }
    }
    if vertices.len() < dim + 1 {
        return Err(Error::VertexEnumeration(format!(
            "found {} vertices, a full-dimensional polytope in R^{dim} needs at least {}",
            vertices.len(),
            dim + 1
        )));
    }
    let active = vertices
        .iter()
        .map(|v| {
            (0..hs.len())
                .filter(|&i| hs[i].excess(v).abs() <= feas_tol)
                .collect()
        })
        .collect();
    Ok((vertices, active))
}
