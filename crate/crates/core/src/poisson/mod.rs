//! Finite-difference Dirichlet Poisson solver on a uniform Cartesian grid
//! with an embedded boundary.
//!
//! Each interior node carries 2n legs. A leg either reaches the next lattice
//! node (length h) or stops where it crosses ∂Ω (length θh, θ ∈ (0, 1]),
//! and the boundary value is imposed there. The discrete Laplacian is
//!
//! ```text
//! (L u)_i = Σ_legs (u_leg − u_i) / (h · h_leg)
//! ```
//!
//! which is symmetric on the interior unknowns (every node-to-node leg has
//! weight 1/h²), negative definite, and an M-matrix. The boundary rows have an
//! O(1) truncation error but the solution error stays O(h²).

mod export;
mod grid;
mod solver;

pub use export::{format_f64, read_binary, write_binary, write_csv, GridMetadata};
pub use grid::{Grid, MIN_ARM, MIN_CELLS_ACROSS, NO_NODE};
pub use solver::{
    apply_laplacian, laplacian_residual, solve_dirichlet, SolveStats, SOLVER_REL_TOL,
};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;

/// Dirichlet data g on ∂Ω.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryValue {
    Constant(f64),
    Expr(Expr),
}

impl BoundaryValue {
    pub fn zero() -> Self {
        BoundaryValue::Constant(0.0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            BoundaryValue::Constant(c) => *c,
            BoundaryValue::Expr(e) => e.eval(x),
        }
    }
}

/// Values at the interior nodes of a grid plus the boundary trace.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Vec<f64>,
    boundary: BoundaryValue,
}

impl PartialEq for ScalarField {
    fn eq(&self, other: &Self) -> bool {
        same_grid(&self.grid, &other.grid)
            && self.values == other.values
            && self.boundary == other.boundary
    }
}

pub(crate) fn same_grid(a: &Arc<Grid>, b: &Arc<Grid>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl ScalarField {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>, boundary: BoundaryValue) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("field has non-finite values".into()));
        }
        Ok(Self {
            grid,
            values,
            boundary,
        })
    }

    pub fn constant(grid: Arc<Grid>, value: f64) -> Self {
        Self {
            values: vec![value; grid.len()],
            grid,
            boundary: BoundaryValue::Constant(value),
        }
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Samples f at every node; the boundary trace is `boundary`.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(&[f64]) -> f64, boundary: BoundaryValue) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self {
            grid,
            values,
            boundary,
        }
    }

    pub fn from_expr(grid: Arc<Grid>, e: &Expr) -> Self {
        Self::from_fn(grid, |x| e.eval(x), BoundaryValue::Expr(e.clone()))
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn boundary(&self) -> &BoundaryValue {
        &self.boundary
    }

    pub fn with_boundary(mut self, boundary: BoundaryValue) -> Self {
        self.boundary = boundary;
        self
    }

    /// Applies f to every node value and to the boundary trace; the trace
    /// must be constant.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let boundary = match &self.boundary {
            BoundaryValue::Constant(c) => BoundaryValue::Constant(f(*c)),
            BoundaryValue::Expr(e) => match e.constant_value() {
                Some(c) => BoundaryValue::Constant(f(c)),
                None => {
                    return Err(Error::InvalidArgument(
                        "cannot map a field with non-constant boundary data".into(),
                    ))
                }
            },
        };
        Ok(Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            boundary,
        })
    }

    /// self − other, with boundary trace the difference of constant traces
    /// (zero otherwise only when both traces are equal).
    pub fn difference(&self, other: &ScalarField) -> Result<Self> {
        if !same_grid(&self.grid, &other.grid) {
            return Err(Error::GridMismatch);
        }
        let boundary = match (&self.boundary, &other.boundary) {
            (BoundaryValue::Constant(a), BoundaryValue::Constant(b)) => {
                BoundaryValue::Constant(a - b)
            }
            (a, b) if a == b => BoundaryValue::zero(),
            _ => {
                return Err(Error::InvalidArgument(
                    "difference of fields with unrelated boundary data".into(),
                ))
            }
        };
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
            boundary,
        })
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Second-order gradient at every node. Along each axis the three-point
    /// formula on the (possibly unequal) legs; a leg that ends on ∂Ω uses the
    /// boundary value at the crossing.
    pub fn gradient(&self) -> VectorField {
        let g = &self.grid;
        let n = g.dim();
        let mut out = vec![0.0; n * g.len()];
        for i in 0..g.len() {
            let u0 = self.values[i];
            for a in 0..n {
                let (um, hm) = self.leg_value(i, a, 0);
                let (up, hp) = self.leg_value(i, a, 1);
                out[i * n + a] = -hp / (hm * (hm + hp)) * um
                    + (hp - hm) / (hm * hp) * u0
                    + hm / (hp * (hm + hp)) * up;
            }
        }
        VectorField {
            grid: g.clone(),
            values: out,
        }
    }

    /// Value at the end of a leg and the leg length.
    fn leg_value(&self, i: usize, axis: usize, side: usize) -> (f64, f64) {
        let g = &self.grid;
        match g.neighbor(i, axis, side) {
            Some(j) => (self.values[j], g.mesh_size()),
            None => (
                self.boundary.eval(&g.arm_point(i, axis, side)),
                g.arm(i, axis, side) * g.mesh_size(),
            ),
        }
    }

    pub fn norms(&self) -> Norms {
        Norms {
            sup: self.sup_norm(),
            l2: self.l2_norm(),
            h10: self.gradient().l2_norm(),
        }
    }
}

/// n components per interior node, node-major.
#[derive(Clone, Debug)]
pub struct VectorField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl VectorField {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, i: usize) -> &[f64] {
        let n = self.grid.dim();
        &self.values[i * n..(i + 1) * n]
    }

    /// Euclidean length at each node.
    pub fn magnitudes(&self) -> Vec<f64> {
        self.values
            .chunks(self.grid.dim())
            .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.magnitudes().into_iter().fold(0.0, f64::max)
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub sup: f64,
    pub l2: f64,
    /// L² norm of the discrete gradient.
    pub h10: f64,
}
