use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{same_grid, BoundaryValue, Grid, ScalarField};
use crate::error::{Error, Result};

/// Relative ℓ² residual at which conjugate gradients stops.
pub const SOLVER_REL_TOL: f64 = 1e-10;
/// Sup-norm residual target relative to the source.
const SUP_REL_TOL: f64 = 1e-9;
/// Chunk length for parallel loops. Reductions sum per-chunk partials in
/// chunk order, so results do not depend on the number of threads.
const CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
    pub sup_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let partial: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .collect();
    partial.into_iter().sum()
}

fn sup(a: &[f64]) -> f64 {
    a.par_chunks(CHUNK)
        .map(|c| c.iter().fold(0.0f64, |m, v| m.max(v.abs())))
        .reduce(|| 0.0, f64::max)
}

/// Positive definite operator A = −L restricted to the interior unknowns.
struct Operator<'a> {
    grid: &'a Grid,
    diag: Vec<f64>,
    inv_h2: f64,
}

impl<'a> Operator<'a> {
    fn new(grid: &'a Grid) -> Self {
        let legs = 2 * grid.dim();
        let inv_h2 = 1.0 / (grid.mesh_size() * grid.mesh_size());
        let diag = grid
            .arms_raw()
            .chunks(legs)
            .map(|arms| inv_h2 * arms.iter().map(|t| 1.0 / t).sum::<f64>())
            .collect();
        Self { grid, diag, inv_h2 }
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let legs = 2 * self.grid.dim();
        let nbrs = self.grid.neighbors_raw();
        out.par_chunks_mut(CHUNK)
            .enumerate()
            .for_each(|(c, chunk)| {
                for (k, o) in chunk.iter_mut().enumerate() {
                    let i = c * CHUNK + k;
                    let mut off = 0.0;
                    for &j in &nbrs[i * legs..(i + 1) * legs] {
                        if j != super::NO_NODE {
                            off += x[j as usize];
                        }
                    }
                    *o = self.diag[i] * x[i] - self.inv_h2 * off;
                }
            });
    }

    /// Σ over boundary legs of g(arm end)/(h·θh).
    fn boundary_load(&self, boundary: &BoundaryValue) -> Vec<f64> {
        let g = self.grid;
        let n = g.dim();
        (0..g.len())
            .into_par_iter()
            .map(|i| {
                let mut s = 0.0;
                for a in 0..n {
                    for side in 0..2 {
                        if g.neighbor(i, a, side).is_none() {
                            let v = boundary.eval(&g.arm_point(i, a, side));
                            if v != 0.0 {
                                s += v / g.arm(i, a, side);
                            }
                        }
                    }
                }
                s * self.inv_h2
            })
            .collect()
    }
}

/// Solves Δ_h u = source at the interior nodes with u = boundary on ∂Ω by
/// Jacobi-preconditioned conjugate gradients, starting from `initial` when
/// given.
pub fn solve_dirichlet(
    grid: &Arc<Grid>,
    source: &[f64],
    boundary: &BoundaryValue,
    initial: Option<&[f64]>,
) -> Result<(ScalarField, SolveStats)> {
    let n = grid.len();
    if source.len() != n || initial.is_some_and(|x| x.len() != n) {
        return Err(Error::GridMismatch);
    }
    let op = Operator::new(grid);
    let load = op.boundary_load(boundary);
    let b: Vec<f64> = source.iter().zip(&load).map(|(s, l)| l - s).collect();
    let b_norm = dot(&b, &b).sqrt();
    let sup_target = SUP_REL_TOL * sup(source) + 1e-13 * sup(&b);
    let mut x = initial.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        let field = ScalarField::new(grid.clone(), x, boundary.clone())?;
        return Ok((
            field,
            SolveStats {
                iterations: 0,
                relative_residual: 0.0,
                sup_residual: 0.0,
            },
        ));
    }

    let max_iter = 20 * n;
    let mut ax = vec![0.0; n];
    let residual = |x: &[f64], ax: &mut Vec<f64>| -> Vec<f64> {
        op.apply(x, ax);
        b.iter().zip(ax.iter()).map(|(b, a)| b - a).collect()
    };
    let mut r = residual(&x, &mut ax);
    let converged = |r: &[f64]| dot(r, r).sqrt() <= SOLVER_REL_TOL * b_norm && sup(r) <= sup_target;
    let mut z: Vec<f64> = r.iter().zip(&op.diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut it = 0;
    loop {
        if converged(&r) {
            // confirm against the true residual before accepting
            let true_r = residual(&x, &mut ax);
            if converged(&true_r) {
                r = true_r;
                break;
            }
            r = true_r;
            z = r.iter().zip(&op.diag).map(|(r, d)| r / d).collect();
            p.clone_from(&z);
            rz = dot(&r, &z);
        }
        if it >= max_iter {
            return Err(Error::SolverDiverged {
                iterations: it,
                residual: dot(&r, &r).sqrt() / b_norm,
            });
        }
        op.apply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        x.par_chunks_mut(CHUNK)
            .zip(r.par_chunks_mut(CHUNK))
            .zip(p.par_chunks(CHUNK).zip(ap.par_chunks(CHUNK)))
            .for_each(|((x, r), (p, ap))| {
                for k in 0..x.len() {
                    x[k] += alpha * p[k];
                    r[k] -= alpha * ap[k];
                }
            });
        z.par_chunks_mut(CHUNK)
            .zip(r.par_chunks(CHUNK).zip(op.diag.par_chunks(CHUNK)))
            .for_each(|(z, (r, d))| {
                for k in 0..z.len() {
                    z[k] = r[k] / d[k];
                }
            });
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.par_chunks_mut(CHUNK)
            .zip(z.par_chunks(CHUNK))
            .for_each(|(p, z)| {
                for k in 0..p.len() {
                    p[k] = z[k] + beta * p[k];
                }
            });
        it += 1;
    }
    let stats = SolveStats {
        iterations: it,
        relative_residual: dot(&r, &r).sqrt() / b_norm,
        sup_residual: sup(&r),
    };
    Ok((ScalarField::new(grid.clone(), x, boundary.clone())?, stats))
}

/// Δ_h u at every interior node, with the field's boundary trace.
pub fn apply_laplacian(u: &ScalarField) -> Vec<f64> {
    let grid = u.grid();
    let op = Operator::new(grid);
    let mut au = vec![0.0; grid.len()];
    op.apply(u.values(), &mut au);
    let load = op.boundary_load(u.boundary());
    load.iter().zip(&au).map(|(l, a)| l - a).collect()
}

/// sup |Δ_h u − source|.
pub fn laplacian_residual(u: &ScalarField, source: &ScalarField) -> Result<f64> {
    if !same_grid(u.grid(), source.grid()) {
        return Err(Error::GridMismatch);
    }
    Ok(apply_laplacian(u)
        .iter()
        .zip(source.values())
        .fold(0.0, |m, (l, s)| m.max((l - s).abs())))
}
