//! Constant-curvature deformation of a dilated domain.
//!
//! Solve on d·Ω with R ≡ λ, S ≡ 0 and zero boundary data, then pull the
//! solution back to Ω by f̃(x) = f(d·x). Since Δf̃(x) = d²Δf(dx) and
//! |∇f̃|² = d²|∇f|², the pulled-back field solves the same equation on Ω
//! with curvature d²λ, and its residual is d² times the residual on d·Ω.
//! The report also evaluates the residual at the curvature λ/d², the value
//! obtained by scaling in the opposite direction, so the two readings can be
//! compared.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{finish, iterate, Coefficients, GradientCoefficient, RunOptions, Solution};
use crate::error::{Error, Result};
use crate::geometry::{check_admissibility, CertificateReport, Domain, Regime};
use crate::poisson::{BoundaryValue, Grid, ScalarField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeformReport {
    pub scale: f64,
    /// λ, the curvature solved for on d·Ω.
    pub curvature: f64,
    /// d²λ: the curvature the pulled-back field satisfies on Ω.
    pub pulled_back_curvature: f64,
    /// λ/d².
    pub inverse_scaled_curvature: f64,
    /// Residual of the solution on d·Ω.
    pub scaled_residual: f64,
    /// Residual of f̃ on Ω at curvature d²λ.
    pub pulled_back_residual: f64,
    /// Residual of f̃ on Ω at curvature λ/d².
    pub inverse_scaled_residual: f64,
    /// pulled_back_residual / scaled_residual (d² in exact arithmetic).
    pub residual_scale_factor: Option<f64>,
}

/// Largest d' <= d_max for which d'·Ω is admissible with Λ = |λ|, γ = 0, by
/// bisection on the monotone certificate.
pub fn largest_admissible_scale(base: &Domain, d_max: f64, lambda: f64) -> Result<Option<f64>> {
    let passes = |d: f64| -> Result<bool> {
        Ok(check_admissibility(&base.scale(d)?, lambda.abs(), 0.0, Regime::Direct)?.passed)
    };
    if passes(d_max)? {
        return Ok(Some(d_max));
    }
    let mut lo = d_max;
    // find some admissible scale first
    for _ in 0..60 {
        lo *= 0.5;
        if passes(lo)? {
            break;
        }
    }
    if !passes(lo)? {
        return Ok(None);
    }
    let mut hi = if lo * 2.0 < d_max { lo * 2.0 } else { d_max };
    while (hi - lo) > 1e-6 * hi {
        let m = 0.5 * (lo + hi);
        if passes(m)? {
            lo = m;
        } else {
            hi = m;
        }
    }
    Ok(Some(lo))
}

/// Runs the deformation with the lattice of spacing `opts.mesh_size` laid
/// over Ω and dilated with it, so nodes of Ω and d·Ω correspond one to one.
/// Returns the solution on d·Ω, the pulled-back field on Ω, and the report.
pub fn constant_curvature_deform(
    base: &Domain,
    d: f64,
    lambda: f64,
    kappa: GradientCoefficient,
    opts: &RunOptions,
) -> Result<(Solution, ScalarField, DeformReport)> {
    let scaled_domain = base.scale(d)?;
    let certificate: CertificateReport =
        check_admissibility(&scaled_domain, lambda.abs(), 0.0, Regime::Direct)?;
    if !certificate.passed && !opts.override_certificate {
        return Err(Error::DeformNotAdmissible {
            scale: d,
            suggested: largest_admissible_scale(base, d, lambda)?,
        });
    }
    let base_grid = Arc::new(Grid::new(base, opts.mesh_size)?);
    let grid = Arc::new(base_grid.scaled(d)?);
    let n = base.dim();
    let coefficients = Coefficients::constant(&grid, lambda, 0.0, kappa.value(n));
    let iterated = iterate(&grid, &coefficients, &certificate, opts)?;
    let f = iterated.v.clone();
    let solution = finish(iterated, f, &coefficients, certificate)?;

    let pulled = ScalarField::new(
        base_grid.clone(),
        solution.f.values().to_vec(),
        BoundaryValue::zero(),
    )?;
    let at =
        |curv: f64| Coefficients::constant(&base_grid, curv, 0.0, kappa.value(n)).residual(&pulled);
    let pulled_back_curvature = d * d * lambda;
    let inverse_scaled_curvature = lambda / (d * d);
    let pulled_back_residual = at(pulled_back_curvature);
    let report = DeformReport {
        scale: d,
        curvature: lambda,
        pulled_back_curvature,
        inverse_scaled_curvature,
        scaled_residual: solution.residual,
        pulled_back_residual,
        inverse_scaled_residual: at(inverse_scaled_curvature),
        residual_scale_factor: (solution.residual > 0.0)
            .then(|| pulled_back_residual / solution.residual),
    };
    Ok((solution, pulled, report))
}
