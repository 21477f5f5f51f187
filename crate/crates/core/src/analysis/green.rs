//! Dirichlet Green's function of the ball and the integral of its gradient.
//!
//! Convention: −Δ_y G(x, ·) = δ_x, G = 0 on the sphere, so that
//! G(x, y) = Φ(|x − y|) − Φ(s) with Φ(ρ) = ρ^{2−n}/((n−2)σ_n) and, for the
//! ball of radius r, s = (|x|²|y|²/r² − 2x·y + r²)^{1/2}.

use std::cell::Cell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::majorant::evans_bound;
use super::quadrature::{adaptive, DEFAULT_MAX_INTERVALS};
use crate::error::{Error, Result};
use crate::geometry::{unit_sphere_area, OMEGA3};

pub const MIN_DIM: usize = 3;
pub const MAX_DIM: usize = 8;
/// Default relative tolerance of the gradient-integral quadrature.
pub const DEFAULT_TOLERANCE: f64 = 1e-4;
/// Radial positions sampled in [0, RADIAL_MAX] before refinement.
pub const RADIAL_SAMPLES: usize = 33;
pub const RADIAL_MAX: f64 = 0.99;

fn check_dim(n: usize) -> Result<()> {
    if (MIN_DIM..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "ball Green's function is implemented for {MIN_DIM} <= n <= {MAX_DIM}, got n = {n}"
        )))
    }
}

fn check_points(n: usize, radius: f64, x: &[f64], y: &[f64]) -> Result<()> {
    check_dim(n)?;
    if x.len() != n || y.len() != n {
        return Err(Error::InvalidArgument(format!(
            "points must have {n} coordinates, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let nx = crate::geometry::norm(x) / radius;
    if nx >= 1.0 {
        return Err(Error::OutsideUnitBall(nx));
    }
    // y may sit on the sphere, where G vanishes
    let ny = crate::geometry::norm(y) / radius;
    if ny > 1.0 {
        return Err(Error::OutsideUnitBall(ny));
    }
    if crate::geometry::dist(x, y) == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    Ok(())
}

fn fundamental(n: usize, rho: f64) -> f64 {
    rho.powi(2 - n as i32) / ((n as f64 - 2.0) * unit_sphere_area(n))
}

fn image_distance(radius: f64, x: &[f64], y: &[f64]) -> f64 {
    let (xx, yy, xy) = (dot(x, x), dot(y, y), dot(x, y));
    (xx * yy / (radius * radius) - 2.0 * xy + radius * radius)
        .max(0.0)
        .sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    crate::geometry::dot(a, b)
}

/// Green's function of the unit ball in Rⁿ.
pub fn ball_green_function(n: usize, x: &[f64], y: &[f64]) -> Result<f64> {
    check_points(n, 1.0, x, y)?;
    radius_green_function(1.0, x, y)
}

/// ∇_x G(x, y) for the unit ball.
pub fn ball_green_gradient(n: usize, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    check_points(n, 1.0, x, y)?;
    Ok(gradient_unchecked(1.0, x, y))
}

/// Green's function of the ball of radius `radius` centred at the origin,
/// from the image construction at that radius (not from rescaling).
pub fn radius_green_function(radius: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len();
    check_points(n, radius, x, y)?;
    let r = crate::geometry::dist(x, y);
    Ok(fundamental(n, r) - fundamental(n, image_distance(radius, x, y)))
}

pub fn radius_green_gradient(radius: f64, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    check_points(x.len(), radius, x, y)?;
    Ok(gradient_unchecked(radius, x, y))
}

fn gradient_unchecked(radius: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let sigma = unit_sphere_area(n);
    let r = crate::geometry::dist(x, y);
    let s = image_distance(radius, x, y);
    let yy = dot(y, y) / (radius * radius);
    let (rn, sn) = (r.powi(n as i32), s.powi(n as i32));
    (0..n)
        .map(|k| (-(x[k] - y[k]) / rn + (yy * x[k] - y[k]) / sn) / sigma)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientIntegral {
    pub value: f64,
    /// Sum of the outer and inner quadrature error estimates.
    pub error: f64,
}

/// Integrand ρ^{n−1}|∇_x G| in polar coordinates about x = rx·e_n, where
/// y = x + ρω and ω makes the angle θ with e_n. Multiplying by ρ^{n−1}
/// cancels the singularity: the direct term becomes ω/σ_n.
fn axisymmetric_integrand(n: usize, radius: f64, rx: f64, rho: f64, theta: f64) -> f64 {
    let sigma = unit_sphere_area(n);
    let (st, ct) = theta.sin_cos();
    // plane spanned by e_1 (first component) and e_n (second)
    let y = [rho * st, rx + rho * ct];
    let yy = (y[0] * y[0] + y[1] * y[1]) / (radius * radius);
    let xy = rx * y[1];
    let s2 = rx * rx * yy - 2.0 * xy + radius * radius;
    let s = s2.max(0.0).sqrt();
    let w = rho.powi(n as i32 - 1) / s.powi(n as i32);
    let gx = st + w * (-y[0]);
    let gz = ct + w * (yy * rx - y[1]);
    (gx * gx + gz * gz).sqrt() / sigma
}

fn max_radius_along(radius: f64, rx: f64, ct: f64) -> f64 {
    // |x + ρω| = radius
    let b = rx * ct;
    (-b + (b * b + radius * radius - rx * rx).max(0.0).sqrt()).max(0.0)
}

/// ∫_{B_r} |∇_x G_r(x, y)| dy for |x| = rx, by the polar reduction about x.
pub fn radius_gradient_integral(
    n: usize,
    radius: f64,
    rx: f64,
    tol: f64,
) -> Result<GradientIntegral> {
    check_dim(n)?;
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "radius must be positive, got {radius}"
        )));
    }
    if !(0.0..radius).contains(&rx) {
        return Err(Error::OutsideUnitBall(rx / radius));
    }
    let inner_failed = Cell::new(false);
    let inner_err = Cell::new(0.0f64);
    let ring = unit_sphere_area(n - 1);
    let outer = adaptive(
        |theta: f64| {
            let ct = theta.cos();
            let top = max_radius_along(radius, rx, ct);
            let r = adaptive(
                |rho| axisymmetric_integrand(n, radius, rx, rho, theta),
                0.0,
                top,
                0.1 * tol,
                1e-14,
                DEFAULT_MAX_INTERVALS,
            );
            if !r.converged {
                inner_failed.set(true);
            }
            let weight = ring * theta.sin().powi(n as i32 - 2);
            inner_err.set(inner_err.get().max(r.error * weight));
            weight * r.value
        },
        0.0,
        PI,
        tol,
        0.0,
        DEFAULT_MAX_INTERVALS,
    );
    let error = outer.error + PI * inner_err.get();
    if !outer.converged || inner_failed.get() || error > tol * outer.value {
        return Err(Error::Quadrature {
            achieved: error / outer.value,
            requested: tol,
        });
    }
    Ok(GradientIntegral {
        value: outer.value,
        error,
    })
}

/// ∫_{B₁} |∇_x G(x, y)| dy. By rotation invariance only |x| enters.
pub fn green_gradient_integral(n: usize, x: &[f64], tol: f64) -> Result<GradientIntegral> {
    if x.len() != n {
        return Err(Error::InvalidArgument(format!(
            "point must have {n} coordinates, got {}",
            x.len()
        )));
    }
    radius_gradient_integral(n, 1.0, crate::geometry::norm(x), tol)
}

/// Same integral in R³ without the axisymmetric reduction: a triple nested
/// quadrature over spherical coordinates about x in the fixed frame. Much
/// slower; used to cross-check rotation invariance.
pub fn green_gradient_integral_3d(x: &[f64; 3], tol: f64) -> Result<f64> {
    let nx = crate::geometry::norm(x);
    if nx >= 1.0 {
        return Err(Error::OutsideUnitBall(nx));
    }
    let failed = Cell::new(false);
    let sigma = 4.0 * PI;
    let outer = adaptive(
        |theta: f64| {
            let (st, ct) = theta.sin_cos();
            let mid = adaptive(
                |phi: f64| {
                    let (sp, cp) = phi.sin_cos();
                    let w = [st * cp, st * sp, ct];
                    // |x + ρw| = 1
                    let b = dot(x, &w);
                    let top = (-b + (b * b + 1.0 - dot(x, x)).sqrt()).max(0.0);
                    let r = adaptive(
                        |rho: f64| {
                            let y = [x[0] + rho * w[0], x[1] + rho * w[1], x[2] + rho * w[2]];
                            let s = image_distance(1.0, x, &y);
                            let yy = dot(&y, &y);
                            let scale = rho * rho / (s * s * s);
                            let g: Vec<f64> =
                                (0..3).map(|k| w[k] + scale * (yy * x[k] - y[k])).collect();
                            crate::geometry::norm(&g) / sigma
                        },
                        0.0,
                        top,
                        0.01 * tol,
                        1e-14,
                        DEFAULT_MAX_INTERVALS,
                    );
                    if !r.converged {
                        failed.set(true);
                    }
                    r.value
                },
                0.0,
                2.0 * PI,
                0.1 * tol,
                1e-14,
                DEFAULT_MAX_INTERVALS,
            );
            if !mid.converged {
                failed.set(true);
            }
            st * mid.value
        },
        0.0,
        PI,
        tol,
        0.0,
        DEFAULT_MAX_INTERVALS,
    );
    if !outer.converged || failed.get() {
        return Err(Error::Quadrature {
            achieved: outer.error / outer.value,
            requested: tol,
        });
    }
    Ok(outer.value)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialSample {
    pub radius: f64,
    pub value: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenEstimate {
    pub dim: usize,
    /// sup over |x| < 1 of the gradient integral.
    pub constant: f64,
    pub argmax: f64,
    /// The convex-domain bound at the volume of the unit ball; n = 3 only.
    pub evans_bound: Option<f64>,
    pub tolerance: f64,
    pub samples: Vec<RadialSample>,
}

/// Radial scan of the gradient integral over |x| ∈ [0, 0.99], refined by
/// golden-section search around the best sample.
pub fn estimate_ball_green_constant(n: usize, tol: f64) -> Result<GreenEstimate> {
    check_dim(n)?;
    let eval = |r: f64| {
        radius_gradient_integral(n, 1.0, r, tol).map(|g| RadialSample {
            radius: r,
            value: g.value,
            error: g.error,
        })
    };
    let mut samples: Vec<RadialSample> = (0..RADIAL_SAMPLES)
        .into_par_iter()
        .map(|i| eval(RADIAL_MAX * i as f64 / (RADIAL_SAMPLES - 1) as f64))
        .collect::<Result<_>>()?;
    let best = (0..samples.len())
        .max_by(|&a, &b| samples[a].value.total_cmp(&samples[b].value))
        .expect("scan is nonempty");
    let mut lo = samples[best.saturating_sub(1)].radius;
    let mut hi = samples[(best + 1).min(samples.len() - 1)].radius;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (eval(c)?, eval(d)?);
    while hi - lo > 1e-6 {
        if fc.value >= fd.value {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = eval(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = eval(d)?;
        }
    }
    samples.push(fc);
    samples.push(fd);
    samples.sort_by(|a, b| a.radius.total_cmp(&b.radius));
    let top = samples
        .iter()
        .max_by(|a, b| a.value.total_cmp(&b.value))
        .copied()
        .expect("nonempty");
    Ok(GreenEstimate {
        dim: n,
        constant: top.value,
        argmax: top.radius,
        evans_bound: (n == 3).then(|| evans_bound(OMEGA3)),
        tolerance: tol,
        samples,
    })
}

/// The ball constant C_n at the default tolerance, computed once per
/// dimension.
pub fn ball_green_constant(n: usize) -> Result<f64> {
    static CACHE: OnceLock<Mutex<HashMap<usize, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(&c) = cache.lock().expect("cache poisoned").get(&n) {
        return Ok(c);
    }
    let c = estimate_ball_green_constant(n, DEFAULT_TOLERANCE)?.constant;
    cache.lock().expect("cache poisoned").insert(n, c);
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn center_value_and_boundary_zero() {
        let y = [0.3, -0.2, 0.1];
        let g = ball_green_function(3, &[0.0; 3], &y).unwrap();
        let ny = crate::geometry::norm(&y);
        assert!((g - (1.0 / ny - 1.0) / (4.0 * PI)).abs() < 1e-15);
        let x = [0.2, 0.1, -0.4];
        let on_sphere = [0.6, 0.0, 0.8];
        assert!(ball_green_function(3, &x, &on_sphere).unwrap().abs() < 1e-15);
        let on_sphere5 = [0.0, 0.6, 0.0, 0.0, 0.8];
        let x5 = [0.1, 0.1, 0.1, 0.1, 0.1];
        assert!(ball_green_function(5, &x5, &on_sphere5).unwrap().abs() < 1e-14);
    }

    #[test]
    fn symmetric_in_its_arguments() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 3..=6 {
            for _ in 0..20 {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.4..0.4)).collect();
                let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.4..0.4)).collect();
                let a = ball_green_function(n, &x, &y).unwrap();
                let b = ball_green_function(n, &y, &x).unwrap();
                assert!((a - b).abs() < 1e-12 * a.abs());
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let x = [0.2, -0.1, 0.3, 0.05];
        let y = [-0.3, 0.4, 0.1, -0.2];
        let g = ball_green_gradient(4, &x, &y).unwrap();
        for k in 0..4 {
            let h = 1e-6;
            let (mut xp, mut xm) = (x, x);
            xp[k] += h;
            xm[k] -= h;
            let fd = (ball_green_function(4, &xp, &y).unwrap()
                - ball_green_function(4, &xm, &y).unwrap())
                / (2.0 * h);
            assert!(
                (fd - g[k]).abs() < 1e-7 * g[k].abs().max(1.0),
                "{k}: {fd} {}",
                g[k]
            );
        }
    }

    #[test]
    fn radius_form_matches_scaling() {
        let r = 0.3;
        let x = [0.05, 0.1, -0.02];
        let y = [-0.1, 0.07, 0.15];
        let direct = radius_green_function(r, &x, &y).unwrap();
        let xs: Vec<f64> = x.iter().map(|v| v / r).collect();
        let ys: Vec<f64> = y.iter().map(|v| v / r).collect();
        let scaled = ball_green_function(3, &xs, &ys).unwrap() / r;
        assert!((direct - scaled).abs() < 1e-12 * direct.abs());
    }

    #[test]
    fn rejects_bad_points() {
        assert!(matches!(
            ball_green_function(3, &[0.1; 3], &[0.1; 3]),
            Err(Error::CoincidentPoints)
        ));
        assert!(matches!(
            ball_green_function(3, &[1.0, 0.0, 0.0], &[0.0; 3]),
            Err(Error::OutsideUnitBall(_))
        ));
        assert!(ball_green_function(2, &[0.0; 2], &[0.1; 2]).is_err());
    }

    #[test]
    fn center_integral_closed_form() {
        // at x = 0 the integral is n/(n+1)
        for n in 3..=8 {
            let v = green_gradient_integral(n, &vec![0.0; n], 1e-8)
                .unwrap()
                .value;
            let exact = n as f64 / (n as f64 + 1.0);
            assert!((v - exact).abs() < 1e-8, "n={n}: {v}");
        }
    }

    #[test]
    fn center_integral_monte_carlo() {
        // Polar sampling about x = 0 keeps the estimator bounded.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let samples = 1_000_000;
        let mut acc = 0.0;
        for _ in 0..samples {
            let rho: f64 = rng.gen();
            let z: f64 = rng.gen_range(-1.0..1.0);
            let phi: f64 = rng.gen_range(0.0..2.0 * PI);
            let s = (1.0 - z * z).sqrt();
            let y = [rho * s * phi.cos(), rho * s * phi.sin(), rho * z];
            if rho == 0.0 {
                continue;
            }
            let g = ball_green_gradient(3, &[0.0; 3], &y).unwrap();
            acc += crate::geometry::norm(&g) * rho * rho * 4.0 * PI;
        }
        let mc = acc / samples as f64;
        let quad = green_gradient_integral(3, &[0.0; 3], 1e-6).unwrap().value;
        assert!((mc - quad).abs() < 2e-3, "{mc} vs {quad}");
    }

    #[test]
    fn integral_decreases_towards_the_sphere() {
        let values: Vec<f64> = [0.0, 0.3, 0.6, 0.9, 0.99]
            .iter()
            .map(|&r| radius_gradient_integral(3, 1.0, r, 1e-6).unwrap().value)
            .collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
        assert!(values[4].is_finite() && values[4] > 0.0);
    }

    #[test]
    fn direct_3d_agrees_with_reduction() {
        let x = [0.3, -0.2, 0.25];
        let direct = green_gradient_integral_3d(&x, 1e-5).unwrap();
        let reduced = green_gradient_integral(3, &x, 1e-7).unwrap().value;
        assert!(
            (direct - reduced).abs() < 1e-4 * reduced,
            "{direct} {reduced}"
        );
    }
}
