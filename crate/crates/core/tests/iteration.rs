use std::sync::Arc;

use yamabe::expr::Expr;
use yamabe::geometry::Domain;
use yamabe::iteration::{
    constant_curvature_deform, nonlinear_residual, picard_step, run_iteration, solve_shifted,
    Coefficients, GradientCoefficient, ProblemSpec, RunOptions, StopReason, RESIDUAL_FACTOR,
};
use yamabe::poisson::{solve_dirichlet, BoundaryValue, Grid, ScalarField};
use yamabe::Error;

fn expr(s: &str) -> Expr {
    s.parse().unwrap()
}

fn small_ball(r: &str, s: &str) -> ProblemSpec {
    ProblemSpec::new(
        Domain::centered_ball(3, 0.05).unwrap(),
        expr(r),
        expr(s),
        1.0,
        1.0,
    )
}

#[test]
fn zero_data_gives_zero_solution() {
    let sol = run_iteration(&small_ball("0", "0"), &RunOptions::new(0.005)).unwrap();
    assert!(sol.converged);
    assert_eq!(sol.f.sup_norm(), 0.0);
    assert!(sol.u.values().iter().all(|&v| v == 1.0));
}

#[test]
fn first_step_is_a_poisson_solve() {
    let spec = small_ball("1 - 100*z*z", "x*10");
    let grid = Arc::new(Grid::new(&spec.domain, 0.005).unwrap());
    let c = Coefficients::sample(&grid, &spec.r, &spec.s, spec.kappa());
    let f1 = picard_step(&ScalarField::zeros(grid.clone()), &c).unwrap();
    // at f = 0: Δf = −R/(2(n−1)) + S
    let src: Vec<f64> = (0..grid.len()).map(|i| -c.r[i] / 4.0 + c.s[i]).collect();
    let (direct, _) = solve_dirichlet(&grid, &src, &BoundaryValue::zero(), None).unwrap();
    assert!(f1.difference(&direct).unwrap().sup_norm() <= 1e-8 * direct.sup_norm());
}

#[test]
fn certified_run_respects_its_guarantees() {
    let spec = small_ball("1 - 100*z*z", "-cos(10*x)");
    let opts = RunOptions::new(0.005);
    let sol = run_iteration(&spec, &opts).unwrap();
    assert!(sol.certified && sol.converged);
    assert_eq!(sol.trace.stop_reason, StopReason::Converged);
    assert!(sol.residual <= RESIDUAL_FACTOR * opts.tol);
    let bound = sol.gradient_bound.unwrap();
    assert!(sol.trace.max_sup_grad() <= bound);
    assert!(sol.gradient_bound_violations.is_empty());
    assert!(sol.trace.max_ratio_from(2).unwrap() <= sol.contraction_q);
    assert!(sol.min_u > 0.0);
    for (f, u) in sol.f.values().iter().zip(sol.u.values()) {
        assert!((u - (0.5 * f).exp()).abs() <= 1e-15 * u);
    }
    assert!(sol.standard.residual <= sol.standard.predicted_bound * (1.0 + 1e-9));
    assert!((nonlinear_residual(&sol.f, &spec) - sol.residual).abs() < 1e-15);
}

#[test]
fn runs_are_bit_reproducible() {
    let spec = small_ball("1 - 100*z*z", "sin(40*y)");
    let a = run_iteration(&spec, &RunOptions::new(0.004)).unwrap();
    let b = run_iteration(&spec, &RunOptions::new(0.004)).unwrap();
    assert_eq!(a.f.values(), b.f.values());
    assert_eq!(a.trace, b.trace);
}

#[test]
fn unit_coefficient_also_converges() {
    let mut spec = small_ball("1", "1");
    spec.gradient_coefficient = GradientCoefficient::Unit;
    assert_eq!(spec.kappa(), 1.0);
    let sol = run_iteration(&spec, &RunOptions::new(0.005)).unwrap();
    assert!(sol.converged);
}

#[test]
fn failed_certificate_stops_unless_overridden() {
    let mut spec = small_ball("1", "1");
    spec.domain = Domain::centered_ball(3, 2.0).unwrap();
    let err = run_iteration(&spec, &RunOptions::new(0.1)).unwrap_err();
    assert!(matches!(err, Error::CertificateFailed(_)));
    let mut opts = RunOptions::new(0.1);
    opts.override_certificate = true;
    opts.max_iter = 3;
    let sol = run_iteration(&spec, &opts).unwrap();
    assert!(!sol.certified);
    assert!(sol.gradient_bound.is_none());
}

#[test]
fn coefficients_above_their_bounds_are_rejected() {
    let spec = small_ball("2", "0");
    assert!(matches!(
        run_iteration(&spec, &RunOptions::new(0.005)),
        Err(Error::CoefficientBound { .. })
    ));
}

#[test]
fn nonzero_boundary_needs_the_shifted_pipeline() {
    let mut spec = small_ball("0", "0");
    spec.boundary_value = 1.0;
    assert!(run_iteration(&spec, &RunOptions::new(0.005)).is_err());
}

#[test]
fn flat_shifted_problem_is_the_constant() {
    let mut spec = small_ball("0", "0");
    spec.boundary_value = 0.7;
    spec.curvature = Some(0.0);
    let sol = solve_shifted(&spec, &RunOptions::new(0.005)).unwrap();
    assert!(sol.f.values().iter().all(|&v| v == 0.7));
    assert!(sol
        .u
        .values()
        .iter()
        .all(|&v| (v - 0.35f64.exp()).abs() < 1e-15));
}

#[test]
fn shifted_solution_keeps_its_boundary_value() {
    let mut spec = small_ball("0", "0");
    spec.boundary_value = 2.0;
    spec.curvature = Some(0.25 * (-4.0f64).exp());
    let sol = solve_shifted(&spec, &RunOptions::new(0.005)).unwrap();
    assert!(sol.converged);
    assert!(sol.residual < 1e-8);
    // positive curvature makes f superharmonic, so it sits above its boundary value
    assert!(sol.f.values().iter().all(|&v| (2.0..2.01).contains(&v)));
}

#[test]
fn shifted_curvature_above_the_rescaling_bound_is_rejected() {
    let mut spec = small_ball("0", "0");
    spec.boundary_value = 1.0;
    spec.curvature = Some(0.25);
    assert!(matches!(
        solve_shifted(&spec, &RunOptions::new(0.005)),
        Err(Error::RescalingBound { .. })
    ));
}

#[test]
fn deformation_pullback_carries_scaled_curvature() {
    let base = Domain::centered_ball(3, 1.0).unwrap();
    let (sol, pulled, rep) = constant_curvature_deform(
        &base,
        0.05,
        0.01,
        GradientCoefficient::Conformal,
        &RunOptions::new(1.0 / 8.0),
    )
    .unwrap();
    assert!(sol.converged);
    assert_eq!(pulled.values(), sol.f.values());
    assert!((rep.pulled_back_curvature - 0.05 * 0.05 * 0.01).abs() < 1e-18);
    assert!(rep.pulled_back_residual < 1e-10);
    assert!(rep.inverse_scaled_residual > 1e3 * rep.pulled_back_residual);
}
