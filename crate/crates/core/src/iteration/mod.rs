//! Picard iteration for the gradient-form problem
//!
//! ```text
//! Δf = −[R e^{2f} + κ|∇f|²] / (2(n−1)) + S   in Ω,   f = 0 on ∂Ω
//! ```
//!
//! with κ = (n−1)(n−2) by default. Each step freezes the right-hand side at
//! the previous iterate and solves one Dirichlet Poisson problem.

mod deform;
mod standard;

pub use deform::{constant_curvature_deform, largest_admissible_scale, DeformReport};
pub use standard::{
    alternative_standard_residual, standard_form_check, standard_residual, to_standard_form,
    StandardFormCheck,
};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{check_admissibility, CertificateReport, Domain, Regime, RESCALED_R_BOUND};
use crate::poisson::{apply_laplacian, solve_dirichlet, BoundaryValue, Grid, ScalarField};

/// Slack on the uniform gradient bound: K + GRADIENT_SLACK + 10·h.
pub const GRADIENT_SLACK: f64 = 0.05;
/// The final nonlinear residual must be below this multiple of `tol`.
pub const RESIDUAL_FACTOR: f64 = 10.0;
/// Iterates whose gradient exceeds this are treated as divergent.
const BLOWUP: f64 = 1e8;

/// Coefficient κ of |∇f|² inside the bracket.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientCoefficient {
    /// κ = (n−1)(n−2), the value for which the limit is the conformal
    /// factor of a metric with scalar curvature R.
    #[default]
    Conformal,
    /// κ = 1.
    Unit,
}

impl GradientCoefficient {
    pub fn value(self, n: usize) -> f64 {
        match self {
            GradientCoefficient::Conformal => ((n - 1) * (n - 2)) as f64,
            GradientCoefficient::Unit => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub domain: Domain,
    pub r: Expr,
    pub s: Expr,
    /// Certified bound on sup|R|.
    pub r_bound: f64,
    /// Certified bound on sup|S|.
    pub s_bound: f64,
    /// Constant Dirichlet value c.
    pub boundary_value: f64,
    /// Constant curvature λ for the shifted and deformation pipelines.
    pub curvature: Option<f64>,
    pub gradient_coefficient: GradientCoefficient,
}

impl ProblemSpec {
    pub fn new(domain: Domain, r: Expr, s: Expr, r_bound: f64, s_bound: f64) -> Self {
        Self {
            domain,
            r,
            s,
            r_bound,
            s_bound,
            boundary_value: 0.0,
            curvature: None,
            gradient_coefficient: GradientCoefficient::default(),
        }
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn kappa(&self) -> f64 {
        self.gradient_coefficient.value(self.dim())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub mesh_size: f64,
    /// Stop once ‖∇(f_k − f_{k−1})‖ <= tol.
    pub tol: f64,
    pub max_iter: usize,
    /// Run even when the certificate fails; the result is labelled
    /// uncertified.
    pub override_certificate: bool,
}

impl RunOptions {
    pub fn new(mesh_size: f64) -> Self {
        Self {
            mesh_size,
            tol: 1e-9,
            max_iter: 200,
            override_certificate: false,
        }
    }
}

/// R and S sampled at the grid nodes, plus the data that enter the
/// right-hand side.
#[derive(Clone, Debug)]
pub struct Coefficients {
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    pub kappa: f64,
    pub dim: usize,
}

impl Coefficients {
    pub fn sample(grid: &Grid, r: &Expr, s: &Expr, kappa: f64) -> Self {
        let sample = |e: &Expr| (0..grid.len()).map(|i| e.eval(grid.point(i))).collect();
        Self {
            r: sample(r),
            s: sample(s),
            kappa,
            dim: grid.dim(),
        }
    }

    pub fn constant(grid: &Grid, r: f64, s: f64, kappa: f64) -> Self {
        Self {
            r: vec![r; grid.len()],
            s: vec![s; grid.len()],
            kappa,
            dim: grid.dim(),
        }
    }

    /// Fails when a sampled value exceeds its certified bound.
    pub fn check_bounds(&self, r_bound: f64, s_bound: f64) -> Result<()> {
        let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (name, sampled, bound) in [("R", sup(&self.r), r_bound), ("S", sup(&self.s), s_bound)] {
            if !sampled.is_finite() || sampled > bound * (1.0 + 1e-12) {
                return Err(Error::CoefficientBound {
                    name,
                    sampled,
                    bound,
                });
            }
        }
        Ok(())
    }

    /// −[R e^{2f} + κ|∇f|²]/(2(n−1)) + S at every node.
    pub fn right_hand_side(&self, f: &ScalarField) -> Vec<f64> {
        let grad = f.gradient();
        let m = 2.0 * (self.dim as f64 - 1.0);
        grad.magnitudes()
            .iter()
            .zip(f.values())
            .enumerate()
            .map(|(i, (g, v))| -(self.r[i] * (2.0 * v).exp() + self.kappa * g * g) / m + self.s[i])
            .collect()
    }

    /// sup |Δ_h f + [R e^{2f} + κ|∇_h f|²]/(2(n−1)) − S|.
    pub fn residual(&self, f: &ScalarField) -> f64 {
        let lap = apply_laplacian(f);
        let rhs = self.right_hand_side(f);
        lap.iter()
            .zip(&rhs)
            .fold(0.0, |m, (l, r)| m.max((l - r).abs()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIterations,
    /// Successive differences fell below tol but the nonlinear residual did
    /// not.
    ResidualTooLarge,
    Diverged,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub k: usize,
    /// ‖∇f_k‖_∞
    pub sup_grad: f64,
    /// ‖∇(f_k − f_{k−1})‖_{L²}
    pub diff_h10: f64,
    /// diff_h10 at k over diff_h10 at k − 1, from k = 2.
    pub ratio: Option<f64>,
    /// Nonlinear residual at f_k.
    pub residual: f64,
    /// ‖f_k − f_{k−1}‖_{L²} / ‖∇(f_k − f_{k−1})‖_{L²}.
    pub poincare_ratio: Option<f64>,
    pub solver_iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub steps: Vec<TraceStep>,
    pub stop_reason: StopReason,
}

impl IterationTrace {
    pub fn max_sup_grad(&self) -> f64 {
        self.steps.iter().fold(0.0, |m, s| m.max(s.sup_grad))
    }

    /// Largest ratio over steps k >= `from`.
    pub fn max_ratio_from(&self, from: usize) -> Option<f64> {
        self.steps
            .iter()
            .filter(|s| s.k >= from)
            .filter_map(|s| s.ratio)
            .reduce(f64::max)
    }

    pub fn max_poincare_ratio(&self) -> Option<f64> {
        self.steps
            .iter()
            .filter_map(|s| s.poincare_ratio)
            .reduce(f64::max)
    }

    pub fn final_residual(&self) -> f64 {
        self.steps.last().map_or(f64::NAN, |s| s.residual)
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    /// Gradient-form solution.
    pub f: ScalarField,
    /// Conformal factor e^{(n−2)f/2}.
    pub u: ScalarField,
    pub certificate: CertificateReport,
    pub certified: bool,
    pub trace: IterationTrace,
    pub converged: bool,
    /// K + slack, when the certificate passed and K exists.
    pub gradient_bound: Option<f64>,
    /// Steps whose sup-gradient exceeded `gradient_bound`.
    pub gradient_bound_violations: Vec<usize>,
    /// Contraction constant at the computed K (K = 1 if there is none).
    pub contraction_q: f64,
    pub residual: f64,
    pub standard: StandardFormCheck,
    pub min_u: f64,
}

/// Output of the iteration on a zero-boundary problem.
pub(crate) struct Iterated {
    pub v: ScalarField,
    pub trace: IterationTrace,
    pub converged: bool,
    pub gradient_bound: Option<f64>,
    pub gradient_bound_violations: Vec<usize>,
}

/// One step: solves Δf_{k+1} = rhs(f_k) with zero boundary data, warm
/// started from f_k.
pub fn picard_step(f_k: &ScalarField, coefficients: &Coefficients) -> Result<ScalarField> {
    Ok(picard_step_counted(f_k, coefficients)?.0)
}

fn picard_step_counted(f_k: &ScalarField, c: &Coefficients) -> Result<(ScalarField, usize)> {
    let rhs = c.right_hand_side(f_k);
    if rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "right-hand side is not finite".into(),
        ));
    }
    let (f, stats) = solve_dirichlet(f_k.grid(), &rhs, &BoundaryValue::zero(), Some(f_k.values()))?;
    Ok((f, stats.iterations))
}

pub(crate) fn iterate(
    grid: &Arc<Grid>,
    coefficients: &Coefficients,
    certificate: &CertificateReport,
    opts: &RunOptions,
) -> Result<Iterated> {
    let gradient_bound = if certificate.passed {
        certificate
            .k()
            .map(|k| k + GRADIENT_SLACK + 10.0 * grid.mesh_size())
    } else {
        None
    };
    let mut prev = ScalarField::zeros(grid.clone());
    let mut steps: Vec<TraceStep> = Vec::new();
    let mut stop_reason = StopReason::MaxIterations;
    for k in 1..=opts.max_iter {
        let (next, solver_iterations) = match picard_step_counted(&prev, coefficients) {
            Ok(r) => r,
            Err(Error::InvalidArgument(_)) | Err(Error::SolverDiverged { .. }) => {
                stop_reason = StopReason::Diverged;
                break;
            }
            Err(e) => return Err(e),
        };
        let diff = next.difference(&prev)?;
        let diff_grad = diff.gradient();
        let diff_h10 = diff_grad.l2_norm();
        let diff_l2 = diff.l2_norm();
        let sup_grad = next.gradient().sup_norm();
        let ratio = steps
            .last()
            .filter(|_| k >= 2)
            .map(|s| diff_h10 / s.diff_h10);
        let poincare_ratio = (diff_h10 > 0.0).then(|| diff_l2 / diff_h10);
        let residual = coefficients.residual(&next);
        steps.push(TraceStep {
            k,
            sup_grad,
            diff_h10,
            ratio,
            residual,
            poincare_ratio,
            solver_iterations,
        });
        prev = next;
        if !sup_grad.is_finite() || sup_grad > BLOWUP {
            stop_reason = StopReason::Diverged;
            break;
        }
        if diff_h10 <= opts.tol {
            stop_reason = if residual <= RESIDUAL_FACTOR * opts.tol {
                StopReason::Converged
            } else {
                StopReason::ResidualTooLarge
            };
            break;
        }
    }
    let gradient_bound_violations = match gradient_bound {
        Some(b) => steps
            .iter()
            .filter(|s| s.sup_grad > b)
            .map(|s| s.k)
            .collect(),
        None => Vec::new(),
    };
    Ok(Iterated {
        v: prev,
        converged: stop_reason == StopReason::Converged,
        trace: IterationTrace { steps, stop_reason },
        gradient_bound,
        gradient_bound_violations,
    })
}

fn require_certificate(report: &CertificateReport, opts: &RunOptions) -> Result<()> {
    if report.passed || opts.override_certificate {
        Ok(())
    } else {
        Err(Error::CertificateFailed(Box::new(report.clone())))
    }
}

fn finish(
    iterated: Iterated,
    f: ScalarField,
    coefficients: &Coefficients,
    certificate: CertificateReport,
) -> Result<Solution> {
    let n = f.grid().dim();
    let u = to_standard_form(&f, n)?;
    let residual = coefficients.residual(&f);
    let standard = standard_form_check(&f, &u, coefficients);
    let min_u = u.min();
    let contraction_q = certificate
        .contraction_q_at_k
        .unwrap_or(certificate.contraction_q);
    Ok(Solution {
        certified: certificate.passed,
        certificate,
        f,
        u,
        trace: iterated.trace,
        converged: iterated.converged,
        gradient_bound: iterated.gradient_bound,
        gradient_bound_violations: iterated.gradient_bound_violations,
        contraction_q,
        residual,
        standard,
        min_u,
    })
}

/// Iterates from f₀ = 0 with zero boundary data. The certificate is checked
/// in the direct regime with the problem's bounds.
pub fn run_iteration(spec: &ProblemSpec, opts: &RunOptions) -> Result<Solution> {
    if spec.boundary_value != 0.0 {
        return Err(Error::InvalidArgument(
            "nonzero boundary data goes through solve_shifted".into(),
        ));
    }
    let certificate =
        check_admissibility(&spec.domain, spec.r_bound, spec.s_bound, Regime::Direct)?;
    require_certificate(&certificate, opts)?;
    let grid = Arc::new(Grid::new(&spec.domain, opts.mesh_size)?);
    let coefficients = Coefficients::sample(&grid, &spec.r, &spec.s, spec.kappa());
    coefficients.check_bounds(spec.r_bound, spec.s_bound)?;
    let iterated = iterate(&grid, &coefficients, &certificate, opts)?;
    let f = iterated.v.clone();
    finish(iterated, f, &coefficients, certificate)
}

/// Constant curvature λ with boundary value c: iterates on v = f − c, whose
/// equation has curvature λe^{2c} and zero boundary data, then shifts back.
/// Requires |λ|e^{2c} <= 1/4 and certifies in the rescaled regime, which
/// does not depend on c.
pub fn solve_shifted(spec: &ProblemSpec, opts: &RunOptions) -> Result<Solution> {
    let lambda = spec.curvature.ok_or_else(|| {
        Error::InvalidArgument("the shifted problem needs a curvature value".into())
    })?;
    let c = spec.boundary_value;
    let effective = lambda * (2.0 * c).exp();
    if !(effective.abs() <= RESCALED_R_BOUND * (1.0 + 1e-12)) {
        return Err(Error::RescalingBound {
            value: effective.abs(),
            limit: RESCALED_R_BOUND * (-2.0 * c).exp(),
        });
    }
    let certificate = check_admissibility(
        &spec.domain,
        RESCALED_R_BOUND,
        spec.s_bound,
        Regime::Rescaled,
    )?;
    require_certificate(&certificate, opts)?;
    let grid = Arc::new(Grid::new(&spec.domain, opts.mesh_size)?);
    let kappa = spec.kappa();
    let mut shifted = Coefficients::sample(&grid, &spec.r, &spec.s, kappa);
    shifted.r = vec![effective; grid.len()];
    shifted.check_bounds(RESCALED_R_BOUND, spec.s_bound)?;
    let iterated = iterate(&grid, &shifted, &certificate, opts)?;
    // Equal to the residual of f = v + c against λ in exact arithmetic.
    // Evaluating it on f instead loses about |c|·ε/(h²·MIN_ARM) to
    // cancellation in the boundary rows.
    let residual = shifted.residual(&iterated.v);
    let f = iterated.v.map(|v| v + c)?;
    let mut original = shifted.clone();
    original.r = vec![lambda; grid.len()];
    let mut solution = finish(iterated, f, &original, certificate)?;
    solution.residual = residual;
    Ok(solution)
}

/// Nonlinear residual of a field against the problem's coefficients.
pub fn nonlinear_residual(f: &ScalarField, spec: &ProblemSpec) -> f64 {
    Coefficients::sample(f.grid(), &spec.r, &spec.s, spec.kappa()).residual(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball_spec(radius: f64, r: &str, s: &str, rb: f64, sb: f64) -> ProblemSpec {
        ProblemSpec::new(
            Domain::centered_ball(3, radius).unwrap(),
            r.parse().unwrap(),
            s.parse().unwrap(),
            rb,
            sb,
        )
    }

    #[test]
    fn zero_problem_converges_immediately() {
        let spec = ball_spec(0.05, "0", "0", 0.0, 0.0);
        let sol = run_iteration(&spec, &RunOptions::new(0.05 / 8.0)).unwrap();
        assert!(sol.converged);
        assert_eq!(sol.trace.steps.len(), 1);
        assert_eq!(sol.f.sup_norm(), 0.0);
        assert_eq!(sol.residual, 0.0);
        assert!(sol.u.values().iter().all(|&u| u == 1.0));
    }

    #[test]
    fn first_step_with_constant_source() {
        let d = 0.05;
        let spec = ball_spec(d, "0", "2", 0.0, 2.0);
        let grid = Arc::new(Grid::new(&spec.domain, d / 16.0).unwrap());
        let c = Coefficients::sample(&grid, &spec.r, &spec.s, spec.kappa());
        let f1 = picard_step(&ScalarField::zeros(grid.clone()), &c).unwrap();
        let err = (0..grid.len())
            .map(|i| {
                let p = grid.point(i);
                let x2: f64 = p.iter().map(|x| x * x).sum();
                (f1.values()[i] - 2.0 * (x2 - d * d) / 6.0).abs()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-3 * d * d, "{err}");
    }

    #[test]
    fn constant_solution_has_zero_residual() {
        // f ≡ 0 solves the problem with S = R/(2(n−1))
        let spec = ball_spec(0.05, "0.8", "0.2", 0.8, 0.2);
        let grid = Arc::new(Grid::new(&spec.domain, 0.05 / 8.0).unwrap());
        let zero = ScalarField::zeros(grid);
        assert!(nonlinear_residual(&zero, &spec) < 1e-15);
    }

    #[test]
    fn certificate_failure_is_an_error_unless_overridden() {
        let spec = ball_spec(0.6, "1", "0", 1.0, 0.0);
        let opts = RunOptions::new(0.6 / 8.0);
        assert!(matches!(
            run_iteration(&spec, &opts),
            Err(Error::CertificateFailed(_))
        ));
        let forced = RunOptions {
            override_certificate: true,
            ..opts
        };
        let sol = run_iteration(&spec, &forced).unwrap();
        assert!(!sol.certified);
        assert!(sol.gradient_bound.is_none());
    }

    #[test]
    fn coefficient_above_bound_is_rejected() {
        let spec = ball_spec(0.05, "2", "0", 1.0, 0.0);
        assert!(matches!(
            run_iteration(&spec, &RunOptions::new(0.05 / 8.0)),
            Err(Error::CoefficientBound { name: "R", .. })
        ));
    }

    #[test]
    fn shifted_rejects_large_curvature() {
        let mut spec = ball_spec(0.05, "0", "0", 0.0, 0.0);
        spec.boundary_value = 1.0;
        spec.curvature = Some(0.3 * (-2.0f64).exp());
        assert!(matches!(
            solve_shifted(&spec, &RunOptions::new(0.05 / 8.0)),
            Err(Error::RescalingBound { .. })
        ));
    }

    #[test]
    fn shifted_with_zero_curvature_is_constant() {
        let mut spec = ball_spec(0.05, "0", "0", 0.0, 0.0);
        spec.boundary_value = 2.5;
        spec.curvature = Some(0.0);
        let sol = solve_shifted(&spec, &RunOptions::new(0.05 / 8.0)).unwrap();
        assert!(sol.converged);
        assert!(sol.f.values().iter().all(|&v| v == 2.5));
    }
}
