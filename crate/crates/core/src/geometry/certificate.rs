//! Admissibility certificate: checks the explicit size conditions under which
//! the Picard iteration is proven to stay bounded and contract.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Domain, GeometrySummary, DEFAULT_VOLUME_SEED};
use crate::analysis::green::ball_green_constant;
use crate::analysis::majorant::{
    contraction_constant, convex_gradient_constant, FixedPointResult, MajorantParams,
    SizeParameter, SLAB_FACTOR,
};
use crate::error::{Error, Result};

/// Coefficient bound used in the rescaled regime, where the boundary
/// constant has been absorbed into the curvature.
pub const RESCALED_R_BOUND: f64 = 0.25;

/// Which family of conditions to test. `Direct` takes the caller's bound on
/// R; `Rescaled` is the constant-curvature setting with |R| <= 1/4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Direct,
    Rescaled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clause {
    /// n = 3 convex: volume and slab diameter.
    ConvexVolume,
    /// n = 3 convex: diameter.
    ConvexDiameter,
    /// n >= 4 ball: radius.
    BallRadius,
    RescaledConvexVolume,
    RescaledConvexDiameter,
    RescaledBallRadius,
}

impl Clause {
    pub fn name(self) -> &'static str {
        match self {
            Clause::ConvexVolume => "convex_volume",
            Clause::ConvexDiameter => "convex_diameter",
            Clause::BallRadius => "ball_radius",
            Clause::RescaledConvexVolume => "rescaled_convex_volume",
            Clause::RescaledConvexDiameter => "rescaled_convex_diameter",
            Clause::RescaledBallRadius => "rescaled_ball_radius",
        }
    }

    pub fn regime(self) -> Regime {
        match self {
            Clause::ConvexVolume | Clause::ConvexDiameter | Clause::BallRadius => Regime::Direct,
            _ => Regime::Rescaled,
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One inequality `actual <= required`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub required: f64,
    pub actual: f64,
}

impl BoundCheck {
    pub fn holds(&self) -> bool {
        self.actual <= self.required
    }

    /// actual/required; above 1 means violated.
    pub fn ratio(&self) -> f64 {
        if self.required == f64::INFINITY {
            0.0
        } else {
            self.actual / self.required
        }
    }
}

/// Gradient-estimate constants. `ball` overrides the quadrature value of the
/// ball constant in dimension >= 4.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub convex: f64,
    pub ball: Option<f64>,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            convex: convex_gradient_constant(),
            ball: None,
        }
    }
}

impl Constants {
    fn ball_constant(&self, n: usize) -> Result<f64> {
        match self.ball {
            Some(c) => Ok(c),
            None => ball_green_constant(n),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClauseOutcome {
    pub clause: Clause,
    pub passed: bool,
    pub bounds: BTreeMap<String, BoundCheck>,
    pub majorant: MajorantParams,
}

impl ClauseOutcome {
    fn new(clause: Clause, bounds: Vec<(&str, BoundCheck)>, majorant: MajorantParams) -> Self {
        let bounds: BTreeMap<String, BoundCheck> = bounds
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        Self {
            clause,
            passed: bounds.values().all(BoundCheck::holds),
            bounds,
            majorant,
        }
    }

    pub fn violated(&self) -> Vec<String> {
        self.bounds
            .iter()
            .filter(|(_, b)| !b.holds())
            .map(|(k, _)| k.clone())
            .collect()
    }

    /// Largest actual/required ratio over the bounds.
    pub fn worst(&self) -> (String, f64) {
        self.bounds
            .iter()
            .map(|(k, b)| (k.clone(), b.ratio()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or_default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub regime: Regime,
    /// The first passing clause, or the one closest to passing.
    pub clause: Clause,
    pub passed: bool,
    pub bounds_evaluated: BTreeMap<String, BoundCheck>,
    pub violated: Vec<String>,
    /// Violated bound with the largest actual/required ratio.
    pub tightest_violation: Option<String>,
    pub dim: usize,
    pub domain_kind: String,
    pub r_bound: f64,
    pub s_bound: f64,
    pub geometry: GeometrySummary,
    pub volume_std_error: f64,
    pub volume_seed: Option<u64>,
    pub gradient_constant: f64,
    pub majorant: MajorantParams,
    /// Closed-form upper estimate of K for the reported clause.
    pub k_bound: f64,
    pub fixed_point: FixedPointResult,
    /// Contraction constant with K = 1 substituted.
    pub contraction_q: f64,
    /// Contraction constant at the computed K, when it exists.
    pub contraction_q_at_k: Option<f64>,
    /// Set for domains with corners, which the smooth-boundary hypothesis
    /// excludes.
    pub smoothness_relaxed: bool,
    pub clauses: Vec<ClauseOutcome>,
}

impl CertificateReport {
    pub fn outcome(&self, clause: Clause) -> Option<&ClauseOutcome> {
        self.clauses.iter().find(|c| c.clause == clause)
    }

    /// The computed K, if any.
    pub fn k(&self) -> Option<f64> {
        self.fixed_point.k
    }

    pub fn describe_failure(&self) -> String {
        if self.passed {
            return format!("clause {} passed", self.clause);
        }
        let parts: Vec<String> = self
            .violated
            .iter()
            .map(|name| {
                let b = &self.bounds_evaluated[name];
                format!("{name}: {:.6e} > {:.6e}", b.actual, b.required)
            })
            .collect();
        format!(
            "closest clause {} violates {}",
            self.clause,
            parts.join(", ")
        )
    }
}

fn over(numerator: f64, denominator: f64) -> f64 {
    if denominator == 0.0 {
        f64::INFINITY
    } else {
        numerator / denominator
    }
}

fn check(required: f64, actual: f64) -> BoundCheck {
    BoundCheck { required, actual }
}

pub fn check_admissibility(
    domain: &Domain,
    r_bound: f64,
    s_bound: f64,
    regime: Regime,
) -> Result<CertificateReport> {
    check_admissibility_with(domain, r_bound, s_bound, regime, &Constants::default())
}

/// Evaluates every clause that applies to the domain and returns the first
/// that passes, or the one closest to passing. In the rescaled regime
/// `r_bound` is ignored and 1/4 is used.
pub fn check_admissibility_with(
    domain: &Domain,
    r_bound: f64,
    s_bound: f64,
    regime: Regime,
    constants: &Constants,
) -> Result<CertificateReport> {
    for (name, v) in [("R bound", r_bound), ("S bound", s_bound)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "{name} must be finite and nonnegative, got {v}"
            )));
        }
    }
    let n = domain.dim();
    if n >= 4 && !domain.is_ball() {
        return Err(Error::Unsupported(format!(
            "in dimension {n} only balls are covered, got a {}",
            domain.kind_name()
        )));
    }
    let l = match regime {
        Regime::Direct => r_bound,
        Regime::Rescaled => RESCALED_R_BOUND,
    };
    let g = s_bound;
    let est = domain.volume_estimate(DEFAULT_VOLUME_SEED);
    let geometry = GeometrySummary {
        volume: est.value,
        volume_cbrt: (n == 3).then(|| est.value.cbrt()),
        slab_diameter: domain.slab_diameter(),
        diameter: domain.diameter(),
        omega3: super::OMEGA3,
    };
    let (v, delta, diam) = (geometry.volume, geometry.slab_diameter, geometry.diameter);

    let mut clauses = Vec::new();
    let gradient_constant;
    if n == 3 {
        let c = constants.convex;
        gradient_constant = c;
        let a = v.cbrt();
        let vol_major = MajorantParams {
            dim: n,
            r_bound: l,
            s_bound: g,
            size: SizeParameter::Volume(a),
            constant: c,
        };
        let diam_major = MajorantParams {
            size: SizeParameter::Diameter(diam),
            ..vol_major
        };
        match regime {
            Regime::Direct => {
                clauses.push(ClauseOutcome::new(
                    Clause::ConvexVolume,
                    vec![
                        ("volume_cap", check(1.0, v)),
                        (
                            "volume_gradient",
                            check(over(8.0, c * (4.0 * l + g)).powi(3), v),
                        ),
                        ("slab_cap", check(1.0, delta)),
                        ("slab_volume", check(SLAB_FACTOR * a, delta)),
                        ("slab_contraction", check(2.0 / (0.75 * l + 1.0), delta)),
                    ],
                    vol_major,
                ));
                clauses.push(ClauseOutcome::new(
                    Clause::ConvexDiameter,
                    vec![
                        ("diameter_cap", check(1.0, diam)),
                        (
                            "diameter_gradient",
                            check(over(4.0, c * (2.5 * l + g)), diam),
                        ),
                        (
                            "diameter_contraction",
                            check(4.0 / (1.5 * l + SQRT_2), diam),
                        ),
                    ],
                    diam_major,
                ));
            }
            Regime::Rescaled => {
                clauses.push(ClauseOutcome::new(
                    Clause::RescaledConvexVolume,
                    vec![
                        (
                            "volume_gradient",
                            check(over(8.0, c * (1.0 + g)).powi(3), v),
                        ),
                        ("slab_cap", check(1.0, delta)),
                        ("slab_volume", check(SLAB_FACTOR * a, delta)),
                    ],
                    vol_major,
                ));
                clauses.push(ClauseOutcome::new(
                    Clause::RescaledConvexDiameter,
                    vec![
                        ("diameter_cap", check(1.0, diam)),
                        ("diameter_gradient", check(over(4.0, c * (0.625 + g)), diam)),
                    ],
                    diam_major,
                ));
            }
        }
    } else {
        let c = constants.ball_constant(n)?;
        gradient_constant = c;
        let radius = 0.5 * diam;
        let m = n as f64 - 1.0;
        // The gradient integral over a ball of radius r is at most r·C_n, so
        // the majorant runs in diameter mode with prefactor C_n·r/(n-1).
        let major = MajorantParams {
            dim: n,
            r_bound: l,
            s_bound: g,
            size: SizeParameter::Diameter(diam),
            constant: c,
        };
        match regime {
            Regime::Direct => clauses.push(ClauseOutcome::new(
                Clause::BallRadius,
                vec![
                    ("radius_cap", check(0.5, radius)),
                    ("radius_gradient", check(over(m, c * (2.5 * l + g)), radius)),
                    ("radius_contraction", check(m / (1.5 * l + SQRT_2), radius)),
                ],
                major,
            )),
            Regime::Rescaled => clauses.push(ClauseOutcome::new(
                Clause::RescaledBallRadius,
                vec![
                    ("radius_cap", check(0.5, radius)),
                    ("radius_gradient", check(over(m, c * (0.625 + g)), radius)),
                ],
                major,
            )),
        }
    }

    let chosen = clauses
        .iter()
        .find(|c| c.passed)
        .or_else(|| {
            clauses
                .iter()
                .min_by(|a, b| a.worst().1.total_cmp(&b.worst().1))
        })
        .expect("at least one clause applies")
        .clone();
    let fixed_point = chosen.majorant.smallest_fixed_point();
    let violated = chosen.violated();
    let tightest_violation = (!chosen.passed).then(|| chosen.worst().0);
    Ok(CertificateReport {
        regime,
        clause: chosen.clause,
        passed: chosen.passed,
        bounds_evaluated: chosen.bounds.clone(),
        violated,
        tightest_violation,
        dim: n,
        domain_kind: domain.kind_name().to_string(),
        r_bound: l,
        s_bound: g,
        geometry,
        volume_std_error: est.std_error,
        volume_seed: est.seed,
        gradient_constant,
        majorant: chosen.majorant,
        k_bound: chosen.majorant.explicit_bound(),
        fixed_point,
        contraction_q: contraction_constant(delta, l, 1.0, n),
        contraction_q_at_k: fixed_point.k.map(|k| contraction_constant(delta, l, k, n)),
        smoothness_relaxed: !domain.is_ball(),
        clauses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ball(r: f64) -> Domain {
        Domain::centered_ball(3, r).unwrap()
    }

    #[test]
    fn tiny_ball_passes_both_convex_clauses() {
        let rep = check_admissibility(&ball(0.001), 1.0, 1.0, Regime::Direct).unwrap();
        assert!(rep.passed);
        let diam = rep.outcome(Clause::ConvexDiameter).unwrap();
        assert!(diam.passed);
        let c = 4.76 * PI.powf(2.0 / 3.0);
        let b = &diam.bounds["diameter_gradient"];
        assert!((b.required - 4.0 / (c * 3.5)).abs() < 1e-15);
        assert!((b.required - 0.1120).abs() < 1e-4);
        assert!((diam.bounds["diameter_contraction"].required - 1.3726).abs() < 1e-4);
        assert!(!rep.smoothness_relaxed);
    }

    #[test]
    fn zero_bounds_leave_only_caps() {
        let cube = Domain::cuboid(vec![0.0; 3], vec![0.9; 3]).unwrap();
        let rep = check_admissibility(&cube, 0.0, 0.0, Regime::Direct).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.clause, Clause::ConvexVolume);
        assert_eq!(
            rep.bounds_evaluated["volume_gradient"].required,
            f64::INFINITY
        );
        assert_eq!(rep.bounds_evaluated["slab_contraction"].required, 2.0);
        assert!(rep.smoothness_relaxed);
    }

    #[test]
    fn thin_box_fails_with_named_bound() {
        let thin = Domain::cuboid(vec![0.0; 3], vec![3.0, 3.0, 0.01]).unwrap();
        let rep = check_admissibility(&thin, 1.0, 0.0, Regime::Direct).unwrap();
        assert!(!rep.passed);
        let vol = rep.outcome(Clause::ConvexVolume).unwrap();
        let b = vol.bounds["volume_gradient"];
        assert!((b.required - 7.52e-3).abs() < 1e-5);
        assert!((b.actual - 0.09).abs() < 1e-12);
        assert!(!b.holds());
        assert!(rep.tightest_violation.is_some());
        assert!(rep.describe_failure().contains(rep.clause.name()));
    }

    #[test]
    fn higher_dimension_needs_a_ball() {
        let cube = Domain::cuboid(vec![0.0; 4], vec![0.1; 4]).unwrap();
        assert!(matches!(
            check_admissibility(&cube, 1.0, 1.0, Regime::Direct),
            Err(Error::Unsupported(_))
        ));
        let consts = Constants {
            ball: Some(0.8),
            ..Constants::default()
        };
        let b = Domain::centered_ball(4, 0.05).unwrap();
        let rep = check_admissibility_with(&b, 1.0, 1.0, Regime::Direct, &consts).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.clause, Clause::BallRadius);
        assert!(
            (rep.bounds_evaluated["radius_gradient"].required - 3.0 / (0.8 * 3.5)).abs() < 1e-15
        );
    }

    #[test]
    fn rescaled_regime_ignores_r_bound() {
        let b = ball(0.05);
        let a = check_admissibility(&b, 100.0, 0.5, Regime::Rescaled).unwrap();
        let z = check_admissibility(&b, 0.0, 0.5, Regime::Rescaled).unwrap();
        assert_eq!(a, z);
        assert_eq!(a.r_bound, 0.25);
        assert_eq!(a.clause, Clause::RescaledConvexVolume);
    }

    #[test]
    fn rejects_negative_bounds() {
        assert!(check_admissibility(&ball(0.1), -1.0, 0.0, Regime::Direct).is_err());
        assert!(check_admissibility(&ball(0.1), 0.0, f64::NAN, Regime::Direct).is_err());
    }
}
