use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

/// Gradient-estimate constant for convex domains in R³, 4.76·π^{2/3}:
/// ‖∇u‖_∞ <= C·Vol^{1/3}·‖Δu‖_∞ for zero Dirichlet data.
pub fn convex_gradient_constant() -> f64 {
    4.76 * PI.powf(2.0 / 3.0)
}

/// Slab factor relating the slab diameter to Vol^{1/3} in volume mode.
pub const SLAB_FACTOR: f64 = 1.25;

/// Right end of the scan for the smallest fixed point.
pub const FIXED_POINT_SCAN_MAX: f64 = 10.0;
pub const FIXED_POINT_SCAN_POINTS: usize = 10_000;
const BISECTION_TOL: f64 = 1e-12;

/// Bound for ∫_Ω |∇G(x, x')| dx' on a convex domain of volume `volume`.
pub fn evans_bound(volume: f64) -> f64 {
    4.76 * (PI * PI * volume).cbrt()
}

/// Which size quantity drives the majorant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "snake_case")]
pub enum SizeParameter {
    /// A = Vol^{1/3}; the exponent uses the slab bound δ <= 1.25·A.
    Volume(f64),
    /// A diameter-like length d that also bounds the slab diameter.
    Diameter(f64),
}

impl SizeParameter {
    pub fn value(self) -> f64 {
        match self {
            SizeParameter::Volume(a) | SizeParameter::Diameter(a) => a,
        }
    }

    /// Coefficient of t in the exponent of the majorant.
    pub fn exponent_rate(self) -> f64 {
        match self {
            SizeParameter::Volume(a) => SLAB_FACTOR * a,
            SizeParameter::Diameter(d) => d,
        }
    }
}

/// Scalar majorant of the sup-gradient recursion
/// `t ↦ C·s/(2(n-1)) · (Λ·exp(κ t) + t² + γ)`, where s is the size
/// parameter and κ its exponent rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MajorantParams {
    pub dim: usize,
    pub r_bound: f64,
    pub s_bound: f64,
    pub size: SizeParameter,
    pub constant: f64,
}

impl MajorantParams {
    pub fn prefactor(&self) -> f64 {
        self.constant * self.size.value() / (2.0 * (self.dim as f64 - 1.0))
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.prefactor()
            * (self.r_bound * (self.size.exponent_rate() * t).exp() + t * t + self.s_bound)
    }

    /// Closed-form upper estimate of the smallest fixed point,
    /// C·A·(4Λ+γ)/8 in volume mode and C·d·(2.5Λ+γ)/(2(n-1)) in diameter mode.
    pub fn explicit_bound(&self) -> f64 {
        let (l, g) = (self.r_bound, self.s_bound);
        match self.size {
            SizeParameter::Volume(a) => self.constant * a * (4.0 * l + g) / 8.0,
            SizeParameter::Diameter(d) => {
                self.constant * d * (2.5 * l + g) / (2.0 * (self.dim as f64 - 1.0))
            }
        }
    }

    pub fn smallest_fixed_point(&self) -> FixedPointResult {
        smallest_fixed_point(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointResult {
    /// Smallest root of t = f(t) in [0, FIXED_POINT_SCAN_MAX].
    pub k: Option<f64>,
    pub bracket: Option<(f64, f64)>,
    pub explicit_bound: f64,
    pub exists: bool,
    /// Set when no root lies in the scanned range; one may still exist
    /// beyond it.
    pub beyond_scan: bool,
}

/// First sign change of g(t) = f(t) - t on a uniform scan of [0, 10],
/// refined by bisection. f is increasing and convex, so g is convex and the
/// first sign change brackets the smallest root.
pub fn smallest_fixed_point(p: &MajorantParams) -> FixedPointResult {
    let g = |t: f64| p.eval(t) - t;
    let explicit_bound = p.explicit_bound();
    if g(0.0) <= 0.0 {
        return FixedPointResult {
            k: Some(0.0),
            bracket: Some((0.0, 0.0)),
            explicit_bound,
            exists: true,
            beyond_scan: false,
        };
    }
    let step = FIXED_POINT_SCAN_MAX / FIXED_POINT_SCAN_POINTS as f64;
    let mut lo = 0.0;
    for i in 1..=FIXED_POINT_SCAN_POINTS {
        let hi = i as f64 * step;
        if g(hi) <= 0.0 {
            let bracket = (lo, hi);
            let (mut a, mut b) = bracket;
            while b - a > BISECTION_TOL {
                let m = 0.5 * (a + b);
                if g(m) > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            return FixedPointResult {
                k: Some(0.5 * (a + b)),
                bracket: Some(bracket),
                explicit_bound,
                exists: true,
                beyond_scan: false,
            };
        }
        lo = hi;
    }
    FixedPointResult {
        k: None,
        bracket: None,
        explicit_bound,
        exists: false,
        beyond_scan: true,
    }
}

/// Contraction factor of successive H¹₀ differences,
/// `(δ²Λ e^{Kδ}/2 + √2 δ K) / (2(n-1))`.
pub fn contraction_constant(slab: f64, r_bound: f64, k: f64, dim: usize) -> f64 {
    (slab * slab * r_bound * (k * slab).exp() / 2.0 + SQRT_2 * slab * k)
        / (2.0 * (dim as f64 - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vol(a: f64, l: f64, g: f64) -> MajorantParams {
        MajorantParams {
            dim: 3,
            r_bound: l,
            s_bound: g,
            size: SizeParameter::Volume(a),
            constant: 10.2102,
        }
    }

    #[test]
    fn constants() {
        assert!((convex_gradient_constant() - 10.210_339_930_248_48).abs() < 1e-12);
        assert!((evans_bound(1.0) - convex_gradient_constant()).abs() < 1e-13);
        assert!((evans_bound(4.0 * PI / 3.0) - 16.458_985_815_333_63).abs() < 1e-11);
        assert!((evans_bound(1e-6) - 0.102_103_399_302_484_8).abs() < 1e-15);
    }

    #[test]
    fn majorant_examples() {
        assert_eq!(vol(0.05, 0.0, 0.0).eval(0.0), 0.0);
        let p = vol(0.05, 1.0, 1.0);
        assert!((p.eval(0.0) - 10.2102 * 0.05 * 2.0 / 4.0).abs() < 1e-15);
        // 50-digit evaluation: 0.391113766555539104...
        assert!((p.eval(1.0) - 0.391_113_766_555_539_1).abs() < 1e-15);
    }

    #[test]
    fn fixed_point_examples() {
        let zero = vol(0.3, 0.0, 0.0).smallest_fixed_point();
        assert_eq!(zero.k, Some(0.0));
        let r = vol(0.05, 1.0, 1.0).smallest_fixed_point();
        let k = r.k.unwrap();
        // high-precision root: 0.266459940589846664...
        assert!((k - 0.266_459_940_589_846_7).abs() < 1e-11, "{k}");
        let p = vol(0.05, 1.0, 1.0);
        assert!((p.eval(k) - k).abs() < 1e-12);
        assert!((r.explicit_bound - 0.319_068_75).abs() < 1e-15);
        // without a root: large A
        let none = vol(1.0, 1.0, 1.0).smallest_fixed_point();
        assert!(!none.exists && none.beyond_scan && none.k.is_none());
    }

    #[test]
    fn explicit_bound_is_one_at_threshold() {
        let (l, g) = (0.7, 2.3);
        let c = convex_gradient_constant();
        let mut p = vol(8.0 / (c * (4.0 * l + g)), l, g);
        p.constant = c;
        assert!((p.explicit_bound() - 1.0).abs() < 1e-15);
        assert_eq!(vol(0.4, 0.0, 0.0).explicit_bound(), 0.0);
    }

    #[test]
    fn contraction_examples() {
        assert_eq!(contraction_constant(0.0, 1.0, 0.5, 3), 0.0);
        assert_eq!(contraction_constant(0.3, 0.0, 0.0, 3), 0.0);
        // high-precision value 0.00756921299742541460...
        let q = contraction_constant(0.0625, 1.0, 0.32, 3);
        assert!((q - 0.007_569_212_997_425_415).abs() < 1e-16, "{q}");
    }

    proptest! {
        #[test]
        fn majorant_increasing_and_convex(
            a in 1e-3f64..1.0, l in 0.0f64..10.0, g in 0.0f64..10.0, t in 0.0f64..5.0
        ) {
            let p = vol(a, l, g);
            let h = 1e-3;
            prop_assert!(p.eval(t + h) > p.eval(t));
            let second = p.eval(t + 2.0 * h) - 2.0 * p.eval(t + h) + p.eval(t);
            prop_assert!(second >= -1e-12 * p.eval(t + 2.0 * h));
        }

        #[test]
        fn fixed_point_is_a_root_and_first(a in 1e-3f64..0.5, l in 0.0f64..5.0, g in 0.0f64..5.0) {
            let p = vol(a, l, g);
            let r = p.smallest_fixed_point();
            if let Some(k) = r.k {
                prop_assert!((p.eval(k) - k).abs() < 1e-10);
                for i in 0..200 {
                    let t = k * i as f64 / 200.0;
                    prop_assert!(p.eval(t) - t > 0.0 || k == 0.0);
                }
            }
        }
    }
}
