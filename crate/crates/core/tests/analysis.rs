use std::f64::consts::PI;

use proptest::prelude::*;
use yamabe::analysis::green::{
    ball_green_function, ball_green_gradient, estimate_ball_green_constant,
    green_gradient_integral, radius_green_function,
};
use yamabe::analysis::majorant::{
    convex_gradient_constant, evans_bound, smallest_fixed_point, MajorantParams, SizeParameter,
};
use yamabe::analysis::quadrature::integrate;

const CONVEX: f64 = 10.210339930248482;

#[test]
fn quadrature_known_integrals() {
    assert!((integrate(f64::sin, 0.0, PI, 1e-12).unwrap().value - 2.0).abs() < 1e-12);
    assert!((integrate(f64::sqrt, 0.0, 1.0, 1e-10).unwrap().value - 2.0 / 3.0).abs() < 1e-9);
    let gauss = integrate(|x| (-x * x).exp(), -8.0, 8.0, 1e-12)
        .unwrap()
        .value;
    assert!((gauss - PI.sqrt()).abs() < 1e-11);
}

#[test]
fn convex_constant_and_evans_bound() {
    assert!((convex_gradient_constant() - CONVEX).abs() < 1e-12);
    assert!((evans_bound(4.0 * PI / 3.0) - 16.45898581533363).abs() < 1e-10);
}

#[test]
fn green_vanishes_on_the_sphere() {
    let x = [0.2, -0.1, 0.3];
    for y in [[1.0, 0.0, 0.0], [0.0, -0.6, 0.8], [0.48, 0.6, 0.64]] {
        assert!(ball_green_function(3, &x, &y).unwrap().abs() < 1e-12);
    }
}

#[test]
fn green_matches_closed_form_in_three_dimensions() {
    let x = [0.1, 0.2, -0.3];
    let y = [-0.4, 0.1, 0.2];
    let r = ((0.5f64).powi(2) + 0.01 + 0.25).sqrt();
    let ny2: f64 = y.iter().map(|v| v * v).sum();
    let star: Vec<f64> = y.iter().map(|v| v / ny2).collect();
    let rs = x
        .iter()
        .zip(&star)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let exact = (1.0 / r - 1.0 / (ny2.sqrt() * rs)) / (4.0 * PI);
    assert!((ball_green_function(3, &x, &y).unwrap() - exact).abs() < 1e-14);
}

#[test]
fn gradient_matches_finite_differences() {
    let x = [0.15, -0.2, 0.1, 0.05];
    let y = [-0.3, 0.25, 0.0, 0.4];
    let g = ball_green_gradient(4, &x, &y).unwrap();
    let h = 1e-6;
    for k in 0..4 {
        let (mut p, mut m) = (x, x);
        p[k] += h;
        m[k] -= h;
        let fd = (ball_green_function(4, &p, &y).unwrap()
            - ball_green_function(4, &m, &y).unwrap())
            / (2.0 * h);
        assert!(
            (fd - g[k]).abs() < 1e-7 * g[k].abs().max(1.0),
            "{k}: {fd} vs {}",
            g[k]
        );
    }
}

#[test]
fn centre_integral_is_n_over_n_plus_one() {
    for n in 3..=6 {
        let v = green_gradient_integral(n, &vec![0.0; n], 1e-8)
            .unwrap()
            .value;
        let exact = n as f64 / (n as f64 + 1.0);
        assert!((v - exact).abs() < 1e-6, "n={n}: {v}");
    }
}

#[test]
fn three_dimensional_constant_is_attained_at_the_centre() {
    let est = estimate_ball_green_constant(3, 1e-4).unwrap();
    assert!((est.constant - 0.75).abs() < 1e-3, "{}", est.constant);
    assert!(est.argmax < 0.05, "{}", est.argmax);
    assert!(est.constant <= est.evans_bound.unwrap());
}

#[test]
fn points_outside_the_ball_are_rejected() {
    assert!(ball_green_function(3, &[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0]).is_err());
    assert!(ball_green_function(3, &[0.1, 0.0, 0.0], &[0.1, 0.0, 0.0]).is_err());
    assert!(ball_green_function(2, &[0.1, 0.0], &[0.0, 0.2]).is_err());
}

// smallest roots from a 1e-4 scan plus brentq, frozen
#[test]
fn fixed_points_match_root_finder() {
    let cases = [
        (1.0, 1.0, SizeParameter::Volume(0.1), 0.6342681873335385),
        (0.5, 2.0, SizeParameter::Diameter(0.05), 0.3344230467748729),
        (2.0, 0.3, SizeParameter::Volume(0.05), 0.3108914406028922),
    ];
    for (l, g, size, k) in cases {
        let p = MajorantParams {
            dim: 3,
            r_bound: l,
            s_bound: g,
            size,
            constant: CONVEX,
        };
        let got = smallest_fixed_point(&p).k.unwrap();
        assert!((got - k).abs() < 1e-9, "{size:?}: {got} vs {k}");
        assert!(got <= p.explicit_bound() + 1e-12);
    }
}

#[test]
fn no_fixed_point_for_large_data() {
    let p = MajorantParams {
        dim: 3,
        r_bound: 3.0,
        s_bound: 3.0,
        size: SizeParameter::Volume(1.0),
        constant: CONVEX,
    };
    let r = smallest_fixed_point(&p);
    assert!(!r.exists && r.k.is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn green_is_symmetric(a in prop::array::uniform3(-0.5..0.5f64), b in prop::array::uniform3(-0.5..0.5f64)) {
        prop_assume!(a.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>() > 1e-4);
        let gab = ball_green_function(3, &a, &b).unwrap();
        let gba = ball_green_function(3, &b, &a).unwrap();
        prop_assert!((gab - gba).abs() < 1e-12 * gab.abs().max(1.0));
        prop_assert!(gab > 0.0);
    }

    #[test]
    fn radius_green_scales(a in prop::array::uniform3(-0.5..0.5f64), b in prop::array::uniform3(-0.5..0.5f64), r in 0.1..3.0f64) {
        prop_assume!(a.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>() > 1e-4);
        let sa: Vec<f64> = a.iter().map(|v| v * r).collect();
        let sb: Vec<f64> = b.iter().map(|v| v * r).collect();
        let g1 = ball_green_function(3, &a, &b).unwrap();
        let gr = radius_green_function(r, &sa, &sb).unwrap();
        prop_assert!((gr * r - g1).abs() < 1e-10 * g1.abs().max(1.0));
    }

    #[test]
    fn fixed_point_is_a_root_and_smallest(l in 0.0..3.0f64, g in 0.0..3.0f64, a in 0.001..0.3f64) {
        let p = MajorantParams { dim: 3, r_bound: l, s_bound: g, size: SizeParameter::Volume(a), constant: CONVEX };
        if let Some(k) = smallest_fixed_point(&p).k {
            prop_assert!((p.eval(k) - k).abs() < 1e-9);
            for i in 0..200 {
                let t = k * i as f64 / 200.0;
                prop_assert!(p.eval(t) > t - 1e-12);
            }
        }
    }
}
