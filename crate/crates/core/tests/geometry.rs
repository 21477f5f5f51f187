use std::f64::consts::PI;

use proptest::prelude::*;
use yamabe::geometry::{
    check_admissibility, unit_ball_volume, unit_sphere_area, Domain, Halfspace, Regime,
};
use yamabe::Error;

fn tetrahedron() -> Domain {
    let k = 1.0 / 3f64.sqrt();
    Domain::polytope(vec![
        Halfspace::new(vec![-1.0, 0.0, 0.0], 1.0),
        Halfspace::new(vec![0.0, -1.0, 0.0], 1.0),
        Halfspace::new(vec![0.0, 0.0, -1.0], 1.0),
        Halfspace::new(vec![k, k, k], k),
    ])
    .unwrap()
}

#[test]
fn ball_volume_and_area_closed_forms() {
    assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
    assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
    assert!((unit_sphere_area(3) - 4.0 * PI).abs() < 1e-13);
    assert!((unit_sphere_area(2) - 2.0 * PI).abs() < 1e-13);
}

#[test]
fn box_lengths() {
    let b = Domain::cuboid(vec![-0.1, -0.2, -0.3], vec![0.1, 0.2, 0.3]).unwrap();
    assert!((b.volume() - 0.2 * 0.4 * 0.6).abs() < 1e-15);
    assert!((b.diameter() - (0.04f64 + 0.16 + 0.36).sqrt()).abs() < 1e-14);
    assert!((b.slab_diameter() - 0.2).abs() < 1e-3);
    assert!((b.width(&[0.0, 0.0, 1.0]) - 0.6).abs() < 1e-14);
}

#[test]
fn tetrahedron_vertices_and_volume() {
    let t = tetrahedron();
    // edge 4 along the axes: volume 4³/6, diameter 4√2
    let exact = 64.0 / 6.0;
    assert!(
        (t.diameter() - 4.0 * 2f64.sqrt()).abs() < 1e-9,
        "{}",
        t.diameter()
    );
    let est = t.volume_estimate(7);
    assert!((est.value - exact).abs() < 5.0 * est.std_error.max(1e-12) + 1e-9 * exact);
    assert!((t.volume() - exact).abs() < 0.02 * exact);
}

#[test]
fn unbounded_polytope_is_rejected() {
    let r = Domain::polytope(vec![
        Halfspace::new(vec![1.0, 0.0, 0.0], 1.0),
        Halfspace::new(vec![0.0, 1.0, 0.0], 1.0),
        Halfspace::new(vec![0.0, 0.0, 1.0], 1.0),
    ]);
    assert!(matches!(r, Err(Error::UnboundedPolytope { .. })), "{r:?}");
}

#[test]
fn small_ball_certifies_and_large_ball_does_not() {
    let small = check_admissibility(
        &Domain::centered_ball(3, 0.05).unwrap(),
        1.0,
        1.0,
        Regime::Direct,
    )
    .unwrap();
    assert!(small.passed);
    let k = small.k().expect("K exists for a passing small ball");
    assert!(k <= small.k_bound * (1.0 + 1e-12));
    assert!(small.contraction_q < 1.0);
    let large = check_admissibility(
        &Domain::centered_ball(3, 2.0).unwrap(),
        1.0,
        1.0,
        Regime::Direct,
    )
    .unwrap();
    assert!(!large.passed);
    assert!(!large.violated.is_empty());
    assert!(large.tightest_violation.is_some());
}

#[test]
fn rescaled_regime_ignores_the_r_bound() {
    let d = Domain::centered_ball(3, 0.05).unwrap();
    let a = check_admissibility(&d, 0.0, 1.0, Regime::Rescaled).unwrap();
    let b = check_admissibility(&d, 100.0, 1.0, Regime::Rescaled).unwrap();
    assert_eq!(a.bounds_evaluated, b.bounds_evaluated);
    assert_eq!(a.r_bound, b.r_bound);
}

#[test]
fn high_dimensional_boxes_are_unsupported() {
    let b = Domain::cuboid(vec![-0.1; 4], vec![0.1; 4]).unwrap();
    let r = check_admissibility(&b, 1.0, 1.0, Regime::Direct);
    assert!(matches!(r, Err(Error::Unsupported(_))));
}

#[test]
fn negative_bounds_are_invalid() {
    let d = Domain::centered_ball(3, 0.05).unwrap();
    assert!(check_admissibility(&d, -1.0, 1.0, Regime::Direct).is_err());
    assert!(check_admissibility(&d, 1.0, f64::NAN, Regime::Direct).is_err());
}

proptest! {
    #[test]
    fn ball_signed_distance_is_exact(x in -2.0..2.0f64, y in -2.0..2.0f64, z in -2.0..2.0f64, r in 0.01..1.5f64) {
        let b = Domain::centered_ball(3, r).unwrap();
        let p = [x, y, z];
        let expect = (x * x + y * y + z * z).sqrt() - r;
        prop_assert!((b.signed_distance(&p) - expect).abs() < 1e-14);
        prop_assert_eq!(b.contains(&p), expect < 0.0);
    }

    #[test]
    fn width_is_support_sum(theta in 0.0..PI, phi in 0.0..(2.0 * PI)) {
        let t = tetrahedron();
        let u = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
        let minus = [-u[0], -u[1], -u[2]];
        prop_assert!((t.width(&u) - (t.support(&u) + t.support(&minus))).abs() < 1e-12);
        prop_assert!(t.width(&u) >= t.slab_diameter() - 1e-9);
        prop_assert!(t.width(&u) <= t.diameter() + 1e-9);
    }

    #[test]
    fn scaling_scales_lengths(d in 0.1..5.0f64) {
        let b = Domain::cuboid(vec![-0.1, -0.2, -0.3], vec![0.1, 0.2, 0.3]).unwrap();
        let s = b.scale(d).unwrap();
        prop_assert!((s.diameter() - d * b.diameter()).abs() < 1e-12 * d);
        prop_assert!((s.volume() - d.powi(3) * b.volume()).abs() < 1e-12 * d.powi(3));
    }
}
