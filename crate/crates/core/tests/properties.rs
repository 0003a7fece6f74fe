use std::f64::consts::{FRAC_PI_2, PI, SQRT_2, TAU};

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use refraction_billiards::boundary::{
    homothetic_directions, wrap_pi, BoundaryCurve, EllipseBoundary, PolarCurve,
};
use refraction_billiards::outer::outer_arc;
use refraction_billiards::params::{PhysParams, Region};
use refraction_billiards::refraction::{
    critical_angle, refract_inward, refract_outward, IncidenceAngle,
};
use refraction_billiards::return_map::{
    first_return, free_fall_delta, invariant_density, search_periodic_orbit, BoundaryState,
};
use refraction_billiards::stability::{
    discriminant_elliptic, ell0, jacobian_df, sign_parabola, Axis, DerivQuadruple,
};

fn base() -> PhysParams {
    PhysParams::new(2.5, SQRT_2, 0.1, 1.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn refraction_round_trip(alpha in -1.55f64..1.55, xi in 0.0..TAU, e in 0.0f64..0.6) {
        let frame = EllipseBoundary::new(e).unwrap().frame(xi).unwrap();
        let a = IncidenceAngle::new(alpha).unwrap();
        let inner = refract_inward(&base(), &frame, a).unwrap();
        prop_assert!(inner.value().abs() <= critical_angle(&base(), &frame).unwrap() + 1e-15);
        let back = refract_outward(&base(), &frame, inner).unwrap();
        prop_assert!((back.value() - alpha).abs() < 1e-12);
    }

    #[test]
    fn inner_potential_exceeds_outer(xi in 0.0..TAU, e in 0.0f64..0.9, h in 0.0f64..50.0, mu in 0.01f64..20.0) {
        let p = PhysParams::new(2.5, SQRT_2, h, mu).unwrap();
        let z = EllipseBoundary::new(e).unwrap().point(xi);
        prop_assert!(p.potential_at(z, Region::Inner).unwrap() > p.potential_at(z, Region::Outer).unwrap());
    }

    #[test]
    fn outer_arc_stays_outside_and_retraces(xi in 0.0..TAU, alpha in -1.4f64..1.4, e in 0.0f64..0.6) {
        let c = EllipseBoundary::new(e).unwrap();
        let p = base();
        let arc = outer_arc(&p, &c, xi, IncidenceAngle::new(alpha).unwrap()).unwrap();
        for k in 1..100 {
            let s = arc.flight_time * k as f64 / 100.0;
            prop_assert!(c.implicit(arc.position(s)) >= -1e-12);
            prop_assert!((arc.energy(s) - p.energy).abs() < 1e-10);
        }
        let back = outer_arc(&p, &c, arc.end_xi, IncidenceAngle::new(-arc.end_angle).unwrap()).unwrap();
        prop_assert!(wrap_pi(back.end_xi - xi).abs() < 1e-9);
        prop_assert!((back.end_angle + alpha).abs() < 1e-9);
    }

    #[test]
    fn return_map_commutes_with_reflection(xi in 0.0..TAU, alpha in -0.5f64..0.5) {
        let c = EllipseBoundary::new(0.3).unwrap();
        let p = base();
        let (Ok(a), Ok(b)) = (
            first_return(&p, &c, BoundaryState::new(xi, alpha)),
            first_return(&p, &c, BoundaryState::new(-xi, -alpha)),
        ) else {
            return Ok(());
        };
        prop_assert!(wrap_pi(a.xi + b.xi).abs() < 1e-9);
        prop_assert!((a.alpha + b.alpha).abs() < 1e-9);
        let m = first_return(&p, &c, BoundaryState::new(PI - xi, -alpha)).unwrap();
        prop_assert!(wrap_pi(m.xi - (PI - a.xi)).abs() < 1e-9);
        prop_assert!((m.alpha + a.alpha).abs() < 1e-9);
    }
}

#[test]
fn ellipse_points_and_curvature() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let e = rng.random_range(0.0..0.95);
        let c = EllipseBoundary::new(e).unwrap();
        let b = c.semiminor();
        let xi = rng.random_range(0.0..TAU);
        let z = c.point(xi);
        assert!((z.x * z.x + z.y * z.y / (b * b) - 1.0).abs() < 1e-12);
        let (s, co) = xi.sin_cos();
        let k = b / (s * s + b * b * co * co).powf(1.5);
        assert!((c.frame(xi).unwrap().curvature - k).abs() < 1e-10 * k.max(1.0));
    }
}

#[test]
fn symmetric_curves_have_axis_homothetic_directions() {
    let curves: Vec<Box<dyn BoundaryCurve>> = vec![
        Box::new(EllipseBoundary::new(0.4).unwrap()),
        Box::new(PolarCurve::new(1.0, 0.05, 4).unwrap()),
    ];
    for c in curves {
        let dirs = homothetic_directions(c.as_ref(), 1e-10);
        for target in [0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2] {
            assert!(
                dirs.xis.iter().any(|x| wrap_pi(x - target).abs() < 1e-8),
                "{dirs:?}"
            );
        }
    }
}

#[test]
fn closed_form_jacobian_is_unimodular() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let q = DerivQuadruple {
            e0: rng.random_range(0.1..5.0),
            eps_e: rng.random_range(-2.0..2.0),
            i0: -rng.random_range(0.05..3.0),
            eps_i: rng.random_range(-2.0..2.0),
        };
        let df = jacobian_df(&q, rng.random_range(0.1..5.0)).unwrap();
        assert_abs_diff_eq!(df.determinant(), 1.0, epsilon = 1e-12);
    }
}

#[test]
fn major_axis_high_energy_limit_is_positive() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10_000 {
        let b = rng.random_range(1e-3..1.0 - 1e-9);
        let h = rng.random_range(1e-3..100.0);
        let mu = rng.random_range(1e-3..100.0);
        let omega = rng.random_range(1e-3..10.0);
        assert!(ell0(b, h, mu, omega) > 0.0);
    }
}

#[test]
fn small_eccentricity_regimes() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (energy, omega) = (2.5, SQRT_2);
    let mut seen = (0, 0);
    while seen.0 < 50 || seen.1 < 50 {
        let mu = rng.random_range(0.1..100.0);
        let h = rng.random_range(0.1..200.0);
        let gap = h - sign_parabola(energy, omega, mu);
        if gap.abs() < 5.0 {
            continue;
        }
        let p = PhysParams::new(energy, omega, h, mu).unwrap();
        let d0 = discriminant_elliptic(&p, 1e-3, Axis::Major).unwrap().delta;
        let d1 = discriminant_elliptic(&p, 1e-3, Axis::Minor).unwrap().delta;
        if gap < 0.0 {
            seen.0 += 1;
            assert!(
                d0 < 0.0 && d1 > 0.0,
                "below the sign parabola at mu={mu}, h={h}: {d0} {d1}"
            );
        } else {
            seen.1 += 1;
            assert!(
                d0 > 0.0 && d1 < 0.0,
                "above the sign parabola at mu={mu}, h={h}: {d0} {d1}"
            );
        }
    }
}

#[test]
fn major_axis_sign_flips_across_parabola() {
    let (energy, omega) = (10.0, 2.0);
    for mu in [80.0, 100.0, 150.0] {
        let ph = sign_parabola(energy, omega, mu);
        assert!(ph > 0.0);
        let sign_at = |h: f64| {
            let p = PhysParams::new(energy, omega, h, mu).unwrap();
            discriminant_elliptic(&p, 0.01, Axis::Major)
                .unwrap()
                .delta
                .signum()
        };
        assert_eq!(sign_at(0.5 * ph), -1.0);
        assert_eq!(sign_at(1.5 * ph), 1.0);
    }
}

#[test]
fn free_fall_is_odd_about_both_axes() {
    let p = PhysParams::new(2.5, SQRT_2, 120.0, 2.0).unwrap();
    let c = EllipseBoundary::new(0.1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let t = rng.random_range(0.0..FRAC_PI_2);
        let d = free_fall_delta(&p, &c, t).unwrap().delta;
        assert!((free_fall_delta(&p, &c, -t).unwrap().delta + d).abs() < 1e-9);
        assert!((free_fall_delta(&p, &c, PI - t).unwrap().delta + d).abs() < 1e-9);
    }
}

#[test]
fn period_three_orbit_exists() {
    let p = base();
    let c = EllipseBoundary::new(0.3).unwrap();
    let s = search_periodic_orbit(&p, &c, 3, 48, 24, 0.6).unwrap();
    let mut x = s;
    for _ in 0..3 {
        x = first_return(&p, &c, x).unwrap();
    }
    assert!(x.distance(&s) < 1e-9);
    let once = first_return(&p, &c, s).unwrap();
    assert!(once.distance(&s) > 1e-3);
}

fn hull_area(mut pts: Vec<(f64, f64)>) -> f64 {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64)>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &pt in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], pt) <= 0.0
            {
                hull.pop();
            }
            hull.push(pt);
        }
        hull.pop();
    }
    let n = hull.len();
    0.5 * (0..n)
        .map(|i| cross((0.0, 0.0), hull[i], hull[(i + 1) % n]))
        .sum::<f64>()
        .abs()
}

#[test]
fn small_disks_keep_their_invariant_area() {
    let p = base();
    let c = EllipseBoundary::new(0.3).unwrap();
    for (xi, alpha) in [(0.4, 0.2), (1.3, -0.3), (2.9, 0.1)] {
        let centre = BoundaryState::new(xi, alpha);
        let image_centre = first_return(&p, &c, centre).unwrap();
        let r = 1e-4;
        let disk: Vec<(f64, f64)> = (0..64)
            .map(|k| {
                let t = TAU * k as f64 / 64.0;
                (r * t.cos(), r * t.sin())
            })
            .collect();
        let image: Vec<(f64, f64)> = disk
            .iter()
            .map(|&(dx, da)| {
                let s = first_return(&p, &c, BoundaryState::new(xi + dx, alpha + da)).unwrap();
                (
                    wrap_pi(s.xi - image_centre.xi),
                    s.alpha - image_centre.alpha,
                )
            })
            .collect();
        let weight = |s| invariant_density(&p, &c, s).unwrap();
        let before = hull_area(disk) * weight(centre);
        let after = hull_area(image) * weight(image_centre);
        assert!((after / before - 1.0).abs() < 0.1, "{before} {after}");
    }
}

/// `F(xi1, -alpha1) = (xi0, -alpha0)` read literally. It does not hold: flipping the angle and
/// applying `F` runs the outer arc first, while the time-reversed cycle runs the inner arc
/// first (see `reverse_return`).
#[test]
#[ignore = "the literal reversal identity is false for this map; run with --ignored to see the residual"]
fn literal_reversal_identity() {
    let (literal, _) = refraction_billiards::selftest::reversal_residuals(100).unwrap();
    assert!(literal < 1e-8, "worst residual {literal}");
}
