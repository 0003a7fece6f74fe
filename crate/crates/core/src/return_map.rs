//! First return map on boundary data, orbits, the free-fall map and brake orbits.

use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::{Matrix2, Vector2};
use serde::Serialize;

use crate::boundary::{cross, wrap_pi, wrap_tau, BoundaryCurve, Vec2};
use crate::error::{Error, Result};
use crate::inner::{inner_arc, InnerArc};
use crate::outer::{outer_arc, OuterArc};
use crate::params::PhysParams;
use crate::refraction::{refract_inward, refract_outward, IncidenceAngle};
use crate::roots::bisect;

/// Launch state on the boundary: parameter and angle from the outward normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryState {
    pub xi: f64,
    pub alpha: f64,
}

impl BoundaryState {
    pub fn new(xi: f64, alpha: f64) -> Self {
        Self {
            xi: wrap_tau(xi),
            alpha,
        }
    }

    /// Componentwise difference with the parameter difference taken in `(-pi, pi]`.
    pub fn distance(&self, other: &BoundaryState) -> f64 {
        wrap_pi(self.xi - other.xi)
            .abs()
            .max((self.alpha - other.alpha).abs())
    }
}

/// One full cycle of the return map with both arcs and the refracted angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Transit {
    pub start: BoundaryState,
    pub outer: OuterArc,
    /// Inner angle after refracting the outer arrival.
    pub entry_angle: f64,
    pub inner: InnerArc,
    pub end: BoundaryState,
}

pub fn first_return_detailed<C: BoundaryCurve + ?Sized>(
    p: &PhysParams,
    curve: &C,
    state: BoundaryState,
) -> Result<Transit> {
    let outer = outer_arc(p, curve, state.xi, IncidenceAngle::new(state.alpha)?)?;
    let entry_frame = curve.frame(outer.end_xi)?;
    let entry = refract_inward(p, &entry_frame, IncidenceAngle::new(outer.end_angle)?)?;
    let inner = inner_arc(p, curve, outer.end_xi, entry)?;
    let exit_frame = curve.frame(inner.end_xi)?;
    let alpha1 = refract_outward(p, &exit_frame, IncidenceAngle::new(inner.end_angle)?)?;
    Ok(Transit {
        start: state,
        outer,
        entry_angle: entry.value(),
        inner,
        end: BoundaryState::new(inner.end_xi, alpha1.value()),
    })
}

pub fn first_return<C: BoundaryCurve + ?Sized>(
    p: &PhysParams,
    curve: &C,
    state: BoundaryState,
) -> Result<BoundaryState> {
    first_return_detailed(p, curve, state).map(|t| t.end)
}

/// Time reversal of one cycle: from an outgoing state, runs the inner arc backwards and then
/// the outer arc, so that `reverse_return(first_return(x)) = x`.
pub fn reverse_return<C: BoundaryCurve + ?Sized>(
    p: &PhysParams,
    curve: &C,
    state: BoundaryState,
) -> Result<BoundaryState> {
    let frame = curve.frame(state.xi)?;
    let entry = refract_inward(p, &frame, IncidenceAngle::new(-state.alpha)?)?;
    let inner = inner_arc(p, curve, state.xi, entry)?;
    let exit = curve.frame(inner.end_xi)?;
    let launch = refract_outward(p, &exit, IncidenceAngle::new(inner.end_angle)?)?;
    let outer = outer_arc(p, curve, inner.end_xi, launch)?;
    Ok(BoundaryState::new(outer.end_xi, -outer.end_angle))
}

/// `k`-fold composition of the return map.
pub fn iterate_map<C: BoundaryCurve + ?Sized>(
    p: &PhysParams,
    curve: &C,
    state: BoundaryState,
    k: usize,
) -> Result<BoundaryState> {
    let mut s = state;
    for _ in 0..k {
        s = first_return(p, curve, s)?;
    }
    Ok(s)
}

/// Central finite-difference Jacobian of `F^k` in `(xi, alpha)`.
pub fn numerical_jacobian<C: BoundaryCurve + ?Sized>(
    p: &PhysParams,
    curve: &C,
    state: BoundaryState,
    k: usize,
    step: f64,
) -> Result<Matrix2<f64>> {
    let mut jac = Matrix2::zeros();
    for col in 0..2 {
        let shift = |sgn: f64| {
            let mut s = state;
            if col == 0 {
                s.xi += sgn * step;
            } else {
                s.alpha += sgn * step;
            }
            iterate_map(p, curve, s, k)
        };
        let plus = shift(1.0)?;
        let minus = shift(-1.0)?;
        jac[(0, col)] = wrap_pi(plus.xi - minus.xi) / (2.0 * step);
        jac[(1, col)] = (plus.alpha - minus.alpha) / (2.0 * step);
    }
    Ok(jac)
}

/// Density `|gamma'(xi)| sqrt(V_E) cos(alpha)` of the area form preserved by the return map.
///
/// In arc length and tangential momentum `sqrt(V_E) sin(alpha)` the map has unit Jacobian, so
/// `det DF(x) = invariant_density(x) / invariant_density(F(x))` in `(xi, alpha)`.
pub fn invariant_density<C: BoundaryCurve + ?Sized>(
    p: &PhysParams,
    curve: &C,
    state: BoundaryState,
) -> Result<f64> {
    let frame = curve.frame(state.xi)?;
    Ok(frame.speed * p.v_outer(frame.radius).sqrt() * state.alpha.cos())
}

/// Determinant of the return-map Jacobian in arc length and tangential momentum, from
/// central finite differences.
pub fn canonical_jacobian_det<C: BoundaryCurve + ?Sized>(
    p: &PhysParams,
    curve: &C,
    state: BoundaryState,
    step: f64,
) -> Result<f64> {
    let df = numerical_jacobian(p, curve, state, 1, step)?;
    let image = first_return(p, curve, state)?;
    Ok(
        df.determinant() * invariant_density(p, curve, image)?
            / invariant_density(p, curve, state)?,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    TotalReflection,
    Tangency,
    Error,
}

impl Termination {
    pub fn from_error(e: &Error) -> Self {
        match e {
            Error::TotalReflection { .. } => Termination::TotalReflection,
            Error::TangentialLaunch(_) | Error::TangentialEntry(_) | Error::RadialTangency(_) => {
                Termination::Tangency
            }
            _ => Termination::Error,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::TotalReflection => "total_reflection",
            Termination::Tangency => "tangency",
            Termination::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitRecord {
    pub seed: BoundaryState,
    /// Iterates `F(seed), F^2(seed), ...`.
    pub states: Vec<BoundaryState>,
    pub termination: Termination,
    /// `(outer, inner)` physical flight times per step.
    pub flight_times: Vec<(f64, f64)>,
    pub message: Option<String>,
}

pub fn iterate_orbit<C: BoundaryCurve + ?Sized>(
    p: &PhysParams,
    curve: &C,
    seed: BoundaryState,
    n_iters: usize,
) -> OrbitRecord {
    let mut rec = OrbitRecord {
        seed,
        states: Vec::with_capacity(n_iters),
        termination: Termination::Completed,
        flight_times: Vec::with_capacity(n_iters),
        message: None,
    };
    let mut s = seed;
    for _ in 0..n_iters {
        match first_return_detailed(p, curve, s) {
            Ok(t) => {
                s = t.end;
                rec.states.push(s);
                rec.flight_times
                    .push((t.outer.flight_time, t.inner.physical_flight_time));
            }
            Err(e) => {
                rec.termination = Termination::from_error(&e);
                rec.message = Some(e.to_string());
                break;
            }
        }
    }
    rec
}

/// Damped Newton on `F^period(x) - x` with a finite-difference Jacobian.
pub fn refine_periodic_orbit<C: BoundaryCurve + ?Sized>(
    p: &PhysParams,
    curve: &C,
    seed: BoundaryState,
    period: usize,
    tol: f64,
) -> Result<BoundaryState> {
    let residual = |s: BoundaryState| -> Result<Vector2<f64>> {
        let img = iterate_map(p, curve, s, period)?;
        Ok(Vector2::new(wrap_pi(img.xi - s.xi), img.alpha - s.alpha))
    };
    let mut x = seed;
    let mut r = residual(x)?;
    for _ in 0..60 {
        if r.amax() < tol {
            return Ok(x);
        }
        let jac = numerical_jacobian(p, curve, x, period, 1e-7)? - Matrix2::identity();
        let Some(inv) = jac.try_inverse() else {
            return Err(Error::NoConvergence(0));
        };
        let step = -(inv * r);
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-4 {
            let trial = BoundaryState::new(x.xi + lambda * step.x, x.alpha + lambda * step.y);
            if trial.alpha.abs() < FRAC_PI_2 {
                if let Ok(rt) = residual(trial) {
                    if rt.amax() < r.amax() {
                        x = trial;
                        r = rt;
                        accepted = true;
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if r.amax() < tol {
        Ok(x)
    } else {
        Err(Error::NoConvergence(60))
    }
}

/// Scans a seed grid for the smallest `|F^period(x) - x|` and refines the best candidates.
pub fn search_periodic_orbit<C: BoundaryCurve + ?Sized>(
    p: &PhysParams,
    curve: &C,
    period: usize,
    n_xi: usize,
    n_alpha: usize,
    alpha_max: f64,
) -> Option<BoundaryState> {
    let mut candidates: Vec<(f64, BoundaryState)> = Vec::new();
    for i in 0..n_xi {
        for j in 0..n_alpha {
            let s = BoundaryState::new(
                TAU * i as f64 / n_xi as f64,
                -alpha_max + 2.0 * alpha_max * (j as f64 + 0.5) / n_alpha as f64,
            );
            if let Ok(img) = iterate_map(p, curve, s, period) {
                candidates.push((img.distance(&s), s));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    candidates.into_iter().take(20).find_map(|(_, s)| {
        let x = refine_periodic_orbit(p, curve, s, period, 1e-11).ok()?;
        // Reject fixed points of F itself.
        let once = first_return(p, curve, x).ok()?;
        (once.distance(&x) > 1e-4).then_some(x)
    })
}

/// Free-fall map sample: deflection of the exit velocity from the radial direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreeFallSample {
    pub theta: f64,
    pub delta: f64,
    pub clamped: bool,
}

/// Boundary parameter of the point on the ray at polar angle `theta`.
pub fn parameter_on_ray<C: BoundaryCurve + ?Sized>(curve: &C, theta: f64) -> Result<f64> {
    let dir = Vec2::new(theta.cos(), theta.sin());
    let side = |s: f64| cross(dir, curve.point(s));
    let n = 1024;
    let step = TAU / n as f64;
    let mut prev = side(0.0);
    for i in 1..=n {
        let (s0, s1) = ((i - 1) as f64 * step, i as f64 * step);
        let cur = side(s1);
        if prev == 0.0 && curve.point(s0).dot(&dir) > 0.0 {
            return Ok(s0);
        }
        if prev * cur < 0.0 {
            let root = bisect(side, s0, s1, 1e-15, 200)?;
            if curve.point(root).dot(&dir) > 0.0 {
                return Ok(wrap_tau(root));
            }
        }
        prev = cur;
    }
    Err(Error::RadialTangency(theta))
}

/// Launch state of the radial outer arc at polar angle `theta`.
pub fn radial_state<C: BoundaryCurve + ?Sized>(curve: &C, theta: f64) -> Result<BoundaryState> {
    let xi = parameter_on_ray(curve, theta)?;
    let frame = curve.frame(xi)?;
    let radial = frame.position / frame.radius;
    if radial.dot(&frame.outward_normal_unit) < 1e-9 {
        return Err(Error::RadialTangency(theta));
    }
    Ok(BoundaryState::new(xi, frame.outgoing_angle(radial)))
}

/// Deflection `delta(theta)`: the angle from the exit velocity to the outward radial direction
/// after a radial outer arc at `theta` and one inner arc. Total reflection gives `+-pi/2`.
pub fn free_fall_delta<C: BoundaryCurve + ?Sized>(
    p: &PhysParams,
    curve: &C,
    theta: f64,
) -> Result<FreeFallSample> {
    let start = radial_state(curve, theta)?;
    let frame = curve.frame(start.xi)?;
    // The radial outer arc comes back along the same ray.
    let entry = refract_inward(p, &frame, IncidenceAngle::new(-start.alpha)?)?;
    let arc = inner_arc(p, curve, start.xi, entry)?;
    let exit = curve.frame(arc.end_xi)?;
    let radial = exit.position / exit.radius;
    let (delta, clamped) = match refract_outward(p, &exit, IncidenceAngle::new(arc.end_angle)?) {
        Ok(a) => {
            let v = exit.outgoing_direction(a.value());
            let d = cross(v, radial).atan2(v.dot(&radial));
            if d.abs() >= FRAC_PI_2 {
                (FRAC_PI_2.copysign(d), true)
            } else {
                (d, false)
            }
        }
        Err(Error::TotalReflection { .. }) => {
            // Limit of the grazing exit: the velocity tends to the signed tangent.
            let v = exit.tangent_unit * arc.end_angle.signum();
            (FRAC_PI_2.copysign(cross(v, radial)), true)
        }
        Err(e) => return Err(e),
    };
    Ok(FreeFallSample {
        theta,
        delta,
        clamped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BrakeOrbit {
    pub theta: f64,
    pub delta: f64,
    pub state: BoundaryState,
    /// `|F^2(state) - state|`.
    pub closure_error: f64,
}

/// Zeros of the free-fall map in `(0, pi/2)` that close into period-two orbits.
pub fn find_brake_orbits<C: BoundaryCurve + ?Sized>(
    p: &PhysParams,
    curve: &C,
    grid_n: usize,
) -> Vec<BrakeOrbit> {
    let n = grid_n.max(2);
    let thetas: Vec<f64> = (1..n).map(|k| FRAC_PI_2 * k as f64 / n as f64).collect();
    let samples: Vec<Option<FreeFallSample>> = thetas
        .iter()
        .map(|&t| free_fall_delta(p, curve, t).ok())
        .collect();
    let delta = |t: f64| {
        free_fall_delta(p, curve, t)
            .map(|s| s.delta)
            .unwrap_or(f64::NAN)
    };
    let mut out = Vec::new();
    for w in samples.windows(2) {
        let (Some(a), Some(b)) = (w[0], w[1]) else {
            continue;
        };
        if a.delta * b.delta > 0.0 || a.delta.is_nan() || b.delta.is_nan() {
            continue;
        }
        let Ok(theta) = bisect(delta, a.theta, b.theta, 1e-12, 200) else {
            continue;
        };
        let d = delta(theta);
        if !(d.abs() < 1e-9) {
            continue;
        }
        let Ok(state) = radial_state(curve, theta) else {
            continue;
        };
        let Ok(back) = iterate_map(p, curve, state, 2) else {
            continue;
        };
        let closure_error = back.distance(&state);
        // Exits perpendicular to the boundary are the homothetic points, not brake orbits.
        let Ok(once) = first_return(p, curve, state) else {
            continue;
        };
        if once.distance(&state) < 1e-9 {
            continue;
        }
        if closure_error < 1e-6
            && !out
                .iter()
                .any(|o: &BrakeOrbit| (o.theta - theta).abs() < 1e-9)
        {
            out.push(BrakeOrbit {
                theta,
                delta: d,
                state,
                closure_error,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::EllipseBoundary;
    use std::f64::consts::{PI, SQRT_2};

    fn params() -> PhysParams {
        PhysParams::new(2.5, SQRT_2, 0.1, 1.0).unwrap()
    }

    #[test]
    fn homothetic_point_is_fixed() {
        let c = EllipseBoundary::new(0.3).unwrap();
        for xi in [0.0, FRAC_PI_2, PI] {
            let s = BoundaryState::new(xi, 0.0);
            let img = first_return(&params(), &c, s).unwrap();
            assert!(img.distance(&s) < 1e-10, "{img:?}");
        }
        let rec = iterate_orbit(&params(), &c, BoundaryState::new(0.0, 0.0), 5);
        assert_eq!(rec.states.len(), 5);
        assert_eq!(rec.termination, Termination::Completed);
    }

    #[test]
    fn circle_translates_along_invariant_lines() {
        let c = EllipseBoundary::circle();
        let p = params();
        let a = first_return(&p, &c, BoundaryState::new(0.3, 0.25)).unwrap();
        let b = first_return(&p, &c, BoundaryState::new(2.0, 0.25)).unwrap();
        assert!((wrap_pi(a.xi - 0.3) - wrap_pi(b.xi - 2.0)).abs() < 1e-9);
        let rec = iterate_orbit(&p, &c, BoundaryState::new(0.3, 0.25), 100);
        assert_eq!(rec.states.len(), 100);
        assert!(rec.states.iter().all(|s| (s.alpha - 0.25).abs() < 1e-8));
    }

    #[test]
    fn reverse_undoes_forward() {
        let c = EllipseBoundary::new(0.3).unwrap();
        let p = params();
        for (xi, a) in [(0.3, 0.2), (1.0, -0.1), (2.0, 0.4)] {
            let s = BoundaryState::new(xi, a);
            let back = reverse_return(&p, &c, first_return(&p, &c, s).unwrap()).unwrap();
            assert!(back.distance(&s) < 1e-9, "{back:?}");
        }
    }

    #[test]
    fn reflection_equivariance() {
        let c = EllipseBoundary::new(0.3).unwrap();
        let p = params();
        let a = first_return(&p, &c, BoundaryState::new(0.7, 0.2)).unwrap();
        let b = first_return(&p, &c, BoundaryState::new(-0.7, -0.2)).unwrap();
        assert!(wrap_pi(a.xi + b.xi).abs() < 1e-9);
        assert!((a.alpha + b.alpha).abs() < 1e-9);
    }

    #[test]
    fn free_fall_vanishes_on_axes_and_on_circle() {
        let p = PhysParams::new(2.5, SQRT_2, 120.0, 2.0).unwrap();
        let c = EllipseBoundary::new(0.1).unwrap();
        for theta in [0.0, FRAC_PI_2] {
            assert!(free_fall_delta(&p, &c, theta).unwrap().delta.abs() < 1e-10);
        }
        let circle = EllipseBoundary::circle();
        for theta in [0.3, 1.1, 2.5] {
            assert!(free_fall_delta(&p, &circle, theta).unwrap().delta.abs() < 1e-10);
        }
        let d = free_fall_delta(&p, &c, 0.4).unwrap().delta;
        let m = free_fall_delta(&p, &c, -0.4).unwrap().delta;
        assert!((d + m).abs() < 1e-9);
    }
}
