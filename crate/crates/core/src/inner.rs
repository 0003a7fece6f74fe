//! Kepler arcs inside the domain, propagated in Levi-Civita coordinates.
//!
//! With `z = w^2` and `d tau / ds = 1 / (2 |z|)`, the zero-energy Kepler motion at level
//! `E + h` becomes the repulsive oscillator `w'' = Omega^2 w` with energy
//! `|w'|^2 / 2 - Omega^2 |w|^2 / 2 = mu`, which is solved in closed form.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::boundary::{BoundaryCurve, BoundaryFrame, Vec2};
use crate::error::{Error, Result};
use crate::outer::{first_crossing, Direction};
use crate::params::{PhysParams, Region};
use crate::refraction::IncidenceAngle;

const GRID: usize = 2048;
const COLLISION_RADIUS: f64 = 1e-8;

/// Frequency and energy of the regularized oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LcParams {
    pub omega: f64,
    pub lc_energy: f64,
}

impl LcParams {
    pub fn new(p: &PhysParams) -> Self {
        Self {
            omega: p.lc_frequency(),
            lc_energy: p.mu,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LcState {
    pub w: Complex64,
    pub w_dot: Complex64,
}

impl LcState {
    pub fn energy(&self, omega: f64) -> f64 {
        0.5 * self.w_dot.norm_sqr() - 0.5 * omega * omega * self.w.norm_sqr()
    }

    /// State after regularized time `tau`.
    pub fn propagate(&self, omega: f64, tau: f64) -> LcState {
        let x = omega * tau;
        let (ch, sh) = (x.cosh(), x.sinh());
        LcState {
            w: self.w * ch + self.w_dot * (sh / omega),
            w_dot: self.w * (omega * sh) + self.w_dot * ch,
        }
    }

    pub fn position(&self) -> Vec2 {
        let z = self.w * self.w;
        Vec2::new(z.re, z.im)
    }

    /// Velocity with respect to physical time.
    pub fn physical_velocity(&self) -> Vec2 {
        let v = self.w * self.w_dot / self.w.norm_sqr();
        Vec2::new(v.re, v.im)
    }
}

/// Regularized initial state for an arc entering at `frame` with angle `alpha_in` from the
/// inward normal. Uses the negative square root of the entry point.
pub fn lc_forward(
    p: &PhysParams,
    frame: &BoundaryFrame,
    alpha_in: IncidenceAngle,
) -> Result<LcState> {
    let alpha = alpha_in.value();
    if (alpha.abs() - FRAC_PI_2).abs() < 1e-9 {
        return Err(Error::TangentialEntry(alpha));
    }
    let vi = p.potential_at(frame.position, Region::Inner)?;
    let w = -Complex64::from_polar(frame.radius.sqrt(), 0.5 * frame.polar_angle);
    let v = (2.0 * vi).sqrt() * frame.incoming_direction(alpha);
    let w_dot = Complex64::new(v.x, v.y) * w.conj();
    Ok(LcState { w, w_dot })
}

/// Propagates until `w^2` first leaves the domain. Returns the exit state and regularized time.
pub fn lc_arc<C: BoundaryCurve + ?Sized>(
    p: &PhysParams,
    curve: &C,
    state0: &LcState,
) -> Result<(LcState, f64)> {
    let lc = LcParams::new(p);
    let omega = lc.omega;
    let g = |tau: f64| {
        let s = state0.propagate(omega, tau);
        curve.implicit(s.position())
    };
    let mut span = 4.0 * (omega * curve.diameter() / (2.0 * lc.lc_energy).sqrt()).asinh() / omega;
    let mut last = Err(Error::CrossingNotBracketed(span));
    for _ in 0..4 {
        last = first_crossing(&g, span, GRID, Direction::Outward);
        if last.is_ok() {
            break;
        }
        span *= 2.0;
    }
    let tau = last?;
    Ok((state0.propagate(omega, tau), tau))
}

/// Exit parameter and the exit angle measured from the outward normal.
pub fn lc_backward<C: BoundaryCurve + ?Sized>(
    p: &PhysParams,
    curve: &C,
    exit: &LcState,
) -> Result<(f64, IncidenceAngle)> {
    let z = exit.position();
    let xi = curve.parameter_of(z);
    if !xi.is_finite() {
        return Err(Error::CurveInversionFailure { x: z.x, y: z.y });
    }
    let frame = curve.frame(xi)?;
    if (frame.position - z).norm() > 1e-8 {
        return Err(Error::CurveInversionFailure { x: z.x, y: z.y });
    }
    let _ = p.potential_at(z, Region::Inner)?;
    let beta = frame.outgoing_angle(exit.physical_velocity());
    Ok((xi, IncidenceAngle::new(beta)?))
}

/// One inner arc with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InnerArc {
    pub start_xi: f64,
    /// Entry angle from the inward normal.
    pub start_angle: f64,
    pub end_xi: f64,
    /// Exit angle from the outward normal.
    pub end_angle: f64,
    pub lc_flight_time: f64,
    pub physical_flight_time: f64,
    /// Smallest distance `|z|` from the attracting centre along the arc.
    pub min_radius: f64,
    pub collision_flag: bool,
    pub lc_start: LcState,
    pub lc_end: LcState,
    pub omega: f64,
}

impl InnerArc {
    pub fn lc_state(&self, tau: f64) -> LcState {
        self.lc_start.propagate(self.omega, tau)
    }

    /// Physical time elapsed after regularized time `tau`.
    pub fn physical_time(&self, tau: f64) -> f64 {
        physical_time(&self.lc_start, self.omega, tau)
    }

    /// Physical exit velocity rescaled to the speed fixed by the energy relation.
    pub fn end_velocity(&self, p: &PhysParams) -> Vec2 {
        let v = self.lc_end.physical_velocity();
        let r = self.lc_end.position().norm();
        v * ((2.0 * p.v_inner(r)).sqrt() / v.norm())
    }
}

/// Coefficients of `|w|^2 = P + Q cosh 2x + R sinh 2x` with `x = Omega tau`, plus
/// `I = Im(a conj c)` where `w = a cosh x + c sinh x`.
fn modulus_coefficients(s0: &LcState, omega: f64) -> (f64, f64, f64, f64) {
    let a = s0.w;
    let c = s0.w_dot / omega;
    let (aa, cc) = (a.norm_sqr(), c.norm_sqr());
    let ac = a * c.conj();
    (0.5 * (aa - cc), 0.5 * (aa + cc), ac.re, ac.im)
}

/// `s(tau) = int_0^tau 2 |w|^2`.
fn physical_time(s0: &LcState, omega: f64, tau: f64) -> f64 {
    let (pp, q, r, _) = modulus_coefficients(s0, omega);
    let x = omega * tau;
    let sh = x.sinh();
    (2.0 / omega) * (pp * x + 0.5 * q * (2.0 * x).sinh() + r * sh * sh)
}

/// Minimum of `|w|^2` over `[0, tau_end]`.
fn min_modulus_sq(s0: &LcState, omega: f64, tau_end: f64) -> f64 {
    let (pp, q, r, im) = modulus_coefficients(s0, omega);
    let end = s0.propagate(omega, tau_end).w.norm_sqr();
    let mut best = s0.w.norm_sqr().min(end);
    if r.abs() < q {
        let x_star = 0.5 * (-r / q).atanh();
        if x_star > 0.0 && x_star < omega * tau_end {
            // Q^2 - R^2 = P^2 + I^2; the second branch avoids cancellation near collision.
            let root = pp.hypot(im);
            let m = if pp >= 0.0 {
                pp + root
            } else {
                im * im / (root - pp)
            };
            best = best.min(m);
        }
    }
    best.max(0.0)
}

pub fn inner_arc<C: BoundaryCurve + ?Sized>(
    p: &PhysParams,
    curve: &C,
    xi0: f64,
    alpha_in: IncidenceAngle,
) -> Result<InnerArc> {
    let frame = curve.frame(xi0)?;
    let start = lc_forward(p, &frame, alpha_in)?;
    let (end, tau) = lc_arc(p, curve, &start)?;
    let (xi1, beta1) = lc_backward(p, curve, &end)?;
    let omega = p.lc_frequency();
    let min_w_sq = min_modulus_sq(&start, omega, tau);
    Ok(InnerArc {
        start_xi: xi0,
        start_angle: alpha_in.value(),
        end_xi: xi1,
        end_angle: beta1.value(),
        lc_flight_time: tau,
        physical_flight_time: physical_time(&start, omega, tau),
        min_radius: min_w_sq,
        collision_flag: min_w_sq.sqrt() < COLLISION_RADIUS,
        lc_start: start,
        lc_end: end,
        omega,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{wrap_pi, EllipseBoundary};
    use std::f64::consts::SQRT_2;

    fn params() -> PhysParams {
        PhysParams::new(2.5, SQRT_2, 0.1, 1.0).unwrap()
    }

    fn ang(a: f64) -> IncidenceAngle {
        IncidenceAngle::new(a).unwrap()
    }

    #[test]
    fn forward_transform_homothetic() {
        let p = params();
        let c = EllipseBoundary::new(0.3).unwrap();
        let f = c.frame(0.0).unwrap();
        let s = lc_forward(&p, &f, ang(0.0)).unwrap();
        assert!((s.w - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((s.w_dot - Complex64::new(7.2f64.sqrt(), 0.0)).norm() < 1e-14);
        let lc = LcParams::new(&p);
        assert!((lc.omega - 5.2f64.sqrt()).abs() < 1e-15);
        assert!((s.energy(lc.omega) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn forward_transform_rotates_with_angle() {
        let p = params();
        let c = EllipseBoundary::new(0.3).unwrap();
        let f = c.frame(0.0).unwrap();
        let s = lc_forward(&p, &f, ang(0.2)).unwrap();
        assert!((s.w_dot.norm() - 7.2f64.sqrt()).abs() < 1e-14);
        let v = s.physical_velocity();
        assert!((f.incoming_angle(v) - 0.2).abs() < 1e-14);
    }

    #[test]
    fn homothetic_arc() {
        let p = params();
        let c = EllipseBoundary::new(0.3).unwrap();
        let arc = inner_arc(&p, &c, 0.0, ang(0.0)).unwrap();
        let omega = 5.2f64.sqrt();
        let expected = 2.0 * (omega / 2f64.sqrt()).asinh() / omega;
        assert!((arc.lc_flight_time - expected).abs() < 1e-12);
        assert!((arc.lc_flight_time - 1.101_34).abs() < 2e-4);
        assert!((arc.lc_end.w - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        assert!(wrap_pi(arc.end_xi).abs() < 1e-10);
        assert!(arc.end_angle.abs() < 1e-10);
        assert!(arc.collision_flag);
        let speed = arc.end_velocity(&p).norm();
        assert!((speed - (2.0 * 3.6f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn physical_time_matches_quadrature() {
        let p = PhysParams::new(2.5, SQRT_2, 0.1, 2.0).unwrap();
        let c = EllipseBoundary::new(0.1).unwrap();
        let arc = inner_arc(&p, &c, 1.2, ang(0.3)).unwrap();
        let n = 20_000;
        let h = arc.lc_flight_time / n as f64;
        let f = |k: usize| 2.0 * arc.lc_state(k as f64 * h).w.norm_sqr();
        // Simpson's rule.
        let mut sum = f(0) + f(n);
        for k in 1..n {
            sum += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k);
        }
        let s = sum * h / 3.0;
        assert!((s - arc.physical_flight_time).abs() < 1e-10);
        assert!(!arc.collision_flag);
        assert!(arc.min_radius > 0.05);
    }

    #[test]
    fn conserved_quantities_along_arc() {
        let p = PhysParams::new(2.5, SQRT_2, 0.1, 2.0).unwrap();
        let c = EllipseBoundary::new(0.1).unwrap();
        let arc = inner_arc(&p, &c, 1.2, ang(0.3)).unwrap();
        let omega = arc.omega;
        let l0 = {
            let z = arc.lc_start.position();
            let v = arc.lc_start.physical_velocity();
            z.x * v.y - z.y * v.x
        };
        let mut prev_arg = arc.lc_start.w.arg();
        for k in 0..=50 {
            let tau = arc.lc_flight_time * k as f64 / 50.0;
            let s = arc.lc_state(tau);
            assert!((s.energy(omega) - p.mu).abs() < 1e-10);
            let z = s.position();
            let v = s.physical_velocity();
            assert!((0.5 * v.norm_squared() - p.mu / z.norm() - (p.energy + p.h)).abs() < 1e-9);
            assert!((z.x * v.y - z.y * v.x - l0).abs() < 1e-9);
            let arg = prev_arg + wrap_pi(s.w.arg() - prev_arg);
            assert!(wrap_pi(z.y.atan2(z.x) - 2.0 * arg).abs() < 1e-9);
            prev_arg = arg;
        }
    }

    #[test]
    fn tangential_entry_rejected() {
        let p = params();
        let f = EllipseBoundary::new(0.3).unwrap().frame(0.5).unwrap();
        assert!(matches!(
            lc_forward(&p, &f, ang(FRAC_PI_2)),
            Err(Error::TangentialEntry(_))
        ));
    }
}
