//! Harmonic arcs outside the domain, in closed form.

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::Serialize;

use crate::boundary::{BoundaryCurve, Vec2};
use crate::error::{Error, Result};
use crate::params::{PhysParams, Region};
use crate::refraction::IncidenceAngle;
use crate::roots::bisect;

const GRID: usize = 2048;

/// One arc `y(s) = y0 cos(omega s) + (v0 / omega) sin(omega s)` from the boundary back to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OuterArc {
    pub start_xi: f64,
    /// Launch angle from the outward normal.
    pub start_angle: f64,
    pub y0: Vec2,
    pub v0: Vec2,
    pub omega: f64,
    pub flight_time: f64,
    pub end_xi: f64,
    /// Arrival angle from the inward normal at `end_xi`.
    pub end_angle: f64,
}

impl OuterArc {
    pub fn position(&self, s: f64) -> Vec2 {
        let (sn, cs) = (self.omega * s).sin_cos();
        self.y0 * cs + self.v0 * (sn / self.omega)
    }

    pub fn velocity(&self, s: f64) -> Vec2 {
        let (sn, cs) = (self.omega * s).sin_cos();
        self.v0 * cs - self.y0 * (self.omega * sn)
    }

    /// `|y'|^2 / 2 + omega^2 |y|^2 / 2`, equal to `E` along the arc.
    pub fn energy(&self, s: f64) -> f64 {
        0.5 * self.velocity(s).norm_squared()
            + 0.5 * self.omega * self.omega * self.position(s).norm_squared()
    }

    pub fn end_position(&self) -> Vec2 {
        self.position(self.flight_time)
    }

    pub fn end_velocity(&self) -> Vec2 {
        self.velocity(self.flight_time)
    }
}

/// First return to the boundary of the harmonic arc launched from `gamma(xi0)`.
pub fn outer_arc<C: BoundaryCurve + ?Sized>(
    p: &PhysParams,
    curve: &C,
    xi0: f64,
    alpha0: IncidenceAngle,
) -> Result<OuterArc> {
    let alpha = alpha0.value();
    if (alpha.abs() - FRAC_PI_2).abs() < 1e-9 {
        return Err(Error::TangentialLaunch(alpha));
    }
    let frame = curve.frame(xi0)?;
    let ve = p.potential_at(frame.position, Region::Outer)?;
    if ve <= 0.0 {
        return Err(Error::OutsideHill {
            radius: frame.radius,
            hill_radius: p.hill_radius(),
        });
    }
    let v0 = (2.0 * ve).sqrt() * frame.outgoing_direction(alpha);
    let mut arc = OuterArc {
        start_xi: xi0,
        start_angle: alpha,
        y0: frame.position,
        v0,
        omega: p.omega,
        flight_time: 0.0,
        end_xi: xi0,
        end_angle: 0.0,
    };
    let g = |s: f64| curve.implicit(arc.position(s));
    let period = TAU / p.omega;
    let t = first_crossing(&g, period, GRID, Direction::Inward)?;
    arc.flight_time = t;
    let end = arc.end_position();
    arc.end_xi = curve.parameter_of(end);
    let end_frame = curve.frame(arc.end_xi)?;
    arc.end_angle = end_frame.incoming_angle(arc.end_velocity());
    Ok(arc)
}

/// Half flight time and launch speed of the radial arc from radius `rho`.
pub fn outer_homothetic(p: &PhysParams, rho: f64) -> Result<(f64, f64)> {
    let hill = p.hill_radius();
    if !(rho > 0.0 && rho < hill) {
        return Err(Error::OutsideHill {
            radius: rho,
            hill_radius: hill,
        });
    }
    let half = (p.omega * rho / (2.0 * p.energy).sqrt()).acos() / p.omega;
    let speed = (2.0 * p.energy - p.omega * p.omega * rho * rho).sqrt();
    Ok((half, speed))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    /// `g` starts positive and the crossing takes it to `<= 0`.
    Inward,
    /// `g` starts negative and the crossing takes it to `>= 0`.
    Outward,
}

/// Smallest `s` in `(0, span]` where `g` crosses zero in the given direction, refined to
/// `|ds| < 1e-13`. A zero exactly at `span` is accepted as a return.
pub(crate) fn first_crossing<G: Fn(f64) -> f64>(
    g: &G,
    span: f64,
    n: usize,
    dir: Direction,
) -> Result<f64> {
    let sign = match dir {
        Direction::Inward => 1.0,
        Direction::Outward => -1.0,
    };
    let h = |s: f64| sign * g(s);
    let ds = span / n as f64;
    let refine = |lo: f64, hi: f64| bisect(h, lo, hi, 1e-14, 200);

    if h(ds) <= 0.0 {
        // Crossing before the first grid point: walk down geometrically.
        let mut s = ds;
        while s > 1e-10 {
            let half = 0.5 * s;
            if h(half) > 0.0 {
                return refine(half, s);
            }
            s = half;
        }
        return Err(Error::CrossingNotBracketed(span));
    }
    let mut prev = ds;
    for i in 2..=n {
        let s = i as f64 * ds;
        let v = h(s);
        if v <= 0.0 {
            if v == 0.0 {
                return Ok(s);
            }
            return refine(prev, s);
        }
        prev = s;
    }
    if h(span).abs() < 1e-11 {
        return Ok(span);
    }
    Err(Error::CrossingNotBracketed(span))
}
