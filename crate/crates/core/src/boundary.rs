//! Closed boundary curves, their local frames and homothetic directions.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::roots::bisect;

pub type Vec2 = Vector2<f64>;

/// 2D cross product `a.x b.y - a.y b.x`.
pub fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Reduces an angle to `[0, 2 pi)`.
pub fn wrap_tau(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Reduces an angle to `(-pi, pi]`.
pub fn wrap_pi(x: f64) -> f64 {
    let r = wrap_tau(x);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// A closed regular C² curve around the origin, parametrized over `[0, 2 pi)`.
///
/// `implicit` must be negative inside the enclosed domain, zero on the curve and
/// positive outside; `parameter_of` inverts `point` for points on the curve.
pub trait BoundaryCurve: Send + Sync {
    fn point(&self, xi: f64) -> Vec2;
    fn velocity(&self, xi: f64) -> Vec2;
    fn acceleration(&self, xi: f64) -> Vec2;
    fn implicit(&self, z: Vec2) -> f64;
    fn parameter_of(&self, z: Vec2) -> f64;
    /// Upper bound on the distance between two boundary points.
    fn diameter(&self) -> f64;

    fn frame(&self, xi: f64) -> Result<BoundaryFrame> {
        BoundaryFrame::new(self, xi)
    }
}

/// Ellipse `(cos xi, b sin xi)` with unit semimajor axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipseBoundary {
    eccentricity: f64,
    b: f64,
}

impl EllipseBoundary {
    pub fn new(eccentricity: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&eccentricity) {
            return Err(Error::InvalidEccentricity(eccentricity));
        }
        Ok(Self {
            eccentricity,
            b: (1.0 - eccentricity * eccentricity).sqrt(),
        })
    }

    pub fn circle() -> Self {
        Self {
            eccentricity: 0.0,
            b: 1.0,
        }
    }

    pub fn eccentricity(&self) -> f64 {
        self.eccentricity
    }

    pub fn semiminor(&self) -> f64 {
        self.b
    }
}

impl BoundaryCurve for EllipseBoundary {
    fn point(&self, xi: f64) -> Vec2 {
        Vec2::new(xi.cos(), self.b * xi.sin())
    }

    fn velocity(&self, xi: f64) -> Vec2 {
        Vec2::new(-xi.sin(), self.b * xi.cos())
    }

    fn acceleration(&self, xi: f64) -> Vec2 {
        Vec2::new(-xi.cos(), -self.b * xi.sin())
    }

    fn implicit(&self, z: Vec2) -> f64 {
        z.x * z.x + z.y * z.y / (self.b * self.b) - 1.0
    }

    fn parameter_of(&self, z: Vec2) -> f64 {
        wrap_tau((z.y / self.b).atan2(z.x))
    }

    fn diameter(&self) -> f64 {
        2.0
    }
}

/// Star-shaped curve `r(theta) = r0 (1 + amplitude cos(harmonic theta))`, parametrized by the
/// polar angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarCurve {
    pub r0: f64,
    pub amplitude: f64,
    pub harmonic: u32,
}

impl PolarCurve {
    pub fn new(r0: f64, amplitude: f64, harmonic: u32) -> Result<Self> {
        if !(r0 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "polar curve radius {r0} must be positive"
            )));
        }
        // Keeps the radius positive and the curve regular.
        if !(amplitude.abs() < 1.0) {
            return Err(Error::InvalidInput(format!(
                "polar curve amplitude {amplitude} must satisfy |a| < 1"
            )));
        }
        Ok(Self {
            r0,
            amplitude,
            harmonic,
        })
    }

    fn radius_derivs(&self, theta: f64) -> (f64, f64, f64) {
        let m = self.harmonic as f64;
        let (s, c) = (m * theta).sin_cos();
        (
            self.r0 * (1.0 + self.amplitude * c),
            -self.r0 * self.amplitude * m * s,
            -self.r0 * self.amplitude * m * m * c,
        )
    }
}

impl BoundaryCurve for PolarCurve {
    fn point(&self, xi: f64) -> Vec2 {
        let (r, _, _) = self.radius_derivs(xi);
        r * Vec2::new(xi.cos(), xi.sin())
    }

    fn velocity(&self, xi: f64) -> Vec2 {
        let (r, dr, _) = self.radius_derivs(xi);
        let (s, c) = xi.sin_cos();
        dr * Vec2::new(c, s) + r * Vec2::new(-s, c)
    }

    fn acceleration(&self, xi: f64) -> Vec2 {
        let (r, dr, ddr) = self.radius_derivs(xi);
        let (s, c) = xi.sin_cos();
        (ddr - r) * Vec2::new(c, s) + 2.0 * dr * Vec2::new(-s, c)
    }

    fn implicit(&self, z: Vec2) -> f64 {
        let (r, _, _) = self.radius_derivs(z.y.atan2(z.x));
        z.norm() - r
    }

    fn parameter_of(&self, z: Vec2) -> f64 {
        wrap_tau(z.y.atan2(z.x))
    }

    fn diameter(&self) -> f64 {
        2.0 * self.r0 * (1.0 + self.amplitude.abs())
    }
}

/// Boundary chosen at run time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Boundary {
    Ellipse(EllipseBoundary),
    Polar(PolarCurve),
}

impl BoundaryCurve for Boundary {
    fn point(&self, xi: f64) -> Vec2 {
        match self {
            Boundary::Ellipse(c) => c.point(xi),
            Boundary::Polar(c) => c.point(xi),
        }
    }

    fn velocity(&self, xi: f64) -> Vec2 {
        match self {
            Boundary::Ellipse(c) => c.velocity(xi),
            Boundary::Polar(c) => c.velocity(xi),
        }
    }

    fn acceleration(&self, xi: f64) -> Vec2 {
        match self {
            Boundary::Ellipse(c) => c.acceleration(xi),
            Boundary::Polar(c) => c.acceleration(xi),
        }
    }

    fn implicit(&self, z: Vec2) -> f64 {
        match self {
            Boundary::Ellipse(c) => c.implicit(z),
            Boundary::Polar(c) => c.implicit(z),
        }
    }

    fn parameter_of(&self, z: Vec2) -> f64 {
        match self {
            Boundary::Ellipse(c) => c.parameter_of(z),
            Boundary::Polar(c) => c.parameter_of(z),
        }
    }

    fn diameter(&self) -> f64 {
        match self {
            Boundary::Ellipse(c) => c.diameter(),
            Boundary::Polar(c) => c.diameter(),
        }
    }
}

/// Local geometry of the boundary at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryFrame {
    pub xi: f64,
    pub position: Vec2,
    pub tangent_unit: Vec2,
    pub outward_normal_unit: Vec2,
    /// Signed curvature, positive when the curve bends toward the origin side.
    pub curvature: f64,
    pub radius: f64,
    pub polar_angle: f64,
    pub speed: f64,
}

impl BoundaryFrame {
    pub fn new<C: BoundaryCurve + ?Sized>(curve: &C, xi: f64) -> Result<Self> {
        let position = curve.point(xi);
        let vel = curve.velocity(xi);
        let speed = vel.norm();
        if speed < 1e-12 {
            return Err(Error::DegenerateVelocity(xi));
        }
        let tangent_unit = vel / speed;
        let mut normal = Vec2::new(tangent_unit.y, -tangent_unit.x);
        if normal.dot(&position) < 0.0 {
            normal = -normal;
        }
        let curvature = -curve.acceleration(xi).dot(&normal) / (speed * speed);
        Ok(Self {
            xi,
            position,
            tangent_unit,
            outward_normal_unit: normal,
            curvature,
            radius: position.norm(),
            polar_angle: position.y.atan2(position.x),
            speed,
        })
    }

    /// Unit direction at signed angle `alpha` from the outward normal.
    pub fn outgoing_direction(&self, alpha: f64) -> Vec2 {
        alpha.cos() * self.outward_normal_unit + alpha.sin() * self.tangent_unit
    }

    /// Unit direction at signed angle `alpha` from the inward normal.
    pub fn incoming_direction(&self, alpha: f64) -> Vec2 {
        -alpha.cos() * self.outward_normal_unit + alpha.sin() * self.tangent_unit
    }

    /// Signed angle of `v` from the outward normal.
    pub fn outgoing_angle(&self, v: Vec2) -> f64 {
        v.dot(&self.tangent_unit)
            .atan2(v.dot(&self.outward_normal_unit))
    }

    /// Signed angle of `v` from the inward normal.
    pub fn incoming_angle(&self, v: Vec2) -> f64 {
        v.dot(&self.tangent_unit)
            .atan2(-v.dot(&self.outward_normal_unit))
    }
}

/// Signed sine of the angle between `gamma(xi)` and its velocity; zero means the radius is
/// tangent to the curve.
pub fn radial_transversality<C: BoundaryCurve + ?Sized>(curve: &C, xi: f64) -> f64 {
    let g = curve.point(xi);
    let v = curve.velocity(xi);
    cross(g, v) / (g.norm() * v.norm())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomotheticDirections {
    /// Every boundary point is homothetic (the circle); `xis` then holds samples.
    pub continuum: bool,
    pub xis: Vec<f64>,
}

const HOMOTHETIC_SAMPLES: usize = 4096;

/// Parameters where the radius is orthogonal to the boundary and the ray through the point
/// meets the boundary only there.
pub fn homothetic_directions<C: BoundaryCurve + ?Sized>(
    curve: &C,
    tol: f64,
) -> HomotheticDirections {
    let n = HOMOTHETIC_SAMPLES;
    let step = TAU / n as f64;
    let g = |xi: f64| {
        let p = curve.point(xi);
        let v = curve.velocity(xi);
        p.dot(&v) / (p.norm() * v.norm())
    };
    let xs: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
    let gs: Vec<f64> = xs.iter().map(|&x| g(x)).collect();

    if gs.iter().all(|v| v.abs() <= tol) {
        let xis = (0..8).map(|k| k as f64 * TAU / 8.0).collect();
        return HomotheticDirections {
            continuum: true,
            xis,
        };
    }

    let mut roots: Vec<f64> = Vec::new();
    for i in 0..n {
        let (a, b) = (gs[i], gs[i + 1]);
        if a == 0.0 {
            roots.push(xs[i]);
        } else if a * b < 0.0 {
            if let Ok(r) = bisect(g, xs[i], xs[i + 1], 1e-15, 200) {
                roots.push(r);
            }
        }
    }
    let mut out: Vec<f64> = Vec::new();
    for r in roots.into_iter().map(wrap_tau) {
        if g(r).abs() > tol.max(1e-12) {
            continue;
        }
        if out.iter().any(|&q| wrap_pi(q - r).abs() < 1e-8) {
            continue;
        }
        if ray_is_clear(curve, r) {
            out.push(r);
        }
    }
    out.sort_by(f64::total_cmp);
    HomotheticDirections {
        continuum: false,
        xis: out,
    }
}

/// Checks that the ray through `gamma(xi)` crosses the boundary only at that point.
fn ray_is_clear<C: BoundaryCurve + ?Sized>(curve: &C, xi: f64) -> bool {
    let target = curve.point(xi);
    let dir = target / target.norm();
    let n = HOMOTHETIC_SAMPLES;
    let step = TAU / n as f64;
    let side = |s: f64| cross(dir, curve.point(s));
    let mut prev = side(0.0);
    for i in 1..=n {
        let (s0, s1) = ((i - 1) as f64 * step, i as f64 * step);
        let cur = side(s1);
        if prev * cur <= 0.0 {
            let root = if prev == 0.0 {
                s0
            } else if cur == 0.0 {
                s1
            } else {
                bisect(side, s0, s1, 1e-15, 200).unwrap_or(s0)
            };
            let p = curve.point(root);
            let t = p.dot(&dir) / target.norm();
            if t > 0.0 && (t - 1.0).abs() > 1e-10 && (p - t * target).norm() < 1e-8 {
                return false;
            }
        }
        prev = cur;
    }
    true
}
