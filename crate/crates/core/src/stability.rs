//! Linear stability of homothetic fixed points `(xi, 0)` of the return map.
//!
//! The second derivatives of the outer and inner generating functions at a homothetic point
//! split as `d^2 S / d xi0^2 = X0 + eps_X` and `d^2 S / d xi0 d xi1 = -X0`. The quadruple
//! `(E0, eps_E, I0, eps_I)` determines the Jacobian of the return map and its discriminant.

use nalgebra::Matrix2;
use serde::Serialize;

use crate::boundary::{BoundaryCurve, BoundaryFrame, EllipseBoundary, Vec2};
use crate::error::{Error, Result};
use crate::params::PhysParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivQuadruple {
    pub e0: f64,
    pub eps_e: f64,
    pub i0: f64,
    pub eps_i: f64,
}

/// Homothetic points of the ellipse on the major (`Major`, `xi = 0`) or minor
/// (`Minor`, `xi = pi/2`) axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Major,
    Minor,
}

impl Axis {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            0 => Ok(Axis::Major),
            1 => Ok(Axis::Minor),
            _ => Err(Error::InvalidInput(format!(
                "axis must be 0 or 1 (got {i})"
            ))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Axis::Major => 0,
            Axis::Minor => 1,
        }
    }

    pub fn xi(self) -> f64 {
        match self {
            Axis::Major => 0.0,
            Axis::Minor => std::f64::consts::FRAC_PI_2,
        }
    }
}

fn check_homothetic(frame: &BoundaryFrame) -> Result<()> {
    if frame.position.dot(&frame.tangent_unit).abs() > 1e-9 * frame.radius.max(1.0) {
        return Err(Error::NotHomothetic(frame.xi));
    }
    Ok(())
}

/// Potentials `(V_E, V_I)` at radius `rho`.
fn potentials(p: &PhysParams, rho: f64) -> Result<(f64, f64)> {
    let ve = p.v_outer(rho);
    if ve <= 0.0 {
        return Err(Error::OutsideHill {
            radius: rho,
            hill_radius: p.hill_radius(),
        });
    }
    Ok((ve, p.v_inner(rho)))
}

/// Quadruple for an arc-length parametrization at a homothetic point.
pub fn quadruple_general(p: &PhysParams, frame: &BoundaryFrame) -> Result<DerivQuadruple> {
    check_homothetic(frame)?;
    let rho = frame.radius;
    let k = frame.curvature;
    let (ve, vi) = potentials(p, rho)?;
    let (se, si) = (ve.sqrt(), vi.sqrt());
    Ok(DerivQuadruple {
        e0: p.energy / (2.0 * rho * se),
        eps_e: (rho * k - 1.0) * se / rho,
        i0: -p.mu / (4.0 * rho * rho * si),
        eps_i: -(k - 1.0 / rho) * si,
    })
}

/// Quadruple for the ellipse parametrization `(cos xi, b sin xi)` at an axis point.
pub fn quadruple_elliptic(p: &PhysParams, e: f64, axis: Axis) -> Result<DerivQuadruple> {
    let b = EllipseBoundary::new(e)?.semiminor();
    let e2 = e * e;
    Ok(match axis {
        Axis::Major => {
            let (ve, vi) = potentials(p, 1.0)?;
            DerivQuadruple {
                e0: (1.0 - e2) * p.energy / (2.0 * ve.sqrt()),
                eps_e: e2 * ve.sqrt(),
                i0: -(1.0 - e2) * p.mu / (4.0 * vi.sqrt()),
                eps_i: -e2 * vi.sqrt(),
            }
        }
        Axis::Minor => {
            let (ve, vi) = potentials(p, b)?;
            DerivQuadruple {
                e0: p.energy / (2.0 * b * ve.sqrt()),
                eps_e: -(e2 / b) * ve.sqrt(),
                i0: -p.mu / (4.0 * (1.0 - e2) * vi.sqrt()),
                eps_i: (e2 / b) * vi.sqrt(),
            }
        }
    })
}

/// Jacobian of the return map at a homothetic point, from the quadruple and `V_E` there.
pub fn jacobian_df(q: &DerivQuadruple, ve: f64) -> Result<Matrix2<f64>> {
    let DerivQuadruple {
        e0,
        eps_e: ee,
        i0,
        eps_i: ei,
    } = *q;
    if e0 * i0 == 0.0 || !(ve > 0.0) {
        return Err(Error::DegenerateQuadruple);
    }
    let s = ve.sqrt();
    let a11 = 1.0 + (2.0 * ee + ei) / i0 + ee * (ee + ei + i0) / (e0 * i0);
    let a12 = s * (1.0 / i0 + 1.0 / e0) + s * (ee + ei) / (e0 * i0);
    let inner = ee * (ei + i0) + ei * (ei + 2.0 * i0);
    let a21 = (2.0 * ee * (ei + i0) + ei * (ei + 2.0 * i0)) / (i0 * s) + ee * inner / (e0 * i0 * s);
    let a22 = 1.0 + ee / e0 + ei * (2.0 * i0 + ei + e0 + ee) / (e0 * i0);
    Ok(Matrix2::new(a11, a12, a21, a22))
}

/// Rewrites an arc-length Jacobian in a parametrization with local speed `speed = |gamma'|`.
pub fn jacobian_in_parameter(df_arc: &Matrix2<f64>, speed: f64) -> Matrix2<f64> {
    Matrix2::new(
        df_arc[(0, 0)],
        df_arc[(0, 1)] / speed,
        df_arc[(1, 0)] * speed,
        df_arc[(1, 1)],
    )
}

/// The four factors of a discriminant and their product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Discriminant {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub delta: f64,
}

impl Discriminant {
    fn from_factors(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self {
            a,
            b,
            c,
            d,
            delta: a * b * c * d,
        }
    }

    /// Threshold under which the discriminant counts as zero.
    pub fn tolerance(&self) -> f64 {
        1e-10
            * 1f64
                .max(self.a.abs())
                .max(self.b.abs())
                .max(self.c.abs())
                .max(self.d.abs())
    }

    pub fn classification(&self) -> Classification {
        classify(self.delta, self.tolerance())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Center,
    Saddle,
    Degenerate,
}

pub fn classify(delta: f64, tol: f64) -> Classification {
    if delta.abs() < tol {
        Classification::Degenerate
    } else if delta < 0.0 {
        Classification::Center
    } else {
        Classification::Saddle
    }
}

/// Discriminant `trace(DF)^2 - 4` at a homothetic point of any curve.
pub fn discriminant_general(p: &PhysParams, frame: &BoundaryFrame) -> Result<Discriminant> {
    check_homothetic(frame)?;
    let rho = frame.radius;
    let bend = rho * frame.curvature - 1.0;
    let (ve, vi) = potentials(p, rho)?;
    let (se, si) = (ve.sqrt(), vi.sqrt());
    let (en, mu) = (p.energy, p.mu);
    let a = 16.0 / (en * en * mu * mu) * (si - se) * bend;
    let b = en - bend * (si - se) * se;
    let c = -mu * se + 2.0 * rho * b * si;
    let d = mu + 2.0 * rho * bend * si * (si - se);
    Ok(Discriminant::from_factors(a, b, c, d))
}

/// Closed-form discriminant at the major or minor axis point of the ellipse.
pub fn discriminant_elliptic(p: &PhysParams, e: f64, axis: Axis) -> Result<Discriminant> {
    let b = EllipseBoundary::new(e)?.semiminor();
    let e2 = e * e;
    let (en, mu) = (p.energy, p.mu);
    Ok(match axis {
        Axis::Major => {
            let (ve, vi) = potentials(p, 1.0)?;
            let (se, si) = (ve.sqrt(), vi.sqrt());
            let r = e2 / (1.0 - e2);
            let a = -16.0 / (en * en * mu * mu) * r * (se - si);
            let bb = mu + 2.0 * r * si * (si - se);
            let c = en + r * se * (se - si);
            let d = -mu * se + 2.0 * si * c;
            Discriminant::from_factors(a, bb, c, d)
        }
        Axis::Minor => {
            let (ve, vi) = potentials(p, b)?;
            let (se, si) = (ve.sqrt(), vi.sqrt());
            let a = 16.0 * e2 / (en * en * mu * mu) * (se - si);
            let bb = mu - 2.0 * e2 * b * si * (si - se);
            let c = en - e2 * se * (se - si);
            let d = -mu * se + 2.0 * b * si * c;
            Discriminant::from_factors(a, bb, c, d)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityReport {
    pub quadruple: DerivQuadruple,
    /// Jacobian `[[a11, a12], [a21, a22]]` in the curve's own parametrization.
    pub df: [[f64; 2]; 2],
    pub trace: f64,
    pub det: f64,
    pub discriminant: Discriminant,
    pub classification: Classification,
}

fn report(quadruple: DerivQuadruple, df: Matrix2<f64>, disc: Discriminant) -> StabilityReport {
    StabilityReport {
        quadruple,
        df: [[df[(0, 0)], df[(0, 1)]], [df[(1, 0)], df[(1, 1)]]],
        trace: df.trace(),
        det: df.determinant(),
        discriminant: disc,
        classification: disc.classification(),
    }
}

/// Report at a homothetic point of a general curve.
pub fn stability_report<C: BoundaryCurve + ?Sized>(
    p: &PhysParams,
    curve: &C,
    xi: f64,
) -> Result<StabilityReport> {
    let frame = curve.frame(xi)?;
    let q = quadruple_general(p, &frame)?;
    let df_arc = jacobian_df(&q, p.v_outer(frame.radius))?;
    let df = jacobian_in_parameter(&df_arc, frame.speed);
    Ok(report(q, df, discriminant_general(p, &frame)?))
}

/// Report at an axis point of the ellipse using the closed-form elliptic discriminant.
pub fn elliptic_stability_report(p: &PhysParams, e: f64, axis: Axis) -> Result<StabilityReport> {
    let curve = EllipseBoundary::new(e)?;
    let frame = curve.frame(axis.xi())?;
    let q_arc = quadruple_general(p, &frame)?;
    let df_arc = jacobian_df(&q_arc, p.v_outer(frame.radius))?;
    let df = jacobian_in_parameter(&df_arc, frame.speed);
    Ok(report(
        quadruple_elliptic(p, e, axis)?,
        df,
        discriminant_elliptic(p, e, axis)?,
    ))
}

/// Leading coefficient `f2` of `Delta(0) = f2 e^2 + O(e^4)`.
pub fn small_e_coefficient(p: &PhysParams) -> f64 {
    let se = (p.energy - 0.5 * p.omega * p.omega).sqrt();
    let si = (p.energy + p.h + p.mu).sqrt();
    -16.0 * (se - si) * (2.0 * p.energy * si - p.mu * se) / (p.mu * p.energy)
}

/// Leading coefficient `g2` of `Delta(1) = g2 e^2 + O(e^4)`; always `-f2`.
pub fn small_e_coefficient_minor(p: &PhysParams) -> f64 {
    -small_e_coefficient(p)
}

/// `p(mu) = (2E - omega^2) mu^2 / (8 E^2) - mu - E`: for small eccentricity the discriminant
/// signs flip across `h = p(mu)`.
pub fn sign_parabola(energy: f64, omega: f64, mu: f64) -> f64 {
    (2.0 * energy - omega * omega) / (8.0 * energy * energy) * mu * mu - mu - energy
}

/// Limit of `Delta(0)` as `E -> infinity`.
pub fn ell0(b: f64, h: f64, mu: f64, omega: f64) -> f64 {
    let w2 = omega * omega;
    let b2m = b * b - 1.0;
    b2m * (2.0 * h + 2.0 * mu + w2) * (2.0 * b2m * h - 2.0 * mu + b2m * w2) / (b.powi(4) * mu * mu)
}

/// Limit of `Delta(1)` as `E -> infinity`.
pub fn ell1(b: f64, h: f64, mu: f64, omega: f64) -> f64 {
    let w2 = omega * omega;
    let b2m = b * b - 1.0;
    b * b2m
        * (2.0 * b * h + 2.0 * mu + b.powi(3) * w2)
        * (2.0 * b2m * h + b * (2.0 * mu + b * b2m * w2))
        / (mu * mu)
}

/// `ell1 > 0` exactly when `mu` is below this value.
pub fn mu_doublebar(b: f64, h: f64, omega: f64) -> f64 {
    (1.0 - b * b) * (2.0 * h + b * b * omega * omega) / (2.0 * b)
}

/// Lower bound on `mu` for the brake-orbit existence regime.
pub fn mu_bar(energy: f64, omega: f64, e: f64) -> f64 {
    let e2 = e * e;
    e2 * (1.0 - e2).powf(1.5) * (2.0 * energy - e2 * omega * omega) / (2.0 * e2 - 1.0).powi(2)
}

/// Lower bound on `h` for the brake-orbit existence regime.
pub fn h_bar(energy: f64, omega: f64, e: f64, mu: f64) -> f64 {
    let e2 = e * e;
    let b = (1.0 - e2).sqrt();
    let w2b = (1.0 - e2) * omega * omega;
    let linear = -2.0 * energy - (4.0 * e2 - 2.0) * mu / (e2 * b) - w2b;
    let radical =
        ((2.0 * energy - w2b) * (4.0 * mu - e2 * b * (w2b - 2.0 * energy)) / (e2 * b)).sqrt();
    0.25 * (linear + radical)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeThresholds {
    pub parabola_p: f64,
    pub ell0: f64,
    pub ell1: f64,
    pub mu_bar_brake: f64,
    pub h_bar_brake: f64,
    pub mu_doublebar: f64,
}

pub fn regime_thresholds(p: &PhysParams, e: f64) -> Result<RegimeThresholds> {
    let b = EllipseBoundary::new(e)?.semiminor();
    Ok(RegimeThresholds {
        parabola_p: sign_parabola(p.energy, p.omega, p.mu),
        ell0: ell0(b, p.h, p.mu, p.omega),
        ell1: ell1(b, p.h, p.mu, p.omega),
        mu_bar_brake: mu_bar(p.energy, p.omega, e),
        h_bar_brake: h_bar(p.energy, p.omega, e, p.mu),
        mu_doublebar: mu_doublebar(b, p.h, p.omega),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvexityVerdict {
    CertifiedTrue,
    ConditionTrue,
    Unknown,
}

/// Whether every inner Kepler hyperbola meets the ellipse in at most two points.
pub fn convexity_for_hyperbolae(p: &PhysParams, e: f64) -> Result<ConvexityVerdict> {
    let b = EllipseBoundary::new(e)?.semiminor();
    if e < std::f64::consts::FRAC_1_SQRT_2 {
        return Ok(ConvexityVerdict::CertifiedTrue);
    }
    if 2.0 * b * b * ((p.energy + p.h) * b / p.mu + 1.0) > 1.0 {
        return Ok(ConvexityVerdict::ConditionTrue);
    }
    Ok(ConvexityVerdict::Unknown)
}

/// Counts sign changes of the curve's implicit function along the Kepler hyperbola with
/// inner energy `kinetic` (= `E + h`), angular momentum `ell` and pericentre direction `phi0`.
/// The open range of true anomalies is split into `samples` equal steps.
pub fn hyperbola_crossings<C: BoundaryCurve + ?Sized>(
    curve: &C,
    kinetic: f64,
    mu: f64,
    ell: f64,
    phi0: f64,
    samples: usize,
) -> usize {
    let semilatus = ell * ell / mu;
    let ecc = (1.0 + 2.0 * kinetic * ell * ell / (mu * mu)).sqrt();
    let u_max = (-1.0 / ecc).acos() * (1.0 - 1e-9);
    let level = |u: f64| {
        let r = semilatus / (1.0 + ecc * u.cos());
        let phi = phi0 + u;
        curve.implicit(Vec2::new(r * phi.cos(), r * phi.sin()))
    };
    let n = samples.max(2);
    let mut prev = level(-u_max);
    let mut count = 0;
    for k in 1..=n {
        let cur = level(-u_max + 2.0 * u_max * k as f64 / n as f64);
        if (prev > 0.0) != (cur > 0.0) {
            count += 1;
        }
        prev = cur;
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BrakeDerivatives {
    pub delta_prime_0: f64,
    pub delta_prime_half_pi: f64,
    /// Variant of `delta_prime_0` that omits the boundary speed `b` at `xi = 0`; kept for
    /// comparison, it disagrees with the simulated free-fall map.
    pub delta_prime_0_unit_speed: f64,
}

/// Derivatives of the free-fall map at `theta = 0` and `theta = pi/2` for the ellipse.
pub fn brake_derivatives(p: &PhysParams, e: f64) -> Result<BrakeDerivatives> {
    let b = EllipseBoundary::new(e)?.semiminor();
    let q0 = quadruple_elliptic(p, e, Axis::Major)?;
    let q1 = quadruple_elliptic(p, e, Axis::Minor)?;
    let s0 = p.v_outer(1.0).sqrt();
    let s1 = p.v_outer(b).sqrt();
    let b2 = b * b;
    let d0 =
        -(s0 * b2 - q0.eps_i - s0) * (s0 * b2 - 2.0 * q0.i0 - q0.eps_i - s0) / (q0.i0 * b2 * s0);
    let d0_unit = (s0 + q0.eps_i * b - s0 * b2) * (s0 * b2 - (2.0 * q0.i0 + q0.eps_i) * b - s0)
        / (b * q0.i0 * s0);
    let d1 = -(s1 * b2 + q1.eps_i * b - s1) * (s1 * b2 + (2.0 * q1.i0 + q1.eps_i) * b - s1)
        / (b * q1.i0 * s1);
    Ok(BrakeDerivatives {
        delta_prime_0: d0,
        delta_prime_half_pi: d1,
        delta_prime_0_unit_speed: d0_unit,
    })
}
