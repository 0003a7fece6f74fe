//! Refraction law at the boundary: `sqrt(V_E) sin(alpha_E) = sqrt(V_I) sin(alpha_I)`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryFrame;
use crate::error::{Error, Result};
use crate::params::{PhysParams, Region};

/// Signed angle between a velocity and a boundary normal, in `[-pi/2, pi/2]`.
///
/// Velocities leaving the domain are measured from the outward normal, velocities entering it
/// from the inward normal. The sign is that of the tangential component.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IncidenceAngle(f64);

impl IncidenceAngle {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value.abs() <= FRAC_PI_2 + 1e-12 {
            Ok(Self(value.clamp(-FRAC_PI_2, FRAC_PI_2)))
        } else {
            Err(Error::InvalidInput(format!(
                "incidence angle {value} outside [-pi/2, pi/2]"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Potentials on both sides of the boundary at the frame position.
pub fn side_potentials(p: &PhysParams, frame: &BoundaryFrame) -> Result<(f64, f64)> {
    let ve = p.potential_at(frame.position, Region::Outer)?;
    let vi = p.potential_at(frame.position, Region::Inner)?;
    Ok((ve, vi))
}

/// Conserved quantity across the interface.
pub fn tangential_momentum(potential: f64, angle: f64) -> f64 {
    potential.sqrt() * angle.sin()
}

/// Largest inner angle that still refracts out of the domain.
pub fn critical_angle(p: &PhysParams, frame: &BoundaryFrame) -> Result<f64> {
    let (ve, vi) = side_potentials(p, frame)?;
    Ok((ve / vi).sqrt().asin())
}

pub fn refract_inward(
    p: &PhysParams,
    frame: &BoundaryFrame,
    alpha_e: IncidenceAngle,
) -> Result<IncidenceAngle> {
    let (ve, vi) = side_potentials(p, frame)?;
    let s = (ve / vi).sqrt() * alpha_e.value().sin();
    IncidenceAngle::new(s.asin())
}

pub fn refract_outward(
    p: &PhysParams,
    frame: &BoundaryFrame,
    alpha_i: IncidenceAngle,
) -> Result<IncidenceAngle> {
    let (ve, vi) = side_potentials(p, frame)?;
    let sin_i = alpha_i.value().sin();
    let ratio = if sin_i == 0.0 {
        0.0
    } else {
        (vi / ve).sqrt() * sin_i
    };
    if !ratio.is_finite() || ratio.abs() > 1.0 + 1e-12 {
        return Err(Error::TotalReflection {
            sin_ratio: ratio,
            point: frame.position,
        });
    }
    IncidenceAngle::new(ratio.clamp(-1.0, 1.0).asin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{BoundaryCurve, EllipseBoundary};
    use std::f64::consts::{PI, SQRT_2};

    fn setup() -> (PhysParams, BoundaryFrame) {
        let p = PhysParams::new(2.5, SQRT_2, 0.1, 1.0).unwrap();
        let f = EllipseBoundary::new(0.3).unwrap().frame(0.0).unwrap();
        (p, f)
    }

    #[test]
    fn critical_angle_value() {
        let (p, f) = setup();
        let crit = critical_angle(&p, &f).unwrap();
        assert!((crit - (1.5f64 / 3.6).sqrt().asin()).abs() < 1e-15);
        assert!((crit - 0.701_53).abs() < 2e-4);
        let hill = PhysParams::new(2.5, SQRT_2, 1e9, 1.0).unwrap();
        assert!(critical_angle(&hill, &f).unwrap() < 1e-4);
    }

    #[test]
    fn inward_and_back() {
        let (p, f) = setup();
        let a = IncidenceAngle::new(PI / 6.0).unwrap();
        let i = refract_inward(&p, &f, a).unwrap();
        assert!((i.value() - ((1.5f64 / 3.6).sqrt() * 0.5).asin()).abs() < 1e-15);
        assert!((i.value() - 0.328_67).abs() < 2e-4);
        let neg = refract_inward(&p, &f, IncidenceAngle::new(-PI / 6.0).unwrap()).unwrap();
        assert!((neg.value() + i.value()).abs() < 1e-15);
        let back = refract_outward(&p, &f, i).unwrap();
        assert!((back.value() - PI / 6.0).abs() < 1e-12);
        let zero = IncidenceAngle::new(0.0).unwrap();
        assert_eq!(refract_inward(&p, &f, zero).unwrap().value(), 0.0);
        assert_eq!(refract_outward(&p, &f, zero).unwrap().value(), 0.0);
    }

    #[test]
    fn total_reflection_and_grazing_limit() {
        let (p, f) = setup();
        let crit = critical_angle(&p, &f).unwrap();
        let beyond = IncidenceAngle::new(crit + 0.1).unwrap();
        assert!(matches!(
            refract_outward(&p, &f, beyond),
            Err(Error::TotalReflection { .. })
        ));
        let at = refract_outward(&p, &f, IncidenceAngle::new(crit).unwrap()).unwrap();
        assert!((at.value() - PI / 2.0).abs() < 1e-6);
    }

    #[test]
    fn monotone_and_bounded() {
        let (p, f) = setup();
        let crit = critical_angle(&p, &f).unwrap();
        let mut prev = -f64::INFINITY;
        for k in 0..=200 {
            let a = -PI / 2.0 + PI * k as f64 / 200.0;
            let i = refract_inward(&p, &f, IncidenceAngle::new(a).unwrap())
                .unwrap()
                .value();
            assert!(i > prev);
            assert!(i.abs() <= crit + 1e-15);
            prev = i;
        }
    }
}
