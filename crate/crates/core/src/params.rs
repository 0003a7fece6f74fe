//! Physical constants of the two-region model and the potentials they define.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which side of the boundary a point is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Inner,
    Outer,
}

/// Energy `E`, harmonic frequency `omega`, inner energy offset `h` and Kepler mass `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    pub energy: f64,
    pub omega: f64,
    pub h: f64,
    pub mu: f64,
}

impl PhysParams {
    pub fn new(energy: f64, omega: f64, h: f64, mu: f64) -> Result<Self> {
        let p = Self {
            energy,
            omega,
            h,
            mu,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("energy", self.energy),
            ("omega", self.omega),
            ("h", self.h),
            ("mu", self.mu),
        ] {
            // Written so that NaN is rejected too.
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::NonPositiveParameter { name, value });
            }
        }
        let two_e = 2.0 * self.energy;
        let omega_sq = self.omega * self.omega;
        if two_e <= omega_sq {
            return Err(Error::HillViolation { two_e, omega_sq });
        }
        Ok(())
    }

    /// Radius of the zero-velocity circle of the outer motion.
    pub fn hill_radius(&self) -> f64 {
        (2.0 * self.energy).sqrt() / self.omega
    }

    /// Frequency of the regularized inner oscillator, `sqrt(2 (E + h))`.
    pub fn lc_frequency(&self) -> f64 {
        (2.0 * (self.energy + self.h)).sqrt()
    }

    /// Outer potential at radius `r`, without the Hill check.
    pub fn v_outer(&self, r: f64) -> f64 {
        self.energy - 0.5 * self.omega * self.omega * r * r
    }

    /// Inner potential at radius `r`, without the origin check.
    pub fn v_inner(&self, r: f64) -> f64 {
        self.energy + self.h + self.mu / r
    }

    pub fn potential_at(&self, z: Vector2<f64>, region: Region) -> Result<f64> {
        let r = z.norm();
        match region {
            Region::Inner => {
                if r == 0.0 {
                    Err(Error::OriginSingularity)
                } else {
                    Ok(self.v_inner(r))
                }
            }
            Region::Outer => {
                let v = self.v_outer(r);
                // Allow rounding noise on the Hill circle itself.
                if v < -1e-12 * self.energy {
                    Err(Error::OutsideHill {
                        radius: r,
                        hill_radius: self.hill_radius(),
                    })
                } else {
                    Ok(v.max(0.0))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn validation_examples() {
        assert!(PhysParams::new(2.5, SQRT2, 0.1, 1.0).is_ok());
        assert!(matches!(
            PhysParams::new(1.0, 2.0, 1.0, 1.0),
            Err(Error::HillViolation { .. })
        ));
        assert!(matches!(
            PhysParams::new(2.5, SQRT2, 0.0, 1.0),
            Err(Error::NonPositiveParameter { name: "h", .. })
        ));
        assert!(PhysParams::new(2.5, SQRT2, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn potentials() {
        let p = PhysParams::new(2.5, SQRT2, 0.1, 1.0).unwrap();
        let z = Vector2::new(1.0, 0.0);
        assert!((p.potential_at(z, Region::Inner).unwrap() - 3.6).abs() < 1e-15);
        assert!((p.potential_at(z, Region::Outer).unwrap() - 1.5).abs() < 1e-15);
        let edge = Vector2::new(0.0, p.hill_radius());
        assert!(p.potential_at(edge, Region::Outer).unwrap().abs() < 1e-14);
        assert_eq!(
            p.potential_at(Vector2::zeros(), Region::Inner),
            Err(Error::OriginSingularity)
        );
        let far = Vector2::new(3.0, 0.0);
        assert!(matches!(
            p.potential_at(far, Region::Outer),
            Err(Error::OutsideHill { .. })
        ));
    }
}
