//! JSON run configuration and its merge with command-line flags.

use std::f64::consts::SQRT_2;
use std::path::Path;

use anyhow::Context;
use serde::Deserialize;

use refraction_billiards::boundary::{Boundary, EllipseBoundary, PolarCurve};
use refraction_billiards::scan::{Param, ParamPoint};
use refraction_billiards::PhysParams;

use crate::InvalidConfig;

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub params: ParamsConfig,
    pub boundary: Option<BoundaryConfig>,
    #[serde(default)]
    pub orbit: OrbitConfig,
    #[serde(default)]
    pub portrait: PortraitConfig,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub bifurcate: BifurcateConfig,
    #[serde(default)]
    pub freefall: FreefallConfig,
    #[serde(default)]
    pub brake: BrakeConfig,
    #[serde(default)]
    pub stability: StabilityConfig,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(alias = "E")]
    pub energy: Option<f64>,
    pub omega: Option<f64>,
    pub h: Option<f64>,
    pub mu: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryConfig {
    Ellipse {
        eccentricity: f64,
    },
    Custom {
        name: String,
        r0: Option<f64>,
        amplitude: Option<f64>,
        harmonic: Option<u32>,
    },
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitConfig {
    pub xi: Option<f64>,
    pub alpha: Option<f64>,
    pub iterations: Option<usize>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortraitConfig {
    pub n_xi: Option<usize>,
    pub n_alpha: Option<usize>,
    pub alpha_max: Option<f64>,
    pub iterations: Option<usize>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub x_param: Option<Param>,
    pub y_param: Option<Param>,
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BifurcateConfig {
    pub axis: Option<u8>,
    pub param: Option<Param>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreefallConfig {
    pub theta_samples: Option<usize>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BrakeConfig {
    pub grid: Option<usize>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityConfig {
    pub axis: Option<u8>,
    pub xi: Option<f64>,
}

pub const DEFAULT_PARAMS: PhysParams = PhysParams {
    energy: 2.5,
    omega: SQRT_2,
    h: 0.1,
    mu: 1.0,
};
pub const DEFAULT_ECCENTRICITY: f64 = 0.1;

impl RunConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        let cfg = serde_json::from_str(&text)
            .map_err(|e| InvalidConfig(format!("{}: {e}", path.display())))
            .context("parsing configuration")?;
        Ok(cfg)
    }

    /// Physical parameters after applying flag overrides; validated.
    pub fn params(&self, flags: &ParamsConfig) -> anyhow::Result<PhysParams> {
        let pick =
            |flag: Option<f64>, file: Option<f64>, default: f64| flag.or(file).unwrap_or(default);
        let p = PhysParams {
            energy: pick(flags.energy, self.params.energy, DEFAULT_PARAMS.energy),
            omega: pick(flags.omega, self.params.omega, DEFAULT_PARAMS.omega),
            h: pick(flags.h, self.params.h, DEFAULT_PARAMS.h),
            mu: pick(flags.mu, self.params.mu, DEFAULT_PARAMS.mu),
        };
        p.validate().map_err(|e| InvalidConfig(e.to_string()))?;
        Ok(p)
    }

    /// Boundary after applying an `--ecc` override, which always selects an ellipse.
    pub fn boundary(&self, ecc: Option<f64>) -> anyhow::Result<Boundary> {
        let cfg = match (ecc, &self.boundary) {
            (Some(e), _) => BoundaryConfig::Ellipse { eccentricity: e },
            (None, Some(b)) => b.clone(),
            (None, None) => BoundaryConfig::Ellipse {
                eccentricity: DEFAULT_ECCENTRICITY,
            },
        };
        let built = match cfg {
            BoundaryConfig::Ellipse { eccentricity } => {
                EllipseBoundary::new(eccentricity).map(Boundary::Ellipse)
            }
            BoundaryConfig::Custom {
                name,
                r0,
                amplitude,
                harmonic,
            } => match name.as_str() {
                "polar" => PolarCurve::new(
                    r0.unwrap_or(1.0),
                    amplitude.unwrap_or(0.0),
                    harmonic.unwrap_or(4),
                )
                .map(Boundary::Polar),
                "circle" => Ok(Boundary::Ellipse(EllipseBoundary::circle())),
                other => {
                    return Err(InvalidConfig(format!("unknown custom boundary `{other}`")).into())
                }
            },
        };
        Ok(built.map_err(|e| InvalidConfig(e.to_string()))?)
    }

    /// Parameters plus eccentricity for commands that need the ellipse closed forms.
    pub fn ellipse_point(
        &self,
        flags: &ParamsConfig,
        ecc: Option<f64>,
    ) -> anyhow::Result<ParamPoint> {
        let p = self.params(flags)?;
        let Boundary::Ellipse(ell) = self.boundary(ecc)? else {
            return Err(InvalidConfig("this command needs an elliptic boundary".into()).into());
        };
        Ok(ParamPoint {
            energy: p.energy,
            omega: p.omega,
            h: p.h,
            mu: p.mu,
            e: ell.eccentricity(),
        })
    }
}
