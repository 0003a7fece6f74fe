//! Parameter sweeps: discriminant sign grids, bifurcation roots, phase portraits and
//! free-fall profiles. Work items are independent and results keep input order, so output
//! does not depend on the number of threads.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryCurve;
use crate::error::{Error, Result};
use crate::params::PhysParams;
use crate::return_map::{
    free_fall_delta, iterate_orbit, BoundaryState, FreeFallSample, OrbitRecord,
};
use crate::roots::brent;
use crate::stability::{discriminant_elliptic, Axis, Classification};

/// A scannable model parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Param {
    #[serde(rename = "E")]
    Energy,
    #[serde(rename = "omega")]
    Omega,
    #[serde(rename = "h")]
    H,
    #[serde(rename = "mu")]
    Mu,
    #[serde(rename = "e")]
    Eccentricity,
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "E" | "energy" => Ok(Param::Energy),
            "omega" => Ok(Param::Omega),
            "h" => Ok(Param::H),
            "mu" => Ok(Param::Mu),
            "e" | "ecc" | "eccentricity" => Ok(Param::Eccentricity),
            other => Err(Error::InvalidInput(format!("unknown parameter `{other}`"))),
        }
    }
}

/// Physical parameters plus the ellipse eccentricity, not yet validated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint {
    pub energy: f64,
    pub omega: f64,
    pub h: f64,
    pub mu: f64,
    pub e: f64,
}

impl ParamPoint {
    pub fn with(mut self, param: Param, value: f64) -> Self {
        match param {
            Param::Energy => self.energy = value,
            Param::Omega => self.omega = value,
            Param::H => self.h = value,
            Param::Mu => self.mu = value,
            Param::Eccentricity => self.e = value,
        }
        self
    }

    pub fn params(&self) -> Result<PhysParams> {
        PhysParams::new(self.energy, self.omega, self.h, self.mu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_param: Param,
    pub y_param: Param,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    pub base: ParamPoint,
}

/// One cell of a discriminant grid. Inadmissible cells carry `None` and zero signs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridCell {
    pub x: f64,
    pub y: f64,
    pub delta0: Option<f64>,
    pub delta1: Option<f64>,
    pub sign0: i8,
    pub sign1: i8,
}

fn sign_of(c: Classification) -> i8 {
    match c {
        Classification::Center => -1,
        Classification::Saddle => 1,
        Classification::Degenerate => 0,
    }
}

/// Runs `f` on a pool with `threads` workers (all cores when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

pub fn delta_sign_grid(spec: &GridSpec, threads: Option<usize>) -> Result<Vec<GridCell>> {
    if spec.nx < 2 || spec.ny < 2 {
        return Err(Error::InvalidInput(
            "grid resolutions must be at least 2".into(),
        ));
    }
    if spec.x_param == spec.y_param {
        return Err(Error::InvalidInput(
            "grid axes must be different parameters".into(),
        ));
    }
    let xs = linspace(spec.x_range.0, spec.x_range.1, spec.nx);
    let ys = linspace(spec.y_range.0, spec.y_range.1, spec.ny);
    let cells: Vec<(f64, f64)> = ys
        .iter()
        .flat_map(|&y| xs.iter().map(move |&x| (x, y)))
        .collect();
    with_threads(threads, || {
        cells
            .par_iter()
            .map(|&(x, y)| {
                let pt = spec.base.with(spec.x_param, x).with(spec.y_param, y);
                let eval = |axis| {
                    pt.params()
                        .and_then(|p| discriminant_elliptic(&p, pt.e, axis))
                        .ok()
                };
                let (d0, d1) = (eval(Axis::Major), eval(Axis::Minor));
                GridCell {
                    x,
                    y,
                    delta0: d0.map(|d| d.delta),
                    delta1: d1.map(|d| d.delta),
                    sign0: d0.map_or(0, |d| sign_of(d.classification())),
                    sign1: d1.map_or(0, |d| sign_of(d.classification())),
                }
            })
            .collect()
    })
}

/// Root of the elliptic discriminant at `axis` as `param` varies over `[lo, hi]`.
pub fn bifurcation_root(
    base: &ParamPoint,
    axis: Axis,
    param: Param,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    let f = |v: f64| {
        let pt = base.with(param, v);
        pt.params()
            .and_then(|p| discriminant_elliptic(&p, pt.e, axis))
            .map(|d| d.delta)
            .unwrap_or(f64::NAN)
    };
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo * fhi < 0.0) {
        return Err(Error::NoSignChange { lo, hi });
    }
    brent(f, lo, hi, 0.0, 1e-13, 500)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortraitSpec {
    pub n_xi: usize,
    pub n_alpha: usize,
    pub alpha_max: f64,
    pub iterations: usize,
}

impl Default for PortraitSpec {
    fn default() -> Self {
        Self {
            n_xi: 24,
            n_alpha: 24,
            alpha_max: 0.6,
            iterations: 500,
        }
    }
}

impl PortraitSpec {
    pub fn seeds(&self) -> Vec<BoundaryState> {
        let alphas = linspace(-self.alpha_max, self.alpha_max, self.n_alpha);
        (0..self.n_xi)
            .flat_map(|i| {
                let xi = TAU * i as f64 / self.n_xi as f64;
                alphas.iter().map(move |&a| BoundaryState::new(xi, a))
            })
            .collect()
    }
}

pub fn phase_portrait<C: BoundaryCurve + ?Sized>(
    p: &PhysParams,
    curve: &C,
    spec: &PortraitSpec,
    threads: Option<usize>,
) -> Result<Vec<OrbitRecord>> {
    if !(spec.alpha_max >= 0.0 && spec.alpha_max < FRAC_PI_2) {
        return Err(Error::InvalidInput(format!(
            "alpha_max {} must lie in [0, pi/2)",
            spec.alpha_max
        )));
    }
    let seeds = spec.seeds();
    orbits(p, curve, &seeds, spec.iterations, threads)
}

pub fn orbits<C: BoundaryCurve + ?Sized>(
    p: &PhysParams,
    curve: &C,
    seeds: &[BoundaryState],
    iterations: usize,
    threads: Option<usize>,
) -> Result<Vec<OrbitRecord>> {
    with_threads(threads, || {
        seeds
            .par_iter()
            .map(|&s| iterate_orbit(p, curve, s, iterations))
            .collect()
    })
}

/// Free-fall map on a uniform grid of `n_samples` polar angles over `[0, pi/2]`.
pub fn freefall_profile<C: BoundaryCurve + ?Sized>(
    p: &PhysParams,
    curve: &C,
    n_samples: usize,
    threads: Option<usize>,
) -> Result<Vec<FreeFallSample>> {
    if n_samples < 2 {
        return Err(Error::InvalidInput(
            "freefall profile needs at least 2 samples".into(),
        ));
    }
    let thetas = linspace(0.0, FRAC_PI_2, n_samples);
    with_threads(threads, || {
        thetas
            .par_iter()
            .map(|&t| free_fall_delta(p, curve, t))
            .collect()
    })?
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::EllipseBoundary;
    use std::f64::consts::SQRT_2;

    fn anchor() -> ParamPoint {
        ParamPoint {
            energy: 2.5,
            omega: SQRT_2,
            h: 100.0,
            mu: 2.0,
            e: 0.1,
        }
    }

    #[test]
    fn bifurcation_anchor() {
        let r = bifurcation_root(&anchor(), Axis::Minor, Param::H, 50.0, 200.0).unwrap();
        assert!((r - 109.091).abs() < 0.01, "{r}");
        let r2 = bifurcation_root(&anchor(), Axis::Minor, Param::H, 40.0, 240.0).unwrap();
        assert!((r - r2).abs() < 1e-8 * r);
        assert!(matches!(
            bifurcation_root(&anchor(), Axis::Major, Param::H, 50.0, 200.0),
            Err(Error::NoSignChange { .. })
        ));
    }

    #[test]
    fn circle_grid_is_degenerate() {
        let spec = GridSpec {
            x_param: Param::Mu,
            y_param: Param::H,
            x_range: (1.0, 50.0),
            y_range: (1.0, 50.0),
            nx: 4,
            ny: 3,
            base: ParamPoint { e: 0.0, ..anchor() },
        };
        let g = delta_sign_grid(&spec, Some(2)).unwrap();
        assert_eq!(g.len(), 12);
        assert!(g.iter().all(|c| c.sign0 == 0 && c.sign1 == 0));
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let p = anchor().params().unwrap();
        let c = EllipseBoundary::new(0.1).unwrap();
        let a = freefall_profile(&p, &c, 17, Some(1)).unwrap();
        let b = freefall_profile(&p, &c, 17, Some(4)).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
        assert!(a[0].delta.abs() < 1e-10 && a[16].delta.abs() < 1e-10);
        assert!(freefall_profile(&p, &c, 0, None).is_err());
    }
}
