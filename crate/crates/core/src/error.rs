use nalgebra::Vector2;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{name}` must be strictly positive (got {value})")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("2E = {two_e} must exceed omega^2 = {omega_sq}")]
    HillViolation { two_e: f64, omega_sq: f64 },
    #[error("inner potential is singular at the origin")]
    OriginSingularity,
    #[error("point at radius {radius} lies outside the Hill region (radius {hill_radius})")]
    OutsideHill { radius: f64, hill_radius: f64 },
    #[error("eccentricity must lie in [0, 1) (got {0})")]
    InvalidEccentricity(f64),
    #[error("curve velocity vanishes at xi = {0}")]
    DegenerateVelocity(f64),
    #[error("total internal reflection at ({}, {}): sin ratio {sin_ratio}", point.x, point.y)]
    TotalReflection { sin_ratio: f64, point: Vector2<f64> },
    #[error("launch angle {0} is tangent to the boundary")]
    TangentialLaunch(f64),
    #[error("entry angle {0} is tangent to the boundary")]
    TangentialEntry(f64),
    #[error("no boundary crossing bracketed within flight time {0}")]
    CrossingNotBracketed(f64),
    #[error("could not recover the boundary parameter of ({x}, {y})")]
    CurveInversionFailure { x: f64, y: f64 },
    #[error("boundary point at xi = {0} is not homothetic")]
    NotHomothetic(f64),
    #[error("derivative quadruple has E0 * I0 = 0")]
    DegenerateQuadruple,
    #[error("ray at theta = {0} is tangent to the boundary")]
    RadialTangency(f64),
    #[error("function has no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("root finder did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
