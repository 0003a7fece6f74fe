//! Adaptive Runge-Kutta integration of the unregularized equations of motion, used to
//! cross-check the closed-form arcs.

use ode_solvers::{Dop853, OutputType, System, Vector4};

use crate::boundary::{BoundaryCurve, Vec2};
use crate::error::{Error, Result};
use crate::params::PhysParams;

pub const ORACLE_RTOL: f64 = 1e-11;
const ORACLE_ATOL: f64 = 1e-13;

/// Force field of one region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Field {
    /// `z'' = -mu z / |z|^3`
    Kepler { mu: f64 },
    /// `z'' = -omega^2 z`
    Harmonic { omega: f64 },
}

impl Field {
    pub fn inner(p: &PhysParams) -> Self {
        Field::Kepler { mu: p.mu }
    }

    pub fn outer(p: &PhysParams) -> Self {
        Field::Harmonic { omega: p.omega }
    }
}

type State = Vector4<f64>;

struct Motion<'a, C: BoundaryCurve + ?Sized> {
    field: Field,
    curve: &'a C,
    /// +1 when the arc starts outside the domain, -1 when inside.
    side: f64,
    stop_on_crossing: bool,
    prev: (f64, State),
    bracket: Option<((f64, State), f64)>,
    min_radius: f64,
}

impl<C: BoundaryCurve + ?Sized> Motion<'_, C> {
    fn level(&self, y: &State) -> f64 {
        self.side * self.curve.implicit(Vec2::new(y[0], y[1]))
    }
}

impl<C: BoundaryCurve + ?Sized> System<f64, State> for &mut Motion<'_, C> {
    fn system(&self, _t: f64, y: &State, dy: &mut State) {
        let (x, yy) = (y[0], y[1]);
        let (ax, ay) = match self.field {
            Field::Kepler { mu } => {
                let r2 = x * x + yy * yy;
                let k = -mu / (r2 * r2.sqrt());
                (k * x, k * yy)
            }
            Field::Harmonic { omega } => (-omega * omega * x, -omega * omega * yy),
        };
        dy[0] = y[2];
        dy[1] = y[3];
        dy[2] = ax;
        dy[3] = ay;
    }

    fn solout(&mut self, t: f64, y: &State, _dy: &State) -> bool {
        self.min_radius = self.min_radius.min(y[0].hypot(y[1]));
        if self.stop_on_crossing && t > 1e-9 && self.level(y) <= 0.0 {
            self.bracket = Some((self.prev, t));
            return true;
        }
        self.prev = (t, *y);
        false
    }
}

/// Where and when an integrated trajectory first meets the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleCrossing {
    pub time: f64,
    pub position: Vec2,
    pub velocity: Vec2,
    /// Smallest `|z|` over the accepted steps.
    pub min_radius: f64,
}

fn run<'a, C: BoundaryCurve + ?Sized>(
    field: Field,
    curve: &'a C,
    side: f64,
    stop_on_crossing: bool,
    t0: f64,
    y0: State,
    t_end: f64,
) -> Result<Motion<'a, C>> {
    let mut motion = Motion {
        field,
        curve,
        side,
        stop_on_crossing,
        prev: (t0, y0),
        bracket: None,
        min_radius: y0[0].hypot(y0[1]),
    };
    let mut solver = Dop853::new(
        &mut motion,
        t0,
        t_end,
        t_end - t0,
        y0,
        ORACLE_RTOL,
        ORACLE_ATOL,
    );
    solver.set_output(OutputType::Sparse);
    solver
        .integrate()
        .map_err(|e| Error::InvalidInput(format!("integration failed: {e:?}")))?;
    drop(solver);
    Ok(motion)
}

/// Integrates from a boundary point until the first return to the boundary.
///
/// `from_inside` selects which side the arc starts on. The event is located by bisection,
/// re-integrating from the last accepted step before the crossing.
pub fn boundary_crossing<C: BoundaryCurve + ?Sized>(
    field: Field,
    curve: &C,
    z0: Vec2,
    v0: Vec2,
    from_inside: bool,
    t_max: f64,
) -> Result<OracleCrossing> {
    let side = if from_inside { -1.0 } else { 1.0 };
    let y0 = State::new(z0.x, z0.y, v0.x, v0.y);
    let motion = run(field, curve, side, true, 0.0, y0, t_max)?;
    let Some(((t_start, y_start), t_hit)) = motion.bracket else {
        return Err(Error::CrossingNotBracketed(t_max));
    };
    let min_radius = motion.min_radius;
    let advance = |t: f64| -> Result<State> {
        if t <= t_start {
            return Ok(y_start);
        }
        Ok(run(field, curve, side, false, t_start, y_start, t)?.prev.1)
    };
    let level = |y: &State| side * curve.implicit(Vec2::new(y[0], y[1]));
    let (mut lo, mut hi) = (t_start, t_hit);
    while hi - lo > 1e-14 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if level(&advance(mid)?) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    let y = advance(t)?;
    Ok(OracleCrossing {
        time: t,
        position: Vec2::new(y[0], y[1]),
        velocity: Vec2::new(y[2], y[3]),
        min_radius: min_radius.min(y[0].hypot(y[1])),
    })
}
