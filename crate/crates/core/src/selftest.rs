//! Built-in acceptance suite. Every check is deterministic: random draws come from a fixed
//! seed and reports contain no timings, so repeated runs print identical text.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2, TAU};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::boundary::{wrap_pi, BoundaryCurve, EllipseBoundary};
use crate::error::Result;
use crate::inner::inner_arc;
use crate::oracle::{boundary_crossing, Field};
use crate::outer::outer_arc;
use crate::params::{PhysParams, Region};
use crate::refraction::IncidenceAngle;
use crate::return_map::{
    canonical_jacobian_det, find_brake_orbits, first_return, first_return_detailed,
    free_fall_delta, iterate_orbit, numerical_jacobian, reverse_return, BoundaryState,
};
use crate::scan::{
    bifurcation_root, delta_sign_grid, freefall_profile, phase_portrait, GridSpec, Param,
    ParamPoint, PortraitSpec,
};
use crate::stability::{
    discriminant_elliptic, discriminant_general, elliptic_stability_report, h_bar,
    hyperbola_crossings, mu_bar, small_e_coefficient, small_e_coefficient_minor, Axis,
    Classification,
};

/// Tolerances of the suite.
pub mod tol {
    pub const BIFURCATION_ABS: f64 = 0.01;
    pub const BIFURCATION_VALUE: f64 = 109.091;
    pub const MU_BAR_VALUE: f64 = 0.0511;
    pub const MU_BAR_ABS: f64 = 5e-4;
    pub const H_BAR_ABS: f64 = 0.05;
    pub const JACOBIAN_REL: f64 = 1e-5;
    pub const JACOBIAN_STEP: f64 = 1e-6;
    pub const SIGN_EXCLUSION: f64 = 1e-8;
    pub const SMALL_E_REL_COARSE: f64 = 1e-2;
    pub const SMALL_E_REL_FINE: f64 = 1e-4;
    pub const ENERGY: f64 = 1e-10;
    pub const SNELL: f64 = 1e-10;
    pub const AREA: f64 = 1e-6;
    pub const AREA_STEP: f64 = 1e-5;
    pub const LC_ENERGY: f64 = 1e-10;
    pub const CIRCLE_ALPHA: f64 = 1e-8;
    pub const CIRCLE_SHIFT: f64 = 1e-9;
    pub const ORACLE: f64 = 1e-8;
    pub const ORACLE_MIN_RADIUS: f64 = 0.05;
    pub const BRAKE_CLOSURE: f64 = 1e-6;
    pub const FREE_FALL_ENDPOINT: f64 = 1e-10;
    pub const REVERSAL: f64 = 1e-8;
    pub const ODDNESS: f64 = 1e-9;
    pub const MAX_CROSSINGS: usize = 2;
}

const SEED: u64 = 0x5eed_b111_1a2d;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionResult {
    fn new(id: u8, name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            id,
            name,
            passed,
            detail,
        }
    }

    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        format!(
            "criterion {}: {} ({}): {}",
            self.id, verdict, self.name, self.detail
        )
    }
}

pub const CRITERIA: [(u8, &str); 12] = [
    (1, "bifurcation anchor"),
    (2, "threshold anchor"),
    (3, "jacobian oracle"),
    (4, "sign coherence"),
    (5, "small-e expansion"),
    (6, "conservation"),
    (7, "circle degeneracy"),
    (8, "oracle equivalence"),
    (9, "brake orbits"),
    (10, "reversibility and symmetry"),
    (11, "convexity for hyperbolae"),
    (12, "determinism"),
];

pub fn run_all() -> Vec<CriterionResult> {
    CRITERIA
        .iter()
        .map(|&(id, _)| run_criterion(id).expect("known id"))
        .collect()
}

pub fn run_criterion(id: u8) -> Option<CriterionResult> {
    let name = CRITERIA.iter().find(|c| c.0 == id)?.1;
    let outcome = match id {
        1 => bifurcation_anchor(),
        2 => threshold_anchor(),
        3 => jacobian_oracle(),
        4 => sign_coherence(),
        5 => small_e_expansion(),
        6 => conservation(),
        7 => circle_degeneracy(),
        8 => oracle_equivalence(),
        9 => brake_orbits(),
        10 => reversibility(),
        11 => convexity(),
        12 => determinism(),
        _ => return None,
    };
    Some(match outcome {
        Ok((passed, detail)) => CriterionResult::new(id, name, passed, detail),
        Err(e) => CriterionResult::new(id, name, false, format!("error: {e}")),
    })
}

type Outcome = Result<(bool, String)>;

fn anchor_point(h: f64) -> ParamPoint {
    ParamPoint {
        energy: 2.5,
        omega: SQRT_2,
        h,
        mu: 2.0,
        e: 0.1,
    }
}

/// Root of the minor-axis discriminant in `h` at the anchor parameters, with its wall time.
pub fn timed_bifurcation_root() -> Result<(f64, Duration)> {
    let start = Instant::now();
    let root = bifurcation_root(&anchor_point(100.0), Axis::Minor, Param::H, 50.0, 200.0)?;
    Ok((root, start.elapsed()))
}

fn bifurcation_anchor() -> Outcome {
    let (root, elapsed) = timed_bifurcation_root()?;
    let ok = (root - tol::BIFURCATION_VALUE).abs() <= tol::BIFURCATION_ABS
        && elapsed < Duration::from_secs(1);
    Ok((
        ok,
        format!(
            "h_bif = {root:.6}, target {} +- {}",
            tol::BIFURCATION_VALUE,
            tol::BIFURCATION_ABS
        ),
    ))
}

fn threshold_anchor() -> Outcome {
    let mb = mu_bar(2.5, SQRT_2, 0.1);
    let hb = h_bar(2.5, SQRT_2, 0.1, 2.0);
    let root = bifurcation_root(&anchor_point(100.0), Axis::Minor, Param::H, 50.0, 200.0)?;
    let ok =
        (mb - tol::MU_BAR_VALUE).abs() <= tol::MU_BAR_ABS && (hb - root).abs() <= tol::H_BAR_ABS;
    Ok((
        ok,
        format!("mu_bar = {mb:.6}, h_bar = {hb:.6}, root = {root:.6}"),
    ))
}

fn jacobian_tuples() -> Vec<(PhysParams, f64, Axis)> {
    let sets = [
        PhysParams {
            energy: 2.5,
            omega: SQRT_2,
            h: 0.1,
            mu: 1.0,
        },
        PhysParams {
            energy: 2.5,
            omega: SQRT_2,
            h: 100.0,
            mu: 2.0,
        },
        PhysParams {
            energy: 5.0,
            omega: 1.0,
            h: 2.0,
            mu: 0.5,
        },
    ];
    let mut out = Vec::new();
    for p in sets {
        for e in [0.0, 0.1, 0.3, 0.5] {
            for axis in [Axis::Major, Axis::Minor] {
                out.push((p, e, axis));
            }
        }
    }
    out
}

/// Worst relative mismatch between closed-form and finite-difference Jacobians.
pub fn jacobian_mismatch() -> Result<(usize, f64)> {
    let tuples = jacobian_tuples();
    let mut worst: f64 = 0.0;
    for (p, e, axis) in &tuples {
        let curve = EllipseBoundary::new(*e)?;
        let closed = elliptic_stability_report(p, *e, *axis)?.df;
        let fd = numerical_jacobian(
            p,
            &curve,
            BoundaryState::new(axis.xi(), 0.0),
            1,
            tol::JACOBIAN_STEP,
        )?;
        let scale = closed.iter().flatten().fold(1.0_f64, |m, v| m.max(v.abs()));
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((closed[r][c] - fd[(r, c)]).abs() / scale);
            }
        }
    }
    Ok((tuples.len(), worst))
}

fn jacobian_oracle() -> Outcome {
    let (n, worst) = jacobian_mismatch()?;
    Ok((
        n >= 20 && worst <= tol::JACOBIAN_REL,
        format!("{n} tuples, worst relative mismatch {worst:.3e}"),
    ))
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

fn sign_coherence() -> Outcome {
    let (mut checked, mut excluded, mut disagree) = (0usize, 0usize, 0usize);
    let mut positive = 0usize;
    for e in [0.05, 0.3] {
        let curve = EllipseBoundary::new(e)?;
        for i in 0..20 {
            let mu = 0.2 + 9.8 * i as f64 / 19.0;
            for j in 0..20 {
                let h = 0.5 + 199.5 * j as f64 / 19.0;
                let p = PhysParams::new(2.5, SQRT_2, h, mu)?;
                for axis in [Axis::Major, Axis::Minor] {
                    let general = discriminant_general(&p, &curve.frame(axis.xi())?)?.delta;
                    if general.abs() < tol::SIGN_EXCLUSION {
                        excluded += 1;
                        continue;
                    }
                    let elliptic = discriminant_elliptic(&p, e, axis)?.delta;
                    let df = numerical_jacobian(
                        &p,
                        &curve,
                        BoundaryState::new(axis.xi(), 0.0),
                        1,
                        1e-5,
                    )?;
                    let fd = df.trace().powi(2) - 4.0;
                    checked += 1;
                    positive += usize::from(general > 0.0);
                    if sign(general) != sign(elliptic) || sign(general) != sign(fd) {
                        disagree += 1;
                    }
                }
            }
        }
    }
    Ok((
        disagree == 0 && checked > 0,
        format!("{checked} cells checked ({positive} saddle), {excluded} excluded, {disagree} disagreements"),
    ))
}

fn random_params(rng: &mut ChaCha8Rng) -> PhysParams {
    let energy: f64 = rng.random_range(1.0..6.0);
    let omega = rng.random_range(0.2..0.8) * (2.0 * energy).sqrt();
    let h = rng.random_range(0.1..20.0);
    let mu = rng.random_range(0.2..5.0);
    PhysParams {
        energy,
        omega,
        h,
        mu,
    }
}

fn small_e_expansion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 5);
    let (mut worst_coarse, mut worst_fine) = (0.0_f64, 0.0_f64);
    let mut exact = true;
    let mut sets = 0;
    while sets < 10 {
        let p = random_params(&mut rng);
        let f2 = small_e_coefficient(&p);
        if f2.abs() < 1e-3 {
            continue;
        }
        sets += 1;
        exact &= small_e_coefficient_minor(&p) == -f2;
        let rel = |e: f64| -> Result<f64> {
            let d = discriminant_elliptic(&p, e, Axis::Major)?.delta;
            Ok((d / (e * e) - f2).abs() / f2.abs())
        };
        worst_coarse = worst_coarse.max(rel(1e-3)?);
        worst_fine = worst_fine.max(rel(1e-4)?);
    }
    let ok = exact && worst_coarse < tol::SMALL_E_REL_COARSE && worst_fine < tol::SMALL_E_REL_FINE;
    Ok((
        ok,
        format!("10 sets, worst rel. error {worst_coarse:.3e} at e=1e-3, {worst_fine:.3e} at e=1e-4, g2 = -f2 exact: {exact}"),
    ))
}

fn conservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 6);
    let (mut energy_res, mut snell_res, mut lc_res, mut area_res) =
        (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    let mut transits = 0;
    let mut areas = 0;
    let mut draws = 0;
    while (transits < 50 || areas < 20) && draws < 10_000 {
        draws += 1;
        let p = random_params(&mut rng);
        let e = rng.random_range(0.0..0.5);
        let curve = EllipseBoundary::new(e)?;
        let state = BoundaryState::new(rng.random_range(0.0..TAU), rng.random_range(-0.6..0.6));
        let Ok(t) = first_return_detailed(&p, &curve, state) else {
            continue;
        };
        transits += 1;
        for k in 0..=10 {
            let s = t.outer.flight_time * k as f64 / 10.0;
            energy_res = energy_res.max((t.outer.energy(s) - p.energy).abs() / p.energy.max(1.0));
            let tau = t.inner.lc_flight_time * k as f64 / 10.0;
            let lc = t.inner.lc_state(tau);
            lc_res = lc_res.max((lc.energy(t.inner.omega) - p.mu).abs() / p.mu.max(1.0));
            let z = lc.position();
            if z.norm() > tol::ORACLE_MIN_RADIUS {
                let kinetic = 0.5 * lc.physical_velocity().norm_squared();
                let res = (kinetic - p.mu / z.norm() - (p.energy + p.h)).abs() / kinetic.max(1.0);
                energy_res = energy_res.max(res);
            }
        }
        let arrive = curve.point(t.outer.end_xi);
        let leave = curve.point(t.inner.end_xi);
        let ve = |z| p.potential_at(z, Region::Outer);
        let vi = |z| p.potential_at(z, Region::Inner);
        let entry =
            ve(arrive)?.sqrt() * t.outer.end_angle.sin() - vi(arrive)?.sqrt() * t.entry_angle.sin();
        let exit =
            vi(leave)?.sqrt() * t.inner.end_angle.sin() - ve(leave)?.sqrt() * t.end.alpha.sin();
        snell_res = snell_res.max(entry.abs()).max(exit.abs());
        if areas < 20 {
            if let Ok(det) = canonical_jacobian_det(&p, &curve, state, tol::AREA_STEP) {
                area_res = area_res.max((det - 1.0).abs());
                areas += 1;
            }
        }
    }
    let ok = transits >= 50
        && areas >= 20
        && energy_res < tol::ENERGY
        && snell_res < tol::SNELL
        && lc_res < tol::LC_ENERGY
        && area_res < tol::AREA;
    Ok((
        ok,
        format!(
            "{transits} transits: energy {energy_res:.3e}, snell {snell_res:.3e}, lc energy {lc_res:.3e}; {areas} jacobians: |det-1| {area_res:.3e}"
        ),
    ))
}

fn circle_degeneracy() -> Outcome {
    let p = PhysParams::new(2.5, SQRT_2, 0.1, 1.0)?;
    let curve = EllipseBoundary::circle();
    let alpha0 = 0.25;
    let mut alpha_drift = 0.0_f64;
    let mut shifts = Vec::new();
    for k in 0..8 {
        let xi0 = TAU * k as f64 / 8.0 + 0.1;
        let rec = iterate_orbit(&p, &curve, BoundaryState::new(xi0, alpha0), 100);
        if rec.states.len() != 100 {
            return Ok((
                false,
                format!(
                    "orbit from xi0 = {xi0} stopped early: {}",
                    rec.termination.as_str()
                ),
            ));
        }
        for s in &rec.states {
            alpha_drift = alpha_drift.max((s.alpha - alpha0).abs());
        }
        shifts.push(wrap_pi(rec.states[0].xi - xi0));
    }
    let spread = shifts
        .iter()
        .fold(0.0_f64, |m, s| m.max((s - shifts[0]).abs()));
    let mut degenerate = true;
    for xi in [0.0, 1.0, FRAC_PI_2] {
        degenerate &= discriminant_general(&p, &curve.frame(xi)?)?.classification()
            == Classification::Degenerate;
    }
    for axis in [Axis::Major, Axis::Minor] {
        degenerate &=
            discriminant_elliptic(&p, 0.0, axis)?.classification() == Classification::Degenerate;
    }
    let ok = alpha_drift < tol::CIRCLE_ALPHA && spread < tol::CIRCLE_SHIFT && degenerate;
    Ok((
        ok,
        format!("alpha drift {alpha_drift:.3e}, shift spread {spread:.3e}, degenerate flagged: {degenerate}"),
    ))
}

/// Worst exit mismatches `(inner, outer)` between closed-form arcs and direct integration.
pub fn oracle_mismatch(count: usize) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 8);
    let mut worst_inner = 0.0_f64;
    let mut accepted = 0;
    while accepted < count {
        let p = random_params(&mut rng);
        let curve = EllipseBoundary::new(rng.random_range(0.0..0.5))?;
        let xi0 = rng.random_range(0.0..TAU);
        let alpha = IncidenceAngle::new(rng.random_range(-1.2..1.2))?;
        let Ok(arc) = inner_arc(&p, &curve, xi0, alpha) else {
            continue;
        };
        if arc.collision_flag || arc.min_radius <= tol::ORACLE_MIN_RADIUS {
            continue;
        }
        accepted += 1;
        let v0 = arc.lc_start.physical_velocity();
        let t_max = 2.0 * arc.physical_flight_time + 1.0;
        let hit = boundary_crossing(Field::inner(&p), &curve, curve.point(xi0), v0, true, t_max)?;
        let xi = curve.parameter_of(hit.position);
        let angle = curve.frame(xi)?.outgoing_angle(hit.velocity);
        worst_inner = worst_inner
            .max(wrap_pi(xi - arc.end_xi).abs())
            .max((angle - arc.end_angle).abs());
    }
    let mut worst_outer = 0.0_f64;
    accepted = 0;
    while accepted < count {
        let p = random_params(&mut rng);
        let curve = EllipseBoundary::new(rng.random_range(0.0..0.5))?;
        let xi0 = rng.random_range(0.0..TAU);
        let alpha = IncidenceAngle::new(rng.random_range(-1.3..1.3))?;
        let Ok(arc) = outer_arc(&p, &curve, xi0, alpha) else {
            continue;
        };
        accepted += 1;
        let t_max = 2.0 * arc.flight_time + 1.0;
        let hit = boundary_crossing(Field::outer(&p), &curve, arc.y0, arc.v0, false, t_max)?;
        let xi = curve.parameter_of(hit.position);
        let angle = curve.frame(xi)?.incoming_angle(hit.velocity);
        worst_outer = worst_outer
            .max(wrap_pi(xi - arc.end_xi).abs())
            .max((angle - arc.end_angle).abs());
    }
    Ok((worst_inner, worst_outer))
}

fn oracle_equivalence() -> Outcome {
    let (inner, outer) = oracle_mismatch(50)?;
    Ok((
        inner < tol::ORACLE && outer < tol::ORACLE,
        format!("50 inner arcs worst {inner:.3e}, 50 outer arcs worst {outer:.3e}"),
    ))
}

fn brake_orbits() -> Outcome {
    let curve = EllipseBoundary::new(0.1)?;
    let low = anchor_point(100.0).params()?;
    let high = anchor_point(120.0).params()?;
    let none = find_brake_orbits(&low, &curve, 400);
    let some = find_brake_orbits(&high, &curve, 400);
    let mut endpoint = 0.0_f64;
    for p in [&low, &high] {
        for t in [0.0, FRAC_PI_2] {
            endpoint = endpoint.max(free_fall_delta(p, &curve, t)?.delta.abs());
        }
    }
    let closure = some.iter().fold(0.0_f64, |m, b| m.max(b.closure_error));
    let ok = none.is_empty()
        && !some.is_empty()
        && closure < tol::BRAKE_CLOSURE
        && endpoint < tol::FREE_FALL_ENDPOINT;
    let thetas: Vec<String> = some.iter().map(|b| format!("{:.9}", b.theta)).collect();
    Ok((
        ok,
        format!(
            "h=100: {} zeros; h=120: zeros at [{}], closure {closure:.3e}; endpoint |delta| {endpoint:.3e}",
            none.len(),
            thetas.join(", ")
        ),
    ))
}

/// `(literal, reversed)` residuals over `count` random states: `F(xi1, -alpha1)` against
/// `(xi0, -alpha0)`, and the time-reversed cycle against the start.
pub fn reversal_residuals(count: usize) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 10);
    let p = PhysParams::new(2.5, SQRT_2, 0.1, 1.0)?;
    let curve = EllipseBoundary::new(0.3)?;
    let (mut literal, mut reversed) = (0.0_f64, 0.0_f64);
    let mut accepted = 0;
    while accepted < count {
        let s0 = BoundaryState::new(rng.random_range(0.0..TAU), rng.random_range(-0.5..0.5));
        let Ok(s1) = first_return(&p, &curve, s0) else {
            continue;
        };
        let Ok(back) = reverse_return(&p, &curve, s1) else {
            continue;
        };
        accepted += 1;
        reversed = reversed.max(back.distance(&s0));
        let flipped = BoundaryState::new(s0.xi, -s0.alpha);
        literal = match first_return(&p, &curve, BoundaryState::new(s1.xi, -s1.alpha)) {
            Ok(img) => literal.max(img.distance(&flipped)),
            Err(_) => f64::INFINITY,
        };
    }
    Ok((literal, reversed))
}

/// Worst violation of `delta(-theta) = -delta(theta)` and `delta(pi - theta) = -delta(theta)`.
pub fn free_fall_oddness() -> Result<f64> {
    let p = anchor_point(120.0).params()?;
    let curve = EllipseBoundary::new(0.1)?;
    let mut worst = 0.0_f64;
    for k in 1..40 {
        let t = FRAC_PI_2 * k as f64 / 40.0;
        let d = free_fall_delta(&p, &curve, t)?.delta;
        worst = worst.max((free_fall_delta(&p, &curve, -t)?.delta + d).abs());
        worst = worst.max((free_fall_delta(&p, &curve, PI - t)?.delta + d).abs());
    }
    Ok(worst)
}

fn reversibility() -> Outcome {
    let (literal, reversed) = reversal_residuals(100)?;
    let odd = free_fall_oddness()?;
    let ok = literal < tol::REVERSAL && odd < tol::ODDNESS;
    Ok((
        ok,
        format!(
            "F(xi1,-alpha1) vs (xi0,-alpha0) worst {literal:.3e}; reversed cycle worst {reversed:.3e}; delta oddness {odd:.3e}"
        ),
    ))
}

fn convexity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 11);
    let curve = EllipseBoundary::new(0.5)?;
    let mut max_count = 0;
    let mut meeting = 0;
    for _ in 0..200 {
        let p = random_params(&mut rng);
        let ell = rng.random_range(0.01..4.0);
        let phi0 = rng.random_range(0.0..TAU);
        let n = hyperbola_crossings(&curve, p.energy + p.h, p.mu, ell, phi0, 20_000);
        max_count = max_count.max(n);
        meeting += usize::from(n > 0);
    }
    Ok((
        max_count <= tol::MAX_CROSSINGS,
        format!("200 hyperbolae, {meeting} meet the boundary, at most {max_count} crossings"),
    ))
}

fn determinism() -> Outcome {
    let p = anchor_point(120.0).params()?;
    let curve = EllipseBoundary::new(0.1)?;
    let grid = GridSpec {
        x_param: Param::Mu,
        y_param: Param::H,
        x_range: (0.2, 10.0),
        y_range: (0.5, 200.0),
        nx: 12,
        ny: 10,
        base: anchor_point(100.0),
    };
    let portrait = PortraitSpec {
        n_xi: 4,
        n_alpha: 3,
        alpha_max: 0.6,
        iterations: 20,
    };
    let snapshot = |threads| -> Result<String> {
        let g = delta_sign_grid(&grid, Some(threads))?;
        let f = freefall_profile(&p, &curve, 33, Some(threads))?;
        let o = phase_portrait(&p, &curve, &portrait, Some(threads))?;
        Ok(format!("{g:?}{f:?}{o:?}"))
    };
    let reference = snapshot(1)?;
    let same = [2, 4, 1]
        .iter()
        .map(|&t| snapshot(t))
        .collect::<Result<Vec<_>>>()?
        .iter()
        .all(|s| *s == reference);
    Ok((
        same,
        format!("grid, profile and portrait identical across 1, 2 and 4 threads: {same}"),
    ))
}
