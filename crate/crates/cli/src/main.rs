//! Command-line driver: orbits, phase portraits, discriminant scans, bifurcation roots,
//! free-fall profiles, brake orbits, stability reports and the acceptance self-test.
//!
//! Exit codes: 0 success, 1 invalid configuration, 2 numerical failure (or a failed self-test).

mod config;
mod output;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use refraction_billiards::boundary::Boundary;
use refraction_billiards::return_map::{find_brake_orbits, iterate_orbit, BoundaryState};
use refraction_billiards::scan::{
    bifurcation_root, delta_sign_grid, freefall_profile, phase_portrait, GridSpec, Param,
    PortraitSpec,
};
use refraction_billiards::stability::{
    brake_derivatives, convexity_for_hyperbolae, elliptic_stability_report, regime_thresholds,
    stability_report, Axis,
};
use refraction_billiards::{selftest, Error};

use config::{ParamsConfig, RunConfig};

/// Configuration problems; mapped to exit code 1.
#[derive(Debug)]
pub struct InvalidConfig(pub String);

impl std::fmt::Display for InvalidConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InvalidConfig {}

pub const THREADS_ENV: &str = "REFRACTION_BILLIARDS_THREADS";

#[derive(Parser)]
#[command(
    name = "refraction-billiards",
    version,
    about = "Refraction billiards simulator"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Energy E.
    #[arg(long = "E", global = true, allow_negative_numbers = true)]
    energy: Option<f64>,
    /// Harmonic frequency omega (not omega squared).
    #[arg(long, global = true, allow_negative_numbers = true)]
    omega: Option<f64>,
    /// Energy jump h across the boundary.
    #[arg(long, global = true, allow_negative_numbers = true)]
    h: Option<f64>,
    /// Central mass mu.
    #[arg(long, global = true, allow_negative_numbers = true)]
    mu: Option<f64>,
    /// Ellipse eccentricity; selects an elliptic boundary.
    #[arg(long, global = true, allow_negative_numbers = true)]
    ecc: Option<f64>,
    /// Output file for the CSV or JSON result (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Iterate the return map from one seed and write the orbit as CSV.
    Orbit {
        #[arg(long, allow_negative_numbers = true)]
        xi: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,
        #[arg(long)]
        iterations: Option<usize>,
    },
    /// Iterate a grid of seeds and write all orbits as CSV.
    Portrait {
        #[arg(long)]
        n_xi: Option<usize>,
        #[arg(long)]
        n_alpha: Option<usize>,
        #[arg(long)]
        alpha_max: Option<f64>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Signs of the axis discriminants over a two-parameter grid.
    DeltaScan {
        #[arg(long)]
        x_param: Option<Param>,
        #[arg(long)]
        y_param: Option<Param>,
        #[arg(long, allow_negative_numbers = true)]
        x_lo: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        x_hi: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        y_lo: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        y_hi: Option<f64>,
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        ny: Option<usize>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Root of an axis discriminant in one parameter.
    Bifurcate {
        #[arg(long)]
        axis: Option<u8>,
        #[arg(long)]
        param: Option<Param>,
        #[arg(long, allow_negative_numbers = true)]
        lo: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        hi: Option<f64>,
    },
    /// Free-fall deflection profile over [0, pi/2].
    Freefall {
        #[arg(long)]
        theta_samples: Option<usize>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Period-two brake orbits from zeros of the free-fall map.
    Brake {
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Stability report at a homothetic point.
    Stability {
        #[arg(long)]
        axis: Option<u8>,
        #[arg(long, allow_negative_numbers = true)]
        xi: Option<f64>,
    },
    /// Run the built-in acceptance suite.
    Selftest {
        /// Run only these criteria (1-12).
        #[arg(long)]
        criterion: Vec<u8>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.downcast_ref::<InvalidConfig>().is_some() {
            return 1;
        }
        if let Some(err) = cause.downcast_ref::<Error>() {
            return match err {
                Error::NonPositiveParameter { .. }
                | Error::HillViolation { .. }
                | Error::InvalidEccentricity(_)
                | Error::InvalidInput(_) => 1,
                _ => 2,
            };
        }
    }
    2
}

fn threads() -> anyhow::Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(InvalidConfig(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))
            .into()),
        },
    }
}

fn require<T>(value: Option<T>, what: &str) -> anyhow::Result<T> {
    value.ok_or_else(|| InvalidConfig(format!("missing {what}")).into())
}

fn emit(out: Option<&Path>, content: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, content).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let c = &cli.common;
    let cfg = RunConfig::load(c.config.as_deref())?;
    let flags = ParamsConfig {
        energy: c.energy,
        omega: c.omega,
        h: c.h,
        mu: c.mu,
    };
    let out = c.out.as_deref();
    match cli.command {
        Command::Orbit {
            xi,
            alpha,
            iterations,
        } => {
            let p = cfg.params(&flags)?;
            let curve = cfg.boundary(c.ecc)?;
            let seed = BoundaryState::new(
                xi.or(cfg.orbit.xi).unwrap_or(0.3),
                alpha.or(cfg.orbit.alpha).unwrap_or(0.2),
            );
            let n = iterations.or(cfg.orbit.iterations).unwrap_or(100);
            let rec = iterate_orbit(&p, &curve, seed, n);
            emit(out, &output::orbits_csv(std::slice::from_ref(&rec))?)?;
        }
        Command::Portrait {
            n_xi,
            n_alpha,
            alpha_max,
            iterations,
            svg,
        } => {
            let p = cfg.params(&flags)?;
            let curve = cfg.boundary(c.ecc)?;
            let d = PortraitSpec::default();
            let spec = PortraitSpec {
                n_xi: n_xi.or(cfg.portrait.n_xi).unwrap_or(d.n_xi),
                n_alpha: n_alpha.or(cfg.portrait.n_alpha).unwrap_or(d.n_alpha),
                alpha_max: alpha_max.or(cfg.portrait.alpha_max).unwrap_or(d.alpha_max),
                iterations: iterations
                    .or(cfg.portrait.iterations)
                    .unwrap_or(d.iterations),
            };
            let records = phase_portrait(&p, &curve, &spec, threads()?)?;
            emit(out, &output::orbits_csv(&records)?)?;
            if let Some(path) = svg {
                emit(Some(&path), &output::portrait_svg(&records))?;
            }
        }
        Command::DeltaScan {
            x_param,
            y_param,
            x_lo,
            x_hi,
            y_lo,
            y_hi,
            nx,
            ny,
            svg,
        } => {
            let base = cfg.ellipse_point(&flags, c.ecc)?;
            let s = &cfg.scan;
            let x_range = s.x_range.unwrap_or((0.2, 10.0));
            let y_range = s.y_range.unwrap_or((0.5, 200.0));
            let spec = GridSpec {
                x_param: x_param.or(s.x_param).unwrap_or(Param::Mu),
                y_param: y_param.or(s.y_param).unwrap_or(Param::H),
                x_range: (x_lo.unwrap_or(x_range.0), x_hi.unwrap_or(x_range.1)),
                y_range: (y_lo.unwrap_or(y_range.0), y_hi.unwrap_or(y_range.1)),
                nx: nx.or(s.nx).unwrap_or(20),
                ny: ny.or(s.ny).unwrap_or(20),
                base,
            };
            let cells = delta_sign_grid(&spec, threads()?)?;
            emit(out, &output::scan_csv(&cells)?)?;
            if let Some(path) = svg {
                emit(Some(&path), &output::scan_svg(&spec, &cells))?;
            }
        }
        Command::Bifurcate {
            axis,
            param,
            lo,
            hi,
        } => {
            let base = cfg.ellipse_point(&flags, c.ecc)?;
            let b = &cfg.bifurcate;
            let axis = Axis::from_index(axis.or(b.axis).unwrap_or(1))
                .map_err(|e| InvalidConfig(e.to_string()))?;
            let param = param.or(b.param).unwrap_or(Param::H);
            let lo = require(lo.or(b.lo), "--lo")?;
            let hi = require(hi.or(b.hi), "--hi")?;
            let root = bifurcation_root(&base, axis, param, lo, hi)?;
            let doc = json!({ "axis": axis.index(), "param": param, "lo": lo, "hi": hi, "base": base, "root": root });
            emit(out, &output::json(&doc)?)?;
        }
        Command::Freefall { theta_samples, svg } => {
            let n = theta_samples.or(cfg.freefall.theta_samples).unwrap_or(91);
            if n < 2 {
                return Err(
                    InvalidConfig(format!("--theta-samples must be at least 2, got {n}")).into(),
                );
            }
            let p = cfg.params(&flags)?;
            let curve = cfg.boundary(c.ecc)?;
            let samples = freefall_profile(&p, &curve, n, threads()?)?;
            emit(out, &output::freefall_csv(&samples)?)?;
            if let Some(path) = svg {
                emit(Some(&path), &output::freefall_svg(&samples))?;
            }
        }
        Command::Brake { grid } => {
            let p = cfg.params(&flags)?;
            let curve = cfg.boundary(c.ecc)?;
            let orbits = find_brake_orbits(&p, &curve, grid.or(cfg.brake.grid).unwrap_or(400));
            let derivatives = match curve {
                Boundary::Ellipse(e) if e.eccentricity() > 0.0 => {
                    Some(brake_derivatives(&p, e.eccentricity())?)
                }
                _ => None,
            };
            let doc = json!({ "params": p, "boundary": curve, "orbits": orbits, "derivatives": derivatives });
            emit(out, &output::json(&doc)?)?;
        }
        Command::Stability { axis, xi } => {
            let p = cfg.params(&flags)?;
            let curve = cfg.boundary(c.ecc)?;
            let xi = xi.or(cfg.stability.xi);
            let axis = axis
                .or(cfg.stability.axis)
                .map(Axis::from_index)
                .transpose()
                .map_err(|e| InvalidConfig(e.to_string()))?;
            let doc = match (curve, axis, xi) {
                (Boundary::Ellipse(ell), axis, None) => {
                    let axis = axis.unwrap_or(Axis::Major);
                    let e = ell.eccentricity();
                    let report = elliptic_stability_report(&p, e, axis)?;
                    json!({
                        "params": p,
                        "boundary": curve,
                        "axis": axis.index(),
                        "xi": axis.xi(),
                        "delta": report.discriminant.delta,
                        "classification": report.classification,
                        "report": report,
                        "thresholds": regime_thresholds(&p, e)?,
                        "convexity_for_hyperbolae": convexity_for_hyperbolae(&p, e)?,
                    })
                }
                (_, axis, xi) => {
                    let xi = xi.unwrap_or(axis.unwrap_or(Axis::Major).xi());
                    let report = stability_report(&p, &curve, xi)?;
                    json!({
                        "params": p,
                        "boundary": curve,
                        "xi": xi,
                        "delta": report.discriminant.delta,
                        "classification": report.classification,
                        "report": report,
                    })
                }
            };
            emit(out, &output::json(&doc)?)?;
        }
        Command::Selftest { criterion } => {
            let results = if criterion.is_empty() {
                selftest::run_all()
            } else {
                criterion
                    .iter()
                    .map(|&id| {
                        selftest::run_criterion(id)
                            .ok_or_else(|| InvalidConfig(format!("unknown criterion {id}")))
                    })
                    .collect::<Result<Vec<_>, _>>()?
            };
            let text: String = results.iter().map(|r| r.line() + "\n").collect();
            emit(out, &text)?;
            if results.iter().any(|r| !r.passed) {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
