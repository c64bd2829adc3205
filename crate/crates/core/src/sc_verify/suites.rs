//! Randomized verification suites.
//!
//! `fd` checks every analytic differential against central differences;
//! `sc1` measures remainder decay with the one-level shift. Each map family
//! also carries a negative control whose differential is corrupted by 1%.

use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use super::random::{case_rng, random_diffeo, random_loop, random_loop_direction, random_tangent};
use super::{CheckKind, Harness, ScReport};
use crate::bov_map::{d_regularize, d_time_rescale, regularize, time_rescale};
use crate::circle_diffeo::{d2_invert, d_invert, invert, CircleDiffeo, TangentDiffeo};
use crate::config::{Config, Guards, Thresholds};
use crate::error::{Error, Result};
use crate::loop_core::Loop;

pub const CORRUPTION: f64 = 1.01;

pub const FD_INVERT_CASES: usize = 20;
pub const FD_REGULARIZE_CASES: usize = 20;
pub const FD_TIME_RESCALE_CASES: usize = 10;
pub const FD2_INVERT_CASES: usize = 10;
pub const FD_SQUARE_CASES: usize = 5;
pub const SC1_CASES: usize = 10;
pub const SC1_SQUARE_CASES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Fd,
    Sc1,
    All,
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fd" => Ok(Suite::Fd),
            "sc1" => Ok(Suite::Sc1),
            "all" => Ok(Suite::All),
            other => Err(Error::Config(format!(
                "unknown suite `{other}` (expected fd, sc1 or all)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub n: usize,
    pub seed: u64,
    pub guards: Guards,
    pub thresholds: Thresholds,
    /// Levels `m` for the sc¹ suite.
    pub levels: Vec<u32>,
    /// Corrupt every differential; all cases then become negative controls.
    pub inject_corruption: bool,
}

impl SuiteConfig {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        cfg.validate()?;
        Ok(SuiteConfig {
            n: cfg.n,
            seed: cfg.seed,
            guards: cfg.guards(),
            thresholds: cfg.thresholds()?,
            levels: vec![0, 1],
            inject_corruption: false,
        })
    }
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig::from_config(&Config::default()).expect("default config is valid")
    }
}

/// Step sweeps for the first-differential checks, one per map.
///
/// Each starts inside the asymptotic O(h^2) range and stops before roundoff,
/// amplified by the two derivatives in the level-0 norm, takes over.
pub fn invert_steps() -> Vec<f64> {
    geometric(2e-3, 8)
}

pub fn regularize_steps() -> Vec<f64> {
    geometric(4e-3, 7)
}

pub fn time_rescale_steps() -> Vec<f64> {
    geometric(1e-2, 6)
}

pub fn square_steps() -> Vec<f64> {
    geometric(1e-2, 7)
}

pub fn fd2_steps() -> Vec<f64> {
    geometric(4e-3, 7)
}

/// Long enough for a 1% error in the differential to surface as a linear
/// remainder once `h` falls below roughly `1e-4`.
pub fn sc1_steps() -> Vec<f64> {
    geometric(3e-3, 12)
}

/// The remainder of `z^2` is exactly quadratic; large steps keep it far above roundoff.
pub fn sc1_square_steps() -> Vec<f64> {
    geometric(5e-2, 6)
}

fn geometric(start: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| start * 0.5f64.powi(i as i32)).collect()
}

/// Map families and the random streams they draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    FdInvert,
    FdRegularize,
    FdTimeRescale,
    Fd2Invert,
    FdSquare,
    Sc1Regularize,
    Sc1Invert,
    Sc1Square,
}

impl Family {
    fn stream(self, case: usize, level: u32) -> u64 {
        ((self as u64) << 40) | (u64::from(level) << 32) | case as u64
    }
}

#[derive(Debug, Clone, Copy)]
struct Job {
    family: Family,
    case: usize,
    level: u32,
    corrupt: bool,
}

fn jobs(suite: Suite, cfg: &SuiteConfig) -> Vec<Job> {
    let mut out = Vec::new();
    let mut push = |family: Family, count: usize, level: u32, negative: bool| {
        for case in 0..count {
            out.push(Job {
                family,
                case,
                level,
                corrupt: cfg.inject_corruption,
            });
        }
        if negative && !cfg.inject_corruption {
            out.push(Job {
                family,
                case: count,
                level,
                corrupt: true,
            });
        }
    };
    if matches!(suite, Suite::Fd | Suite::All) {
        push(Family::FdInvert, FD_INVERT_CASES, 0, true);
        push(Family::FdRegularize, FD_REGULARIZE_CASES, 0, true);
        push(Family::FdTimeRescale, FD_TIME_RESCALE_CASES, 0, true);
        push(Family::Fd2Invert, FD2_INVERT_CASES, 0, true);
        push(Family::FdSquare, FD_SQUARE_CASES, 0, true);
    }
    if matches!(suite, Suite::Sc1 | Suite::All) {
        for &m in &cfg.levels {
            push(Family::Sc1Regularize, SC1_CASES, m, true);
            push(Family::Sc1Invert, SC1_CASES, m, true);
            push(Family::Sc1Square, SC1_SQUARE_CASES, m, true);
        }
    }
    out
}

/// Runs a suite; reports come back in a fixed order regardless of scheduling.
pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<Vec<ScReport>> {
    crate::spectral::check_grid(cfg.n)
        .map_err(|_| Error::Config(format!("n = {} is not a power of two >= 8", cfg.n)))?;
    let harness = Harness::new(cfg.guards, cfg.thresholds);
    Ok(jobs(suite, cfg)
        .par_iter()
        .map(|job| {
            let kind = match job.family {
                Family::Fd2Invert => CheckKind::SecondDifferential,
                Family::Sc1Regularize | Family::Sc1Invert | Family::Sc1Square => {
                    CheckKind::Sc1Remainder
                }
                _ => CheckKind::FirstDifferential,
            };
            let report = run_job(&harness, cfg, job).unwrap_or_else(|e| {
                ScReport::errored(kind, job.level, &e)
                    .labeled(family_name(job.family), describe(cfg, job))
            });
            if job.corrupt {
                report.as_negative_control()
            } else {
                report
            }
        })
        .collect())
}

fn family_name(family: Family) -> &'static str {
    match family {
        Family::FdInvert | Family::Sc1Invert => "invert",
        Family::FdRegularize | Family::Sc1Regularize => "regularize",
        Family::FdTimeRescale => "time_rescale",
        Family::Fd2Invert => "invert (second differential)",
        Family::FdSquare | Family::Sc1Square => "square",
    }
}

fn describe(cfg: &SuiteConfig, job: &Job) -> String {
    let corrupt = if job.corrupt {
        ", differential x1.01"
    } else {
        ""
    };
    format!(
        "case {} (seed {}, n {}, level {}{corrupt})",
        job.case, cfg.seed, cfg.n, job.level
    )
}

fn run_job(h: &Harness, cfg: &SuiteConfig, job: &Job) -> Result<ScReport> {
    let g = cfg.guards;
    let factor = if job.corrupt { CORRUPTION } else { 1.0 };
    let mut rng = case_rng(cfg.seed, job.family.stream(job.case, job.level));
    let n = cfg.n;
    let invert_map = |p: &CircleDiffeo| invert(p, &g);
    let d_invert_map =
        |p: &CircleDiffeo, d: &TangentDiffeo| d_invert(p, d, &g).map(|v| v.scale(factor));
    let regularize_map = |z: &Loop| regularize(z, &g);
    let d_regularize_map =
        |z: &Loop, d: &Loop| d_regularize(z, d, &g).map(|v| v.scale(Complex64::new(factor, 0.0)));
    let square_map = |z: &Loop| Ok(z.square());
    let d_square_map =
        |z: &Loop, d: &Loop| Ok(z.product(d).scale(Complex64::new(2.0 * factor, 0.0)));

    let report = match job.family {
        Family::FdInvert => {
            let psi = random_diffeo(&mut rng, n, &g)?;
            let dir = random_tangent(&mut rng, n)?;
            h.check_differential(invert_map, d_invert_map, &psi, &[dir], &invert_steps(), 0)?
        }
        Family::FdRegularize => {
            let (z, _) = random_loop(&mut rng, n)?;
            let dir = random_loop_direction(&mut rng, n)?;
            h.check_differential(
                regularize_map,
                d_regularize_map,
                &z,
                &[dir],
                &regularize_steps(),
                0,
            )?
        }
        Family::FdTimeRescale => {
            let (z, _) = random_loop(&mut rng, n)?;
            let dir = random_loop_direction(&mut rng, n)?;
            h.check_differential(
                |z: &Loop| time_rescale(z, &g),
                |z: &Loop, d: &Loop| d_time_rescale(z, d, &g).map(|v| v.scale(factor)),
                &z,
                &[dir],
                &time_rescale_steps(),
                0,
            )?
        }
        Family::Fd2Invert => {
            let psi = random_diffeo(&mut rng, n, &g)?;
            let a = random_tangent(&mut rng, n)?;
            let b = random_tangent(&mut rng, n)?;
            h.check_second_differential(
                invert_map,
                |p: &CircleDiffeo, x: &TangentDiffeo, y: &TangentDiffeo| {
                    d2_invert(p, x, y, &g).map(|v| v.scale(factor))
                },
                &psi,
                (&a, &b),
                &fd2_steps(),
                0,
            )?
        }
        Family::FdSquare => {
            let (z, _) = random_loop(&mut rng, n)?;
            let dir = random_loop_direction(&mut rng, n)?;
            h.check_differential(square_map, d_square_map, &z, &[dir], &square_steps(), 0)?
        }
        Family::Sc1Regularize => {
            let (z, _) = random_loop(&mut rng, n)?;
            let dir = random_loop_direction(&mut rng, n)?;
            h.sc1_remainder_slope(
                regularize_map,
                d_regularize_map,
                &z,
                &dir,
                job.level,
                &sc1_steps(),
            )?
        }
        Family::Sc1Invert => {
            let psi = random_diffeo(&mut rng, n, &g)?;
            let dir = random_tangent(&mut rng, n)?;
            h.sc1_remainder_slope(
                invert_map,
                d_invert_map,
                &psi,
                &dir,
                job.level,
                &sc1_steps(),
            )?
        }
        Family::Sc1Square => {
            let (z, _) = random_loop(&mut rng, n)?;
            let dir = random_loop_direction(&mut rng, n)?;
            h.sc1_remainder_slope(
                square_map,
                d_square_map,
                &z,
                &dir,
                job.level,
                &sc1_square_steps(),
            )?
        }
    };
    Ok(report.labeled(family_name(job.family), describe(cfg, job)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_parse() {
        assert_eq!("fd".parse::<Suite>().unwrap(), Suite::Fd);
        assert_eq!("all".parse::<Suite>().unwrap(), Suite::All);
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn job_counts() {
        let cfg = SuiteConfig::default();
        assert_eq!(jobs(Suite::Fd, &cfg).len(), 65 + 5);
        assert_eq!(jobs(Suite::Sc1, &cfg).len(), 2 * (25 + 3));
        let corrupt = SuiteConfig {
            inject_corruption: true,
            ..SuiteConfig::default()
        };
        let all = jobs(Suite::Fd, &corrupt);
        assert_eq!(all.len(), 65);
        assert!(all.iter().all(|j| j.corrupt));
    }
}
