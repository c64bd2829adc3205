//! Finite-difference certification of the analytic differentials and of the
//! sc¹ remainder decay.
//!
//! Levels follow the loop convention: level `k` is the Sobolev norm of order
//! `2 + k`. The sc¹ check takes base point and direction at level `m + 1` and
//! measures the remainder at level `m`.

pub mod random;
pub mod suites;

use serde::{Deserialize, Serialize};

use crate::circle_diffeo::{CircleDiffeo, TangentDiffeo};
use crate::config::{Guards, Thresholds};
use crate::error::{Error, Result};
use crate::loop_core::{LevelProfile, Loop};

pub use suites::{run_suite, Suite, SuiteConfig};

/// Roundoff window: errors below `ROUNDOFF_FACTOR * eps * scale` are excluded from slope fits.
pub const ROUNDOFF_FACTOR: f64 = 100.0;
const MAX_SHRINK: usize = 8;

/// Vector-like values that differentials produce.
pub trait Tangent: Clone + Send + Sync {
    /// `self + a * other`.
    fn axpy(&self, a: f64, other: &Self) -> Self;
    fn scaled(&self, a: f64) -> Self;
    fn level_norm(&self, k: u32) -> f64;
}

/// Points of the spaces the maps act on.
pub trait Point: Clone + Send + Sync {
    type Tangent: Tangent;
    /// `self + h * dir`, revalidated where the space is an open subset.
    fn step(&self, dir: &Self::Tangent, h: f64, guards: &Guards) -> Result<Self>;
    /// `self - from`.
    fn displacement(&self, from: &Self) -> Self::Tangent;
    /// Size used to estimate roundoff at level `k`.
    fn magnitude(&self, k: u32) -> f64;
}

impl Tangent for Loop {
    fn axpy(&self, a: f64, other: &Self) -> Self {
        Loop::axpy(self, a, other)
    }
    fn scaled(&self, a: f64) -> Self {
        self.scale(num_complex::Complex64::new(a, 0.0))
    }
    fn level_norm(&self, k: u32) -> f64 {
        self.sobolev_norm(k)
    }
}

impl Point for Loop {
    type Tangent = Loop;
    fn step(&self, dir: &Loop, h: f64, _guards: &Guards) -> Result<Self> {
        // collision guards belong to the maps, not to the linear space
        Ok(Loop::axpy(self, h, dir))
    }
    fn displacement(&self, from: &Self) -> Loop {
        Loop::axpy(self, -1.0, from)
    }
    fn magnitude(&self, k: u32) -> f64 {
        self.sobolev_norm(k)
    }
}

impl Tangent for TangentDiffeo {
    fn axpy(&self, a: f64, other: &Self) -> Self {
        TangentDiffeo::axpy(self, a, other)
    }
    fn scaled(&self, a: f64) -> Self {
        self.scale(a)
    }
    fn level_norm(&self, k: u32) -> f64 {
        self.sobolev_norm(k)
    }
}

impl Point for CircleDiffeo {
    type Tangent = TangentDiffeo;
    fn step(&self, dir: &TangentDiffeo, h: f64, guards: &Guards) -> Result<Self> {
        self.perturbed(dir, h, guards)
    }
    fn displacement(&self, from: &Self) -> TangentDiffeo {
        CircleDiffeo::displacement(self, from)
    }
    fn magnitude(&self, k: u32) -> f64 {
        1.0 + self.periodic_part().sobolev_norm(k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    FirstDifferential,
    SecondDifferential,
    Sc1Remainder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Outcome of one finite-difference or remainder-decay run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScReport {
    pub map_name: String,
    pub base_descriptor: String,
    pub kind: CheckKind,
    /// Level at which errors are measured.
    pub level: u32,
    pub steps: Vec<f64>,
    pub errors: Vec<f64>,
    /// Steps left out of the slope fit because their error sits at roundoff.
    pub excluded_steps: Vec<f64>,
    pub fitted_slope: Option<f64>,
    pub best_error: f64,
    pub verdict: Verdict,
    pub negative_control: bool,
    /// Pass rule and level convention applied.
    pub rule: String,
    pub note: Option<String>,
}

impl ScReport {
    pub fn labeled(
        mut self,
        map_name: impl Into<String>,
        base_descriptor: impl Into<String>,
    ) -> Self {
        self.map_name = map_name.into();
        self.base_descriptor = base_descriptor.into();
        self
    }

    pub fn as_negative_control(mut self) -> Self {
        self.negative_control = true;
        self
    }

    /// Negative controls are expected to fail, everything else to pass.
    pub fn as_expected(&self) -> bool {
        match self.verdict {
            Verdict::Pass => !self.negative_control,
            Verdict::Fail => self.negative_control,
        }
    }

    /// A failed report for a case that could not be evaluated at all.
    pub fn errored(kind: CheckKind, level: u32, err: &Error) -> Self {
        ScReport {
            map_name: String::new(),
            base_descriptor: String::new(),
            kind,
            level,
            steps: Vec::new(),
            errors: Vec::new(),
            excluded_steps: Vec::new(),
            fitted_slope: None,
            best_error: f64::INFINITY,
            verdict: Verdict::Fail,
            negative_control: false,
            rule: String::new(),
            note: Some(err.to_string()),
        }
    }
}

/// Least-squares slope of `ln(error)` against `ln(h)`.
pub fn fit_log_slope(steps: &[f64], errors: &[f64]) -> Option<f64> {
    if steps.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = steps.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn check_steps(steps: &[f64]) -> Result<()> {
    let ok = !steps.is_empty()
        && steps.iter().all(|h| *h > 0.0 && h.is_finite())
        && steps.windows(2).all(|w| w[0] > w[1]);
    if ok {
        Ok(())
    } else {
        Err(Error::Config(
            "steps must be positive and strictly decreasing".into(),
        ))
    }
}

struct Measured {
    steps: Vec<f64>,
    errors: Vec<f64>,
    floors: Vec<f64>,
}

impl Measured {
    fn new() -> Self {
        Measured {
            steps: Vec::new(),
            errors: Vec::new(),
            floors: Vec::new(),
        }
    }

    fn push(&mut self, h: f64, error: f64, floor: f64) {
        self.steps.push(h);
        self.errors.push(error);
        self.floors.push(floor);
    }

    /// Splits into fitted and excluded points, fits the slope.
    fn into_report(self, kind: CheckKind, level: u32, rule: String) -> (ScReport, usize) {
        let mut fit_h = Vec::new();
        let mut fit_e = Vec::new();
        let mut excluded = Vec::new();
        // the pre-roundoff range ends at the first step where the error stops decreasing
        let mut decreasing = true;
        let mut previous = f64::INFINITY;
        for ((&h, &e), &floor) in self.steps.iter().zip(&self.errors).zip(&self.floors) {
            decreasing = decreasing && e < previous;
            previous = e;
            if decreasing && e > floor {
                fit_h.push(h);
                fit_e.push(e);
            } else {
                excluded.push(h);
            }
        }
        let best_error = self.errors.iter().copied().fold(f64::INFINITY, f64::min);
        let report = ScReport {
            map_name: String::new(),
            base_descriptor: String::new(),
            kind,
            level,
            fitted_slope: fit_log_slope(&fit_h, &fit_e),
            steps: self.steps,
            errors: self.errors,
            excluded_steps: excluded,
            best_error,
            verdict: Verdict::Fail,
            negative_control: false,
            rule,
            note: None,
        };
        (report, fit_h.len())
    }
}

/// Runs the checks under a fixed set of guards and thresholds.
#[derive(Debug, Clone, Copy, Default)]
pub struct Harness {
    pub guards: Guards,
    pub thresholds: Thresholds,
}

impl Harness {
    pub fn new(guards: Guards, thresholds: Thresholds) -> Self {
        Harness { guards, thresholds }
    }

    /// Central difference `(map(base + h dir) - map(base - h dir)) / 2h`.
    ///
    /// When a perturbed point leaves the domain the step is halved, up to
    /// eight times, before giving up.
    pub fn fd_directional<X, Y, F>(
        &self,
        map: F,
        base: &X,
        dir: &X::Tangent,
        h: f64,
    ) -> Result<Y::Tangent>
    where
        X: Point,
        Y: Point,
        F: Fn(&X) -> Result<Y>,
    {
        self.fd_with_step(&map, base, dir, h).map(|(v, _)| v)
    }

    fn fd_with_step<X, Y, F>(
        &self,
        map: &F,
        base: &X,
        dir: &X::Tangent,
        h: f64,
    ) -> Result<(Y::Tangent, f64)>
    where
        X: Point,
        Y: Point,
        F: Fn(&X) -> Result<Y>,
    {
        let mut h = h;
        let mut attempt = 0;
        loop {
            let outcome = base
                .step(dir, h, &self.guards)
                .and_then(|p| map(&p))
                .and_then(|plus| {
                    let minus = map(&base.step(dir, -h, &self.guards)?)?;
                    Ok(plus.displacement(&minus).scaled(0.5 / h))
                });
            match outcome {
                Ok(v) => return Ok((v, h)),
                Err(e) if e.is_guard() && attempt < MAX_SHRINK => {
                    attempt += 1;
                    h *= 0.5;
                }
                Err(e) => return Err(e),
            }
        }
    }

    /// Compares `d_map` against central differences over a step sweep.
    ///
    /// Error at each step is the largest relative level-`k` error over `dirs`.
    /// Passes when the best error is within `fd_rel_tol` and the fitted
    /// order lies in `[fd_slope_min, fd_slope_max]`.
    pub fn check_differential<X, Y, F, D>(
        &self,
        map: F,
        d_map: D,
        base: &X,
        dirs: &[X::Tangent],
        steps: &[f64],
        level: u32,
    ) -> Result<ScReport>
    where
        X: Point,
        Y: Point,
        F: Fn(&X) -> Result<Y>,
        D: Fn(&X, &X::Tangent) -> Result<Y::Tangent>,
    {
        check_steps(steps)?;
        let t = &self.thresholds;
        let magnitude = map(base)?.magnitude(level);
        let exact: Vec<Y::Tangent> = dirs.iter().map(|d| d_map(base, d)).collect::<Result<_>>()?;
        let mut measured = Measured::new();
        for &h in steps {
            let mut error = 0.0f64;
            let mut floor = 0.0f64;
            let mut used = h;
            for (dir, d) in dirs.iter().zip(&exact) {
                let (fd, h_used) = self.fd_with_step(&map, base, dir, h)?;
                used = used.min(h_used);
                let denom = d.level_norm(level).max(t.norm_floor);
                error = error.max(fd.axpy(-1.0, d).level_norm(level) / denom);
                floor = floor
                    .max(ROUNDOFF_FACTOR * f64::EPSILON * (magnitude / (h_used * denom)).max(1.0));
            }
            measured.push(used, error, floor);
        }
        let rule = format!(
            "first differential at level {level} (Sobolev order {}): best relative error <= {:e}, order in [{}, {}]",
            level + 2,
            t.fd_rel_tol,
            t.fd_slope_min,
            t.fd_slope_max
        );
        let (mut report, fitted) = measured.into_report(CheckKind::FirstDifferential, level, rule);
        report.verdict = self.order_verdict(&report, fitted, t.fd_rel_tol);
        Ok(report)
    }

    /// Compares a second differential against the nested central difference
    /// `[f(++) - f(+-) - f(-+) + f(--)] / 4h^2`.
    pub fn check_second_differential<X, Y, F, D>(
        &self,
        map: F,
        d2_map: D,
        base: &X,
        dirs: (&X::Tangent, &X::Tangent),
        steps: &[f64],
        level: u32,
    ) -> Result<ScReport>
    where
        X: Point,
        Y: Point,
        F: Fn(&X) -> Result<Y>,
        D: Fn(&X, &X::Tangent, &X::Tangent) -> Result<Y::Tangent>,
    {
        check_steps(steps)?;
        let t = &self.thresholds;
        let (a, b) = dirs;
        let magnitude = map(base)?.magnitude(level);
        let exact = d2_map(base, a, b)?;
        let denom = exact.level_norm(level).max(t.norm_floor);
        let mut measured = Measured::new();
        for &h in steps {
            let at = |sa: f64, sb: f64| -> Result<Y> {
                let p = base
                    .step(a, sa * h, &self.guards)?
                    .step(b, sb * h, &self.guards)?;
                map(&p)
            };
            let nested = at(1.0, 1.0)?
                .displacement(&at(1.0, -1.0)?)
                .axpy(-1.0, &at(-1.0, 1.0)?.displacement(&at(-1.0, -1.0)?))
                .scaled(0.25 / (h * h));
            let error = nested.axpy(-1.0, &exact).level_norm(level) / denom;
            let floor = ROUNDOFF_FACTOR * f64::EPSILON * (magnitude / (h * h * denom)).max(1.0);
            measured.push(h, error, floor);
        }
        let rule = format!(
            "second differential at level {level} (Sobolev order {}): best relative error <= {:e}, order in [{}, {}]",
            level + 2,
            t.fd2_rel_tol,
            t.fd_slope_min,
            t.fd_slope_max
        );
        let (mut report, fitted) = measured.into_report(CheckKind::SecondDifferential, level, rule);
        report.verdict = self.order_verdict(&report, fitted, t.fd2_rel_tol);
        Ok(report)
    }

    fn order_verdict(&self, report: &ScReport, fitted: usize, tol: f64) -> Verdict {
        let t = &self.thresholds;
        let pass = match report.fitted_slope {
            Some(slope) if fitted >= 2 => {
                report.best_error <= tol && (t.fd_slope_min..=t.fd_slope_max).contains(&slope)
            }
            // central differences were exact up to roundoff
            _ => report.errors.iter().all(|&e| e <= tol),
        };
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    /// sc¹ remainder decay: `r(h) = ||map(base + h dir) - map(base) - h d_map(base, dir)||_m`,
    /// reported as `r(h) / ||dir||_{m+1}`. Passes when the fitted slope of
    /// `r` against `h` reaches `1 + sc1_margin`.
    pub fn sc1_remainder_slope<X, Y, F, D>(
        &self,
        map: F,
        d_map: D,
        base: &X,
        dir: &X::Tangent,
        m: u32,
        steps: &[f64],
    ) -> Result<ScReport>
    where
        X: Point,
        Y: Point,
        F: Fn(&X) -> Result<Y>,
        D: Fn(&X, &X::Tangent) -> Result<Y::Tangent>,
    {
        check_steps(steps)?;
        let t = &self.thresholds;
        let value = map(base)?;
        let linear = d_map(base, dir)?;
        let magnitude = value.magnitude(m);
        let dir_norm = dir.level_norm(m + 1).max(t.norm_floor);
        let mut measured = Measured::new();
        let mut skipped = Vec::new();
        for &h in steps {
            let moved = match base.step(dir, h, &self.guards).and_then(|p| map(&p)) {
                Ok(v) => v,
                Err(e) if e.is_guard() => {
                    skipped.push(h);
                    continue;
                }
                Err(e) => return Err(e),
            };
            let remainder = moved.displacement(&value).axpy(-h, &linear).level_norm(m);
            measured.push(
                h,
                remainder / dir_norm,
                ROUNDOFF_FACTOR * f64::EPSILON * magnitude.max(1.0) / dir_norm,
            );
        }
        let min_slope = 1.0 + t.sc1_margin;
        let rule = format!(
            "sc1 remainder measured at level {m} (Sobolev order {}), base and direction at level {} (order {}): slope >= {min_slope}",
            m + 2,
            m + 1,
            m + 3
        );
        let (mut report, fitted) = measured.into_report(CheckKind::Sc1Remainder, m, rule);
        report.excluded_steps.extend(skipped);
        let pass = match report.fitted_slope {
            Some(slope) if fitted >= 2 => slope >= min_slope,
            // remainder is pure roundoff: the map is affine along this line
            _ => fitted == 0 && !report.steps.is_empty(),
        };
        report.verdict = if pass { Verdict::Pass } else { Verdict::Fail };
        Ok(report)
    }
}

/// Sobolev norms of `z` at levels `0..=k_max`.
pub fn level_norm_profile(z: &Loop, k_max: u32) -> LevelProfile {
    z.level_profile(k_max)
}
