//! JSON file formats for loops, diffeomorphisms and verification reports.
//!
//! Loop files are either
//! `{"n": 8, "samples": [[re, im], ...]}` or `{"modes": {"1": [re, im]}, "n": 16}`.
//! Diffeomorphism files are `{"n": 8, "lift": [...]}` with `lift[0]` in `[0, 1)`,
//! strictly increasing, and `lift[n-1] < lift[0] + 1`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circle_diffeo::CircleDiffeo;
use crate::config::Guards;
use crate::error::{Error, Result};
use crate::loop_core::{Coefficients, Loop};
use crate::sc_verify::{CheckKind, ScReport};
use crate::spectral::check_grid;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoopFileIn {
    n: usize,
    samples: Option<Vec<[f64; 2]>>,
    modes: Option<BTreeMap<String, [f64; 2]>>,
}

#[derive(Debug, Serialize)]
struct LoopFileOut<'a> {
    n: usize,
    samples: &'a [[f64; 2]],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DiffeoFile {
    n: usize,
    lift: Vec<f64>,
}

pub fn parse_loop(text: &str) -> Result<Loop> {
    let raw: LoopFileIn = serde_json::from_str(text)?;
    check_grid(raw.n)
        .map_err(|_| Error::Format(format!("n = {} is not a power of two >= 8", raw.n)))?;
    match (raw.samples, raw.modes) {
        (Some(samples), None) => {
            if samples.len() != raw.n {
                return Err(Error::Format(format!(
                    "expected {} samples, found {}",
                    raw.n,
                    samples.len()
                )));
            }
            Loop::from_samples(
                samples
                    .iter()
                    .map(|&[re, im]| Complex64::new(re, im))
                    .collect(),
            )
        }
        (None, Some(modes)) => {
            let modes = modes
                .iter()
                .map(|(key, &[re, im])| {
                    key.trim()
                        .parse::<i64>()
                        .map(|m| (m, Complex64::new(re, im)))
                        .map_err(|_| Error::Format(format!("mode key `{key}` is not an integer")))
                })
                .collect::<Result<Vec<_>>>()?;
            crate::loop_core::synthesize(&Coefficients::from_modes(raw.n, &modes)?)
        }
        _ => Err(Error::Format(
            "exactly one of `samples` or `modes` is required".into(),
        )),
    }
}

pub fn loop_to_json(z: &Loop) -> String {
    let samples: Vec<[f64; 2]> = z.samples().iter().map(|c| [c.re, c.im]).collect();
    serde_json::to_string(&LoopFileOut {
        n: z.n(),
        samples: &samples,
    })
    .expect("loop serializes")
}

pub fn read_loop(path: &Path) -> Result<Loop> {
    parse_loop(&fs::read_to_string(path)?)
}

pub fn write_loop(path: &Path, z: &Loop) -> Result<()> {
    Ok(fs::write(path, loop_to_json(z))?)
}

pub fn parse_diffeo(text: &str, guards: &Guards) -> Result<CircleDiffeo> {
    let raw: DiffeoFile = serde_json::from_str(text)?;
    check_grid(raw.n)
        .map_err(|_| Error::Format(format!("n = {} is not a power of two >= 8", raw.n)))?;
    if raw.lift.len() != raw.n {
        return Err(Error::Format(format!(
            "expected {} lift values, found {}",
            raw.n,
            raw.lift.len()
        )));
    }
    let first = raw.lift[0];
    if !(0.0..1.0).contains(&first) {
        return Err(Error::Format(format!("lift[0] = {first} is not in [0, 1)")));
    }
    if !raw.lift.windows(2).all(|w| w[0] < w[1]) || raw.lift[raw.n - 1] >= first + 1.0 {
        return Err(Error::Format(
            "lift is not strictly increasing modulo the +1 wrap".into(),
        ));
    }
    CircleDiffeo::from_lift(raw.lift, guards)
}

/// Serializes with the integer offset chosen so that `lift[0]` lies in `[0, 1)`.
pub fn diffeo_to_json(psi: &CircleDiffeo) -> String {
    let offset = psi.lift()[0].floor();
    let lift = psi.lift().iter().map(|x| x - offset).collect();
    serde_json::to_string(&DiffeoFile { n: psi.n(), lift }).expect("diffeo serializes")
}

pub fn read_diffeo(path: &Path, guards: &Guards) -> Result<CircleDiffeo> {
    parse_diffeo(&fs::read_to_string(path)?, guards)
}

pub fn write_diffeo(path: &Path, psi: &CircleDiffeo) -> Result<()> {
    Ok(fs::write(path, diffeo_to_json(psi))?)
}

pub fn reports_to_json(reports: &[ScReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}

/// One `(h, error)` row per step per case.
#[derive(Serialize)]
struct StepRow<'a> {
    case: usize,
    map_name: &'a str,
    kind: CheckKind,
    level: u32,
    negative_control: bool,
    h: f64,
    error: f64,
    excluded: bool,
}

/// One row per step of every report.
pub fn write_reports_csv(path: impl AsRef<Path>, reports: &[ScReport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (case, r) in reports.iter().enumerate() {
        for (&h, &error) in r.steps.iter().zip(&r.errors) {
            w.serialize(StepRow {
                case,
                map_name: &r.map_name,
                kind: r.kind,
                level: r.level,
                negative_control: r.negative_control,
                h,
                error,
                excluded: r.excluded_steps.contains(&h),
            })?;
        }
    }
    w.flush()?;
    Ok(())
}
