//! Worked examples written as input/expected loop-file pairs plus a manifest.
//!
//! Expected outputs do not go through `regularize`: the constant and pure-mode
//! cases are closed forms, and `1 + 0.5 e^{2 pi i s}` uses its closed-form clock
//! `t(s) = s + sin(2 pi s) / (2.5 pi)` inverted by bisection.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bov_map::time_rescale;
use crate::config::Config;
use crate::error::Result;
use crate::io::write_loop;
use crate::loop_core::Loop;

pub const TZ_PROFILE_FILE: &str = "tz_profile.csv";
pub const TZ_PROFILE_POINTS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GalleryEntry {
    pub name: String,
    pub description: String,
    pub input: String,
    pub expected: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub n: usize,
    pub entries: Vec<GalleryEntry>,
    pub tz_profile: String,
}

pub fn offset_circle(s: f64) -> Complex64 {
    1.0 + 0.5 * Complex64::cis(2.0 * PI * s)
}

/// Closed-form clock of `1 + 0.5 e^{2 pi i s}`.
pub fn offset_circle_clock(s: f64) -> f64 {
    s + (2.0 * PI * s).sin() / (2.5 * PI)
}

/// Inverts a strictly increasing function on `[lo, hi]` by bisection.
pub fn bisect(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn offset_circle_expected(n_out: usize) -> Result<Loop> {
    Loop::from_fn(n_out, |t| {
        // |sin(2 pi s)| / (2.5 pi) < 0.13
        let s = bisect(offset_circle_clock, t, t - 0.13, t + 0.13);
        let z = offset_circle(s);
        z * z
    })
}

/// Writes the gallery into `dir` and returns its manifest.
pub fn write_gallery(dir: &Path, cfg: &Config) -> Result<Manifest> {
    cfg.validate()?;
    fs::create_dir_all(dir)?;
    let n = cfg.n;
    let cases: Vec<(&str, &str, Loop, Loop)> = vec![
        (
            "constant",
            "z = 2; R(z) = 4",
            Loop::constant(n, Complex64::new(2.0, 0.0))?,
            Loop::constant(2 * n, Complex64::new(4.0, 0.0))?,
        ),
        (
            "pure_mode",
            "z = e^{2 pi i s}; uniform speed, R(z) = e^{4 pi i t}",
            Loop::from_fn(n, |s| Complex64::cis(2.0 * PI * s))?,
            Loop::from_fn(2 * n, |t| Complex64::cis(4.0 * PI * t))?,
        ),
        (
            "offset_circle",
            "z = 1 + 0.5 e^{2 pi i s}; clock s + sin(2 pi s)/(2.5 pi), inverted by bisection",
            Loop::from_fn(n, offset_circle)?,
            offset_circle_expected(2 * n)?,
        ),
    ];
    let mut entries = Vec::new();
    for (name, description, input, expected) in cases {
        let input_file = format!("{name}.input.json");
        let expected_file = format!("{name}.expected.json");
        write_loop(&dir.join(&input_file), &input)?;
        write_loop(&dir.join(&expected_file), &expected)?;
        entries.push(GalleryEntry {
            name: name.to_string(),
            description: description.to_string(),
            input: input_file,
            expected: expected_file,
        });
    }

    let clock = time_rescale(&Loop::from_fn(n, offset_circle)?, &cfg.guards())?;
    let mut csv = csv::Writer::from_path(dir.join(TZ_PROFILE_FILE))?;
    csv.write_record(["s", "t_z", "closed_form", "abs_error"])?;
    for i in 0..TZ_PROFILE_POINTS {
        let s = i as f64 / TZ_PROFILE_POINTS as f64;
        let (got, want) = (clock.lift_at(s), offset_circle_clock(s));
        csv.serialize((s, got, want, (got - want).abs()))?;
    }
    csv.flush()?;

    let manifest = Manifest {
        n,
        entries,
        tz_profile: TZ_PROFILE_FILE.to_string(),
    };
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bov_map::regularize;
    use crate::io::read_loop;

    #[test]
    fn gallery_matches_regularize_and_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = Config::default();
        let manifest = write_gallery(dir.path(), &cfg).unwrap();
        assert_eq!(manifest.entries.len(), 3);
        for e in &manifest.entries {
            let input = read_loop(&dir.path().join(&e.input)).unwrap();
            let expected = read_loop(&dir.path().join(&e.expected)).unwrap();
            let got = regularize(&input, &cfg.guards()).unwrap();
            assert!(got.max_distance(&expected) < 1e-9, "{}", e.name);
        }
        let first = fs::read(dir.path().join(TZ_PROFILE_FILE)).unwrap();
        let again = tempfile::tempdir().unwrap();
        write_gallery(again.path(), &cfg).unwrap();
        for f in [
            "manifest.json",
            TZ_PROFILE_FILE,
            "offset_circle.expected.json",
        ] {
            assert_eq!(
                fs::read(dir.path().join(f)).unwrap(),
                fs::read(again.path().join(f)).unwrap()
            );
        }
        let text = String::from_utf8(first).unwrap();
        for line in text.lines().skip(1) {
            let err: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
            assert!(err <= 1e-10);
        }
    }
}
