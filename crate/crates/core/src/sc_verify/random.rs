//! Seeded generators for the randomized suites.
//!
//! Every case draws from its own ChaCha stream, so results do not depend on
//! the order in which cases are evaluated.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::circle_diffeo::{CircleDiffeo, TangentDiffeo};
use crate::config::Guards;
use crate::error::Result;
use crate::loop_core::Loop;

/// Highest mode used by the random loop and tangent generators.
pub const MAX_MODE: i64 = 5;
/// Random loops are resampled until their minimum modulus exceeds this.
pub const MIN_MODULUS: f64 = 0.1;
const MAX_DIFFEO_MODE: i64 = 3;

pub fn case_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn disk<R: Rng>(rng: &mut R) -> Complex64 {
    let r = rng.gen::<f64>().sqrt();
    Complex64::from_polar(r, 2.0 * PI * rng.gen::<f64>())
}

/// A band-limited loop with a dominant mode `lead` in `-2..=2` and
/// perturbations at `|m| <= 5`, decaying away from `lead`.
///
/// The perturbation never exceeds the dominant term, so the winding number
/// equals `lead`.
pub fn random_loop<R: Rng>(rng: &mut R, n: usize) -> Result<(Loop, i64)> {
    loop {
        let lead: i64 = rng.gen_range(-2..=2);
        let radius = rng.gen_range(0.5..2.0);
        let mut modes = vec![(
            lead,
            Complex64::from_polar(radius, 2.0 * PI * rng.gen::<f64>()),
        )];
        for m in -MAX_MODE..=MAX_MODE {
            if m != lead {
                let weight = 0.2 / (1.0 + (m - lead).abs() as f64);
                modes.push((m, disk(rng) * (weight * radius)));
            }
        }
        let z = Loop::from_modes(n, &modes)?;
        if z.min_modulus() > MIN_MODULUS {
            return Ok((z, lead));
        }
    }
}

/// A loop-valued direction with modes `|m| <= 5`.
pub fn random_loop_direction<R: Rng>(rng: &mut R, n: usize) -> Result<Loop> {
    let modes: Vec<(i64, Complex64)> = (-MAX_MODE..=MAX_MODE)
        .map(|m| (m, disk(rng) * (0.5 / (1.0 + m.abs() as f64))))
        .collect();
    Loop::from_modes(n, &modes)
}

/// A random diffeomorphism: rotation plus a periodic part with modes `1..=3`
/// whose slope deviation is at most `0.25`.
pub fn random_diffeo<R: Rng>(rng: &mut R, n: usize, guards: &Guards) -> Result<CircleDiffeo> {
    let shift: f64 = rng.gen();
    let coeffs: Vec<(f64, f64)> = (1..=MAX_DIFFEO_MODE)
        .map(|m| {
            let scale = 1.0 / (m * m) as f64;
            (
                rng.gen_range(-1.0..1.0) * scale,
                rng.gen_range(-1.0..1.0) * scale,
            )
        })
        .collect();
    let bound: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(i, (a, b))| 2.0 * PI * (i + 1) as f64 * (a.abs() + b.abs()))
        .sum();
    let target = rng.gen_range(0.05..0.25);
    let amp = target / bound.max(1e-300);
    CircleDiffeo::from_fn(
        n,
        |t| {
            t + shift
                + coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, (a, b))| {
                        let w = 2.0 * PI * (i + 1) as f64 * t;
                        amp * (a * w.cos() + b * w.sin())
                    })
                    .sum::<f64>()
        },
        guards,
    )
}

/// A real periodic direction with modes `0..=5`.
pub fn random_tangent<R: Rng>(rng: &mut R, n: usize) -> Result<TangentDiffeo> {
    let coeffs: Vec<(f64, f64)> = (0..=MAX_MODE)
        .map(|m| {
            let scale = 1.0 / (1.0 + m as f64);
            (
                rng.gen_range(-1.0..1.0) * scale,
                rng.gen_range(-1.0..1.0) * scale,
            )
        })
        .collect();
    TangentDiffeo::from_fn(n, |t| {
        coeffs
            .iter()
            .enumerate()
            .map(|(m, (a, b))| {
                let w = 2.0 * PI * m as f64 * t;
                a * w.cos() + b * w.sin()
            })
            .sum()
    })
}
