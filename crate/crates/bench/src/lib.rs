//! Fixtures shared by the criterion benches.

use loopreg::{CircleDiffeo, Complex64, Guards, Loop, Result, TangentDiffeo};
use std::f64::consts::PI;

pub fn bench_loop(n: usize) -> Result<Loop> {
    Loop::from_modes(
        n,
        &[
            (1, Complex64::new(1.0, 0.2)),
            (0, Complex64::new(0.1, -0.15)),
            (-2, Complex64::new(0.12, 0.05)),
            (3, Complex64::new(-0.04, 0.07)),
        ],
    )
}

pub fn bench_direction(n: usize) -> Result<Loop> {
    Loop::from_modes(
        n,
        &[
            (0, Complex64::new(0.3, 0.1)),
            (2, Complex64::new(-0.2, 0.25)),
        ],
    )
}

pub fn bench_diffeo(n: usize) -> Result<CircleDiffeo> {
    CircleDiffeo::from_fn(
        n,
        |t| t + 0.05 * (2.0 * PI * t).sin() + 0.01 * (6.0 * PI * t).cos(),
        &Guards::default(),
    )
}

pub fn bench_tangent(n: usize) -> Result<TangentDiffeo> {
    TangentDiffeo::from_fn(n, |t| (2.0 * PI * t).cos() + 0.3 * (4.0 * PI * t).sin())
}
