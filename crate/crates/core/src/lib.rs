//! Rescale-square regularization of loops in the punctured complex plane.
//!
//! A loop `z: S^1 -> C \ {0}` is reparametrized by the inverse of its
//! normalized squared-modulus clock `t_z` and then squared:
//! `R(z) = z^2 o tau_z` with `tau_z = t_z^-1`. The crate provides the loop and
//! circle-diffeomorphism machinery this needs, the analytic first and second
//! differentials of diffeomorphism inversion, the chain-rule differential of
//! `R`, and a finite-difference harness that checks the scale-smoothness
//! contracts numerically.

pub mod bov_map;
pub mod circle_diffeo;
pub mod config;
pub mod error;
pub mod gallery;
pub mod io;
pub mod loop_core;
pub mod sc_verify;
mod spectral;

pub use bov_map::{
    d_regularize, d_time_rescale, inverse_time, regularize, regularize_with_diagnostics,
    time_rescale, RegularizeDiagnostics,
};
pub use circle_diffeo::{
    compose_diffeo, compose_loop, d2_invert, d_invert, invert, make_diffeo, CircleDiffeo,
    TangentDiffeo,
};
pub use config::{Config, Guards, Thresholds};
pub use error::{Error, Result};
pub use loop_core::{analyze, synthesize, Coefficients, LevelProfile, Loop};
pub use num_complex::Complex64;
pub use sc_verify::{ScReport, Verdict};
