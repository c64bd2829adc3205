//! The time-rescaling clock `t_z`, its inverse `tau_z`, the rescale-square map
//! `R(z) = z^2 o tau_z` and the chain-rule differential of `R`.
//!
//! `t_z(s) = (1/N) int_0^s |z|^2` with `N = ||z||_{L^2}^2`. The squared modulus is
//! sampled on the `2n` grid, where it is alias-free, and integrated spectrally:
//! the mean contributes the linear part of the lift and the zero-mean part is
//! integrated mode by mode. All outputs therefore live on the `2n` grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circle_diffeo::{compose_loop, d_invert_at, invert, CircleDiffeo, TangentDiffeo};
use crate::config::Guards;
use crate::error::Result;
use crate::loop_core::{LevelProfile, Loop};
use crate::spectral;

/// Mean and periodic antiderivative (vanishing at 0) of a real periodic sample vector.
fn integrate(samples: &[f64]) -> (f64, Vec<f64>) {
    let n = samples.len();
    let mut coeffs = spectral::forward_real(samples);
    let mean = coeffs[0].re;
    coeffs[0] = Complex64::new(0.0, 0.0);
    coeffs[n / 2] = Complex64::new(0.0, 0.0);
    for (j, c) in coeffs.iter_mut().enumerate().skip(1) {
        let m = spectral::mode_of(j, n) as f64;
        *c /= Complex64::new(0.0, 2.0 * PI * m);
    }
    let mut anti = spectral::inverse_real(&coeffs);
    let at_zero = anti[0];
    anti.iter_mut().for_each(|x| *x -= at_zero);
    (mean, anti)
}

/// The clock `t_z` as a lift on the `2n` grid.
pub fn time_rescale(z: &Loop, guards: &Guards) -> Result<CircleDiffeo> {
    z.check_collision(guards.eps_collision)?;
    let modulus_sq = z.modulus_sq_refined();
    let n2 = modulus_sq.len();
    let (norm_sq, anti) = integrate(&modulus_sq);
    let lift = anti
        .iter()
        .enumerate()
        .map(|(j, a)| j as f64 / n2 as f64 + a / norm_sq)
        .collect();
    CircleDiffeo::from_lift(lift, guards)
}

/// `tau_z = t_z^-1`.
pub fn inverse_time(z: &Loop, guards: &Guards) -> Result<CircleDiffeo> {
    invert(&time_rescale(z, guards)?, guards)
}

/// `R(z) = z^2 o tau_z`, on the `2n` grid.
pub fn regularize(z: &Loop, guards: &Guards) -> Result<Loop> {
    let tau = inverse_time(z, guards)?;
    Ok(compose_loop(&z.square(), &tau))
}

/// Diagnostics for one application of `R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularizeDiagnostics {
    pub n_input: usize,
    pub n_output: usize,
    pub winding_input: i64,
    pub winding_output: i64,
    pub min_modulus_input: f64,
    pub min_modulus_output: f64,
    pub profile_input: LevelProfile,
    pub profile_output: LevelProfile,
    /// `max_j |t_z(tau_z(t_j)) - t_j|` over the output grid.
    pub clock_residual: f64,
}

/// `R(z)` together with its diagnostics, with Sobolev profiles up to level `k_max`.
pub fn regularize_with_diagnostics(
    z: &Loop,
    guards: &Guards,
    k_max: u32,
) -> Result<(Loop, RegularizeDiagnostics)> {
    let clock = time_rescale(z, guards)?;
    let tau = invert(&clock, guards)?;
    let out = compose_loop(&z.square(), &tau);
    let n_out = out.n();
    let clock_residual = tau
        .lift()
        .iter()
        .enumerate()
        .map(|(j, &s)| (clock.lift_at(s) - j as f64 / n_out as f64).abs())
        .fold(0.0, f64::max);
    let diagnostics = RegularizeDiagnostics {
        n_input: z.n(),
        n_output: n_out,
        winding_input: z.winding_number(guards.eps_collision)?,
        winding_output: out.winding_number(guards.eps_collision)?,
        min_modulus_input: z.min_modulus(),
        min_modulus_output: out.min_modulus(),
        profile_input: z.level_profile(k_max),
        profile_output: out.level_profile(k_max),
        clock_residual,
    };
    Ok((out, diagnostics))
}

/// Directional derivative of `z -> t_z` along `dz`.
///
/// With `N = ||z||^2`, `A(s) = int_0^s (|z|^2 - N)` and
/// `G(s) = int_0^s 2 Re(conj(z) dz)` split into mean `g0` and periodic part `Gp`,
/// the linear terms cancel and `Dt(s) = Gp(s)/N - A(s) g0 / N^2`.
pub fn d_time_rescale(z: &Loop, dz: &Loop, guards: &Guards) -> Result<TangentDiffeo> {
    z.check_collision(guards.eps_collision)?;
    let n2 = 2 * z.n().max(dz.n());
    let zf = z.refined(n2);
    let df = dz.refined(n2);
    let modulus_sq: Vec<f64> = zf.iter().map(|x| x.norm_sqr()).collect();
    let variation: Vec<f64> = zf
        .iter()
        .zip(&df)
        .map(|(a, b)| 2.0 * (a.conj() * b).re)
        .collect();
    let (norm_sq, anti) = integrate(&modulus_sq);
    let (g0, g_anti) = integrate(&variation);
    let samples = anti
        .iter()
        .zip(&g_anti)
        .map(|(a, g)| g / norm_sq - a * g0 / (norm_sq * norm_sq))
        .collect();
    TangentDiffeo::from_samples(samples)
}

/// Directional derivative of `R` along `dz`, assembled by the chain rule
/// through `R(z) = rho(z^2, I(t_z))` with `rho(psi, w) = w o psi`:
///
/// `DR = (2 z dz) o tau_z + (w' o tau_z) * DI|_{t_z}(Dt|_z dz)`.
pub fn d_regularize(z: &Loop, dz: &Loop, guards: &Guards) -> Result<Loop> {
    let n = z.n().max(dz.n());
    let z = z.resample(n)?;
    let clock = time_rescale(&z, guards)?;
    let tau = invert(&clock, guards)?;
    let dw = z.square().derivative();
    let linear = compose_loop(&z.product(dz).scale(Complex64::new(2.0, 0.0)), &tau);
    let dclock = d_time_rescale(&z, dz, guards)?;
    let dtau = d_invert_at(&clock, &tau, &dclock);
    let samples = linear
        .samples()
        .iter()
        .zip(tau.lift())
        .zip(dtau.samples())
        .map(|((&l, &x), &eta)| l + dw.evaluate(x) * eta)
        .collect();
    Loop::from_samples(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    const TAU: f64 = 2.0 * PI;

    fn g() -> Guards {
        Guards::default()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn offset_circle(n: usize) -> Loop {
        Loop::from_fn(n, |t| 1.0 + 0.5 * Complex64::cis(TAU * t)).unwrap()
    }

    fn generic(n: usize) -> Loop {
        Loop::from_modes(
            n,
            &[
                (1, c(1.0, 0.2)),
                (0, c(0.1, -0.15)),
                (-2, c(0.12, 0.05)),
                (3, c(-0.04, 0.07)),
            ],
        )
        .unwrap()
    }

    fn direction(n: usize) -> Loop {
        Loop::from_modes(
            n,
            &[(0, c(0.3, 0.1)), (2, c(-0.2, 0.25)), (-1, c(0.1, -0.3))],
        )
        .unwrap()
    }

    #[test]
    fn clock_of_uniform_speed_loops_is_identity() {
        let id = CircleDiffeo::identity(32).unwrap();
        let constant = time_rescale(&Loop::constant(16, c(2.0, -1.0)).unwrap(), &g()).unwrap();
        assert!(constant.max_lift_distance(&id) < 1e-15);
        let circle = Loop::from_fn(16, |t| Complex64::cis(TAU * t)).unwrap();
        assert!(time_rescale(&circle, &g()).unwrap().max_lift_distance(&id) < 1e-15);
    }

    #[test]
    fn clock_closed_form() {
        let clock = time_rescale(&offset_circle(16), &g()).unwrap();
        assert_eq!(clock.lift()[0], 0.0);
        let expect = 0.25 + 1.0 / (2.5 * PI);
        assert!((expect - 0.377_323_954_473_516_3).abs() < 1e-12);
        assert!((clock.lift_at(0.25) - expect).abs() < 1e-13);
        for j in 0..100 {
            let t = j as f64 / 100.0 + 0.003;
            let closed = t + (TAU * t).sin() / (2.5 * PI);
            assert!((clock.lift_at(t) - closed).abs() < 1e-13);
            let speed = (1.25 + (TAU * t).cos()) / 1.25;
            assert!((clock.slope_at(t) - speed).abs() < 1e-10);
        }
    }

    #[test]
    fn clock_rejects_collisions() {
        let z = Loop::from_fn(16, |t| Complex64::cis(TAU * t) - 1.0).unwrap();
        assert!(matches!(
            time_rescale(&z, &g()),
            Err(Error::Collision { .. })
        ));
        assert!(matches!(regularize(&z, &g()), Err(Error::Collision { .. })));
    }

    #[test]
    fn inverse_time_residual() {
        let z = generic(32);
        let clock = time_rescale(&z, &g()).unwrap();
        let tau = inverse_time(&z, &g()).unwrap();
        for (j, &x) in tau.lift().iter().enumerate() {
            assert!((clock.lift_at(x) - j as f64 / 64.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn regularize_golden_cases() {
        let r = regularize(&Loop::constant(8, c(2.0, 0.0)).unwrap(), &g()).unwrap();
        assert!(r.samples().iter().all(|x| (x - 4.0).norm() < 1e-12));
        let r = regularize(
            &Loop::from_fn(16, |t| Complex64::cis(TAU * t)).unwrap(),
            &g(),
        )
        .unwrap();
        let expect = Loop::from_fn(32, |t| Complex64::cis(2.0 * TAU * t)).unwrap();
        assert!(r.max_distance(&expect) < 1e-12);
    }

    #[test]
    fn regularize_modulus_identity() {
        let z = generic(32);
        let r = regularize(&z, &g()).unwrap();
        let tau = inverse_time(&z, &g()).unwrap();
        for (x, &s) in r.samples().iter().zip(tau.lift()) {
            assert!((x.norm() - z.evaluate(s).norm_sqr()).abs() < 1e-10);
        }
    }

    #[test]
    fn d_time_rescale_vanishes_on_scaling_and_rotation() {
        let z = generic(32);
        let radial = d_time_rescale(&z, &z, &g()).unwrap();
        let phase = d_time_rescale(&z, &z.scale(c(0.0, 1.0)), &g()).unwrap();
        assert!(radial.max_abs() < 1e-14);
        assert!(phase.max_abs() < 1e-14);
    }

    #[test]
    fn d_time_rescale_matches_finite_differences() {
        let (z, dz) = (generic(32), direction(32));
        let exact = d_time_rescale(&z, &dz, &g()).unwrap();
        assert_eq!(exact.samples()[0], 0.0);
        let h = 1e-4;
        let plus = time_rescale(&z.axpy(h, &dz), &g()).unwrap();
        let minus = time_rescale(&z.axpy(-h, &dz), &g()).unwrap();
        let fd = plus.displacement(&minus).scale(0.5 / h);
        let rel = fd.axpy(-1.0, &exact).sobolev_norm(0) / exact.sobolev_norm(0);
        assert!(rel < 1e-6, "{rel:e}");
    }

    #[test]
    fn d_regularize_constant_and_phase_direction() {
        let (cz, dz) = (c(1.5, -0.5), c(0.25, 2.0));
        let z = Loop::constant(16, cz).unwrap();
        let d = d_regularize(&z, &Loop::constant(16, dz).unwrap(), &g()).unwrap();
        assert!(d
            .samples()
            .iter()
            .all(|x| (x - 2.0 * cz * dz).norm() < 1e-12));

        let circle = Loop::from_fn(16, |t| Complex64::cis(TAU * t)).unwrap();
        let d = d_regularize(&circle, &circle.scale(c(0.0, 1.0)), &g()).unwrap();
        let expect = Loop::from_fn(32, |t| c(0.0, 2.0) * Complex64::cis(2.0 * TAU * t)).unwrap();
        assert!(d.max_distance(&expect) < 1e-12);
    }

    #[test]
    fn d_regularize_is_linear_and_matches_finite_differences() {
        let z = generic(32);
        let (d1, d2) = (direction(32), z.derivative().scale(c(0.01, 0.02)));
        let (a, b) = (0.7, -1.3);
        let lhs = d_regularize(&z, &d1.scale(c(a, 0.0)).axpy(b, &d2), &g()).unwrap();
        let rhs = d_regularize(&z, &d1, &g())
            .unwrap()
            .scale(c(a, 0.0))
            .axpy(b, &d_regularize(&z, &d2, &g()).unwrap());
        assert!(lhs.max_distance(&rhs) < 1e-10);

        let exact = d_regularize(&z, &d1, &g()).unwrap();
        let h = 1e-4;
        let plus = regularize(&z.axpy(h, &d1), &g()).unwrap();
        let minus = regularize(&z.axpy(-h, &d1), &g()).unwrap();
        let fd = plus.axpy(-1.0, &minus).scale(c(0.5 / h, 0.0));
        let rel = fd.axpy(-1.0, &exact).sobolev_norm(0) / exact.sobolev_norm(0);
        assert!(rel < 1e-6, "{rel:e}");
    }

    #[test]
    fn sign_and_scaling_equivariance() {
        let z = generic(32);
        let r = regularize(&z, &g()).unwrap();
        assert_eq!(regularize(&z.map_samples(|x| -x), &g()).unwrap(), r);
        let k = c(-0.6, 1.7);
        let scaled = regularize(&z.scale(k), &g()).unwrap();
        assert!(scaled.max_distance(&r.scale(k * k)) < 1e-10);
    }

    #[test]
    fn time_shift_equivariance() {
        let z = generic(64);
        let s = 0.231;
        let shifted = compose_loop(&z, &CircleDiffeo::rotation(64, s).unwrap());
        let lhs = regularize(&shifted, &g()).unwrap();
        let clock = time_rescale(&z, &g()).unwrap();
        let offset = clock.lift_at(s);
        let sq = z.square();
        // R(z)(t + t_z(s)), with the clock inverted by bisection
        let rhs = Loop::from_fn(128, |t| {
            let target = t + offset;
            sq.evaluate(crate::gallery::bisect(
                |x| clock.lift_at(x),
                target,
                target - 1.0,
                target + 1.0,
            ))
        })
        .unwrap();
        let err = lhs
            .samples()
            .iter()
            .zip(rhs.samples())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-9, "{err:e}");
    }

    #[test]
    fn diagnostics_agree_with_regularize() {
        let z = generic(32);
        let (out, diag) = regularize_with_diagnostics(&z, &g(), 3).unwrap();
        assert_eq!(out, regularize(&z, &g()).unwrap());
        assert_eq!((diag.n_input, diag.n_output), (32, 64));
        assert_eq!((diag.winding_input, diag.winding_output), (1, 2));
        assert!(diag.clock_residual < 1e-12);
        assert_eq!(diag.profile_output.norms.len(), 4);
        // |R(z)| = |z|^2 o tau_z; the two minima are sampled on different grids
        let m = z.min_modulus();
        assert!((diag.min_modulus_output - m * m).abs() < 1e-3 * m * m);
    }

    #[test]
    fn winding_doubles() {
        for lead in -2..=2i64 {
            let z = Loop::from_modes(
                32,
                &[
                    (lead, c(1.0, 0.0)),
                    (lead + 1, c(0.2, 0.1)),
                    (lead - 2, c(0.0, 0.1)),
                ],
            )
            .unwrap();
            let w = z.winding_number(1e-8).unwrap();
            assert_eq!(w, lead);
            assert_eq!(
                regularize(&z, &g()).unwrap().winding_number(1e-8).unwrap(),
                2 * w
            );
        }
    }
}
