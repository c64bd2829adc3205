//! Discrete Fourier machinery shared by loops, diffeomorphisms and tangents.
//!
//! Coefficient vectors are stored in FFT order: index `j < n/2` holds mode `j`,
//! index `j >= n/2` holds mode `j - n`. Transforms are normalized so that
//! `c_m = (1/n) sum_j f_j e^{-2 pi i m j / n}` and `f(t) = sum_m c_m e^{2 pi i m t}`.
//!
//! The Nyquist coefficient (mode `-n/2`) is interpolated symmetrically as
//! `c cos(pi n t)`. That keeps real data real off the grid, and it is the
//! convention used by evaluation, resampling and differentiation alike.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

const TAU: f64 = 2.0 * PI;
const RESEED: usize = 32;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn check_grid(n: usize) -> Result<()> {
    if n >= 8 && n.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::GridSize(n))
    }
}

pub(crate) fn mode_of(index: usize, n: usize) -> i64 {
    if index < n / 2 {
        index as i64
    } else {
        index as i64 - n as i64
    }
}

pub(crate) fn index_of(m: i64, n: usize) -> usize {
    m.rem_euclid(n as i64) as usize
}

/// Samples to coefficients.
pub(crate) fn forward(samples: &[Complex64]) -> Vec<Complex64> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n).process(&mut buf));
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

pub(crate) fn forward_real(samples: &[f64]) -> Vec<Complex64> {
    let buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    forward(&buf)
}

/// Coefficients to samples.
pub(crate) fn inverse(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len();
    let mut buf = coeffs.to_vec();
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n).process(&mut buf));
    buf
}

pub(crate) fn inverse_real(coeffs: &[Complex64]) -> Vec<f64> {
    inverse(coeffs).into_iter().map(|c| c.re).collect()
}

/// Zero-pads (or truncates) a coefficient vector to a new grid size.
pub(crate) fn resample(coeffs: &[Complex64], n_new: usize) -> Vec<Complex64> {
    let n = coeffs.len();
    if n_new == n {
        return coeffs.to_vec();
    }
    let mut out = vec![Complex64::new(0.0, 0.0); n_new];
    let half = n.min(n_new) / 2;
    for m in 1 - half as i64..half as i64 {
        out[index_of(m, n_new)] = coeffs[index_of(m, n)];
    }
    if n_new > n {
        let nyq = coeffs[n / 2] * 0.5;
        out[index_of(half as i64, n_new)] = nyq;
        out[index_of(-(half as i64), n_new)] = nyq;
    } else {
        let h = half as i64;
        out[n_new / 2] = coeffs[index_of(-h, n)] + coeffs[index_of(h, n)];
    }
    out
}

/// Spectral derivative; the Nyquist mode has zero derivative on the grid.
pub(crate) fn derivative(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len();
    coeffs
        .iter()
        .enumerate()
        .map(|(j, &c)| {
            if j == n / 2 {
                Complex64::new(0.0, 0.0)
            } else {
                c * Complex64::new(0.0, TAU * mode_of(j, n) as f64)
            }
        })
        .collect()
}

/// `sum_m (1 + (2 pi m)^2)^order |c_m|^2`.
pub(crate) fn sobolev_sq(coeffs: &[Complex64], order: f64) -> f64 {
    let n = coeffs.len();
    coeffs
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let w = TAU * mode_of(j, n) as f64;
            (1.0 + w * w).powf(order) * c.norm_sqr()
        })
        .sum()
}

/// Samples of the interpolant on a grid of size `n_new >= n`, with the
/// original samples copied verbatim onto the coarse sub-grid.
pub(crate) fn refine(samples: &[Complex64], coeffs: &[Complex64], n_new: usize) -> Vec<Complex64> {
    let n = samples.len();
    let mut fine = inverse(&resample(coeffs, n_new));
    let stride = n_new / n;
    for (j, &s) in samples.iter().enumerate() {
        fine[j * stride] = s;
    }
    fine
}

/// Evaluates the trigonometric interpolant and its derivative at `t`.
pub(crate) fn eval_with_derivative(coeffs: &[Complex64], t: f64) -> (Complex64, Complex64) {
    let n = coeffs.len();
    let t = t - t.floor();
    let step = Complex64::cis(TAU * t);
    let mut power = Complex64::new(1.0, 0.0);
    let mut value = coeffs[0];
    let mut slope = Complex64::new(0.0, 0.0);
    for m in 1..n / 2 {
        power = if m % RESEED == 0 {
            Complex64::cis(TAU * ((m as f64 * t) % 1.0))
        } else {
            power * step
        };
        let pos = coeffs[m] * power;
        let neg = coeffs[n - m] * power.conj();
        value += pos + neg;
        slope += (pos - neg) * Complex64::new(0.0, TAU * m as f64);
    }
    let nyq = coeffs[n / 2];
    let angle = PI * ((n as f64 * t) % 2.0);
    value += nyq * angle.cos();
    slope -= nyq * (PI * n as f64 * angle.sin());
    (value, slope)
}

pub(crate) fn eval(coeffs: &[Complex64], t: f64) -> Complex64 {
    let n = coeffs.len();
    let t = t - t.floor();
    let step = Complex64::cis(TAU * t);
    let mut power = Complex64::new(1.0, 0.0);
    let mut value = coeffs[0];
    for m in 1..n / 2 {
        power = if m % RESEED == 0 {
            Complex64::cis(TAU * ((m as f64 * t) % 1.0))
        } else {
            power * step
        };
        value += coeffs[m] * power + coeffs[n - m] * power.conj();
    }
    value + coeffs[n / 2] * (PI * ((n as f64 * t) % 2.0)).cos()
}

/// Grid index of `t` if `t mod 1` lies exactly on the uniform n-grid.
pub(crate) fn grid_index(t: f64, n: usize) -> Option<usize> {
    let x = (t - t.floor()) * n as f64;
    (x == x.floor()).then(|| (x as usize) % n)
}
