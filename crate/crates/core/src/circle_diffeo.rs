//! Orientation-preserving circle diffeomorphisms and their tangent vectors.
//!
//! A diffeomorphism is stored through its degree-1 lift `lift(x) = x + p(x)`
//! sampled on a uniform grid, where `p` is periodic and interpolated
//! spectrally. Any integer offset of the lift represents the same circle map;
//! operations keep whatever offset falls out of the computation, so that
//! nearby inputs produce nearby lifts.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::config::Guards;
use crate::error::{Error, Result};
use crate::loop_core::{Loop, BASE_ORDER};
use crate::spectral;

const NEWTON_TOL: f64 = 1e-13;
const NEWTON_MAX_ITER: usize = 50;

#[derive(Debug, Clone)]
pub struct CircleDiffeo {
    lift: Vec<f64>,
    periodic: Vec<Complex64>,
    periodic_d1: OnceLock<Vec<Complex64>>,
    periodic_d2: OnceLock<Vec<Complex64>>,
}

/// A periodic real function, read as a tangent vector to the diffeomorphism group.
#[derive(Debug, Clone)]
pub struct TangentDiffeo {
    samples: Vec<f64>,
    coeffs: OnceLock<Vec<Complex64>>,
}

impl TangentDiffeo {
    pub fn from_samples(samples: Vec<f64>) -> Result<Self> {
        spectral::check_grid(samples.len())?;
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(TangentDiffeo {
            samples,
            coeffs: OnceLock::new(),
        })
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        spectral::check_grid(n)?;
        Self::from_samples((0..n).map(|j| f(j as f64 / n as f64)).collect())
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::from_samples(vec![0.0; n])
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    fn coeffs(&self) -> &[Complex64] {
        self.coeffs
            .get_or_init(|| spectral::forward_real(&self.samples))
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        match spectral::grid_index(t, self.n()) {
            Some(j) => self.samples[j],
            None => spectral::eval(self.coeffs(), t).re,
        }
    }

    pub fn derivative(&self) -> TangentDiffeo {
        let coeffs = spectral::derivative(self.coeffs());
        TangentDiffeo {
            samples: spectral::inverse_real(&coeffs),
            coeffs: OnceLock::from(coeffs),
        }
    }

    pub fn resample(&self, n: usize) -> Result<TangentDiffeo> {
        spectral::check_grid(n)?;
        if n == self.n() {
            return Ok(self.clone());
        }
        let coeffs = spectral::resample(self.coeffs(), n);
        let samples = if n > self.n() {
            let complex: Vec<Complex64> = self
                .samples
                .iter()
                .map(|&x| Complex64::new(x, 0.0))
                .collect();
            spectral::refine(&complex, self.coeffs(), n)
                .into_iter()
                .map(|c| c.re)
                .collect()
        } else {
            spectral::inverse_real(&coeffs)
        };
        Ok(TangentDiffeo {
            samples,
            coeffs: OnceLock::new(),
        })
    }

    /// Norm at scale level `k` (Sobolev order `2 + k`).
    pub fn sobolev_norm(&self, k: u32) -> f64 {
        spectral::sobolev_sq(self.coeffs(), f64::from(BASE_ORDER + k)).sqrt()
    }

    pub fn scale(&self, a: f64) -> TangentDiffeo {
        TangentDiffeo {
            samples: self.samples.iter().map(|x| a * x).collect(),
            coeffs: OnceLock::new(),
        }
    }

    /// `self + a * other` on the finer grid.
    pub fn axpy(&self, a: f64, other: &TangentDiffeo) -> TangentDiffeo {
        let n = self.n().max(other.n());
        let x = self.resample(n).expect("grid sizes already validated");
        let y = other.resample(n).expect("grid sizes already validated");
        TangentDiffeo {
            samples: x
                .samples
                .iter()
                .zip(&y.samples)
                .map(|(p, q)| p + a * q)
                .collect(),
            coeffs: OnceLock::new(),
        }
    }

    pub fn max_distance(&self, other: &TangentDiffeo) -> f64 {
        let n = self.n().max(other.n());
        let x = self.resample(n).expect("grid sizes already validated");
        let y = other.resample(n).expect("grid sizes already validated");
        x.samples
            .iter()
            .zip(&y.samples)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }
}

impl PartialEq for TangentDiffeo {
    fn eq(&self, other: &Self) -> bool {
        self.samples == other.samples
    }
}

/// Validated constructor: `lift_samples[j]` is the lift at `j/n`.
pub fn make_diffeo(lift_samples: Vec<f64>, guards: &Guards) -> Result<CircleDiffeo> {
    CircleDiffeo::from_lift(lift_samples, guards)
}

impl CircleDiffeo {
    pub fn from_lift(lift: Vec<f64>, guards: &Guards) -> Result<Self> {
        let n = lift.len();
        spectral::check_grid(n)?;
        if lift.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let periodic_samples: Vec<f64> = lift
            .iter()
            .enumerate()
            .map(|(j, &x)| x - j as f64 / n as f64)
            .collect();
        let diffeo = CircleDiffeo {
            periodic: spectral::forward_real(&periodic_samples),
            lift,
            periodic_d1: OnceLock::new(),
            periodic_d2: OnceLock::new(),
        };
        let min_slope = diffeo.min_slope();
        if min_slope > guards.delta_mono {
            Ok(diffeo)
        } else {
            Err(Error::NotDiffeomorphism {
                min_slope,
                delta: guards.delta_mono,
            })
        }
    }

    pub fn from_fn(n: usize, lift: impl Fn(f64) -> f64, guards: &Guards) -> Result<Self> {
        spectral::check_grid(n)?;
        Self::from_lift((0..n).map(|j| lift(j as f64 / n as f64)).collect(), guards)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(n, |t| t, &Guards::default())
    }

    /// The rotation `t -> t + shift`.
    pub fn rotation(n: usize, shift: f64) -> Result<Self> {
        Self::from_fn(n, |t| t + shift, &Guards::default())
    }

    pub fn n(&self) -> usize {
        self.lift.len()
    }

    pub fn lift(&self) -> &[f64] {
        &self.lift
    }

    fn d1(&self) -> &[Complex64] {
        self.periodic_d1
            .get_or_init(|| spectral::derivative(&self.periodic))
    }

    fn d2(&self) -> &[Complex64] {
        self.periodic_d2
            .get_or_init(|| spectral::derivative(self.d1()))
    }

    /// Minimum of the lift's slope over the 4n-refined grid.
    pub fn min_slope(&self) -> f64 {
        let fine = spectral::inverse_real(&spectral::resample(self.d1(), 4 * self.n()));
        1.0 + fine.into_iter().fold(f64::INFINITY, f64::min)
    }

    /// The lift at an arbitrary real argument; exact on grid points.
    pub fn lift_at(&self, x: f64) -> f64 {
        let floor = x.floor();
        match spectral::grid_index(x, self.n()) {
            Some(j) => self.lift[j] + floor,
            None => x + spectral::eval(&self.periodic, x - floor).re,
        }
    }

    fn lift_and_slope(&self, x: f64) -> (f64, f64) {
        let (v, d) = spectral::eval_with_derivative(&self.periodic, x - x.floor());
        (x + v.re, 1.0 + d.re)
    }

    /// Slope `psi'(x)` of the lift.
    pub fn slope_at(&self, x: f64) -> f64 {
        1.0 + spectral::eval(self.d1(), x).re
    }

    /// Second derivative `psi''(x)` of the lift.
    pub fn curvature_at(&self, x: f64) -> f64 {
        spectral::eval(self.d2(), x).re
    }

    /// Periodic part `lift(t) - t` as a tangent function.
    pub fn periodic_part(&self) -> TangentDiffeo {
        let n = self.n();
        TangentDiffeo {
            samples: self
                .lift
                .iter()
                .enumerate()
                .map(|(j, &x)| x - j as f64 / n as f64)
                .collect(),
            coeffs: OnceLock::from(self.periodic.clone()),
        }
    }

    /// `psi + h * dir`, revalidated.
    pub fn perturbed(&self, dir: &TangentDiffeo, h: f64, guards: &Guards) -> Result<CircleDiffeo> {
        let dir = dir.resample(self.n())?;
        let lift = self
            .lift
            .iter()
            .zip(dir.samples())
            .map(|(x, d)| x + h * d)
            .collect();
        Self::from_lift(lift, guards)
    }

    /// Lift difference `self - other`, a periodic function.
    pub fn displacement(&self, other: &CircleDiffeo) -> TangentDiffeo {
        let n = self.n().max(other.n());
        let a = self.periodic_part().resample(n).expect("valid grid");
        let b = other.periodic_part().resample(n).expect("valid grid");
        a.axpy(-1.0, &b)
    }

    /// Largest distance between lifts at grid points of the finer grid.
    pub fn max_lift_distance(&self, other: &CircleDiffeo) -> f64 {
        self.displacement(other).max_abs()
    }

    /// Solves `lift(x) = target` with a grid bracket and safeguarded Newton.
    fn solve(&self, target: f64, pmin: f64, pmax: f64) -> Result<f64> {
        let n = self.n() as i64;
        let nf = self.n() as f64;
        let grid_lift = |k: i64| self.lift[k.rem_euclid(n) as usize] + k.div_euclid(n) as f64;
        let mut lo = ((target - pmax) * nf).floor() as i64 - 1;
        let mut hi = ((target - pmin) * nf).ceil() as i64 + 1;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if grid_lift(mid) <= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (ga, gb) = (grid_lift(lo), grid_lift(hi));
        let (mut a, mut b) = (lo as f64 / nf, hi as f64 / nf);
        if ga == target {
            return Ok(a);
        }
        let mut x = a + (target - ga) / (gb - ga) * (b - a);
        let mut residual = f64::INFINITY;
        for _ in 0..NEWTON_MAX_ITER {
            let (value, slope) = self.lift_and_slope(x);
            let f = value - target;
            residual = f.abs();
            if f == 0.0 {
                return Ok(x);
            }
            if f < 0.0 {
                a = x;
            } else {
                b = x;
            }
            let newton = x - f / slope;
            let next = if newton > a && newton < b && slope > 0.0 {
                newton
            } else {
                0.5 * (a + b)
            };
            let converged = (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0);
            x = next;
            if converged {
                let final_residual = (self.lift_and_slope(x).0 - target).abs();
                if final_residual <= NEWTON_TOL {
                    return Ok(x);
                }
                residual = final_residual;
                break;
            }
        }
        if residual <= NEWTON_TOL {
            Ok(x)
        } else {
            Err(Error::NoConvergence { target, residual })
        }
    }

    /// Lift of the inverse at the grid points `j/n`.
    fn inverse_lift(&self) -> Result<Vec<f64>> {
        let n = self.n();
        let periodic: Vec<f64> = self
            .lift
            .iter()
            .enumerate()
            .map(|(j, &x)| x - j as f64 / n as f64)
            .collect();
        let pmin = periodic.iter().copied().fold(f64::INFINITY, f64::min);
        let pmax = periodic.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (0..n)
            .map(|j| self.solve(j as f64 / n as f64, pmin, pmax))
            .collect()
    }
}

/// Reparametrization `z o psi`, sampled on `psi`'s grid.
pub fn compose_loop(z: &Loop, psi: &CircleDiffeo) -> Loop {
    let samples = psi.lift.iter().map(|&x| z.evaluate(x)).collect();
    Loop::from_samples(samples).expect("grid already validated")
}

/// Group product `psi o phi`, sampled on `phi`'s grid.
pub fn compose_diffeo(
    psi: &CircleDiffeo,
    phi: &CircleDiffeo,
    guards: &Guards,
) -> Result<CircleDiffeo> {
    let lift = phi.lift.iter().map(|&x| psi.lift_at(x)).collect();
    CircleDiffeo::from_lift(lift, guards)
}

/// Group inverse, solved per grid point.
pub fn invert(psi: &CircleDiffeo, guards: &Guards) -> Result<CircleDiffeo> {
    CircleDiffeo::from_lift(psi.inverse_lift()?, guards)
}

/// First differential of inversion: `-(dir o psi^-1) / (psi' o psi^-1)`.
pub fn d_invert(psi: &CircleDiffeo, dir: &TangentDiffeo, guards: &Guards) -> Result<TangentDiffeo> {
    let inverse = invert(psi, guards)?;
    Ok(d_invert_at(psi, &inverse, dir))
}

/// `d_invert` with the inverse already known.
pub(crate) fn d_invert_at(
    psi: &CircleDiffeo,
    inverse: &CircleDiffeo,
    dir: &TangentDiffeo,
) -> TangentDiffeo {
    let samples = inverse
        .lift
        .iter()
        .map(|&x| -dir.evaluate(x) / psi.slope_at(x))
        .collect();
    TangentDiffeo::from_samples(samples).expect("grid already validated")
}

/// Second differential of inversion.
///
/// With `q = psi' o psi^-1`, `c = psi'' o psi^-1`, `v_i = dir_i o psi^-1` and
/// `w_i = dir_i' o psi^-1`:
///
/// `D^2 I (dir_1, dir_2) = (w_2 v_1 + w_1 v_2) / q^2 - c v_1 v_2 / q^3`.
///
/// The evaluation order makes the result bitwise symmetric in its arguments.
pub fn d2_invert(
    psi: &CircleDiffeo,
    dir1: &TangentDiffeo,
    dir2: &TangentDiffeo,
    guards: &Guards,
) -> Result<TangentDiffeo> {
    let inverse = invert(psi, guards)?;
    let (d1, d2) = (dir1.derivative(), dir2.derivative());
    let samples = inverse
        .lift
        .iter()
        .map(|&x| {
            let q = psi.slope_at(x);
            let c = psi.curvature_at(x);
            let (v1, v2) = (dir1.evaluate(x), dir2.evaluate(x));
            let (w1, w2) = (d1.evaluate(x), d2.evaluate(x));
            (w2 * v1 + w1 * v2) / (q * q) - c * (v1 * v2) / (q * q * q)
        })
        .collect();
    TangentDiffeo::from_samples(samples)
}
