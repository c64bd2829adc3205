//! Discretized loops `S^1 -> C` held as samples on a uniform power-of-two grid.
//!
//! Samples are the canonical storage. Fourier coefficients are computed on
//! first use and cached; nonlinear operations work pointwise on samples while
//! norms and derivatives are diagonal in the coefficients.
//!
//! Scale level `k` is measured by the Sobolev norm of order `2 + k`:
//! `||z||_k^2 = sum_m (1 + (2 pi m)^2)^(2+k) |c_m|^2`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral;

/// Sobolev order of scale level 0.
pub const BASE_ORDER: u32 = 2;

#[derive(Debug, Clone)]
pub struct Loop {
    samples: Vec<Complex64>,
    coeffs: OnceLock<Vec<Complex64>>,
}

/// Fourier coefficients of a loop, `c_m` for `m = -n/2 .. n/2 - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    data: Vec<Complex64>,
}

/// Sobolev norms of a loop across scale levels `0..=k_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelProfile {
    pub k_max: u32,
    pub norms: Vec<f64>,
}

impl Coefficients {
    /// Builds a coefficient set from `(mode, value)` pairs; unlisted modes are zero.
    pub fn from_modes(n: usize, modes: &[(i64, Complex64)]) -> Result<Self> {
        spectral::check_grid(n)?;
        let mut data = vec![Complex64::new(0.0, 0.0); n];
        let half = (n / 2) as i64;
        for &(m, c) in modes {
            if m < -half || m >= half {
                return Err(Error::Format(format!(
                    "mode {m} outside -{half}..{half} for n = {n}"
                )));
            }
            data[spectral::index_of(m, n)] += c;
        }
        Ok(Coefficients { data })
    }

    pub fn n(&self) -> usize {
        self.data.len()
    }

    /// Coefficient of mode `m`; zero outside the represented band.
    pub fn get(&self, m: i64) -> Complex64 {
        let half = (self.n() / 2) as i64;
        if m < -half || m >= half {
            Complex64::new(0.0, 0.0)
        } else {
            self.data[spectral::index_of(m, self.n())]
        }
    }

    /// `(m, c_m)` in increasing mode order.
    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let half = (self.n() / 2) as i64;
        (-half..half).map(move |m| (m, self.get(m)))
    }

    pub fn as_fft_order(&self) -> &[Complex64] {
        &self.data
    }
}

/// Forward transform of a loop's samples.
pub fn analyze(z: &Loop) -> Coefficients {
    Coefficients {
        data: z.coeffs().to_vec(),
    }
}

/// Inverse transform back to a sampled loop.
pub fn synthesize(coeffs: &Coefficients) -> Result<Loop> {
    // coefficients are recomputed from the samples, so a loop depends on its samples alone
    Loop::from_samples(spectral::inverse(&coeffs.data))
}

impl Loop {
    pub fn from_samples(samples: Vec<Complex64>) -> Result<Self> {
        spectral::check_grid(samples.len())?;
        if samples
            .iter()
            .any(|s| !s.re.is_finite() || !s.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        Ok(Loop {
            samples,
            coeffs: OnceLock::new(),
        })
    }

    /// Samples `f(j/n)` for `j = 0..n`.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        spectral::check_grid(n)?;
        Self::from_samples((0..n).map(|j| f(j as f64 / n as f64)).collect())
    }

    pub fn from_modes(n: usize, modes: &[(i64, Complex64)]) -> Result<Self> {
        synthesize(&Coefficients::from_modes(n, modes)?)
    }

    pub fn constant(n: usize, c: Complex64) -> Result<Self> {
        Self::from_samples(vec![c; n])
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub(crate) fn coeffs(&self) -> &[Complex64] {
        self.coeffs.get_or_init(|| spectral::forward(&self.samples))
    }

    /// Value of the band-limited interpolant at `t mod 1`; exact on grid points.
    pub fn evaluate(&self, t: f64) -> Complex64 {
        match spectral::grid_index(t, self.n()) {
            Some(j) => self.samples[j],
            None => spectral::eval(self.coeffs(), t),
        }
    }

    pub fn derivative(&self) -> Loop {
        let coeffs = spectral::derivative(self.coeffs());
        let samples = spectral::inverse(&coeffs);
        Loop {
            samples,
            coeffs: OnceLock::from(coeffs),
        }
    }

    /// The same interpolant sampled on a grid of size `n`.
    pub fn resample(&self, n: usize) -> Result<Loop> {
        spectral::check_grid(n)?;
        if n == self.n() {
            return Ok(self.clone());
        }
        let coeffs = spectral::resample(self.coeffs(), n);
        let samples = if n > self.n() {
            spectral::refine(&self.samples, self.coeffs(), n)
        } else {
            spectral::inverse(&coeffs)
        };
        Ok(Loop {
            samples,
            coeffs: OnceLock::from(coeffs),
        })
    }

    /// Norm at scale level `k`, i.e. the Sobolev norm of order `2 + k`.
    pub fn sobolev_norm(&self, k: u32) -> f64 {
        spectral::sobolev_sq(self.coeffs(), f64::from(BASE_ORDER + k)).sqrt()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs().iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn level_profile(&self, k_max: u32) -> LevelProfile {
        LevelProfile {
            k_max,
            norms: (0..=k_max).map(|k| self.sobolev_norm(k)).collect(),
        }
    }

    /// Pointwise product on the zero-padded `2n` grid, where it is alias-free
    /// for inputs band-limited below their Nyquist mode.
    pub fn product(&self, other: &Loop) -> Loop {
        let n = self.n().max(other.n());
        let a = self.refined(2 * n);
        let b = other.refined(2 * n);
        Loop {
            samples: a.iter().zip(&b).map(|(x, y)| x * y).collect(),
            coeffs: OnceLock::new(),
        }
    }

    /// `z^2` on the `2n` grid; even samples are exactly `z(j/n)^2`.
    pub fn square(&self) -> Loop {
        let fine = self.refined(2 * self.n());
        Loop {
            samples: fine.iter().map(|x| x * x).collect(),
            coeffs: OnceLock::new(),
        }
    }

    /// `|z|^2` sampled on the `2n` grid.
    pub(crate) fn modulus_sq_refined(&self) -> Vec<f64> {
        self.refined(2 * self.n())
            .iter()
            .map(|x| x.norm_sqr())
            .collect()
    }

    pub(crate) fn refined(&self, n_new: usize) -> Vec<Complex64> {
        debug_assert!(n_new >= self.n());
        spectral::refine(&self.samples, self.coeffs(), n_new)
    }

    /// Minimum of `|z|` over the 4n-refined grid.
    pub fn min_modulus(&self) -> f64 {
        self.refined(4 * self.n())
            .iter()
            .map(|x| x.norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn check_collision(&self, eps_collision: f64) -> Result<()> {
        let min_modulus = self.min_modulus();
        if min_modulus > eps_collision {
            Ok(())
        } else {
            Err(Error::Collision {
                min_modulus,
                eps: eps_collision,
            })
        }
    }

    /// Winding number about the origin, by unwrapping the argument on the
    /// 4n-refined grid.
    pub fn winding_number(&self, eps_collision: f64) -> Result<i64> {
        let fine = self.refined(4 * self.n());
        let min_modulus = fine.iter().map(|x| x.norm()).fold(f64::INFINITY, f64::min);
        if min_modulus <= eps_collision {
            return Err(Error::Collision {
                min_modulus,
                eps: eps_collision,
            });
        }
        let mut total = 0.0;
        for (j, a) in fine.iter().enumerate() {
            let b = fine[(j + 1) % fine.len()];
            let step = (b / a).arg();
            if step.abs() >= PI * (1.0 - 1e-12) {
                return Err(Error::Resolution { step });
            }
            total += step;
        }
        Ok((total / (2.0 * PI)).round() as i64)
    }

    pub fn scale(&self, c: Complex64) -> Loop {
        self.map_samples(|x| x * c)
    }

    /// `self + a * other`, on the finer of the two grids.
    pub fn axpy(&self, a: f64, other: &Loop) -> Loop {
        let n = self.n().max(other.n());
        let x = self.refined(n);
        let y = other.refined(n);
        Loop {
            samples: x.iter().zip(&y).map(|(p, q)| p + q * a).collect(),
            coeffs: OnceLock::new(),
        }
    }

    pub fn map_samples(&self, f: impl Fn(Complex64) -> Complex64) -> Loop {
        Loop {
            samples: self.samples.iter().map(|&x| f(x)).collect(),
            coeffs: OnceLock::new(),
        }
    }

    /// Largest pointwise distance between two loops, after bringing them to a common grid.
    pub fn max_distance(&self, other: &Loop) -> f64 {
        let n = self.n().max(other.n());
        let x = self.refined(n);
        let y = other.refined(n);
        x.iter()
            .zip(&y)
            .map(|(p, q)| (p - q).norm())
            .fold(0.0, f64::max)
    }
}

impl PartialEq for Loop {
    fn eq(&self, other: &Self) -> bool {
        self.samples == other.samples
    }
}
