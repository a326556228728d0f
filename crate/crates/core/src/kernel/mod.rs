//! Matérn-type reproducing kernels of the Sobolev spaces W₂ᵐ(ℝᵈ).
//!
//! The kernel is radial, K(x, y) = Φ_ν(‖x − y‖₂ / c) with ν = m − d/2 and
//! the unit-peak profile
//!
//! ```text
//! Φ_ν(r) = 2^(1−ν) / Γ(ν) · r^ν · K_ν(r),   Φ_ν(0) = 1,
//! ```
//!
//! where K_ν is the modified Bessel function of the second kind. Its native
//! space is norm-equivalent to W₂ᵐ(ℝᵈ).

mod bessel;

pub use bessel::{bessel_k, bessel_k_half_integer, gamma};

use crate::error::{check_dim, check_finite, Error, Result};

/// Below this scaled radius the profile is returned as exactly 1.
const SMALL_R: f64 = 1e-8;
/// Beyond this scaled radius r^ν K_ν(r) underflows for every practical ν.
const LARGE_R: f64 = 750.0;

/// Parameters of the Sobolev kernel: smoothness `m`, dimension `d`, scale `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevKernelSpec {
    m: f64,
    d: usize,
    c: f64,
    nu: f64,
    prefactor: f64,
}

impl SobolevKernelSpec {
    pub fn new(m: f64, d: usize, c: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("dimension d must be >= 1".into()));
        }
        if !m.is_finite() || m <= d as f64 / 2.0 {
            return Err(Error::InvalidArgument(format!("smoothness m must exceed d/2 = {}, got {m}", d as f64 / 2.0)));
        }
        if !c.is_finite() || c <= 0.0 {
            return Err(Error::InvalidArgument(format!("kernel scale c must be > 0, got {c}")));
        }
        let nu = m - d as f64 / 2.0;
        let prefactor = 2f64.powf(1.0 - nu) / gamma(nu);
        Ok(Self { m, d, c, nu, prefactor })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn scale(&self) -> f64 {
        self.c
    }

    /// Matérn order ν = m − d/2.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Radial profile Φ_ν at the already scaled radius `r = ‖x − y‖ / c`.
    pub fn profile(&self, r: f64) -> f64 {
        if r < SMALL_R {
            return 1.0;
        }
        if r > LARGE_R {
            return 0.0;
        }
        let k = bessel_k(self.nu, r).expect("K_nu converges for finite positive argument");
        self.prefactor * r.powf(self.nu) * k
    }

    /// K(x, y) with argument checks.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim(self.d, x.len())?;
        check_dim(self.d, y.len())?;
        check_finite(x, "kernel argument")?;
        check_finite(y, "kernel argument")?;
        Ok(self.eval_unchecked(x, y))
    }

    /// K(x, y) without dimension or finiteness checks.
    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        self.profile(distance(x, y) / self.c)
    }
}

/// Euclidean distance. Bitwise symmetric in its arguments.
#[inline]
pub fn distance(x: &[f64], y: &[f64]) -> f64 {
    squared_distance(x, y).sqrt()
}

#[inline]
pub(crate) fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}
