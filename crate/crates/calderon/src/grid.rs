//! Periodic square grid covering `[-L, L)^2`.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Discretization of the period cell `[-L, L)^2` with `N` points per side.
///
/// Lattice points are `z_jm = (-L + j h) + i (-L + m h)` with `h = 2L/N`;
/// samples are stored row-major with `j` (the real coordinate) outermost.
/// Frequencies live on the dual lattice `xi = n / (2L)`, `|n_i| <= N/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
    half_width: f64,
}

impl GridSpec {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < 32 || !n.is_power_of_two() {
            return Err(Error::Grid(format!("points per side must be a power of two >= 32, got {n}")));
        }
        if !(half_width >= 2.0) || !half_width.is_finite() {
            return Err(Error::Grid(format!("half width must be >= 2, got {half_width}")));
        }
        Ok(GridSpec { n, half_width })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn cell_area(&self) -> f64 {
        4.0 * self.half_width * self.half_width
    }

    pub fn index(&self, j: usize, m: usize) -> usize {
        j * self.n + m
    }

    pub fn z_at(&self, j: usize, m: usize) -> Complex64 {
        let h = self.spacing();
        Complex64::new(-self.half_width + j as f64 * h, -self.half_width + m as f64 * h)
    }

    /// Signed integer frequency for an FFT-ordered index.
    pub fn signed_freq(&self, idx: usize) -> i64 {
        let n = self.n as i64;
        let i = idx as i64;
        if i <= n / 2 - 1 {
            i
        } else {
            i - n
        }
    }

    /// Continuous frequency pair for signed integer frequencies.
    pub fn xi(&self, n1: i64, n2: i64) -> (f64, f64) {
        let d = 2.0 * self.half_width;
        (n1 as f64 / d, n2 as f64 / d)
    }

    /// Largest representable axis frequency `N / (4L)`.
    pub fn nyquist(&self) -> f64 {
        self.n as f64 / (4.0 * self.half_width)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= -self.half_width
            && z.re < self.half_width
            && z.im >= -self.half_width
            && z.im < self.half_width
    }
}
