//! Complex fields on the periodic grid, their Fourier coefficients, and the
//! singular integral operators realized as Fourier multipliers.
//!
//! One transform convention is fixed for the whole crate: the forward kernel
//! is `e^{-2 pi i x . xi}` with `xi = n/(2L)` on the dual lattice. Every
//! multiplier symbol below is derived from that single convention:
//!
//! * `dbar = (d/dx + i d/dy)/2`  has symbol `pi i (xi1 + i xi2)`,
//! * `d    = (d/dx - i d/dy)/2`  has symbol `pi i (xi1 - i xi2)`,
//! * the Beurling transform `T` is fixed by the contract `T(dbar u) = d u`,
//!   hence symbol `conj(zeta)/zeta` with `zeta = xi1 + i xi2` (0 at 0),
//! * the Cauchy transform `P` is fixed by `dbar(P f) = f - mean(f)`, hence
//!   symbol `1/(pi i zeta)` (0 at 0).
//!
//! The zero mode of `T` and `P` maps to 0: the continuum operators are
//! defined modulo constants / decay at infinity, and the mean-zero convention
//! is the discrete surrogate.

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::spectral::fft2_inplace;
use num_complex::Complex64;

/// Complex samples on a periodic grid.
#[derive(Debug, Clone)]
pub struct Field {
    grid: GridSpec,
    samples: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: GridSpec) -> Self {
        Field { grid, samples: vec![Complex64::default(); grid.len()] }
    }

    pub fn constant(grid: GridSpec, c: Complex64) -> Self {
        Field { grid, samples: vec![c; grid.len()] }
    }

    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(Complex64) -> Complex64) -> Self {
        let n = grid.n();
        let mut samples = Vec::with_capacity(grid.len());
        for j in 0..n {
            for m in 0..n {
                samples.push(f(grid.z_at(j, m)));
            }
        }
        Field { grid, samples }
    }

    pub fn from_samples(grid: GridSpec, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::SizeMismatch { expected: grid.len(), got: samples.len() });
        }
        if samples.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Domain("field samples must be finite".into()));
        }
        Ok(Field { grid, samples })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn value(&self, j: usize, m: usize) -> Complex64 {
        self.samples[self.grid.index(j, m)]
    }

    /// Continuum-normalized L2 norm over the cell: `h * sqrt(sum |f|^2)`.
    pub fn l2_norm(&self) -> f64 {
        self.grid.spacing() * self.samples.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Sup norm restricted to the disk `|z| <= radius`.
    pub fn sup_norm_in_disk(&self, radius: f64) -> f64 {
        let n = self.grid.n();
        let mut best = 0.0f64;
        for j in 0..n {
            for m in 0..n {
                if self.grid.z_at(j, m).norm() <= radius {
                    best = best.max(self.samples[self.grid.index(j, m)].norm());
                }
            }
        }
        best
    }

    pub fn mean(&self) -> Complex64 {
        self.samples.iter().sum::<Complex64>() / self.grid.len() as f64
    }

    /// Cell integral `h^2 * sum(f)`.
    pub fn integral(&self) -> Complex64 {
        let h = self.grid.spacing();
        self.samples.iter().sum::<Complex64>() * (h * h)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Field {
        Field { grid: self.grid, samples: self.samples.iter().map(|&c| f(c)).collect() }
    }

    pub fn zip(&self, other: &Field, f: impl Fn(Complex64, Complex64) -> Complex64) -> Field {
        assert_eq!(self.grid, other.grid, "field grids must agree");
        Field {
            grid: self.grid,
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &Field) -> Field {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.zip(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Field) -> Field {
        self.zip(other, |a, b| a * b)
    }

    pub fn scale(&self, c: Complex64) -> Field {
        self.map(|v| c * v)
    }

    pub fn add_assign(&mut self, other: &Field) {
        assert_eq!(self.grid, other.grid);
        for (a, b) in self.samples.iter_mut().zip(&other.samples) {
            *a += b;
        }
    }

    /// Cyclic shift by whole lattice steps: result(z) = self(z + (dj + i dm) h).
    pub fn shift_lattice(&self, dj: i64, dm: i64) -> Field {
        let n = self.grid.n() as i64;
        let mut out = vec![Complex64::default(); self.grid.len()];
        for j in 0..n {
            for m in 0..n {
                let sj = (j + dj).rem_euclid(n) as usize;
                let sm = (m + dm).rem_euclid(n) as usize;
                out[(j as usize) * n as usize + m as usize] =
                    self.samples[sj * n as usize + sm];
            }
        }
        Field { grid: self.grid, samples: out }
    }
}

/// Discrete Fourier coefficients of a [`Field`]: honest samples of the
/// continuum transform, `c_n ~ fhat(n / 2L)`.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: GridSpec,
    /// FFT-natural ordering; use [`GridSpec::signed_freq`] to recover `n`.
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::SizeMismatch { expected: grid.len(), got: coeffs.len() });
        }
        Ok(SpectralField { grid, coeffs })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient at signed integer frequency `(n1, n2)`.
    pub fn coeff(&self, n1: i64, n2: i64) -> Complex64 {
        let n = self.grid.n() as i64;
        let j = n1.rem_euclid(n) as usize;
        let m = n2.rem_euclid(n) as usize;
        self.coeffs[j * self.grid.n() + m]
    }

    /// L2 norm under the dual measure: `sqrt(sum |c|^2) / (2L)`; equals the
    /// sample-space norm by Plancherel.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
            / (2.0 * self.grid.half_width())
    }

    /// Iterate `(n1, n2, |xi|, coeff)` over the lattice.
    pub fn iter_freqs(&self) -> impl Iterator<Item = (i64, i64, f64, Complex64)> + '_ {
        let n = self.grid.n();
        let grid = self.grid;
        (0..n * n).map(move |idx| {
            let n1 = grid.signed_freq(idx / n);
            let n2 = grid.signed_freq(idx % n);
            let (x1, x2) = grid.xi(n1, n2);
            (n1, n2, (x1 * x1 + x2 * x2).sqrt(), self.coeffs[idx])
        })
    }
}

/// Forward transform to honest Fourier coefficients.
pub fn to_spectral(f: &Field) -> SpectralField {
    let grid = f.grid();
    let n = grid.n();
    let h = grid.spacing();
    let mut buf = f.samples().to_vec();
    fft2_inplace(&mut buf, n, true);
    // phase for the cell starting at -L: per axis (-1)^n
    let h2 = h * h;
    for j in 0..n {
        let s1 = grid.signed_freq(j);
        for m in 0..n {
            let s2 = grid.signed_freq(m);
            let sign = if (s1 + s2).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            buf[j * n + m] *= h2 * sign;
        }
    }
    SpectralField { grid, coeffs: buf }
}

/// Inverse transform; exact round trip with [`to_spectral`].
pub fn from_spectral(sf: &SpectralField) -> Field {
    let grid = sf.grid();
    let n = grid.n();
    let mut buf = sf.coeffs().to_vec();
    for j in 0..n {
        let s1 = grid.signed_freq(j);
        for m in 0..n {
            let s2 = grid.signed_freq(m);
            if (s1 + s2).rem_euclid(2) != 0 {
                buf[j * n + m] = -buf[j * n + m];
            }
        }
    }
    fft2_inplace(&mut buf, n, false);
    let scale = 1.0 / grid.cell_area();
    for c in &mut buf {
        *c *= scale;
    }
    Field { grid, samples: buf }
}

/// Apply a diagonal Fourier multiplier `sym(n1, n2)`. The transform phases and
/// measures cancel for diagonal operators, so this works on raw FFT buffers.
pub fn apply_multiplier(f: &Field, sym: impl Fn(i64, i64, &GridSpec) -> Complex64) -> Field {
    let grid = f.grid();
    let n = grid.n();
    let mut buf = f.samples().to_vec();
    fft2_inplace(&mut buf, n, true);
    for j in 0..n {
        let n1 = grid.signed_freq(j);
        for m in 0..n {
            let n2 = grid.signed_freq(m);
            buf[j * n + m] *= sym(n1, n2, &grid);
        }
    }
    fft2_inplace(&mut buf, n, false);
    let scale = 1.0 / (n * n) as f64;
    for c in &mut buf {
        *c *= scale;
    }
    Field { grid, samples: buf }
}

fn zeta(n1: i64, n2: i64, grid: &GridSpec) -> Complex64 {
    let (x1, x2) = grid.xi(n1, n2);
    Complex64::new(x1, x2)
}

/// Wirtinger derivative `(d/dx + i d/dy)/2`; spectral, exact for bandlimited
/// fields. The caller is responsible for the input being smooth-periodic at
/// grid resolution.
pub fn d_bar(f: &Field) -> Field {
    apply_multiplier(f, |n1, n2, g| Complex64::new(0.0, std::f64::consts::PI) * zeta(n1, n2, g))
}

/// Wirtinger derivative `(d/dx - i d/dy)/2`.
pub fn d(f: &Field) -> Field {
    apply_multiplier(f, |n1, n2, g| {
        Complex64::new(0.0, std::f64::consts::PI) * zeta(n1, n2, g).conj()
    })
}

/// Beurling transform: unimodular symbol `conj(zeta)/zeta` off the zero mode,
/// 0 at the zero mode. Satisfies `T(dbar u) = d u` exactly on the grid and is
/// non-expansive in the sample 2-norm.
pub fn beurling_t(f: &Field) -> Field {
    apply_multiplier(f, |n1, n2, g| {
        if n1 == 0 && n2 == 0 {
            Complex64::default()
        } else {
            let z = zeta(n1, n2, g);
            z.conj() / z
        }
    })
}

/// Cauchy transform: symbol `1/(pi i zeta)` off the zero mode, 0 at the zero
/// mode, so that `dbar(P f) = f - mean(f)` exactly on the grid.
pub fn cauchy_p(f: &Field) -> Field {
    apply_multiplier(f, |n1, n2, g| {
        if n1 == 0 && n2 == 0 {
            Complex64::default()
        } else {
            (Complex64::new(0.0, std::f64::consts::PI) * zeta(n1, n2, g)).finv()
        }
    })
}

/// The unimodular character `e_k(z) = exp(i(k z + conj(k) conj(z)))`.
///
/// The exponent is `2 Re(k z)`, purely real, so the samples are constructed
/// with unit modulus exactly.
pub fn e_k(grid: GridSpec, k: Complex64) -> Field {
    Field::from_fn(grid, |z| {
        let phase = 2.0 * (k.re * z.re - k.im * z.im);
        Complex64::from_polar(1.0, phase)
    })
}
