//! Conductivity Dirichlet solver on the unit disk and Dirichlet-to-Neumann
//! matrices in the trigonometric boundary basis.
//!
//! Discretization: second-order finite volumes in polar coordinates with
//! harmonic averaging of the conductivity at cell faces (robust for barely
//! continuous coefficients), flux balance closing the center cell, and
//! one-sided second-order differencing for the boundary flux. The linear
//! systems are symmetric positive definite and solved by conjugate gradients
//! preconditioned with the angularly averaged operator (FFT in the angle,
//! tridiagonal solves in the radius).

use crate::beltrami::CgoFunction;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::GridSpec;
use crate::modulus::ModulusSpec;
use crate::spaces::SeminormReport;
use crate::spectral::fft1_inplace;
use crate::util::{smooth_step, taper};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{Read, Write};

// ---------------------------------------------------------------------------
// Conductivities
// ---------------------------------------------------------------------------

/// Closed-form conductivity profiles. Carrying the profile (rather than only
/// grid samples) lets the polar mesh and the square grid see the same
/// function without interpolation error.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum GammaProfile {
    Uniform,
    /// `1 + amplitude * bump(r)` with a smooth radial bump supported on
    /// `[inner, outer]`, equal to `amplitude` at the plateau.
    RadialBump { amplitude: f64, inner: f64, outer: f64 },
    /// `1 + amplitude * modulus(|z - center|) * taper`: the profile attains
    /// the modulus at the center (an inverted cusp) and tapers smoothly to
    /// zero at `r_out`.
    ModulusCusp {
        spec: ModulusSpec,
        amplitude: f64,
        center: (f64, f64),
        r_in: f64,
        r_out: f64,
    },
}

impl GammaProfile {
    pub fn eval(&self, z: Complex64) -> f64 {
        match self {
            GammaProfile::Uniform => 1.0,
            GammaProfile::RadialBump { amplitude, inner, outer } => {
                let r = z.norm();
                if r >= *outer {
                    1.0
                } else if r <= *inner {
                    1.0 + amplitude
                } else {
                    1.0 + amplitude * smooth_step((outer - r) / (outer - inner))
                }
            }
            GammaProfile::ModulusCusp { spec, amplitude, center, r_in, r_out } => {
                let s = (z - Complex64::new(center.0, center.1)).norm();
                1.0 + amplitude * spec.eval(s) * taper(s, *r_in, *r_out)
            }
        }
    }

    pub fn eval_polar(&self, r: f64, theta: f64) -> f64 {
        self.eval(Complex64::from_polar(r, theta))
    }

    /// Radius beyond which the profile is identically 1.
    pub fn support_radius(&self) -> f64 {
        match self {
            GammaProfile::Uniform => 0.0,
            GammaProfile::RadialBump { outer, .. } => *outer,
            GammaProfile::ModulusCusp { center, r_out, .. } => {
                Complex64::new(center.0, center.1).norm() + r_out
            }
        }
    }
}

/// A conductivity: positive, equal to 1 outside `boundary_radius < 1`, with
/// its profile, grid samples, and measured regularity data.
#[derive(Debug, Clone)]
pub struct Conductivity {
    profile: GammaProfile,
    gamma: Field,
    epsilon_bound: f64,
    boundary_radius: f64,
    alpha: Option<f64>,
    seminorm: Option<SeminormReport>,
}

impl Conductivity {
    pub fn new(profile: GammaProfile, grid: GridSpec) -> Result<Self> {
        let boundary_radius = profile.support_radius();
        if boundary_radius >= 1.0 {
            return Err(Error::Domain(format!(
                "conductivity must equal 1 near the unit circle; support radius {boundary_radius}"
            )));
        }
        let gamma = Field::from_fn(grid, |z| Complex64::new(profile.eval(z), 0.0));
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for c in gamma.samples() {
            lo = lo.min(c.re);
            hi = hi.max(c.re);
        }
        if lo <= 0.0 {
            return Err(Error::Domain(format!("conductivity must be positive, min {lo}")));
        }
        let epsilon_bound = lo.min(1.0 / hi);
        Ok(Conductivity {
            profile,
            gamma,
            epsilon_bound,
            boundary_radius,
            alpha: None,
            seminorm: None,
        })
    }

    /// Attach the modulus exponent and a measured seminorm report (set by the
    /// generators).
    pub fn with_regularity(mut self, alpha: f64, seminorm: SeminormReport) -> Self {
        self.alpha = Some(alpha);
        self.seminorm = Some(seminorm);
        self
    }

    pub fn profile(&self) -> &GammaProfile {
        &self.profile
    }

    pub fn gamma(&self) -> &Field {
        &self.gamma
    }

    pub fn grid(&self) -> GridSpec {
        self.gamma.grid()
    }

    pub fn epsilon_bound(&self) -> f64 {
        self.epsilon_bound
    }

    pub fn boundary_radius(&self) -> f64 {
        self.boundary_radius
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    pub fn seminorm(&self) -> Option<&SeminormReport> {
        self.seminorm.as_ref()
    }

    pub fn sup_diff(&self, other: &Conductivity) -> f64 {
        self.gamma.sub(&other.gamma).sup_norm()
    }
}

// ---------------------------------------------------------------------------
// DtN matrices
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolarMesh {
    pub n_r: usize,
    pub n_theta: usize,
}

impl PolarMesh {
    pub fn new(n_r: usize, n_theta: usize) -> Self {
        PolarMesh { n_r, n_theta }
    }
}

/// Dirichlet-to-Neumann operator in the basis `e^{i n theta}`, `|n| <= modes`.
#[derive(Debug, Clone)]
pub struct DtnMatrix {
    modes: usize,
    mesh: PolarMesh,
    entries: Vec<Complex64>,
}

impl DtnMatrix {
    pub fn zeros(modes: usize, mesh: PolarMesh) -> Self {
        let side = 2 * modes + 1;
        DtnMatrix { modes, mesh, entries: vec![Complex64::default(); side * side] }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn mesh(&self) -> PolarMesh {
        self.mesh
    }

    pub fn side(&self) -> usize {
        2 * self.modes + 1
    }

    fn idx(&self, m: i64, n: i64) -> usize {
        let b = self.modes as i64;
        debug_assert!(m.abs() <= b && n.abs() <= b);
        ((m + b) as usize) * self.side() + ((n + b) as usize)
    }

    /// Entry `< Lambda e_n, e_m >` under the normalized circle pairing.
    pub fn entry(&self, m: i64, n: i64) -> Complex64 {
        self.entries[self.idx(m, n)]
    }

    pub fn set(&mut self, m: i64, n: i64, v: Complex64) {
        let i = self.idx(m, n);
        self.entries[i] = v;
    }

    /// `max |A - A^H|` over entries, the discrete self-adjointness defect.
    pub fn hermitian_deviation(&self) -> f64 {
        let b = self.modes as i64;
        let mut worst = 0.0f64;
        for m in -b..=b {
            for n in -b..=b {
                worst = worst.max((self.entry(m, n) - self.entry(n, m).conj()).norm());
            }
        }
        worst
    }

    /// Text header `N_b mesh_r mesh_theta`, then row-major little-endian
    /// `(re, im)` doubles.
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "{} {} {}", self.modes, self.mesh.n_r, self.mesh.n_theta)?;
        for c in &self.entries {
            w.write_all(&c.re.to_le_bytes())?;
            w.write_all(&c.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut header = Vec::new();
        let mut byte = [0u8; 1];
        loop {
            r.read_exact(&mut byte)?;
            if byte[0] == b'\n' {
                break;
            }
            header.push(byte[0]);
        }
        let header = String::from_utf8(header).map_err(|e| Error::Parse(e.to_string()))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("bad DtN header: {header}")));
        }
        let modes: usize = parts[0].parse().map_err(|_| Error::Parse("bad mode count".into()))?;
        let n_r: usize = parts[1].parse().map_err(|_| Error::Parse("bad mesh".into()))?;
        let n_theta: usize = parts[2].parse().map_err(|_| Error::Parse("bad mesh".into()))?;
        let side = 2 * modes + 1;
        let mut entries = Vec::with_capacity(side * side);
        let mut buf = [0u8; 16];
        for _ in 0..side * side {
            r.read_exact(&mut buf)?;
            let re = f64::from_le_bytes(buf[0..8].try_into().unwrap());
            let im = f64::from_le_bytes(buf[8..16].try_into().unwrap());
            entries.push(Complex64::new(re, im));
        }
        Ok(DtnMatrix { modes, mesh: PolarMesh::new(n_r, n_theta), entries })
    }
}

fn harmonic_mean(a: f64, b: f64) -> f64 {
    2.0 * a * b / (a + b)
}

/// Flux-balance discretization of `div(gamma grad u) = 0` on the disk.
/// Unknown layout: index 0 is the center node, then rings `i = 1..n_r-1`
/// times the angular index. The operator is applied matrix-free.
struct DiskOperator {
    /// radial intervals; nodes 0..=m with the Dirichlet boundary at m
    m: usize,
    /// angular points
    p: usize,
    /// radial face coefficients between rings i and i+1, i = 0..m-1
    cr: Vec<f64>,
    /// angular face coefficients between (i,j) and (i,j+1), rings 1..m-1
    ct: Vec<f64>,
    gamma_boundary: Vec<f64>,
}

impl DiskOperator {
    fn build(c: &Conductivity, mesh: PolarMesh) -> Self {
        let m = mesh.n_r;
        let p = mesh.n_theta;
        let dr = 1.0 / m as f64;
        let dth = 2.0 * PI / p as f64;
        let gamma =
            |i: usize, j: usize| -> f64 { c.profile.eval_polar(i as f64 * dr, j as f64 * dth) };
        let mut cr = vec![0.0; m * p];
        for i in 0..m {
            let r_face = (i as f64 + 0.5) * dr;
            for j in 0..p {
                let g = harmonic_mean(gamma(i, j), gamma(i + 1, j));
                cr[i * p + j] = r_face * g * dth / dr;
            }
        }
        let mut ct = vec![0.0; m * p];
        for i in 1..m {
            let r_i = i as f64 * dr;
            for j in 0..p {
                let g = harmonic_mean(gamma(i, j), gamma(i, (j + 1) % p));
                ct[i * p + j] = g * dr / (r_i * dth);
            }
        }
        let gamma_boundary = (0..p).map(|j| gamma(m, j)).collect();
        DiskOperator { m, p, cr, ct, gamma_boundary }
    }

    fn unknowns(&self) -> usize {
        1 + (self.m - 1) * self.p
    }

    fn at(u: &[Complex64], p: usize, i: usize, j: usize) -> Complex64 {
        if i == 0 {
            u[0]
        } else {
            u[1 + (i - 1) * p + j]
        }
    }

    /// `out = A u` with homogeneous Dirichlet data at the boundary ring.
    fn apply(&self, u: &[Complex64], out: &mut [Complex64]) {
        let (m, p) = (self.m, self.p);
        // center: flux balance with ring 1
        let mut acc = Complex64::default();
        for j in 0..p {
            acc += self.cr[j] * (u[0] - Self::at(u, p, 1, j));
        }
        out[0] = acc;
        for i in 1..m {
            for j in 0..p {
                let uij = Self::at(u, p, i, j);
                let mut v = Complex64::default();
                v += self.cr[(i - 1) * p + j] * (uij - Self::at(u, p, i - 1, j));
                let outer =
                    if i + 1 == m { Complex64::default() } else { Self::at(u, p, i + 1, j) };
                v += self.cr[i * p + j] * (uij - outer);
                let jp = (j + 1) % p;
                let jm = (j + p - 1) % p;
                v += self.ct[i * p + j] * (uij - Self::at(u, p, i, jp));
                v += self.ct[i * p + jm] * (uij - Self::at(u, p, i, jm));
                out[1 + (i - 1) * p + j] = v;
            }
        }
    }

    /// Right-hand side induced by Dirichlet data `f` on the boundary ring.
    fn rhs(&self, f: &[Complex64]) -> Vec<Complex64> {
        let (m, p) = (self.m, self.p);
        let mut b = vec![Complex64::default(); self.unknowns()];
        for j in 0..p {
            b[1 + (m - 2) * p + j] = self.cr[(m - 1) * p + j] * f[j];
        }
        b
    }
}

/// Preconditioner from the angular mean of the face coefficients: FFT along
/// the angle, tridiagonal solves along the radius (one Cholesky-style
/// factorization per angular mode), plus a diagonal inverse for the center.
struct MeanPreconditioner {
    m: usize,
    p: usize,
    center_diag: f64,
    /// pivots per mode, laid out `(ring-1) * p + mode`
    diag: Vec<f64>,
    /// `-cr_mean[i]` coupling ring i to ring i+1
    off: Vec<f64>,
}

impl MeanPreconditioner {
    fn build(op: &DiskOperator) -> Self {
        let (m, p) = (op.m, op.p);
        let mean =
            |row: &[f64], i: usize| -> f64 { row[i * p..(i + 1) * p].iter().sum::<f64>() / p as f64 };
        let cr_mean: Vec<f64> = (0..m).map(|i| mean(&op.cr, i)).collect();
        let ct_mean: Vec<f64> =
            (0..m).map(|i| if i == 0 { 0.0 } else { mean(&op.ct, i) }).collect();
        let center_diag = op.cr[0..p].iter().sum::<f64>();
        let rings = m - 1;
        let mut diag = vec![0.0; rings * p];
        let off: Vec<f64> = (1..m).map(|i| -cr_mean[i]).collect();
        for mode in 0..p {
            let s = 2.0 - 2.0 * (2.0 * PI * mode as f64 / p as f64).cos();
            let mut prev = 0.0;
            for i in 1..m {
                let d = cr_mean[i - 1] + cr_mean[i] + ct_mean[i] * s
                    - if i > 1 { off[i - 2] * off[i - 2] / prev } else { 0.0 };
                diag[(i - 1) * p + mode] = d;
                prev = d;
            }
        }
        MeanPreconditioner { m, p, center_diag, diag, off }
    }

    /// `z = M^{-1} r`.
    fn apply(&self, r: &[Complex64], z: &mut [Complex64]) {
        let (m, p) = (self.m, self.p);
        z[0] = r[0] / self.center_diag;
        let mut work = r[1..].to_vec();
        for ring in work.chunks_exact_mut(p) {
            fft1_inplace(ring, true);
        }
        for mode in 0..p {
            // forward substitution
            let mut prev = Complex64::default();
            for i in 0..m - 1 {
                let v = work[i * p + mode]
                    - if i > 0 {
                        self.off[i - 1] * prev / self.diag[(i - 1) * p + mode]
                    } else {
                        Complex64::default()
                    };
                work[i * p + mode] = v;
                prev = v;
            }
            // back substitution
            let last = m - 2;
            work[last * p + mode] /= self.diag[last * p + mode];
            for i in (0..last).rev() {
                let v = (work[i * p + mode] - self.off[i] * work[(i + 1) * p + mode])
                    / self.diag[i * p + mode];
                work[i * p + mode] = v;
            }
        }
        for ring in work.chunks_exact_mut(p) {
            fft1_inplace(ring, false);
            for v in ring.iter_mut() {
                *v /= p as f64;
            }
        }
        z[1..].copy_from_slice(&work);
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Preconditioned conjugate gradients for the SPD disk operator.
fn solve_pcg(
    op: &DiskOperator,
    pre: &MeanPreconditioner,
    b: &[Complex64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<Vec<Complex64>> {
    let n = b.len();
    let mut x = vec![Complex64::default(); n];
    let mut r = b.to_vec();
    let b_norm = r.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if b_norm == 0.0 {
        return Ok(x);
    }
    let mut z = vec![Complex64::default(); n];
    pre.apply(&r, &mut z);
    let mut pdir = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![Complex64::default(); n];
    for _ in 0..max_iter {
        op.apply(&pdir, &mut ap);
        let alpha = rz / dot(&pdir, &ap);
        for i in 0..n {
            x[i] += alpha * pdir[i];
            r[i] -= alpha * ap[i];
        }
        let r_norm = r.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if r_norm <= rel_tol * b_norm {
            return Ok(x);
        }
        pre.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            pdir[i] = z[i] + beta * pdir[i];
        }
    }
    Err(Error::NonConvergence {
        detail: "conjugate gradients on the disk operator".into(),
        achieved: r.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt() / b_norm,
    })
}

/// Assemble the Dirichlet-to-Neumann matrix: for each boundary mode, solve
/// the Dirichlet problem, evaluate the conormal flux by one-sided
/// second-order differencing at the boundary, and take the angular transform
/// of the flux.
///
/// Columns for `-n` follow from the reality of the operator,
/// `A[m][-n] = conj(A[-m][n])`, halving the solves.
pub fn dtn_assemble(c: &Conductivity, n_b: usize, mesh: PolarMesh) -> Result<DtnMatrix> {
    if mesh.n_theta < 8 * n_b {
        return Err(Error::Domain(format!(
            "mesh must resolve the boundary modes: angular points {} < 8 N_b = {}",
            mesh.n_theta,
            8 * n_b
        )));
    }
    if mesh.n_r < 8 {
        return Err(Error::Domain("radial mesh too coarse".into()));
    }
    let op = DiskOperator::build(c, mesh);
    let pre = MeanPreconditioner::build(&op);
    let (m, p) = (op.m, op.p);
    let dr = 1.0 / m as f64;
    let dth = 2.0 * PI / p as f64;
    let mut out = DtnMatrix::zeros(n_b, mesh);
    for n in 0..=n_b as i64 {
        let f: Vec<Complex64> =
            (0..p).map(|j| Complex64::from_polar(1.0, n as f64 * j as f64 * dth)).collect();
        let b = op.rhs(&f);
        let u = solve_pcg(&op, &pre, &b, 1e-11, 4000)?;
        // one-sided second-order normal derivative at r = 1
        let mut flux: Vec<Complex64> = (0..p)
            .map(|j| {
                let u_m1 = DiskOperator::at(&u, p, m - 1, j);
                let u_m2 = DiskOperator::at(&u, p, m - 2, j);
                let du = (3.0 * f[j] - 4.0 * u_m1 + u_m2) / (2.0 * dr);
                op.gamma_boundary[j] * du
            })
            .collect();
        fft1_inplace(&mut flux, true);
        for mm in -(n_b as i64)..=n_b as i64 {
            let idx = mm.rem_euclid(p as i64) as usize;
            let v = flux[idx] / p as f64;
            out.set(mm, n, v);
            if n > 0 {
                out.set(-mm, -n, v.conj());
            }
        }
    }
    Ok(out)
}

/// Operator norm of `A - B` under the half-order Sobolev pairing on the
/// circle: the largest singular value of `D (A - B) D` with
/// `D = diag((1 + n^2)^{-1/4})`, computed by power iteration on the normal
/// matrix.
pub fn dtn_opnorm_diff(a: &DtnMatrix, b: &DtnMatrix) -> Result<f64> {
    if a.modes != b.modes {
        return Err(Error::SizeMismatch { expected: a.side(), got: b.side() });
    }
    let nb = a.modes as i64;
    let side = a.side();
    let weight = |n: i64| (1.0 + (n * n) as f64).powf(-0.25);
    let mut w = vec![Complex64::default(); side * side];
    for m in -nb..=nb {
        for n in -nb..=nb {
            w[((m + nb) as usize) * side + ((n + nb) as usize)] =
                weight(m) * (a.entry(m, n) - b.entry(m, n)) * weight(n);
        }
    }
    // power iteration on W^H W
    let mut v: Vec<Complex64> = (0..side)
        .map(|i| Complex64::new((0.618 * i as f64).sin() + 0.31, (0.414 * i as f64).cos()))
        .collect();
    let norm = |x: &[Complex64]| x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let nv = norm(&v);
    v.iter_mut().for_each(|c| *c /= nv);
    let mut lambda = 0.0f64;
    for _ in 0..5000 {
        let mut y = vec![Complex64::default(); side];
        for i in 0..side {
            let mut acc = Complex64::default();
            for j in 0..side {
                acc += w[i * side + j] * v[j];
            }
            y[i] = acc;
        }
        let mut u = vec![Complex64::default(); side];
        for j in 0..side {
            let mut acc = Complex64::default();
            for i in 0..side {
                acc += w[i * side + j].conj() * y[i];
            }
            u[j] = acc;
        }
        let new_lambda = norm(&u);
        if new_lambda == 0.0 {
            return Ok(0.0);
        }
        u.iter_mut().for_each(|c| *c /= new_lambda);
        let delta = (new_lambda - lambda).abs();
        v = u;
        lambda = new_lambda;
        if delta <= 1e-14 * lambda.max(1e-300) {
            break;
        }
    }
    Ok(lambda.sqrt())
}

// ---------------------------------------------------------------------------
// Radial shooting oracle
// ---------------------------------------------------------------------------

/// Independent 1-D Sturm-Liouville route to the DtN diagonal for radial
/// conductivities: integrate `(r gamma u')' = n^2 gamma u / r` outward by
/// RK4 from the regular asymptote `u ~ r^|n|` and return the boundary flux
/// for unit boundary data, `gamma(1) u'(1) / u(1)`.
pub fn radial_dtn_entry(gamma: &dyn Fn(f64) -> f64, n: i64, steps: usize) -> f64 {
    let n_abs = n.unsigned_abs() as f64;
    if n == 0 {
        return 0.0; // constants solve the equation with zero flux
    }
    // start just off the origin on the exact power solution (valid while
    // gamma is constant near 0)
    let r0: f64 = 0.05;
    let mut r = r0;
    let mut u = r0.powf(n_abs);
    let mut v = gamma(r0) * n_abs * r0.powf(n_abs); // v = r gamma u'
    let h = (1.0 - r0) / steps as f64;
    let deriv = |r: f64, u: f64, v: f64| -> (f64, f64) {
        let g = gamma(r);
        (v / (r * g), n_abs * n_abs * g * u / r)
    };
    for _ in 0..steps {
        let (k1u, k1v) = deriv(r, u, v);
        let (k2u, k2v) = deriv(r + 0.5 * h, u + 0.5 * h * k1u, v + 0.5 * h * k1v);
        let (k3u, k3v) = deriv(r + 0.5 * h, u + 0.5 * h * k2u, v + 0.5 * h * k2v);
        let (k4u, k4v) = deriv(r + h, u + h * k3u, v + h * k3v);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        r += h;
        if u.abs() > 1e200 {
            u /= 1e200;
            v /= 1e200;
        }
    }
    v / u
}

// ---------------------------------------------------------------------------
// CGO-to-conductivity-solution bridge
// ---------------------------------------------------------------------------

/// Combine geometric optics functions for `mu` and `-mu` into a complex
/// solution of the conductivity equation: `u = Re f_+ + i Im f_-`.
pub fn cgo_to_u(f_plus: &CgoFunction, f_minus: &CgoFunction) -> Result<Field> {
    if f_plus.grid() != f_minus.grid() {
        return Err(Error::Grid("CGO pair must share a grid".into()));
    }
    if (f_plus.k - f_minus.k).norm() > 1e-14 {
        return Err(Error::Domain("CGO pair must share the frequency k".into()));
    }
    let sp = f_plus.samples();
    let sm = f_minus.samples();
    Ok(sp.zip(&sm, |p, m| Complex64::new(p.re, m.im)))
}

/// Weak residual of `div(gamma grad u) = 0` for the combined solution,
/// tested against a fixed family of Gaussian bumps with analytic gradients.
/// First derivatives of `u` come from the chain rule on the structured CGO
/// pair; no derivative of `gamma` is taken. The returned value is the worst
/// normalized pairing `|int gamma grad u . grad v| / (||grad u|| ||grad v||)`
/// over the family; it sits at quadrature scale, not solver scale.
pub fn weak_conductivity_residual(
    c: &Conductivity,
    f_plus: &CgoFunction,
    f_minus: &CgoFunction,
) -> Result<f64> {
    let grid = f_plus.grid();
    if grid != c.grid() {
        return Err(Error::Grid("conductivity and CGO grids must agree".into()));
    }
    let (dp, dbp) = f_plus.derivatives();
    let (dm, dbm) = f_minus.derivatives();
    // u_x = Re(d f+ + dbar f+) + i Im(d f- + dbar f-), likewise u_y
    let ux = {
        let xp = dp.add(&dbp);
        let xm = dm.add(&dbm);
        xp.zip(&xm, |p, m| Complex64::new(p.re, m.im))
    };
    let uy = {
        let yp = dp.sub(&dbp).scale(Complex64::new(0.0, 1.0));
        let ym = dm.sub(&dbm).scale(Complex64::new(0.0, 1.0));
        yp.zip(&ym, |p, m| Complex64::new(p.re, m.im))
    };
    let h = grid.spacing();
    let n = grid.n();
    let grad_u_norm = (ux.l2_norm().powi(2) + uy.l2_norm().powi(2)).sqrt();
    let width: f64 = 0.35;
    let mut worst = 0.0f64;
    for cx in -2..=2 {
        for cy in -2..=2 {
            let center = Complex64::new(0.55 * cx as f64, 0.55 * cy as f64);
            let mut pairing = Complex64::default();
            let mut grad_v_sq = 0.0;
            for j in 0..n {
                for m in 0..n {
                    let z = grid.z_at(j, m);
                    let d = z - center;
                    let w = (-d.norm_sqr() / (width * width)).exp();
                    if w < 1e-14 {
                        continue;
                    }
                    let vx = -2.0 * d.re / (width * width) * w;
                    let vy = -2.0 * d.im / (width * width) * w;
                    let g = c.gamma.value(j, m).re;
                    pairing += g * (ux.value(j, m) * vx + uy.value(j, m) * vy);
                    grad_v_sq += vx * vx + vy * vy;
                }
            }
            let grad_v_norm = (grad_v_sq * h * h).sqrt();
            if grad_v_norm > 0.0 {
                let r = (pairing * h * h).norm() / (grad_u_norm * grad_v_norm);
                worst = worst.max(r);
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beltrami::{mu_from_gamma, solve_nonlinear_cgo, SolverConfig};

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(n, 4.0).unwrap()
    }

    fn radial_bump() -> GammaProfile {
        GammaProfile::RadialBump { amplitude: 0.8, inner: 0.3, outer: 0.7 }
    }

    #[test]
    fn conductivity_validation() {
        let g = grid(64);
        assert!(Conductivity::new(radial_bump(), g).is_ok());
        let too_wide = GammaProfile::RadialBump { amplitude: 0.5, inner: 0.3, outer: 1.05 };
        assert!(Conductivity::new(too_wide, g).is_err());
        let negative = GammaProfile::RadialBump { amplitude: -1.5, inner: 0.3, outer: 0.7 };
        assert!(Conductivity::new(negative, g).is_err());
    }

    #[test]
    fn dtn_identity_is_diagonal_with_mode_numbers() {
        let g = grid(64);
        let c = Conductivity::new(GammaProfile::Uniform, g).unwrap();
        // discretization error scales like (n dr)^2; this coarse-mesh test
        // keeps |n| <= 10, the acceptance suite runs the pinned 256x512 mesh
        let mesh = PolarMesh::new(128, 256);
        let a = dtn_assemble(&c, 10, mesh).unwrap();
        for n in -10i64..=10 {
            for m in -10i64..=10 {
                let v = a.entry(m, n);
                if m == n {
                    let expect = n.unsigned_abs() as f64;
                    if n == 0 {
                        assert!(v.norm() < 1e-8, "mode 0 flux {v}");
                    } else {
                        assert!(
                            (v.re - expect).abs() / expect < 0.01 && v.im.abs() < 1e-8,
                            "mode {n}: {v}"
                        );
                    }
                } else {
                    assert!(v.norm() < 1e-8, "off-diagonal ({m},{n}): {v}");
                }
            }
        }
    }

    #[test]
    fn dtn_hermitian_and_zero_column() {
        let g = grid(64);
        let cusp = GammaProfile::ModulusCusp {
            spec: ModulusSpec::log_power(2.0).unwrap(),
            amplitude: 0.3,
            center: (0.2, -0.1),
            r_in: 0.2,
            r_out: 0.6,
        };
        let c = Conductivity::new(cusp, g).unwrap();
        let a = dtn_assemble(&c, 8, PolarMesh::new(64, 128)).unwrap();
        // constants are solutions: n = 0 column (and row) vanish
        for m in -8i64..=8 {
            assert!(a.entry(m, 0).norm() < 1e-8, "column 0 at {m}");
            assert!(a.entry(0, m).norm() < 1e-7, "row 0 at {m}");
        }
        let dev = a.hermitian_deviation();
        assert!(dev < 1e-2, "hermitian deviation {dev}");
    }

    #[test]
    fn dtn_radial_matches_shooting() {
        let g = grid(64);
        let c = Conductivity::new(radial_bump(), g).unwrap();
        let a = dtn_assemble(&c, 8, PolarMesh::new(512, 512)).unwrap();
        let prof = radial_bump();
        let gamma_r = move |r: f64| prof.eval_polar(r, 0.0);
        for n in 1..=8i64 {
            let oracle = radial_dtn_entry(&gamma_r, n, 20_000);
            let fd = a.entry(n, n).re;
            let rel = (fd - oracle).abs() / oracle;
            assert!(rel < 1e-3, "mode {n}: fd {fd} vs shooting {oracle} (rel {rel})");
            if n > 1 {
                assert!(a.entry(n - 1, n).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn opnorm_diagonal_formula_and_zero() {
        let mesh = PolarMesh::new(32, 64);
        let mut a = DtnMatrix::zeros(6, mesh);
        let b = DtnMatrix::zeros(6, mesh);
        assert_eq!(dtn_opnorm_diff(&a, &a.clone()).unwrap(), 0.0);
        for n in -6i64..=6 {
            a.set(n, n, Complex64::new(n.unsigned_abs() as f64, 0.0));
        }
        let expect = (-6i64..=6)
            .map(|n| n.unsigned_abs() as f64 / (1.0 + (n * n) as f64).sqrt())
            .fold(0.0f64, f64::max);
        let got = dtn_opnorm_diff(&a, &b).unwrap();
        assert!((got - expect).abs() < 1e-10, "{got} vs {expect}");
    }

    #[test]
    fn opnorm_matches_dense_svd_oracle() {
        use nalgebra::DMatrix;
        let mesh = PolarMesh::new(32, 64);
        let nb = 6usize;
        let side = 2 * nb + 1;
        let mut a = DtnMatrix::zeros(nb, mesh);
        let b = DtnMatrix::zeros(nb, mesh);
        let mut seed = 1u64;
        let mut rnd = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) as f64 / (1u64 << 31) as f64) - 1.0
        };
        for m in -(nb as i64)..=nb as i64 {
            for n in m..=nb as i64 {
                let v = Complex64::new(rnd(), rnd());
                a.set(m, n, v);
                a.set(n, m, v.conj());
            }
        }
        let got = dtn_opnorm_diff(&a, &b).unwrap();
        // oracle: the real embedding [[Re, -Im], [Im, Re]] has the same
        // singular values, duplicated
        let w = |n: i64| (1.0 + (n * n) as f64).powf(-0.25);
        let mut emb = DMatrix::<f64>::zeros(2 * side, 2 * side);
        for m in -(nb as i64)..=nb as i64 {
            for n in -(nb as i64)..=nb as i64 {
                let v = w(m) * a.entry(m, n) * w(n);
                let (i, j) = ((m + nb as i64) as usize, (n + nb as i64) as usize);
                emb[(i, j)] = v.re;
                emb[(i, j + side)] = -v.im;
                emb[(i + side, j)] = v.im;
                emb[(i + side, j + side)] = v.re;
            }
        }
        let svd = emb.svd(false, false);
        let oracle = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
        assert!((got - oracle).abs() <= 1e-10 * oracle.max(1.0), "{got} vs oracle {oracle}");
    }

    #[test]
    fn dtn_serialization_roundtrip() {
        let mesh = PolarMesh::new(16, 32);
        let mut a = DtnMatrix::zeros(3, mesh);
        a.set(2, -1, Complex64::new(0.5, -0.25));
        let mut buf = Vec::new();
        a.write_to(&mut buf).unwrap();
        let b = DtnMatrix::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(b.modes(), 3);
        assert_eq!(b.mesh(), mesh);
        assert_eq!(b.entry(2, -1), Complex64::new(0.5, -0.25));
    }

    #[test]
    fn monotone_family_in_amplitude() {
        let g = grid(64);
        let mesh = PolarMesh::new(64, 128);
        let ts = [0.1, 0.2, 0.4];
        let mats: Vec<DtnMatrix> = ts
            .iter()
            .map(|&t| {
                let prof = GammaProfile::RadialBump { amplitude: t, inner: 0.3, outer: 0.7 };
                dtn_assemble(&Conductivity::new(prof, g).unwrap(), 8, mesh).unwrap()
            })
            .collect();
        let d01 = dtn_opnorm_diff(&mats[0], &mats[1]).unwrap();
        let d02 = dtn_opnorm_diff(&mats[0], &mats[2]).unwrap();
        let d12 = dtn_opnorm_diff(&mats[1], &mats[2]).unwrap();
        assert!(d01 > 0.0);
        assert!(d02 > d01, "|t-s| monotonicity: {d02} vs {d01}");
        assert!(d02 > d12);
    }

    #[test]
    fn opnorm_diff_stable_under_mesh_doubling() {
        let g = grid(64);
        let c1 = Conductivity::new(GammaProfile::Uniform, g).unwrap();
        let prof = GammaProfile::RadialBump { amplitude: 0.4, inner: 0.3, outer: 0.7 };
        let c2 = Conductivity::new(prof, g).unwrap();
        let diff_at = |mesh: PolarMesh| {
            let a = dtn_assemble(&c1, 8, mesh).unwrap();
            let b = dtn_assemble(&c2, 8, mesh).unwrap();
            dtn_opnorm_diff(&a, &b).unwrap()
        };
        let coarse = diff_at(PolarMesh::new(64, 128));
        let fine = diff_at(PolarMesh::new(128, 256));
        let change = (fine - coarse).abs() / fine;
        assert!(change < 0.10, "mesh doubling changed the norm by {change:.3}");
    }

    #[test]
    fn cgo_to_u_trivial_cases() {
        let g = grid(64);
        let k = Complex64::new(2.0, 0.0);
        let fp = CgoFunction::plane_wave(g, k);
        let fm = CgoFunction::plane_wave(g, k);
        let u = cgo_to_u(&fp, &fm).unwrap();
        let expect = fp.samples();
        assert!(u.sub(&expect).sup_norm() < 1e-14);
        // k = 0: u identically 1
        let f0 = CgoFunction::plane_wave(g, Complex64::default());
        let u0 = cgo_to_u(&f0, &f0).unwrap();
        assert!(u0.sub(&Field::constant(g, Complex64::new(1.0, 0.0))).sup_norm() < 1e-15);
        // mismatched k rejected
        let fk = CgoFunction::plane_wave(g, Complex64::new(1.0, 0.0));
        assert!(cgo_to_u(&fp, &fk).is_err());
    }

    #[test]
    fn weak_residual_small_for_cgo_pair() {
        let g = grid(256);
        let cusp = GammaProfile::ModulusCusp {
            spec: ModulusSpec::log_power(2.0).unwrap(),
            amplitude: 0.5,
            center: (0.1, 0.05),
            r_in: 0.2,
            r_out: 0.6,
        };
        let c = Conductivity::new(cusp, g).unwrap();
        let mu = mu_from_gamma(c.gamma(), 2.0, 7).unwrap();
        let neg = crate::beltrami::BeltramiCoefficient::new(
            mu.field().scale(Complex64::new(-1.0, 0.0)),
            2.0,
            7,
        )
        .unwrap();
        let cfg = SolverConfig::default();
        let k = Complex64::new(2.0, 0.0);
        let fp = solve_nonlinear_cgo(&mu, k, &cfg).unwrap().function();
        let fm = solve_nonlinear_cgo(&neg, k, &cfg).unwrap().function();
        let resid = weak_conductivity_residual(&c, &fp, &fm).unwrap();
        // quadrature scale: frozen from the measured value with margin
        assert!(resid < 1e-4, "weak residual {resid}");
        // identity conductivity with exact plane waves sits at roundoff scale
        let c1 = Conductivity::new(GammaProfile::Uniform, g).unwrap();
        let pw = CgoFunction::plane_wave(g, k);
        let r0 = weak_conductivity_residual(&c1, &pw, &pw).unwrap();
        assert!(r0 < 1e-10, "plane-wave weak residual {r0}");
    }
}
