//! Weighted norms, shift moduli, sampled sup-seminorms, and the analytic
//! oracles: shift-integral profiles, the oscillatory angular integral, the
//! cutoff-kernel Fourier decay, and an interpolation inequality for
//! compactly supported differentiable fields.

pub mod bessel;

use crate::error::{Error, Result};
use crate::field::{self, Field};
use crate::grid::GridSpec;
use crate::modulus::{ModulusKind, ModulusSpec, ThetaWeight};
use crate::quad::integrate_with_breaks;
use crate::util::chi_cutoff;
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

// ---------------------------------------------------------------------------
// L2 shift modulus and weighted spectral norms
// ---------------------------------------------------------------------------

/// `||f(. + y) - f||_2` for a lattice vector `y` (exact cyclic shift).
/// Non-lattice shifts are rejected.
pub fn l2_modulus(f: &Field, y: Complex64) -> Result<f64> {
    let (dj, dm) = lattice_steps(f.grid(), y)?;
    Ok(f.shift_lattice(dj, dm).sub(f).l2_norm())
}

fn lattice_steps(grid: GridSpec, y: Complex64) -> Result<(i64, i64)> {
    let h = grid.spacing();
    let fj = y.re / h;
    let fm = y.im / h;
    let dj = fj.round();
    let dm = fm.round();
    if (fj - dj).abs() > 1e-9 * fj.abs().max(1.0) || (fm - dm).abs() > 1e-9 * fm.abs().max(1.0) {
        return Err(Error::Domain(format!(
            "shift {y} is not an integer multiple of the grid spacing {h}"
        )));
    }
    Ok((dj as i64, dm as i64))
}

/// Lattice radii repeat many times; memoize the weight per squared integer
/// radius for one pass over a spectral field.
struct ThetaOnLattice<'a> {
    w: &'a ThetaWeight,
    cache: std::collections::HashMap<i64, f64>,
}

impl<'a> ThetaOnLattice<'a> {
    fn new(w: &'a ThetaWeight) -> Self {
        ThetaOnLattice { w, cache: std::collections::HashMap::new() }
    }

    fn eval(&mut self, grid: &GridSpec, n1: i64, n2: i64) -> f64 {
        let key = n1 * n1 + n2 * n2;
        if let Some(v) = self.cache.get(&key) {
            return *v;
        }
        let v = self.w.eval((key as f64).sqrt() / (2.0 * grid.half_width()));
        self.cache.insert(key, v);
        v
    }
}

/// Norm of the weighted spectral energy `sum |fhat|^2 (1 + theta(|xi|))`.
/// Always at least the plain L2 norm; equal to it for fields bandlimited to
/// `|xi| <= 1`.
pub fn w_theta_norm(f: &Field, w: &ThetaWeight) -> f64 {
    let sf = field::to_spectral(f);
    let grid = f.grid();
    let dxi2 = 1.0 / grid.cell_area();
    let mut th = ThetaOnLattice::new(w);
    let mut acc = 0.0;
    for (n1, n2, _, c) in sf.iter_freqs() {
        acc += c.norm_sqr() * (1.0 + th.eval(&grid, n1, n2));
    }
    (acc * dxi2).sqrt()
}

/// Weighted spectral mass outside radius `r0`:
/// `sum_{|xi| >= r0} |fhat|^2 theta(|xi|)^nu`.
pub fn spectral_tail(f: &Field, w: &ThetaWeight, r0: f64, nu: f64) -> Result<f64> {
    if !(r0 > 1.0) {
        return Err(Error::Domain(format!("spectral tail needs R0 > 1, got {r0}")));
    }
    if !(0.0..=1.0).contains(&nu) {
        return Err(Error::Domain(format!("spectral tail needs nu in [0,1], got {nu}")));
    }
    let sf = field::to_spectral(f);
    let grid = f.grid();
    let dxi2 = 1.0 / grid.cell_area();
    let mut th = ThetaOnLattice::new(w);
    let mut acc = 0.0;
    for (n1, n2, xi, c) in sf.iter_freqs() {
        if xi >= r0 {
            acc += c.norm_sqr() * th.eval(&grid, n1, n2).powf(nu);
        }
    }
    Ok(acc * dxi2)
}

// ---------------------------------------------------------------------------
// Shift-integral profile I0 and its comparison against theta
// ---------------------------------------------------------------------------

/// Radius beyond which the profile switches from the literal two-dimensional
/// quadrature to the exact angular (Bessel) reduction; the two paths are
/// cross-checked where they overlap.
const I0_2D_LIMIT: f64 = 8.0;
/// Outer cutoff of the radial integral; the remainder is added in closed form.
const I0_RADIAL_CUT: f64 = 32.0;
/// Beyond this phase the oscillatory kernel is dropped from the slowly
/// varying piece (error bounded by the Bessel envelope).
const I0_PHASE_CUT: f64 = 1000.0;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct I0Sample {
    pub r: f64,
    pub i0: f64,
    pub theta: f64,
    pub ratio: f64,
    pub converged: bool,
}

/// Closed-form remainder `int_A^inf d rho / (rho * tilde-omega(rho)^2)`,
/// valid for `A >= 2` where the extension is an exact power of `log rho`.
/// Requires the square-Dini condition of the base modulus.
fn weight_tail(spec: &ModulusSpec, a: f64) -> Result<f64> {
    debug_assert!(a >= 2.0);
    let la = a.ln();
    match spec.kind {
        ModulusKind::LogPower => {
            let b = spec.exponent;
            if b <= 0.5 {
                return Err(Error::Domain(format!(
                    "log-power base needs exponent > 1/2 for square-Dini, got {b}"
                )));
            }
            Ok(la.powf(1.0 - 2.0 * b) / (2.0 * b - 1.0))
        }
        ModulusKind::Holder => {
            let g = spec.exponent;
            Ok(a.powf(-2.0 * g) / (2.0 * g))
        }
        ModulusKind::IntegratedLogPower => {
            let al = spec.exponent;
            if al <= 1.5 {
                return Err(Error::Domain(format!(
                    "integrated base needs exponent > 3/2 for square-Dini, got {al}"
                )));
            }
            Ok(la.powf(3.0 - 2.0 * al) / ((2.0 * al - 3.0) * (al - 1.0) * (al - 1.0)))
        }
    }
}

/// The shift integral `I(xi)` evaluated by nested two-dimensional quadrature
/// with a general frequency direction: outer radial panels of half an
/// oscillation period, inner adaptive angular integral. Practical for
/// `|xi| <= 16`; the profile switches to the angular reduction beyond.
pub fn i0_vector(base: &ModulusSpec, xi: (f64, f64), rel_tol: f64) -> Result<f64> {
    let r = (xi.0 * xi.0 + xi.1 * xi.1).sqrt();
    if !(r > 0.0) {
        return Err(Error::Domain("shift integral needs a nonzero frequency".into()));
    }
    weight_tail(base, I0_RADIAL_CUT)?; // validates square-Dini up front
    let inner = |rho: f64| -> f64 {
        // the angular integrand oscillates ~ 2 rho |xi| times per turn; hand
        // the quadrature panels at that scale so refinement starts resolved
        let panels = ((8.0 * rho * r).ceil() as usize).clamp(8, 200_000);
        let breaks: Vec<f64> =
            (1..panels).map(|i| 2.0 * PI * i as f64 / panels as f64).collect();
        integrate_with_breaks(
            |th: f64| {
                let dot = xi.0 * th.cos() + xi.1 * th.sin();
                // 2 (1 - cos(2 pi rho dot)) in cancellation-free form
                let s = (PI * rho * dot).sin();
                4.0 * s * s
            },
            0.0,
            2.0 * PI,
            &breaks,
            rel_tol * 0.5,
        )
        .value
    };
    let mut converged = true;
    let period = 1.0 / r;
    let mut acc = 0.0;
    let mut lo = 1e-9;
    while lo < I0_RADIAL_CUT {
        let hi = (lo + period).min(I0_RADIAL_CUT);
        let piece = integrate_with_breaks(
            |rho: f64| {
                let w = base.eval_tilde(rho);
                inner(rho) / (rho * w * w)
            },
            lo,
            hi,
            &[],
            rel_tol,
        );
        converged &= piece.converged;
        acc += piece.value;
        lo = hi;
    }
    let tail = 4.0 * PI * weight_tail(base, I0_RADIAL_CUT)?;
    if !converged {
        return Err(Error::Quadrature { partial: acc + tail, error: f64::NAN });
    }
    Ok(acc + tail)
}

/// The shift integral via the exact angular reduction
/// `I0(r) = 4 pi int (1 - J0(2 pi r rho)) / (rho * tilde-omega(rho)^2) d rho`.
pub fn i0_radial(base: &ModulusSpec, r: f64, rel_tol: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain("shift integral needs r > 0".into()));
    }
    let tail = weight_tail(base, I0_RADIAL_CUT)?;
    let x_hi = 2.0 * PI * r * I0_RADIAL_CUT;
    let winv = |x: f64| {
        let w = base.eval_tilde(x / (2.0 * PI * r));
        1.0 / (w * w)
    };
    // kinks where the modulus branches switch
    let kinks: Vec<f64> = [0.5, 1.0, 2.0].iter().map(|c| 2.0 * PI * r * c).collect();

    let mut converged = true;
    let x_mid = I0_PHASE_CUT.min(x_hi);
    // oscillatory head, panelized by half-periods of J0
    let mut acc = 0.0;
    let mut lo = 1e-10;
    while lo < x_mid {
        let hi = (lo + PI).min(x_mid);
        let piece = integrate_with_breaks(
            |x: f64| bessel::one_minus_j0(x) * winv(x) / x,
            lo,
            hi,
            &kinks,
            rel_tol,
        );
        converged &= piece.converged;
        acc += piece.value;
        lo = hi;
    }
    // slowly varying remainder: kernel ~ 1, integrate in u = log x
    if x_hi > x_mid {
        let piece = integrate_with_breaks(
            |u: f64| winv(u.exp()),
            x_mid.ln(),
            x_hi.ln(),
            &kinks.iter().map(|k| k.ln()).collect::<Vec<_>>(),
            rel_tol,
        );
        converged &= piece.converged;
        acc += piece.value;
    }
    let total = 4.0 * PI * (acc + tail);
    if !converged {
        return Err(Error::Quadrature { partial: total, error: f64::NAN });
    }
    Ok(total)
}

/// Profile of the shift integral against the spectral weight over a list of
/// radii. Quadrature failures are recorded per radius rather than aborting.
pub fn i0_profile(w: &ThetaWeight, rs: &[f64], rel_tol: f64) -> Vec<I0Sample> {
    rs.iter()
        .map(|&r| {
            let res = if r <= I0_2D_LIMIT {
                i0_vector(w.base_modulus(), (r, 0.0), rel_tol)
            } else {
                i0_radial(w.base_modulus(), r, rel_tol)
            };
            let theta = w.eval(r);
            match res {
                Ok(i0) => I0Sample { r, i0, theta, ratio: i0 / theta, converged: true },
                Err(Error::Quadrature { partial, .. }) => {
                    I0Sample { r, i0: partial, theta, ratio: partial / theta, converged: false }
                }
                Err(_) => I0Sample { r, i0: f64::NAN, theta, ratio: f64::NAN, converged: false },
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Sup seminorms with respect to a modulus
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SeminormMethod {
    FullPairScan,
    SampledPairs,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeminormReport {
    pub value: f64,
    pub method: SeminormMethod,
    pub sample_seed: u64,
    pub pair_count: usize,
}

#[derive(Debug, Clone, Copy)]
pub enum SeminormMode {
    /// Exact discrete sup over all pairs; O(N^4), refused for N > 64.
    FullScan,
    /// All lattice-neighbor pairs plus a seeded sample stratified by dyadic
    /// distance.
    Sampled { pairs: usize },
}

impl SeminormMode {
    pub fn sampled_default() -> Self {
        SeminormMode::Sampled { pairs: 1_000_000 }
    }
}

/// Discrete sup of `|f(x) - f(y)| / omega(|x - y|)`.
///
/// A sampled report never overshoots the true discrete sup (it scans a subset
/// of pairs) and is deterministic given the seed.
pub fn c_modulus_seminorm(
    f: &Field,
    spec: &ModulusSpec,
    mode: SeminormMode,
    seed: u64,
) -> Result<SeminormReport> {
    c_modulus_seminorm_region(f, spec, mode, seed, None)
}

/// Same as [`c_modulus_seminorm`] but with both pair endpoints restricted to
/// the disk `|z| <= radius` when a region is given.
pub fn c_modulus_seminorm_region(
    f: &Field,
    spec: &ModulusSpec,
    mode: SeminormMode,
    seed: u64,
    region: Option<f64>,
) -> Result<SeminormReport> {
    let grid = f.grid();
    let n = grid.n();
    let h = grid.spacing();
    let in_region = |j: usize, m: usize| -> bool {
        match region {
            None => true,
            Some(rad) => grid.z_at(j, m).norm() <= rad,
        }
    };
    // modulus of the lattice distance, indexed by |dj|, |dm|
    let mut dist_mod = vec![0.0f64; n * n];
    for dj in 0..n {
        for dm in 0..n {
            let d = h * ((dj * dj + dm * dm) as f64).sqrt();
            dist_mod[dj * n + dm] = spec.eval(d);
        }
    }
    let ratio = |j0: usize, m0: usize, j1: usize, m1: usize| -> f64 {
        let dj = j0.abs_diff(j1);
        let dm = m0.abs_diff(m1);
        if dj == 0 && dm == 0 {
            return 0.0;
        }
        let w = dist_mod[dj * n + dm];
        (f.value(j0, m0) - f.value(j1, m1)).norm() / w
    };

    match mode {
        SeminormMode::FullScan => {
            if n > 64 {
                return Err(Error::Domain(format!(
                    "full pair scan is O(N^4) and refused for N = {n} > 64"
                )));
            }
            let pts: Vec<(usize, usize)> = (0..n)
                .flat_map(|j| (0..n).map(move |m| (j, m)))
                .filter(|&(j, m)| in_region(j, m))
                .collect();
            let mut best = 0.0f64;
            let mut count = 0usize;
            for (a, &(j0, m0)) in pts.iter().enumerate() {
                for &(j1, m1) in pts.iter().skip(a + 1) {
                    best = best.max(ratio(j0, m0, j1, m1));
                    count += 1;
                }
            }
            Ok(SeminormReport {
                value: best,
                method: SeminormMethod::FullPairScan,
                sample_seed: seed,
                pair_count: count,
            })
        }
        SeminormMode::Sampled { pairs } => {
            let mut best = 0.0f64;
            let mut count = 0usize;
            // all lattice-neighbor pairs
            for j in 0..n {
                for m in 0..n {
                    if !in_region(j, m) {
                        continue;
                    }
                    if j + 1 < n && in_region(j + 1, m) {
                        best = best.max(ratio(j, m, j + 1, m));
                        count += 1;
                    }
                    if m + 1 < n && in_region(j, m + 1) {
                        best = best.max(ratio(j, m, j, m + 1));
                        count += 1;
                    }
                }
            }
            // seeded sample, stratified by dyadic separation
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let scales: Vec<usize> = (0..)
                .map(|s| 1usize << s)
                .take_while(|&s| s < n)
                .collect();
            let per_scale = pairs / scales.len().max(1);
            for &s in &scales {
                let hi = (2 * s).min(n);
                for _ in 0..per_scale {
                    let j0 = rng.gen_range(0..n);
                    let m0 = rng.gen_range(0..n);
                    let dj = rng.gen_range(0..hi) as i64 * if rng.gen::<bool>() { 1 } else { -1 };
                    let dm = {
                        let mag = rng.gen_range(s..hi) as i64;
                        mag * if rng.gen::<bool>() { 1 } else { -1 }
                    };
                    let j1 = j0 as i64 + dj;
                    let m1 = m0 as i64 + dm;
                    if j1 < 0 || j1 >= n as i64 || m1 < 0 || m1 >= n as i64 {
                        continue;
                    }
                    let (j1, m1) = (j1 as usize, m1 as usize);
                    if !in_region(j0, m0) || !in_region(j1, m1) {
                        continue;
                    }
                    best = best.max(ratio(j0, m0, j1, m1));
                    count += 1;
                }
            }
            Ok(SeminormReport {
                value: best,
                method: SeminormMethod::SampledPairs,
                sample_seed: seed,
                pair_count: count,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Interpolation inequality
// ---------------------------------------------------------------------------

/// One component of the interpolation check: measured sup of a first
/// derivative against the bound built from the sup of the field and the
/// derivative's modulus seminorm.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InterpolationComponent {
    pub lhs: f64,
    pub rhs: f64,
    pub seminorm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InterpolationBound {
    /// x-derivative then y-derivative.
    pub components: [InterpolationComponent; 2],
}

impl InterpolationBound {
    pub fn holds(&self) -> bool {
        self.components.iter().all(|c| c.lhs <= c.rhs * (1.0 + 1e-12) + 1e-300)
    }
}

/// Invert `zeta(r) = r * sigma(r)` by bisection; `zeta` is strictly
/// increasing (linear beyond the cap), so the inverse is well defined.
pub fn invert_zeta(sigma: &ModulusSpec, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let zeta = |r: f64| r * sigma.eval(r);
    let mut hi = 1.0;
    while zeta(hi) < t {
        hi *= 2.0;
        if hi > 1e300 {
            return hi;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if zeta(mid) < t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// For a compactly supported differentiable field, compare the sup of each
/// first derivative with `2 sigma(zeta^{-1}(||f||_0 / [f_xi]_sigma)) [f_xi]_sigma`.
///
/// A zero derivative seminorm means the field is constant, hence zero, and
/// both sides are 0.
pub fn interpolation_bound(
    f: &Field,
    sigma: &ModulusSpec,
    mode: SeminormMode,
    seed: u64,
) -> Result<InterpolationBound> {
    let df = field::d(f);
    let dbf = field::d_bar(f);
    let fx = df.add(&dbf);
    let fy = df.sub(&dbf).scale(Complex64::new(0.0, 1.0));
    let sup0 = f.sup_norm();
    let mut components = [InterpolationComponent { lhs: 0.0, rhs: 0.0, seminorm: 0.0 }; 2];
    for (slot, comp) in [fx, fy].iter().enumerate() {
        let semi = c_modulus_seminorm(comp, sigma, mode, seed)?.value;
        let lhs = comp.sup_norm();
        let rhs = if semi == 0.0 {
            0.0
        } else {
            let r_star = invert_zeta(sigma, sup0 / semi);
            2.0 * sigma.eval(r_star) * semi
        };
        components[slot] = InterpolationComponent { lhs, rhs, seminorm: semi };
    }
    Ok(InterpolationBound { components })
}

// ---------------------------------------------------------------------------
// Oscillatory angular integral
// ---------------------------------------------------------------------------

/// `F(s) = int_0^pi cos(2 pi s cos(theta)) d theta` by adaptive quadrature.
/// The associated positivity quantity is `2 pi - 2 F(s)`.
pub fn oscillatory_integral(s: f64) -> f64 {
    let panels = (8.0 * s.max(1.0)).ceil() as usize;
    let breaks: Vec<f64> = (1..panels).map(|i| PI * i as f64 / panels as f64).collect();
    integrate_with_breaks(|th: f64| (2.0 * PI * s * th.cos()).cos(), 0.0, PI, &breaks, 1e-11)
        .value
}

// ---------------------------------------------------------------------------
// Cutoff-kernel Fourier decay
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct KernelDecayReport {
    pub z: (f64, f64),
    /// Sup over `2 <= |xi| <= xi_max` of `|Khat| * |xi| / log |xi|`.
    pub sup_ratio: f64,
    /// `(|xi|, |Khat|)` profile along radial bins.
    pub profile: Vec<(f64, f64)>,
    /// Grid L1 norm of the kernel, singular cell included analytically.
    pub l1_norm: f64,
    /// `|Khat(0)|`, bounded by the L1 norm.
    pub khat_zero: f64,
}

/// Fourier decay of the cutoff Cauchy kernel `chi(|y|) / (pi (z - y))`.
///
/// The singular cell takes its principal value (zero by central symmetry of
/// the kernel over a centered cell). The expected decay is `log|xi| / |xi|`
/// for kernels with `z` inside the cutoff support, and faster than any tested
/// power for `|z|` beyond it.
pub fn kernel_fourier_decay(z: Complex64, xi_max: f64, grid: GridSpec) -> Result<KernelDecayReport> {
    if !grid.contains(z) {
        return Err(Error::Domain(format!("kernel center {z} outside the period cell")));
    }
    let h = grid.spacing();
    let samples = Field::from_fn(grid, |y| {
        let c = chi_cutoff(y.norm());
        if c == 0.0 {
            return Complex64::default();
        }
        let d = z - y;
        if d.norm() < 0.5 * h {
            Complex64::default() // principal-value cell
        } else {
            Complex64::new(c / PI, 0.0) / d
        }
    });
    // singular-cell contribution to the L1 norm: integral of 1/|u| over the
    // centered square cell is 4 h ln(1 + sqrt 2)
    let singular_l1 = chi_cutoff(z.norm()) / PI * 4.0 * h * (1.0 + 2.0f64.sqrt()).ln();
    let l1_norm = samples.samples().iter().map(|c| c.norm()).sum::<f64>() * h * h + singular_l1;

    let sf = field::to_spectral(&samples);
    let khat_zero = sf.coeff(0, 0).norm();
    let mut sup_ratio = 0.0f64;
    let nbins = 64;
    let mut bins = vec![(0.0f64, 0.0f64); nbins];
    for (_, _, xi, c) in sf.iter_freqs() {
        if xi >= 2.0 && xi <= xi_max {
            let ratio = c.norm() * xi / xi.ln();
            sup_ratio = sup_ratio.max(ratio);
        }
        if xi > 0.0 && xi <= xi_max {
            let b = ((xi / xi_max) * nbins as f64) as usize;
            let b = b.min(nbins - 1);
            if c.norm() > bins[b].1 {
                bins[b] = (xi, c.norm());
            }
        }
    }
    let profile = bins.into_iter().filter(|b| b.1 > 0.0).collect();
    Ok(KernelDecayReport { z: (z.re, z.im), sup_ratio, profile, l1_norm, khat_zero })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{e_k, to_spectral};

    fn grid(n: usize, l: f64) -> GridSpec {
        GridSpec::new(n, l).unwrap()
    }

    fn gaussian(g: GridSpec, a: f64) -> Field {
        Field::from_fn(g, |z| Complex64::new((-a * z.norm_sqr()).exp(), 0.0))
    }

    #[test]
    fn l2_modulus_zero_shift() {
        let g = grid(64, 2.0);
        let f = gaussian(g, 2.0);
        assert_eq!(l2_modulus(&f, Complex64::default()).unwrap(), 0.0);
    }

    #[test]
    fn l2_modulus_rejects_off_lattice() {
        let g = grid(64, 2.0);
        let f = gaussian(g, 2.0);
        assert!(l2_modulus(&f, Complex64::new(0.001, 0.0)).is_err());
    }

    #[test]
    fn l2_modulus_matches_spectral_route() {
        // Plancherel: ||f(.+y) - f||^2 = sum |fhat|^2 |e^{2 pi i xi.y} - 1|^2
        let g = grid(64, 2.0);
        let f = e_k(g, Complex64::new(2.0, 1.0));
        let h = g.spacing();
        for (dj, dm) in [(1i64, 0i64), (3, -2), (0, 5), (-7, 11)] {
            let y = Complex64::new(dj as f64 * h, dm as f64 * h);
            let direct = l2_modulus(&f, y).unwrap();
            let sf = to_spectral(&f);
            let dxi2 = 1.0 / g.cell_area();
            let mut acc = 0.0;
            for (n1, n2, _, c) in sf.iter_freqs() {
                let (x1, x2) = g.xi(n1, n2);
                let phase = 2.0 * PI * (x1 * y.re + x2 * y.im);
                let fac = (Complex64::from_polar(1.0, phase) - Complex64::new(1.0, 0.0)).norm_sqr();
                acc += c.norm_sqr() * fac;
            }
            let spectral = (acc * dxi2).sqrt();
            assert!(
                (direct - spectral).abs() <= 1e-12 * direct.max(1.0),
                "shift ({dj},{dm}): {direct} vs {spectral}"
            );
        }
    }

    #[test]
    fn l2_modulus_triangle_bound() {
        let g = grid(64, 2.0);
        let f = gaussian(g, 1.0);
        let h = g.spacing();
        let two_norm = 2.0 * f.l2_norm();
        for (dj, dm) in [(5i64, 9i64), (31, -17), (2, 2)] {
            let y = Complex64::new(dj as f64 * h, dm as f64 * h);
            assert!(l2_modulus(&f, y).unwrap() <= two_norm * (1.0 + 1e-12));
        }
    }

    #[test]
    fn w_theta_norm_bandlimited_equals_l2() {
        let g = grid(64, 4.0);
        let w = ThetaWeight::new(ModulusSpec::log_power(1.2).unwrap(), 1e-8).unwrap();
        // single frequency at |xi| = 0.5 < 1
        let (x1, x2) = g.xi(4, 0);
        assert!((x1 * x1 + x2 * x2).sqrt() <= 1.0);
        let f = Field::from_fn(g, |z| {
            Complex64::from_polar(1.0, 2.0 * PI * (x1 * z.re + x2 * z.im))
        });
        let wn = w_theta_norm(&f, &w);
        let l2 = f.l2_norm();
        assert!((wn - l2).abs() < 1e-10 * l2);
        assert_eq!(w_theta_norm(&Field::zeros(g), &w), 0.0);
        // never below the L2 norm
        let f2 = gaussian(g, 3.0);
        assert!(w_theta_norm(&f2, &w) >= f2.l2_norm() * (1.0 - 1e-12));
    }

    #[test]
    fn w_theta_norm_monotone_in_weight() {
        // pointwise-larger theta gives the larger norm; Hoelder weights are
        // pointwise ordered (checked first)
        let g = grid(64, 4.0);
        let w1 = ThetaWeight::new(ModulusSpec::holder(0.3).unwrap(), 1e-8).unwrap();
        let w2 = ThetaWeight::new(ModulusSpec::holder(0.6).unwrap(), 1e-8).unwrap();
        for i in 1..40 {
            let r = 1.0 + i as f64;
            assert!(w1.eval(r) <= w2.eval(r) + 1e-12);
        }
        let f = gaussian(g, 2.0);
        assert!(w_theta_norm(&f, &w1) <= w_theta_norm(&f, &w2) * (1.0 + 1e-12));
    }

    #[test]
    fn spectral_tail_bound_and_edges() {
        let g = grid(128, 4.0);
        let w = ThetaWeight::new(ModulusSpec::log_power(1.2).unwrap(), 1e-8).unwrap();
        let f = gaussian(g, 1.0);
        let wn2 = w_theta_norm(&f, &w).powi(2);
        for (r0, nu) in [(4.0, 0.0), (4.0, 0.5), (2.0, 0.3), (4.0, 1.0)] {
            let tail = spectral_tail(&f, &w, r0, nu).unwrap();
            let bound = wn2 / w.eval(r0).powf(1.0 - nu);
            assert!(tail <= bound * (1.0 + 1e-10), "r0 {r0} nu {nu}: {tail} > {bound}");
        }
        // bandlimited below R0 -> 0
        let (x1, x2) = g.xi(4, 4);
        let f2 = Field::from_fn(g, |z| {
            Complex64::from_polar(1.0, 2.0 * PI * (x1 * z.re + x2 * z.im))
        });
        let r0 = 4.0 * (x1 * x1 + x2 * x2).sqrt();
        // zero up to FFT roundoff leakage
        assert!(spectral_tail(&f2, &w, r0, 0.5).unwrap() < 1e-20);
        assert!(spectral_tail(&f, &w, 0.5, 0.5).is_err());
        assert!(spectral_tail(&f, &w, 4.0, 1.5).is_err());
    }

    #[test]
    fn i0_rotation_invariance() {
        let base = ModulusSpec::log_power(1.2).unwrap();
        let a = i0_vector(&base, (4.0, 0.0), 1e-7).unwrap();
        let b = i0_vector(&base, (0.0, 4.0), 1e-7).unwrap();
        assert!((a - b).abs() / a < 1e-6, "rotation defect: {a} vs {b}");
    }

    #[test]
    fn i0_two_paths_agree() {
        let base = ModulusSpec::log_power(1.2).unwrap();
        let two_d = i0_vector(&base, (6.0, 0.0), 1e-7).unwrap();
        let radial = i0_radial(&base, 6.0, 1e-8).unwrap();
        assert!(
            (two_d - radial).abs() / radial < 1e-5,
            "2-D {two_d} vs angular reduction {radial}"
        );
    }

    #[test]
    fn i0_finite_at_one() {
        let base = ModulusSpec::log_power(1.2).unwrap();
        let v = i0_vector(&base, (1.0, 0.0), 1e-7).unwrap();
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn i0_ratio_band_moderate_range() {
        let w = ThetaWeight::new(ModulusSpec::log_power(1.2).unwrap(), 1e-8).unwrap();
        let rs = [10.0, 100.0, 1000.0];
        let samples = i0_profile(&w, &rs, 1e-7);
        for s in &samples {
            assert!(s.converged, "quadrature failed at r = {}", s.r);
            assert!(s.ratio.is_finite() && s.ratio > 0.0);
        }
        let ratios: Vec<f64> = samples.iter().map(|s| s.ratio).collect();
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0f64, f64::max);
        assert!(hi / lo < 4.0, "ratio spread too wide: {ratios:?}");
    }

    #[test]
    fn shift_modulus_bounded_by_generating_modulus() {
        // For the cusp-profile coefficient, M2(mu, y) <= sqrt(area of the
        // doubled disk) * varpi(|y|) * seminorm; differences are supported in
        // the disk of radius 2, giving the area factor sqrt(4 pi).
        let g = GridSpec::new(128, 4.0).unwrap();
        let spec = ModulusSpec::log_power(2.0).unwrap();
        let mu = Field::from_fn(g, |z| {
            let s = z.norm();
            Complex64::new(-0.2 * spec.eval(s) * crate::util::taper(s, 0.1, 0.5), 0.0)
        });
        let semi = c_modulus_seminorm(&mu, &spec, SeminormMode::sampled_default(), 3)
            .unwrap()
            .value;
        let area_factor = (4.0 * PI).sqrt();
        let h = g.spacing();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let dj = rng.gen_range(-40i64..=40);
            let dm = rng.gen_range(-40i64..=40);
            let y = Complex64::new(dj as f64 * h, dm as f64 * h);
            if y.norm() == 0.0 {
                continue;
            }
            let m2 = l2_modulus(&mu, y).unwrap();
            let bound = area_factor * spec.eval(y.norm()) * semi;
            assert!(m2 <= bound, "y = {y}: M2 = {m2} above {bound}");
        }
    }

    #[test]
    fn weighted_norm_bounded_by_square_dini_budget() {
        // membership of the cusp coefficient in the weighted space:
        // ||mu||_Wtheta^2 <= C_(alpha,beta) * Gamma^2 with Gamma the measured
        // modulus norm (sup + seminorm); the measured slack is large, the
        // inequality is asserted with unit prefactor
        let g = GridSpec::new(256, 4.0).unwrap();
        let spec = ModulusSpec::log_power(2.0).unwrap();
        let w = ThetaWeight::new(ModulusSpec::log_power(1.2).unwrap(), 1e-8).unwrap();
        let c_ab = crate::modulus::square_dini_constant(2.0, 1.2).unwrap();
        let mu = Field::from_fn(g, |z| {
            let s = z.norm();
            Complex64::new(-0.3 * spec.eval(s) * crate::util::taper(s, 0.1, 0.5), 0.0)
        });
        let semi = c_modulus_seminorm(&mu, &spec, SeminormMode::sampled_default(), 3)
            .unwrap()
            .value;
        let gamma_norm = mu.sup_norm() + semi;
        let wn = w_theta_norm(&mu, &w);
        assert!(
            wn * wn <= c_ab * gamma_norm * gamma_norm,
            "{} vs {}",
            wn * wn,
            c_ab * gamma_norm * gamma_norm
        );
    }

    #[test]
    fn seminorm_constant_and_linear() {
        let g = grid(32, 2.0);
        let spec = ModulusSpec::log_power(2.0).unwrap();
        let c = Field::constant(g, Complex64::new(2.5, -1.0));
        let rep = c_modulus_seminorm(&c, &spec, SeminormMode::FullScan, 1).unwrap();
        assert_eq!(rep.value, 0.0);
        let f = gaussian(g, 1.0);
        let s1 = c_modulus_seminorm(&f, &spec, SeminormMode::FullScan, 1).unwrap().value;
        let s3 = c_modulus_seminorm(&f.scale(Complex64::new(-3.0, 0.0)), &spec, SeminormMode::FullScan, 1)
            .unwrap()
            .value;
        assert!((s3 - 3.0 * s1).abs() < 1e-12 * s1);
    }

    #[test]
    fn seminorm_sampled_below_full() {
        let g = grid(64, 2.0);
        let spec = ModulusSpec::log_power(2.0).unwrap();
        let f = Field::from_fn(g, |z| Complex64::new((3.0 * z.re).sin() * (-z.norm_sqr()).exp(), 0.0));
        let full = c_modulus_seminorm(&f, &spec, SeminormMode::FullScan, 1).unwrap();
        let sampled =
            c_modulus_seminorm(&f, &spec, SeminormMode::Sampled { pairs: 200_000 }, 1).unwrap();
        assert!(sampled.value <= full.value * (1.0 + 1e-12));
        assert!(sampled.value >= 0.5 * full.value, "sampler badly short: {} vs {}", sampled.value, full.value);
        // determinism
        let again =
            c_modulus_seminorm(&f, &spec, SeminormMode::Sampled { pairs: 200_000 }, 1).unwrap();
        assert_eq!(sampled.value, again.value);
        assert_eq!(sampled.pair_count, again.pair_count);
    }

    #[test]
    fn seminorm_full_scan_refused_above_64() {
        let g = grid(128, 2.0);
        let spec = ModulusSpec::log_power(2.0).unwrap();
        let f = Field::zeros(g);
        assert!(c_modulus_seminorm(&f, &spec, SeminormMode::FullScan, 1).is_err());
    }

    #[test]
    fn zeta_inversion_exact_for_holder() {
        let sigma = ModulusSpec::holder(0.5).unwrap();
        // zeta(r) = r^{1.5} below the cap
        for t in [1e-4, 1e-3, 0.05] {
            let r = invert_zeta(&sigma, t);
            assert!((r - t.powf(1.0 / 1.5)).abs() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn interpolation_zero_field() {
        let g = grid(32, 2.0);
        let sigma = ModulusSpec::integrated_log_power(2.0).unwrap();
        let b = interpolation_bound(&Field::zeros(g), &sigma, SeminormMode::FullScan, 1).unwrap();
        for c in &b.components {
            assert_eq!(c.lhs, 0.0);
            assert_eq!(c.rhs, 0.0);
        }
    }

    #[test]
    fn interpolation_holds_for_smooth_bumps() {
        let g = grid(64, 2.0);
        let sigma = ModulusSpec::integrated_log_power(2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..20 {
            let mut centers = Vec::new();
            for _ in 0..3 {
                centers.push((
                    Complex64::new(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6)),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(0.15..0.5),
                ));
            }
            let f = Field::from_fn(g, |z| {
                let cut = chi_cutoff(z.norm());
                let mut v = 0.0;
                for (c, amp, w) in &centers {
                    v += amp * (-(z - c).norm_sqr() / (w * w)).exp();
                }
                Complex64::new(v * cut, 0.0)
            });
            let b = interpolation_bound(&f, &sigma, SeminormMode::FullScan, trial).unwrap();
            assert!(b.holds(), "trial {trial}: {:?}", b.components);
        }
    }

    #[test]
    fn interpolation_holder_exponent_identity() {
        // For sigma = r^a the bound is 2 u^t v^(1-t) with t = a/(1+a); check
        // the exponent recovered from the generic machinery.
        for a in [0.25, 0.5, 0.75] {
            let sigma = ModulusSpec::holder(a).unwrap();
            let v = 1.0;
            let rhs = |u: f64| 2.0 * sigma.eval(invert_zeta(&sigma, u / v)) * v;
            let (u1, u2) = (1e-4, 1e-3);
            let t_meas = (rhs(u2) / rhs(u1)).ln() / (u2 / u1).ln();
            let t = a / (1.0 + a);
            assert!(
                (t_meas - t).abs() < 1e-12,
                "a = {a}: measured exponent {t_meas} vs {t}"
            );
        }
    }

    #[test]
    fn oscillatory_integral_matches_bessel() {
        // F(s) = pi J0(2 pi s)
        for s in [1.0, 2.0, 5.0, 10.0] {
            let f = oscillatory_integral(s);
            let j = PI * bessel::j0(2.0 * PI * s);
            assert!((f - j).abs() < 1e-8, "s = {s}: {f} vs {j}");
        }
    }

    #[test]
    fn oscillatory_envelope_decays() {
        // |F(s)| shrinks along the J0 envelope ~ s^{-1/2}
        for s in [2.0, 5.0, 10.0, 30.0, 50.0] {
            assert!(oscillatory_integral(s).abs() * s.sqrt() < 1.3);
        }
    }

    #[test]
    fn oscillatory_positivity_minimum() {
        // min over a coarse sweep of 2 pi - 2 F(s); the fine sweep is in the
        // acceptance suite
        let mut min_v = f64::INFINITY;
        for i in 0..=196 {
            let s = 1.0 + i as f64 * 0.25;
            min_v = min_v.min(2.0 * PI - 2.0 * oscillatory_integral(s));
        }
        assert!(min_v >= 4.3, "minimum {min_v}");
    }

    #[test]
    fn kernel_decay_l1_and_zero_mode() {
        let g = grid(128, 4.0);
        let z = Complex64::new(0.0, 0.0);
        let rep = kernel_fourier_decay(z, g.nyquist(), g).unwrap();
        // |Khat(0)| <= ||K||_1 with the L1 norm from radial quadrature:
        // (1/pi) * 2 pi * int chi = 2 int_0^1.5 chi(rho) d rho
        let radial_l1 =
            2.0 * integrate_with_breaks(|r: f64| chi_cutoff(r), 0.0, 1.5, &[1.0], 1e-10).value;
        assert!((rep.l1_norm - radial_l1).abs() / radial_l1 < 0.01);
        assert!(rep.khat_zero <= rep.l1_norm * (1.0 + 1e-9));
        assert!(rep.sup_ratio.is_finite() && rep.sup_ratio > 0.0);
    }

    #[test]
    fn kernel_decay_outside_cell_rejected() {
        let g = grid(64, 2.0);
        assert!(kernel_fourier_decay(Complex64::new(3.0, 0.0), 4.0, g).is_err());
    }

    #[test]
    fn kernel_decay_rapid_when_center_outside_cutoff() {
        // |z| = 4 is outside the cutoff support: the kernel is smooth and its
        // transform decays faster than any tested power, while the singular
        // kernel only manages log|xi|/|xi|. Compare fitted decay slopes over
        // the common range.
        let g = grid(256, 8.0);
        let smooth = kernel_fourier_decay(Complex64::new(4.0, 0.0), 8.0, g).unwrap();
        let singular = kernel_fourier_decay(Complex64::new(0.0, 0.0), 8.0, g).unwrap();
        let slope = |rep: &KernelDecayReport| {
            let pts: Vec<(f64, f64)> = rep
                .profile
                .iter()
                .filter(|(xi, v)| *xi >= 2.0 && *v > 0.0)
                .map(|(xi, v)| (xi.ln(), v.ln()))
                .collect();
            let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
            crate::util::fit_line(&xs, &ys).unwrap().slope
        };
        let s_smooth = slope(&smooth);
        let s_singular = slope(&singular);
        assert!(s_smooth < -2.5, "smooth kernel decays too slowly: slope {s_smooth}");
        assert!(s_singular > -1.8, "singular kernel slope {s_singular}");
        // pointwise power-law check on the smooth tail
        for (xi, v) in smooth.profile.iter().filter(|(xi, _)| *xi > 4.0) {
            assert!(*v < 1.0 / xi.powi(3), "slow decay at |xi| = {xi}: {v}");
        }
    }
}
