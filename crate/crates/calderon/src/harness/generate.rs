//! Conductivity and coefficient generators for the experiment families.
//!
//! The profile is `gamma = 1 + t * modulus(|z - z0|) * taper`: an inverted
//! cusp that attains the generating modulus at the center (not merely bounded
//! by it), smoothly tapered to 1 at the outer radius.

use crate::beltrami::{mu_from_gamma, BeltramiCoefficient};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::forward::{Conductivity, GammaProfile};
use crate::grid::GridSpec;
use crate::modulus::ModulusSpec;
use crate::spaces::{c_modulus_seminorm, SeminormMode};
use crate::util::taper;
use num_complex::Complex64;

/// Build a conductivity from any modulus profile.
pub fn make_conductivity(
    spec: &ModulusSpec,
    amplitude: f64,
    center: Complex64,
    radii: (f64, f64),
    grid: GridSpec,
    seed: u64,
) -> Result<Conductivity> {
    let (r_in, r_out) = radii;
    if !(r_in < r_out) {
        return Err(Error::Domain(format!("need r_in < r_out, got ({r_in}, {r_out})")));
    }
    if center.norm() + r_out >= 1.0 {
        return Err(Error::Domain(format!(
            "profile support must stay inside the unit disk (|center| + r_out = {})",
            center.norm() + r_out
        )));
    }
    let profile = GammaProfile::ModulusCusp {
        spec: *spec,
        amplitude,
        center: (center.re, center.im),
        r_in,
        r_out,
    };
    let c = Conductivity::new(profile, grid)?;
    let mode = if grid.n() <= 64 { SeminormMode::FullScan } else { SeminormMode::sampled_default() };
    let report = c_modulus_seminorm(c.gamma(), spec, mode, seed)?;
    Ok(c.with_regularity(spec.exponent, report))
}

/// The log-power (Dini) conductivity family of the experiments.
pub fn make_dini_conductivity(
    alpha: f64,
    amplitude: f64,
    center: Complex64,
    radii: (f64, f64),
    grid: GridSpec,
    seed: u64,
) -> Result<Conductivity> {
    make_conductivity(&ModulusSpec::log_power(alpha)?, amplitude, center, radii, grid, seed)
}

/// Beltrami coefficient with the cusp profile scaled to a target sup bound.
/// Real and nonpositive, like the coefficient of a conductivity above 1.
pub fn make_mu(
    spec: &ModulusSpec,
    kappa: f64,
    center: Complex64,
    radii: (f64, f64),
    grid: GridSpec,
    seed: u64,
) -> Result<BeltramiCoefficient> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::Domain(format!("target sup must be in (0,1), got {kappa}")));
    }
    let (r_in, r_out) = radii;
    if center.norm() + r_out >= 1.0 {
        return Err(Error::Domain("coefficient support must stay inside the unit disk".into()));
    }
    let raw = Field::from_fn(grid, |z| {
        let s = (z - center).norm();
        Complex64::new(spec.eval(s) * taper(s, r_in, r_out), 0.0)
    });
    let sup = raw.sup_norm();
    if sup == 0.0 {
        return Err(Error::Domain("degenerate profile".into()));
    }
    BeltramiCoefficient::new(raw.scale(Complex64::new(-kappa / sup, 0.0)), spec.exponent, seed)
}

/// Coefficient of a generated conductivity together with its negation (the
/// pair needed to combine geometric optics functions into a conductivity
/// solution).
pub fn mu_pair(c: &Conductivity, seed: u64) -> Result<(BeltramiCoefficient, BeltramiCoefficient)> {
    let alpha = c.alpha().unwrap_or(2.0);
    let mu = mu_from_gamma(c.gamma(), alpha, seed)?;
    let neg = BeltramiCoefficient::new(mu.field().scale(Complex64::new(-1.0, 0.0)), alpha, seed)?;
    Ok((mu, neg))
}
