//! Analytic-oracle runner: the oscillatory positivity sweep with its Bessel
//! cross-check, the cutoff-kernel Fourier decay under grid doubling, the
//! interpolation property suite, and the shift-integral/weight equivalence
//! bands.

use super::config::ExperimentConfig;
use crate::error::Result;
use crate::field::Field;
use crate::grid::GridSpec;
use crate::modulus::{ModulusSpec, ThetaWeight};
use crate::spaces::{
    bessel, i0_profile, interpolation_bound, kernel_fourier_decay, oscillatory_integral,
    SeminormMode,
};
use crate::util::chi_cutoff;
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Serialize)]
pub struct OscillatoryReport {
    pub min_value: f64,
    pub s_at_min: f64,
    pub bessel_crosscheck_max_err: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelDecayPoint {
    pub z: (f64, f64),
    pub sup_ratio_base: f64,
    pub sup_ratio_doubled: f64,
    pub rel_change: f64,
    pub l1_bound_ok: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct InterpolationReport {
    pub trials: usize,
    pub failures: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceBand {
    pub beta: f64,
    pub band_c: f64,
    pub extended_band_c: f64,
    pub rel_change: f64,
    pub ratios: Vec<(f64, f64)>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub oscillatory: OscillatoryReport,
    pub kernel_decay: Vec<KernelDecayPoint>,
    pub interpolation: InterpolationReport,
    pub equivalence: Vec<EquivalenceBand>,
    pub config_echo: String,
    pub generated_at_unix: u64,
}

impl OracleReport {
    pub fn all_pass(&self) -> bool {
        self.oscillatory.pass
            && self.kernel_decay.iter().all(|k| k.pass)
            && self.interpolation.pass
            && self.equivalence.iter().all(|e| e.pass)
    }
}

/// Sweep of `2 pi - 2 F(s)` with the Bessel identity `F(s) = pi J0(2 pi s)`
/// cross-checked on a subsample.
pub fn oscillatory_sweep(s_max: f64, s_step: f64) -> OscillatoryReport {
    let mut min_value = f64::INFINITY;
    let mut s_at_min = 1.0;
    let mut cross = 0.0f64;
    let steps = ((s_max - 1.0) / s_step).round() as usize;
    for i in 0..=steps {
        let s = 1.0 + i as f64 * s_step;
        let f = oscillatory_integral(s);
        let v = 2.0 * PI - 2.0 * f;
        if v < min_value {
            min_value = v;
            s_at_min = s;
        }
        if i % 20 == 0 {
            cross = cross.max((f - PI * bessel::j0(2.0 * PI * s)).abs());
        }
    }
    OscillatoryReport {
        min_value,
        s_at_min,
        bessel_crosscheck_max_err: cross,
        pass: min_value >= 4.3 && cross <= 1e-8,
    }
}

pub fn kernel_decay_doubling(kernel_n: usize, half_width: f64) -> Result<Vec<KernelDecayPoint>> {
    let zs = [
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 2.0),
    ];
    let mut out = Vec::new();
    for z in zs {
        let g1 = GridSpec::new(kernel_n, half_width)?;
        let g2 = GridSpec::new(kernel_n * 2, half_width)?;
        let r1 = kernel_fourier_decay(z, g1.nyquist(), g1)?;
        let r2 = kernel_fourier_decay(z, g2.nyquist(), g2)?;
        let rel_change = (r2.sup_ratio - r1.sup_ratio).abs() / r1.sup_ratio;
        let l1_ok = r1.khat_zero <= r1.l1_norm * (1.0 + 1e-9)
            && r2.khat_zero <= r2.l1_norm * (1.0 + 1e-9);
        let pass = r1.sup_ratio.is_finite() && rel_change <= 0.20 && l1_ok;
        out.push(KernelDecayPoint {
            z: (z.re, z.im),
            sup_ratio_base: r1.sup_ratio,
            sup_ratio_doubled: r2.sup_ratio,
            rel_change,
            l1_bound_ok: l1_ok,
            pass,
        });
    }
    Ok(out)
}

/// Random compactly supported smooth fields through the interpolation
/// inequality; the modulus is the integrated log-power family.
pub fn interpolation_suite(trials: usize, seed: u64) -> Result<InterpolationReport> {
    let g = GridSpec::new(64, 2.0)?;
    let sigma = ModulusSpec::integrated_log_power(2.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0usize;
    for trial in 0..trials {
        let mut parts = Vec::new();
        for _ in 0..4 {
            parts.push((
                Complex64::new(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6)),
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                rng.gen_range(0.15..0.5),
            ));
        }
        let f = Field::from_fn(g, |z| {
            let cut = chi_cutoff(z.norm());
            let mut v = Complex64::default();
            for (c, amp, w) in &parts {
                v += amp * (-(z - c).norm_sqr() / (w * w)).exp();
            }
            v * cut
        });
        let b = interpolation_bound(&f, &sigma, SeminormMode::FullScan, seed ^ trial as u64)?;
        if !b.holds() {
            failures += 1;
        }
    }
    Ok(InterpolationReport { trials, failures, pass: failures == 0 })
}

/// Two-sided band of the shift-integral-to-weight ratio over a frequency
/// range, with a stability check under range extension.
pub fn equivalence_band(beta: f64, tol: f64) -> Result<EquivalenceBand> {
    let w = ThetaWeight::new(ModulusSpec::log_power(beta)?, 1e-8)?;
    let core: Vec<f64> = (0..=6).map(|i| 10.0f64 * 10.0f64.powf(i as f64 / 2.0)).collect();
    let ext: Vec<f64> = vec![10.0f64.powf(4.5), 1.0e5];
    let band = |samples: &[crate::spaces::I0Sample]| -> f64 {
        samples
            .iter()
            .map(|s| {
                let r = s.ratio;
                r.min(1.0 / r)
            })
            .fold(f64::INFINITY, f64::min)
    };
    let core_samples = i0_profile(&w, &core, tol);
    if core_samples.iter().any(|s| !s.converged) {
        return Err(crate::error::Error::Quadrature { partial: f64::NAN, error: f64::NAN });
    }
    let band_c = band(&core_samples);
    let mut all = core_samples.clone();
    all.extend(i0_profile(&w, &ext, tol));
    let extended_band_c = band(&all);
    let rel_change = (extended_band_c - band_c).abs() / band_c;
    let pass = band_c > 0.0 && band_c.is_finite() && rel_change <= 0.20;
    Ok(EquivalenceBand {
        beta,
        band_c,
        extended_band_c,
        rel_change,
        ratios: all.iter().map(|s| (s.r, s.ratio)).collect(),
        pass,
    })
}

pub fn run_appendix_oracles(cfg: &ExperimentConfig) -> Result<OracleReport> {
    let oscillatory = oscillatory_sweep(cfg.oracles.s_max, cfg.oracles.s_step);
    let kernel_decay = kernel_decay_doubling(cfg.oracles.kernel_n, cfg.grid.half_width)?;
    let interpolation = interpolation_suite(cfg.oracles.interpolation_trials, cfg.seed)?;
    let mut equivalence = Vec::new();
    for &b in &cfg.oracles.betas {
        equivalence.push(equivalence_band(b, 1e-6)?);
    }
    let generated_at_unix = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Ok(OracleReport {
        oscillatory,
        kernel_decay,
        interpolation,
        equivalence,
        config_echo: cfg.resolved_toml(),
        generated_at_unix,
    })
}
