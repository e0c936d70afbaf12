//! Stability experiment: boundary-data distance versus conductivity distance
//! across an amplitude family, with the fitted stability-function envelope
//! and the interpolation bound applied to the difference of the geometric
//! optics functions.

use super::config::ExperimentConfig;
use super::generate::{make_conductivity, mu_pair};
use super::io::{fmt, CsvTable};
use crate::beltrami::solve_nonlinear_cgo;
use crate::error::Result;
use crate::field::Field;
use crate::forward::{cgo_to_u, dtn_assemble, dtn_opnorm_diff, Conductivity, DtnMatrix, PolarMesh};
use crate::modulus::{ModulusSpec, ThetaWeight};
use crate::spaces::{interpolation_bound, SeminormMode};
use crate::util::chi_cutoff;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::path::Path;

#[derive(Debug, Clone, Serialize)]
pub struct StabilityRecord {
    pub t: f64,
    /// weighted operator norm of the boundary-map difference
    pub rho: f64,
    pub sup_gamma_diff: f64,
    /// sup over the unit disk of the conductivity-solution difference at the
    /// probe frequency
    pub sup_u_diff: f64,
    /// interpolation inequality applied to the cut difference of the
    /// geometric optics functions: worst component (lhs, rhs)
    pub interp_lhs: f64,
    pub interp_rhs: f64,
    pub residual_plus: f64,
    pub residual_minus: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityFit {
    /// scanned inner scaling constant
    pub c2: f64,
    /// dominating prefactor (smallest making the curve an upper envelope)
    pub c1: f64,
    pub a: f64,
    pub r_squared: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilitySummary {
    pub records: Vec<StabilityRecord>,
    /// fit of sup_gamma_diff against the weight model (the main stability
    /// shape)
    pub gamma_fit: Option<StabilityFit>,
    /// fit of sup_u_diff against the same model
    pub u_fit: Option<StabilityFit>,
    pub rho_monotone: bool,
    pub gamma_monotone: bool,
    /// all points sit under the fitted envelope with a positive exponent;
    /// absent when the fit is degenerate (fewer than 4 usable points), in
    /// which case domination is reported but not asserted
    pub dominated: Option<bool>,
    pub interpolation_ok: bool,
    pub failed_rows: usize,
}

impl StabilitySummary {
    pub fn all_pass(&self) -> bool {
        self.rho_monotone
            && self.gamma_monotone
            && self.dominated != Some(false)
            && self.interpolation_ok
            && self.failed_rows == 0
    }
}

/// Least squares of `log y` against `log theta(|log rho| / c2)` over a small
/// grid of `c2`, picking the best fit quality; the prefactor is then raised
/// to the smallest value dominating every point.
pub fn fit_stability_model(
    points: &[(f64, f64)], // (rho, y)
    theta: &ThetaWeight,
) -> Option<StabilityFit> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|(rho, y)| *rho > 0.0 && *rho < 0.5 && *y > 0.0)
        .collect();
    if usable.len() < 4 {
        return None;
    }
    let mut best: Option<StabilityFit> = None;
    for c2 in [0.5, 1.0, 2.0, 4.0, 8.0] {
        let xs: Vec<f64> = usable
            .iter()
            .map(|(rho, _)| theta.eval(rho.ln().abs() / c2).max(1e-300).ln())
            .collect();
        let ys: Vec<f64> = usable.iter().map(|(_, y)| y.ln()).collect();
        let Some(fit) = crate::util::fit_line(&xs, &ys) else { continue };
        let a = -fit.slope;
        // smallest dominating prefactor for this slope
        let ln_c1 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| y + a * x)
            .fold(f64::NEG_INFINITY, f64::max);
        let cand = StabilityFit {
            c2,
            c1: ln_c1.exp(),
            a,
            r_squared: fit.r_squared,
            points: usable.len(),
        };
        if best.as_ref().map_or(true, |b| cand.r_squared > b.r_squared) {
            best = Some(cand);
        }
    }
    best
}

fn assemble(c: &Conductivity, cfg: &ExperimentConfig) -> Result<DtnMatrix> {
    dtn_assemble(c, cfg.dtn.n_b, PolarMesh::new(cfg.dtn.mesh_r, cfg.dtn.mesh_theta))
}

pub fn run_stability_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<StabilitySummary> {
    let grid = cfg.grid_spec()?;
    let spec = cfg.modulus_spec()?;
    let theta = cfg.theta_weight()?;
    let solver = cfg.solver_config();
    let k = Complex64::new(cfg.sweep.probe_k, 0.0);
    let radii = (cfg.family.r_in, cfg.family.r_out);
    let sigma = ModulusSpec::integrated_log_power(cfg.family.exponent.max(1.6))?;

    let reference = make_conductivity(
        &spec,
        cfg.family.reference_amplitude,
        cfg.center(),
        radii,
        grid,
        cfg.seed,
    )?;
    let dtn_ref = assemble(&reference, cfg)?;
    let (mu_ref_p, mu_ref_m) = mu_pair(&reference, cfg.seed)?;
    let f_ref_p = solve_nonlinear_cgo(&mu_ref_p, k, &solver)?.function();
    let f_ref_m = solve_nonlinear_cgo(&mu_ref_m, k, &solver)?.function();
    let u_ref = cgo_to_u(&f_ref_p, &f_ref_m)?;

    // identical pair anchors the table, then the amplitude family
    let mut amplitudes = vec![cfg.family.reference_amplitude];
    amplitudes.extend(cfg.family.amplitudes.iter().copied());

    let mut records: Vec<StabilityRecord> = amplitudes
        .par_iter()
        .map(|&t| {
            let run = || -> Result<StabilityRecord> {
                let cond = make_conductivity(&spec, t, cfg.center(), radii, grid, cfg.seed)?;
                let dtn_t = assemble(&cond, cfg)?;
                let rho = dtn_opnorm_diff(&dtn_ref, &dtn_t)?;
                let sup_gamma_diff = cond.sup_diff(&reference);
                let (mu_p, mu_m) = mu_pair(&cond, cfg.seed)?;
                let phase_p = solve_nonlinear_cgo(&mu_p, k, &solver)?;
                let phase_m = solve_nonlinear_cgo(&mu_m, k, &solver)?;
                let (rp, rm) = (phase_p.residual, phase_m.residual);
                let f_p = phase_p.function();
                let f_m = phase_m.function();
                let u_t = cgo_to_u(&f_p, &f_m)?;
                let sup_u_diff = u_t.sub(&u_ref).sup_norm_in_disk(1.0);
                // interpolation bound on the cut difference of the functions
                let diff = f_p.samples().sub(&f_ref_p.samples());
                let cut = Field::from_fn(grid, |z| {
                    Complex64::new(chi_cutoff(z.norm()), 0.0)
                });
                let cut_diff = diff.mul(&cut);
                let interp = interpolation_bound(
                    &cut_diff,
                    &sigma,
                    SeminormMode::sampled_default(),
                    cfg.seed,
                )?;
                let (mut lhs, mut rhs) = (0.0f64, 0.0f64);
                for comp in &interp.components {
                    if comp.lhs >= lhs {
                        lhs = comp.lhs;
                        rhs = comp.rhs;
                    }
                }
                Ok(StabilityRecord {
                    t,
                    rho,
                    sup_gamma_diff,
                    sup_u_diff,
                    interp_lhs: lhs,
                    interp_rhs: rhs,
                    residual_plus: rp,
                    residual_minus: rm,
                    error: None,
                })
            };
            run().unwrap_or_else(|e| StabilityRecord {
                t,
                rho: f64::NAN,
                sup_gamma_diff: f64::NAN,
                sup_u_diff: f64::NAN,
                interp_lhs: f64::NAN,
                interp_rhs: f64::NAN,
                residual_plus: f64::NAN,
                residual_minus: f64::NAN,
                error: Some(e.to_string()),
            })
        })
        .collect();
    records.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap());

    // monotonicity of both distances in the amplitude (over the family rows)
    let family: Vec<&StabilityRecord> = records
        .iter()
        .filter(|r| r.error.is_none() && r.t != cfg.family.reference_amplitude)
        .collect();
    let rho_monotone = family.windows(2).all(|w| w[0].rho <= w[1].rho * (1.0 + 1e-9));
    let gamma_monotone = family
        .windows(2)
        .all(|w| w[0].sup_gamma_diff <= w[1].sup_gamma_diff * (1.0 + 1e-9));

    let gamma_fit = fit_stability_model(
        &family.iter().map(|r| (r.rho, r.sup_gamma_diff)).collect::<Vec<_>>(),
        &theta,
    );
    let u_fit = fit_stability_model(
        &family.iter().map(|r| (r.rho, r.sup_u_diff)).collect::<Vec<_>>(),
        &theta,
    );
    // domination: positive exponent and every point under the envelope
    let dominated = gamma_fit.as_ref().map(|fit| {
        fit.a > 0.0
            && family.iter().all(|r| {
                let v =
                    fit.c1 * theta.eval(r.rho.ln().abs() / fit.c2).max(1e-300).powf(-fit.a);
                r.sup_gamma_diff <= v * (1.0 + 1e-9)
            })
    });
    let interpolation_ok = records
        .iter()
        .filter(|r| r.error.is_none())
        .all(|r| r.interp_lhs <= r.interp_rhs * (1.0 + 1e-9) + 1e-300);
    let failed_rows = records.iter().filter(|r| r.error.is_some()).count();

    // persistence
    let echo = cfg.resolved_toml();
    let mut table = CsvTable::create(
        out_dir,
        "stability",
        &[
            ("t", "family amplitude"),
            ("rho", "weighted operator norm of the boundary-map difference"),
            ("sup_gamma_diff", "sup |gamma_ref - gamma_t|"),
            ("sup_u_diff", "sup over the unit disk of |u_ref - u_t| at the probe k"),
            ("interp_lhs", "measured sup of the worst derivative component"),
            ("interp_rhs", "interpolation bound for that component"),
            ("residual_plus", "nonlinear solver residual for +mu"),
            ("residual_minus", "nonlinear solver residual for -mu"),
            ("error", "per-row failure, empty when the row succeeded"),
        ],
        &echo,
    )?;
    for r in &records {
        table.row(&[
            fmt(r.t),
            fmt(r.rho),
            fmt(r.sup_gamma_diff),
            fmt(r.sup_u_diff),
            fmt(r.interp_lhs),
            fmt(r.interp_rhs),
            fmt(r.residual_plus),
            fmt(r.residual_minus),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    table.finish()?;

    let mut fit_table = CsvTable::create(
        out_dir,
        "stability_fits",
        &[
            ("target", "gamma or u"),
            ("c1", "dominating prefactor"),
            ("c2", "inner scaling constant"),
            ("a", "fitted exponent"),
            ("r_squared", "fit quality"),
            ("points", "usable points"),
        ],
        &echo,
    )?;
    for (name, fit) in [("gamma", &gamma_fit), ("u", &u_fit)] {
        if let Some(f) = fit {
            fit_table.row(&[
                name.to_string(),
                fmt(f.c1),
                fmt(f.c2),
                fmt(f.a),
                fmt(f.r_squared),
                f.points.to_string(),
            ])?;
        }
    }
    fit_table.finish()?;

    Ok(StabilitySummary {
        records,
        gamma_fit,
        u_fit,
        rho_monotone,
        gamma_monotone,
        dominated,
        interpolation_ok,
        failed_rows,
    })
}
