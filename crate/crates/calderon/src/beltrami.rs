//! Neumann-series and fixed-point Beltrami solvers producing complex
//! geometric optics solutions, with decay, regularity, and recovery
//! diagnostics.
//!
//! Both solvers work on the correction `psi - z` (or `phi - z`): the affine
//! part is handled analytically and never periodized, so the periodic
//! spectral operators only ever see compactly supported or periodic data.
//! Every returned solution carries the residual of its defining equation,
//! measured through the same spectral identities the solver iterates
//! (`dbar psi = q`, `d psi = 1 + T q`).

use crate::error::{Error, Result};
use crate::field::{self, Field};
use crate::grid::GridSpec;
use crate::modulus::{ModulusSpec, ThetaWeight};
use crate::spaces::{
    c_modulus_seminorm_region, SeminormMode, SeminormReport,
};
use crate::util::{fit_line, LineFit};
use num_complex::Complex64;
use serde::Serialize;

/// A Beltrami coefficient: complex samples supported in the unit disk with
/// `sup |mu| <= kappa < 1`, together with its measured modulus bound.
#[derive(Debug, Clone)]
pub struct BeltramiCoefficient {
    mu: Field,
    kappa: f64,
    gamma_norm: f64,
    alpha: f64,
    seminorm: SeminormReport,
}

impl BeltramiCoefficient {
    /// Validates support and ellipticity, and measures the modulus bound
    /// `Gamma = sup + seminorm` with respect to the log-power modulus of
    /// exponent `alpha`.
    pub fn new(mu: Field, alpha: f64, seed: u64) -> Result<Self> {
        let grid = mu.grid();
        let n = grid.n();
        let mut kappa = 0.0f64;
        for j in 0..n {
            for m in 0..n {
                let v = mu.value(j, m).norm();
                if grid.z_at(j, m).norm() >= 1.0 && v > 1e-12 {
                    return Err(Error::Domain(format!(
                        "coefficient must vanish outside the unit disk; |mu| = {v} at {}",
                        grid.z_at(j, m)
                    )));
                }
                kappa = kappa.max(v);
            }
        }
        if kappa >= 1.0 {
            return Err(Error::Domain(format!("need sup |mu| < 1, got {kappa}")));
        }
        let spec = ModulusSpec::log_power(alpha)?;
        let mode = if n <= 64 {
            SeminormMode::FullScan
        } else {
            SeminormMode::sampled_default()
        };
        let seminorm = c_modulus_seminorm_region(&mu, &spec, mode, seed, None)?;
        Ok(BeltramiCoefficient { mu, kappa, gamma_norm: kappa + seminorm.value, alpha, seminorm })
    }

    pub fn field(&self) -> &Field {
        &self.mu
    }

    pub fn grid(&self) -> GridSpec {
        self.mu.grid()
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Measured modulus-norm bound (sup plus sampled seminorm).
    pub fn gamma_norm(&self) -> f64 {
        self.gamma_norm
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn seminorm(&self) -> &SeminormReport {
        &self.seminorm
    }
}

/// Scalar leg of the conductivity-to-coefficient map.
pub fn mu_of_gamma(gamma: f64) -> f64 {
    (1.0 - gamma) / (1.0 + gamma)
}

/// Pointwise `mu = (1 - gamma)/(1 + gamma)`; rejects nonpositive or
/// non-real conductivities. The inverse map restores `gamma` to roundoff.
pub fn mu_from_gamma(gamma: &Field, alpha: f64, seed: u64) -> Result<BeltramiCoefficient> {
    for c in gamma.samples() {
        if c.im.abs() > 1e-9 {
            return Err(Error::Domain("conductivity must be real-valued".into()));
        }
        if c.re <= 0.0 {
            return Err(Error::Domain(format!("conductivity must be positive, got {}", c.re)));
        }
    }
    let mu = gamma.map(|g| Complex64::new(mu_of_gamma(g.re), 0.0));
    BeltramiCoefficient::new(mu, alpha, seed)
}

/// Inverse of [`mu_from_gamma`]: `gamma = (1 - mu)/(1 + mu)`.
pub fn gamma_from_mu(mu: &BeltramiCoefficient) -> Field {
    mu.mu.map(|m| (Complex64::new(1.0, 0.0) - m) / (Complex64::new(1.0, 0.0) + m))
}

/// Solver knobs. `kappa1` is the contraction certificate `kappa ||T||`; at
/// p = 2 the transform norm is 1, so the default is the coefficient's kappa.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub n_max: usize,
    pub tol: f64,
    pub kappa1: Option<f64>,
    pub outer_max: usize,
    pub outer_tol: f64,
    /// How many Neumann terms to keep on the solution (for the g/h split);
    /// the sum itself always runs to convergence.
    pub store_terms: usize,
    pub damping: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            n_max: 200,
            tol: 1e-10,
            kappa1: None,
            outer_max: 100,
            outer_tol: 1e-8,
            store_terms: usize::MAX,
            damping: 1.0,
        }
    }
}

impl SolverConfig {
    fn validate(&self, kappa: f64) -> Result<f64> {
        if !(self.tol > 0.0) || !(self.outer_tol > 0.0) {
            return Err(Error::Config("solver tolerances must be positive".into()));
        }
        let kappa1 = self.kappa1.unwrap_or(kappa);
        if !(kappa1 < 1.0) {
            return Err(Error::Config(format!("contraction estimate must be < 1, got {kappa1}")));
        }
        Ok(kappa1)
    }
}

/// Solution of the C-linear problem `dbar psi = a d psi`, `psi = z + O(1/z)`,
/// with `a = -(conj k / k) mu e_{-k}`.
#[derive(Debug, Clone)]
pub struct CgoLinearSolution {
    pub k: Complex64,
    /// `psi - z`, periodic.
    pub correction: Field,
    /// `dbar psi`, the summed Neumann series (compactly supported).
    pub dbar: Field,
    /// Leading series terms `(aT)^n a`, up to the configured count.
    pub series_terms: Vec<Field>,
    /// L2 norms of every computed term.
    pub term_norms: Vec<f64>,
    /// Relative L2 residual of the defining equation.
    pub residual: f64,
    /// `sup |psi - z|` over the cell.
    pub sup_deviation: f64,
    /// Largest consecutive term-norm ratio observed.
    pub max_term_ratio: f64,
}

impl CgoLinearSolution {
    /// Materialize `psi = z + correction` on the grid.
    pub fn psi(&self) -> Field {
        let corr = &self.correction;
        Field::from_fn(corr.grid(), |z| z).add(corr)
    }

    /// `d psi = 1 + T(dbar psi)`.
    pub fn d_psi(&self) -> Field {
        field::beurling_t(&self.dbar).map(|c| c + 1.0)
    }
}

fn coefficient_field(mu: &BeltramiCoefficient, k: Complex64) -> Field {
    let phase_scale = -k.conj() / k;
    let ek = field::e_k(mu.grid(), -k);
    mu.mu.mul(&ek).scale(phase_scale)
}

/// Neumann-series solution of the C-linear Beltrami problem.
///
/// Sums `(aT)^n a` until the term norm falls below `tol` times the first term
/// norm, then sets `psi = z + P[sum]`. Non-convergence within `n_max` is an
/// error carrying the achieved ratio.
pub fn solve_linear_cgo(
    mu: &BeltramiCoefficient,
    k: Complex64,
    cfg: &SolverConfig,
) -> Result<CgoLinearSolution> {
    if k == Complex64::default() {
        return Err(Error::Domain("the linear solver needs k != 0".into()));
    }
    cfg.validate(mu.kappa)?;
    let grid = mu.grid();
    let a = coefficient_field(mu, k);
    let norm0 = a.l2_norm();
    if norm0 == 0.0 {
        return Ok(CgoLinearSolution {
            k,
            correction: Field::zeros(grid),
            dbar: Field::zeros(grid),
            series_terms: Vec::new(),
            term_norms: Vec::new(),
            residual: 0.0,
            sup_deviation: 0.0,
            max_term_ratio: 0.0,
        });
    }

    let mut term_norms = vec![norm0];
    let mut series_terms = Vec::new();
    if cfg.store_terms > 0 {
        series_terms.push(a.clone());
    }
    let mut q = a.clone();
    let mut t_of_sum = Field::zeros(grid);
    let mut current = a.clone();
    let mut max_ratio = 0.0f64;
    let mut converged = false;
    for _ in 1..=cfg.n_max {
        let t_cur = field::beurling_t(&current);
        t_of_sum.add_assign(&t_cur);
        current = a.mul(&t_cur);
        let nn = current.l2_norm();
        max_ratio = max_ratio.max(nn / term_norms.last().unwrap());
        term_norms.push(nn);
        q.add_assign(&current);
        if series_terms.len() < cfg.store_terms {
            series_terms.push(current.clone());
        }
        if nn <= cfg.tol * norm0 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            detail: format!("Neumann series still above tolerance after {} terms", cfg.n_max),
            achieved: max_ratio,
        });
    }
    t_of_sum.add_assign(&field::beurling_t(&current));
    // residual field: q - a (1 + T q) = -(next term)
    let resid = q.sub(&a.zip(&t_of_sum, |av, tv| av * (tv + 1.0)));
    let residual = resid.l2_norm() / norm0;
    let correction = field::cauchy_p(&q);
    let sup_deviation = correction.sup_norm();
    Ok(CgoLinearSolution {
        k,
        correction,
        dbar: q,
        series_terms,
        term_norms,
        residual,
        sup_deviation,
        max_term_ratio: max_ratio,
    })
}

/// Split the summed series into the leading `n0` terms and the remainder.
/// The remainder carries the numerically truncated tail.
pub fn decompose_g_h(sol: &CgoLinearSolution, n0: usize) -> Result<(Field, Field)> {
    if n0 > sol.series_terms.len() {
        return Err(Error::Domain(format!(
            "split index {n0} exceeds the {} stored series terms",
            sol.series_terms.len()
        )));
    }
    let grid = sol.dbar.grid();
    let mut g = Field::zeros(grid);
    for t in &sol.series_terms[..n0] {
        g.add_assign(t);
    }
    let h = sol.dbar.sub(&g);
    Ok((g, h))
}

/// Spectral mass of a field below frequency radius `r0`.
pub fn gk_lowfreq_mass(g: &Field, r0: f64) -> f64 {
    let sf = field::to_spectral(g);
    let dxi2 = 1.0 / g.grid().cell_area();
    let mut acc = 0.0;
    for (_, _, xi, c) in sf.iter_freqs() {
        if xi < r0 {
            acc += c.norm_sqr();
        }
    }
    acc * dxi2
}

/// Solution of the nonlinear problem
/// `dbar phi = -(conj k / k) mu(z) e_{-k}(phi(z)) conj(d phi)`,
/// `phi = z + O(1/z)`.
#[derive(Debug, Clone)]
pub struct CgoPhase {
    pub k: Complex64,
    /// `phi - z`, periodic.
    pub epsilon: Field,
    /// `dbar phi` (compactly supported).
    pub dbar: Field,
    pub outer_iters: usize,
    /// Relative L2 residual of the defining equation at the final phase.
    pub residual: f64,
    /// Last sup-norm phase update.
    pub last_update: f64,
}

impl CgoPhase {
    pub fn phi(&self) -> Field {
        Field::from_fn(self.epsilon.grid(), |z| z).add(&self.epsilon)
    }

    pub fn d_phi(&self) -> Field {
        field::beurling_t(&self.dbar).map(|c| c + 1.0)
    }

    pub fn sup_deviation(&self) -> f64 {
        self.epsilon.sup_norm()
    }

    /// The associated geometric optics function `f = e^{i k phi}`.
    pub fn function(&self) -> CgoFunction {
        CgoFunction {
            k: self.k,
            correction: self.epsilon.clone(),
            dbar_correction: Some(self.dbar.clone()),
        }
    }
}

/// Frozen-phase coefficient `nu(z) = -(conj k/k) mu(z) e_{-k}(z + eps(z))`.
/// The character is evaluated pointwise at the complex argument, which keeps
/// it exactly unimodular.
fn nu_field(scaled_mu: &Field, eps: &Field, zs: &Field, k: Complex64) -> Field {
    scaled_mu.zip(&eps.add(zs), |m, w| {
        let phase = -2.0 * (k.re * w.re - k.im * w.im);
        m * Complex64::from_polar(1.0, phase)
    })
}

/// Fixed-point solution of the nonlinear Beltrami problem.
///
/// Outer iteration freezes the phase inside the character; the inner
/// iteration `q <- nu (1 + conj(T q))` contracts in L2 because `|nu| <= kappa`
/// and `T` is an isometry. The outer loop stops when both the sup-norm phase
/// update and the defining-equation residual are below `outer_tol`; if the
/// update grows, the step is damped by 1/2.
pub fn solve_nonlinear_cgo(
    mu: &BeltramiCoefficient,
    k: Complex64,
    cfg: &SolverConfig,
) -> Result<CgoPhase> {
    if k == Complex64::default() {
        return Err(Error::Domain("the nonlinear solver needs k != 0".into()));
    }
    cfg.validate(mu.kappa)?;
    let grid = mu.grid();
    if grid.half_width() < 4.0 {
        return Err(Error::Grid(format!(
            "nonlinear solve needs half width >= 4, got {}",
            grid.half_width()
        )));
    }
    let scaled_mu = mu.mu.scale(-k.conj() / k);
    if scaled_mu.l2_norm() == 0.0 {
        return Ok(CgoPhase {
            k,
            epsilon: Field::zeros(grid),
            dbar: Field::zeros(grid),
            outer_iters: 0,
            residual: 0.0,
            last_update: 0.0,
        });
    }
    let zs = Field::from_fn(grid, |z| z);
    let mut q = Field::zeros(grid);
    let mut eps = Field::zeros(grid);
    let mut damping = cfg.damping;
    let mut last_update = f64::INFINITY;
    let mut residual = f64::INFINITY;
    for outer in 1..=cfg.outer_max {
        let nu = nu_field(&scaled_mu, &eps, &zs, k);
        let nu_norm = nu.l2_norm();
        // inner contraction, warm-started from the previous dbar
        let mut qj = q.clone();
        let mut inner_ok = false;
        for _ in 0..cfg.n_max {
            let tq = field::beurling_t(&qj);
            let q_next = nu.zip(&tq, |n, t| n * (t.conj() + 1.0));
            let delta = q_next.sub(&qj).l2_norm();
            qj = q_next;
            if delta <= cfg.tol * nu_norm {
                inner_ok = true;
                break;
            }
        }
        if !inner_ok {
            return Err(Error::NonConvergence {
                detail: format!("inner contraction stalled at outer step {outer}"),
                achieved: cfg.tol,
            });
        }
        // damped acceptance; eps = P[q] stays consistent because P is linear
        if damping < 1.0 {
            q = q.zip(&qj, |old, new| old + damping * (new - old));
        } else {
            q = qj;
        }
        let eps_new = field::cauchy_p(&q);
        let update = eps_new.sub(&eps).sup_norm();
        if update > last_update && damping == 1.0 {
            damping = 0.5;
        }
        eps = eps_new;
        last_update = update;
        // defining-equation residual at the updated phase
        let nu_final = nu_field(&scaled_mu, &eps, &zs, k);
        let tq = field::beurling_t(&q);
        let resid = q.sub(&nu_final.zip(&tq, |n, t| n * (t.conj() + 1.0)));
        residual = resid.l2_norm() / nu_final.l2_norm();
        if update <= cfg.outer_tol && residual <= cfg.outer_tol {
            return Ok(CgoPhase { k, epsilon: eps, dbar: q, outer_iters: outer, residual, last_update: update });
        }
    }
    Err(Error::NonConvergence {
        detail: format!("outer iteration still above tolerance after {} steps", cfg.outer_max),
        achieved: residual.min(last_update),
    })
}

/// A geometric optics function `f = e^{i k (z + correction)}` in structured
/// form: the analytic factor is kept symbolic, the periodic correction as a
/// field. Derivatives come from the chain rule on the analytic part and
/// spectral derivatives of the correction, which is the only
/// grid-differentiable representation (the raw samples grow like
/// `e^{|k| |Im z|}` and are not periodic).
#[derive(Debug, Clone)]
pub struct CgoFunction {
    pub k: Complex64,
    pub correction: Field,
    /// `dbar` of the correction when produced by a solver (exact there);
    /// falls back to the spectral derivative otherwise.
    pub dbar_correction: Option<Field>,
}

impl CgoFunction {
    pub fn plane_wave(grid: GridSpec, k: Complex64) -> Self {
        CgoFunction { k, correction: Field::zeros(grid), dbar_correction: None }
    }

    pub fn grid(&self) -> GridSpec {
        self.correction.grid()
    }

    /// Pointwise samples of `e^{i k phi}`.
    pub fn samples(&self) -> Field {
        let k = self.k;
        let corr = &self.correction;
        Field::from_fn(corr.grid(), |z| z)
            .zip(corr, move |z, e| (Complex64::new(0.0, 1.0) * k * (z + e)).exp())
    }

    /// `(d f, dbar f)` via `d f = i k f (1 + d eps)`, `dbar f = i k f dbar eps`.
    pub fn derivatives(&self) -> (Field, Field) {
        let (d_eps, dbar_eps) = match &self.dbar_correction {
            Some(q) => (field::beurling_t(q), q.clone()),
            None => (field::d(&self.correction), field::d_bar(&self.correction)),
        };
        let f = self.samples();
        let ik = Complex64::new(0.0, 1.0) * self.k;
        let df = f.zip(&d_eps, |fv, dv| ik * fv * (dv + 1.0));
        let dbarf = f.zip(&dbar_eps, |fv, dv| ik * fv * dv);
        (df, dbarf)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolverKind {
    Linear,
    Nonlinear,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayPoint {
    pub abs_k: f64,
    pub theta_at_k: f64,
    pub sup_deviation: Option<f64>,
    pub residual: Option<f64>,
    pub error: Option<String>,
}

/// Decay sweep of `sup |solution - z|` over a frequency list, with
/// least-squares fits of `log sup` against `log theta(|k|)` (the slope gives
/// the decay exponent `a`) and against `log |k|` (plain power-law model).
#[derive(Debug, Clone, Serialize)]
pub struct DecayProfile {
    pub kind: SolverKind,
    pub points: Vec<DecayPoint>,
    /// Fit against the weight: slope is `-a`.
    pub theta_fit: Option<LineFit>,
    /// Fit against `|k|`.
    pub power_fit: Option<LineFit>,
}

impl DecayProfile {
    pub fn fitted_exponent(&self) -> Option<f64> {
        self.theta_fit.map(|f| -f.slope)
    }
}

pub fn cgo_decay_profile(
    mu: &BeltramiCoefficient,
    ks: &[Complex64],
    kind: SolverKind,
    cfg: &SolverConfig,
    theta: &ThetaWeight,
) -> DecayProfile {
    let mut slim = *cfg;
    slim.store_terms = 0;
    let mut points = Vec::with_capacity(ks.len());
    for &k in ks {
        let res: Result<(f64, f64)> = match kind {
            SolverKind::Linear => {
                solve_linear_cgo(mu, k, &slim).map(|s| (s.sup_deviation, s.residual))
            }
            SolverKind::Nonlinear => {
                solve_nonlinear_cgo(mu, k, &slim).map(|s| (s.sup_deviation(), s.residual))
            }
        };
        let abs_k = k.norm();
        let theta_at_k = theta.eval(abs_k);
        match res {
            Ok((dev, resid)) => points.push(DecayPoint {
                abs_k,
                theta_at_k,
                sup_deviation: Some(dev),
                residual: Some(resid),
                error: None,
            }),
            Err(e) => points.push(DecayPoint {
                abs_k,
                theta_at_k,
                sup_deviation: None,
                residual: None,
                error: Some(e.to_string()),
            }),
        }
    }
    let usable: Vec<(&DecayPoint, f64)> = points
        .iter()
        .filter_map(|p| p.sup_deviation.filter(|d| *d > 0.0).map(|d| (p, d)))
        .collect();
    let (theta_fit, power_fit) = if usable.len() >= 2 {
        let ys: Vec<f64> = usable.iter().map(|(_, d)| d.ln()).collect();
        let xt: Vec<f64> = usable.iter().map(|(p, _)| p.theta_at_k.ln()).collect();
        let xp: Vec<f64> = usable.iter().map(|(p, _)| p.abs_k.ln()).collect();
        (fit_line(&xt, &ys), fit_line(&xp, &ys))
    } else {
        (None, None)
    };
    DecayProfile { kind, points, theta_fit, power_fit }
}

/// Regularity diagnostics of a geometric optics function on the unit disk:
/// the sampled first-derivative modulus norm and the Jacobian lower bound.
#[derive(Debug, Clone, Serialize)]
pub struct RegularityReport {
    pub c1sigma_norm: f64,
    pub jacobian_min: f64,
    pub sup_f: f64,
}

pub fn cgo_regularity_check(
    phase: &CgoPhase,
    sigma: &ModulusSpec,
    seed: u64,
) -> Result<RegularityReport> {
    let f = phase.function();
    let grid = f.grid();
    let samples = f.samples();
    let (df, dbf) = f.derivatives();
    let mode = if grid.n() <= 64 {
        SeminormMode::FullScan
    } else {
        SeminormMode::sampled_default()
    };
    let semi_d = c_modulus_seminorm_region(&df, sigma, mode, seed, Some(1.0))?.value;
    let semi_db = c_modulus_seminorm_region(&dbf, sigma, mode, seed ^ 0x9e37, Some(1.0))?.value;
    let sup_f = samples.sup_norm_in_disk(1.0);
    let c1sigma_norm = sup_f
        + df.sup_norm_in_disk(1.0)
        + semi_d
        + dbf.sup_norm_in_disk(1.0)
        + semi_db;
    let n = grid.n();
    let mut jmin = f64::INFINITY;
    for j in 0..n {
        for m in 0..n {
            if grid.z_at(j, m).norm() <= 1.0 {
                let a = df.value(j, m).norm_sqr();
                let b = dbf.value(j, m).norm_sqr();
                jmin = jmin.min(a - b);
            }
        }
    }
    Ok(RegularityReport { c1sigma_norm, jacobian_min: jmin, sup_f })
}

/// Coefficient recovered from a geometric optics function by the quotient
/// `mu = dbar f / conj(d f)`, suppressed (and masked) where `|d f|` falls
/// below the floor.
#[derive(Debug, Clone)]
pub struct MuRecovery {
    pub field: Field,
    /// `true` marks suppressed samples.
    pub mask: Vec<bool>,
}

pub fn recover_mu(f: &CgoFunction, floor: f64) -> MuRecovery {
    let (df, dbf) = f.derivatives();
    let mut mask = vec![false; f.grid().len()];
    let mut out = Vec::with_capacity(f.grid().len());
    for (i, (d, db)) in df.samples().iter().zip(dbf.samples()).enumerate() {
        if d.norm() >= floor {
            out.push(db / d.conj());
        } else {
            mask[i] = true;
            out.push(Complex64::default());
        }
    }
    MuRecovery { field: Field::from_samples(f.grid(), out).expect("finite quotient"), mask }
}
