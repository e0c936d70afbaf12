//! Moduli of continuity and the derived spectral weights.
//!
//! Three parametric families are supported: the log-power modulus
//! `r -> |log r|^(-alpha)`, its integrated variant
//! `r -> |log r|^(1-alpha) / (alpha - 1)`, and the Hoelder modulus `r -> r^g`.
//! All are capped: constant for `r >= 1/2` and zero at `r = 0`.
//!
//! From a modulus `omega` we build the increasing Fourier weight
//!
//! ```text
//! theta(r) = integral_1^r ds / (s * omega(s/r)^2)   for r > 1,  0 otherwise,
//! ```
//!
//! which defines the weighted space used throughout the crate, and the
//! square-Dini constant that controls membership of capped-log-power
//! functions in that space.

use crate::error::{Error, Result};
use crate::quad::{integrate_with_breaks, QuadResult};
use serde::{Deserialize, Serialize};

pub const CAP_RADIUS: f64 = 0.5;
const LN2: f64 = std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModulusKind {
    /// `|log r|^(-exponent)`
    LogPower,
    /// `|log r|^(1-exponent) / (exponent-1)`, the primitive of the log-power
    /// modulus divided by `r`.
    IntegratedLogPower,
    /// `r^exponent` with `exponent` in (0, 1).
    Holder,
}

/// A parameterized modulus of continuity, capped at [`CAP_RADIUS`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ModulusSpec {
    pub kind: ModulusKind,
    pub exponent: f64,
    pub cap_radius: f64,
    pub cap_value: f64,
}

impl ModulusSpec {
    pub fn log_power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Domain(format!("log-power exponent must be positive, got {alpha}")));
        }
        Ok(Self::with_kind(ModulusKind::LogPower, alpha))
    }

    pub fn integrated_log_power(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0) || !alpha.is_finite() {
            return Err(Error::Domain(format!(
                "integrated log-power needs exponent > 1, got {alpha}"
            )));
        }
        Ok(Self::with_kind(ModulusKind::IntegratedLogPower, alpha))
    }

    pub fn holder(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::Domain(format!("Hoelder exponent must be in (0,1), got {gamma}")));
        }
        Ok(Self::with_kind(ModulusKind::Holder, gamma))
    }

    fn with_kind(kind: ModulusKind, exponent: f64) -> Self {
        let mut spec =
            ModulusSpec { kind, exponent, cap_radius: CAP_RADIUS, cap_value: 0.0 };
        spec.cap_value = spec.branch_value(CAP_RADIUS);
        spec
    }

    /// Value of the defining branch, ignoring the cap. Only valid on
    /// `(0, cap_radius]`.
    fn branch_value(&self, r: f64) -> f64 {
        let l = -r.ln(); // positive on (0, 1)
        match self.kind {
            ModulusKind::LogPower => l.powf(-self.exponent),
            ModulusKind::IntegratedLogPower => l.powf(1.0 - self.exponent) / (self.exponent - 1.0),
            ModulusKind::Holder => r.powf(self.exponent),
        }
    }

    /// Total evaluation: 0 at 0, the defining branch on `(0, cap_radius]`,
    /// constant beyond.
    pub fn eval(&self, r: f64) -> f64 {
        if r <= 0.0 {
            0.0
        } else if r >= self.cap_radius {
            self.cap_value
        } else {
            self.branch_value(r)
        }
    }

    /// Two-branch extension used as the denominator weight in shift integrals:
    /// the modulus itself below 1, its reciprocal reflection above.
    /// At `r = 1` the lower branch wins (the two branches disagree there; a
    /// single point is immaterial in the integrals that consume this).
    pub fn eval_tilde(&self, r: f64) -> f64 {
        debug_assert!(r > 0.0);
        if r <= 1.0 {
            self.eval(r)
        } else {
            1.0 / self.eval(1.0 / r)
        }
    }
}

pub fn eval_modulus(spec: &ModulusSpec, r: f64) -> f64 {
    spec.eval(r)
}

pub fn eval_tilde_omega(spec: &ModulusSpec, r: f64) -> f64 {
    spec.eval_tilde(r)
}

// ---------------------------------------------------------------------------
// Theta weight
// ---------------------------------------------------------------------------

/// Upper end of the cached table in `u = log r`.
const TABLE_U_MAX: f64 = 30.0;
const TABLE_NODES: usize = 2048;

/// The increasing spectral weight built from a modulus of continuity.
///
/// In the substituted variable `u = log r` the weight is the primitive of the
/// smooth positive integrand `g(v) = omega(e^-v)^(-2)`, so a table of anchor
/// values is precomputed once (incremental quadrature, each piece to the
/// configured relative tolerance) and every evaluation integrates only the
/// short gap down to the nearest anchor. The table is immutable after
/// construction, so concurrent reads are safe, and the full relative-accuracy
/// contract of the quadrature is preserved: accumulated anchor error is a
/// one-directional sum bounded by `tol * theta(r)` itself.
#[derive(Debug, Clone)]
pub struct ThetaWeight {
    base: ModulusSpec,
    quadrature_tolerance: f64,
    use_asymptote: bool,
    anchor_u: Vec<f64>,
    anchor_theta: Vec<f64>,
}

impl ThetaWeight {
    pub fn new(base: ModulusSpec, quadrature_tolerance: f64) -> Result<Self> {
        Self::with_options(base, quadrature_tolerance, false)
    }

    pub fn with_options(
        base: ModulusSpec,
        quadrature_tolerance: f64,
        use_asymptote: bool,
    ) -> Result<Self> {
        if !(quadrature_tolerance > 0.0) {
            return Err(Error::Domain("quadrature tolerance must be positive".into()));
        }
        let mut w = ThetaWeight {
            base,
            quadrature_tolerance,
            use_asymptote,
            anchor_u: Vec::new(),
            anchor_theta: Vec::new(),
        };
        w.build_table()?;
        Ok(w)
    }

    pub fn base_modulus(&self) -> &ModulusSpec {
        &self.base
    }

    /// Integrand of the weight in the variable `v = log(r/s)`.
    fn g(&self, v: f64) -> f64 {
        let w = self.base.eval((-v).exp());
        1.0 / (w * w)
    }

    fn build_table(&mut self) -> Result<()> {
        let mut us = Vec::with_capacity(TABLE_NODES + 2);
        for i in 0..=TABLE_NODES {
            us.push(TABLE_U_MAX * i as f64 / TABLE_NODES as f64);
        }
        // the integrand has a kink where the modulus cap engages
        us.push(LN2);
        us.sort_by(|a, b| a.partial_cmp(b).unwrap());
        us.dedup();
        let mut theta = Vec::with_capacity(us.len());
        theta.push(0.0);
        let mut acc = 0.0;
        for i in 1..us.len() {
            let piece = integrate_with_breaks(
                |v| self.g(v),
                us[i - 1],
                us[i],
                &[LN2],
                self.quadrature_tolerance,
            );
            piece.into_result()?;
            acc += piece.value;
            theta.push(acc);
        }
        self.anchor_u = us;
        self.anchor_theta = theta;
        Ok(())
    }

    /// Weight value; 0 for `r <= 1`. Beyond the table range, falls back to the
    /// closed-form asymptote (when enabled) or extends the integral directly.
    pub fn eval(&self, r: f64) -> f64 {
        if r <= 1.0 {
            return 0.0;
        }
        let u = r.ln();
        if u > TABLE_U_MAX {
            if self.use_asymptote {
                if let Some(a) = self.asymptote(r) {
                    return a;
                }
            }
            let base = *self.anchor_theta.last().unwrap();
            let ext =
                integrate_with_breaks(|v| self.g(v), TABLE_U_MAX, u, &[], self.quadrature_tolerance);
            return base + ext.value;
        }
        // nearest anchor at or below u, then the short remaining increment
        let idx = match self.anchor_u.binary_search_by(|a| a.partial_cmp(&u).unwrap()) {
            Ok(i) => return self.anchor_theta[i],
            Err(0) => return 0.0,
            Err(i) => i - 1,
        };
        let gap = integrate_with_breaks(
            |v| self.g(v),
            self.anchor_u[idx],
            u,
            &[LN2],
            self.quadrature_tolerance,
        );
        self.anchor_theta[idx] + gap.value
    }

    /// Direct adaptive quadrature of the defining integral, bypassing the
    /// table. Used as the checked evaluation path.
    pub fn eval_quadrature(&self, r: f64) -> Result<f64> {
        if r <= 1.0 {
            return Ok(0.0);
        }
        let q: QuadResult =
            integrate_with_breaks(|v| self.g(v), 0.0, r.ln(), &[LN2], self.quadrature_tolerance);
        q.into_result()
    }

    /// Large-`r` closed-form equivalent, when one exists for the base kind:
    /// `|log r|^(2b+1) / (2b+1)` for the log-power modulus with exponent `b`,
    /// `r^(2g) / (2g)` for the Hoelder modulus with exponent `g`.
    pub fn asymptote(&self, r: f64) -> Option<f64> {
        if r <= 1.0 {
            return Some(0.0);
        }
        let u = r.ln();
        match self.base.kind {
            ModulusKind::LogPower => {
                let p = 2.0 * self.base.exponent + 1.0;
                Some(u.powf(p) / p)
            }
            ModulusKind::Holder => {
                let g = 2.0 * self.base.exponent;
                Some((g * u).exp() / g)
            }
            ModulusKind::IntegratedLogPower => None,
        }
    }
}

/// Checked evaluation of the weight: surfaces quadrature failure as an error
/// carrying the partial value.
pub fn eval_theta(weight: &ThetaWeight, r: f64) -> Result<f64> {
    if r < 0.0 {
        return Err(Error::Domain(format!("theta weight argument must be nonnegative, got {r}")));
    }
    if r <= 1.0 {
        return Ok(0.0);
    }
    if r.ln() <= TABLE_U_MAX {
        Ok(weight.eval(r))
    } else {
        weight.eval_quadrature(r)
    }
}

// ---------------------------------------------------------------------------
// Square-Dini constant
// ---------------------------------------------------------------------------

/// The constant `int_0^inf varpi(r)^2 / (r * tilde-omega(r)^2) dr` for the
/// log-power pair with exponents `alpha` (numerator) and `beta` (denominator).
///
/// Finite exactly when `1 < beta < alpha - 1/2`; arguments outside that range
/// are rejected. The integral is split at the cap radii and the exact
/// power-law tails (where both moduli are pure powers of `|log r|`) are added
/// in closed form.
pub fn square_dini_constant(alpha: f64, beta: f64) -> Result<f64> {
    if !(alpha > 1.5) || !alpha.is_finite() {
        return Err(Error::Domain(format!("square-Dini constant needs alpha > 3/2, got {alpha}")));
    }
    if !(beta > 1.0 && beta < alpha - 0.5) {
        return Err(Error::Domain(format!(
            "square-Dini constant needs 1 < beta < alpha - 1/2, got beta = {beta}, alpha = {alpha}"
        )));
    }
    let varpi = ModulusSpec::log_power(alpha)?;
    let omega = ModulusSpec::log_power(beta)?;
    let tol = 1e-10;
    let cut = 50.0;

    // r in (0, 1/2], substituted v = -log r in [log 2, inf).
    let f_low = |v: f64| {
        let r = (-v).exp();
        let p = varpi.eval(r);
        let w = omega.eval_tilde(r);
        (p * p) / (w * w)
    };
    let low = integrate_with_breaks(&f_low, LN2, cut, &[], tol).into_result()?;
    // Beyond the cut both moduli are exact log powers: integrand v^(-2(a-b)).
    let p_low = 2.0 * (alpha - beta);
    let low_tail = cut.powf(1.0 - p_low) / (p_low - 1.0);

    // r in [1/2, 2]: the extension jumps at r = 1 (left branch omega, right
    // branch 1/omega(1/r)), so the two sides integrate separately with their
    // own branch formulas.
    let f_mid_low = |r: f64| {
        let p = varpi.eval(r);
        let w = omega.eval(r);
        (p * p) / (r * w * w)
    };
    let f_mid_high = |r: f64| {
        let p = varpi.eval(r);
        let w = omega.eval(1.0 / r);
        (p * p) * (w * w) / r
    };
    let mid = integrate_with_breaks(&f_mid_low, 0.5, 1.0, &[], tol).into_result()?
        + integrate_with_breaks(&f_mid_high, 1.0, 2.0, &[], tol).into_result()?;

    // r in [2, inf), substituted v = log r.
    let f_high = |v: f64| {
        let r = v.exp();
        let p = varpi.eval(r);
        let w = omega.eval_tilde(r);
        (p * p) / (w * w)
    };
    let high = integrate_with_breaks(&f_high, LN2, cut, &[], tol).into_result()?;
    let p_high = 2.0 * beta;
    let cap2 = varpi.eval(CAP_RADIUS);
    let high_tail = cap2 * cap2 * cut.powf(1.0 - p_high) / (p_high - 1.0);

    let total = low + low_tail + mid + high + high_tail;
    if !total.is_finite() {
        return Err(Error::Quadrature { partial: total, error: f64::INFINITY });
    }
    Ok(total)
}
