//! Small shared helpers: smooth cutoffs and least-squares fitting.

/// C-infinity step: 0 for `t <= 0`, 1 for `t >= 1`, strictly increasing between.
///
/// Built from the standard bump quotient `b(t) / (b(t) + b(1-t))` with
/// `b(t) = exp(-1/t)`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let b = (-1.0 / t).exp();
    let b1 = (-1.0 / (1.0 - t)).exp();
    b / (b + b1)
}

/// Smooth radial cutoff equal to 1 on `[0, 1]` and 0 on `[3/2, inf)`.
pub fn chi_cutoff(r: f64) -> f64 {
    smooth_step((1.5 - r) / 0.5)
}

/// Smooth taper equal to 1 for `s <= r_in` and 0 for `s >= r_out`.
pub fn taper(s: f64, r_in: f64, r_out: f64) -> f64 {
    debug_assert!(r_in < r_out);
    smooth_step((r_out - s) / (r_out - r_in))
}

/// Least-squares line fit `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; 1 means a perfect linear relation.
    pub r_squared: f64,
    pub points: usize,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = xs[..n].iter().sum::<f64>() / nf;
    let my = ys[..n].iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = xs[i] - mx;
        let dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Some(LineFit { slope, intercept, r_squared, points: n })
}
