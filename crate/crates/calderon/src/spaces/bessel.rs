//! Bessel function J0, used as an independent oracle for the oscillatory
//! integral sweep and as the angular reduction kernel in shift integrals.
//!
//! Three regimes: power series for small argument, Miller's downward
//! recurrence with normalization for moderate argument, and the Hankel
//! asymptotic expansion beyond. The regimes overlap and are cross-checked in
//! the tests.

const MILLER_LIMIT: f64 = 120.0;

/// Bessel function of the first kind, order zero.
pub fn j0(x: f64) -> f64 {
    let x = x.abs();
    if x < 1e-8 {
        return 1.0 - 0.25 * x * x;
    }
    if x <= 12.0 {
        return j0_series(x);
    }
    if x <= MILLER_LIMIT {
        return j0_miller(x);
    }
    j0_asymptotic(x)
}

/// `1 - J0(x)` without cancellation near zero: the defining series starts at
/// the quadratic term, so small arguments are handled exactly.
pub fn one_minus_j0(x: f64) -> f64 {
    let x = x.abs();
    if x >= 0.5 {
        return 1.0 - j0(x);
    }
    let q = 0.25 * x * x;
    // 1 - J0 = q - q^2/4 + q^3/36 - ...
    let mut term = q;
    let mut sum = q;
    for m in 2..40 {
        term *= -q / ((m * m) as f64);
        sum += term;
        if term.abs() < 1e-20 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn j0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..200 {
        term *= -q / ((m * m) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1.0) {
            break;
        }
    }
    sum
}

fn j0_miller(x: f64) -> f64 {
    let start = {
        let m = x as usize + 24 + (2.5 * x.sqrt()) as usize;
        m + (m & 1) // even start
    };
    let mut jp = 0.0f64;
    let mut jc = 1e-300f64;
    let mut norm = 0.0f64;
    let mut j0_val = 0.0f64;
    let mut n = start;
    while n > 0 {
        let jm = (2.0 * n as f64 / x) * jc - jp;
        jp = jc;
        jc = jm;
        n -= 1;
        if n % 2 == 0 && n > 0 {
            norm += 2.0 * jc;
        }
        if jc.abs() > 1e250 {
            jp /= 1e250;
            jc /= 1e250;
            norm /= 1e250;
        }
        if n == 0 {
            j0_val = jc;
        }
    }
    norm += j0_val;
    j0_val / norm
}

fn j0_asymptotic(x: f64) -> f64 {
    let xi = 1.0 / x;
    let xi2 = xi * xi;
    let p = 1.0 + xi2 * (-0.070_312_5 + xi2 * 0.112_152_099_609_375);
    let q = xi * (-0.125 + xi2 * (0.073_242_187_5 - xi2 * 0.227_108_001_708_984_38));
    let chi = x - std::f64::consts::FRAC_PI_4;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
