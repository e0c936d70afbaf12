//! Weighted spectral norms and shift moduli of a generated conductivity:
//! membership of the cusp profile in the weighted space, tail bounds, and
//! the exact-shift modulus.

use calderon::harness::make_dini_conductivity;
use calderon::modulus::{square_dini_constant, ModulusSpec, ThetaWeight};
use calderon::spaces::{l2_modulus, spectral_tail, w_theta_norm};
use calderon::GridSpec;
use num_complex::Complex64;

fn main() -> calderon::Result<()> {
    let grid = GridSpec::new(256, 4.0)?;
    let c = make_dini_conductivity(2.0, 0.4, Complex64::default(), (0.1, 0.5), grid, 7)?;
    let mu = c.gamma().map(|g| (1.0 - g) / (1.0 + g));
    let theta = ThetaWeight::new(ModulusSpec::log_power(1.2)?, 1e-8)?;

    let l2 = mu.l2_norm();
    let wn = w_theta_norm(&mu, &theta);
    println!("coefficient norms: L2 = {l2:.6}, weighted = {wn:.6}");
    let c_ab = square_dini_constant(2.0, 1.2)?;
    let semi = c.seminorm().unwrap().value / 2.0; // coefficient scale
    println!(
        "membership budget (square-Dini constant x seminorm^2): {:.6}",
        c_ab * semi * semi
    );

    for (r0, nu) in [(2.0, 0.0), (4.0, 0.5)] {
        let tail = spectral_tail(&mu, &theta, r0, nu)?;
        let bound = wn * wn / theta.eval(r0).powf(1.0 - nu);
        println!("tail past {r0} at exponent {nu}: {tail:.3e} <= {bound:.3e}");
    }

    let h = grid.spacing();
    let varpi = ModulusSpec::log_power(2.0)?;
    println!("shift modulus against the generating modulus:");
    for steps in [1i64, 4, 16, 64] {
        let y = Complex64::new(steps as f64 * h, 0.0);
        let m2 = l2_modulus(&mu, y)?;
        println!(
            "  |y| = {:>7.4}: M2 = {:.5e}, varpi(|y|) = {:.5e}",
            y.norm(),
            m2,
            varpi.eval(y.norm())
        );
    }
    Ok(())
}
