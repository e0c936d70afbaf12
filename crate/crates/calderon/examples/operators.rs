//! The spectral operator contracts: derivative intertwining, isometry, and
//! inversion up to the mean, demonstrated on periodized Gaussians.

use calderon::field::{beurling_t, cauchy_p, d, d_bar, e_k, Field};
use calderon::GridSpec;
use num_complex::Complex64;

fn main() -> calderon::Result<()> {
    let grid = GridSpec::new(256, 4.0)?;
    let u = Field::from_fn(grid, |z| Complex64::new((-z.norm_sqr()).exp(), 0.0));

    let t_dbar = beurling_t(&d_bar(&u));
    let du = d(&u);
    println!(
        "||T(dbar u) - d u|| / ||d u|| = {:.3e}",
        t_dbar.sub(&du).l2_norm() / du.l2_norm()
    );

    let p_dbar = cauchy_p(&d_bar(&u));
    let mean = u.mean();
    let centered = u.map(|c| c - mean);
    println!(
        "||P(dbar u) - (u - mean u)|| / ||u|| = {:.3e}",
        p_dbar.sub(&centered).l2_norm() / u.l2_norm()
    );

    let mut g = Field::from_fn(grid, |z| Complex64::new((3.0 * z.re).sin(), (2.0 * z.im).cos()));
    let m = g.mean();
    for c in g.samples_mut() {
        *c -= m;
    }
    println!(
        "isometry on zero-mean data: ||T g|| / ||g|| = {:.12}",
        beurling_t(&g).l2_norm() / g.l2_norm()
    );

    let k = Complex64::new(3.0, -1.0);
    let ek = e_k(grid, k);
    let prod = ek.mul(&e_k(grid, -k));
    println!(
        "character: sup | |e_k| - 1 | = {:.2e}, sup |e_k e_-k - 1| = {:.2e}",
        ek.samples().iter().map(|c| (c.norm() - 1.0).abs()).fold(0.0, f64::max),
        prod.map(|c| c - 1.0).sup_norm()
    );
    Ok(())
}
