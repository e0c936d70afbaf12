//! Assemble boundary maps on the disk and measure their weighted distance:
//! the identity conductivity reproduces the mode numbers, a radial profile
//! is cross-checked against the shooting oracle.

use calderon::forward::{
    dtn_assemble, dtn_opnorm_diff, radial_dtn_entry, Conductivity, GammaProfile, PolarMesh,
};
use calderon::GridSpec;

fn main() -> calderon::Result<()> {
    let grid = GridSpec::new(128, 4.0)?;
    let mesh = PolarMesh::new(128, 256);

    let identity = Conductivity::new(GammaProfile::Uniform, grid)?;
    let a = dtn_assemble(&identity, 12, mesh)?;
    println!("identity conductivity, diagonal vs mode number:");
    for n in [0i64, 1, 4, 8, 12] {
        println!("  n = {n:>2}: {:.6}", a.entry(n, n).re);
    }

    let profile = GammaProfile::RadialBump { amplitude: 0.8, inner: 0.3, outer: 0.7 };
    let c = Conductivity::new(profile.clone(), grid)?;
    let b = dtn_assemble(&c, 12, mesh)?;
    println!("radial bump, finite volumes vs 1-D shooting:");
    let gamma_r = move |r: f64| profile.eval_polar(r, 0.0);
    for n in [1i64, 4, 8] {
        let fd = b.entry(n, n).re;
        let oracle = radial_dtn_entry(&gamma_r, n, 20_000);
        println!("  n = {n:>2}: {fd:.6} vs {oracle:.6} (rel {:.2e})", (fd - oracle).abs() / oracle);
    }
    println!("hermitian deviation: {:.3e}", b.hermitian_deviation());
    println!(
        "weighted operator distance to the identity map: {:.6}",
        dtn_opnorm_diff(&a, &b)?
    );
    Ok(())
}
