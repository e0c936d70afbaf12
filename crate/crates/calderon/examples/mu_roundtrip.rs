//! Recover the Beltrami coefficient from a solved geometric optics function
//! and compare against the generator.

use calderon::beltrami::{recover_mu, solve_nonlinear_cgo, SolverConfig};
use calderon::harness::make_mu;
use calderon::modulus::ModulusSpec;
use calderon::GridSpec;
use num_complex::Complex64;

fn main() -> calderon::Result<()> {
    let grid = GridSpec::new(256, 4.0)?;
    let spec = ModulusSpec::log_power(2.0)?;
    let mu = make_mu(&spec, 0.3, Complex64::new(0.1, 0.0), (0.2, 0.6), grid, 5)?;
    let cfg = SolverConfig::default();
    let k = Complex64::new(4.0, 0.0);

    let phase = solve_nonlinear_cgo(&mu, k, &cfg)?;
    let rec = recover_mu(&phase.function(), 0.1);
    let suppressed = rec.mask.iter().filter(|m| **m).count();
    let mut worst = 0.0f64;
    for j in 0..grid.n() {
        for m in 0..grid.n() {
            if !rec.mask[grid.index(j, m)] {
                worst = worst.max((rec.field.value(j, m) - mu.field().value(j, m)).norm());
            }
        }
    }
    println!(
        "recovered coefficient from f = e^(ik phi): sup error {worst:.3e} on the unmasked set"
    );
    println!(
        "{suppressed} of {} samples suppressed by the derivative floor",
        grid.len()
    );
    Ok(())
}
