//! The analytic oracles: oscillatory positivity sweep with its Bessel
//! cross-check, cutoff-kernel Fourier decay, and the shift-integral
//! equivalence band.

use calderon::harness::oracles::{equivalence_band, kernel_decay_doubling, oscillatory_sweep};

fn main() -> calderon::Result<()> {
    let osc = oscillatory_sweep(50.0, 0.25);
    println!(
        "oscillatory sweep: min of the positivity integral = {:.4} at s = {} (Bessel cross-check {:.2e})",
        osc.min_value, osc.s_at_min, osc.bessel_crosscheck_max_err
    );

    for point in kernel_decay_doubling(128, 4.0)? {
        println!(
            "kernel decay at z = ({}, {}): normalized sup {:.4} -> {:.4} under grid doubling ({:.1}% change)",
            point.z.0,
            point.z.1,
            point.sup_ratio_base,
            point.sup_ratio_doubled,
            100.0 * point.rel_change
        );
    }

    let band = equivalence_band(1.2, 1e-5)?;
    println!("shift integral vs weight, exponent 1.2:");
    for (r, ratio) in &band.ratios {
        println!("  r = {r:>12.1}: ratio {ratio:.4}");
    }
    println!("two-sided band constant c = {:.4e}", band.band_c);
    Ok(())
}
