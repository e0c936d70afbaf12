//! A reduced boundary-map stability sweep: distances, the fitted envelope,
//! and the interpolation bound on the function differences.

use calderon::harness::{run_stability_experiment, ExperimentConfig};

fn main() -> calderon::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.seed = 7;
    cfg.grid.n = 128;
    cfg.dtn.n_b = 8;
    cfg.dtn.mesh_r = 64;
    cfg.dtn.mesh_theta = 128;

    let out = std::env::temp_dir().join("calderon-stability-mini");
    let summary = run_stability_experiment(&cfg, &out)?;
    println!("t            rho          sup|gamma diff|   sup|u diff|");
    for r in &summary.records {
        println!(
            "{:<12} {:<12.4e} {:<17.4e} {:<12.4e}",
            r.t, r.rho, r.sup_gamma_diff, r.sup_u_diff
        );
    }
    if let Some(fit) = &summary.gamma_fit {
        println!(
            "envelope: C1 = {:.4e}, C2 = {}, a = {:.4} (R^2 = {:.4}), dominated: {:?}",
            fit.c1, fit.c2, fit.a, fit.r_squared, summary.dominated
        );
    }
    println!("tables under {}", out.display());
    Ok(())
}
