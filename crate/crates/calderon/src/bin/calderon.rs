//! Command-line front end for the experiment harness.
//!
//! Exit codes: 0 when all property checks pass, 1 on runtime failure, 2 when
//! a property or acceptance check fails.

use calderon::harness::{
    self, config::ExperimentConfig, make_conductivity, run_appendix_oracles, run_decay_experiment,
    run_stability_experiment,
};
use calderon::forward::{dtn_assemble, PolarMesh};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "calderon", about = "Beltrami/CGO solvers and boundary-map stability experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Structured key-value (TOML) configuration file; defaults apply when
    /// omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (0 = auto).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Seed override for the sampled diagnostics.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Decay sweep of the geometric optics solutions over frequencies.
    Decay(Common),
    /// Boundary-map stability sweep over the amplitude family.
    Stability(Common),
    /// Analytic-oracle suite (oscillatory sweep, kernel decay, interpolation,
    /// shift-integral equivalence).
    Oracles(Common),
    /// Single Dirichlet-to-Neumann assembly for the first family member.
    Dtn(Common),
    /// Emit the conductivity field file for the first family member.
    Gen(Common),
}

fn load(common: &Common) -> calderon::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(common.config.as_deref())?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn with_pool<T>(threads: usize, f: impl FnOnce() -> T + Send) -> T
where
    T: Send,
{
    if threads == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool");
    pool.install(f)
}

fn run(cli: Cli) -> calderon::Result<bool> {
    match cli.command {
        Command::Decay(c) => {
            let cfg = load(&c)?;
            let summary = with_pool(c.threads, || run_decay_experiment(&cfg, &c.out))?;
            println!(
                "decay: {} rows ({} failed), monotone {}, positive exponent {}, contraction {}, mass bound {}",
                summary.rows.len(),
                summary.failed_rows,
                summary.monotone_within_ripple,
                summary.positive_exponent,
                summary.contraction_ok,
                summary.gk_bound_ok
            );
            println!("wrote {}", c.out.join("decay.csv").display());
            Ok(summary.all_pass())
        }
        Command::Stability(c) => {
            let cfg = load(&c)?;
            let summary = with_pool(c.threads, || run_stability_experiment(&cfg, &c.out))?;
            println!(
                "stability: {} records ({} failed), rho monotone {}, gamma monotone {}, dominated {}, interpolation {}",
                summary.records.len(),
                summary.failed_rows,
                summary.rho_monotone,
                summary.gamma_monotone,
                summary.dominated.map(|d| d.to_string()).unwrap_or_else(|| "degenerate-fit".into()),
                summary.interpolation_ok
            );
            if let Some(fit) = &summary.gamma_fit {
                println!(
                    "fitted envelope: C1 = {:.4e}, C2 = {}, a = {:.4} (R^2 = {:.4})",
                    fit.c1, fit.c2, fit.a, fit.r_squared
                );
            }
            println!("wrote {}", c.out.join("stability.csv").display());
            Ok(summary.all_pass())
        }
        Command::Oracles(c) => {
            let cfg = load(&c)?;
            let report = with_pool(c.threads, || run_appendix_oracles(&cfg))?;
            std::fs::create_dir_all(&c.out)?;
            let path = c.out.join("oracles.json");
            std::fs::write(&path, serde_json::to_string_pretty(&report).expect("serializable"))?;
            println!(
                "oscillatory sweep: min {:.4} at s = {} (Bessel cross-check {:.2e}) -> {}",
                report.oscillatory.min_value,
                report.oscillatory.s_at_min,
                report.oscillatory.bessel_crosscheck_max_err,
                if report.oscillatory.pass { "pass" } else { "FAIL" }
            );
            for k in &report.kernel_decay {
                println!(
                    "kernel decay at z = ({}, {}): sup ratio {:.4} -> {:.4} (change {:.1}%) -> {}",
                    k.z.0,
                    k.z.1,
                    k.sup_ratio_base,
                    k.sup_ratio_doubled,
                    100.0 * k.rel_change,
                    if k.pass { "pass" } else { "FAIL" }
                );
            }
            println!(
                "interpolation: {}/{} -> {}",
                report.interpolation.trials - report.interpolation.failures,
                report.interpolation.trials,
                if report.interpolation.pass { "pass" } else { "FAIL" }
            );
            for e in &report.equivalence {
                println!(
                    "equivalence beta = {}: band c = {:.4e} (extension change {:.1}%) -> {}",
                    e.beta,
                    e.band_c,
                    100.0 * e.rel_change,
                    if e.pass { "pass" } else { "FAIL" }
                );
            }
            println!("wrote {}", path.display());
            Ok(report.all_pass())
        }
        Command::Dtn(c) => {
            let cfg = load(&c)?;
            let t = cfg.family.amplitudes.first().copied().unwrap_or(0.0);
            let cond = make_conductivity(
                &cfg.modulus_spec()?,
                t,
                cfg.center(),
                (cfg.family.r_in, cfg.family.r_out),
                cfg.grid_spec()?,
                cfg.seed,
            )?;
            let mesh = PolarMesh::new(cfg.dtn.mesh_r, cfg.dtn.mesh_theta);
            let matrix = with_pool(c.threads, || dtn_assemble(&cond, cfg.dtn.n_b, mesh))?;
            std::fs::create_dir_all(&c.out)?;
            let path = c.out.join("dtn.bin");
            let mut file = std::fs::File::create(&path)?;
            matrix.write_to(&mut file)?;
            let dev = matrix.hermitian_deviation();
            let col0: f64 = (-(cfg.dtn.n_b as i64)..=cfg.dtn.n_b as i64)
                .map(|m| matrix.entry(m, 0).norm())
                .fold(0.0, f64::max);
            println!(
                "assembled {}x{} boundary map at amplitude {t}: hermitian deviation {dev:.3e}, constant-mode column {col0:.3e}",
                matrix.side(),
                matrix.side()
            );
            println!("wrote {}", path.display());
            Ok(dev < 1e-2 && col0 < 1e-6)
        }
        Command::Gen(c) => {
            let cfg = load(&c)?;
            let t = cfg.family.amplitudes.first().copied().unwrap_or(0.0);
            let cond = make_conductivity(
                &cfg.modulus_spec()?,
                t,
                cfg.center(),
                (cfg.family.r_in, cfg.family.r_out),
                cfg.grid_spec()?,
                cfg.seed,
            )?;
            std::fs::create_dir_all(&c.out)?;
            let path = c.out.join("gamma.field");
            let kind = format!("{:?}", cfg.family.kind).to_lowercase();
            harness::io::write_field_dump(&path, cond.gamma(), &kind)?;
            println!(
                "wrote {} (amplitude {t}, seminorm {:?})",
                path.display(),
                cond.seminorm().map(|s| s.value)
            );
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::from(0),
        Ok(false) => {
            eprintln!("one or more property checks failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
