//! Acceptance suite: every criterion runs at its stated size and tolerance
//! and prints one pass/fail line (visible with `--nocapture`).
//!
//! Criteria 7 and 8 share one decay sweep; the result is computed once and
//! cached for both tests.

use calderon::beltrami::{
    cgo_regularity_check, decompose_g_h, recover_mu, solve_linear_cgo, solve_nonlinear_cgo,
    BeltramiCoefficient, SolverConfig,
};
use calderon::field::{beurling_t, cauchy_p, d, d_bar, Field};
use calderon::forward::{
    dtn_assemble, radial_dtn_entry, Conductivity, GammaProfile, PolarMesh,
};
use calderon::harness::config::ExperimentConfig;
use calderon::harness::decay::{nonincreasing_within_ripple, run_decay_experiment, DecaySummary};
use calderon::harness::oracles::{equivalence_band, interpolation_suite};
use calderon::harness::{make_mu, run_stability_experiment};
use calderon::modulus::ModulusSpec;
use calderon::spaces::{bessel, invert_zeta, kernel_fourier_decay, oscillatory_integral};
use calderon::GridSpec;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {id:02} {name}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn grid(n: usize) -> GridSpec {
    GridSpec::new(n, 4.0).unwrap()
}

#[test]
fn criterion_01_identity_pipeline() {
    let g = grid(256);
    let mu0 = BeltramiCoefficient::new(Field::zeros(g), 2.0, 1).unwrap();
    let cfg = SolverConfig::default();
    let k = Complex64::new(3.0, 1.0);
    let lin = solve_linear_cgo(&mu0, k, &cfg).unwrap();
    let nl = solve_nonlinear_cgo(&mu0, k, &cfg).unwrap();
    let psi_dev = lin.sup_deviation;
    let phi_dev = nl.sup_deviation();
    // f = e^{ik z} exactly
    let f = nl.function().samples();
    let exact = Field::from_fn(g, |z| (Complex64::new(0.0, 1.0) * k * z).exp());
    let f_err = f.sub(&exact).sup_norm() / exact.sup_norm();

    let c = Conductivity::new(GammaProfile::Uniform, g).unwrap();
    let a = dtn_assemble(&c, 16, PolarMesh::new(256, 512)).unwrap();
    let mut worst_diag = 0.0f64;
    let mut worst_off = 0.0f64;
    for m in -16i64..=16 {
        for n in -16i64..=16 {
            let v = a.entry(m, n);
            if m == n && n != 0 {
                worst_diag = worst_diag.max((v.re - n.abs() as f64).abs() / n.abs() as f64);
            } else if m != n {
                worst_off = worst_off.max(v.norm());
            }
        }
    }
    let zero_mode = a.entry(0, 0).norm();
    let pass = psi_dev <= 1e-12
        && phi_dev <= 1e-12
        && f_err <= 1e-12
        && worst_diag <= 0.01
        && worst_off <= 1e-6
        && zero_mode <= 1e-8;
    report(
        1,
        "identity pipeline",
        pass,
        &format!(
            "sup|psi-z| = {psi_dev:.1e}, sup|phi-z| = {phi_dev:.1e}, |f - e^(ikz)| = {f_err:.1e}, \
             diag defect {worst_diag:.2e}, off-diag {worst_off:.2e}, zero mode {zero_mode:.2e}"
        ),
    );
}

#[test]
fn criterion_02_operator_contracts() {
    let g = grid(256);
    let l = g.half_width();
    // periodized Gaussian: images summed over the 3x3 neighborhood
    let u = Field::from_fn(g, |z| {
        let mut s = 0.0;
        for dj in -1..=1 {
            for dm in -1..=1 {
                let w = z - Complex64::new(0.4, -0.3)
                    + Complex64::new(2.0 * l * dj as f64, 2.0 * l * dm as f64);
                s += (-w.norm_sqr()).exp();
            }
        }
        Complex64::new(s, 0.0)
    });
    let t_err = {
        let lhs = beurling_t(&d_bar(&u));
        let rhs = d(&u);
        lhs.sub(&rhs).l2_norm() / rhs.l2_norm()
    };
    let p_err = {
        let lhs = cauchy_p(&d_bar(&u));
        let mean = u.mean();
        let rhs = u.map(|c| c - mean);
        lhs.sub(&rhs).l2_norm() / rhs.l2_norm()
    };
    let iso_err = {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let mut f = Field::from_samples(
            g,
            (0..g.len())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
        .unwrap();
        let m = f.mean();
        for c in f.samples_mut() {
            *c -= m;
        }
        (beurling_t(&f).l2_norm() - f.l2_norm()).abs() / f.l2_norm()
    };
    let pass = t_err <= 1e-8 && p_err <= 1e-8 && iso_err <= 1e-10;
    report(
        2,
        "operator contracts",
        pass,
        &format!("T dbar = d: {t_err:.2e}, P dbar = id - mean: {p_err:.2e}, isometry: {iso_err:.2e}"),
    );
}

#[test]
fn criterion_03_shift_integral_equivalence() {
    let mut detail = String::new();
    let mut pass = true;
    for beta in [1.2, 1.4] {
        let band = equivalence_band(beta, 1e-6).unwrap();
        pass &= band.pass && band.band_c > 0.0;
        detail.push_str(&format!(
            "beta {beta}: c = {:.3e}, extension change {:.1}%; ",
            band.band_c,
            100.0 * band.rel_change
        ));
    }
    report(3, "shift-integral equivalence band", pass, &detail);
}

#[test]
fn criterion_04_oscillatory_positivity() {
    let mut min_v = f64::INFINITY;
    let mut s_at = 1.0;
    let mut cross = 0.0f64;
    let steps = ((50.0 - 1.0) / 0.05_f64).round() as usize;
    for i in 0..=steps {
        let s = 1.0 + i as f64 * 0.05;
        let f = oscillatory_integral(s);
        let v = 2.0 * PI - 2.0 * f;
        if v < min_v {
            min_v = v;
            s_at = s;
        }
        cross = cross.max((f - PI * bessel::j0(2.0 * PI * s)).abs());
    }
    let pass = min_v >= 4.3 && cross <= 1e-8;
    report(
        4,
        "oscillatory positivity sweep",
        pass,
        &format!("min {min_v:.4} at s = {s_at}, Bessel cross-check {cross:.2e}"),
    );
}

#[test]
fn criterion_05_kernel_fourier_decay() {
    let mut pass = true;
    let mut detail = String::new();
    for z in [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0)] {
        let g1 = grid(256);
        let g2 = grid(512);
        let r1 = kernel_fourier_decay(z, g1.nyquist(), g1).unwrap();
        let r2 = kernel_fourier_decay(z, g2.nyquist(), g2).unwrap();
        let change = (r2.sup_ratio - r1.sup_ratio).abs() / r1.sup_ratio;
        pass &= r1.sup_ratio.is_finite() && r2.sup_ratio.is_finite() && change <= 0.20;
        detail.push_str(&format!(
            "z = {z}: {:.3} -> {:.3} ({:.1}%); ",
            r1.sup_ratio,
            r2.sup_ratio,
            100.0 * change
        ));
    }
    report(5, "cutoff-kernel Fourier decay", pass, &detail);
}

#[test]
fn criterion_06_neumann_contraction() {
    let g = grid(256);
    let spec = ModulusSpec::log_power(2.0).unwrap();
    let cfg = SolverConfig::default();
    let n0 = 10usize;
    let mut pass = true;
    let mut worst_ratio_margin = f64::NEG_INFINITY;
    let mut worst_tail_factor = 0.0f64;
    for kappa in [0.3, 0.5] {
        let mu = make_mu(&spec, kappa, Complex64::new(0.15, -0.1), (0.2, 0.7), g, 11).unwrap();
        for kr in [4.0, 8.0, 16.0] {
            let sol = solve_linear_cgo(&mu, Complex64::new(kr, 0.0), &cfg).unwrap();
            worst_ratio_margin = worst_ratio_margin.max(sol.max_term_ratio - mu.kappa());
            pass &= sol.max_term_ratio <= mu.kappa() + 0.05;
            let split = n0.min(sol.series_terms.len());
            let (_, h) = decompose_g_h(&sol, split).unwrap();
            let bound =
                PI.sqrt() * mu.kappa() * mu.kappa().powi(split as i32) / (1.0 - mu.kappa());
            worst_tail_factor = worst_tail_factor.max(h.l2_norm() / bound);
            pass &= h.l2_norm() <= 2.0 * bound;
        }
    }
    report(
        6,
        "Neumann-series contraction",
        pass,
        &format!(
            "worst ratio excess over kappa = {worst_ratio_margin:.4}, worst tail/bound = {worst_tail_factor:.3}"
        ),
    );
}

/// Shared decay sweep for criteria 7 and 8: the alpha = 2 family member at
/// N = 1024 (so the character at k = 128 is resolved), k = 2^j, j = 2..7.
fn decay_sweep() -> &'static DecaySummary {
    static SWEEP: OnceLock<DecaySummary> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let mut cfg = ExperimentConfig::default();
        cfg.seed = 7;
        cfg.grid.n = 1024;
        cfg.family.amplitudes = vec![0.4];
        cfg.sweep.k_exponents = vec![2, 3, 4, 5, 6, 7];
        let dir = std::env::temp_dir().join("calderon-acceptance-decay");
        run_decay_experiment(&cfg, &dir).expect("decay experiment")
    })
}

#[test]
fn criterion_07_cgo_decay() {
    let summary = decay_sweep();
    let devs_lin: Vec<f64> = summary
        .rows
        .iter()
        .filter(|r| r.t > 0.0)
        .filter_map(|r| r.sup_dev_linear)
        .collect();
    let devs_nl: Vec<f64> = summary
        .rows
        .iter()
        .filter(|r| r.t > 0.0)
        .filter_map(|r| r.sup_dev_nonlinear)
        .collect();
    let mono = devs_lin.len() == 6
        && devs_nl.len() == 6
        && nonincreasing_within_ripple(&devs_lin, 0.10)
        && nonincreasing_within_ripple(&devs_nl, 0.10);
    let fit = summary.fits.iter().find(|f| f.t > 0.0).unwrap();
    let a_lin = fit.linear_theta.map(|f| -f.slope).unwrap_or(f64::NAN);
    let a_nl = fit.nonlinear_theta.map(|f| -f.slope).unwrap_or(f64::NAN);
    let pass = mono && a_lin > 0.0 && a_nl > 0.0 && summary.failed_rows == 0;
    report(
        7,
        "decay of the geometric optics solutions",
        pass,
        &format!(
            "deviations {:?} (linear), fitted a = {a_lin:.3} (linear) / {a_nl:.3} (nonlinear)",
            devs_lin.iter().map(|d| format!("{d:.2e}")).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_08_lowfreq_mass_bound() {
    let summary = decay_sweep();
    let mut pass = true;
    let mut worst = 0.0f64;
    let mut count = 0;
    for r in summary.rows.iter().filter(|r| r.t > 0.0) {
        let (Some(mt), Some(gb)) = (r.gk_mass_theta, r.gk_bound) else {
            pass = false;
            continue;
        };
        count += 1;
        worst = worst.max(mt / gb);
        pass &= mt <= gb;
    }
    pass &= count == 6;
    report(
        8,
        "low-frequency mass bound",
        pass,
        &format!("{count} frequencies, worst mass*theta / bound = {worst:.3e}"),
    );
}

#[test]
fn criterion_09_jacobian_positivity() {
    let g = grid(512);
    let spec = ModulusSpec::log_power(2.0).unwrap();
    let sigma = ModulusSpec::integrated_log_power(2.0).unwrap();
    let cfg = SolverConfig::default();
    let k = Complex64::new(2.0, 0.0);
    let mut pass = true;
    let mut detail = String::new();
    for (i, kappa) in [0.1, 0.2, 0.3, 0.4, 0.5].iter().enumerate() {
        let mu = make_mu(&spec, *kappa, Complex64::new(0.15, -0.1), (0.2, 0.7), g, 11).unwrap();
        let phase = solve_nonlinear_cgo(&mu, k, &cfg).unwrap();
        let rep = cgo_regularity_check(&phase, &sigma, i as u64).unwrap();
        pass &= rep.jacobian_min > 0.0;
        detail.push_str(&format!("kappa {kappa}: J_min = {:.3e}; ", rep.jacobian_min));
    }
    report(9, "Jacobian positivity", pass, &detail);
}

#[test]
fn criterion_10_mu_roundtrip() {
    let g = grid(512);
    let spec = ModulusSpec::log_power(2.0).unwrap();
    let cfg = SolverConfig::default();
    let mu = make_mu(&spec, 0.3, Complex64::new(0.1, 0.0), (0.2, 0.6), g, 5).unwrap();
    let mut pass = true;
    let mut detail = String::new();
    for kr in [4.0, 8.0] {
        let phase = solve_nonlinear_cgo(&mu, Complex64::new(kr, 0.0), &cfg).unwrap();
        let rec = recover_mu(&phase.function(), 0.1);
        let mut worst = 0.0f64;
        let mut unmasked = 0usize;
        for j in 0..g.n() {
            for m in 0..g.n() {
                if !rec.mask[g.index(j, m)] {
                    unmasked += 1;
                    worst = worst.max((rec.field.value(j, m) - mu.field().value(j, m)).norm());
                }
            }
        }
        pass &= worst <= 1e-3 && unmasked > 0;
        detail.push_str(&format!("k = {kr}: sup error {worst:.2e} ({unmasked} unmasked); "));
    }
    report(10, "coefficient recovery round trip", pass, &detail);
}

#[test]
fn criterion_11_radial_dtn_oracle() {
    let g = grid(64);
    let profile = GammaProfile::RadialBump { amplitude: 0.8, inner: 0.3, outer: 0.7 };
    let c = Conductivity::new(profile.clone(), g).unwrap();
    let a = dtn_assemble(&c, 16, PolarMesh::new(1024, 1024)).unwrap();
    let gamma_r = move |r: f64| profile.eval_polar(r, 0.0);
    let mut pass = true;
    let mut worst = 0.0f64;
    for n in 1..=16i64 {
        let oracle = radial_dtn_entry(&gamma_r, n, 40_000);
        let fd = a.entry(n, n).re;
        let rel = (fd - oracle).abs() / oracle;
        worst = worst.max(rel);
        pass &= rel <= 1e-3;
        // negative modes match by symmetry
        let rel_neg = (a.entry(-n, -n).re - oracle).abs() / oracle;
        pass &= rel_neg <= 1e-3;
    }
    report(
        11,
        "radial boundary-map oracle",
        pass,
        &format!("worst relative deviation over |n| <= 16: {worst:.2e}"),
    );
}

#[test]
fn criterion_12_stability_shape() {
    let mut cfg = ExperimentConfig::default();
    cfg.seed = 7;
    let dir = std::env::temp_dir().join("calderon-acceptance-stability");
    let summary = run_stability_experiment(&cfg, &dir).expect("stability experiment");
    let a = summary.gamma_fit.as_ref().map(|f| f.a).unwrap_or(f64::NAN);
    let pass = summary.rho_monotone
        && summary.gamma_monotone
        && summary.dominated == Some(true)
        && a > 0.0
        && summary.failed_rows == 0;
    report(
        12,
        "stability shape",
        pass,
        &format!(
            "rho monotone {}, gamma monotone {}, dominated {:?}, fitted a = {a:.3}",
            summary.rho_monotone, summary.gamma_monotone, summary.dominated
        ),
    );
}

#[test]
fn criterion_13_interpolation_inequality() {
    let suite = interpolation_suite(100, 7).unwrap();
    // Hoelder specialization: the generic bound machinery reproduces the
    // exponent a/(1+a) in exponent arithmetic
    let mut worst_exp = 0.0f64;
    for a in [0.25, 0.5, 0.75] {
        let sigma = ModulusSpec::holder(a).unwrap();
        let rhs = |u: f64| 2.0 * sigma.eval(invert_zeta(&sigma, u)) * 1.0;
        let (u1, u2) = (1e-4, 1e-3);
        let t_meas = (rhs(u2) / rhs(u1)).ln() / (u2f64_ln_ratio(u1, u2));
        let t = a / (1.0 + a);
        worst_exp = worst_exp.max((t_meas - t).abs());
    }
    let pass = suite.pass && worst_exp <= 1e-12;
    report(
        13,
        "interpolation inequality",
        pass,
        &format!(
            "{}/{} fields satisfied the bound, exponent defect {worst_exp:.2e}",
            suite.trials - suite.failures,
            suite.trials
        ),
    );
}

fn u2f64_ln_ratio(u1: f64, u2: f64) -> f64 {
    (u2 / u1).ln()
}
