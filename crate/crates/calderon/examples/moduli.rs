//! Moduli of continuity and the spectral weights built from them: values,
//! asymptotes, and the square-Dini constant.

use calderon::modulus::{eval_theta, square_dini_constant, ModulusSpec, ThetaWeight};

fn main() -> calderon::Result<()> {
    let varpi = ModulusSpec::log_power(2.0)?;
    let omega = ModulusSpec::log_power(1.2)?;
    println!("log-power modulus, exponent 2:");
    for r in [1e-6, 1e-3, 0.1, 0.5, 2.0] {
        println!("  varpi({r:>8}) = {:.6}", varpi.eval(r));
    }
    println!("two-branch extension of the comparison modulus (exponent 1.2):");
    for r in [0.01, 0.5, 1.0, 2.0, 100.0] {
        println!("  tilde-omega({r:>6}) = {:.6}", omega.eval_tilde(r));
    }

    let theta = ThetaWeight::new(omega, 1e-8)?;
    println!("spectral weight from the comparison modulus:");
    for r in [0.5, 1.0, 2.0, 10.0, 1.0e3, 10.0f64.exp()] {
        let v = eval_theta(&theta, r)?;
        let asy = theta.asymptote(r).unwrap();
        println!("  theta({r:>10.3}) = {v:>12.4}   asymptote {asy:>12.4}");
    }

    let c = square_dini_constant(2.0, 1.2)?;
    println!("square-Dini constant C(2, 1.2) = {c:.6}");
    println!("rejecting beta outside (1, alpha - 1/2):");
    println!("  C(2, 1.6) -> {:?}", square_dini_constant(2.0, 1.6).err().map(|e| e.to_string()));
    Ok(())
}
