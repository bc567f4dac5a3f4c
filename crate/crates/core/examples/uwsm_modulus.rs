//! Weak-sharp modulus: a finite certificate for a fully linear instance and
//! the growing modulus that rules it out for a parametric one.

use calm_probe::builtins::builtin;
use calm_probe::certificates::{check_uwsm_inequality, uwsm_modulus_for_model, uwsm_modulus_sweep};
use calm_probe::lp::DEFAULT_BASIS_CAP;
use calm_probe::Tolerances;

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();
    let model = builtin("fully-linear-random", 3)?;
    let cert = uwsm_modulus_for_model(&model, &tol, DEFAULT_BASIS_CAP)?;
    println!("fully-linear-random(3): M = {} from {} vertices", cert.modulus, cert.witness_vertices.len());
    let x = model.candidate.clone().unwrap().x;
    let check = check_uwsm_inequality(&model, cert.modulus, &x, 0.5, 500, 1e-7, 0, &tol)?;
    println!(
        "  {} samples, {} violations, max duality gap {:e}",
        check.samples, check.violations, check.max_duality_gap
    );

    let model = builtin("example-4-2", 0)?;
    let xs: Vec<Vec<f64>> = [1.0, 0.5, 0.25, 0.125].iter().map(|&x| vec![x]).collect();
    let sweep = uwsm_modulus_sweep(&model, &xs, &tol, DEFAULT_BASIS_CAP)?;
    for (x, m) in &sweep.per_x_moduli {
        println!("example-4-2: M({}) = {m}", x[0]);
    }
    println!("growing: {}", sweep.growing);
    Ok(())
}
