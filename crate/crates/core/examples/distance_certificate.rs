//! Distance from a point to the lower-level solution set, with the dual
//! certificate that proves it.

use calm_probe::builtins::builtin;
use calm_probe::value_function::{dist_to_solutions, solution_face};
use calm_probe::Tolerances;

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();
    let model = builtin("example-4-2", 0)?;
    for (x, y) in [(0.0, 0.5), (0.5, 0.5), (0.5, 1.0), (-1.0, -0.25)] {
        let face = solution_face(&model, &[x], &tol)?;
        let cert = dist_to_solutions(&model, &[x], &[y], &tol)?;
        println!(
            "x = {x:>5}, y = {y:>5}: phi = {:>6}, dist = {:.6}, nearest z = {:.6}, in S(x): {}",
            face.phi + 0.0,
            cert.sigma,
            cert.z[0],
            face.contains(&[y], tol.feas)
        );
        println!(
            "    primal {:.6} dual {:.6} xi3 {:.6} u = {:.6}",
            cert.primal_value, cert.dual_value, cert.dual.xi3, cert.slack_u
        );
    }
    Ok(())
}
