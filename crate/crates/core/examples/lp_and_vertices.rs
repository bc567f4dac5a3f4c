//! The LP kernel on its own: simplex with duals and vertex enumeration.

use calm_probe::lp::{dot, enumerate_vertices, solve_lp, LpProblem, Polyhedron, Sign, DEFAULT_BASIS_CAP};
use calm_probe::Tolerances;

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();
    // x + y <= 4, x + 3y <= 6, x, y >= 0
    let region = Polyhedron::free(2)
        .with_signs(vec![Sign::NonNegative; 2])
        .with_ineq(vec![1.0, 1.0], 4.0)
        .with_ineq(vec![1.0, 3.0], 6.0);
    let problem = LpProblem::maximize(vec![3.0, 2.0], region.clone());
    let out = solve_lp(&problem, &tol)?;
    println!("status {:?}, value {}, x = {:?}", out.status, out.value, out.primal);
    println!("duals {:?}, b.y = {}", out.ineq_duals, out.dual_value(&problem));

    let verts = enumerate_vertices(&region, &tol, DEFAULT_BASIS_CAP)?;
    for (v, basis) in verts.vertices.iter().zip(&verts.bases) {
        println!("vertex {v:?}  tight {basis:?}  objective {}", dot(&problem.objective, v));
    }
    Ok(())
}
