//! Inner semicontinuity of the solution map along rays in parameter space.

use calm_probe::builtins::builtin;
use calm_probe::certificates::{inner_semicontinuity_probe, Directions};
use calm_probe::Tolerances;

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();
    let schedule = [0.5, 0.1, 0.01, 0.001];
    for name in ["example-4-2", "example-4-3-center"] {
        let model = builtin(name, 0)?;
        let center = model.candidate.clone().unwrap();
        let dirs = Directions::Explicit(vec![vec![1.0], vec![-1.0]]);
        let report = inner_semicontinuity_probe(&model, &center, &schedule, &dirs, 0, &tol)?;
        println!("{name} at x = {:?}, y = {:?}: {}", center.x, center.y, report.verdict.name());
        for (d, row) in report.directions.iter().zip(&report.distances) {
            println!("    d = {d:?}: {row:?}");
        }
    }
    Ok(())
}
