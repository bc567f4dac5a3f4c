//! Writing a model file by hand and probing it.

use calm_probe::falsifier::{falsify, FalsifyConfig};
use calm_probe::model::parse_model;
use calm_probe::value_function::phi;
use calm_probe::Tolerances;

const MODEL: &str = "\
# min y1 over y1 >= x1, y1 <= 1; the upper level prefers large y1.
[dims]
n=1 m=1 q=2
[upper]
F = -y1
X: x1 <= 1
X: -x1 <= 1
[lower.objective]
c[1] = 1
[lower.constraints]
A[1] = x1
B[1][1] = -1
A[2] = -1
B[2][1] = 1
[candidate]
x = (1), y = (1)
";

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = parse_model(MODEL)?;
    println!("form {}, n = {}, m = {}, q = {}", model.form.name(), model.n, model.m, model.q);
    let tol = Tolerances::default();
    for x in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        println!("phi({x}) = {}", phi(&model, &[x], &tol)?.finite().unwrap());
    }
    let center = model.candidate.clone().unwrap();
    let cfg = FalsifyConfig {
        samples_per_radius: 500,
        ..FalsifyConfig::default()
    };
    let outcome = falsify(&model, &center, &model.paths, &cfg)?;
    println!("center check {:?}, verdict {}", outcome.center_check, outcome.verdict.name());
    print!("{}", model.to_text());
    Ok(())
}
