//! Value function of the lower level on a grid, next to its closed form.

use calm_probe::builtins::builtin;
use calm_probe::value_function::phi;
use calm_probe::Tolerances;

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();
    let model = builtin("example-4-2", 0)?;
    println!("{:>6}  {:>10}  {:>10}", "x", "phi(x)", "-x^2");
    for k in -4..=4 {
        let x = k as f64 / 2.0;
        let v = phi(&model, &[x], &tol)?;
        println!("{x:>6}  {:>10}  {:>10}", v.finite().unwrap() + 0.0, 0.0 - x * x);
    }

    // φ is not always finite: outside X the lower level may be unbounded.
    let model = builtin("example-4-4", 0)?;
    for x in [-1.0, 0.0, 1.0] {
        println!("example-4-4: phi({x}) = {}", phi(&model, &[x], &tol)?.label());
    }
    Ok(())
}
