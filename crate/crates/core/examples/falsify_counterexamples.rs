//! Falsifying partial calmness on the bundled counterexamples.

use calm_probe::builtins::builtin;
use calm_probe::falsifier::{falsify, FalsifyConfig};

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = FalsifyConfig {
        samples_per_radius: 1000,
        ..FalsifyConfig::default()
    };
    for name in ["example-4-2", "example-4-3-center", "example-4-4", "example-4-5"] {
        let model = builtin(name, 0)?;
        let center = model.candidate.clone().unwrap();
        let outcome = falsify(&model, &center, &model.paths, &cfg)?;
        println!("{name}: {}", outcome.verdict.name());
        if let Some(sweep) = &outcome.sweep {
            println!("    sweep {} ({}), kappa-hat {:?}", sweep.verdict.name(), sweep.trend, sweep.kappa_hat);
        }
        for path in &outcome.paths {
            println!("    path {} ({}), kappa-hat {:?}", path.verdict.name(), path.trend, path.kappa_hat);
            if let Some(w) = &path.witness {
                for row in w.trace.iter().take(3) {
                    println!("        t = {:.4}  u = {:e}  required kappa {:e}", row.t, row.u, row.required_kappa);
                }
            }
        }
    }
    Ok(())
}
