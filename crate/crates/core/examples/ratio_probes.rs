//! Sampled ratio probes around a center: bounded at one point, diverging at
//! another.

use calm_probe::builtins::builtin;
use calm_probe::certificates::{luwsmc_probe, r_regularity_probe, Omega, ProbeConfig, RatioProbeReport};
use calm_probe::model::Point;

fn show(label: &str, report: &RatioProbeReport) {
    println!("{label}: {}", report.trend);
    for r in &report.per_radius {
        println!("    eps {:<8} samples {:<5} worst ratio {:e}", r.epsilon, r.sample_count, r.worst_ratio);
    }
}

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ProbeConfig::new(vec![0.5, 0.1, 0.02, 0.004], 400, 0);
    let model = builtin("example-4-2", 0)?;
    show("luwsmc at (2, 1)", &luwsmc_probe(&model, &Point::new(vec![2.0], vec![1.0]), &cfg)?);
    show("luwsmc at (0, 0)", &luwsmc_probe(&model, &Point::new(vec![0.0], vec![0.0]), &cfg)?);

    let model = builtin("example-4-4", 0)?;
    let center = model.candidate.clone().unwrap();
    show("r-regularity on example-4-4", &r_regularity_probe(&model, &center, &cfg, Omega::DomPhi)?);
    Ok(())
}
