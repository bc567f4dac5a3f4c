//! Constant-rank check of the active constraint gradients.

use calm_probe::builtins::builtin;
use calm_probe::certificates::{constant_rank_check, RankVerdict, DEFAULT_SUBSET_CAP};
use calm_probe::Tolerances;

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();
    for name in ["example-4-3-center", "example-4-4"] {
        let model = builtin(name, 0)?;
        let center = model.candidate.clone().unwrap();
        let profile = constant_rank_check(&model, &center, 0.5, 40, 0, &tol, DEFAULT_SUBSET_CAP)?;
        println!("{name}: active set {:?}", profile.active_set);
        for s in &profile.subset_results {
            println!("    J = {:?}  ranks {:?}  constant {}", s.subset, &s.ranks[..s.ranks.len().min(6)], s.constant);
        }
        match &profile.verdict {
            RankVerdict::ConstantRankHolds => println!("    constant rank holds"),
            RankVerdict::Violated { subset, x_witness, rank_center, rank_witness, .. } => println!(
                "    violated on J = {subset:?}: rank {rank_center} at the center, {rank_witness} at x = {x_witness:?}"
            ),
        }
    }
    Ok(())
}
