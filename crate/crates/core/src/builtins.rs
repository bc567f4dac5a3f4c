//! Bundled example models and the seeded random fully-linear generator.

use std::fmt::Write;

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{parse_model, BilevelModel, Point};
use crate::sampling;
use crate::tol::Tolerances;
use crate::value_function::{lower_level_lp, phi_with_point};

pub const EXAMPLE_4_2: &str = include_str!("../models/example-4-2.model");
pub const EXAMPLE_4_3_CENTER: &str = include_str!("../models/example-4-3-center.model");
pub const EXAMPLE_4_4: &str = include_str!("../models/example-4-4.model");
pub const EXAMPLE_4_5: &str = include_str!("../models/example-4-5.model");

pub const NAMES: [&str; 5] = [
    "example-4-2",
    "example-4-3-center",
    "example-4-4",
    "example-4-5",
    "fully-linear-random",
];

/// Model file text of a builtin; `seed` only matters for `fully-linear-random`.
pub fn builtin_text(name: &str, seed: u64) -> Result<String> {
    match name {
        "example-4-2" => Ok(EXAMPLE_4_2.into()),
        "example-4-3-center" => Ok(EXAMPLE_4_3_CENTER.into()),
        "example-4-4" => Ok(EXAMPLE_4_4.into()),
        "example-4-5" => Ok(EXAMPLE_4_5.into()),
        "fully-linear-random" => Ok(random_fully_linear_text(seed)?),
        _ => Err(Error::Config(format!(
            "unknown builtin '{name}' (expected one of {})",
            NAMES.join(", ")
        ))),
    }
}

pub fn builtin(name: &str, seed: u64) -> Result<BilevelModel> {
    parse_model(&builtin_text(name, seed)?)
}

fn coeff(rng: &mut impl Rng) -> i64 {
    rng.gen_range(-3..=3)
}

fn affine_x(rng: &mut impl Rng, n: usize) -> String {
    let mut s = coeff(rng).to_string();
    for i in 0..n {
        let a = coeff(rng);
        if a != 0 {
            let _ = write!(s, " + {a}*x{}", i + 1);
        }
    }
    s
}

/// Random model with constant `c`, `B` and `A` affine in `x`, integer
/// coefficients in `[-3, 3]`, `n <= 2`, `m <= 3`, `q <= 4`.
///
/// Instances whose lower level is empty or unbounded at `x = 0`, or whose
/// objective `c` vanishes, are rejected and redrawn. The candidate is `(0, y*)` with `y*` a lower-level
/// solution at `x = 0`; `X` is the box `[-1, 1]^n`.
pub fn random_fully_linear_text(seed: u64) -> Result<String> {
    let mut rng = sampling::rng(seed);
    let tol = Tolerances::default();
    for _ in 0..10_000 {
        let n = rng.gen_range(1..=2);
        let m = rng.gen_range(1..=3);
        let q = rng.gen_range(1..=4);
        let c: Vec<i64> = (0..m).map(|_| coeff(&mut rng)).collect();
        if c.iter().all(|&v| v == 0) {
            continue;
        }
        let b: Vec<Vec<i64>> = (0..q).map(|_| (0..m).map(|_| coeff(&mut rng)).collect()).collect();
        let a: Vec<String> = (0..q).map(|_| affine_x(&mut rng, n)).collect();
        let f_x: Vec<i64> = (0..n).map(|_| coeff(&mut rng)).collect();
        let f_y: Vec<i64> = (0..m).map(|_| coeff(&mut rng)).collect();

        let mut s = String::new();
        let _ = writeln!(s, "# fully-linear-random, generator seed {seed}");
        let _ = writeln!(s, "[dims]\nn={n} m={m} q={q} form=fully-linear\n[upper]");
        let mut f = String::from("0");
        for (i, v) in f_x.iter().enumerate() {
            let _ = write!(f, " + {v}*x{}", i + 1);
        }
        for (i, v) in f_y.iter().enumerate() {
            let _ = write!(f, " + {v}*y{}", i + 1);
        }
        let _ = writeln!(s, "F = {f}");
        for i in 1..=n {
            let _ = writeln!(s, "X: x{i} <= 1\nX: x{i} >= -1");
        }
        let _ = writeln!(s, "[lower.objective]");
        for (i, v) in c.iter().enumerate() {
            let _ = writeln!(s, "c[{}] = {v}", i + 1);
        }
        let _ = writeln!(s, "[lower.constraints]");
        for j in 0..q {
            let _ = writeln!(s, "A[{}] = {}", j + 1, a[j]);
            for (i, v) in b[j].iter().enumerate() {
                let _ = writeln!(s, "B[{}][{}] = {v}", j + 1, i + 1);
            }
        }
        let model = parse_model(&s)?;
        let data = model.instantiate(&vec![0.0; n]);
        let (phi, y) = phi_with_point(&data, &tol)?;
        let (Some(_), Some(y)) = (phi.finite(), y) else {
            continue;
        };
        debug_assert!(lower_level_lp(&data).region.contains(&y, 1e-7));
        let y: Vec<f64> = y.iter().map(|v| if v.abs() < 1e-12 { 0.0 } else { *v }).collect();
        let candidate = Point::new(vec![0.0; n], y);
        let _ = writeln!(
            s,
            "[candidate]\nx = ({}), y = ({})",
            join(&candidate.x),
            join(&candidate.y)
        );
        return Ok(s);
    }
    Err(Error::Config(format!(
        "no admissible fully-linear instance found for seed {seed}"
    )))
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FormTag;

    #[test]
    fn bundled_models_parse() {
        for name in NAMES {
            let model = builtin(name, 1).unwrap();
            assert!(model.candidate.is_some(), "{name}");
        }
        assert_eq!(builtin("example-4-5", 0).unwrap().paths.len(), 1);
        assert!(builtin("nope", 0).is_err());
    }

    #[test]
    fn random_instances_are_fully_linear_and_deterministic() {
        for seed in 0..10 {
            let a = random_fully_linear_text(seed).unwrap();
            assert_eq!(a, random_fully_linear_text(seed).unwrap());
            let model = parse_model(&a).unwrap();
            assert_eq!(model.infer_form(), FormTag::FullyLinear);
            assert!(model.n <= 2 && model.m <= 3 && model.q <= 4);
        }
    }
}
