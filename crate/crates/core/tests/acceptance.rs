//! Acceptance criteria 1-9, one PASS/FAIL line each.

use std::time::Instant;

use nalgebra::{Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use calm_probe::builtins::builtin;
use calm_probe::certificates::{
    check_uwsm_inequality, constant_rank_check, uwsm_modulus_for_model, uwsm_modulus_sweep, RankVerdict,
    DEFAULT_SUBSET_CAP,
};
use calm_probe::cli;
use calm_probe::lp::{enumerate_vertices, solve_lp, LpProblem, LpStatus, Polyhedron, Sense, DEFAULT_BASIS_CAP};
use calm_probe::model::Point;
use calm_probe::report::Report;
use calm_probe::value_function::{dist_to_solutions, phi};
use calm_probe::Tolerances;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["calm-probe"];
    full.extend_from_slice(args);
    let code = cli::run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap())
}

fn criterion_1() -> Outcome {
    let t = Tolerances::default();
    let grid: Vec<f64> = (0..101).map(|k| -2.0 + 4.0 * k as f64 / 100.0).collect();
    let cases: [(&str, fn(&[f64]) -> f64, fn(f64) -> Vec<f64>); 3] = [
        ("example-4-2", |x| -x[0] * x[0], |s| vec![s]),
        ("example-4-4", |_| 0.0, |s| vec![s]),
        ("example-4-5", |x| -x[0].abs(), |s| vec![s, 0.3 - s / 2.0]),
    ];
    let mut worst_err = 0.0f64;
    let mut worst_time = 0.0f64;
    for (name, closed, lift) in cases {
        let model = builtin(name, 0).map_err(|e| e.to_string())?;
        let start = Instant::now();
        for &s in &grid {
            let x = lift(s);
            let v = phi(&model, &x, &t).map_err(|e| e.to_string())?;
            let v = v.finite().ok_or_else(|| format!("{name}: φ({x:?}) not finite"))?;
            let err = (v - closed(&x)).abs();
            ensure(err <= 1e-8, || format!("{name}: φ({x:?}) = {v}, expected {}", closed(&x)))?;
            worst_err = worst_err.max(err);
        }
        let secs = start.elapsed().as_secs_f64();
        ensure(secs < 1.0, || format!("{name}: {secs:.3} s"))?;
        worst_time = worst_time.max(secs);
    }
    Ok(format!("3 × 101 points, max error {worst_err:e}, slowest {worst_time:.3} s"))
}

/// Closed-form membership `y ∈ S(x)` and a sampler for members.
struct SolutionMap {
    name: &'static str,
    member: fn(&[f64], &[f64]) -> bool,
    pick: fn(&[f64], &mut ChaCha8Rng) -> Vec<f64>,
    n: usize,
    m: usize,
}

fn criterion_2() -> Outcome {
    let t = Tolerances::default();
    let maps = [
        SolutionMap {
            name: "example-4-2",
            member: |x, y| if x[0] != 0.0 { y[0] == 1.0 } else { (0.0..=1.0).contains(&y[0]) },
            pick: |x, r| if x[0] != 0.0 { vec![1.0] } else { vec![r.gen_range(0.0..=1.0)] },
            n: 1,
            m: 1,
        },
        SolutionMap {
            name: "example-4-4",
            member: |x, y| match x[0].partial_cmp(&0.0).unwrap() {
                std::cmp::Ordering::Less => y[0] <= 0.0 && y[1] == 0.0,
                std::cmp::Ordering::Equal => y[1] <= 0.0,
                std::cmp::Ordering::Greater => y[0] >= 0.0 && y[1] == 0.0,
            },
            pick: |x, r| {
                let a: f64 = r.gen_range(0.0..2.0);
                match x[0].partial_cmp(&0.0).unwrap() {
                    std::cmp::Ordering::Less => vec![-a, 0.0],
                    std::cmp::Ordering::Equal => vec![r.gen_range(-2.0..2.0), -a],
                    std::cmp::Ordering::Greater => vec![a, 0.0],
                }
            },
            n: 1,
            m: 2,
        },
        SolutionMap {
            name: "example-4-5",
            member: |x, y| match x[0].partial_cmp(&0.0).unwrap() {
                std::cmp::Ordering::Greater => y[0] == -1.0,
                std::cmp::Ordering::Equal => (-1.0..=1.0).contains(&y[0]),
                std::cmp::Ordering::Less => y[0] == 1.0,
            },
            pick: |x, r| match x[0].partial_cmp(&0.0).unwrap() {
                std::cmp::Ordering::Greater => vec![-1.0],
                std::cmp::Ordering::Equal => vec![r.gen_range(-1.0..=1.0)],
                std::cmp::Ordering::Less => vec![1.0],
            },
            n: 2,
            m: 1,
        },
    ];
    let mut members = 0;
    for map in &maps {
        let model = builtin(map.name, 0).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for k in 0..50 {
            let x: Vec<f64> = (0..map.n)
                .map(|_| if k % 5 == 0 { 0.0 } else { rng.gen_range(-2.0..2.0) })
                .collect();
            let y = if k % 2 == 0 {
                (map.pick)(&x, &mut rng)
            } else {
                (0..map.m).map(|_| rng.gen_range(-2.0..2.0)).collect()
            };
            let expected = (map.member)(&x, &y);
            let d = dist_to_solutions(&model, &x, &y, &t).map_err(|e| e.to_string())?;
            let computed = d.sigma <= 1e-8;
            ensure(computed == expected, || {
                format!("{}: x = {x:?}, y = {y:?}, dist {:e}, expected membership {expected}", map.name, d.sigma)
            })?;
            members += expected as usize;
        }
    }
    Ok(format!("150 pairs agree ({members} members)"))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let forms: [(&str, fn(f64, f64) -> (f64, f64)); 3] = [
        ("example-4-2", |k, a| (-1.0 / k + a / (k * k), 1.0 / k + a / (k * k))),
        ("example-4-4", |k, a| (a / k.powi(4) - 1.0 / (k * k), a / k.powi(4) + 1.0 / (k * k))),
        ("example-4-5", |k, a| (a / k.powi(3) - 1.0 / (k * k), a / k.powi(3) + 1.0 / (k * k))),
    ];
    let mut worst = 0.0f64;
    for (name, closed) in forms {
        let (code, out) = run_cli(&["falsify", "--builtin", name]);
        ensure(code == cli::EXIT_FALSIFIED, || format!("{name}: exit {code}"))?;
        let report = Report::parse(&out).map_err(|e| e.to_string())?;
        ensure(report.get_result("path1.verdict") == Some("Falsified"), || {
            format!("{name}: witness path verdict {:?}", report.get_result("path1.verdict"))
        })?;
        let table = report.table("path1").ok_or("missing path1 table")?;
        let ts = table.column("t").unwrap();
        for k in 2..=20 {
            let row = ts
                .iter()
                .position(|t| t.parse::<f64>().unwrap() == 1.0 / k as f64)
                .ok_or_else(|| format!("{name}: no row for k = {k}"))?;
            for kappa in [1.0, 10.0, 100.0, 1000.0] {
                let col = table.column(&format!("penalized@{kappa:?}")).unwrap();
                let v: f64 = col[row].parse().unwrap();
                let (expect, scale) = closed(k as f64, kappa);
                let rel = (v - expect).abs() / scale;
                ensure(rel <= 1e-10, || format!("{name} k={k} κ={kappa}: {v} vs {expect}"))?;
                worst = worst.max(rel);
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 5.0, || format!("took {secs:.2} s"))?;
    Ok(format!("3 × Falsified (exit 2), max relative trace error {worst:e}, {secs:.2} s"))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let (code, out) = run_cli(&["falsify", "--builtin", "example-4-3-center"]);
    let report = Report::parse(&out).map_err(|e| e.to_string())?;
    ensure(code == cli::EXIT_OK && report.get_result("verdict") == Some("NotFalsified"), || {
        format!("falsify exit {code}, verdict {:?}", report.get_result("verdict"))
    })?;
    let samples: usize = report.get_result("sweep.samples").unwrap().parse().unwrap();
    let radii = report.table("sweep").unwrap().rows.len();
    ensure(samples >= 10_000 && radii == 4, || format!("{samples} samples over {radii} radii"))?;
    let (code, out) = run_cli(&["certify", "--builtin", "example-4-3-center", "--checks", "rank,isc"]);
    let report = Report::parse(&out).map_err(|e| e.to_string())?;
    ensure(code == cli::EXIT_OK, || format!("certify exit {code}"))?;
    ensure(report.get_result("rank.verdict") == Some("ConstantRankHolds"), || {
        format!("rank verdict {:?}", report.get_result("rank.verdict"))
    })?;
    ensure(report.get_result("isc.verdict") == Some("Consistent"), || {
        format!("isc verdict {:?}", report.get_result("isc.verdict"))
    })?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 10.0, || format!("took {secs:.2} s"))?;
    Ok(format!("NotFalsified over {samples} samples, ConstantRankHolds, Consistent, {secs:.2} s"))
}

fn criterion_5() -> Outcome {
    let t = Tolerances::default();
    let mut worst_gap = 0.0f64;
    let mut worst_m = 0.0f64;
    for seed in 0..25 {
        let model = builtin("fully-linear-random", seed).map_err(|e| e.to_string())?;
        ensure(model.n <= 2 && model.m <= 3 && model.q <= 4, || format!("seed {seed}: dimensions"))?;
        let cert = uwsm_modulus_for_model(&model, &t, DEFAULT_BASIS_CAP).map_err(|e| e.to_string())?;
        ensure(cert.modulus.is_finite(), || format!("seed {seed}: M = {}", cert.modulus))?;
        let x = model.candidate.clone().unwrap().x;
        let check = check_uwsm_inequality(&model, cert.modulus, &x, 0.5, 1000, 1e-7, seed, &t)
            .map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(check.samples == 1000, || format!("seed {seed}: only {} samples", check.samples))?;
        ensure(check.violations == 0, || {
            format!("seed {seed}: {} violations, max excess {:e}", check.violations, check.max_excess)
        })?;
        ensure(check.max_duality_gap <= 1e-8, || format!("seed {seed}: gap {:e}", check.max_duality_gap))?;
        worst_gap = worst_gap.max(check.max_duality_gap);
        worst_m = worst_m.max(cert.modulus);
    }
    Ok(format!("25 instances × 1000 samples, max M {worst_m}, max duality gap {worst_gap:e}"))
}

/// Max `|ξ₃|` over vertices of `Q(x)` for Example 4.2's data, found by
/// trying every pair of basic columns of the two equality rows.
fn brute_force_modulus(x: f64) -> f64 {
    // Columns (ξ₁, ξ₂, ξ₃, ξ₄₁, ξ₄₂); rows: ξ₁ - ξ₂ + cξ₃ - ξ₄₁ + ξ₄₂ = 0 and
    // -ξ₁ - ξ₂ = 1, c = -x².
    let c = -x * x;
    let cols = [[1.0, -1.0], [-1.0, -1.0], [c, 0.0], [-1.0, 0.0], [1.0, 0.0]];
    let mut best = 0.0f64;
    for i in 0..5 {
        for j in i + 1..5 {
            let a = Matrix2::new(cols[i][0], cols[j][0], cols[i][1], cols[j][1]);
            let Some(sol) = a.lu().solve(&Vector2::new(0.0, 1.0)) else {
                continue;
            };
            if sol.iter().all(|v| *v <= 1e-12) {
                let xi3 = if i == 2 { sol[0] } else if j == 2 { sol[1] } else { 0.0 };
                best = best.max(xi3.abs());
            }
        }
    }
    best
}

fn criterion_6() -> Outcome {
    let model = builtin("example-4-2", 0).map_err(|e| e.to_string())?;
    let xs = [1.0, 0.5, 0.25, 0.125];
    let samples: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
    let cert = uwsm_modulus_sweep(&model, &samples, &Tolerances::default(), DEFAULT_BASIS_CAP)
        .map_err(|e| e.to_string())?;
    let ms: Vec<f64> = cert.per_x_moduli.iter().map(|p| p.1).collect();
    for (&x, &m) in xs.iter().zip(&ms) {
        let oracle = brute_force_modulus(x);
        ensure((m - oracle).abs() <= 1e-9 * oracle, || format!("M({x}) = {m}, brute force {oracle}"))?;
        ensure((m - 1.0 / (x * x)).abs() <= 1e-9 * m, || format!("M({x}) = {m}, 1/x² = {}", 1.0 / (x * x)))?;
    }
    for w in ms.windows(2) {
        ensure(w[1] >= 4.0 * w[0] * (1.0 - 1e-12), || format!("growth {} -> {}", w[0], w[1]))?;
    }
    ensure(cert.growing, || "growth flag not set".into())?;
    Ok(format!("M(x) = {ms:?}"))
}

fn criterion_7() -> Outcome {
    let t = Tolerances::default();
    let m43 = builtin("example-4-3-center", 0).map_err(|e| e.to_string())?;
    let p = constant_rank_check(&m43, &Point::new(vec![2.0], vec![1.0]), 0.5, 50, 0, &t, DEFAULT_SUBSET_CAP)
        .map_err(|e| e.to_string())?;
    ensure(p.verdict == RankVerdict::ConstantRankHolds, || format!("4.3: {:?}", p.verdict))?;
    let m44 = builtin("example-4-4", 0).map_err(|e| e.to_string())?;
    let p = constant_rank_check(&m44, &Point::new(vec![0.0], vec![0.0, 0.0]), 0.5, 50, 0, &t, DEFAULT_SUBSET_CAP)
        .map_err(|e| e.to_string())?;
    match &p.verdict {
        RankVerdict::Violated { subset, .. } if subset == &vec![1] => {}
        v => return Err(format!("4.4: {v:?}")),
    }
    for seed in 0..25 {
        let model = builtin("fully-linear-random", seed).map_err(|e| e.to_string())?;
        let center = model.candidate.clone().unwrap();
        let p = constant_rank_check(&model, &center, 0.5, 50, seed, &t, DEFAULT_SUBSET_CAP)
            .map_err(|e| e.to_string())?;
        ensure(p.verdict == RankVerdict::ConstantRankHolds, || format!("seed {seed}: {:?}", p.verdict))?;
    }
    Ok("4.3 holds, 4.4 violated at J = {1}, 25 fully-linear instances hold".into())
}

fn random_lp(rng: &mut ChaCha8Rng) -> LpProblem {
    let n = rng.gen_range(1..=6);
    let rows = rng.gen_range(1..=6);
    let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
    let mut region = Polyhedron::free(n).with_signs(vec![calm_probe::lp::Sign::NonNegative; n]);
    // The first row caps the sum, which bounds the nonnegative orthant.
    region = region.with_ineq(vec![1.0; n], x0.iter().sum::<f64>() + 1.0);
    for _ in 1..rows {
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-3i32..=3) as f64).collect();
        let ax: f64 = a.iter().zip(&x0).map(|(p, q)| p * q).sum();
        if rng.gen_bool(0.2) {
            region = region.with_eq(a, ax);
        } else {
            region = region.with_ineq(a, ax + rng.gen_range(0.0..1.0));
        }
    }
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
    if rng.gen_bool(0.5) {
        LpProblem::minimize(c, region)
    } else {
        LpProblem::maximize(c, region)
    }
}

fn criterion_8() -> Outcome {
    let t = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for k in 0..200 {
        let p = random_lp(&mut rng);
        let out = solve_lp(&p, &t).map_err(|e| format!("LP {k}: {e}"))?;
        ensure(out.status == LpStatus::Optimal, || format!("LP {k}: {:?}", out.status))?;
        let verts = enumerate_vertices(&p.region, &t, DEFAULT_BASIS_CAP).map_err(|e| e.to_string())?;
        let values = verts.vertices.iter().map(|v| calm_probe::lp::dot(&p.objective, v));
        let best = match p.sense {
            Sense::Minimize => values.fold(f64::INFINITY, f64::min),
            Sense::Maximize => values.fold(f64::NEG_INFINITY, f64::max),
        };
        ensure((best - out.value).abs() <= 1e-8, || format!("LP {k}: simplex {} vs vertices {best}", out.value))?;
        let gap = (out.dual_value(&p) - out.value).abs();
        ensure(gap <= 1e-8, || format!("LP {k}: duality gap {gap:e}"))?;
        // Dual feasibility: reduced costs of the nonnegative variables.
        let sense = if p.sense == Sense::Minimize { 1.0 } else { -1.0 };
        for j in 0..p.objective.len() {
            let aty: f64 = p.region.eq_matrix.iter().zip(&out.eq_duals).map(|(r, y)| r[j] * y).sum::<f64>()
                + p.region.ineq_matrix.iter().zip(&out.ineq_duals).map(|(r, y)| r[j] * y).sum::<f64>();
            ensure(sense * (p.objective[j] - aty) >= -1e-8, || format!("LP {k}: reduced cost {j}"))?;
        }
        ensure(out.ineq_duals.iter().all(|&y| sense * y <= 1e-12), || format!("LP {k}: dual sign"))?;
        worst = worst.max((best - out.value).abs()).max(gap);
    }
    Ok(format!("200 LPs, max deviation {worst:e}"))
}

fn criterion_9() -> Outcome {
    let mut commands: Vec<Vec<&str>> = Vec::new();
    for name in calm_probe::builtins::NAMES {
        commands.push(vec!["phi-sweep", "--builtin", name, "--seed", "7"]);
        commands.push(vec!["falsify", "--builtin", name, "--seed", "7", "--samples", "500"]);
        commands.push(vec!["certify", "--builtin", name, "--seed", "7", "--samples", "200"]);
    }
    for args in &commands {
        let a = run_cli(args);
        let b = run_cli(args);
        ensure(!a.1.is_empty() && a == b, || format!("{} differs between runs", args.join(" ")))?;
    }
    Ok(format!("{} commands byte-identical", commands.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("φ reproduction", criterion_1),
        ("solution-map reproduction", criterion_2),
        ("counterexample falsification", criterion_3),
        ("positive case", criterion_4),
        ("fully-linear weak-sharp property suite", criterion_5),
        ("modulus-growth diagnosis", criterion_6),
        ("constant-rank discrimination", criterion_7),
        ("LP kernel oracle equivalence", criterion_8),
        ("determinism", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} ({name}): PASS - {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL - {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
