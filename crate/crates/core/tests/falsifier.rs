use calm_probe::builtins::{builtin, EXAMPLE_4_2};
use calm_probe::falsifier::*;
use calm_probe::model::{parse_model, ParametricPath, Point, Schedule};
use calm_probe::Tolerances;

fn cfg(samples: usize) -> FalsifyConfig {
    FalsifyConfig {
        samples_per_radius: samples,
        seed: 5,
        ..FalsifyConfig::default()
    }
}

#[test]
fn center_verification_matches_examples() {
    let c = cfg(100);
    let m42 = builtin("example-4-2", 0).unwrap();
    assert_eq!(verify_center(&m42, &Point::new(vec![0.0], vec![0.0]), &c).unwrap(), CenterCheck::Ok);
    assert!(matches!(
        verify_center(&m42, &Point::new(vec![0.0], vec![0.5]), &c).unwrap(),
        CenterCheck::Rejected(_)
    ));
    assert!(matches!(
        verify_center(&m42, &Point::new(vec![1.0], vec![0.0]), &c).unwrap(),
        CenterCheck::Rejected(_)
    ));
    let m45 = builtin("example-4-5", 0).unwrap();
    assert_eq!(
        verify_center(&m45, &Point::new(vec![0.0, 0.0], vec![-1.0]), &c).unwrap(),
        CenterCheck::Ok
    );
    for name in ["example-4-3-center", "example-4-4"] {
        let m = builtin(name, 0).unwrap();
        let center = m.candidate.clone().unwrap();
        assert_eq!(verify_center(&m, &center, &c).unwrap(), CenterCheck::Ok, "{name}");
    }
}

#[test]
fn sweep_falsifies_local_minimizer() {
    let m = builtin("example-4-2", 0).unwrap();
    let v = required_kappa_sweep(&m, &Point::new(vec![0.0], vec![0.0]), &cfg(500)).unwrap();
    assert_eq!(v.verdict, Verdict::Falsified, "{:?}", v.per_radius.iter().map(|r| r.sup_required_kappa).collect::<Vec<_>>());
}

#[test]
fn sweep_spares_global_minimizer() {
    let m = builtin("example-4-3-center", 0).unwrap();
    let v = required_kappa_sweep(&m, &Point::new(vec![2.0], vec![1.0]), &cfg(500)).unwrap();
    assert_eq!(v.verdict, Verdict::NotFalsified);
    assert!(v.kappa_hat.is_finite() && v.kappa_hat >= 0.0);
}

#[test]
fn sample_with_higher_upper_objective_needs_no_penalty() {
    let m = builtin("example-4-2", 0).unwrap();
    // (0.1, 0): u = 0.01, F_gap = 0.1.
    let p = Point::new(vec![0.1], vec![0.0]);
    let u = m.eval_f(&p) + 0.01;
    let gap = -m.eval_F(&p);
    assert!((required_kappa(u, gap, 1e-9) - 10.0).abs() < 1e-9);
    assert_eq!(required_kappa(0.3, -0.2, 1e-9), 0.0);
}

fn path_of(model: &calm_probe::model::BilevelModel) -> ParametricPath {
    model.paths[0].clone()
}

#[test]
fn witness_paths_reproduce_closed_forms() {
    let t = Tolerances::default();
    // (closed form, magnitude of its terms)
    type Form = fn(f64, f64) -> (f64, f64);
    let cases: [(&str, Form); 3] = [
        ("example-4-2", |k, kappa| (-1.0 / k + kappa / (k * k), 1.0 / k + kappa / (k * k))),
        ("example-4-4", |k, kappa| (kappa / k.powi(4) - 1.0 / (k * k), kappa / k.powi(4) + 1.0 / (k * k))),
        ("example-4-5", |k, kappa| (kappa / k.powi(3) - 1.0 / (k * k), kappa / k.powi(3) + 1.0 / (k * k))),
    ];
    for (name, closed) in cases {
        let m = builtin(name, 0).unwrap();
        let center = m.candidate.clone().unwrap();
        let grid = [1.0, 3.0, 5.0, 1000.0];
        let v = path_falsify(&m, &center, &path_of(&m), &grid, &t).unwrap();
        assert_eq!(v.verdict, Verdict::Falsified, "{name}");
        let w = v.witness.unwrap();
        for k in 2..=20 {
            let row = w.trace.iter().find(|r| (r.t - 1.0 / k as f64).abs() < 1e-15).unwrap();
            for (kappa, val) in grid.iter().zip(&row.penalized) {
                let (expect, scale) = closed(k as f64, *kappa);
                assert!((val - expect).abs() <= 1e-10 * scale, "{name} k={k} κ={kappa}: {val} vs {expect}");
            }
        }
        let finite: Vec<f64> = w.trace.iter().filter(|r| r.feasible).map(|r| r.required_kappa).collect();
        assert!(finite.windows(2).all(|p| p[1] >= p[0]));
    }
}

#[test]
fn constant_path_needs_no_penalty() {
    let m = builtin("example-4-2", 0).unwrap();
    let center = Point::new(vec![0.0], vec![0.0]);
    let path = ParametricPath::constant(&center, Schedule::default());
    let v = path_falsify(&m, &center, &path, &DEFAULT_KAPPA_GRID, &Tolerances::default()).unwrap();
    assert_eq!(v.verdict, Verdict::NotFalsified);
    assert!(v.witness.unwrap().trace.iter().all(|r| r.required_kappa == 0.0));
}

#[test]
fn infeasible_path_is_an_error() {
    let m = builtin("example-4-2", 0).unwrap();
    let center = Point::new(vec![0.0], vec![0.0]);
    let path = ParametricPath::constant(&Point::new(vec![0.0], vec![5.0]), Schedule::default());
    assert!(matches!(
        path_falsify(&m, &center, &path, &DEFAULT_KAPPA_GRID, &Tolerances::default()),
        Err(calm_probe::Error::PathInfeasibleEverywhere)
    ));
}

#[test]
fn penalized_identity_and_u_nonnegativity() {
    let m = builtin("example-4-2", 0).unwrap();
    let center = Point::new(vec![0.0], vec![0.0]);
    let v = required_kappa_sweep(&m, &center, &cfg(300)).unwrap();
    let center_f = m.eval_F(&center);
    for r in &v.per_radius {
        let s = r.worst.as_ref().unwrap();
        assert!(s.u >= -1e-9);
        for kappa in DEFAULT_KAPPA_GRID {
            let direct = m.eval_F(&s.point) + kappa * s.u;
            let rebuilt = center_f - s.f_gap + kappa * s.u;
            assert!((direct - rebuilt).abs() <= 1e-12 * direct.abs().max(1.0));
        }
    }
}

#[test]
fn scaling_upper_objective_scales_kappa() {
    let base = builtin("example-4-2", 0).unwrap();
    let center = Point::new(vec![0.0], vec![0.0]);
    let c = cfg(300);
    let v = required_kappa_sweep(&base, &center, &c).unwrap();
    for lambda in ["2", "0.5"] {
        let text = EXAMPLE_4_2.replace("F = -x1 + y1", &format!("F = {lambda}*(-x1 + y1)"));
        let scaled = parse_model(&text).unwrap();
        let w = required_kappa_sweep(&scaled, &center, &c).unwrap();
        let l: f64 = lambda.parse().unwrap();
        assert_eq!(w.verdict, v.verdict);
        assert_eq!(w.kappa_hat, l * v.kappa_hat);
        for (a, b) in v.per_radius.iter().zip(&w.per_radius) {
            assert_eq!(b.sup_required_kappa, l * a.sup_required_kappa);
        }
    }
}

#[test]
fn falsify_combines_stages() {
    let m = builtin("example-4-5", 0).unwrap();
    let center = m.candidate.clone().unwrap();
    let out = falsify(&m, &center, &m.paths, &cfg(300)).unwrap();
    assert_eq!(out.verdict, Verdict::Falsified);

    let m = builtin("example-4-2", 0).unwrap();
    let out = falsify(&m, &Point::new(vec![0.0], vec![0.5]), &[], &cfg(50)).unwrap();
    assert_eq!(out.verdict, Verdict::CenterRejected);
}
