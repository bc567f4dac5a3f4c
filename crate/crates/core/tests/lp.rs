use calm_probe::lp::{dot, enumerate_vertices, solve_lp, LpProblem, LpStatus, Polyhedron, Sense, Sign, DEFAULT_BASIS_CAP};
use calm_probe::Tolerances;
use proptest::prelude::*;

/// Bounded feasible LP built around a known point `x0 >= 0`.
fn bounded_lp() -> impl Strategy<Value = LpProblem> {
    (1usize..=4, 0usize..=3, any::<bool>()).prop_flat_map(|(n, rows, maximize)| {
        (
            proptest::collection::vec(0.0f64..2.0, n),
            proptest::collection::vec((proptest::collection::vec(-3i32..=3, n), 0.0f64..1.0, any::<bool>()), rows),
            proptest::collection::vec(-5.0f64..5.0, n),
        )
            .prop_map(move |(x0, rows, c)| {
                let mut region = Polyhedron::free(n)
                    .with_signs(vec![Sign::NonNegative; n])
                    .with_ineq(vec![1.0; n], x0.iter().sum::<f64>() + 1.0);
                for (a, slack, eq) in rows {
                    let a: Vec<f64> = a.into_iter().map(f64::from).collect();
                    let ax = dot(&a, &x0);
                    region = if eq { region.with_eq(a, ax) } else { region.with_ineq(a, ax + slack) };
                }
                if maximize {
                    LpProblem::maximize(c, region)
                } else {
                    LpProblem::minimize(c, region)
                }
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn strong_duality(p in bounded_lp()) {
        let t = Tolerances::default();
        let out = solve_lp(&p, &t).unwrap();
        prop_assert_eq!(out.status, LpStatus::Optimal);
        prop_assert!(p.region.contains(&out.primal, 1e-9));
        prop_assert!((dot(&p.objective, &out.primal) - out.value).abs() <= 1e-9);
        prop_assert!((out.dual_value(&p) - out.value).abs() <= 1e-8);
    }

    #[test]
    fn optimum_matches_best_vertex(p in bounded_lp()) {
        let t = Tolerances::default();
        let out = solve_lp(&p, &t).unwrap();
        let verts = enumerate_vertices(&p.region, &t, DEFAULT_BASIS_CAP).unwrap();
        prop_assert!(!verts.is_empty());
        let values = verts.vertices.iter().map(|v| dot(&p.objective, v));
        let best = match p.sense {
            Sense::Minimize => values.fold(f64::INFINITY, f64::min),
            Sense::Maximize => values.fold(f64::NEG_INFINITY, f64::max),
        };
        prop_assert!((best - out.value).abs() <= 1e-8);
        for v in &verts.vertices {
            prop_assert!(p.region.contains(v, 1e-9));
        }
    }
}

#[test]
fn infeasible_and_unbounded() {
    let t = Tolerances::default();
    let empty = Polyhedron::free(1).with_ineq(vec![1.0], -1.0).with_ineq(vec![-1.0], -1.0);
    let out = solve_lp(&LpProblem::minimize(vec![1.0], empty.clone()), &t).unwrap();
    assert_eq!(out.status, LpStatus::Infeasible);
    assert!(enumerate_vertices(&empty, &t, DEFAULT_BASIS_CAP).unwrap().polyhedron_empty);

    let ray = Polyhedron::free(1).with_signs(vec![Sign::NonNegative]);
    let out = solve_lp(&LpProblem::maximize(vec![1.0], ray), &t).unwrap();
    assert_eq!(out.status, LpStatus::Unbounded);
    assert_eq!(out.value, f64::INFINITY);
}
