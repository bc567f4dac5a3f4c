use calm_probe::builtins::{builtin, builtin_text, NAMES};
use calm_probe::model::{parse_model, parse_point, FormTag};

#[test]
fn builtins_round_trip_through_text() {
    for name in NAMES {
        for seed in [0, 5] {
            let model = builtin(name, seed).unwrap();
            let again = parse_model(&model.to_text()).unwrap();
            assert_eq!(again, model, "{name}");
            assert_eq!(again.to_text(), model.to_text(), "{name}");
        }
    }
}

#[test]
fn builtin_forms() {
    assert_eq!(builtin("example-4-2", 0).unwrap().form, FormTag::LinearInY);
    assert_eq!(builtin("example-4-5", 0).unwrap().form, FormTag::ObjectivePerturbed);
    for seed in 0..10 {
        assert_eq!(builtin("fully-linear-random", seed).unwrap().form, FormTag::FullyLinear);
    }
}

#[test]
fn random_instances_depend_on_seed() {
    let a = builtin_text("fully-linear-random", 1).unwrap();
    assert_eq!(a, builtin_text("fully-linear-random", 1).unwrap());
    assert_ne!(a, builtin_text("fully-linear-random", 2).unwrap());
}

#[test]
fn malformed_input_is_rejected() {
    assert!(builtin("nope", 0).is_err());
    assert!(parse_model("[dims]\nn=1 m=1 q=1\n[upper]\nF = x1 +\n").is_err());
    assert!(parse_model("[dims]\nn=1 m=1 q=1\n[upper]\nF = x2\n").is_err());
    assert!(parse_point("x = (1, 2").is_err());
}
