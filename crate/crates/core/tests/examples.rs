//! Every example runs to completion.

#[path = "../examples/phi_sweep.rs"]
mod phi_sweep;

#[path = "../examples/lp_and_vertices.rs"]
mod lp_and_vertices;

#[path = "../examples/distance_certificate.rs"]
mod distance_certificate;

#[path = "../examples/uwsm_modulus.rs"]
mod uwsm_modulus;

#[path = "../examples/ratio_probes.rs"]
mod ratio_probes;

#[path = "../examples/constant_rank.rs"]
mod constant_rank;

#[path = "../examples/inner_semicontinuity.rs"]
mod inner_semicontinuity;

#[path = "../examples/falsify_counterexamples.rs"]
mod falsify_counterexamples;

#[path = "../examples/reports.rs"]
mod reports;

#[path = "../examples/custom_model.rs"]
mod custom_model;


#[test]
fn runs_phi_sweep() {
    phi_sweep::main().unwrap();
}

#[test]
fn runs_lp_and_vertices() {
    lp_and_vertices::main().unwrap();
}

#[test]
fn runs_distance_certificate() {
    distance_certificate::main().unwrap();
}

#[test]
fn runs_uwsm_modulus() {
    uwsm_modulus::main().unwrap();
}

#[test]
fn runs_ratio_probes() {
    ratio_probes::main().unwrap();
}

#[test]
fn runs_constant_rank() {
    constant_rank::main().unwrap();
}

#[test]
fn runs_inner_semicontinuity() {
    inner_semicontinuity::main().unwrap();
}

#[test]
fn runs_falsify_counterexamples() {
    falsify_counterexamples::main().unwrap();
}

#[test]
fn runs_reports() {
    reports::main().unwrap();
}

#[test]
fn runs_custom_model() {
    custom_model::main().unwrap();
}
