mod support;

#[test]
fn solvers_match_dense_matrices() {
    let err = support::dense_oracle_error();
    assert!(err <= 1e-9, "{err:e}");
}

#[test]
fn yoshida_representations() {
    let (phi, q) = support::yoshida_errors(16, 4.0, 32);
    assert!(phi <= 1e-3, "phi: {phi:e}");
    assert!(q <= 1e-3, "q: {q:e}");
    // Halving the steps roughly quadruples the quadrature error.
    let (phi16, q16) = support::yoshida_errors(16, 4.0, 16);
    assert!(phi16 / phi > 3.0 && phi16 / phi < 5.0, "{phi16:e} / {phi:e}");
    assert!(q16 / q > 3.0 && q16 / q < 5.0, "{q16:e} / {q:e}");
}

#[test]
fn g_kappa_lower_bound() {
    let c = support::g_kappa_constant();
    assert!(c > 1e-3, "{c}");
}
