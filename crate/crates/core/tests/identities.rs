mod support;

#[test]
fn summation_by_parts() {
    let e = support::summation_by_parts_error();
    assert!(e <= 1e-12, "{e:e}");
}

#[test]
fn helmholtz_identity() {
    let r = support::helmholtz_residual();
    assert!(r <= 1e-7, "{r:e}");
}

#[test]
fn ellipticity_of_a_ht() {
    let (lo, hi, lambda) = support::ellipticity_range();
    assert!(lo >= lambda && hi <= 1.0, "[{lo}, {hi}]");
}

#[test]
fn semigroup_and_flux_propagation() {
    let (s, f) = support::semigroup_errors();
    assert!(s <= 1e-10, "{s:e}");
    assert!(f <= 1e-10, "{f:e}");
}

#[test]
fn mollifier_semigroup() {
    let e = support::mollifier_semigroup_error();
    assert!(e <= 1e-10, "{e:e}");
}
