//! `J_k(x)` against values computed to 40 digits with mpmath.

use hecke_core::analytic::bessel_j;

const FROZEN: [(u32, f64, f64); 19] = [
    (0, 0.1, 0.997501562066040032),
    (0, 2.404825557695773, -6.1087652597367303971e-17),
    (1, 1.0, 0.44005058574493351596),
    (1, 7.5, 0.13524842757970550518),
    (1, 30.0, -0.11875106261662293652),
    (1, 1000.0, 0.0047283119070895239176),
    (3, 0.01, 2.0833203125325521682e-8),
    (5, 5.0, 0.26114054612017009005),
    (10, 3.0, 0.000012928351645715883778),
    (11, 0.5, 5.9418539622324614067e-15),
    (11, 12.0, 0.27041248255096448401),
    (11, 50.0, -0.018346678615815212491),
    (13, 200.0, -0.0558819488483958971),
    (25, 24.0, 0.10695477567374456476),
    (40, 10.0, 6.0308953123469066317e-21),
    (60, 90.0, -0.096702366626675045774),
    (100, 150.0, -0.015359526118405390629),
    (150, 40000.0, -0.0029509551437298224013),
    (199, 3000.0, -0.0092493027854158378155),
];

#[test]
fn matches_frozen_values() {
    let mut worst: f64 = 0.0;
    for (k, x, want) in FROZEN {
        let got = bessel_j(k, x).unwrap();
        let err = (got - want).abs();
        // Miller normalisation loses a few digits at x ~ 10^4
        assert!(err <= 1e-11 * want.abs() + 1e-15, "J_{k}({x}) = {got:e}, want {want:e}");
        worst = worst.max(err);
    }
    assert!(worst < 1e-13);
}

#[test]
fn rejects_out_of_range() {
    assert!(bessel_j(201, 1.0).is_err());
    assert!(bessel_j(1, -1.0).is_err());
    assert!(bessel_j(1, f64::NAN).is_err());
}
