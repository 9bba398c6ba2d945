use nlgreen::elliptic::{
    agm_iterations, jacobi_am, jacobi_sn_cn_dn, oracle_am, oracle_jacobi, EllipticParam,
};
use proptest::prelude::*;

const PARAMS: [f64; 7] = [-4.0, -1.0, 0.0, 0.3, 0.9, 1.0, 2.0];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn pythagorean_identities(u in -30.0f64..30.0, m in -10.0f64..10.0) {
        let (sn, cn, dn) = jacobi_sn_cn_dn(u, m).unwrap();
        prop_assert!((sn * sn + cn * cn - 1.0).abs() <= 1e-11);
        prop_assert!((dn * dn + m * sn * sn - 1.0).abs() <= 1e-11 * m.abs().max(1.0));
    }

    #[test]
    fn parity(u in -20.0f64..20.0, m in prop::sample::select(PARAMS.to_vec())) {
        let (s1, c1, d1) = jacobi_sn_cn_dn(u, m).unwrap();
        let (s2, c2, d2) = jacobi_sn_cn_dn(-u, m).unwrap();
        prop_assert!((s1 + s2).abs() <= 1e-15 * s1.abs().max(1.0));
        prop_assert!((c1 - c2).abs() <= 1e-15);
        prop_assert!((d1 - d2).abs() <= 1e-15 * d1.abs().max(1.0));
        prop_assert!((jacobi_am(u, m).unwrap() + jacobi_am(-u, m).unwrap()).abs() <= 1e-13 * u.abs().max(1.0));
    }

    #[test]
    fn amplitude_consistent(u in -20.0f64..20.0, m in -5.0f64..5.0) {
        let (sn, cn, _) = jacobi_sn_cn_dn(u, m).unwrap();
        let am = jacobi_am(u, m).unwrap();
        prop_assert!((am.sin() - sn).abs() <= 1e-11);
        prop_assert!((am.cos() - cn).abs() <= 1e-11);
    }

    #[test]
    fn reduction_round_trips(m in -50.0f64..50.0, u in -10.0f64..10.0) {
        let p = EllipticParam::new(m).unwrap();
        prop_assert!((0.0..=1.0).contains(&p.canonical()));
        prop_assert!((p.restore_parameter(p.canonical()) - m).abs() <= 1e-12 * m.abs().max(1.0));
        prop_assert!((p.restore_argument(p.reduce_argument(u)) - u).abs() <= 1e-12 * u.abs().max(1.0));
    }

    #[test]
    fn agm_converges_quickly(m in 0.0f64..(1.0 - 1e-12)) {
        prop_assert!(agm_iterations(m) <= 12);
    }
}

#[test]
fn origin_is_zero_one_one() {
    for m in PARAMS {
        assert_eq!(jacobi_sn_cn_dn(0.0, m).unwrap(), (0.0, 1.0, 1.0));
        assert_eq!(jacobi_am(0.0, m).unwrap(), 0.0);
    }
    assert_eq!(jacobi_am(0.0, 0.5).unwrap(), 0.0);
}

#[test]
fn zero_parameter_is_circular() {
    for u in [0.3, 1.7] {
        assert!((jacobi_am(u, 0.0).unwrap() - u).abs() <= 1e-15);
    }
}

#[test]
fn amplitude_against_oracle() {
    let got = jacobi_am(1.0, 0.7).unwrap();
    let want = oracle_am(1.0, 0.7, 1e-13).unwrap();
    assert!((got - want).abs() <= 1e-10, "{got} vs {want}");
    // F(φ | 0.7) = 1 solved at 30 digits
    assert!((got - 0.905_546_084_463_418_8).abs() <= 1e-13, "{got}");
}

#[test]
fn negative_parameter_against_oracle() {
    let got = jacobi_sn_cn_dn(1.2, -1.0).unwrap();
    let want = oracle_jacobi(1.2, -1.0, 1e-13).unwrap();
    for (a, b) in [(got.0, want.0), (got.1, want.1), (got.2, want.2)] {
        assert!((a - b).abs() <= 1e-10, "{got:?} vs {want:?}");
    }
    let frozen = (
        0.987_748_034_924_404_3,
        0.156_057_103_340_340_9,
        1.405_576_814_157_455_5,
    );
    for (a, b) in [(got.0, frozen.0), (got.1, frozen.1), (got.2, frozen.2)] {
        assert!((a - b).abs() <= 1e-13, "{got:?}");
    }
}

#[test]
fn reciprocal_parameter_against_oracle() {
    let got = jacobi_sn_cn_dn(0.6, 2.0).unwrap();
    let want = oracle_jacobi(0.6, 2.0, 1e-13).unwrap();
    for (a, b) in [(got.0, want.0), (got.1, want.1), (got.2, want.2)] {
        assert!((a - b).abs() <= 1e-10, "{got:?} vs {want:?}");
    }
    let frozen = (
        0.509_620_562_941_298_9,
        0.860_399_257_221_549_2,
        0.693_234_277_610_958_3,
    );
    for (a, b) in [(got.0, frozen.0), (got.1, frozen.1), (got.2, frozen.2)] {
        assert!((a - b).abs() <= 1e-13, "{got:?}");
    }
}

#[test]
fn unit_parameter_is_hyperbolic() {
    for u in [-2.0f64, 0.4, 3.0] {
        let (sn, cn, dn) = jacobi_sn_cn_dn(u, 1.0).unwrap();
        assert!((sn - u.tanh()).abs() <= 1e-14);
        assert!((cn - 1.0 / u.cosh()).abs() <= 1e-14);
        assert!((dn - 1.0 / u.cosh()).abs() <= 1e-14);
    }
}
