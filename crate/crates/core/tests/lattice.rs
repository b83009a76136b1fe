use std::f64::consts::PI;

use charext::lattice::{ball_certificate, find_certificate, verify_certificate, SearchGrid};
use charext::SupportSpec;
use proptest::prelude::*;

fn ball_margin_ok(q: f64, delta: f64, n: usize, sigma: f64) {
    let cert = ball_certificate(q, delta, n, sigma).unwrap_or_else(|| panic!("none for q={q} δ={delta} n={n} σ={sigma}"));
    let check = verify_certificate(&SupportSpec::lq_ball(q, delta, n), sigma, &cert.a, &cert.tau).unwrap();
    assert!(check.valid && check.margin > 0.0, "q={q} δ={delta} n={n} σ={sigma}: {check:?}");
}

#[test]
fn spec_examples() {
    let tri = SupportSpec::interval(-1.0, 1.0);
    let c = verify_certificate(&tri, 3.0, &[1.045], &[2.09]).unwrap();
    assert!(c.valid);
    assert!((c.margin - 0.045).abs() < 1e-12);
    let ball = SupportSpec::lq_ball(2.0, 1.0, 2);
    let c = verify_certificate(&ball, 4.0, &[0.75, 0.75], &[1.5, 1.5]).unwrap();
    assert!(c.valid && c.margin > 0.0);
    assert!(ball_certificate(2.0, 1.0, 2, 4.6).is_none());
}

#[test]
fn triangular_search() {
    let tri = SupportSpec::interval(-1.0, 1.0);
    for sigma in [1.0, 2.0, 3.0] {
        let cert = find_certificate(&tri, sigma, SearchGrid::default_for(1)).unwrap().expect("certificate");
        assert!(verify_certificate(&tri, sigma, &cert.a, &cert.tau).unwrap().valid);
        assert!(cert.tau[0] > 2.0 && cert.tau[0] * sigma <= 2.0 * PI + 1e-12);
    }
    assert!(find_certificate(&tri, 3.2, SearchGrid::default_for(1)).unwrap().is_none());
}

#[test]
fn ball_search_rediscovers_a_certificate() {
    let ball = SupportSpec::lq_ball(2.0, 1.0, 2);
    let cert = find_certificate(&ball, 4.0, SearchGrid::default_for(2)).unwrap().expect("certificate");
    let check = verify_certificate(&ball, 4.0, &cert.a, &cert.tau).unwrap();
    assert!(check.valid && check.margin > 0.0);
}

#[test]
fn ball_recipe_on_a_parameter_sweep() {
    for q in [2.0, 3.0, 4.0, f64::INFINITY] {
        for n in 1..=3usize {
            let threshold = PI * (n as f64).powf(if q.is_infinite() { 0.0 } else { 1.0 / q });
            for delta in [0.25, 1.0, 2.5] {
                for frac in [0.2, 0.6, 0.9, 0.99] {
                    ball_margin_ok(q, delta, n, frac * threshold / delta);
                }
                assert!(ball_certificate(q, delta, n, threshold / delta).is_none());
                assert!(ball_certificate(q, delta, n, 1.2 * threshold / delta).is_none());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ball_recipe_succeeds_below_threshold(
        q in prop_oneof![Just(2.0), 2.0f64..8.0, Just(f64::INFINITY)],
        n in 1usize..=3,
        delta in 0.1f64..3.0,
        frac in 0.05f64..=0.99,
    ) {
        let threshold = PI * (n as f64).powf(if q.is_infinite() { 0.0 } else { 1.0 / q });
        ball_margin_ok(q, delta, n, frac * threshold / delta);
    }

    #[test]
    fn shift_by_lattice_vector_is_invariant(
        a0 in -2.0f64..2.0, a1 in -2.0f64..2.0,
        t0 in 0.3f64..2.0, t1 in 0.3f64..2.0,
        w0 in -3i32..=3, w1 in -3i32..=3,
    ) {
        let support = SupportSpec::lq_ball(2.0, 1.0, 2);
        let sigma = 2.0 * PI / t0.max(t1);
        let base = verify_certificate(&support, sigma, &[a0, a1], &[t0, t1]).unwrap();
        let shifted = [a0 + t0 * w0 as f64, a1 + t1 * w1 as f64];
        let moved = verify_certificate(&support, sigma, &shifted, &[t0, t1]).unwrap();
        prop_assert_eq!(base.valid, moved.valid);
        prop_assert!((base.margin - moved.margin).abs() < 1e-9);
    }

    #[test]
    fn permutation_is_invariant(
        a0 in -2.0f64..2.0, a1 in -2.0f64..2.0,
        t0 in 0.3f64..2.5, t1 in 0.3f64..2.5,
    ) {
        let support = SupportSpec::lq_ball(3.0, 1.2, 2);
        let sigma = 2.0 * PI / t0.max(t1);
        let one = verify_certificate(&support, sigma, &[a0, a1], &[t0, t1]).unwrap();
        let two = verify_certificate(&support, sigma, &[a1, a0], &[t1, t0]).unwrap();
        prop_assert_eq!(one.valid, two.valid);
        prop_assert!((one.margin - two.margin).abs() < 1e-12);
    }
}
