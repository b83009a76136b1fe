use std::f64::consts::PI;

use charext::lattice::ball_certificate;
use charext::oracles::{
    delta_n, sin_pi, uniqueness_probe, verify_counterexample, wks_reconstruct, ProbeSettings, ProbeWindow,
    SampleSet1D, Tolerances, VERDICT_IDENTICAL, VERDICT_NON_UNIQUE, VERDICT_NOT_DENSITY,
};
use charext::perturbation::{build_counterexample, xi_eval, GridSettings, PerturbationParams};
use charext::{Axis, DensitySpec, GridFunction};
use num_complex::Complex64;
use proptest::prelude::*;

fn fourth(x: f64) -> f64 {
    let u = 0.5 * x;
    if u == 0.0 {
        1.0
    } else {
        (sin_pi(u) / (PI * u)).powi(4)
    }
}

fn fourth_prime(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let u = PI * x / 2.0;
    let s = u.sin() / u;
    let ds = (u.cos() * u - u.sin()) / (u * u) * PI / 2.0;
    4.0 * s.powi(3) * ds
}

#[test]
fn wks_fixture() {
    let s = SampleSet1D::from_fn(fourth, fourth_prime, 40).unwrap();
    assert!((wks_reconstruct(&s, 0.5).value - fourth(0.5)).abs() < 1e-6);
    assert!((fourth(0.5) - (2.0 * 2f64.sqrt() / PI).powi(4)).abs() < 1e-15);
    let worst = (0..=1000).map(|i| -5.0 + 0.01 * i as f64).map(|z| (wks_reconstruct(&s, z).value - fourth(z)).abs());
    assert!(worst.fold(0.0, f64::max) <= 1e-6);
}

#[test]
fn wks_error_shrinks_with_k() {
    let mut last = f64::INFINITY;
    for k in [10usize, 20, 40, 80] {
        let s = SampleSet1D::from_fn(fourth, fourth_prime, k).unwrap();
        let err = (wks_reconstruct(&s, 2.3).value - fourth(2.3)).abs();
        assert!(err <= last, "K={k}: {err} > {last}");
        last = err;
    }
}

#[test]
fn probe_negative_control_on_constructed_xi() {
    // ξ from a construction regime against the certificate lattice of a disjoint support
    let p = PerturbationParams::new(1, 4.0, 0.05);
    let cert = ball_certificate(2.0, 1.0, 1, 3.0).unwrap();
    let probe = uniqueness_probe(|x| xi_eval(x, &p), None, &cert.a, &cert.tau, 3.0, &ProbeWindow::default()).unwrap();
    assert!(probe.lattice_residual > 0.0);
    assert_eq!(probe.neighbourhood_radius, 0.1 * cert.tau[0]);
}

fn construct(n: usize, sigma: f64, grid: &GridSettings) -> (DensitySpec, charext::perturbation::Counterexample) {
    let d = DensitySpec::ball_bump(2.0, 1.0, n).normalize().unwrap();
    let ce = build_counterexample(&d, sigma, grid, &ProbeSettings::default(), &Tolerances::for_dim(n)).unwrap();
    (d, ce)
}

#[test]
fn identical_and_tampered_thetas() {
    let (d, ce) = construct(1, 4.0, &GridSettings::default());
    let tol = Tolerances::for_dim(1);
    let probes = ProbeSettings::default();

    let phi = GridFunction::from_fn(ce.theta.axes.clone(), |t| d.eval(t).unwrap()).unwrap();
    let zero = PerturbationParams { rho: 0.0, ..ce.params };
    let same = verify_counterexample(&d, &phi, &zero, &probes, &tol).unwrap();
    assert_eq!(same.sup_diff_on_vsigma, 0.0);
    assert_eq!(same.max_diff_inside_qsigma, 0.0);
    assert_eq!(same.verdict, VERDICT_IDENTICAL);

    let mut bad = ce.theta.clone();
    let mid = bad.len() / 2;
    bad.values[mid] = -bad.values[mid] - 1e-3;
    let r = verify_counterexample(&d, &bad, &ce.params, &probes, &tol).unwrap();
    assert_eq!(r.verdict, VERDICT_NOT_DENSITY);
}

#[test]
fn coarse_grid_is_rejected() {
    let d = DensitySpec::ball_bump(2.0, 1.0, 1).normalize().unwrap();
    let theta = GridFunction::from_fn(vec![Axis::symmetric(50.0, 64).unwrap()], |t| d.eval(t).unwrap()).unwrap();
    let p = PerturbationParams::new(1, 4.0, 0.0);
    let r = verify_counterexample(&d, &theta, &p, &ProbeSettings::default(), &Tolerances::for_dim(1));
    assert!(matches!(r, Err(charext::Error::Resolution(_))));
}

#[test]
fn verdict_is_stable_under_refinement() {
    let (_, coarse) = construct(1, 4.0, &GridSettings::default());
    let fine = GridSettings { points_per_axis: Some(1 << 17), ..GridSettings::default() };
    let (_, fine) = construct(1, 4.0, &fine);
    assert_eq!(coarse.report.verdict, VERDICT_NON_UNIQUE);
    assert_eq!(fine.report.verdict, coarse.report.verdict);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn delta_shift_identity(
        x0 in -3.0f64..3.0, y0 in -1.0f64..1.0, x1 in -3.0f64..3.0, y1 in -1.0f64..1.0,
        k0 in -5i64..=5, k1 in -5i64..=5,
    ) {
        let z = [Complex64::new(x0, y0), Complex64::new(x1, y1)];
        let shifted = [z[0] + k0 as f64, z[1] + k1 as f64];
        let sign = if (k0 + k1).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let (a, b) = (delta_n(&shifted), sign * delta_n(&z));
        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn zero_samples_reconstruct_zero(k in 1usize..60, z in -30.0f64..30.0) {
        prop_assert_eq!(wks_reconstruct(&SampleSet1D::zeros(k).unwrap(), z).value, 0.0);
    }
}
