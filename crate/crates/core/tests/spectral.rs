use std::f64::consts::PI;

use charext::perturbation::{xi_base, xi_base_hat};
use charext::spectral::{forward_ft, parseval_energies, poisson_check};
use charext::{Axis, GridFunction};
use num_complex::Complex64;
use proptest::prelude::*;

fn gaussian(t: &[f64]) -> f64 {
    (-0.5 * t.iter().map(|v| v * v).sum::<f64>()).exp()
}

#[test]
fn poisson_fixtures() {
    let sigma = 1.0;
    let xi = poisson_check(|t| xi_base(t[0], sigma), |w| Complex64::new(xi_base_hat(w[0], sigma), 0.0), &[6.0], &[0.3], 50)
        .unwrap();
    assert!(xi.abs_error <= 1e-8, "{xi:?}");
    let g = poisson_check(gaussian, |w| Complex64::new(2.0 * PI * gaussian(w), 0.0), &[1.0, 1.3], &[0.2, -0.4], 50)
        .unwrap();
    assert!(g.abs_error <= 1e-8, "{g:?}");
}

#[test]
fn poisson_error_decreases_with_terms() {
    let sigma = 1.0;
    let mut last = f64::INFINITY;
    for terms in [2usize, 4, 8, 16, 32, 64] {
        let r = poisson_check(|t| xi_base(t[0], sigma), |w| Complex64::new(xi_base_hat(w[0], sigma), 0.0), &[6.0], &[0.3], terms)
            .unwrap();
        assert!(r.abs_error <= last.max(1e-14), "terms={terms}: {} > {last}", r.abs_error);
        last = r.abs_error;
    }
}

#[test]
fn parseval_holds_for_gaussian() {
    let axes = vec![Axis::symmetric(12.0, 256).unwrap(); 2];
    let g = GridFunction::from_fn(axes, gaussian).unwrap();
    let (space, freq) = parseval_energies(&g).unwrap();
    assert!((space - PI).abs() < 1e-9 && (freq - space).abs() < 1e-9 * space);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn even_real_input_gives_real_even_spectrum(c in proptest::collection::vec(-1.0f64..1.0, 4)) {
        let axes = vec![Axis::symmetric(8.0, 64).unwrap()];
        let g = GridFunction::from_fn(axes, |t| {
            c.iter().enumerate().map(|(k, ck)| ck * (-(k as f64 + 1.0) * t[0] * t[0]).exp()).sum::<f64>()
        })
        .unwrap();
        let s = forward_ft(&g).unwrap();
        let scale = s.values.iter().map(|v| v.norm()).fold(1e-300, f64::max);
        // index 0 is the unpaired Nyquist bin
        for p in 1..64 {
            prop_assert!(s.values[p].im.abs() <= 1e-12 * scale);
            prop_assert!((s.values[p] - s.values[64 - p]).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn transform_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, shift in -2.0f64..2.0) {
        let axes = vec![Axis::symmetric(10.0, 128).unwrap()];
        let f = GridFunction::from_fn(axes.clone(), |t| gaussian(&[t[0] - shift])).unwrap();
        let g = GridFunction::from_fn(axes.clone(), |t| (-t[0].abs()).exp()).unwrap();
        let h = GridFunction::new(axes, f.values.iter().zip(&g.values).map(|(x, y)| a * x + b * y).collect()).unwrap();
        let (sf, sg, sh) = (forward_ft(&f).unwrap(), forward_ft(&g).unwrap(), forward_ft(&h).unwrap());
        for p in 0..128 {
            prop_assert!((sh.values[p] - (a * sf.values[p] + b * sg.values[p])).norm() < 1e-12);
        }
    }
}

#[test]
fn poisson_at_the_removable_points() {
    let sigma = 2.0;
    let r = poisson_check(
        |t| xi_base(t[0], sigma),
        |w| Complex64::new(xi_base_hat(w[0], sigma), 0.0),
        &[PI],
        &[PI / 2.0],
        50,
    )
    .unwrap();
    assert!((r.lhs - 2.0 / (PI * PI)).abs() < 1e-12);
    assert!((r.rhs.re - 2.0 / (PI * PI)).abs() < 1e-12);
    assert!(r.abs_error <= 1e-8);
}
