//! Numerical uniqueness machinery and the end-to-end counterexample
//! verifier.
//!
//! * [`delta_n`]: `Δ_n(z) = ∏ sin(π z_k)`, vanishing exactly on the integer
//!   hyperplanes.
//! * [`wks_reconstruct`]: the sampling series with derivatives for functions
//!   band-limited to `[-2π, 2π]`.
//! * [`uniqueness_probe`]: checks whether a function vanishes to first order,
//!   without sign change, on a shifted lattice.
//! * [`verify_counterexample`]: the full check of a constructed second density.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::densities::{default_tol_quad, CharFn, DensitySpec, QuadratureSettings};
use crate::error::{Error, Result};
use crate::grid::{Axis, GridFunction};
use crate::perturbation::{xi_eval, xi_integral, closed_form_integral, PerturbationParams};
use crate::quadrature::pairwise_sum;
use crate::spectral::{band_limit_check, transform_at};

/// `sin(πx)`, exactly zero at integers.
pub fn sin_pi(x: f64) -> f64 {
    if x == x.round() {
        return 0.0;
    }
    let r = x - 2.0 * (0.5 * x).round();
    (PI * r).sin()
}

/// `cos(πx)`, exactly zero at half-integers.
pub fn cos_pi(x: f64) -> f64 {
    if (x - 0.5) == (x - 0.5).round() {
        return 0.0;
    }
    let r = x - 2.0 * (0.5 * x).round();
    (PI * r).cos()
}

/// `Δ_n(z) = ∏_k sin(π z_k)` for complex `z`. Exactly zero iff some `z_k` is
/// an integer.
pub fn delta_n(z: &[Complex64]) -> Complex64 {
    z.iter().fold(Complex64::new(1.0, 0.0), |acc, zk| {
        let (x, y) = (zk.re, zk.im);
        let s = if y == 0.0 {
            Complex64::new(sin_pi(x), 0.0)
        } else {
            Complex64::new(sin_pi(x) * (PI * y).cosh(), cos_pi(x) * (PI * y).sinh())
        };
        acc * s
    })
}

/// Values and first derivatives at the integers `-K..=K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet1D {
    pub k_max: usize,
    pub values: Vec<f64>,
    pub derivatives: Vec<f64>,
}

impl SampleSet1D {
    pub fn new(k_max: usize, values: Vec<f64>, derivatives: Vec<f64>) -> Result<Self> {
        let len = 2 * k_max + 1;
        if k_max < 1 {
            return Err(Error::InvalidParameter("sample radius K must be at least 1".into()));
        }
        if values.len() != len || derivatives.len() != len {
            return Err(Error::InvalidParameter(format!("expected {len} samples and derivatives")));
        }
        if values.iter().chain(&derivatives).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("samples must be finite".into()));
        }
        Ok(Self { k_max, values, derivatives })
    }

    pub fn from_fn<F: Fn(f64) -> f64, D: Fn(f64) -> f64>(f: F, df: D, k_max: usize) -> Result<Self> {
        let ks = (-(k_max as i64)..=k_max as i64).map(|k| k as f64);
        Self::new(k_max, ks.clone().map(&f).collect(), ks.map(df).collect())
    }

    pub fn zeros(k_max: usize) -> Result<Self> {
        Self::new(k_max, vec![0.0; 2 * k_max + 1], vec![0.0; 2 * k_max + 1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Reconstruction {
    pub value: f64,
    /// `|z| > K/2`: truncation error is no longer controlled.
    pub outside_guard: bool,
}

/// Truncated series `Σ_k (F(k) + F'(k)(z − k)) sinc²(z − k)` with
/// `sinc(u) = sin(πu)/(πu)`.
pub fn wks_reconstruct(s: &SampleSet1D, z: f64) -> Reconstruction {
    let k_max = s.k_max as i64;
    let terms: Vec<f64> = (-k_max..=k_max)
        .enumerate()
        .map(|(i, k)| {
            let u = z - k as f64;
            let sinc = if u == 0.0 { 1.0 } else { sin_pi(u) / (PI * u) };
            (s.values[i] + s.derivatives[i] * u) * sinc * sinc
        })
        .collect();
    Reconstruction { value: pairwise_sum(&terms), outside_guard: z.abs() > 0.5 * s.k_max as f64 }
}

/// Lattice window and sampling for [`uniqueness_probe`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeWindow {
    /// Lattice indices `|ω_k| ≤ window` are examined.
    pub window: usize,
    /// Random corroboration points in the window box.
    pub probes: usize,
    pub seed: u64,
    /// Sign-neighbourhood radius as a fraction of `min τ_k`.
    pub neighbourhood_fraction: f64,
}

impl Default for ProbeWindow {
    fn default() -> Self {
        Self { window: 8, probes: 512, seed: 42, neighbourhood_fraction: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct UniquenessProbe {
    /// max over lattice points of `|F| + ‖∇F‖₂`.
    pub lattice_residual: f64,
    /// Lattice points whose neighbourhood holds both signs of F.
    pub sign_violations: usize,
    pub lattice_points: usize,
    /// max |F| over random points in the window box.
    pub max_abs_random: f64,
    pub neighbourhood_radius: f64,
}

/// Analytic gradient for [`uniqueness_probe`].
pub type Gradient<'a> = &'a (dyn Fn(&[f64]) -> Vec<f64> + Sync);

/// Evaluates the hypotheses of the lattice uniqueness statement for `f`:
/// zero value and gradient on `a + τZ^n`, and no sign change near each
/// lattice point. When both residuals vanish, `f` should vanish everywhere,
/// which `max_abs_random` corroborates. Without an analytic gradient,
/// central differences with step `1e-5 min τ_k` are used.
pub fn uniqueness_probe<F>(
    f: F,
    gradient: Option<Gradient<'_>>,
    a: &[f64],
    tau: &[f64],
    sigma: f64,
    window: &ProbeWindow,
) -> Result<UniquenessProbe>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = a.len();
    if n == 0 || tau.len() != n || tau.iter().any(|&t| !(t > 0.0)) || !(sigma > 0.0) {
        return Err(Error::InvalidParameter("need matching a, τ with τ_k > 0 and σ > 0".into()));
    }
    if let Some(t) = tau.iter().find(|&&t| t * sigma > 2.0 * PI * (1.0 + 1e-12)) {
        return Err(Error::Hypothesis(format!("spacing hypothesis violated: τσ = {:.6} > 2π", t * sigma)));
    }
    let tau_min = tau.iter().copied().fold(f64::INFINITY, f64::min);
    let step = 1e-5 * tau_min;
    let radius = window.neighbourhood_fraction * tau_min;
    let side = 2 * window.window + 1;
    let total = side.pow(n as u32);
    let stencil: Vec<Vec<f64>> = (0..3usize.pow(n as u32))
        .map(|c| {
            let mut c = c;
            (0..n)
                .map(|_| {
                    let d = (c % 3) as f64 - 1.0;
                    c /= 3;
                    d * radius
                })
                .collect()
        })
        .collect();

    let per_point: Vec<(f64, bool)> = (0..total)
        .into_par_iter()
        .map(|cell| {
            let mut c = cell;
            let p: Vec<f64> = (0..n)
                .map(|k| {
                    let w = (c % side) as f64 - window.window as f64;
                    c /= side;
                    a[k] + tau[k] * w
                })
                .collect();
            let value = f(&p);
            let grad = match gradient {
                Some(g) => g(&p),
                None => (0..n)
                    .map(|k| {
                        let mut hi = p.clone();
                        let mut lo = p.clone();
                        hi[k] += step;
                        lo[k] -= step;
                        (f(&hi) - f(&lo)) / (2.0 * step)
                    })
                    .collect(),
            };
            let grad_norm = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
            let (mut pos, mut neg) = (false, false);
            for d in &stencil {
                let q: Vec<f64> = p.iter().zip(d).map(|(x, dx)| x + dx).collect();
                let v = f(&q);
                pos |= v > 0.0;
                neg |= v < 0.0;
            }
            (value.abs() + grad_norm, pos && neg)
        })
        .collect();
    let lattice_residual = per_point.iter().map(|r| r.0).fold(0.0, f64::max);
    let sign_violations = per_point.iter().filter(|r| r.1).count();

    let mut rng = ChaCha8Rng::seed_from_u64(window.seed);
    let span: Vec<f64> = tau.iter().map(|t| t * window.window as f64).collect();
    let points: Vec<Vec<f64>> = (0..window.probes)
        .map(|_| a.iter().zip(&span).map(|(c, s)| c + rng.random_range(-1.0..=1.0) * s).collect())
        .collect();
    let max_abs_random = points.par_iter().map(|p| f(p).abs()).reduce(|| 0.0, f64::max);

    Ok(UniquenessProbe { lattice_residual, sign_violations, lattice_points: total, max_abs_random, neighbourhood_radius: radius })
}

/// Tolerances of the verification suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Tolerances {
    pub quad: f64,
    pub mass: f64,
    /// Nonnegativity slack relative to max φ.
    pub pos: f64,
    pub band: f64,
    pub agree: f64,
}

impl Tolerances {
    pub fn for_dim(n: usize) -> Self {
        Self { quad: default_tol_quad(n), mass: 1e-6, pos: 1e-9, band: 1e-3, agree: 1e-4 }
    }
}

/// Where the characteristic functions are compared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProbeSettings {
    /// Stratified random probes in the shell `σ < max|x_k| ≤ 4σ`.
    pub shell: usize,
    /// Probes per half-axis ray in the same shell.
    pub ray: usize,
    /// Uniform probes inside the cube `[-σ, σ]^n`.
    pub inside: usize,
    pub seed: u64,
    pub quadrature: QuadratureSettings,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        Self { shell: 512, ray: 16, inside: 128, seed: 42, quadrature: QuadratureSettings::default() }
    }
}

/// Outer edge of the probe shell in units of σ.
pub const SHELL_OUTER: f64 = 4.0;

impl ProbeSettings {
    /// Probe points on `V_σ` followed by probe points inside the cube.
    pub fn points(&self, n: usize, sigma: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let width = (SHELL_OUTER - 1.0) * sigma;
        let mut outside = Vec::with_capacity(self.shell + 2 * n * self.ray);
        for i in 0..self.shell {
            // stratified in the sup-norm radius, uniform on the cube surface
            let level = sigma + width * (i as f64 + rng.random_range(f64::EPSILON..=1.0)) / self.shell as f64;
            let face = rng.random_range(0..n);
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let x: Vec<f64> =
                (0..n).map(|k| if k == face { sign * level } else { rng.random_range(-level..=level) }).collect();
            outside.push(x);
        }
        for k in 0..n {
            for sign in [1.0, -1.0] {
                for j in 1..=self.ray {
                    let mut x = vec![0.0; n];
                    x[k] = sign * (sigma + width * j as f64 / self.ray as f64);
                    outside.push(x);
                }
            }
        }
        let inside = (0..self.inside).map(|_| (0..n).map(|_| rng.random_range(-sigma..=sigma)).collect()).collect();
        (outside, inside)
    }
}

pub const VERDICT_NON_UNIQUE: &str = "non-unique extension constructed";
pub const VERDICT_IDENTICAL: &str = "extensions identical";
pub const VERDICT_NOT_DENSITY: &str = "invalid: not a density";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerificationReport {
    pub sigma: f64,
    pub n: usize,
    /// ∫ξ over R^n: extrapolated tensor quadrature of the parametric ξ,
    /// corrected by any deviation of the gridded ξ from it.
    pub integral_xi: f64,
    /// Closed-form moment chain for the same parameters.
    pub integral_xi_closed_form: f64,
    /// Trapezoid sum of the gridded ξ (zero frequency of its transform);
    /// truncated to the grid.
    pub integral_xi_grid: f64,
    pub band_residual: f64,
    pub min_theta: f64,
    /// f(0) from the density quadrature.
    pub mass_phi: f64,
    pub mass_theta: f64,
    pub sup_diff_on_vsigma: f64,
    pub max_diff_inside_qsigma: f64,
    pub failures: Vec<String>,
    pub verdict: String,
}

/// Grid requirements: the grid must cover the support's bounding box and
/// resolve every probe, `π/h_k > SHELL_OUTER σ`. This also keeps the aliases
/// `x + 2πm/h` (m ≠ 0) of each probe outside the band.
pub fn check_resolution(density: &DensitySpec, axes: &[Axis], sigma: f64) -> Result<()> {
    let mut problems = Vec::new();
    if axes.len() != density.dim {
        problems.push(format!("grid dimension {} differs from density dimension {}", axes.len(), density.dim));
    }
    if let Some(bbox) = density.support().bounding_box {
        for (k, (axis, (lo, hi))) in axes.iter().zip(bbox).enumerate() {
            if axis.min > lo || axis.max < hi {
                problems.push(format!("axis {k} [{}, {}] does not cover the support [{lo}, {hi}]", axis.min, axis.max));
            }
        }
    }
    for (k, axis) in axes.iter().enumerate() {
        let limit = PI / (SHELL_OUTER * sigma);
        if axis.spacing() >= limit {
            problems.push(format!(
                "axis {k} spacing {:.4e} too coarse for V_σ probes (needs < {limit:.4e})",
                axis.spacing()
            ));
        }
        if !axis.is_symmetric() {
            problems.push(format!("axis {k} is not symmetric about 0"));
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Error::Resolution(problems.join("; ")))
    }
}

/// Checks that `theta` is a probability density whose characteristic
/// function matches that of `density` on `V_σ` and differs from it inside
/// the cube.
///
/// The perturbation is recovered from the grid as `ξ = φ − ϑ`. Its transform
/// is computed by direct trapezoid sums at the probe points, and the
/// alternative characteristic function is `ĝ = f − ξ̂` with `f` from the
/// density quadrature.
pub fn verify_counterexample(
    density: &DensitySpec,
    theta: &GridFunction<f64>,
    params: &PerturbationParams,
    probes: &ProbeSettings,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    if !density.is_normalized() {
        return Err(Error::Unnormalized);
    }
    params.validate()?;
    let sigma = params.sigma;
    let n = density.dim;
    check_resolution(density, &theta.axes, sigma)?;

    let phi = GridFunction::from_fn(theta.axes.clone(), |t| density.value(t))?;
    let xi = GridFunction::new(theta.axes.clone(), phi.values.iter().zip(&theta.values).map(|(p, t)| p - t).collect())?;
    let model = GridFunction::from_fn(theta.axes.clone(), |t| xi_eval(t, params))?;

    let min_theta = theta.min_value();
    let max_phi = phi.max_abs();
    let deviation = GridFunction::new(
        theta.axes.clone(),
        xi.values.iter().zip(&model.values).map(|(a, b)| a - b).collect(),
    )?
    .trapezoid_integral();
    let integral_xi = xi_integral(params).value + deviation;
    let integral_xi_grid = xi.trapezoid_integral();

    let engine = CharFn::new(density, &probes.quadrature)?;
    let mass_phi = engine.mass();
    let mass_theta = mass_phi - integral_xi;
    let band_residual = band_limit_check(&xi, sigma)?.relative_residual;

    let (outside, inside) = probes.points(n, sigma);
    let diff = |x: &Vec<f64>| -> Result<f64> {
        let f = engine.eval(x);
        let g = f - transform_at(&xi, x)?;
        Ok((f - g).norm())
    };
    let sup_diff_on_vsigma =
        outside.iter().map(diff).collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max);
    let max_diff_inside_qsigma =
        inside.iter().map(diff).collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max);

    let mut failures = Vec::new();
    if min_theta < -tol.pos * max_phi {
        failures.push(format!("minTheta violation: {min_theta:e} < -{:e}", tol.pos * max_phi));
    }
    if (mass_theta - 1.0).abs() > tol.mass {
        failures.push(format!("massTheta violation: |{mass_theta} - 1| > {:e}", tol.mass));
    }
    let density_ok = failures.is_empty();
    if integral_xi.abs() > tol.mass {
        failures.push(format!("integralXi violation: |{integral_xi:e}| > {:e}", tol.mass));
    }
    if band_residual > tol.band {
        failures.push(format!("band residual violation: {band_residual:e} > {:e}", tol.band));
    }
    if sup_diff_on_vsigma > tol.agree {
        failures.push(format!("V_σ agreement violation: {sup_diff_on_vsigma:e} > {:e}", tol.agree));
    }
    let distinct = max_diff_inside_qsigma >= 10.0 * tol.agree;
    let verdict = if !density_ok {
        VERDICT_NOT_DENSITY.to_string()
    } else if failures.is_empty() && distinct {
        VERDICT_NON_UNIQUE.to_string()
    } else if failures.is_empty() {
        VERDICT_IDENTICAL.to_string()
    } else {
        format!("verification failed: {}", failures.iter().map(|f| f.split(':').next().unwrap_or(f)).collect::<Vec<_>>().join(", "))
    };

    Ok(VerificationReport {
        sigma,
        n,
        integral_xi,
        integral_xi_closed_form: closed_form_integral(params),
        integral_xi_grid,
        band_residual,
        min_theta,
        mass_phi,
        mass_theta,
        sup_diff_on_vsigma,
        max_diff_inside_qsigma,
        failures,
        verdict,
    })
}
