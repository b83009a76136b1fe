//! The band-limited perturbation
//!
//! ```text
//! ξ(x) = ρ ∏_k ξ₁(x_k) · (A² − ‖x‖₂²),   ξ₁(x) = (cos(σx/2) / (x² − (π/σ)²))²,
//! ```
//!
//! with `A = π√n/σ`, which has zero mean and a spectrum inside `[−σ, σ]^n`.
//! Subtracting it from a density whose support contains the closed ball of
//! radius `A` gives a second density with the same characteristic function
//! outside the cube.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::densities::{DensitySpec, Family};
use crate::error::{Error, Result};
use crate::grid::{Axis, GridFunction};
use crate::oracles::{self, ProbeSettings, Tolerances, VerificationReport};
use crate::quadrature::{pairwise_sum, richardson_linear, symmetric_panels, GaussRule};
use crate::spectral::{self, BandLimitReport};

/// `sin(u)/u` with the removable singularity filled in.
pub fn sinc(u: f64) -> f64 {
    if u == 0.0 {
        1.0
    } else {
        u.sin() / u
    }
}

/// `ξ₁(x) = (cos(σx/2)/(x² − (π/σ)²))²`, evaluated as
/// `((σ/2) sinc(σ(|x| − π/σ)/2) / (|x| + π/σ))²`, which is exact at the
/// removable singularities `x = ±π/σ`.
pub fn xi_base(x: f64, sigma: f64) -> f64 {
    let c = PI / sigma;
    let u = x.abs();
    let v = 0.5 * sigma * sinc(0.5 * sigma * (u - c)) / (u + c);
    v * v
}

/// `ξ₂(x) = x² ξ₁(x)`.
pub fn xi_second(x: f64, sigma: f64) -> f64 {
    x * x * xi_base(x, sigma)
}

/// Fourier transform of ξ₁: for `w = |ω| ≤ σ` and `c = π/σ`,
/// `π/(4c²) · ((σ − w) cos(cw) + sin(cw)/c)`, and zero outside.
pub fn xi_base_hat(omega: f64, sigma: f64) -> f64 {
    let w = omega.abs();
    if w >= sigma {
        return 0.0;
    }
    let c = PI / sigma;
    PI / (4.0 * c * c) * ((sigma - w) * (c * w).cos() + (c * w).sin() / c)
}

/// Fourier transform of ξ₂ (minus the second derivative of ξ̂₁):
/// `π/4 · ((σ − w) cos(cw) − sin(cw)/c)` on `|ω| ≤ σ`.
pub fn xi_second_hat(omega: f64, sigma: f64) -> f64 {
    let w = omega.abs();
    if w >= sigma {
        return 0.0;
    }
    let c = PI / sigma;
    0.25 * PI * ((sigma - w) * (c * w).cos() - (c * w).sin() / c)
}

/// Closed-form integrals of ξ₁ and ξ₂ over the line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    /// `∫ξ₁ = σ³/(4π)`
    pub i1: f64,
    /// `∫ξ₂ = σπ/4`
    pub i2: f64,
}

pub fn closed_moments(sigma: f64) -> Moments {
    Moments { i1: sigma.powi(3) / (4.0 * PI), i2: sigma * PI / 4.0 }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationParams {
    pub n: usize,
    pub sigma: f64,
    /// Radius of the sphere on which the bracket `A² − ‖x‖²` vanishes.
    #[serde(rename = "A")]
    pub radius: f64,
    pub rho: f64,
    pub safety: f64,
}

pub const DEFAULT_SAFETY: f64 = 0.9;

impl PerturbationParams {
    /// Parameters with `A = π√n/σ` and the given amplitude.
    pub fn new(n: usize, sigma: f64, rho: f64) -> Self {
        Self { n, sigma, radius: zero_sphere_radius(n, sigma), rho, safety: DEFAULT_SAFETY }
    }

    pub fn with_safety(mut self, safety: f64) -> Self {
        self.safety = safety;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("need n ≥ 1 and σ > 0, got n = {}, σ = {}", self.n, self.sigma)));
        }
        if !(self.safety > 0.0 && self.safety < 1.0) {
            return Err(Error::InvalidParameter(format!("safety must lie in (0, 1), got {}", self.safety)));
        }
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return Err(Error::InvalidParameter(format!("amplitude must be non-negative, got {}", self.rho)));
        }
        Ok(())
    }
}

/// `A = π√n/σ`, the radius that makes `∫ξ = 0`.
pub fn zero_sphere_radius(n: usize, sigma: f64) -> f64 {
    PI * (n as f64).sqrt() / sigma
}

/// `u(x) = ∏ ξ₁(x_k) · (A² − ‖x‖²)`, the perturbation at unit amplitude.
pub fn unit_profile(x: &[f64], p: &PerturbationParams) -> f64 {
    let mut prod = 1.0;
    let mut sq = 0.0;
    for &v in x {
        prod *= xi_base(v, p.sigma);
        sq += v * v;
    }
    prod * (p.radius * p.radius - sq)
}

/// ξ(x) = ρ u(x).
pub fn xi_eval(x: &[f64], p: &PerturbationParams) -> f64 {
    p.rho * unit_profile(x, p)
}

/// `∫ξ` from the closed-form moments:
/// `ρ (A² I₁ⁿ − n I₂ I₁ⁿ⁻¹)`.
pub fn closed_form_integral(p: &PerturbationParams) -> f64 {
    let m = closed_moments(p.sigma);
    let n = p.n as i32;
    p.rho * (p.radius * p.radius * m.i1.powi(n) - p.n as f64 * m.i2 * m.i1.powi(n - 1))
}

/// Gauss nodes per panel of width π/σ in the truncated ξ quadratures.
pub const NODES_PER_PANEL: usize = 16;

/// Composite Gauss–Legendre nodes on `[-radius, radius]` with panels of
/// width π/σ (half the period of `cos²(σx/2)`).
pub fn oscillatory_nodes(radius: f64, sigma: f64) -> Vec<(f64, f64)> {
    GaussRule::new(NODES_PER_PANEL).composite(&symmetric_panels(radius, PI / sigma), false)
}

/// Truncated 1-D integral of `g` over `[-radius, radius]`.
pub fn truncated_integral<F: Fn(f64) -> f64>(g: F, radius: f64, sigma: f64) -> f64 {
    let terms: Vec<f64> = oscillatory_nodes(radius, sigma).into_iter().map(|(x, w)| w * g(x)).collect();
    pairwise_sum(&terms)
}

/// Tensor Gauss–Legendre quadrature of ξ over the cube `[-radius, radius]^n`.
pub fn truncated_xi_integral(p: &PerturbationParams, radius: f64) -> f64 {
    let nodes = oscillatory_nodes(radius, p.sigma);
    // per-axis factors w ξ₁(x)
    let axis: Vec<(f64, f64)> = nodes.iter().map(|&(x, w)| (x, w * xi_base(x, p.sigma))).collect();
    let a2 = p.radius * p.radius;
    let total = match p.n {
        1 => pairwise_sum(&axis.iter().map(|&(x, c)| c * (a2 - x * x)).collect::<Vec<_>>()),
        n => {
            let partial: Vec<f64> =
                axis.par_iter().map(|&(x, c)| c * cube_sum(&axis, n - 1, 1.0, x * x, a2)).collect();
            pairwise_sum(&partial)
        }
    };
    p.rho * total
}

// Σ over the remaining `depth` axes of ∏ c_k · (A² − Σ x_k²).
fn cube_sum(axis: &[(f64, f64)], depth: usize, prod: f64, sq: f64, a2: f64) -> f64 {
    let mut acc = 0.0;
    if depth == 1 {
        for &(x, c) in axis {
            acc += prod * c * (a2 - sq - x * x);
        }
    } else {
        for &(x, c) in axis {
            acc += cube_sum(axis, depth - 1, prod * c, sq + x * x, a2);
        }
    }
    acc
}

/// Truncated quadratures at `R` and `2R` with the `1/R` tail removed by
/// Richardson extrapolation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrapolated {
    pub radius: f64,
    pub at_r: f64,
    pub at_2r: f64,
    pub value: f64,
}

impl Extrapolated {
    pub fn from_fn<F: Fn(f64) -> f64>(radius: f64, integral: F) -> Self {
        let at_r = integral(radius);
        let at_2r = integral(2.0 * radius);
        Self { radius, at_r, at_2r, value: richardson_linear(at_r, at_2r) }
    }
}

/// Default truncation radius `200π/σ` for the ξ quadratures.
pub fn default_truncation(sigma: f64) -> f64 {
    200.0 * PI / sigma
}

/// `∫ξ` over R^n by tensor quadrature at `R = 200π/σ` and `2R`, extrapolated.
pub fn xi_integral(p: &PerturbationParams) -> Extrapolated {
    Extrapolated::from_fn(default_truncation(p.sigma), |r| truncated_xi_integral(p, r))
}

/// Amplitude `ρ = safety · m / M`, with `m = min φ` and `M = max u` over the
/// points of a tensor grid (`grid_steps + 1` nodes per axis on `[-A, A]`)
/// that lie in the closed ball `‖x‖₂ ≤ A`.
pub fn choose_amplitude(density: &DensitySpec, p: &PerturbationParams, grid_steps: usize) -> Result<f64> {
    p.validate()?;
    if grid_steps == 0 {
        return Err(Error::InvalidParameter("amplitude grid needs at least one step".into()));
    }
    if density.dim != p.n {
        return Err(Error::InvalidParameter(format!(
            "density dimension {} does not match perturbation dimension {}",
            density.dim, p.n
        )));
    }
    if !density.is_normalized() {
        return Err(Error::Unnormalized);
    }
    let axis = Axis::symmetric(p.radius, grid_steps + 1)?;
    let grid = GridFunction::from_fn(vec![axis; p.n], |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        if r2 <= p.radius * p.radius * (1.0 + 1e-12) {
            Some((density.value(x), unit_profile(x, p)))
        } else {
            None
        }
    })?;
    let (m, big) = grid
        .values
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(m, b), &(phi, u)| (m.min(phi), b.max(u)));
    if !(m > 0.0) {
        return Err(Error::Hypothesis(format!(
            "inf φ over ball is 0: the closed ball of radius A = π√n/σ = {:.6} is not inside the essential support",
            p.radius
        )));
    }
    Ok(p.safety * m / big)
}

/// Output grid and amplitude-search resolution for the construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GridSettings {
    /// Nodes per axis of the output grid; `None` picks 65536 (n = 1),
    /// 1024 (n = 2) or 128.
    pub points_per_axis: Option<usize>,
    /// Output grid half-width in units of π/σ; `None` picks 1000 (n = 1),
    /// 120 (n = 2) or 15. The spacing must stay below π/(4σ).
    pub radius_factor: Option<f64>,
    pub amplitude_steps: usize,
    pub safety: f64,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self { points_per_axis: None, radius_factor: None, amplitude_steps: 64, safety: DEFAULT_SAFETY }
    }
}

impl GridSettings {
    pub fn points_for(&self, n: usize) -> usize {
        self.points_per_axis.unwrap_or(match n {
            1 => 1 << 16,
            2 => 1 << 10,
            _ => 1 << 7,
        })
    }

    pub fn radius_factor_for(&self, n: usize) -> f64 {
        self.radius_factor.unwrap_or(match n {
            1 => 1000.0,
            2 => 120.0,
            _ => 15.0,
        })
    }

    /// Half-width of the output grid.
    pub fn half_width(&self, n: usize, sigma: f64) -> f64 {
        self.radius_factor_for(n) * PI / sigma
    }
}

/// Everything produced by [`build_counterexample`].
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub theta: GridFunction<f64>,
    pub xi: GridFunction<f64>,
    pub params: PerturbationParams,
    pub band: BandLimitReport,
    pub report: VerificationReport,
}

/// Checks the ball-size condition `δσ > π√n` for Euclidean ball bumps.
pub fn check_ball_regime(density: &DensitySpec, sigma: f64) -> Result<()> {
    if let (Family::BallBump(b), Some(r)) = (&density.family, density.ball_radius()) {
        let bound = PI * (density.dim as f64).sqrt();
        if b.q == 2.0 && r * sigma <= bound {
            return Err(Error::Hypothesis(format!(
                "construction requires δσ > π√n, but δσ = {:.6} ≤ π√{} = {:.6}",
                r * sigma,
                density.dim,
                bound
            )));
        }
    }
    Ok(())
}

/// Builds ϑ = φ − ξ on the output grid and runs the verification suite.
pub fn build_counterexample(
    density: &DensitySpec,
    sigma: f64,
    grid: &GridSettings,
    probes: &ProbeSettings,
    tol: &Tolerances,
) -> Result<Counterexample> {
    density.validate()?;
    if !density.is_normalized() {
        return Err(Error::Unnormalized);
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("σ must be positive, got {sigma}")));
    }
    let n = density.dim;
    check_ball_regime(density, sigma)?;
    let mut params = PerturbationParams::new(n, sigma, 1.0).with_safety(grid.safety);
    params.rho = choose_amplitude(density, &params, grid.amplitude_steps)?;

    let half = grid.half_width(n, sigma);
    let axes = vec![Axis::symmetric(half, grid.points_for(n))?; n];
    oracles::check_resolution(density, &axes, sigma)?;
    let xi = GridFunction::from_fn(axes.clone(), |x| xi_eval(x, &params))?;
    let theta = GridFunction::from_fn(axes, |x| density.value(x) - xi_eval(x, &params))?;
    let band = spectral::band_limit_check(&xi, sigma)?;
    let report = oracles::verify_counterexample(density, &theta, &params, probes, tol)?;
    Ok(Counterexample { theta, xi, params, band, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(x: f64, sigma: f64) -> f64 {
        let c = PI / sigma;
        ((0.5 * sigma * x).cos() / (x * x - c * c)).powi(2)
    }

    #[test]
    fn special_values() {
        assert!((xi_base(PI / 2.0, 2.0) - 1.0 / (PI * PI)).abs() < 1e-16);
        assert!(xi_base(1.5 * PI, 2.0) < 1e-30);
        assert!((xi_base(0.0, 2.0) - 16.0 / PI.powi(4)).abs() < 1e-15);
        for sigma in [0.5, 1.0, 3.0, 7.5] {
            let c = PI / sigma;
            assert!((xi_base(c, sigma) - sigma.powi(4) / (16.0 * PI * PI)).abs() <= 1e-15 * xi_base(c, sigma));
            assert!((xi_second(c, sigma) - sigma * sigma / 16.0).abs() <= 4e-16 * sigma * sigma);
            assert_eq!(xi_base(-c, sigma), xi_base(c, sigma));
        }
    }

    #[test]
    fn sinc_form_agrees_with_naive_away_from_singularity() {
        for sigma in [1.0, 2.0, 4.0] {
            for x in [-7.3, -0.4, 0.0, 0.9, 2.2, 11.0] {
                let (a, b) = (xi_base(x, sigma), naive(x, sigma));
                assert!((a - b).abs() <= 1e-13 * b.abs().max(1e-300), "σ={sigma} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn xi_eval_examples() {
        let p = PerturbationParams::new(1, PI, 1.0);
        assert!((p.radius - 1.0).abs() < 1e-15);
        assert!((xi_eval(&[0.0], &p) - 1.0).abs() < 1e-15);
        assert!(xi_eval(&[1.0], &p).abs() < 1e-15);
        let p2 = PerturbationParams::new(2, 2.0, 1.0);
        assert!(xi_eval(&[PI / 2.0, PI / 2.0], &p2).abs() < 1e-15);
    }

    #[test]
    fn closed_moments_ratio() {
        for sigma in [0.7, 2.0, 5.0] {
            let m = closed_moments(sigma);
            assert!((m.i2 / m.i1 - PI * PI / (sigma * sigma)).abs() < 1e-14);
        }
        let m = closed_moments(2.0);
        assert!((m.i1 - 2.0 / PI).abs() < 1e-15);
        assert!((m.i2 - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_chain_vanishes() {
        for n in 1..=4 {
            for sigma in [1.0, 2.0, 4.0] {
                let p = PerturbationParams::new(n, sigma, 1.0);
                let scale = closed_moments(sigma).i1.powi(n as i32) * p.radius * p.radius;
                assert!(closed_form_integral(&p).abs() < 1e-14 * scale);
            }
        }
    }

    #[test]
    fn transforms_match_quadrature() {
        // direct cosine transform of ξ₁, ξ₂ against the closed forms
        let sigma = 2.0;
        for omega in [0.0, 0.3, 1.1, 1.9, 2.5] {
            let r = 400.0 * PI / sigma;
            let t1 = Extrapolated::from_fn(r, |rr| truncated_integral(|x| xi_base(x, sigma) * (omega * x).cos(), rr, sigma));
            assert!((t1.value - xi_base_hat(omega, sigma)).abs() < 1e-7, "ω={omega}: {} vs {}", t1.value, xi_base_hat(omega, sigma));
        }
        assert!((xi_second_hat(0.0, sigma) - PI / 2.0).abs() < 1e-15);
        assert_eq!(xi_base_hat(2.0, 2.0), 0.0);
        assert!(xi_base_hat(1.999_999, 2.0).abs() < 1e-10);
    }

    #[test]
    fn amplitude_errors_when_ball_leaves_support() {
        let d = DensitySpec::ball_bump(2.0, 1.0, 1).normalize().unwrap();
        let p = PerturbationParams::new(1, 2.0, 1.0);
        let err = choose_amplitude(&d, &p, 64).unwrap_err();
        assert!(err.to_string().contains("inf φ over ball is 0"), "{err}");
    }

    #[test]
    fn amplitude_is_linear_in_safety() {
        let d = DensitySpec::ball_bump(2.0, 1.0, 1).normalize().unwrap();
        let p = PerturbationParams::new(1, 4.0, 1.0);
        let r9 = choose_amplitude(&d, &p, 64).unwrap();
        let r45 = choose_amplitude(&d, &p.with_safety(0.45), 64).unwrap();
        assert!(r9 > 0.0);
        assert!((r9 - 2.0 * r45).abs() < 1e-15);
        // m = φ at the sphere, M = u(0) for this profile
        let expect = 0.9 * (1.0 - PI / 4.0) / unit_profile(&[0.0], &p);
        assert!((r9 - expect).abs() < 1e-14);
    }

    #[test]
    fn regime_check_names_inequality() {
        let d = DensitySpec::ball_bump(2.0, 1.0, 2).normalize().unwrap();
        let msg = check_ball_regime(&d, 4.0).unwrap_err().to_string();
        assert!(msg.contains("δσ > π√n"), "{msg}");
        assert!(check_ball_regime(&d, 4.6).is_ok());
    }
}
