//! Grid Fourier engine: trapezoid-weighted transforms on the FFT dual grid,
//! band-limit residuals, and Poisson summation checks.
//!
//! Convention: `ĝ(x) = ∫ e^{-i(x,t)} g(t) dt`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Axis, GridFunction};
use crate::quadrature::pairwise_sum;

/// Boundary-to-peak ratio above which a grid function is flagged as not
/// decaying inside the grid.
pub const DECAY_WARNING: f64 = 1e-3;

/// Frequency index range `m_min..m_min + N` of the dual grid, centred on 0.
fn frequency_offset(count: usize) -> i64 {
    -((count / 2) as i64)
}

/// Dual frequency axis of a spatial axis: spacing `2π/(N h)`, Nyquist `π/h`.
pub fn dual_axis(axis: &Axis) -> Result<Axis> {
    let n = axis.count;
    let dw = 2.0 * PI / (n as f64 * axis.spacing());
    let m0 = frequency_offset(n);
    Axis::new(m0 as f64 * dw, (m0 + n as i64 - 1) as f64 * dw, n)
}

/// `π/h` for each axis.
pub fn nyquist(g_axes: &[Axis]) -> Vec<f64> {
    g_axes.iter().map(|a| PI / a.spacing()).collect()
}

/// Samples `ĝ(ω) ≈ Σ_j w_j g(t_j) e^{-i(ω,t_j)}` (tensor trapezoid weights)
/// on the full dual grid via FFT along each axis.
pub fn forward_ft<T>(g: &GridFunction<T>) -> Result<GridFunction<Complex64>>
where
    T: Copy + Into<Complex64> + Sync,
{
    if let Some(k) = g.axes.iter().position(|a| !a.is_symmetric()) {
        return Err(Error::InvalidGrid(format!("axis {k} is not symmetric about 0")));
    }
    let mut data: Vec<Complex64> =
        (0..g.len()).into_par_iter().map(|i| g.values[i].into() * g.trapezoid_weight(i)).collect();
    let counts: Vec<usize> = g.axes.iter().map(|a| a.count).collect();
    let mut planner = FftPlanner::<f64>::new();
    for (k, axis) in g.axes.iter().enumerate() {
        let len = axis.count;
        let stride: usize = counts[k + 1..].iter().product();
        let outer: usize = counts[..k].iter().product();
        let fft = planner.plan_fft_forward(len);
        let h = axis.spacing();
        let m0 = frequency_offset(len);
        let dw = 2.0 * PI / (len as f64 * h);
        // position p holds frequency m = m0 + p, read from FFT bin m mod len,
        // and picks up the phase of the grid origin
        let phase: Vec<Complex64> = (0..len)
            .map(|p| {
                let w = (m0 + p as i64) as f64 * dw;
                Complex64::from_polar(1.0, -w * axis.min)
            })
            .collect();
        let source: Vec<usize> = (0..len).map(|p| (m0 + p as i64).rem_euclid(len as i64) as usize).collect();
        let lines: Vec<Vec<Complex64>> = (0..outer * stride)
            .into_par_iter()
            .map(|l| {
                let (o, i) = (l / stride, l % stride);
                let base = o * len * stride + i;
                let mut line: Vec<Complex64> = (0..len).map(|j| data[base + j * stride]).collect();
                fft.process(&mut line);
                (0..len).map(|p| line[source[p]] * phase[p]).collect()
            })
            .collect();
        for (l, line) in lines.into_iter().enumerate() {
            let (o, i) = (l / stride, l % stride);
            let base = o * len * stride + i;
            for (j, v) in line.into_iter().enumerate() {
                data[base + j * stride] = v;
            }
        }
    }
    let axes = g.axes.iter().map(dual_axis).collect::<Result<Vec<_>>>()?;
    GridFunction::new(axes, data)
}

/// Direct trapezoid transform at one frequency. Errors when `x` lies beyond
/// the Nyquist limit `π/h_k` of some axis.
pub fn transform_at<T>(g: &GridFunction<T>, x: &[f64]) -> Result<Complex64>
where
    T: Copy + Into<Complex64> + Sync,
{
    if x.len() != g.dim() {
        return Err(Error::InvalidParameter(format!("frequency has dimension {}, grid {}", x.len(), g.dim())));
    }
    for (k, (&xk, limit)) in x.iter().zip(nyquist(&g.axes)).enumerate() {
        if xk.abs() > limit {
            return Err(Error::BeyondNyquist { axis: k, requested: xk, nyquist: limit });
        }
    }
    // separable phases e^{-i x_k t} times trapezoid weights, per axis
    let factors: Vec<Vec<Complex64>> = g
        .axes
        .iter()
        .zip(x)
        .map(|(a, &xk)| (0..a.count).map(|i| Complex64::from_polar(a.trapezoid_weight(i), -xk * a.coord(i))).collect())
        .collect();
    let first = g.axes[0].count;
    let stride = g.len() / first;
    let partial: Vec<Complex64> = (0..first)
        .into_par_iter()
        .map(|i0| {
            let block = &g.values[i0 * stride..(i0 + 1) * stride];
            let mut acc = Complex64::new(0.0, 0.0);
            let mut idx = vec![0usize; g.dim()];
            for v in block {
                let mut w = Complex64::new(1.0, 0.0);
                for k in 1..g.dim() {
                    w *= factors[k][idx[k]];
                }
                acc += w * (*v).into();
                for k in (1..g.dim()).rev() {
                    idx[k] += 1;
                    if idx[k] < g.axes[k].count {
                        break;
                    }
                    idx[k] = 0;
                }
            }
            acc * factors[0][i0]
        })
        .collect();
    Ok(complex_sum(&partial))
}

pub(crate) fn complex_sum(v: &[Complex64]) -> Complex64 {
    let re: Vec<f64> = v.iter().map(|c| c.re).collect();
    let im: Vec<f64> = v.iter().map(|c| c.im).collect();
    Complex64::new(pairwise_sum(&re), pairwise_sum(&im))
}

/// How much of a grid function's spectrum escapes the cube `[-σ, σ]^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BandLimitReport {
    /// max |ĝ| over dual-grid points in the closed cube.
    pub max_inside: f64,
    /// max |ĝ| over points more than one frequency bin outside the cube.
    pub max_outside: f64,
    pub relative_residual: f64,
    pub sigma: f64,
    /// max |g| on the grid faces divided by max |g|.
    pub boundary_magnitude: f64,
    /// `boundary_magnitude` exceeds [`DECAY_WARNING`].
    pub poor_decay: bool,
}

/// Transforms `g` and partitions the dual grid by membership in the closed
/// cube `|ω_k| ≤ σ`. Points outside the cube but within one bin of its
/// boundary on every axis are left out of both maxima. The residual of an
/// identically zero transform is 0.
pub fn band_limit_check(g: &GridFunction<f64>, sigma: f64) -> Result<BandLimitReport> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("σ must be positive, got {sigma}")));
    }
    let spectrum = forward_ft(g)?;
    let bins: Vec<f64> = spectrum.axes.iter().map(Axis::spacing).collect();
    let (max_inside, max_outside) = (0..spectrum.len())
        .into_par_iter()
        .map(|flat| {
            let w = spectrum.point(flat);
            let mag = spectrum.values[flat].norm();
            if w.iter().all(|v| v.abs() <= sigma) {
                (mag, 0.0)
            } else if w.iter().zip(&bins).all(|(v, b)| v.abs() <= sigma + b) {
                (0.0, 0.0)
            } else {
                (0.0, mag)
            }
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    let relative_residual = if max_outside == 0.0 {
        0.0
    } else if max_inside == 0.0 {
        f64::MAX
    } else {
        max_outside / max_inside
    };
    let peak = g.max_abs();
    let face = boundary_max(g);
    let boundary_magnitude = if peak > 0.0 { face / peak } else { 0.0 };
    Ok(BandLimitReport {
        max_inside,
        max_outside,
        relative_residual,
        sigma,
        boundary_magnitude,
        poor_decay: boundary_magnitude > DECAY_WARNING,
    })
}

fn boundary_max(g: &GridFunction<f64>) -> f64 {
    (0..g.len())
        .filter(|&flat| g.unravel(flat).iter().zip(&g.axes).any(|(&i, a)| i == 0 || i + 1 == a.count))
        .fold(0.0, |m, flat| m.max(g.values[flat].abs()))
}

/// `(Σ w|g|², (2π)^{-n} Σ |ĝ|² dω)`: grid and spectral energies, equal up to
/// quadrature error when `g` decays inside the grid.
pub fn parseval_energies(g: &GridFunction<f64>) -> Result<(f64, f64)> {
    let spectrum = forward_ft(g)?;
    let energy: Vec<f64> = (0..g.len()).map(|i| g.trapezoid_weight(i) * g.values[i] * g.values[i]).collect();
    let dual_cell = spectrum.cell_volume() / (2.0 * PI).powi(g.dim() as i32);
    let spectral: Vec<f64> = spectrum.values.iter().map(|v| v.norm_sqr() * dual_cell).collect();
    Ok((pairwise_sum(&energy), pairwise_sum(&spectral)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PoissonCheck {
    pub lhs: f64,
    pub rhs: Complex64,
    pub abs_error: f64,
}

/// Both sides of the Poisson summation identity
/// `Σ_{ω ∈ νZ^n} F(x + ω) = (∏|ν_k|)^{-1} Σ_{θ ∈ (1/ν)Z^n} F̂(2πθ) e^{2πi(x,θ)}`,
/// each truncated to lattice indices `|m_k| ≤ terms`.
pub fn poisson_check<F, G>(f: F, f_hat: G, nu: &[f64], x: &[f64], terms: usize) -> Result<PoissonCheck>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Complex64,
{
    let n = nu.len();
    if n == 0 || x.len() != n {
        return Err(Error::InvalidParameter("ν and x must have the same positive dimension".into()));
    }
    if nu.iter().any(|&v| v == 0.0 || !v.is_finite()) {
        return Err(Error::InvalidParameter("lattice steps ν_k must be finite and nonzero".into()));
    }
    let side = 2 * terms + 1;
    let total = side.checked_pow(n as u32).ok_or_else(|| Error::InvalidParameter("too many terms".into()))?;
    let mut lhs_terms = Vec::with_capacity(total);
    let mut rhs_terms = Vec::with_capacity(total);
    let mut point = vec![0.0; n];
    let mut theta = vec![0.0; n];
    for cell in 0..total {
        let m = lattice_index(cell, side, terms, n);
        for k in 0..n {
            point[k] = x[k] + nu[k] * m[k] as f64;
            theta[k] = m[k] as f64 / nu[k];
        }
        let fv = f(&point);
        let freq: Vec<f64> = theta.iter().map(|t| 2.0 * PI * t).collect();
        let phase: f64 = 2.0 * PI * x.iter().zip(&theta).map(|(a, b)| a * b).sum::<f64>();
        let hv = f_hat(&freq) * Complex64::from_polar(1.0, phase);
        if !fv.is_finite() || !hv.re.is_finite() || !hv.im.is_finite() {
            return Err(Error::NonFinite(m));
        }
        lhs_terms.push(fv);
        rhs_terms.push(hv);
    }
    let volume: f64 = nu.iter().map(|v| v.abs()).product();
    let lhs = pairwise_sum(&lhs_terms);
    let rhs = complex_sum(&rhs_terms) / volume;
    Ok(PoissonCheck { lhs, rhs, abs_error: (rhs - lhs).norm() })
}

fn lattice_index(mut cell: usize, side: usize, terms: usize, n: usize) -> Vec<i64> {
    let mut m = vec![0i64; n];
    for v in m.iter_mut().rev() {
        *v = (cell % side) as i64 - terms as i64;
        cell /= side;
    }
    m
}
