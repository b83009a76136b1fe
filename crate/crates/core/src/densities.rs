//! Probability density families, their supports, and characteristic
//! function evaluation by support-adapted Gauss–Legendre quadrature.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Axis, GridFunction};
use crate::quadrature::{pairwise_sum, GaussRule};

/// Tabulated values below this are treated as exact zeros.
pub const TABULATED_ZERO: f64 = 1e-15;

/// How the ball parameter δ of an ℓ^q ball is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BallConvention {
    /// `{ (Σ|x_k|^q)^{1/q} < δ }`
    #[default]
    Radius,
    /// `{ Σ|x_k|^q < δ }`, i.e. radius `δ^{1/q}`.
    Power,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallParams {
    /// Exponent `q ∈ [2, ∞]`; serialized as `"inf"` when infinite.
    #[serde(with = "exponent")]
    pub q: f64,
    pub delta: f64,
    #[serde(default)]
    pub convention: BallConvention,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedParams {
    pub grid: GridFunction<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum Family {
    /// `(1 - |t|)_+` on the line.
    #[serde(rename = "triangular")]
    Triangular1D,
    /// Tent profile `(1 - ‖t‖_q / r)_+` on an ℓ^q ball of radius `r`.
    BallBump(BallParams),
    /// Multilinear interpolant of grid samples, zero outside the grid.
    Tabulated(TabulatedParams),
}

/// A continuous probability density on R^n. `normalization` is the constant
/// `c` multiplying the raw profile; it is `None` until [`DensitySpec::normalize`]
/// has run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySpec {
    #[serde(flatten)]
    pub family: Family,
    pub dim: usize,
    pub normalization: Option<f64>,
}

/// Where a density may be nonzero.
#[derive(Debug, Clone, PartialEq)]
pub enum SupportKind {
    /// Axis-aligned box, one closed interval per axis.
    Intervals(Vec<(f64, f64)>),
    /// Closed ℓ^q ball of the given radius about the origin.
    LqBall { q: f64, radius: f64 },
    /// Union of closed grid cells with at least one positive corner.
    GridCells { axes: Vec<Axis>, positive: Vec<bool> },
    /// No compact support is known.
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportSpec {
    pub dim: usize,
    pub kind: SupportKind,
    /// Contains every point where the density is nonzero; `None` when the
    /// support is not compact.
    pub bounding_box: Option<Vec<(f64, f64)>>,
}

impl SupportSpec {
    pub fn interval(lo: f64, hi: f64) -> Self {
        Self::boxed(vec![(lo, hi)])
    }

    pub fn boxed(intervals: Vec<(f64, f64)>) -> Self {
        Self { dim: intervals.len(), bounding_box: Some(intervals.clone()), kind: SupportKind::Intervals(intervals) }
    }

    pub fn lq_ball(q: f64, radius: f64, dim: usize) -> Self {
        Self { dim, kind: SupportKind::LqBall { q, radius }, bounding_box: Some(vec![(-radius, radius); dim]) }
    }

    pub fn unbounded(dim: usize) -> Self {
        Self { dim, kind: SupportKind::Unbounded, bounding_box: None }
    }

    /// ℓ∞ distance from `p` to the closed support; zero on or inside it.
    pub fn linf_distance(&self, p: &[f64]) -> f64 {
        match &self.kind {
            SupportKind::Intervals(iv) => box_distance(p, iv),
            SupportKind::LqBall { q, radius } => lq_ball_linf_distance(p, *q, *radius),
            SupportKind::GridCells { axes, positive } => {
                let cells: Vec<usize> = axes.iter().map(|a| a.count - 1).collect();
                let mut best = f64::INFINITY;
                for (flat, _) in positive.iter().enumerate().filter(|(_, &on)| on) {
                    let mut rem = flat;
                    let mut d: f64 = 0.0;
                    for k in (0..axes.len()).rev() {
                        let i = rem % cells[k];
                        rem /= cells[k];
                        let (lo, hi) = (axes[k].coord(i), axes[k].coord(i + 1));
                        d = d.max(interval_distance(p[k], lo, hi));
                    }
                    best = best.min(d);
                }
                best
            }
            SupportKind::Unbounded => 0.0,
        }
    }
}

fn interval_distance(x: f64, lo: f64, hi: f64) -> f64 {
    (lo - x).max(x - hi).max(0.0)
}

fn box_distance(p: &[f64], iv: &[(f64, f64)]) -> f64 {
    p.iter().zip(iv).map(|(&x, &(lo, hi))| interval_distance(x, lo, hi)).fold(0.0, f64::max)
}

/// ℓ^q norm, with `q = ∞` giving the max norm.
pub fn lq_norm(x: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        x.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else if q == 2.0 {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    } else {
        x.iter().map(|v| v.abs().powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// Smallest `s ≥ 0` such that the cube of half-width `s` about `p` meets the
/// closed ℓ^q ball: `Σ (|p_k| - s)_+^q ≤ r^q`, solved by bisection.
fn lq_ball_linf_distance(p: &[f64], q: f64, radius: f64) -> f64 {
    let top = p.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    if q.is_infinite() {
        return (top - radius).max(0.0);
    }
    if lq_norm(p, q) <= radius {
        return 0.0;
    }
    let shrunk = |s: f64| -> f64 {
        let v: Vec<f64> = p.iter().map(|x| (x.abs() - s).max(0.0)).collect();
        lq_norm(&v, q)
    };
    let (mut lo, mut hi) = (0.0, top);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if shrunk(mid) > radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Volume of the unit ℓ^q ball in dimension `n`.
pub fn unit_lq_ball_volume(q: f64, n: usize) -> f64 {
    if q.is_infinite() {
        return 2f64.powi(n as i32);
    }
    use statrs::function::gamma::gamma;
    (2.0 * gamma(1.0 + 1.0 / q)).powi(n as i32) / gamma(1.0 + n as f64 / q)
}

impl DensitySpec {
    /// The triangular density `(1 - |t|)_+`, not yet normalized.
    pub fn triangular() -> Self {
        Self { family: Family::Triangular1D, dim: 1, normalization: None }
    }

    /// Tent-shaped bump on the ℓ^q ball of radius δ (radius convention).
    pub fn ball_bump(q: f64, delta: f64, dim: usize) -> Self {
        Self::ball_bump_with(q, delta, dim, BallConvention::Radius)
    }

    pub fn ball_bump_with(q: f64, delta: f64, dim: usize, convention: BallConvention) -> Self {
        Self { family: Family::BallBump(BallParams { q, delta, convention }), dim, normalization: None }
    }

    /// Density interpolating `grid` multilinearly; entries below
    /// [`TABULATED_ZERO`] are clamped to zero (negative entries are kept so
    /// that `normalize` can reject them).
    pub fn tabulated(grid: GridFunction<f64>) -> Self {
        let dim = grid.dim();
        let grid = grid.map(|&v| if v.abs() < TABULATED_ZERO { 0.0 } else { v });
        Self { family: Family::Tabulated(TabulatedParams { grid }), dim, normalization: None }
    }

    pub fn is_normalized(&self) -> bool {
        self.normalization.is_some()
    }

    /// Radius of the ball support for `BallBump`.
    pub fn ball_radius(&self) -> Option<f64> {
        match &self.family {
            Family::BallBump(p) => Some(match p.convention {
                BallConvention::Radius => p.delta,
                BallConvention::Power if p.q.is_infinite() => p.delta,
                BallConvention::Power => p.delta.powf(1.0 / p.q),
            }),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        match &self.family {
            Family::Triangular1D if self.dim != 1 => {
                Err(Error::InvalidParameter("the triangular density is one-dimensional".into()))
            }
            Family::BallBump(p) => {
                if !(p.q >= 2.0) {
                    return Err(Error::InvalidParameter(format!("ball exponent q must lie in [2, ∞], got {}", p.q)));
                }
                if !(p.delta > 0.0 && p.delta.is_finite()) {
                    return Err(Error::InvalidParameter(format!("ball parameter δ must be positive, got {}", p.delta)));
                }
                Ok(())
            }
            Family::Tabulated(t) if t.grid.dim() != self.dim => Err(Error::InvalidParameter(format!(
                "tabulated grid has dimension {} but spec says {}",
                t.grid.dim(),
                self.dim
            ))),
            _ => Ok(()),
        }
    }

    /// Unnormalized profile value.
    pub fn raw_value(&self, t: &[f64]) -> f64 {
        match &self.family {
            Family::Triangular1D => (1.0 - t[0].abs()).max(0.0),
            Family::BallBump(p) => {
                let r = self.ball_radius().expect("ball family");
                (1.0 - lq_norm(t, p.q) / r).max(0.0)
            }
            Family::Tabulated(tab) => multilinear(&tab.grid, t),
        }
    }

    /// φ(t). Errors if the spec has not been normalized.
    pub fn eval(&self, t: &[f64]) -> Result<f64> {
        let c = self.normalization.ok_or(Error::Unnormalized)?;
        Ok(c * self.raw_value(t))
    }

    /// φ(t) for a spec already known to be normalized.
    pub(crate) fn value(&self, t: &[f64]) -> f64 {
        self.normalization.unwrap_or(1.0) * self.raw_value(t)
    }

    pub fn support(&self) -> SupportSpec {
        match &self.family {
            Family::Triangular1D => SupportSpec::interval(-1.0, 1.0),
            Family::BallBump(p) => SupportSpec::lq_ball(p.q, self.ball_radius().expect("ball family"), self.dim),
            Family::Tabulated(tab) => {
                let axes = tab.grid.axes.clone();
                let cells: Vec<usize> = axes.iter().map(|a| a.count - 1).collect();
                let total: usize = cells.iter().product();
                let mut positive = vec![false; total];
                let mut bbox: Vec<(f64, f64)> = vec![(f64::INFINITY, f64::NEG_INFINITY); axes.len()];
                for (flat, on) in positive.iter_mut().enumerate() {
                    let mut idx = vec![0; axes.len()];
                    let mut rem = flat;
                    for k in (0..axes.len()).rev() {
                        idx[k] = rem % cells[k];
                        rem /= cells[k];
                    }
                    *on = (0..1usize << axes.len()).any(|corner| {
                        let c: Vec<usize> = idx.iter().enumerate().map(|(k, &i)| i + ((corner >> k) & 1)).collect();
                        tab.grid.values[tab.grid.ravel(&c)] > 0.0
                    });
                    if *on {
                        for k in 0..axes.len() {
                            bbox[k].0 = bbox[k].0.min(axes[k].coord(idx[k]));
                            bbox[k].1 = bbox[k].1.max(axes[k].coord(idx[k] + 1));
                        }
                    }
                }
                let bounding_box = if positive.iter().any(|&b| b) { Some(bbox) } else { Some(vec![(0.0, 0.0); axes.len()]) };
                SupportSpec { dim: self.dim, kind: SupportKind::GridCells { axes, positive }, bounding_box }
            }
        }
    }

    /// Returns a copy scaled to unit mass, with the constant recorded.
    pub fn normalize(&self) -> Result<DensitySpec> {
        self.validate()?;
        let mass = match &self.family {
            Family::Triangular1D => 1.0,
            Family::BallBump(p) => {
                // ∫ (1 - ‖t‖/r)_+ dt = V r^n (1 - n/(n+1))
                let r = self.ball_radius().expect("ball family");
                unit_lq_ball_volume(p.q, self.dim) * r.powi(self.dim as i32) / (self.dim as f64 + 1.0)
            }
            Family::Tabulated(tab) => {
                let min = tab.grid.min_value();
                if min < 0.0 {
                    return Err(Error::NegativeDensity(min));
                }
                // trapezoid is exact for the multilinear interpolant
                tab.grid.trapezoid_integral()
            }
        };
        if !(mass > 0.0) {
            return Err(Error::ZeroMass);
        }
        Ok(DensitySpec { normalization: Some(1.0 / mass), ..self.clone() })
    }

    /// Support-adapted quadrature nodes with weights multiplied by φ. Nodes
    /// where φ vanishes are dropped.
    pub fn weighted_nodes(&self, settings: &QuadratureSettings) -> Result<WeightedNodes> {
        if !self.is_normalized() {
            return Err(Error::Unnormalized);
        }
        let per_axis = settings.nodes_for(self.dim);
        let mut nodes = WeightedNodes { dim: self.dim, points: Vec::new(), weights: Vec::new() };
        match &self.family {
            Family::Triangular1D => {
                let rule = GaussRule::new((per_axis / 2).max(1));
                for (t, w) in rule.composite(&[-1.0, 0.0, 1.0], false) {
                    nodes.push(&[t], w * self.value(&[t]));
                }
            }
            Family::BallBump(p) => {
                let rule = GaussRule::new((per_axis / 2).max(1));
                let r = self.ball_radius().expect("ball family");
                let mut point = vec![0.0; self.dim];
                self.ball_nodes(&rule, p.q, r, 0, 1.0, &mut point, &mut nodes);
            }
            Family::Tabulated(tab) => {
                let axes: Vec<Vec<(f64, f64)>> = tab
                    .grid
                    .axes
                    .iter()
                    .map(|a| {
                        let per_cell = per_axis.div_ceil(a.count - 1).max(2);
                        GaussRule::new(per_cell).composite(&a.coords(), false)
                    })
                    .collect();
                let total: usize = axes.iter().map(Vec::len).product();
                let mut idx = vec![0usize; self.dim];
                let mut point = vec![0.0; self.dim];
                for _ in 0..total {
                    let mut w = 1.0;
                    for k in 0..self.dim {
                        point[k] = axes[k][idx[k]].0;
                        w *= axes[k][idx[k]].1;
                    }
                    nodes.push(&point, w * self.value(&point));
                    for k in (0..self.dim).rev() {
                        idx[k] += 1;
                        if idx[k] < axes[k].len() {
                            break;
                        }
                        idx[k] = 0;
                    }
                }
            }
        }
        Ok(nodes)
    }

    // Iterated integration over the ball: each axis spans the chord left by
    // the preceding coordinates, split where the integrand has kinks.
    #[allow(clippy::too_many_arguments)]
    fn ball_nodes(
        &self,
        rule: &GaussRule,
        q: f64,
        r: f64,
        axis: usize,
        weight: f64,
        point: &mut Vec<f64>,
        out: &mut WeightedNodes,
    ) {
        if axis == self.dim {
            out.push(point, weight * self.value(point));
            return;
        }
        let (half, breaks) = if q.is_infinite() {
            let m = point[..axis].iter().fold(0.0, |m: f64, v| m.max(v.abs()));
            let mut b = vec![-r, 0.0, r];
            if m > 0.0 && m < r {
                b.extend([-m, m]);
            }
            b.sort_by(f64::total_cmp);
            (r, b)
        } else {
            let used: f64 = point[..axis].iter().map(|v| v.abs().powf(q)).sum();
            let half = (r.powf(q) - used).max(0.0).powf(1.0 / q);
            (half, vec![-half, 0.0, half])
        };
        if half <= 0.0 {
            return;
        }
        for (t, w) in rule.composite(&breaks, true) {
            point[axis] = t;
            self.ball_nodes(rule, q, r, axis + 1, weight * w, point, out);
        }
        point[axis] = 0.0;
    }
}

fn multilinear(grid: &GridFunction<f64>, t: &[f64]) -> f64 {
    let n = grid.dim();
    let mut base = vec![0usize; n];
    let mut frac = vec![0.0; n];
    for k in 0..n {
        let a = &grid.axes[k];
        if !(t[k] >= a.min && t[k] <= a.max) {
            return 0.0;
        }
        let s = (t[k] - a.min) / a.spacing();
        let i = (s.floor() as usize).min(a.count - 2);
        base[k] = i;
        frac[k] = (s - i as f64).clamp(0.0, 1.0);
    }
    let mut acc = 0.0;
    let mut idx = vec![0usize; n];
    for corner in 0..1usize << n {
        let mut w = 1.0;
        for k in 0..n {
            let up = (corner >> k) & 1;
            idx[k] = base[k] + up;
            w *= if up == 1 { frac[k] } else { 1.0 - frac[k] };
        }
        if w != 0.0 {
            acc += w * grid.values[grid.ravel(&idx)];
        }
    }
    acc.max(0.0)
}

/// Quadrature resolution for characteristic-function evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QuadratureSettings {
    /// Gauss nodes per axis; `None` picks 256 for n ≤ 2 and 64 above.
    pub nodes_per_axis: Option<usize>,
}


impl QuadratureSettings {
    pub fn with_nodes(nodes: usize) -> Self {
        Self { nodes_per_axis: Some(nodes) }
    }

    pub fn nodes_for(&self, dim: usize) -> usize {
        self.nodes_per_axis.unwrap_or(if dim <= 2 { 256 } else { 64 })
    }
}

/// Default quadrature tolerance by dimension.
pub fn default_tol_quad(dim: usize) -> f64 {
    if dim <= 2 {
        1e-8
    } else {
        1e-6
    }
}

/// Flat list of quadrature nodes with weights `w_j φ(t_j)`.
#[derive(Debug, Clone)]
pub struct WeightedNodes {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightedNodes {
    fn push(&mut self, t: &[f64], w: f64) {
        if w != 0.0 {
            self.points.extend_from_slice(t);
            self.weights.push(w);
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `Σ w_j φ(t_j) g(t_j)`.
    pub fn integrate<F: Fn(&[f64]) -> f64 + Sync>(&self, g: F) -> f64 {
        let terms: Vec<f64> = self
            .weights
            .par_iter()
            .enumerate()
            .map(|(j, w)| w * g(&self.points[j * self.dim..(j + 1) * self.dim]))
            .collect();
        pairwise_sum(&terms)
    }
}

/// Characteristic function `f(x) = ∫ e^{-i(x,t)} φ(t) dt` of a normalized
/// density, with its quadrature nodes built once.
#[derive(Debug, Clone)]
pub struct CharFn {
    nodes: WeightedNodes,
}

const CHUNK: usize = 2048;

impl CharFn {
    pub fn new(spec: &DensitySpec, settings: &QuadratureSettings) -> Result<Self> {
        Ok(Self { nodes: spec.weighted_nodes(settings)? })
    }

    pub fn dim(&self) -> usize {
        self.nodes.dim
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let n = self.nodes.dim;
        let partial: Vec<(f64, f64)> = self
            .nodes
            .weights
            .par_chunks(CHUNK)
            .enumerate()
            .map(|(c, ws)| {
                let (mut re, mut im) = (0.0, 0.0);
                for (j, w) in ws.iter().enumerate() {
                    let t = &self.nodes.points[(c * CHUNK + j) * n..(c * CHUNK + j + 1) * n];
                    let phase: f64 = x.iter().zip(t).map(|(a, b)| a * b).sum();
                    let (s, co) = phase.sin_cos();
                    re += w * co;
                    im -= w * s;
                }
                (re, im)
            })
            .collect();
        let re: Vec<f64> = partial.iter().map(|p| p.0).collect();
        let im: Vec<f64> = partial.iter().map(|p| p.1).collect();
        Complex64::new(pairwise_sum(&re), pairwise_sum(&im))
    }

    /// `f(0)`, i.e. the quadrature estimate of the total mass.
    pub fn mass(&self) -> f64 {
        pairwise_sum(&self.nodes.weights)
    }

    /// Fails when the mass estimate is off by more than `tol`.
    pub fn check_mass(&self, tol: f64) -> Result<f64> {
        let mass = self.mass();
        if (mass - 1.0).abs() > tol {
            return Err(Error::Resolution(format!(
                "characteristic function quadrature gives f(0) = {mass:.12}, off by more than {tol:e}; increase nodes per axis"
            )));
        }
        Ok(mass)
    }
}

/// One-shot `f(x)` with default quadrature settings.
pub fn char_fn(spec: &DensitySpec, x: &[f64]) -> Result<Complex64> {
    Ok(CharFn::new(spec, &QuadratureSettings::default())?.eval(x))
}

mod exponent {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &f64, s: S) -> Result<S::Ok, S::Error> {
        if q.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*q)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(s) if matches!(s.as_str(), "inf" | "infinity" | "Infinity") => Ok(f64::INFINITY),
            Raw::Text(s) => s.parse().map_err(|_| de::Error::custom(format!("bad exponent {s:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tri() -> DensitySpec {
        DensitySpec::triangular().normalize().unwrap()
    }

    #[test]
    fn eval_requires_normalize() {
        let raw = DensitySpec::triangular();
        assert!(matches!(raw.eval(&[0.0]), Err(Error::Unnormalized)));
        assert!(Error::Unnormalized.to_string().contains("call normalize first"));
    }

    #[test]
    fn triangular_values() {
        let d = tri();
        assert_eq!(d.normalization, Some(1.0));
        assert_eq!(d.eval(&[0.0]).unwrap(), 1.0);
        assert_eq!(d.eval(&[2.0]).unwrap(), 0.0);
        assert_eq!(d.eval(&[-0.25]).unwrap(), 0.75);
    }

    #[test]
    fn ball_normalizations() {
        let one = DensitySpec::ball_bump(2.0, 1.0, 1).normalize().unwrap();
        assert!((one.normalization.unwrap() - 1.0).abs() < 1e-14);
        let two = DensitySpec::ball_bump(2.0, 1.0, 2).normalize().unwrap();
        assert!((two.normalization.unwrap() - 3.0 / PI).abs() < 1e-14);
        let v = two.eval(&[0.5, 0.5]).unwrap();
        assert!((v - 3.0 / PI * (1.0 - 0.5f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn power_convention_shrinks_radius() {
        let d = DensitySpec::ball_bump_with(2.0, 4.0, 2, BallConvention::Power);
        assert_eq!(d.ball_radius(), Some(2.0));
        let d = DensitySpec::ball_bump_with(f64::INFINITY, 4.0, 2, BallConvention::Power);
        assert_eq!(d.ball_radius(), Some(4.0));
    }

    #[test]
    fn invalid_ball_parameters() {
        assert!(DensitySpec::ball_bump(1.5, 1.0, 2).normalize().is_err());
        assert!(DensitySpec::ball_bump(2.0, 0.0, 2).normalize().is_err());
    }

    #[test]
    fn tabulated_errors() {
        let axes = vec![Axis::new(-1.0, 1.0, 3).unwrap()];
        let zero = DensitySpec::tabulated(GridFunction::new(axes.clone(), vec![0.0; 3]).unwrap());
        assert!(matches!(zero.normalize(), Err(Error::ZeroMass)));
        let neg = DensitySpec::tabulated(GridFunction::new(axes, vec![0.0, -0.5, 1.0]).unwrap());
        assert!(matches!(neg.normalize(), Err(Error::NegativeDensity(_))));
    }

    #[test]
    fn tabulated_tent_matches_triangular() {
        let axes = vec![Axis::new(-2.0, 2.0, 9).unwrap()];
        let grid = GridFunction::from_fn(axes, |t| (1.0 - t[0].abs()).max(0.0)).unwrap();
        let d = DensitySpec::tabulated(grid).normalize().unwrap();
        assert!((d.normalization.unwrap() - 1.0).abs() < 1e-14);
        for &t in &[-0.9, -0.3, 0.0, 0.45, 1.5] {
            assert!((d.eval(&[t]).unwrap() - tri().eval(&[t]).unwrap()).abs() < 1e-14);
        }
        let s = d.support();
        assert_eq!(s.bounding_box, Some(vec![(-1.0, 1.0)]));
        assert_eq!(s.linf_distance(&[0.2]), 0.0);
        assert!((s.linf_distance(&[1.75]) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn tiny_tabulated_values_clamp_to_zero() {
        let axes = vec![Axis::new(0.0, 3.0, 4).unwrap()];
        let d = DensitySpec::tabulated(GridFunction::new(axes, vec![1e-17, 1.0, 1.0, 1e-16]).unwrap());
        match &d.family {
            Family::Tabulated(t) => assert_eq!(t.grid.values, vec![0.0, 1.0, 1.0, 0.0]),
            _ => unreachable!(),
        }
    }

    #[test]
    fn lq_distance_examples() {
        // diagonal point (0.75, 0.75) against the unit disk
        let d = lq_ball_linf_distance(&[0.75, 0.75], 2.0, 1.0);
        assert!((d - (0.75 - 0.5f64.sqrt())).abs() < 1e-12);
        assert_eq!(lq_ball_linf_distance(&[0.3, 0.1], 2.0, 1.0), 0.0);
        // axis point: only one coordinate needs to move
        assert!((lq_ball_linf_distance(&[1.5, 0.0], 3.0, 1.0) - 0.5).abs() < 1e-12);
        assert!((lq_ball_linf_distance(&[1.5, -1.2], f64::INFINITY, 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_lq_ball_volume(2.0, 2) - PI).abs() < 1e-13);
        assert!((unit_lq_ball_volume(2.0, 3) - 4.0 * PI / 3.0).abs() < 1e-13);
        assert!((unit_lq_ball_volume(2.0, 1) - 2.0).abs() < 1e-14);
        assert_eq!(unit_lq_ball_volume(f64::INFINITY, 3), 8.0);
    }

    #[test]
    fn triangular_char_fn_at_pi() {
        let f = char_fn(&tri(), &[PI]).unwrap();
        assert!((f.re - 4.0 / (PI * PI)).abs() < 1e-12);
        assert!(f.im.abs() < 1e-14);
        let f0 = char_fn(&tri(), &[0.0]).unwrap();
        assert!((f0.re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn json_shape() {
        let d = DensitySpec::ball_bump(f64::INFINITY, 1.0, 2).normalize().unwrap();
        let text = serde_json::to_string(&d).unwrap();
        assert!(text.contains(r#""family":"ball_bump""#), "{text}");
        assert!(text.contains(r#""q":"inf""#), "{text}");
        let back: DensitySpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, d);
        let t: DensitySpec = serde_json::from_str(r#"{"family":"triangular","dim":1,"normalization":null}"#).unwrap();
        assert_eq!(t, DensitySpec::triangular());
    }
}
