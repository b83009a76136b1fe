//! Gauss–Legendre building blocks: composite panel rules, optional endpoint
//! grading, tensor-product sums and first-order Richardson extrapolation.

use gauss_quad::GaussLegendre;
use rayon::prelude::*;

/// Nodes and weights of a Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    /// Panics if `degree == 0`.
    pub fn new(degree: usize) -> Self {
        let deg = degree.try_into().expect("Gauss–Legendre degree must be positive");
        let gl = GaussLegendre::new(deg);
        let (nodes, weights) = gl.iter().map(|(x, w)| (*x, *w)).unzip();
        Self { nodes, weights }
    }

    pub fn degree(&self) -> usize {
        self.nodes.len()
    }

    /// Maps the rule onto `[lo, hi]`. With `graded`, the smoothstep
    /// substitution `t = lo + (hi - lo) u^2 (3 - 2u)` is applied, which
    /// flattens algebraic endpoint singularities (square-root chord ends,
    /// `t^2 log t` from cone tips).
    pub fn on_interval(&self, lo: f64, hi: f64, graded: bool) -> Vec<(f64, f64)> {
        let len = hi - lo;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| {
                let u = 0.5 * (x + 1.0);
                let wu = 0.5 * w;
                if graded {
                    let s = u * u * (3.0 - 2.0 * u);
                    let ds = 6.0 * u * (1.0 - u);
                    (lo + len * s, len * wu * ds)
                } else {
                    (lo + len * u, len * wu)
                }
            })
            .collect()
    }

    /// Composite rule over consecutive breakpoints (one panel per gap).
    /// Zero-length panels are skipped.
    pub fn composite(&self, breaks: &[f64], graded: bool) -> Vec<(f64, f64)> {
        breaks
            .windows(2)
            .filter(|w| w[1] > w[0])
            .flat_map(|w| self.on_interval(w[0], w[1], graded))
            .collect()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, lo: f64, hi: f64, f: F) -> f64 {
        pairwise_sum(&self.on_interval(lo, hi, false).into_iter().map(|(x, w)| w * f(x)).collect::<Vec<_>>())
    }
}

/// Uniform panels of width `width` covering `[-half, half]`; `half` is
/// rounded up to a whole number of panels.
pub fn symmetric_panels(half: f64, width: f64) -> Vec<f64> {
    // tolerate rounding in half/width so that exact multiples are not padded
    let count = (half / width * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let edge = count as f64 * width;
    (0..=2 * count).map(|k| -edge + k as f64 * width).collect()
}

/// Pairwise (tree) summation. The order depends only on the length of the
/// input, so results are reproducible.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 64;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Tensor-product sum `Σ w_1…w_n f(x)` over per-axis `(node, weight)` lists.
/// The outermost axis is split across threads; partial sums are combined in
/// index order.
pub fn tensor_sum<F>(axes: &[Vec<(f64, f64)>], f: F) -> f64
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    match axes.len() {
        0 => f(&[]),
        1 => pairwise_sum(&axes[0].iter().map(|&(x, w)| w * f(&[x])).collect::<Vec<_>>()),
        _ => {
            let partial: Vec<f64> = axes[0]
                .par_iter()
                .map(|&(x0, w0)| {
                    let mut point = vec![0.0; axes.len()];
                    point[0] = x0;
                    w0 * inner_sum(&axes[1..], &mut point, 1, &f)
                })
                .collect();
            pairwise_sum(&partial)
        }
    }
}

fn inner_sum<F: Fn(&[f64]) -> f64>(
    axes: &[Vec<(f64, f64)>],
    point: &mut [f64],
    depth: usize,
    f: &F,
) -> f64 {
    let (first, rest) = axes.split_first().expect("non-empty axes");
    let mut acc = 0.0;
    for &(x, w) in first {
        point[depth] = x;
        acc += w * if rest.is_empty() { f(point) } else { inner_sum(rest, point, depth + 1, f) };
    }
    acc
}

/// Extrapolates truncated integrals whose error decays like `1/R`:
/// `2 I(2R) - I(R)`.
pub fn richardson_linear(at_r: f64, at_2r: f64) -> f64 {
    2.0 * at_2r - at_r
}
