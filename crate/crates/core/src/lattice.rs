//! Shifted-lattice certificates `(a, τ)`.
//!
//! A certificate proves uniqueness at level σ when `τ_k σ ≤ 2π` for every axis
//! and the lattice `a + τ Z^n` misses the closed support of the density.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::densities::SupportSpec;
use crate::error::{Error, Result};

/// Upper bound on lattice points examined for one certificate.
const MAX_LATTICE_POINTS: usize = 50_000_000;

/// Relative slack when testing `τ_k σ ≤ 2π`, so that `τ = 2π/σ` computed in
/// floating point is accepted.
const SPACING_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub a: Vec<f64>,
    pub tau: Vec<f64>,
    /// Minimum ℓ∞ distance from a lattice point near the support to the
    /// closed support.
    pub margin: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CertificateCheck {
    pub valid: bool,
    pub margin: f64,
    /// `τ_k σ ≤ 2π` on every axis.
    pub spacing_ok: bool,
    /// Lattice points examined.
    pub points: usize,
}

/// Lattice index range along one axis covering `[lo - τ, hi + τ]`.
fn index_range(lo: f64, hi: f64, a: f64, tau: f64) -> (i64, i64) {
    (((lo - tau - a) / tau).ceil() as i64, ((hi + tau - a) / tau).floor() as i64)
}

/// Checks a candidate certificate against a compact support.
///
/// Every lattice point inside the bounding box grown by one lattice step per
/// axis is enumerated; points farther out cannot be closer to the support
/// than their neighbours inside that band. `margin` is the smallest ℓ∞
/// distance found, and the check passes when the spacing condition holds
/// and `margin > 0`.
pub fn verify_certificate(support: &SupportSpec, sigma: f64, a: &[f64], tau: &[f64]) -> Result<CertificateCheck> {
    check_inputs(support, sigma, a, tau)?;
    let bbox = support.bounding_box.as_ref().ok_or(Error::CompactSupportRequired)?;
    let spacing_ok = tau.iter().all(|&t| t * sigma <= 2.0 * PI * (1.0 + SPACING_SLACK));
    let ranges: Vec<(i64, i64)> =
        bbox.iter().zip(a).zip(tau).map(|((&(lo, hi), &ak), &tk)| index_range(lo, hi, ak, tk)).collect();
    let total = ranges.iter().try_fold(1usize, |acc, &(s, e)| acc.checked_mul((e - s + 1).max(0) as usize));
    let total = match total {
        Some(t) if t <= MAX_LATTICE_POINTS => t,
        _ => return Err(Error::InvalidParameter("lattice too fine for exhaustive enumeration".into())),
    };
    let margin = min_distance(support, a, tau, &ranges, 0.0);
    Ok(CertificateCheck { valid: spacing_ok && margin > 0.0, margin, spacing_ok, points: total })
}

fn check_inputs(support: &SupportSpec, sigma: f64, a: &[f64], tau: &[f64]) -> Result<()> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("σ must be positive, got {sigma}")));
    }
    if a.len() != support.dim || tau.len() != support.dim {
        return Err(Error::InvalidParameter(format!(
            "offset and spacing must have dimension {}, got {} and {}",
            support.dim,
            a.len(),
            tau.len()
        )));
    }
    if tau.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidParameter("lattice spacings must be positive".into()));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("lattice offset must be finite".into()));
    }
    Ok(())
}

/// Minimum distance over the enumerated lattice points; stops early once the
/// running minimum drops to `floor`.
fn min_distance(support: &SupportSpec, a: &[f64], tau: &[f64], ranges: &[(i64, i64)], floor: f64) -> f64 {
    let n = a.len();
    if ranges.iter().any(|&(s, e)| e < s) {
        return f64::INFINITY;
    }
    let mut idx: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    let mut point = vec![0.0; n];
    let mut best = f64::INFINITY;
    loop {
        for k in 0..n {
            point[k] = a[k] + tau[k] * idx[k] as f64;
        }
        best = best.min(support.linf_distance(&point));
        if best <= floor {
            return best;
        }
        let mut k = n;
        loop {
            if k == 0 {
                return best;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] <= ranges[k].1 {
                break;
            }
            idx[k] = ranges[k].0;
        }
    }
}

/// Closed-form certificate for an ℓ^q ball of radius δ.
///
/// Applies when `δσ < π n^{1/q}`. With `s = δ n^{-1/q}` and the midpoint slack
/// `ε = (2π/σ - 2s)/2`, the spacing is `τ_k = 2s + ε` and the offset
/// `a_k = s(1 + ε)`. That offset only clears the ball when `s < 1`; otherwise
/// the centred offset `a_k = s + ε/2` is used. Returns `None` outside the
/// applicable range.
pub fn ball_certificate(q: f64, delta: f64, n: usize, sigma: f64) -> Option<Certificate> {
    if !(delta > 0.0 && sigma > 0.0 && n > 0 && q >= 2.0) {
        return None;
    }
    let root = if q.is_infinite() { 1.0 } else { (n as f64).powf(1.0 / q) };
    if delta * sigma >= PI * root {
        return None;
    }
    let s = delta / root;
    let eps = 0.5 * (2.0 * PI / sigma - 2.0 * s);
    let tau = vec![2.0 * s + eps; n];
    let support = SupportSpec::lq_ball(q, delta, n);
    [s * (1.0 + eps), s + 0.5 * eps].into_iter().find_map(|offset| {
        let a = vec![offset; n];
        let check = verify_certificate(&support, sigma, &a, &tau).ok()?;
        check.valid.then(|| Certificate { a, tau: tau.clone(), margin: check.margin, sigma })
    })
}

/// Resolution of the brute-force certificate search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchGrid {
    /// Spacings tried per axis: `τ = (2π/σ) j / tau_steps`, `j = 1..=tau_steps`.
    pub tau_steps: usize,
    /// Offsets tried per axis: `a = τ i / offset_steps`, `i = 0..offset_steps`.
    pub offset_steps: usize,
}

impl SearchGrid {
    /// 64 steps in one dimension, 20 in two, 10 beyond.
    pub fn default_for(dim: usize) -> Self {
        let steps = match dim {
            1 => 64,
            2 => 20,
            _ => 10,
        };
        Self { tau_steps: steps, offset_steps: steps }
    }
}

/// Grid search for a certificate, maximizing the margin. Ties go to the
/// smaller `‖τ‖∞`, then to the earlier grid cell. `None` means only that
/// the grid held no certificate.
pub fn find_certificate(support: &SupportSpec, sigma: f64, search: SearchGrid) -> Result<Option<Certificate>> {
    if search.tau_steps == 0 {
        return Err(Error::DegenerateSearch("tau grid has 0 steps"));
    }
    if search.offset_steps == 0 {
        return Err(Error::DegenerateSearch("offset grid has 0 steps"));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("σ must be positive, got {sigma}")));
    }
    let bbox = support.bounding_box.as_ref().ok_or(Error::CompactSupportRequired)?;
    let n = support.dim;
    let top = 2.0 * PI / sigma;
    let tau_cells = search.tau_steps.pow(n as u32);
    let offset_cells = search.offset_steps.pow(n as u32);

    let per_tau: Vec<Option<Certificate>> = (0..tau_cells)
        .into_par_iter()
        .map(|cell| {
            let tau: Vec<f64> = digits(cell, search.tau_steps, n)
                .into_iter()
                .map(|j| top * (j + 1) as f64 / search.tau_steps as f64)
                .collect();
            let mut best: Option<Certificate> = None;
            for oc in 0..offset_cells {
                let a: Vec<f64> = digits(oc, search.offset_steps, n)
                    .into_iter()
                    .zip(&tau)
                    .map(|(i, t)| t * i as f64 / search.offset_steps as f64)
                    .collect();
                let ranges: Vec<(i64, i64)> =
                    bbox.iter().zip(&a).zip(&tau).map(|((&(lo, hi), &ak), &tk)| index_range(lo, hi, ak, tk)).collect();
                let floor = best.as_ref().map_or(0.0, |b| b.margin * (1.0 - 1e-12));
                let margin = min_distance(support, &a, &tau, &ranges, floor);
                if margin > floor && margin > 0.0 && best.as_ref().is_none_or(|b| margin > b.margin) {
                    best = Some(Certificate { a, tau: tau.clone(), margin, sigma });
                }
            }
            best
        })
        .collect();

    let mut best: Option<Certificate> = None;
    for cand in per_tau.into_iter().flatten() {
        let better = match &best {
            None => true,
            Some(b) => {
                let tie = (cand.margin - b.margin).abs() <= 1e-12 * b.margin.max(1e-300);
                if tie {
                    sup_norm(&cand.tau) < sup_norm(&b.tau)
                } else {
                    cand.margin > b.margin
                }
            }
        };
        if better {
            best = Some(cand);
        }
    }
    Ok(best)
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Base-`base` digits of `cell`, most significant first.
fn digits(mut cell: usize, base: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for d in out.iter_mut().rev() {
        *d = cell % base;
        cell /= base;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangular_example_certificate() {
        let s = SupportSpec::interval(-1.0, 1.0);
        let c = verify_certificate(&s, 3.0, &[1.045], &[2.09]).unwrap();
        assert!(c.valid);
        assert!((c.margin - 0.045).abs() < 1e-12);
    }

    #[test]
    fn touching_support_is_invalid() {
        let s = SupportSpec::interval(-1.0, 1.0);
        let c = verify_certificate(&s, 3.0, &[1.0], &[2.0]).unwrap();
        assert!(!c.valid);
        assert_eq!(c.margin, 0.0);
    }

    #[test]
    fn spacing_condition_is_enforced() {
        let s = SupportSpec::interval(-1.0, 1.0);
        let c = verify_certificate(&s, 3.2, &[1.1], &[2.2]).unwrap();
        assert!(c.margin > 0.0);
        assert!(!c.spacing_ok && !c.valid);
        // boundary τσ = 2π is accepted
        let c = verify_certificate(&s, 3.0, &[2.0 * PI / 6.0], &[2.0 * PI / 3.0]).unwrap();
        assert!(c.spacing_ok && c.valid);
    }

    #[test]
    fn unbounded_support_is_rejected() {
        let r = verify_certificate(&SupportSpec::unbounded(1), 1.0, &[0.0], &[1.0]);
        assert!(matches!(r, Err(Error::CompactSupportRequired)));
        assert_eq!(Error::CompactSupportRequired.to_string(), "compact support required");
    }

    #[test]
    fn degenerate_search_rejected() {
        let s = SupportSpec::interval(-1.0, 1.0);
        let r = find_certificate(&s, 1.0, SearchGrid { tau_steps: 0, offset_steps: 4 });
        assert!(matches!(r, Err(Error::DegenerateSearch(_))));
        let r = find_certificate(&s, 1.0, SearchGrid { tau_steps: 4, offset_steps: 0 });
        assert!(matches!(r, Err(Error::DegenerateSearch(_))));
    }

    #[test]
    fn ball_recipe_example() {
        let c = ball_certificate(2.0, 1.0, 2, 4.0).unwrap();
        let s = 0.5f64.sqrt();
        let eps = 0.5 * (PI / 2.0 - 2.0 * s);
        assert!((eps - 0.0783).abs() < 1e-3);
        assert!((c.tau[0] - (2.0 * s + eps)).abs() < 1e-15);
        assert!((c.a[0] - s * (1.0 + eps)).abs() < 1e-15);
        assert!(c.margin > 0.0);
        assert!(ball_certificate(2.0, 1.0, 2, 4.6).is_none());
    }

    #[test]
    fn ball_recipe_falls_back_to_centred_offset() {
        // s = δ n^{-1/q} = 2 > 1: the recipe offset lands inside the ball
        let c = ball_certificate(2.0, 2.0, 1, 1.0).unwrap();
        assert!((c.a[0] - (2.0 + 0.5 * (PI - 2.0))).abs() < 1e-12);
        let check = verify_certificate(&SupportSpec::lq_ball(2.0, 2.0, 1), 1.0, &c.a, &c.tau).unwrap();
        assert!(check.valid);
    }

    #[test]
    fn ball_recipe_boundary_returns_none() {
        assert!(ball_certificate(f64::INFINITY, 1.0, 1, PI).is_none());
        let c = ball_certificate(f64::INFINITY, 1.0, 1, 3.0).unwrap();
        assert!(c.tau[0] > 2.0 && c.tau[0] * 3.0 <= 2.0 * PI);
    }

    #[test]
    fn digits_enumerate_cells() {
        assert_eq!(digits(5, 3, 2), vec![1, 2]);
        assert_eq!(digits(0, 3, 3), vec![0, 0, 0]);
    }
}
