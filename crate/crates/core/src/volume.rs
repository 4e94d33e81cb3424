//! Subriemannian ball volumes on the space forms.
//!
//! With cylindrical momenta (r, θ, h) the Lebesgue measure is
//! dh₀dh₁dh₂ = r dr dθ dh, and the density of exp_{x}(·, 1) with respect
//! to it and η is b^k(r, h) = r²·D(h² + kr²). Hence
//! η(B(x, R)) = 2π ∫∫_{Ω_R} b^k r dr dh.

use crate::frame::Momenta;
use crate::geoflow::{jacobian_density, GeoError};
use crate::models::{injectivity_domain, InjectivityDomain, ModelError, ModelKind, ModelSpace};
use crate::numerics::entire::d;
use crate::numerics::pairwise_sum;
use crate::numerics::quad::{adaptive, gauss_legendre};
use crate::report::ComparisonReport;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VolumeError {
    #[error(transparent)]
    Domain(#[from] ModelError),
    #[error(transparent)]
    Flow(#[from] GeoError),
    #[error("oracle grid must have at least {min} nodes per axis, got {got}")]
    Grid { min: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeMethod {
    ClosedForm,
    ExpOracle,
}

/// A ball volume with its quadrature error estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallVolumeResult {
    pub model: ModelKind,
    pub c: f64,
    pub k: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub volume: f64,
    pub err: f64,
    pub method: VolumeMethod,
}

/// b^k(r, h) = r²(2 − 2cos τ − τ sin τ)/σ², σ = h² + r²k, τ = √|σ|
/// (hyperbolic for σ < 0, r²/12 at σ = 0).
pub fn bk_density(k: f64, r: f64, h: f64) -> f64 {
    r * r * d(h * h + r * r * k)
}

const QUAD_REL: f64 = 1e-10;

fn domain_volume(dom: &InjectivityDomain) -> (f64, f64) {
    let k = dom.k();
    let inner = |r: f64| -> (f64, f64) {
        match dom.h_max(r) {
            Some(hm) if hm > 0.0 => {
                let q = adaptive(|h| bk_density(k, r, h), 0.0, hm, 1e-300, QUAD_REL);
                (2.0 * q.value, 2.0 * q.error)
            }
            _ => (0.0, 0.0),
        }
    };
    let outer = adaptive(|r| r * inner(r).0, 0.0, dom.r_max(), 1e-300, QUAD_REL);
    (2.0 * PI * outer.value, 2.0 * PI * outer.error)
}

/// η(B(x, R)) by adaptive quadrature of b^k over Ω_R.
pub fn ball_volume(m: &ModelSpace, radius: f64) -> Result<BallVolumeResult, VolumeError> {
    let dom = injectivity_domain(m, radius)?;
    let (volume, err) = if radius == 0.0 { (0.0, 0.0) } else { domain_volume(&dom) };
    Ok(BallVolumeResult {
        model: m.kind,
        c: m.c,
        k: m.curvature(),
        radius,
        volume,
        err,
        method: VolumeMethod::ClosedForm,
    })
}

/// Minimum oracle resolution per axis.
pub const MIN_ORACLE_GRID: usize = 8;

fn oracle_quadrature(m: &ModelSpace, dom: &InjectivityDomain, n: usize) -> Result<(f64, f64, usize), VolumeError> {
    let (gx, gw) = gauss_legendre(n);
    let r_max = dom.r_max();
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let x0 = m.origin();
    let terms: Result<Vec<(f64, f64, bool)>, VolumeError> = cells
        .par_iter()
        .map(|&(i, j)| {
            let r = 0.5 * r_max * (gx[i] + 1.0);
            let hm = dom.h_max(r).unwrap_or(0.0);
            let h = hm * gx[j];
            let w = gw[i] * 0.5 * r_max * gw[j] * hm;
            let est = jacobian_density(m, &x0, &Momenta::new(h, r, 0.0))?;
            Ok((w * r * est.density, w * r * est.error, est.near_conjugate))
        })
        .collect();
    let terms = terms?;
    let values: Vec<f64> = terms.iter().map(|t| t.0).collect();
    let errors: Vec<f64> = terms.iter().map(|t| t.1).collect();
    let flagged = terms.iter().filter(|t| t.2).count();
    Ok((2.0 * PI * pairwise_sum(&values), 2.0 * PI * pairwise_sum(&errors), flagged))
}

/// η(B(x, R)) by Gauss–Legendre quadrature (grid × grid in (r, h), θ = 0
/// slice times 2π) of the finite-difference Jacobian of the exponential
/// map. The error combines a half-resolution rerun with the FD estimates.
pub fn ball_volume_exp_oracle(m: &ModelSpace, radius: f64, grid: usize) -> Result<BallVolumeResult, VolumeError> {
    if grid < MIN_ORACLE_GRID {
        return Err(VolumeError::Grid {
            min: MIN_ORACLE_GRID,
            got: grid,
        });
    }
    let dom = injectivity_domain(m, radius)?;
    let (volume, err) = if radius == 0.0 {
        (0.0, 0.0)
    } else {
        let (fine, fd_err, _) = oracle_quadrature(m, &dom, grid)?;
        let (coarse, _, _) = oracle_quadrature(m, &dom, grid / 2)?;
        (fine, (fine - coarse).abs() + fd_err)
    };
    Ok(BallVolumeResult {
        model: m.kind,
        c: m.c,
        k: m.curvature(),
        radius,
        volume,
        err,
        method: VolumeMethod::ExpOracle,
    })
}

/// Relative tolerance for the Bishop volume comparison.
pub const BISHOP_REL_TOL: f64 = 2e-6;

/// Checks η(B(x,R)) ≤ η^k(B^k(R)) for a model with κ ≥ `k_lower`, plus
/// the inclusion Ω^R ⊆ {h² + k_lower·r² ≤ 4π²} used by the argument.
pub fn bishop_check(k_lower: f64, m: &ModelSpace, radius: f64) -> Result<ComparisonReport, VolumeError> {
    let target = ball_volume(m, radius)?;
    let space = ModelSpace::space_form(k_lower);
    let mut rep = ComparisonReport::new("bishop", BISHOP_REL_TOL);
    rep.require_le("k_lower <= kappa", &[], k_lower, m.curvature());
    if let Some(bound) = space.radius_bound() {
        rep.require_le("R <= 2*sqrt(2)*pi/c", &[radius], radius, bound);
    }
    let reference = ball_volume(&space, radius)?;
    // relative margins keep the tolerance meaningful across radii
    let scale = reference.volume.max(f64::MIN_POSITIVE);
    rep.check_le("volume", &[radius], target.volume / scale, reference.volume / scale);

    let dom = injectivity_domain(m, radius)?;
    let n = 200;
    for i in 0..=n {
        let r = dom.r_max() * i as f64 / n as f64;
        if let Some(hm) = dom.h_max(r) {
            let s = hm * hm + k_lower * r * r;
            rep.check_le("inclusion", &[r, hm], s / (4.0 * PI * PI), 1.0 + 1e-12);
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_examples() {
        assert!((bk_density(0.0, 2.0, 0.0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((bk_density(0.0, 1.0, PI) - 4.0 / PI.powi(4)).abs() < 1e-14);
        assert!(bk_density(0.0, 1.0, 2.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn heisenberg_scaling_is_quartic() {
        let m = ModelSpace::heisenberg();
        let v1 = ball_volume(&m, 1.0).unwrap().volume;
        let v2 = ball_volume(&m, 2.0).unwrap().volume;
        assert!((v2 / v1 - 16.0).abs() < 1e-8);
        assert_eq!(ball_volume(&m, 0.0).unwrap().volume, 0.0);
    }

    #[test]
    fn small_su2_ball_looks_flat() {
        let h = ball_volume(&ModelSpace::heisenberg(), 0.05).unwrap().volume;
        let s = ball_volume(&ModelSpace::su2(1.0).unwrap(), 0.05).unwrap().volume;
        assert!((s / h - 1.0).abs() < 1e-3);
    }

    #[test]
    fn bishop_equality_case() {
        let m = ModelSpace::su2(1.0).unwrap();
        let rep = bishop_check(1.0, &m, 1.5).unwrap();
        assert!(rep.passed(), "{rep:#?}");
        assert!(rep.samples[0].margin.abs() < BISHOP_REL_TOL);
    }
}
