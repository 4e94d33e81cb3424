//! Branch inverses of f(y) = tan√y/√y and g(y) = tanh√y/√y, and the
//! infima that locate the SL(2) cut locus.

use super::ModelError;
use crate::numerics::central_diff4;
use crate::numerics::roots::{bisect_newton, golden_min};
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};

const COARSE: f64 = 1e-3;
const FINE: f64 = 1e-14;

/// s solving u·sin s = s·cos s on branch `n` (u = 1/x, u ≥ 0).
///
/// Branch 0 lives on s ∈ [0, π/2] and needs u ≤ 1; branch n ≥ 1 lives on
/// (nπ, nπ + π/2).
fn f_branch_s(n: usize, u: f64) -> Result<f64, ModelError> {
    let phi = |s: f64| u * s.sin() - s * s.cos();
    let dphi = |s: f64| (u - 1.0) * s.cos() + s * s.sin();
    if n == 0 {
        if u > 1.0 {
            return Err(ModelError::BranchDomain(1.0 / u));
        }
        let gap = 1.0 - u;
        if gap == 0.0 {
            return Ok(0.0);
        }
        if gap < 1e-10 {
            // tan s/s = 1 + s²/3 + …
            return Ok((3.0 * gap / u).sqrt());
        }
        if u == 0.0 {
            return Ok(FRAC_PI_2);
        }
        let lo = 0.5 * gap.sqrt();
        return Ok(bisect_newton(phi, Some(&dphi), lo, FRAC_PI_2, COARSE, FINE)?);
    }
    let base = n as f64 * PI;
    if u == 0.0 {
        return Ok(base + FRAC_PI_2);
    }
    if u.is_infinite() {
        return Ok(base);
    }
    Ok(bisect_newton(phi, Some(&dphi), base, base + FRAC_PI_2, COARSE, FINE)?)
}

/// Inverse of f on branch `n` at x: the y with tan√y/√y = x.
pub fn f_branch_inverse(n: usize, x: f64) -> Result<f64, ModelError> {
    if !(x >= 0.0) {
        return Err(ModelError::BranchDomain(x));
    }
    let s = f_branch_s(n, 1.0 / x)?;
    Ok(s * s)
}

/// Inverse of g on (0, 1]: the y ≥ 0 with tanh√y/√y = x.
pub fn g_inverse(x: f64) -> Result<f64, ModelError> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(ModelError::BranchDomain(x));
    }
    let gap = 1.0 - x;
    if gap == 0.0 {
        return Ok(0.0);
    }
    if gap < 1e-10 {
        return Ok(3.0 * gap);
    }
    let psi = |s: f64| s.tanh() - x * s;
    let dpsi = |s: f64| 1.0 - s.tanh().powi(2) - x;
    let lo = 0.5 * (3.0 * gap).sqrt();
    let s = bisect_newton(psi, Some(&dpsi), lo, 1.0 / x + 1.0, COARSE, FINE)?;
    Ok(s * s)
}

/// F₁, F₂ (smallest and second-smallest nonnegative solutions of f(y) = x)
/// and G (defined only for x ≤ 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchValues {
    pub x: f64,
    pub f1: f64,
    pub f2: f64,
    pub g: Option<f64>,
}

pub fn sl2_branch_functions(x: f64) -> Result<BranchValues, ModelError> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(ModelError::BranchDomain(x));
    }
    let (b1, b2) = if x >= 1.0 { (0, 1) } else { (1, 2) };
    Ok(BranchValues {
        x,
        f1: f_branch_inverse(b1, x)?,
        f2: f_branch_inverse(b2, x)?,
        g: if x > 0.0 && x <= 1.0 { Some(g_inverse(x)?) } else { None },
    })
}

/// F′ from the implicit-function identity, with the x = 1 limit on branch 0.
pub fn f_prime_identity(x: f64, y: f64) -> f64 {
    let den = 1.0 + x * x * y - x;
    if y.abs() < 1e-12 {
        3.0
    } else {
        2.0 * y / den
    }
}

pub fn g_prime_identity(x: f64, y: f64) -> f64 {
    let den = 1.0 - x * x * y - x;
    if y.abs() < 1e-12 {
        -3.0
    } else {
        2.0 * y / den
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct F1gResiduals {
    /// max relative FD-vs-identity mismatch over x ∈ [0.01, 50]
    pub max_f: f64,
    pub max_g: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutArgmins {
    /// minimizer of 4(F₁ + G) over (0, 1)
    pub r1_x: f64,
    /// minimizer of 4(F₂ − F₁) stored as 1/x, so 0 means x → ∞
    pub r2_inv_x: f64,
    /// first positive root h of tan(h/2)/h = 1/2
    pub r3_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutResiduals {
    pub r2_minus_8pi2: f64,
    /// |F₁′(1) + G′(1)| from one-sided differences
    pub stationarity: f64,
    /// |r₃ − 4·F(1)| on the first nontrivial branch
    pub r3_consistency: f64,
    pub f1g: F1gResiduals,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutReport {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub argmins: CutArgmins,
    pub residuals: CutResiduals,
    pub tol: f64,
    pub passed: bool,
}

fn scan_then_golden(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize, tol: f64) -> (f64, f64) {
    let step = (b - a) / n as f64;
    let (mut best_i, mut best_v) = (0, f64::INFINITY);
    for i in 0..=n {
        let v = f(a + step * i as f64);
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    let lo = a + step * best_i.saturating_sub(1) as f64;
    let hi = (a + step * (best_i + 1) as f64).min(b);
    golden_min(f, lo, hi, tol)
}

fn f1g_residuals() -> Result<F1gResiduals, ModelError> {
    let n = 200;
    let (mut max_f, mut max_g, mut samples) = (0.0f64, 0.0f64, 0);
    for i in 0..n {
        let x = 0.01 * (5000f64).powf(i as f64 / (n - 1) as f64);
        let h = 1e-3 * x;
        for branch in 0..3 {
            // keep the stencil inside the branch domain
            if branch == 0 && x - 2.0 * h <= 1.0 {
                continue;
            }
            let y = f_branch_inverse(branch, x)?;
            let fd = central_diff4(|e| f_branch_inverse(branch, x + e).unwrap_or(f64::NAN), h);
            let exact = f_prime_identity(x, y);
            max_f = max_f.max((fd - exact).abs() / exact.abs().max(1.0));
            samples += 1;
        }
        if x + 2.0 * h < 1.0 {
            let y = g_inverse(x)?;
            let fd = central_diff4(|e| g_inverse(x + e).unwrap_or(f64::NAN), h);
            let exact = g_prime_identity(x, y);
            max_g = max_g.max((fd - exact).abs() / exact.abs().max(1.0));
            samples += 1;
        }
    }
    Ok(F1gResiduals { max_f, max_g, samples })
}

/// One-sided second-order difference: F on branch 0 exists only for x ≥ 1
/// and G only for x ≤ 1.
fn stationarity_at_one() -> Result<f64, ModelError> {
    let h = 1e-5;
    let f = |x: f64| f_branch_inverse(0, x);
    let g = |x: f64| g_inverse(x);
    let df = (-3.0 * f(1.0)? + 4.0 * f(1.0 + h)? - f(1.0 + 2.0 * h)?) / (2.0 * h);
    let dg = (3.0 * g(1.0)? - 4.0 * g(1.0 - h)? + g(1.0 - 2.0 * h)?) / (2.0 * h);
    Ok((df + dg).abs())
}

/// Computes r₁, r₂, r₃ and checks r₂ = 8π², r₂ < r₃ ≤ r₁ and the
/// derivative identities.
pub fn sl2_cut_analysis(tol: f64) -> Result<CutReport, ModelError> {
    if !(tol > 0.0) {
        return Err(ModelError::BranchDomain(tol));
    }
    let eval = |r: Result<f64, ModelError>| r.unwrap_or(f64::INFINITY);

    // r₁ on (0,1), continuous up to the x = 1 endpoint
    let sum = |x: f64| 4.0 * (eval(f_branch_inverse(1, x)) + eval(g_inverse(x)));
    let (r1_x, r1) = scan_then_golden(&sum, 0.02, 1.0, 200, 1e-10);

    // r₂: x ≥ 1 through u = 1/x ∈ [0,1], then x ∈ (0,1)
    let gap_hi = |u: f64| 4.0 * (eval(f_branch_s(1, u).map(|s| s * s)) - eval(f_branch_s(0, u).map(|s| s * s)));
    let (u_a, r2_a) = scan_then_golden(&gap_hi, 0.0, 1.0, 200, 1e-10);
    let gap_lo = |x: f64| 4.0 * (eval(f_branch_inverse(2, x)) - eval(f_branch_inverse(1, x)));
    let (x_b, r2_b) = scan_then_golden(&gap_lo, 0.01, 1.0, 200, 1e-10);
    let (r2, r2_inv_x) = if r2_a <= r2_b { (r2_a, u_a) } else { (r2_b, 1.0 / x_b) };

    // r₃ from tan(h/2)/h = 1/2, written without poles
    let psi = |h: f64| (0.5 * h).sin() - 0.5 * h * (0.5 * h).cos();
    let dpsi = |h: f64| 0.25 * h * (0.5 * h).sin();
    let r3_h = bisect_newton(psi, Some(&dpsi), 2.0 * PI + 1e-9, 3.0 * PI, COARSE, FINE)?;
    let r3 = r3_h * r3_h;

    let residuals = CutResiduals {
        r2_minus_8pi2: r2 - 8.0 * PI * PI,
        stationarity: stationarity_at_one()?,
        r3_consistency: (r3 - 4.0 * f_branch_inverse(1, 1.0)?).abs(),
        f1g: f1g_residuals()?,
    };
    let passed = residuals.r2_minus_8pi2.abs() <= tol
        && r2 < r3
        && r3 <= r1 + tol
        && residuals.f1g.max_f <= 1e-6
        && residuals.f1g.max_g <= 1e-6;
    Ok(CutReport {
        r1,
        r2,
        r3,
        argmins: CutArgmins { r1_x, r2_inv_x, r3_h },
        residuals,
        tol,
        passed,
    })
}
