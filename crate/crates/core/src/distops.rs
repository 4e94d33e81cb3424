//! Carnot–Carathéodory distance by shooting, the subriemannian Hessian and
//! sub-Laplacian, their explicit space-form values and the comparison
//! checks between them.
//!
//! Throughout, ds = −r²/2 with r = d(·, x₀). Its differential at z is the
//! covector at z whose time-1 geodesic ends at x₀, so vⱼds(z) = hⱼ of that
//! covector and only one level of finite differences is needed for the
//! second derivatives.

use crate::frame::{ContactFrame, FrameError, Momenta, Point, StructureConstants};
use crate::geoflow::{exp_map_tol, GeoError, FD_FLOW_TOL};
use crate::models::{ModelKind, ModelSpace};
use crate::numerics::central_diff4;
use crate::numerics::entire::{d, p, q, sinc_s};
use crate::numerics::roots::bisect_newton;
use crate::report::ComparisonReport;
use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistError {
    #[error("target coincides with the base point")]
    Coincident,
    #[error("shooting did not converge (best residual {best_residual:e}); candidates {candidates:?}")]
    NoConvergence { best_residual: f64, candidates: Vec<[f64; 3]> },
    #[error("horizontal gradient vanishes (2H(df) = {0:e})")]
    VerticalGradient(f64),
    #[error("conjugate denominator vanishes at z = {0}")]
    Pole(f64),
    #[error(transparent)]
    Flow(#[from] GeoError),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// Distance together with the covector realizing it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceResult {
    pub r: f64,
    /// momenta at the target x whose time-1 geodesic reaches x₀
    pub covector: Momenta,
    pub v0r: f64,
    pub in_domain: bool,
    /// |exp(x, α*, 1) − x₀| in ambient coordinates
    pub residual: f64,
}

/// Exact Heisenberg distance between chart points.
///
/// For ρ = |(x, y)| and z of x₀⁻¹x, solve |z|/ρ² = (θ − sin θ)/(8 sin²(θ/2))
/// on (0, 2π); then r = ρθ/(2 sin(θ/2)). On the axis r² = 4π|z|.
pub fn heisenberg_distance(x0: &Point, x: &Point) -> f64 {
    let (dx, dy) = (x[0] - x0[0], x[1] - x0[1]);
    let dz = x[2] - x0[2] - 0.5 * (x0[0] * x[1] - x0[1] * x[0]);
    let rho = dx.hypot(dy);
    if dz == 0.0 {
        return rho;
    }
    if rho == 0.0 {
        return (4.0 * PI * dz.abs()).sqrt();
    }
    let a = dz.abs() / (rho * rho);
    let mu = |t: f64| {
        let num = if t < 1e-2 {
            t.powi(3) / 6.0 - t.powi(5) / 120.0 + t.powi(7) / 5040.0
        } else {
            t - t.sin()
        };
        num / (8.0 * (0.5 * t).sin().powi(2))
    };
    let hi = 2.0 * PI * (1.0 - 1e-15);
    if mu(hi) <= a {
        return (4.0 * PI * dz.abs()).sqrt().max(rho);
    }
    let theta = bisect_newton(|t| mu(t) - a, None, 1e-300_f64.max(a * 1e-3), hi, 1e-6, 1e-15).unwrap_or(hi);
    rho * 0.5 * theta / (0.5 * theta).sin()
}

const SHOOT_TOL: f64 = 1e-14;
/// Residual below which a shooting solve counts as converged.
const ACCEPT_TOL: f64 = 1e-10;
const MAX_LM_ITERS: usize = 80;

fn shoot_residual(m: &ModelSpace, x0: &Point, x: &Point, lambda: &Momenta) -> Result<Vector3<f64>, DistError> {
    let end = exp_map_tol(m, x, lambda, 1.0, FD_FLOW_TOL)?;
    Ok(m.displacement(x0, &end)?)
}

/// Damped Gauss–Newton (Levenberg–Marquardt) on the shooting map; the
/// damping copes with the rank drop on the cut locus.
fn refine(m: &ModelSpace, x0: &Point, x: &Point, start: &Momenta) -> Result<(Momenta, f64), DistError> {
    let mut lambda = *start;
    let mut g = shoot_residual(m, x0, x, &lambda)?;
    let mut mu = 1e-8;
    for _ in 0..MAX_LM_ITERS {
        if g.norm() < SHOOT_TOL {
            break;
        }
        let step = 1e-6 * (1.0 + lambda.norm());
        let mut jac = Matrix3::zeros();
        for j in 0..3 {
            let mut e = Momenta::zeros();
            e[j] = step;
            let col = (shoot_residual(m, x0, x, &(lambda + e))? - shoot_residual(m, x0, x, &(lambda - e))?) / (2.0 * step);
            jac.set_column(j, &col);
        }
        let jtj = jac.transpose() * jac;
        let jtg = jac.transpose() * g;
        let mut accepted = false;
        for _ in 0..12 {
            let damped = jtj + Matrix3::identity() * (mu * (1.0 + jtj.diagonal().max()));
            let Some(delta) = damped.lu().solve(&jtg) else {
                mu *= 10.0;
                continue;
            };
            let trial = lambda - delta;
            match shoot_residual(m, x0, x, &trial) {
                Ok(gt) if gt.norm() < g.norm() => {
                    lambda = trial;
                    g = gt;
                    mu = (mu * 0.1).max(1e-14);
                    accepted = true;
                    break;
                }
                _ => mu *= 10.0,
            }
        }
        if !accepted {
            break;
        }
    }
    Ok((lambda, g.norm()))
}

fn finish(m: &ModelSpace, x0: &Point, x: &Point, lambda: Momenta) -> Result<DistanceResult, DistError> {
    let r = lambda[1].hypot(lambda[2]);
    let end = exp_map_tol(m, x, &lambda, 1.0, FD_FLOW_TOL)?;
    let k = m.curvature();
    let sigma = lambda[0] * lambda[0] + k * r * r;
    let in_bound = m.radius_bound().map_or(true, |b| r <= b);
    Ok(DistanceResult {
        r,
        covector: lambda,
        v0r: if r > 0.0 { -lambda[0] / r } else { f64::NAN },
        in_domain: in_bound && sigma <= 4.0 * PI * PI * (1.0 + 1e-9),
        residual: (end - x0).norm(),
    })
}

/// Distance from a warm-start covector at `x` (no global search).
pub fn distance_from(m: &ModelSpace, x0: &Point, x: &Point, guess: &Momenta) -> Result<DistanceResult, DistError> {
    let (lambda, res) = refine(m, x0, x, guess)?;
    if res >= ACCEPT_TOL {
        return Err(DistError::NoConvergence {
            best_residual: res,
            candidates: vec![[lambda[0], lambda[1], lambda[2]]],
        });
    }
    finish(m, x0, x, lambda)
}

/// d(x₀, x) by multistart shooting from x: an 8×8 grid over (h₀, θ) at
/// the homogeneity-predicted radius, the best starts refined, the shortest
/// converged geodesic kept.
pub fn distance(m: &ModelSpace, x0: &Point, x: &Point) -> Result<DistanceResult, DistError> {
    let disp = m.displacement(x, x0)?;
    if disp.norm() == 0.0 && (x - x0).norm() == 0.0 {
        return Err(DistError::Coincident);
    }
    let rho = disp[1].hypot(disp[2]);
    let h_span = 0.95 * 2.0 * PI;
    let starts: Vec<Momenta> = (0..8)
        .flat_map(|i| (0..8).map(move |j| (i, j)))
        .map(|(i, j)| {
            let h0 = -h_span + 2.0 * h_span * i as f64 / 7.0;
            let theta = 2.0 * PI * j as f64 / 8.0;
            // Heisenberg: horizontal displacement ρ = r·sin(h₀/2)/(h₀/2)
            let gain = sinc_s(0.25 * h0 * h0).max(0.05);
            let r = if rho > 1e-12 { rho / gain } else { (4.0 * PI * disp[0].abs()).sqrt() };
            Momenta::new(h0, r * theta.cos(), r * theta.sin())
        })
        .collect();
    let mut scored: Vec<(f64, Momenta)> = starts
        .par_iter()
        .map(|s| (shoot_residual(m, x0, x, s).map(|g| g.norm()).unwrap_or(f64::INFINITY), *s))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let refined: Vec<(Momenta, f64)> = scored
        .par_iter()
        .take(8)
        .filter_map(|(_, s)| refine(m, x0, x, s).ok())
        .collect();
    let best = refined
        .iter()
        .filter(|(_, res)| *res < ACCEPT_TOL)
        .min_by(|a, b| a.0[1].hypot(a.0[2]).total_cmp(&b.0[1].hypot(b.0[2])));
    match best {
        Some((lambda, _)) => finish(m, x0, x, *lambda),
        None => Err(DistError::NoConvergence {
            best_residual: refined.iter().map(|r| r.1).fold(f64::INFINITY, f64::min),
            candidates: refined.iter().map(|(l, _)| [l[0], l[1], l[2]]).collect(),
        }),
    }
}

/// First and second frame derivatives of a scalar at a point:
/// `grad[j] = vⱼf`, `second[(i, j)] = vᵢ(vⱼf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameJet {
    pub grad: Vector3<f64>,
    pub second: Matrix3<f64>,
}

impl FrameJet {
    /// Residual of vᵢvⱼf − vⱼvᵢf = Σ a_ij^k v_k f over the three pairs.
    pub fn bracket_residual(&self, sc: &StructureConstants) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let lhs = self.second[(i, j)] - self.second[(j, i)];
            let rhs: f64 = (0..3).map(|k| sc.a[i][j][k] * self.grad[k]).sum();
            worst = worst.max((lhs - rhs).abs());
        }
        worst
    }
}

/// Jet by nested fourth-order central differences along the frame.
pub fn frame_jet_fd<F: ContactFrame + ?Sized>(frame: &F, f: &dyn Fn(&Point) -> f64, x: &Point, step: f64) -> FrameJet {
    let along = |p: &Point, l: usize, s: f64| {
        let mut e = Vector3::zeros();
        e[l] = s;
        frame.shift(p, &e)
    };
    let first = |p: &Point, j: usize| central_diff4(|s| f(&along(p, j, s)), step);
    FrameJet {
        grad: Vector3::from_fn(|j, _| first(x, j)),
        second: Matrix3::from_fn(|i, j| central_diff4(|s| first(&along(x, i, s), j), step)),
    }
}

/// Jet of ds = −d(·, x₀)²/2 at x from warm-started shooting; returns the
/// distance data at x as well.
pub fn distance_jet(
    m: &ModelSpace,
    x0: &Point,
    x: &Point,
    at_x: &DistanceResult,
    step: f64,
) -> Result<FrameJet, DistError> {
    let mut second = Matrix3::zeros();
    for i in 0..3 {
        let mut e = Vector3::zeros();
        e[i] = 1.0;
        let mut vals = [Momenta::zeros(); 4];
        for (slot, s) in vals.iter_mut().zip([step, -step, 2.0 * step, -2.0 * step]) {
            let y = m.shift(x, &(e * s));
            *slot = distance_from(m, x0, &y, &at_x.covector)?.covector;
        }
        let deriv = (8.0 * (vals[0] - vals[1]) - (vals[2] - vals[3])) / (12.0 * step);
        second.set_row(i, &deriv.transpose());
    }
    Ok(FrameJet {
        grad: at_x.covector,
        second,
    })
}

/// Subriemannian Hessian in the basis of the Sasakian entry formulas;
/// index 2 is the direction of the horizontal gradient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HessianMatrix {
    pub entries: [[f64; 3]; 3],
    /// consistency of the jet with the bracket relations; the Hessian is
    /// symmetric exactly when the jet commutes as the frame does
    pub symmetry_residual: f64,
}

impl HessianMatrix {
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.entries[i][j])
    }

    fn from_matrix(m: &Matrix3<f64>, symmetry_residual: f64) -> Self {
        Self {
            entries: [0, 1, 2].map(|i| [0, 1, 2].map(|j| m[(i, j)])),
            symmetry_residual,
        }
    }

    /// tr(C₂𝕳) = 𝕳₁₁ + 𝕳₃₃.
    pub fn trace_c2(&self) -> f64 {
        self.entries[0][0] + self.entries[2][2]
    }
}

/// Below this 2H(df) the horizontal gradient counts as vanishing.
pub const MIN_HORIZONTAL: f64 = 1e-14;

/// Entry formulas of the Hessian for a Sasakian frame (a = 0).
pub fn sr_hessian(sc: &StructureConstants, jet: &FrameJet) -> Result<HessianMatrix, DistError> {
    let (f0, f1, f2) = (jet.grad[0], jet.grad[1], jet.grad[2]);
    let dd = |i: usize, j: usize| jet.second[(i, j)];
    let two_h = f1 * f1 + f2 * f2;
    if two_h < MIN_HORIZONTAL {
        return Err(DistError::VerticalGradient(two_h));
    }
    let (a1, a2) = (sc.a[1][2][1], sc.a[1][2][2]);
    let h33 = (f1 * f1 * dd(1, 1) + f1 * f2 * (dd(2, 1) + dd(1, 2)) + f2 * f2 * dd(2, 2)) / two_h;
    let h13 = (f1 * f2 * (dd(1, 1) - dd(2, 2)) - f1 * f1 * dd(2, 1) + f2 * f2 * dd(1, 2)) / two_h;
    let h11 = (f1 * f1 * dd(2, 2) + f2 * f2 * dd(1, 1) - f1 * f2 * (dd(1, 2) + dd(2, 1))) / two_h + a1 * f2 - a2 * f1;
    let h12 = f1 * dd(2, 0) - f2 * dd(1, 0) + f0 * h13;
    let h23 = f0 * h33 - f1 * dd(0, 1) - f2 * dd(0, 2);
    let h22 = two_h * dd(0, 0) - f0 * f1 * dd(1, 0) - f0 * f2 * dd(2, 0) + f0 * h23;
    let m = Matrix3::new(h11, h12, h13, h12, h22, h23, h13, h23, h33);
    Ok(HessianMatrix::from_matrix(&m, jet.bracket_residual(sc)))
}

/// Δ_H f = v₁²f + v₂²f + a₁₂¹v₂f − a₁₂²v₁f.
pub fn sublaplacian(sc: &StructureConstants, jet: &FrameJet) -> f64 {
    jet.second[(1, 1)] + jet.second[(2, 2)] + sc.a[1][2][1] * jet.grad[2] - sc.a[1][2][2] * jet.grad[1]
}

/// Hessian of an arbitrary scalar by nested finite differences.
pub fn sr_hessian_fd<F: ContactFrame + ?Sized>(frame: &F, f: &dyn Fn(&Point) -> f64, x: &Point) -> Result<HessianMatrix, DistError> {
    let sc = frame.structure_constants(x)?;
    sr_hessian(&sc, &frame_jet_fd(frame, f, x, 1e-3))
}

/// Explicit Hessian of ds on the space form of curvature k, in terms of
/// ds(z) and v₀ds(z); σ = (v₀ds)² − 2k·ds.
pub fn hessian_space_form(k: f64, ds: f64, v0ds: f64) -> Result<HessianMatrix, DistError> {
    let z = v0ds * v0ds - 2.0 * ds * k;
    let dh = d(z);
    if dh.abs() < 1e-14 {
        return Err(DistError::Pole(z));
    }
    let m = -Matrix3::new(q(z) / dh, p(z) / dh, 0.0, p(z) / dh, sinc_s(z) / dh, 0.0, 0.0, 0.0, 1.0);
    Ok(HessianMatrix::from_matrix(&m, 0.0))
}

/// Explicit Δ_H r on the space form: 4/r at σ = 0, with
/// σ = r²((v₀r)² + k).
pub fn sublaplacian_r_space_form(k: f64, r: f64, v0r: f64) -> Result<f64, DistError> {
    let z = r * r * (v0r * v0r + k);
    let dh = d(z);
    if dh.abs() < 1e-14 {
        return Err(DistError::Pole(z));
    }
    Ok(q(z) / (r * dh))
}

/// FD tolerance for comparison margins.
pub const COMPARE_TOL: f64 = 1e-6;

/// One evaluated sample of the distance field.
#[derive(Debug, Clone, Copy)]
pub struct DistanceSample {
    pub dist: DistanceResult,
    pub jet: FrameJet,
    pub hessian: HessianMatrix,
    /// Δ_H r = −(Δ_H ds + 1)/r
    pub lap_r: f64,
}

/// Distance, jet, Hessian and Δ_H r at `x` (distance measured from the
/// model origin).
pub fn evaluate_distance_field(m: &ModelSpace, x: &Point, guess: Option<&Momenta>) -> Result<DistanceSample, DistError> {
    let x0 = m.origin();
    let dist = match guess {
        Some(g) => distance_from(m, &x0, x, g)?,
        None => distance(m, &x0, x)?,
    };
    let jet = distance_jet(m, &x0, x, &dist, 1e-4)?;
    let sc = m.structure_constants(x)?;
    let hessian = sr_hessian(&sc, &jet)?;
    let lap_ds = sublaplacian(&sc, &jet);
    Ok(DistanceSample {
        dist,
        jet,
        hessian,
        lap_r: -(lap_ds + 1.0) / dist.r,
    })
}

/// Sub-Laplacian and Hessian comparison of `m` against the space form of
/// curvature `k` at the given sample points. For κ ≥ k the claims are
/// Δ_H r ≤ Δ^k r and 𝕳ds ≥ 𝕳^k ds; for κ ≤ k both reverse.
pub fn laplacian_compare(m: &ModelSpace, k: f64, samples: &[Point]) -> Result<ComparisonReport, DistError> {
    let kappa = m.curvature();
    let above = kappa >= k;
    let mut rep = ComparisonReport::new(format!("laplacian comparison {} vs k={k}", m.kind), COMPARE_TOL);
    let evaluated: Vec<Result<DistanceSample, DistError>> =
        samples.par_iter().map(|x| evaluate_distance_field(m, x, None)).collect();
    for (x, ev) in samples.iter().zip(evaluated) {
        let ev = ev?;
        let at = [x[0], x[1], x[2], x[3]];
        let r = ev.dist.r;
        rep.require_le("inside injectivity domain", &at, if ev.dist.in_domain { 0.0 } else { 1.0 }, 0.0);
        let model = sublaplacian_r_space_form(k, r, ev.dist.v0r)?;
        let reference = hessian_space_form(k, -0.5 * r * r, ev.jet.grad[0])?;
        let gap = ev.hessian.matrix() - reference.matrix();
        let sym = 0.5 * (gap + gap.transpose());
        let ev_gap = sym.symmetric_eigenvalues();
        if above {
            rep.check_le("sublaplacian", &at, ev.lap_r, model);
            rep.check_le("hessian order", &at, 0.0, ev_gap.min());
        } else {
            rep.check_le("sublaplacian", &at, model, ev.lap_r);
            rep.check_le("hessian order", &at, ev_gap.max(), 0.0);
        }
    }
    Ok(rep)
}

/// Interior sample points exp(o, α, 1) for α drawn on a fixed grid well
/// inside Ω_R, away from the axis and the conjugate boundary.
pub fn interior_samples(m: &ModelSpace, radius: f64, count: usize) -> Result<Vec<(Point, Momenta)>, DistError> {
    let k = m.curvature();
    let o = m.origin();
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    (0..count)
        .map(|i| {
            let u = (i as f64 + 0.5) / count as f64;
            let r = radius * (0.3 + 0.6 * u);
            let h_cap = (4.0 * PI * PI - k * r * r).max(0.0).sqrt();
            let h = 0.6 * h_cap * (2.0 * ((i as f64 * golden).fract()) - 1.0);
            let theta = 2.0 * PI * ((i as f64 * golden * golden).fract());
            let alpha = Momenta::new(h, r * theta.cos(), r * theta.sin());
            let traj = crate::geoflow::trajectory(m, &o, &alpha, &[1.0], FD_FLOW_TOL)?;
            // reversed covector at the endpoint flows back to o
            Ok((traj[0].x, -traj[0].h))
        })
        .collect()
}

/// True when the model is the space form of curvature `k`.
pub fn is_space_form(m: &ModelSpace, k: f64) -> bool {
    (m.curvature() - k).abs() < 1e-14 && (m.kind != ModelKind::Heisenberg || k == 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_heisenberg_distance() {
        let o = Point::zeros();
        assert!((heisenberg_distance(&o, &Point::new(1.0, 0.0, 0.0, 0.0)) - 1.0).abs() < 1e-15);
        let z = 0.3;
        let r = heisenberg_distance(&o, &Point::new(0.0, 0.0, z, 0.0));
        assert!((r - (4.0 * PI * z).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn space_form_values() {
        let h = hessian_space_form(0.0, -0.5, 0.0).unwrap().matrix();
        let expect = -Matrix3::new(4.0, 6.0, 0.0, 6.0, 12.0, 0.0, 0.0, 0.0, 1.0);
        assert!((h - expect).abs().max() < 1e-12);
        assert!((sublaplacian_r_space_form(0.0, 2.0, 0.0).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn chain_rule_relation() {
        for (k, r, v0r) in [(0.0, 1.3, 0.7), (1.0, 0.8, -0.4), (-1.0, 1.5, 0.9)] {
            let hs = hessian_space_form(k, -0.5 * r * r, -r * v0r).unwrap();
            let via_trace = -(hs.trace_c2() + 1.0) / r;
            let direct = sublaplacian_r_space_form(k, r, v0r).unwrap();
            assert!((via_trace - direct).abs() < 1e-12);
        }
    }
}
