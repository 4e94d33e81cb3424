//! Radial comparison equation ḣ = h″ + φ(k, s)h′, the hypoelliptic heat
//! equation on the Heisenberg group, and the check u ≥ h∘r.

use crate::distops::heisenberg_distance;
use crate::frame::Point;
use crate::numerics::entire::{d, q};
use crate::report::ComparisonReport;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HeatError {
    #[error("φ is defined for k ≥ 0 and s > 0 below the first pole; got k = {k}, s = {s}")]
    PhiDomain { k: f64, s: f64 },
    #[error("time step {dt:e} exceeds the stability bound {bound:e}")]
    Cfl { dt: f64, bound: f64 },
    #[error("instability: sup-norm {sup:e} at t = {t}")]
    Unstable { t: f64, sup: f64 },
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error(transparent)]
    Io(#[from] IoError),
}

/// io::Error wrapper that keeps `HeatError: Clone + PartialEq`.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{0}")]
pub struct IoError(pub String);

impl From<std::io::Error> for HeatError {
    fn from(e: std::io::Error) -> Self {
        HeatError::Io(IoError(e.to_string()))
    }
}

/// φ(k, s) = √k(sin x − x cos x)/(2 − 2cos x − x sin x), x = s√k, with
/// the limit 4/s at k = 0. Written as Q(ks²)/(s·D(ks²)).
pub fn phi(k: f64, s: f64) -> Result<f64, HeatError> {
    if !(k >= 0.0 && s > 0.0) || s * k.sqrt() >= 2.0 * PI {
        return Err(HeatError::PhiDomain { k, s });
    }
    let z = k * s * s;
    let dh = d(z);
    if dh.abs() < 1e-14 {
        return Err(HeatError::PhiDomain { k, s });
    }
    Ok(q(z) / (s * dh))
}

/// h(t, s) = A(t + ε)^{−5/2} exp(−s²/(4(t + ε))).
pub fn remark_solution(t: f64, s: f64, eps: f64, amplitude: f64) -> f64 {
    let tt = t + eps;
    amplitude * tt.powf(-2.5) * (-s * s / (4.0 * tt)).exp()
}

/// ḣ − h″ − (4/s)h′ for the explicit solution, from analytic derivatives.
pub fn remark_residual(t: f64, s: f64, eps: f64) -> f64 {
    let tt = t + eps;
    let h = remark_solution(t, s, eps, 1.0);
    let h_t = h * (-2.5 / tt + s * s / (4.0 * tt * tt));
    let h_s = -h * s / (2.0 * tt);
    let h_ss = h * (s * s / (4.0 * tt * tt) - 0.5 / tt);
    h_t - h_ss - 4.0 / s * h_s
}

/// Numerical solution of the comparison equation on a uniform s-grid.
#[derive(Debug, Clone, Serialize)]
pub struct RadialBarrier {
    pub k: f64,
    pub s: Vec<f64>,
    pub times: Vec<f64>,
    /// `values[i][j]` = h(times[i], s[j])
    pub values: Vec<Vec<f64>>,
    /// largest h′ seen on the grid (≤ 0 when monotonicity persists)
    pub max_slope: f64,
    /// discrete residual of the differentiated equation for h′
    pub derivative_residual: f64,
}

impl RadialBarrier {
    /// Cubic interpolation in s, linear in t.
    pub fn value(&self, t: f64, s: f64) -> f64 {
        let n = self.times.len();
        let i = match self.times.iter().position(|&ti| ti >= t) {
            Some(0) | None if n == 1 => 0,
            Some(0) => 0,
            Some(i) => i - 1,
            None => n - 2,
        };
        if n == 1 {
            return self.interp_s(0, s);
        }
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        (1.0 - w) * self.interp_s(i, s) + w * self.interp_s(i + 1, s)
    }

    fn interp_s(&self, i: usize, s: f64) -> f64 {
        let ds = self.s[1] - self.s[0];
        let n = self.s.len();
        let pos = (s / ds).clamp(0.0, (n - 1) as f64);
        let j = (pos.floor() as usize).clamp(1, n.saturating_sub(3).max(1));
        let row = &self.values[i];
        let x = pos - j as f64;
        let at = |m: isize| row[(j as isize + m).clamp(0, n as isize - 1) as usize];
        // Lagrange on nodes j−1..j+2
        let (p0, p1, p2, p3) = (at(-1), at(0), at(1), at(2));
        -x * (x - 1.0) * (x - 2.0) / 6.0 * p0 + (x + 1.0) * (x - 1.0) * (x - 2.0) / 2.0 * p1
            - (x + 1.0) * x * (x - 2.0) / 2.0 * p2
            + (x + 1.0) * x * (x - 1.0) / 6.0 * p3
    }
}

/// Options for [`solve_comparison_pde`].
#[derive(Debug, Clone, Copy)]
pub struct RadialOptions {
    pub s_max: f64,
    pub nodes: usize,
    pub t_end: f64,
    pub snapshots: usize,
}

fn radial_rhs(h: &[f64], phi_s: &[f64], ds: f64, right: f64, out: &mut [f64]) {
    let n = h.len();
    let at = |i: isize| -> f64 {
        if i < 0 {
            h[(-i) as usize]
        } else if i as usize >= n {
            right
        } else {
            h[i as usize]
        }
    };
    let (ds2, inv12) = (ds * ds, 1.0 / 12.0);
    for i in 0..n - 1 {
        let ii = i as isize;
        let (m2, m1, c, p1, p2) = (at(ii - 2), at(ii - 1), at(ii), at(ii + 1), at(ii + 2));
        let (h2, h1) = if i + 2 < n {
            (
                (-p2 + 16.0 * p1 - 30.0 * c + 16.0 * m1 - m2) * inv12 / ds2,
                (-p2 + 8.0 * p1 - 8.0 * m1 + m2) * inv12 / ds,
            )
        } else {
            ((p1 - 2.0 * c + m1) / ds2, (p1 - m1) / (2.0 * ds))
        };
        // h″ + (4/s)h′ → 5h″ at the origin
        out[i] = if i == 0 { 5.0 * h2 } else { h2 + phi_s[i] * h1 };
    }
    out[n - 1] = 0.0;
}

/// Method-of-lines solution on s ∈ [0, s_max] with even reflection at
/// s = 0, Dirichlet data `right(t)` at s_max, fourth-order differences and
/// RK4 in time.
pub fn solve_comparison_pde(
    k: f64,
    h_init: &dyn Fn(f64) -> f64,
    right: &dyn Fn(f64) -> f64,
    opts: &RadialOptions,
) -> Result<RadialBarrier, HeatError> {
    if opts.nodes < 8 || opts.snapshots < 2 || !(opts.s_max > 0.0) || !(opts.t_end > 0.0) {
        return Err(HeatError::Grid("need ≥ 8 nodes, ≥ 2 snapshots, positive extents".into()));
    }
    let n = opts.nodes;
    let ds = opts.s_max / (n - 1) as f64;
    let s: Vec<f64> = (0..n).map(|i| i as f64 * ds).collect();
    let mut phi_s = vec![0.0; n];
    for i in 1..n {
        phi_s[i] = phi(k, s[i])?;
    }
    let phi_max = phi_s[1..].iter().fold(0.0f64, |m, v| m.max(v.abs() * ds));
    let dt_target = 0.08 * ds * ds / (1.0 + phi_max);
    let snap_dt = opts.t_end / (opts.snapshots - 1) as f64;
    let sub = (snap_dt / dt_target).ceil().max(1.0) as usize;
    let dt = snap_dt / sub as f64;

    let mut h: Vec<f64> = s.iter().map(|&x| h_init(x)).collect();
    h[n - 1] = right(0.0);
    let sup0 = h.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let mut values = vec![h.clone()];
    let mut times = vec![0.0];
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let mut t = 0.0;
    for snap in 1..opts.snapshots {
        for _ in 0..sub {
            radial_rhs(&h, &phi_s, ds, right(t), &mut k1);
            for i in 0..n {
                tmp[i] = h[i] + 0.5 * dt * k1[i];
            }
            radial_rhs(&tmp, &phi_s, ds, right(t + 0.5 * dt), &mut k2);
            for i in 0..n {
                tmp[i] = h[i] + 0.5 * dt * k2[i];
            }
            radial_rhs(&tmp, &phi_s, ds, right(t + 0.5 * dt), &mut k3);
            for i in 0..n {
                tmp[i] = h[i] + dt * k3[i];
            }
            radial_rhs(&tmp, &phi_s, ds, right(t + dt), &mut k4);
            for i in 0..n {
                h[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            t += dt;
            h[n - 1] = right(t);
        }
        let sup = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !sup.is_finite() || sup > 1e6 * sup0 {
            return Err(HeatError::Unstable { t, sup });
        }
        t = snap as f64 * snap_dt;
        times.push(t);
        values.push(h.clone());
    }

    let mut max_slope = f64::NEG_INFINITY;
    for row in &values {
        for w in row.windows(2) {
            max_slope = max_slope.max((w[1] - w[0]) / ds);
        }
    }
    let derivative_residual = derivative_equation_residual(values.last().expect("snapshots"), &s, &phi_s, k);
    Ok(RadialBarrier {
        k,
        s,
        times,
        values,
        max_slope,
        derivative_residual,
    })
}

/// Residual of ẇ = w″ + φw′ + φ′w for w = h′, with ẇ taken as the
/// s-derivative of the semi-discrete right-hand side; relative to max|h′|.
fn derivative_equation_residual(h: &[f64], s: &[f64], phi_s: &[f64], k: f64) -> f64 {
    let n = h.len();
    let ds = s[1] - s[0];
    let d1 = |f: &dyn Fn(usize) -> f64, i: usize| (-f(i + 2) + 8.0 * f(i + 1) - 8.0 * f(i - 1) + f(i - 2)) / (12.0 * ds);
    let d2 = |f: &dyn Fn(usize) -> f64, i: usize| {
        (-f(i + 2) + 16.0 * f(i + 1) - 30.0 * f(i) + 16.0 * f(i - 1) - f(i - 2)) / (12.0 * ds * ds)
    };
    let hf = |i: usize| h[i];
    let w = |i: usize| d1(&hf, i);
    let rhs = |i: usize| d2(&hf, i) + phi_s[i] * d1(&hf, i);
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 1e-300;
    for i in 8..n.saturating_sub(8) {
        let dphi = (phi(k, s[i] + 1e-5).unwrap_or(0.0) - phi(k, s[i] - 1e-5).unwrap_or(0.0)) / 2e-5;
        let lhs = d1(&rhs, i);
        let right = d2(&w, i) + phi_s[i] * d1(&w, i) + dphi * w(i);
        worst = worst.max((lhs - right).abs());
        scale = scale.max(w(i).abs());
    }
    worst / scale
}

/// Uniform box grid in the Heisenberg chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatGrid {
    pub n: [usize; 3],
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub dt: f64,
}

impl HeatGrid {
    /// Grid with the largest stable time step times `safety` (< 1).
    pub fn new(n: [usize; 3], lo: [f64; 3], hi: [f64; 3], safety: f64) -> Result<Self, HeatError> {
        if n.iter().any(|&m| m < 3) || (0..3).any(|a| !(hi[a] > lo[a])) {
            return Err(HeatError::Grid(format!("bad box {lo:?}..{hi:?} with {n:?} nodes")));
        }
        let mut g = Self { n, lo, hi, dt: 0.0 };
        g.dt = safety * g.stability_bound();
        Ok(g)
    }

    pub fn h(&self) -> [f64; 3] {
        [0, 1, 2].map(|a| (self.hi[a] - self.lo[a]) / (self.n[a] - 1) as f64)
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize, l: usize) -> usize {
        (l * self.n[1] + j) * self.n[0] + i
    }

    pub fn point(&self, i: usize, j: usize, l: usize) -> Point {
        let h = self.h();
        Point::new(self.lo[0] + i as f64 * h[0], self.lo[1] + j as f64 * h[1], self.lo[2] + l as f64 * h[2], 0.0)
    }

    pub fn point_at(&self, idx: usize) -> Point {
        let i = idx % self.n[0];
        let j = (idx / self.n[0]) % self.n[1];
        let l = idx / (self.n[0] * self.n[1]);
        self.point(i, j, l)
    }

    pub fn on_box_boundary(&self, i: usize, j: usize, l: usize) -> bool {
        i == 0 || j == 0 || l == 0 || i + 1 == self.n[0] || j + 1 == self.n[1] || l + 1 == self.n[2]
    }

    /// Explicit-Euler bound from the diagonal of the stencil; CFL-type
    /// dt ≤ C·min(hx, hy)² with C set by the z-mixing of the frame.
    pub fn stability_bound(&self) -> f64 {
        let [hx, hy, hz] = self.h();
        let xm = self.lo[0].abs().max(self.hi[0].abs());
        let ym = self.lo[1].abs().max(self.hi[1].abs());
        let zz = (xm * xm + ym * ym) / 4.0;
        let diag = 2.0 / (hx * hx) + 2.0 / (hy * hy) + 2.0 * zz / (hz * hz);
        let mixed = (ym / (hx * hz) + xm / (hy * hz)) * 0.5;
        1.0 / (diag + 2.0 * mixed)
    }
}

/// Heat field snapshots.
#[derive(Debug, Clone)]
pub struct HeatSolution {
    pub grid: HeatGrid,
    pub times: Vec<f64>,
    pub fields: Vec<Vec<f64>>,
    /// nodes whose value was imposed (box faces and inner hole)
    pub fixed: Vec<bool>,
}

/// Δ_H u = X₁²u + X₂²u with X₁² = ∂xx − y∂xz + (y²/4)∂zz and
/// X₂² = ∂yy + x∂yz + (x²/4)∂zz, centered second-order differences.
/// Coefficients depend on (x, y) only and are tabulated per plane node.
struct Stencil {
    nx: usize,
    ny: usize,
    cxx: f64,
    cyy: f64,
    czz: Vec<f64>,
    cxz: Vec<f64>,
    cyz: Vec<f64>,
}

impl Stencil {
    fn new(g: &HeatGrid) -> Self {
        let [hx, hy, hz] = g.h();
        let [nx, ny, _] = g.n;
        let mut czz = Vec::with_capacity(nx * ny);
        let mut cxz = Vec::with_capacity(nx * ny);
        let mut cyz = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let p = g.point(i, j, 0);
                czz.push(0.25 * (p[0] * p[0] + p[1] * p[1]) / (hz * hz));
                cxz.push(-p[1] / (4.0 * hx * hz));
                cyz.push(p[0] / (4.0 * hy * hz));
            }
        }
        Self {
            nx,
            ny,
            cxx: 1.0 / (hx * hx),
            cyy: 1.0 / (hy * hy),
            czz,
            cxz,
            cyz,
        }
    }

    #[inline]
    fn apply(&self, u: &[f64], idx: usize, local: usize) -> f64 {
        let (sx, sy, sz) = (1, self.nx, self.nx * self.ny);
        let c = 2.0 * u[idx];
        self.cxx * (u[idx + sx] - c + u[idx - sx])
            + self.cyy * (u[idx + sy] - c + u[idx - sy])
            + self.czz[local] * (u[idx + sz] - c + u[idx - sz])
            + self.cxz[local] * (u[idx + sx + sz] - u[idx + sx - sz] - u[idx - sx + sz] + u[idx - sx - sz])
            + self.cyz[local] * (u[idx + sy + sz] - u[idx + sy - sz] - u[idx - sy + sz] + u[idx - sy - sz])
    }
}

/// Explicit time stepping of u̇ = Δ_H u on the box. Nodes where
/// `imposed(t, index, x)` returns a value at t = 0 are held to it from then
/// on (Dirichlet data on the faces and in any excluded region).
pub fn solve_sr_heat(
    grid: &HeatGrid,
    u_init: &(dyn Fn(&Point) -> f64 + Sync),
    imposed: &(dyn Fn(f64, usize, &Point) -> Option<f64> + Sync),
    t_end: f64,
    snapshots: usize,
) -> Result<HeatSolution, HeatError> {
    let bound = grid.stability_bound();
    if grid.dt > bound {
        return Err(HeatError::Cfl { dt: grid.dt, bound });
    }
    if snapshots < 2 || !(t_end > 0.0) {
        return Err(HeatError::Grid("need ≥ 2 snapshots and t_end > 0".into()));
    }
    let [nx, ny, _] = grid.n;
    let len = grid.len();
    let points: Vec<Point> = (0..len).map(|idx| grid.point_at(idx)).collect();
    let face: Vec<bool> = (0..len)
        .map(|idx| grid.on_box_boundary(idx % nx, (idx / nx) % ny, idx / (nx * ny)))
        .collect();
    let held: Vec<usize> = (0..len)
        .into_par_iter()
        .filter(|&idx| imposed(0.0, idx, &points[idx]).is_some())
        .collect();
    let mut fixed = face.clone();
    for &idx in &held {
        fixed[idx] = true;
    }
    let apply = |u: &mut [f64], t: f64| {
        let vals: Vec<f64> = held
            .par_iter()
            .map(|&idx| imposed(t, idx, &points[idx]).unwrap_or(u[idx]))
            .collect();
        for (&idx, v) in held.iter().zip(vals) {
            u[idx] = v;
        }
    };
    let mut u: Vec<f64> = points.par_iter().map(u_init).collect();
    apply(&mut u, 0.0);
    let sup0 = u.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);

    let snap_dt = t_end / (snapshots - 1) as f64;
    let sub = (snap_dt / grid.dt).ceil() as usize;
    let dt = snap_dt / sub as f64;
    let mut next = u.clone();
    let mut times = vec![0.0];
    let mut fields = vec![u.clone()];
    let plane = nx * ny;
    let nz = grid.n[2];
    let stencil = Stencil::new(grid);
    for snap in 1..snapshots {
        let t0 = (snap - 1) as f64 * snap_dt;
        for step in 0..sub {
            let t = t0 + (step + 1) as f64 * dt;
            next.par_chunks_mut(plane).enumerate().for_each(|(l, slab)| {
                if l == 0 || l + 1 == nz {
                    slab.copy_from_slice(&u[l * plane..(l + 1) * plane]);
                    return;
                }
                for j in 0..ny {
                    for i in 0..nx {
                        let local = j * nx + i;
                        let idx = l * plane + local;
                        slab[local] = if face[idx] {
                            u[idx]
                        } else {
                            u[idx] + dt * stencil.apply(&u, idx, local)
                        };
                    }
                }
            });
            std::mem::swap(&mut u, &mut next);
            apply(&mut u, t);
            // face values that are not imposed stay frozen
        }
        let t = snap as f64 * snap_dt;
        let sup = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !sup.is_finite() || sup > 10.0 * sup0 {
            return Err(HeatError::Unstable { t, sup });
        }
        times.push(t);
        fields.push(u.clone());
    }
    Ok(HeatSolution {
        grid: *grid,
        times,
        fields,
        fixed,
    })
}

/// Writes snapshot `i` as CSV with columns x,y,z,u.
pub fn write_field_csv(sol: &HeatSolution, i: usize, out: &mut dyn Write) -> Result<(), HeatError> {
    writeln!(out, "x,y,z,u")?;
    for (idx, v) in sol.fields[i].iter().enumerate() {
        let p = sol.grid.point_at(idx);
        writeln!(out, "{},{},{},{}", p[0], p[1], p[2], v)?;
    }
    Ok(())
}

/// Checks u(t, x) ≥ h(t, r(x)) − tol over all snapshots at free nodes.
/// Initial data and imposed values are recorded as hypotheses.
pub fn cheeger_yau_check(
    sol: &HeatSolution,
    barrier: &(dyn Fn(f64, f64) -> f64 + Sync),
    r_field: &(dyn Fn(&Point) -> f64 + Sync),
    tol: f64,
) -> ComparisonReport {
    let grid = &sol.grid;
    let r: Vec<f64> = (0..grid.len()).into_par_iter().map(|idx| r_field(&grid.point_at(idx))).collect();
    let mut rep = ComparisonReport::new("cheeger-yau", tol);
    let worst = |field: &[f64], t: f64, mask: &(dyn Fn(usize) -> bool + Sync)| -> Option<(usize, f64)> {
        field
            .par_iter()
            .enumerate()
            .filter(|(idx, _)| mask(*idx))
            .map(|(idx, u)| (idx, u - barrier(t, r[idx])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    };
    let at = |idx: usize, t: f64| {
        let p = grid.point_at(idx);
        [t, p[0], p[1], p[2]]
    };
    if let Some((idx, _)) = worst(&sol.fields[0], 0.0, &|_| true) {
        rep.require_le("u(0) >= h(0, r)", &at(idx, 0.0), barrier(0.0, r[idx]), sol.fields[0][idx]);
    }
    for (ti, &t) in sol.times.iter().enumerate().skip(1) {
        let field = &sol.fields[ti];
        if let Some((idx, _)) = worst(field, t, &|i| sol.fixed[i]) {
            rep.require_le("boundary u >= h(t, r)", &at(idx, t), barrier(t, r[idx]), field[idx]);
        }
        if let Some((idx, _)) = worst(field, t, &|i| !sol.fixed[i]) {
            rep.check_le("u >= h(t, r)", &at(idx, t), barrier(t, r[idx]), field[idx]);
        }
    }
    rep
}

/// Parameters of the Heisenberg pipeline run.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PipelineConfig {
    pub nodes: usize,
    pub eps: f64,
    pub t_end: f64,
    pub hole: f64,
    pub half_width: f64,
    pub half_height: f64,
    pub snapshots: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            nodes: 64,
            eps: 0.1,
            t_end: 0.1,
            hole: 0.5,
            half_width: 3.0,
            half_height: 0.75,
            snapshots: 6,
        }
    }
}

/// Full run on the Heisenberg group: barrier = the explicit radial solution
/// scaled to h(0, 0) = 1, heat equation outside the ball r < hole with
/// barrier data on the hole and the box, initial data h(0, |(x, y)|) which
/// dominates h(0, r) because |(x, y)| ≤ r.
pub fn heisenberg_pipeline(cfg: &PipelineConfig) -> Result<(HeatSolution, ComparisonReport), HeatError> {
    let n = cfg.nodes;
    let (w, hgt) = (cfg.half_width, cfg.half_height);
    let grid = HeatGrid::new([n, n, n], [-w, -w, -hgt], [w, w, hgt], 0.9)?;
    let amp = cfg.eps.powf(2.5);
    let eps = cfg.eps;
    let barrier = move |t: f64, s: f64| remark_solution(t, s, eps, amp);
    let o = Point::zeros();
    let r_field = move |p: &Point| heisenberg_distance(&o, p);
    let r: Vec<f64> = (0..grid.len()).into_par_iter().map(|idx| r_field(&grid.point_at(idx))).collect();
    let [nx, ny, _] = grid.n;
    let face = |idx: usize| grid.on_box_boundary(idx % nx, (idx / nx) % ny, idx / (nx * ny));
    let hole = cfg.hole;
    let init = |p: &Point| barrier(0.0, p[0].hypot(p[1]));
    let face_or_hole = |t: f64, idx: usize, _: &Point| (face(idx) || r[idx] < hole).then(|| barrier(t, r[idx]));
    let sol = solve_sr_heat(&grid, &init, &face_or_hole, cfg.t_end, cfg.snapshots)?;
    let rep = cheeger_yau_check(&sol, &barrier, &r_field, 1e-6);
    Ok((sol, rep))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_values() {
        assert!((phi(0.0, 2.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((phi(1e-12, 1.0).unwrap() - 4.0).abs() < 1e-6);
        assert!((phi(1.0, PI).unwrap() - PI / 4.0).abs() < 1e-13);
        assert!(phi(-1.0, 1.0).is_err());
        assert!(phi(1.0, 2.0 * PI).is_err());
    }

    #[test]
    fn remark_is_exact() {
        assert!(remark_residual(0.5, 1.0, 0.1).abs() < 1e-12);
        assert!(remark_residual(0.0, 40.0, 0.1).abs() < 1e-12);
    }

    #[test]
    fn constant_barrier_stays_constant() {
        let opts = RadialOptions {
            s_max: 3.0,
            nodes: 60,
            t_end: 0.2,
            snapshots: 3,
        };
        let b = solve_comparison_pde(0.0, &|_| 2.0, &|_| 2.0, &opts).unwrap();
        for row in &b.values {
            assert!(row.iter().all(|v| (v - 2.0).abs() < 1e-12));
        }
    }

    #[test]
    fn constant_heat_field() {
        let g = HeatGrid::new([9, 9, 9], [-1.0; 3], [1.0; 3], 0.9).unwrap();
        let sol = solve_sr_heat(&g, &|_| 1.5, &|_, _, _| None, 0.05, 3).unwrap();
        assert!(sol.fields.last().unwrap().iter().all(|v| (v - 1.5).abs() < 1e-13));
    }

    #[test]
    fn cfl_violation_is_rejected() {
        let mut g = HeatGrid::new([9, 9, 9], [-1.0; 3], [1.0; 3], 0.9).unwrap();
        g.dt *= 2.0;
        assert!(matches!(solve_sr_heat(&g, &|_| 0.0, &|_, _, _| None, 0.1, 2), Err(HeatError::Cfl { .. })));
    }
}
