//! Contact orthonormal frames {v₀, v₁, v₂} and their curvature.
//!
//! A frame is described by its vector fields in ambient coordinates. Points
//! live in R⁴: three-dimensional charts use the first three coordinates and
//! leave the fourth at zero, while SU(2) (unit quaternions) and SL(2) (2×2
//! matrices) use all four.
//!
//! Brackets are recorded as structure constants `a[i][j][k]` with
//! `[v_i, v_j] = Σ_k a_ij^k v_k`. The contact normalization fixes
//! `a_01^0 = a_02^0 = 0`, `a_12^0 = −1` and `a_01^1 + a_02^2 = 0`.

use crate::numerics::central_diff4;
use nalgebra::{Matrix3, Vector3, Vector4};
use serde::Serialize;
use thiserror::Error;

/// Ambient coordinates of a manifold point.
pub type Point = Vector4<f64>;

/// Momenta (h₀, h₁, h₂) of a covector in the dual coframe.
pub type Momenta = Vector3<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum FrameError {
    #[error("frame is singular at the query point (|det| = {det:e})")]
    Singular { det: f64 },
    #[error("point left the chart")]
    OutOfChart,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct StructureConstants {
    pub a: [[[f64; 3]; 3]; 3],
}

impl StructureConstants {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.a[i][j][k]
    }

    /// Records `[v_i, v_j] = Σ_k c_k v_k` together with the antisymmetric
    /// partner `[v_j, v_i]`.
    pub fn set_bracket(&mut self, i: usize, j: usize, c: [f64; 3]) {
        for k in 0..3 {
            self.a[i][j][k] = c[k];
            self.a[j][i][k] = -c[k];
        }
    }

    /// Constants of the Heisenberg frame: only `a_12^0 = −1`.
    pub fn heisenberg() -> Self {
        let mut sc = Self::zero();
        sc.set_bracket(1, 2, [-1.0, 0.0, 0.0]);
        sc
    }

    pub fn is_sasakian(&self, tol: f64) -> bool {
        self.a[0][1][1].abs() <= tol
            && self.a[0][2][2].abs() <= tol
            && (self.a[0][1][2] + self.a[0][2][1]).abs() <= tol
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = *self;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    out.a[i][j][k] = f(self.a[i][j][k]);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub identity: &'static str,
    pub residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<IdentityCheck>,
    pub passed: bool,
}

/// Residual threshold for the contact normalization identities.
pub const STRUCTURE_TOL: f64 = 1e-12;

/// Checks antisymmetry and the contact normalization of `sc`.
pub fn validate_structure(sc: &StructureConstants) -> ValidationReport {
    let mut antisym: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                antisym = antisym.max((sc.a[i][j][k] + sc.a[j][i][k]).abs());
            }
        }
    }
    let rows = [
        ("a_ij^k = -a_ji^k", antisym),
        ("a_01^0 = 0", sc.a[0][1][0].abs()),
        ("a_02^0 = 0", sc.a[0][2][0].abs()),
        ("a_12^0 = -1", (sc.a[1][2][0] + 1.0).abs()),
        ("a_01^1 + a_02^2 = 0", (sc.a[0][1][1] + sc.a[0][2][2]).abs()),
    ];
    let checks: Vec<IdentityCheck> = rows
        .into_iter()
        .map(|(identity, residual)| IdentityCheck {
            identity,
            residual,
            passed: residual <= STRUCTURE_TOL,
        })
        .collect();
    let passed = checks.iter().all(|c| c.passed);
    ValidationReport { checks, passed }
}

/// A contact orthonormal frame on a three-dimensional manifold.
///
/// Implementors supply the frame fields and a way to move along them; the
/// structure constants and their derivatives default to finite differences
/// and should be overridden when known in closed form.
pub trait ContactFrame: Send + Sync {
    /// Frame fields (v₀, v₁, v₂) at `p` as ambient tangent vectors.
    fn frame(&self, p: &Point) -> [Point; 3];

    /// Frame components of the ambient tangent vector `w` at `p`.
    fn components(&self, p: &Point, w: &Point) -> Result<Vector3<f64>, FrameError>;

    /// Point reached from `p` along a curve with initial velocity
    /// `Σ c_i v_i(p)` after unit parameter time.
    fn shift(&self, p: &Point, c: &Vector3<f64>) -> Point;

    /// Pulls a drifted state back onto the manifold.
    fn project(&self, _p: &mut Point) {}

    fn fd_step(&self, p: &Point) -> f64 {
        1e-4 * (1.0 + p.norm())
    }

    fn structure_constants(&self, p: &Point) -> Result<StructureConstants, FrameError> {
        bracket_structure_constants(self, p)
    }

    /// `[v_l a_ij^k for l in 0..3]`.
    fn structure_derivatives(&self, p: &Point) -> Result<[StructureConstants; 3], FrameError> {
        let h = self.fd_step(p);
        let mut out = [StructureConstants::zero(); 3];
        for (l, slot) in out.iter_mut().enumerate() {
            let mut e = Vector3::zeros();
            e[l] = 1.0;
            let at = |s: f64| self.structure_constants(&self.shift(p, &(e * s)));
            let (p1, m1, p2, m2) = (at(h)?, at(-h)?, at(2.0 * h)?, at(-2.0 * h)?);
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        slot.a[i][j][k] = (8.0 * (p1.a[i][j][k] - m1.a[i][j][k])
                            - (p2.a[i][j][k] - m2.a[i][j][k]))
                            / (12.0 * h);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Horizontal and Reeb derivatives of a scalar function at `p`:
    /// `[v₀f, v₁f, v₂f]` by fourth-order central differences.
    fn frame_gradient(&self, p: &Point, f: &dyn Fn(&Point) -> f64) -> Vector3<f64> {
        let h = self.fd_step(p);
        Vector3::from_fn(|l, _| {
            let mut e = Vector3::zeros();
            e[l] = 1.0;
            central_diff4(|s| f(&self.shift(p, &(e * s))), h)
        })
    }
}

/// Structure constants from finite-difference brackets of the frame fields:
/// `[v_i, v_j] = D v_j · v_i − D v_i · v_j`.
pub fn bracket_structure_constants<F: ContactFrame + ?Sized>(
    frame: &F,
    p: &Point,
) -> Result<StructureConstants, FrameError> {
    let h = frame.fd_step(p);
    // dv[i][j] = derivative of v_j along v_i
    let mut dv = [[Point::zeros(); 3]; 3];
    for (i, row) in dv.iter_mut().enumerate() {
        let mut e = Vector3::zeros();
        e[i] = 1.0;
        let f1 = frame.frame(&frame.shift(p, &(e * h)));
        let m1 = frame.frame(&frame.shift(p, &(e * -h)));
        let f2 = frame.frame(&frame.shift(p, &(e * (2.0 * h))));
        let m2 = frame.frame(&frame.shift(p, &(e * (-2.0 * h))));
        for j in 0..3 {
            row[j] = (8.0 * (f1[j] - m1[j]) - (f2[j] - m2[j])) / (12.0 * h);
        }
    }
    let mut sc = StructureConstants::zero();
    for i in 0..3 {
        for j in (i + 1)..3 {
            let bracket = dv[i][j] - dv[j][i];
            let c = frame.components(p, &bracket)?;
            sc.set_bracket(i, j, [c[0], c[1], c[2]]);
        }
    }
    Ok(sc)
}

/// Tanaka–Webster curvature
/// `κ = v₁a_12^2 − v₂a_12^1 − (a_12^1)² − (a_12^2)² − ½(a_01^2 − a_02^1)`.
pub fn tanaka_webster_kappa<F: ContactFrame + ?Sized>(frame: &F, p: &Point) -> Result<f64, FrameError> {
    let sc = frame.structure_constants(p)?;
    let d = frame.structure_derivatives(p)?;
    Ok(kappa_from_constants(&sc, &d))
}

pub fn kappa_from_constants(sc: &StructureConstants, d: &[StructureConstants; 3]) -> f64 {
    let a = &sc.a;
    d[1].a[1][2][2] - d[2].a[1][2][1] - a[1][2][1].powi(2) - a[1][2][2].powi(2)
        - 0.5 * (a[0][1][2] - a[0][2][1])
}

/// Riemannian curvature of the metric making (v₀, v₁, v₂) orthonormal.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RiemannianCurvature {
    /// Sectional curvature of the contact plane, K(v₁, v₂).
    pub sectional_12: f64,
    /// Ricci curvature of the Reeb direction, Rc(v₀).
    pub ricci_0: f64,
}

impl RiemannianCurvature {
    /// `2K(v₁,v₂) + Rc(v₀) + 1`.
    pub fn combination(&self) -> f64 {
        2.0 * self.sectional_12 + self.ricci_0 + 1.0
    }
}

/// Levi-Civita connection coefficients `Γ[i][j][k] = g(∇_{v_i} v_j, v_k)`
/// from the Koszul formula for an orthonormal frame.
pub fn koszul_connection(sc: &StructureConstants) -> [[[f64; 3]; 3]; 3] {
    let a = &sc.a;
    let mut g = [[[0.0; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                g[i][j][k] = 0.5 * (a[i][j][k] - a[j][k][i] + a[k][i][j]);
            }
        }
    }
    g
}

/// Sectional and Ricci curvatures from the Koszul connection and its frame
/// derivatives. Independent of the Tanaka–Webster formula.
pub fn riemannian_curvature(sc: &StructureConstants, d: &[StructureConstants; 3]) -> RiemannianCurvature {
    let gamma = koszul_connection(sc);
    let dgamma: [[[[f64; 3]; 3]; 3]; 3] = [0, 1, 2].map(|l| koszul_connection(&d[l]));
    let a = &sc.a;

    // g(R(v_a, v_b) v_c, v_e), R(X,Y) = [∇_X, ∇_Y] − ∇_[X,Y]
    let riemann = |ia: usize, ib: usize, ic: usize, ie: usize| -> f64 {
        // ∇_a ∇_b v_c, component e
        let nn = |x: usize, y: usize| -> f64 {
            let mut s = dgamma[x][y][ic][ie];
            for m in 0..3 {
                s += gamma[y][ic][m] * gamma[x][m][ie];
            }
            s
        };
        let mut r = nn(ia, ib) - nn(ib, ia);
        for m in 0..3 {
            r -= a[ia][ib][m] * gamma[m][ic][ie];
        }
        r
    };
    let sectional = |x: usize, y: usize| riemann(x, y, y, x);
    RiemannianCurvature {
        sectional_12: sectional(1, 2),
        ricci_0: sectional(0, 1) + sectional(0, 2),
    }
}

/// Riemannian route to κ: half of `2K(v₁,v₂) + Rc(v₀) + 1`.
///
/// The combination evaluates to 2κ on every frame (Heisenberg: 0, Berger
/// spheres: 2c²), so the half is the quantity comparable with
/// [`tanaka_webster_kappa`].
pub fn riemannian_kappa_oracle<F: ContactFrame + ?Sized>(frame: &F, p: &Point) -> Result<f64, FrameError> {
    let sc = frame.structure_constants(p)?;
    let d = frame.structure_derivatives(p)?;
    Ok(0.5 * riemannian_curvature(&sc, &d).combination())
}

/// `a = dh₀(H⃗) = −h₁(a_01^1 h₁ + a_01^2 h₂) − h₂(a_02^1 h₁ + a_02^2 h₂)`.
pub fn reeb_invariant_a(sc: &StructureConstants, h: &Momenta) -> f64 {
    let a = &sc.a;
    let (h1, h2) = (h[1], h[2]);
    -h1 * (a[0][1][1] * h1 + a[0][1][2] * h2) - h2 * (a[0][2][1] * h1 + a[0][2][2] * h2)
}

/// A frame on an open subset of R³ given by closures for the three fields.
/// Structure constants and their derivatives come from finite differences.
pub struct ChartFrame<F>
where
    F: Fn(&Vector3<f64>) -> [Vector3<f64>; 3] + Send + Sync,
{
    fields: F,
}

impl<F> ChartFrame<F>
where
    F: Fn(&Vector3<f64>) -> [Vector3<f64>; 3] + Send + Sync,
{
    pub fn new(fields: F) -> Self {
        Self { fields }
    }
}

/// Minimum |det| of a frame matrix before it is declared singular.
pub const SINGULAR_DET: f64 = 1e-12;

pub(crate) fn chart_components(m: Matrix3<f64>, w: &Point) -> Result<Vector3<f64>, FrameError> {
    let det = m.determinant();
    if det.abs() < SINGULAR_DET {
        return Err(FrameError::Singular { det });
    }
    let inv = m.try_inverse().ok_or(FrameError::Singular { det })?;
    Ok(inv * w.xyz())
}

impl<F> ContactFrame for ChartFrame<F>
where
    F: Fn(&Vector3<f64>) -> [Vector3<f64>; 3] + Send + Sync,
{
    fn frame(&self, p: &Point) -> [Point; 3] {
        (self.fields)(&p.xyz()).map(|v| v.push(0.0))
    }

    fn components(&self, p: &Point, w: &Point) -> Result<Vector3<f64>, FrameError> {
        let [v0, v1, v2] = (self.fields)(&p.xyz());
        chart_components(Matrix3::from_columns(&[v0, v1, v2]), w)
    }

    fn shift(&self, p: &Point, c: &Vector3<f64>) -> Point {
        let [v0, v1, v2] = (self.fields)(&p.xyz());
        (p.xyz() + v0 * c[0] + v1 * c[1] + v2 * c[2]).push(0.0)
    }
}

/// Scales every structure constant; handy for perturbation studies.
pub fn scale_constants(sc: &StructureConstants, s: f64) -> StructureConstants {
    sc.map(|x| x * s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn heisenberg_chart() -> ChartFrame<impl Fn(&Vector3<f64>) -> [Vector3<f64>; 3] + Send + Sync> {
        ChartFrame::new(|x: &Vector3<f64>| {
            [
                Vector3::new(0.0, 0.0, -1.0),
                Vector3::new(1.0, 0.0, -0.5 * x[1]),
                Vector3::new(0.0, 1.0, 0.5 * x[0]),
            ]
        })
    }

    #[test]
    fn heisenberg_constants_pass_validation() {
        assert!(validate_structure(&StructureConstants::heisenberg()).passed);
    }

    #[test]
    fn sign_flip_fails_on_a12() {
        let mut sc = StructureConstants::heisenberg();
        sc.set_bracket(1, 2, [1.0, 0.0, 0.0]);
        let report = validate_structure(&sc);
        assert!(!report.passed);
        let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed).collect();
        assert_eq!(failed.len(), 1);
        assert_eq!(failed[0].identity, "a_12^0 = -1");
    }

    #[test]
    fn fd_brackets_recover_heisenberg_constants() {
        let f = heisenberg_chart();
        let p = Point::new(0.3, -1.2, 0.7, 0.0);
        let sc = f.structure_constants(&p).unwrap();
        let expect = StructureConstants::heisenberg();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert!((sc.a[i][j][k] - expect.a[i][j][k]).abs() < 1e-9);
                }
            }
        }
        assert!(tanaka_webster_kappa(&f, &p).unwrap().abs() < 1e-8);
    }

    #[test]
    fn heisenberg_riemannian_curvatures_are_classical() {
        let rc = riemannian_curvature(&StructureConstants::heisenberg(), &[StructureConstants::zero(); 3]);
        assert!((rc.sectional_12 + 0.75).abs() < 1e-15);
        assert!((rc.ricci_0 - 0.5).abs() < 1e-15);
        assert!(rc.combination().abs() < 1e-15);
    }

    #[test]
    fn reeb_invariant_direct_substitution() {
        let mut sc = StructureConstants::heisenberg();
        sc.set_bracket(0, 1, [0.0, 1.0, 0.0]);
        sc.set_bracket(0, 2, [0.0, 0.0, -1.0]);
        assert_eq!(reeb_invariant_a(&sc, &Momenta::new(0.0, 1.0, 0.0)), -1.0);
        assert_eq!(reeb_invariant_a(&StructureConstants::heisenberg(), &Momenta::new(3.0, 1.0, 2.0)), 0.0);
    }

    #[test]
    fn singular_frame_is_rejected() {
        let f = ChartFrame::new(|_: &Vector3<f64>| [Vector3::x(), Vector3::x(), Vector3::y()]);
        let p = Point::zeros();
        assert!(matches!(f.structure_constants(&p), Err(FrameError::Singular { .. })));
    }
}
