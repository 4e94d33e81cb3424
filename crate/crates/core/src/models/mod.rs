//! The three Sasakian space forms: the Heisenberg group, SU(2) and SL(2)
//! with the left-invariant metric g^c.

mod domain;
mod sl2cut;

pub use domain::{injectivity_domain, InjectivityDomain};
pub use sl2cut::{
    f_branch_inverse, g_inverse, sl2_branch_functions, sl2_cut_analysis, BranchValues, CutReport,
    F1gResiduals,
};

use crate::frame::{chart_components, ContactFrame, FrameError, Point, StructureConstants};
use crate::numerics::entire::{cos_s, sinc_s};
use nalgebra::{Matrix2, Matrix3, Quaternion, Vector3};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("metric scale c must be positive, got {0}")]
    BadScale(f64),
    #[error("radius must be non-negative, got {0}")]
    BadRadius(f64),
    #[error("SL(2) radius {radius} exceeds the validity bound 2√2π/c = {bound}")]
    OutOfValidity { radius: f64, bound: f64 },
    #[error("{0} is outside the domain of the branch function")]
    BranchDomain(f64),
    #[error("root finding failed: {0}")]
    Root(#[from] crate::numerics::roots::RootError),
    #[error("unknown model '{0}' (expected heisenberg, su2 or sl2)")]
    UnknownKind(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Heisenberg,
    Su2,
    Sl2,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Heisenberg => "heisenberg",
            ModelKind::Su2 => "su2",
            ModelKind::Sl2 => "sl2",
        })
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "heisenberg" | "h" => Ok(ModelKind::Heisenberg),
            "su2" | "su(2)" => Ok(ModelKind::Su2),
            "sl2" | "sl(2)" => Ok(ModelKind::Sl2),
            other => Err(ModelError::UnknownKind(other.to_string())),
        }
    }
}

/// A Sasakian space form with its left-invariant contact frame.
///
/// Points are stored in R⁴:
/// * Heisenberg: chart (x, y, z, 0), frame v₁ = ∂x − (y/2)∂z,
///   v₂ = ∂y + (x/2)∂z and Reeb field v₀ = −∂z;
/// * SU(2): unit quaternion (w, x, y, z), v₁ = c·i/2, v₂ = c·j/2,
///   v₀ = −c²·k/2 (left translated);
/// * SL(2): row-major matrix (a, b, c, d), v₁ = c·u₁, v₂ = c·u₂, v₀ = c²·u₀
///   with u₁ = diag(½, −½), u₂ = [[0, ½], [½, 0]], u₀ = [[0, −½], [½, 0]].
///
/// In every case `[v₁, v₂] = −v₀`, so the contact normalization holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelSpace {
    pub kind: ModelKind,
    pub c: f64,
}

impl ModelSpace {
    pub fn heisenberg() -> Self {
        Self {
            kind: ModelKind::Heisenberg,
            c: 1.0,
        }
    }

    pub fn su2(c: f64) -> Result<Self, ModelError> {
        Self::new(ModelKind::Su2, c)
    }

    pub fn sl2(c: f64) -> Result<Self, ModelError> {
        Self::new(ModelKind::Sl2, c)
    }

    pub fn new(kind: ModelKind, c: f64) -> Result<Self, ModelError> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(ModelError::BadScale(c));
        }
        Ok(Self { kind, c })
    }

    /// The space form of constant Tanaka–Webster curvature `k`.
    pub fn space_form(k: f64) -> Self {
        if k > 0.0 {
            Self {
                kind: ModelKind::Su2,
                c: k.sqrt(),
            }
        } else if k < 0.0 {
            Self {
                kind: ModelKind::Sl2,
                c: (-k).sqrt(),
            }
        } else {
            Self::heisenberg()
        }
    }

    /// Tanaka–Webster curvature: 0, c² or −c².
    pub fn curvature(&self) -> f64 {
        match self.kind {
            ModelKind::Heisenberg => 0.0,
            ModelKind::Su2 => self.c * self.c,
            ModelKind::Sl2 => -self.c * self.c,
        }
    }

    /// Identity element (the origin for the Heisenberg group).
    pub fn origin(&self) -> Point {
        match self.kind {
            ModelKind::Heisenberg => Point::zeros(),
            ModelKind::Su2 | ModelKind::Sl2 => Point::new(1.0, 0.0, 0.0, 1.0 * self.identity_tail()),
        }
    }

    fn identity_tail(&self) -> f64 {
        // SU(2) identity is (1, 0, 0, 0); SL(2) identity is (1, 0, 0, 1)
        match self.kind {
            ModelKind::Sl2 => 1.0,
            _ => 0.0,
        }
    }

    /// Upper radius for which the injectivity domain is known in closed
    /// form (`None` when unrestricted).
    pub fn radius_bound(&self) -> Option<f64> {
        match self.kind {
            ModelKind::Sl2 => Some(2.0 * 2f64.sqrt() * std::f64::consts::PI / self.c),
            _ => None,
        }
    }

    /// Lie-algebra element Σ cᵢ vᵢ as a pure quaternion (SU(2)).
    fn su2_algebra(&self, c: &Vector3<f64>) -> Quaternion<f64> {
        let s = self.c;
        Quaternion::new(0.0, 0.5 * s * c[1], 0.5 * s * c[2], -0.5 * s * s * c[0])
    }

    /// Lie-algebra element Σ cᵢ vᵢ as a traceless matrix (SL(2)).
    fn sl2_algebra(&self, c: &Vector3<f64>) -> Matrix2<f64> {
        let s = self.c;
        let x = 0.5 * s * c[1];
        let y = 0.5 * s * c[2] - 0.5 * s * s * c[0];
        let z = 0.5 * s * c[2] + 0.5 * s * s * c[0];
        Matrix2::new(x, y, z, -x)
    }

    /// Left-trivialized displacement from `from` to `to` in frame
    /// components: exact logarithm on SU(2), first-order on SL(2), chart
    /// difference on the Heisenberg group.
    pub fn displacement(&self, from: &Point, to: &Point) -> Result<Vector3<f64>, FrameError> {
        match self.kind {
            ModelKind::Heisenberg => self.components(from, &(to - from)),
            ModelKind::Su2 => {
                let rel = quat(from).conjugate() * quat(to);
                let v = rel.imag();
                let vn = v.norm();
                let angle = vn.atan2(rel.w);
                let scale = if vn < 1e-300 { 1.0 } else { angle / vn };
                let log = v * scale;
                let s = self.c;
                Ok(Vector3::new(-2.0 * log[2] / (s * s), 2.0 * log[0] / s, 2.0 * log[1] / s))
            }
            ModelKind::Sl2 => {
                let inv = mat(from).try_inverse().ok_or(FrameError::Singular { det: 0.0 })?;
                let rel = inv * mat(to) - Matrix2::identity();
                Ok(self.sl2_components(&rel))
            }
        }
    }

    fn sl2_components(&self, m: &Matrix2<f64>) -> Vector3<f64> {
        let s = self.c;
        let x = 0.5 * (m[(0, 0)] - m[(1, 1)]);
        let (y, z) = (m[(0, 1)], m[(1, 0)]);
        Vector3::new((z - y) / (s * s), 2.0 * x / s, (y + z) / s)
    }
}

fn quat(p: &Point) -> Quaternion<f64> {
    Quaternion::new(p[0], p[1], p[2], p[3])
}

fn from_quat(q: &Quaternion<f64>) -> Point {
    Point::new(q.w, q.i, q.j, q.k)
}

fn mat(p: &Point) -> Matrix2<f64> {
    Matrix2::new(p[0], p[1], p[2], p[3])
}

fn from_mat(m: &Matrix2<f64>) -> Point {
    Point::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
}

/// exp of a pure quaternion.
fn quat_exp(v: &Quaternion<f64>) -> Quaternion<f64> {
    let theta2 = v.imag().norm_squared();
    let s = sinc_s(theta2);
    Quaternion::new(cos_s(theta2), s * v.i, s * v.j, s * v.k)
}

/// exp of a traceless 2×2 matrix: cosh√δ·I + (sinh√δ/√δ)·X with δ = −det X.
fn sl2_exp(x: &Matrix2<f64>) -> Matrix2<f64> {
    let delta = -x.determinant();
    Matrix2::identity() * cos_s(-delta) + x * sinc_s(-delta)
}

impl ContactFrame for ModelSpace {
    fn frame(&self, p: &Point) -> [Point; 3] {
        match self.kind {
            ModelKind::Heisenberg => [
                Point::new(0.0, 0.0, -1.0, 0.0),
                Point::new(1.0, 0.0, -0.5 * p[1], 0.0),
                Point::new(0.0, 1.0, 0.5 * p[0], 0.0),
            ],
            ModelKind::Su2 => {
                let q = quat(p);
                [0, 1, 2].map(|i| {
                    let mut e = Vector3::zeros();
                    e[i] = 1.0;
                    from_quat(&(q * self.su2_algebra(&e)))
                })
            }
            ModelKind::Sl2 => {
                let m = mat(p);
                [0, 1, 2].map(|i| {
                    let mut e = Vector3::zeros();
                    e[i] = 1.0;
                    from_mat(&(m * self.sl2_algebra(&e)))
                })
            }
        }
    }

    fn components(&self, p: &Point, w: &Point) -> Result<Vector3<f64>, FrameError> {
        match self.kind {
            ModelKind::Heisenberg => {
                let [v0, v1, v2] = self.frame(p);
                chart_components(Matrix3::from_columns(&[v0.xyz(), v1.xyz(), v2.xyz()]), w)
            }
            ModelKind::Su2 => {
                let q = quat(p);
                let n2 = q.norm_squared();
                if n2 < 1e-24 {
                    return Err(FrameError::Singular { det: n2 });
                }
                let rel = q.conjugate() * quat(w) / n2;
                let s = self.c;
                Ok(Vector3::new(-2.0 * rel.k / (s * s), 2.0 * rel.i / s, 2.0 * rel.j / s))
            }
            ModelKind::Sl2 => {
                let m = mat(p);
                let det = m.determinant();
                if det.abs() < 1e-12 {
                    return Err(FrameError::Singular { det });
                }
                let inv = m.try_inverse().ok_or(FrameError::Singular { det })?;
                Ok(self.sl2_components(&(inv * mat(w))))
            }
        }
    }

    fn shift(&self, p: &Point, c: &Vector3<f64>) -> Point {
        match self.kind {
            ModelKind::Heisenberg => {
                let [v0, v1, v2] = self.frame(p);
                p + v0 * c[0] + v1 * c[1] + v2 * c[2]
            }
            ModelKind::Su2 => from_quat(&(quat(p) * quat_exp(&self.su2_algebra(c)))),
            ModelKind::Sl2 => from_mat(&(mat(p) * sl2_exp(&self.sl2_algebra(c)))),
        }
    }

    fn project(&self, p: &mut Point) {
        match self.kind {
            ModelKind::Heisenberg => p[3] = 0.0,
            ModelKind::Su2 => {
                let n = p.norm();
                if n > 0.0 {
                    *p /= n;
                }
            }
            ModelKind::Sl2 => {
                let det = mat(p).determinant();
                if det > 0.0 {
                    *p /= det.sqrt();
                }
            }
        }
    }

    fn fd_step(&self, p: &Point) -> f64 {
        match self.kind {
            ModelKind::Heisenberg => 1e-4 * (1.0 + p.xyz().norm()),
            _ => 1e-4,
        }
    }

    fn structure_constants(&self, _p: &Point) -> Result<StructureConstants, FrameError> {
        let mut sc = StructureConstants::heisenberg();
        let c2 = self.c * self.c;
        match self.kind {
            ModelKind::Heisenberg => {}
            ModelKind::Su2 => {
                sc.set_bracket(0, 1, [0.0, 0.0, -c2]);
                sc.set_bracket(0, 2, [0.0, c2, 0.0]);
            }
            ModelKind::Sl2 => {
                sc.set_bracket(0, 1, [0.0, 0.0, c2]);
                sc.set_bracket(0, 2, [0.0, -c2, 0.0]);
            }
        }
        Ok(sc)
    }

    fn structure_derivatives(&self, _p: &Point) -> Result<[StructureConstants; 3], FrameError> {
        Ok([StructureConstants::zero(); 3])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{bracket_structure_constants, validate_structure};

    #[test]
    fn analytic_constants_match_fd_brackets() {
        let models = [
            ModelSpace::heisenberg(),
            ModelSpace::su2(1.3).unwrap(),
            ModelSpace::sl2(0.7).unwrap(),
        ];
        for m in models {
            let p = m.shift(&m.origin(), &Vector3::new(0.3, -0.4, 0.8));
            let exact = m.structure_constants(&p).unwrap();
            let fd = bracket_structure_constants(&m, &p).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        assert!(
                            (exact.a[i][j][k] - fd.a[i][j][k]).abs() < 1e-8,
                            "{:?} a_{i}{j}^{k}: {} vs {}",
                            m.kind,
                            exact.a[i][j][k],
                            fd.a[i][j][k]
                        );
                    }
                }
            }
            assert!(validate_structure(&exact).passed);
            assert!(exact.is_sasakian(0.0));
        }
    }

    #[test]
    fn displacement_inverts_shift() {
        for m in [ModelSpace::su2(0.9).unwrap(), ModelSpace::sl2(1.4).unwrap(), ModelSpace::heisenberg()] {
            let p = m.shift(&m.origin(), &Vector3::new(0.2, 0.1, -0.3));
            let c = Vector3::new(1e-3, -2e-3, 0.5e-3);
            let q = m.shift(&p, &c);
            let d = m.displacement(&p, &q).unwrap();
            assert!((d - c).norm() < 1e-5, "{:?}: {d:?}", m.kind);
        }
    }

    #[test]
    fn projection_restores_group_constraint() {
        let m = ModelSpace::sl2(1.0).unwrap();
        let mut p = Point::new(1.01, 0.0, 0.0, 1.0);
        m.project(&mut p);
        assert!((mat(&p).determinant() - 1.0).abs() < 1e-12);
        let m = ModelSpace::su2(1.0).unwrap();
        let mut p = Point::new(1.0, 0.1, 0.0, 0.0);
        m.project(&mut p);
        assert!((p.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kind_round_trips_through_strings() {
        for k in [ModelKind::Heisenberg, ModelKind::Su2, ModelKind::Sl2] {
            assert_eq!(k.to_string().parse::<ModelKind>().unwrap(), k);
        }
        assert!("torus".parse::<ModelKind>().is_err());
    }
}
