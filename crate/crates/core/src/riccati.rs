//! Jacobi matrices (A_t, B_t), the Riccati flow of U_t = A_t⁻¹B_t and the
//! closed forms on space forms.
//!
//! Closed forms use z = σt² with σ = h₀² + 2Hk and the entire functions
//! of [`crate::numerics::entire`], so the trigonometric, hyperbolic and
//! polynomial cases share one code path.

use crate::numerics::entire::{cos_s, d, p, q, sinc_s};
use crate::numerics::ode::{integrate_to, OdeError, OdeOptions};
use crate::report::ComparisonReport;
use nalgebra::{Matrix3, SVector};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RiccatiError {
    #[error("Riccati solution blows up near t = {t_estimate}")]
    Blowup { t_estimate: f64 },
    #[error("pole of the closed form at t = {t} (z = {z})")]
    Pole { t: f64, z: f64 },
    #[error("closed form S needs t > 0, got {0}")]
    NonPositiveTime(f64),
    #[error("integration failed: {0}")]
    Integrator(#[from] OdeError),
}

type Scalar = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// R_t = diag(R¹¹_t, R²²_t, 0); Sasakian profiles have R²² ≡ 0.
#[derive(Clone)]
pub struct CurvatureProfile {
    r11: Scalar,
    r22: Scalar,
}

impl std::fmt::Debug for CurvatureProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CurvatureProfile")
            .field("r11(0)", &(self.r11)(0.0))
            .field("r22(0)", &(self.r22)(0.0))
            .finish()
    }
}

impl CurvatureProfile {
    pub fn constant(sigma: f64) -> Self {
        Self::from_fn(move |_| sigma)
    }

    pub fn from_fn(r11: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            r11: Arc::new(r11),
            r22: Arc::new(|_| 0.0),
        }
    }

    /// R¹¹_t = h₀² + 2κ_t H along a geodesic.
    pub fn sasakian(h0: f64, hamiltonian: f64, kappa: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::from_fn(move |t| h0 * h0 + 2.0 * kappa(t) * hamiltonian)
    }

    /// Space-form profile with κ ≡ k.
    pub fn space_form(k: f64, h0: f64, hamiltonian: f64) -> Self {
        Self::constant(h0 * h0 + 2.0 * k * hamiltonian)
    }

    pub fn with_r22(mut self, r22: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.r22 = Arc::new(r22);
        self
    }

    pub fn r11(&self, t: f64) -> f64 {
        (self.r11)(t)
    }

    pub fn matrix(&self, t: f64) -> Matrix3<f64> {
        Matrix3::from_diagonal(&nalgebra::Vector3::new((self.r11)(t), (self.r22)(t), 0.0))
    }
}

/// Nilpotent C₁ with a single 1 in row 2, column 1.
pub fn c1() -> Matrix3<f64> {
    let mut m = Matrix3::zeros();
    m[(1, 0)] = 1.0;
    m
}

/// C₂ = diag(1, 0, 1).
pub fn c2() -> Matrix3<f64> {
    Matrix3::from_diagonal(&nalgebra::Vector3::new(1.0, 0.0, 1.0))
}

/// Sampled trajectory of the Jacobi matrices.
#[derive(Debug, Clone)]
pub struct JacobiMatrices {
    pub times: Vec<f64>,
    pub a: Vec<Matrix3<f64>>,
    pub b: Vec<Matrix3<f64>>,
}

impl JacobiMatrices {
    /// S = B⁻¹A at sample `i`.
    pub fn s(&self, i: usize) -> Option<Matrix3<f64>> {
        self.b[i].try_inverse().map(|bi| bi * self.a[i])
    }

    /// U = A⁻¹B at sample `i`.
    pub fn u(&self, i: usize) -> Option<Matrix3<f64>> {
        self.a[i].try_inverse().map(|ai| ai * self.b[i])
    }

    pub fn det_b(&self, i: usize) -> f64 {
        self.b[i].determinant()
    }
}

const AB_TOL: f64 = 1e-12;

fn to_vec9(m: &Matrix3<f64>) -> SVector<f64, 9> {
    SVector::<f64, 9>::from_column_slice(m.as_slice())
}

fn from_vec9(v: &[f64]) -> Matrix3<f64> {
    Matrix3::from_column_slice(v)
}

/// Solves Ȧ = −AC₁ + BR, Ḃ = −AC₂ + BC₁ᵀ from t = 0.
pub fn integrate_ab(
    profile: &CurvatureProfile,
    a0: &Matrix3<f64>,
    b0: &Matrix3<f64>,
    times: &[f64],
) -> Result<JacobiMatrices, RiccatiError> {
    let (c1, c2) = (c1(), c2());
    let mut y0 = SVector::<f64, 18>::zeros();
    y0.fixed_rows_mut::<9>(0).copy_from(&to_vec9(a0));
    y0.fixed_rows_mut::<9>(9).copy_from(&to_vec9(b0));
    let rhs = |t: f64, y: &SVector<f64, 18>| {
        let a = from_vec9(&y.as_slice()[..9]);
        let b = from_vec9(&y.as_slice()[9..]);
        let da = -a * c1 + b * profile.matrix(t);
        let db = -a * c2 + b * c1.transpose();
        let mut out = SVector::<f64, 18>::zeros();
        out.fixed_rows_mut::<9>(0).copy_from(&to_vec9(&da));
        out.fixed_rows_mut::<9>(9).copy_from(&to_vec9(&db));
        out
    };
    let (states, _) = integrate_to(rhs, 0.0, y0, times, &OdeOptions::with_tol(AB_TOL), |_| {})?;
    Ok(JacobiMatrices {
        times: times.to_vec(),
        a: states.iter().map(|y| from_vec9(&y.as_slice()[..9])).collect(),
        b: states.iter().map(|y| from_vec9(&y.as_slice()[9..])).collect(),
    })
}

/// Norm beyond which the Riccati solution is declared blown up.
pub const BLOWUP_NORM: f64 = 1e8;

/// U̇ = −URU + C₁U + UC₁ᵀ − C₂ with U₀ = 0, sampled at `times`.
pub fn integrate_riccati_u(profile: &CurvatureProfile, times: &[f64]) -> Result<Vec<Matrix3<f64>>, RiccatiError> {
    let (c1, c2) = (c1(), c2());
    let rhs = |t: f64, u: &Matrix3<f64>| -u * profile.matrix(t) * u + c1 * u + u * c1.transpose() - c2;
    let f = |t: f64, y: &SVector<f64, 9>| to_vec9(&rhs(t, &from_vec9(y.as_slice())));
    let opts = OdeOptions::with_tol(AB_TOL);
    let mut out = Vec::with_capacity(times.len());
    let (mut t, mut y) = (0.0, SVector::<f64, 9>::zeros());
    for &stop in times {
        let blowup = |t: f64, y: &SVector<f64, 9>| {
            let u = from_vec9(y.as_slice());
            let rate = rhs(t, &u).norm();
            RiccatiError::Blowup {
                t_estimate: t + u.norm() / rate.max(f64::MIN_POSITIVE),
            }
        };
        match integrate_to(f, t, y, &[stop], &opts, |_| {}) {
            Ok((s, _)) => {
                if s[0].norm() > BLOWUP_NORM {
                    return Err(blowup(stop, &s[0]));
                }
                y = s[0];
                t = stop;
                // symmetry is preserved by the flow; remove round-off drift
                let u = from_vec9(y.as_slice());
                out.push(0.5 * (u + u.transpose()));
            }
            Err(_) => return Err(blowup(t, &y)),
        }
    }
    Ok(out)
}

fn sigma(k: f64, h0: f64, hamiltonian: f64) -> f64 {
    h0 * h0 + 2.0 * hamiltonian * k
}

/// U^k_t on a space form.
pub fn closed_form_u(k: f64, h0: f64, hamiltonian: f64, t: f64) -> Result<Matrix3<f64>, RiccatiError> {
    let z = sigma(k, h0, hamiltonian) * t * t;
    let c = cos_s(z);
    if c.abs() < 1e-14 {
        return Err(RiccatiError::Pole { t, z });
    }
    let (u11, u12, u22) = (-t * sinc_s(z) / c, -t * t * p(z) / c, -t.powi(3) * q(z) / c);
    Ok(Matrix3::new(u11, u12, 0.0, u12, u22, 0.0, 0.0, 0.0, -t))
}

/// S^k_t = (U^k_t)⁻¹ on a space form, t > 0.
pub fn closed_form_s(k: f64, h0: f64, hamiltonian: f64, t: f64) -> Result<Matrix3<f64>, RiccatiError> {
    if !(t > 0.0) {
        return Err(RiccatiError::NonPositiveTime(t));
    }
    let z = sigma(k, h0, hamiltonian) * t * t;
    let dh = d(z);
    if dh.abs() < 1e-14 {
        return Err(RiccatiError::Pole { t, z });
    }
    let s11 = -q(z) / (t * dh);
    let s12 = p(z) / (t * t * dh);
    let s22 = -sinc_s(z) / (t.powi(3) * dh);
    Ok(Matrix3::new(s11, s12, 0.0, s12, s22, 0.0, 0.0, 0.0, -1.0 / t))
}

/// |det B_t| on a space form: t·(2 − 2cos τ_t − τ_t sin τ_t)/τ₁⁴, written
/// as t⁵·D(σt²) so that σ = 0 gives t⁵/12.
pub fn det_b_closed(k: f64, h0: f64, hamiltonian: f64, t: f64) -> f64 {
    let z = sigma(k, h0, hamiltonian) * t * t;
    t.powi(5) * d(z)
}

/// Smallest and largest eigenvalue of the symmetric part of `m`.
pub fn eig_range(m: &Matrix3<f64>) -> (f64, f64) {
    let sym = 0.5 * (m + m.transpose());
    let ev = sym.symmetric_eigenvalues();
    (ev.min(), ev.max())
}

/// Matrix-order tolerance for comparisons.
pub const ORDER_TOL: f64 = 1e-9;

/// For R_lower ≤ R_upper checks U_upper ≤ U_lower ≤ 0 at every sample
/// time, and that |det B_lower| / |det B_upper| is ≥ 1 and nondecreasing.
pub fn riccati_compare(
    lower: &CurvatureProfile,
    upper: &CurvatureProfile,
    times: &[f64],
) -> Result<ComparisonReport, RiccatiError> {
    let mut rep = ComparisonReport::new("riccati comparison", ORDER_TOL);
    for &t in times {
        let gap = upper.matrix(t) - lower.matrix(t);
        rep.require_le("R_lower <= R_upper", &[t], 0.0, eig_range(&gap).0);
    }
    let u_lo = integrate_riccati_u(lower, times)?;
    let u_hi = integrate_riccati_u(upper, times)?;
    let id = Matrix3::identity();
    let j_lo = integrate_ab(lower, &id, &Matrix3::zeros(), times)?;
    let j_hi = integrate_ab(upper, &id, &Matrix3::zeros(), times)?;
    let mut prev_ratio: Option<f64> = None;
    for (i, &t) in times.iter().enumerate() {
        // U_upper ≤ U_lower ⟺ λ_min(U_lower − U_upper) ≥ 0
        rep.check_le("U_upper <= U_lower", &[t], 0.0, eig_range(&(u_lo[i] - u_hi[i])).0);
        rep.check_le("U_lower <= 0", &[t], eig_range(&u_lo[i]).1, 0.0);
        let (dl, du) = (j_lo.det_b(i).abs(), j_hi.det_b(i).abs());
        if t > 0.0 && du > 0.0 {
            let ratio = dl / du;
            // relative slack: both determinants carry integrator error
            rep.check_le("det ratio >= 1", &[t], 1.0 - ratio.max(1.0) * 1e-9, ratio);
            if let Some(prev) = prev_ratio {
                rep.check_le("det ratio nondecreasing", &[t], prev - ratio.abs() * 1e-9, ratio);
            }
            prev_ratio = Some(ratio);
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_zero_closed_forms() {
        let u = closed_form_u(0.0, 0.0, 0.5, 1.0).unwrap();
        let expect = Matrix3::new(-1.0, -0.5, 0.0, -0.5, -1.0 / 3.0, 0.0, 0.0, 0.0, -1.0);
        assert!((u - expect).abs().max() < 1e-15);
        let s = closed_form_s(0.0, 0.0, 0.5, 1.0).unwrap();
        let expect = Matrix3::new(-4.0, 6.0, 0.0, 6.0, -12.0, 0.0, 0.0, 0.0, -1.0);
        assert!((s - expect).abs().max() < 1e-12);
        assert!((det_b_closed(0.0, 0.0, 0.5, 1.0) - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn s_inverts_u() {
        for (k, h0, hh, t) in [(1.0, 0.3, 0.7, 0.8), (-2.0, 1.0, 1.5, 0.9), (0.0, 2.0, 1.0, 0.5)] {
            let u = closed_form_u(k, h0, hh, t).unwrap();
            let s = closed_form_s(k, h0, hh, t).unwrap();
            assert!((s * u - Matrix3::identity()).abs().max() < 1e-10);
        }
    }

    #[test]
    fn poles_are_reported() {
        let t = std::f64::consts::FRAC_PI_2;
        assert!(matches!(closed_form_u(0.0, 1.0, 0.5, t), Err(RiccatiError::Pole { .. })));
        let t = 2.0 * std::f64::consts::PI;
        assert!(matches!(closed_form_s(0.0, 1.0, 0.5, t), Err(RiccatiError::Pole { .. })));
        assert!(det_b_closed(0.0, 1.0, 0.5, t).abs() < 1e-12);
    }

    #[test]
    fn ab_initial_condition_and_det() {
        let prof = CurvatureProfile::space_form(0.7, 1.1, 0.9);
        let times = [0.0, 0.4, 0.9];
        let j = integrate_ab(&prof, &Matrix3::identity(), &Matrix3::zeros(), &times).unwrap();
        assert_eq!(j.a[0], Matrix3::identity());
        assert_eq!(j.b[0], Matrix3::zeros());
        for (i, &t) in times.iter().enumerate().skip(1) {
            let closed = det_b_closed(0.7, 1.1, 0.9, t);
            assert!((j.det_b(i).abs() - closed).abs() < 1e-9, "t={t}");
            let u = closed_form_u(0.7, 1.1, 0.9, t).unwrap();
            assert!((j.u(i).unwrap() - u).abs().max() < 1e-8, "{} vs {}", j.u(i).unwrap(), u);
        }
    }

    #[test]
    fn riccati_blowup_is_reported() {
        // cos τ_t = 0 at t = π/2 for σ = 1
        let prof = CurvatureProfile::constant(1.0);
        let times: Vec<f64> = (1..=40).map(|i| 0.05 * i as f64).collect();
        match integrate_riccati_u(&prof, &times) {
            Err(RiccatiError::Blowup { t_estimate }) => {
                assert!((t_estimate - std::f64::consts::FRAC_PI_2).abs() < 0.1, "{t_estimate}")
            }
            other => panic!("expected blowup, got {other:?}"),
        }
    }

    #[test]
    fn equal_profiles_give_zero_margins() {
        let p = CurvatureProfile::constant(0.5);
        let times: Vec<f64> = (0..=10).map(|i| 0.1 * i as f64).collect();
        let rep = riccati_compare(&p, &p, &times).unwrap();
        assert!(rep.passed(), "{rep:#?}");
    }
}
