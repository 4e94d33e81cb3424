//! Subriemannian geodesic flow in lift coordinates (x; h₀, h₁, h₂).
//!
//! With hᵢ(p) = p(vᵢ) and H = (h₁² + h₂²)/2 the flow reads
//! ẋ = h₁v₁ + h₂v₂ and ḣᵢ = Σ_{j=1,2} h_j Σ_k a_ji^k h_k.

use crate::frame::{ContactFrame, FrameError, Momenta, Point};
use crate::numerics::ode::{integrate_to, OdeError, OdeOptions};
use nalgebra::{Matrix3, SVector, Vector3};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("geodesic integration failed (chart breakdown?): {0}")]
    Integrator(#[from] OdeError),
    #[error("negative time {0}")]
    NegativeTime(f64),
}

/// A covector in lift coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovectorState {
    pub x: Point,
    pub h: Momenta,
}

impl CovectorState {
    pub fn new(x: Point, h: Momenta) -> Self {
        Self { x, h }
    }

    pub fn hamiltonian(&self) -> f64 {
        hamiltonian(&self.h)
    }

    fn pack(&self) -> SVector<f64, 7> {
        SVector::<f64, 7>::from_fn(|i, _| if i < 4 { self.x[i] } else { self.h[i - 4] })
    }

    fn unpack(y: &SVector<f64, 7>) -> Self {
        Self {
            x: Point::new(y[0], y[1], y[2], y[3]),
            h: Momenta::new(y[4], y[5], y[6]),
        }
    }
}

/// Time derivative of a [`CovectorState`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    pub x_dot: Point,
    pub h_dot: Momenta,
}

pub fn hamiltonian(h: &Momenta) -> f64 {
    0.5 * (h[1] * h[1] + h[2] * h[2])
}

pub fn hamiltonian_rhs<F: ContactFrame + ?Sized>(
    frame: &F,
    s: &CovectorState,
) -> Result<StateDerivative, FrameError> {
    let [_, v1, v2] = frame.frame(&s.x);
    let sc = frame.structure_constants(&s.x)?;
    let h = &s.h;
    let mut h_dot = Momenta::zeros();
    for i in 0..3 {
        for j in 1..3 {
            let mut inner = 0.0;
            for k in 0..3 {
                inner += sc.a[j][i][k] * h[k];
            }
            h_dot[i] += h[j] * inner;
        }
    }
    Ok(StateDerivative {
        x_dot: v1 * h[1] + v2 * h[2],
        h_dot,
    })
}

/// Integration tolerance for exp_map.
pub const EXP_TOL: f64 = 1e-10;
/// Tighter tolerance used under finite differences of the flow.
pub const FD_FLOW_TOL: f64 = 1e-12;

/// States along the geodesic from (x0, α) at the requested sorted times.
pub fn trajectory<F: ContactFrame + ?Sized>(
    frame: &F,
    x0: &Point,
    alpha: &Momenta,
    times: &[f64],
    tol: f64,
) -> Result<Vec<CovectorState>, GeoError> {
    if let Some(&t) = times.iter().find(|t| **t < 0.0) {
        return Err(GeoError::NegativeTime(t));
    }
    let start = CovectorState::new(*x0, *alpha);
    // the frame cannot report errors from inside the integrator; stash one
    let failure = std::cell::Cell::new(None);
    let rhs = |_t: f64, y: &SVector<f64, 7>| {
        let s = CovectorState::unpack(y);
        match hamiltonian_rhs(frame, &s) {
            Ok(d) => SVector::<f64, 7>::from_fn(|i, _| if i < 4 { d.x_dot[i] } else { d.h_dot[i - 4] }),
            Err(e) => {
                failure.set(Some(e));
                SVector::<f64, 7>::repeat(f64::NAN)
            }
        }
    };
    let project = |y: &mut SVector<f64, 7>| {
        let mut p = Point::new(y[0], y[1], y[2], y[3]);
        frame.project(&mut p);
        y.fixed_rows_mut::<4>(0).copy_from(&p);
    };
    let result = integrate_to(rhs, 0.0, start.pack(), times, &OdeOptions::with_tol(tol), project);
    if let Some(e) = failure.take() {
        return Err(e.into());
    }
    let (states, _) = result?;
    Ok(states.iter().map(CovectorState::unpack).collect())
}

/// π(e^{tH⃗}(α)) for α based at x0.
pub fn exp_map<F: ContactFrame + ?Sized>(frame: &F, x0: &Point, alpha: &Momenta, t: f64) -> Result<Point, GeoError> {
    exp_map_tol(frame, x0, alpha, t, EXP_TOL)
}

pub fn exp_map_tol<F: ContactFrame + ?Sized>(
    frame: &F,
    x0: &Point,
    alpha: &Momenta,
    t: f64,
    tol: f64,
) -> Result<Point, GeoError> {
    Ok(trajectory(frame, x0, alpha, &[t], tol)?[0].x)
}

/// FD Jacobian determinant of the time-1 exponential map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityEstimate {
    /// |det d exp| against the coframe volume η
    pub density: f64,
    /// difference between the two Richardson levels
    pub error: f64,
    /// set when the determinant is below [`CONJUGATE_DET`]
    pub near_conjugate: bool,
}

pub const CONJUGATE_DET: f64 = 1e-10;

fn fd_jacobian<F: ContactFrame + ?Sized>(
    frame: &F,
    x0: &Point,
    alpha: &Momenta,
    step: f64,
    x1: &Point,
) -> Result<Matrix3<f64>, GeoError> {
    let mut cols = [Vector3::zeros(); 3];
    for (j, col) in cols.iter_mut().enumerate() {
        let mut e = Momenta::zeros();
        e[j] = step;
        let plus = exp_map_tol(frame, x0, &(alpha + e), 1.0, FD_FLOW_TOL)?;
        let minus = exp_map_tol(frame, x0, &(alpha - e), 1.0, FD_FLOW_TOL)?;
        *col = frame.components(x1, &((plus - minus) / (2.0 * step)))?;
    }
    Ok(Matrix3::from_columns(&cols))
}

/// Density of exp_{x0}(·, 1) at α with respect to dh₀dh₁dh₂ and η.
pub fn jacobian_density<F: ContactFrame + ?Sized>(
    frame: &F,
    x0: &Point,
    alpha: &Momenta,
) -> Result<DensityEstimate, GeoError> {
    let x1 = exp_map_tol(frame, x0, alpha, 1.0, FD_FLOW_TOL)?;
    let step = 1e-5 * alpha.norm().max(1.0);
    let coarse = fd_jacobian(frame, x0, alpha, step, &x1)?.determinant();
    let fine = fd_jacobian(frame, x0, alpha, 0.5 * step, &x1)?.determinant();
    let det = (4.0 * fine - coarse) / 3.0;
    Ok(DensityEstimate {
        density: det.abs(),
        error: (fine - coarse).abs(),
        near_conjugate: det.abs() < CONJUGATE_DET,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelSpace;
    use std::f64::consts::PI;

    #[test]
    fn heisenberg_sign_convention() {
        let m = ModelSpace::heisenberg();
        let s = CovectorState::new(Point::zeros(), Momenta::new(1.0, 1.0, 0.0));
        let d = hamiltonian_rhs(&m, &s).unwrap();
        assert_eq!(d.h_dot, Momenta::new(0.0, 0.0, -1.0));
        assert_eq!(d.x_dot, Point::new(1.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn horizontal_line() {
        let m = ModelSpace::heisenberg();
        let p = exp_map(&m, &Point::zeros(), &Momenta::new(0.0, 1.0, 0.0), 1.0).unwrap();
        assert!((p - Point::new(1.0, 0.0, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn full_circle_returns_over_the_axis() {
        let m = ModelSpace::heisenberg();
        let p = exp_map(&m, &Point::zeros(), &Momenta::new(2.0 * PI, 1.0, 0.0), 1.0).unwrap();
        assert!(p[0].abs() < 1e-8 && p[1].abs() < 1e-8, "{p:?}");
        assert!((p[2] + 1.0 / (4.0 * PI)).abs() < 1e-8, "{p:?}");
    }

    #[test]
    fn sigma_zero_density_is_one_twelfth() {
        for m in [ModelSpace::heisenberg(), ModelSpace::su2(1.0).unwrap(), ModelSpace::sl2(1.0).unwrap()] {
            let d = jacobian_density(&m, &m.origin(), &Momenta::new(0.0, 1.0, 0.0)).unwrap();
            // σ = k·r² vanishes only for Heisenberg; compare against r²·D(σ)
            let sigma = m.curvature();
            let expect = crate::numerics::entire::d(sigma);
            assert!((d.density - expect).abs() < 1e-7, "{:?}: {} vs {expect}", m.kind, d.density);
        }
    }

    #[test]
    fn conjugate_covector_is_flagged() {
        let m = ModelSpace::heisenberg();
        let d = jacobian_density(&m, &Point::zeros(), &Momenta::new(2.0 * PI, 1.0, 0.0)).unwrap();
        assert!(d.density < 1e-6, "{d:?}");
    }
}
