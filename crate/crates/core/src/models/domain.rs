use super::{ModelError, ModelKind, ModelSpace};
use serde::Serialize;
use std::f64::consts::PI;

const FOUR_PI2: f64 = 4.0 * PI * PI;

/// Injectivity domain Ω^R in cylindrical momenta (r, θ, h), r = √(2H),
/// h = h₀, under the time-1 geodesic parametrization. Membership never
/// depends on θ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InjectivityDomain {
    pub model: ModelSpace,
    pub radius: f64,
}

/// Builds Ω^R for a model. SL(2) is refused above R = 2√2π/c.
pub fn injectivity_domain(m: &ModelSpace, radius: f64) -> Result<InjectivityDomain, ModelError> {
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(ModelError::BadRadius(radius));
    }
    if let Some(bound) = m.radius_bound() {
        if radius > bound * (1.0 + 1e-12) {
            return Err(ModelError::OutOfValidity { radius, bound });
        }
    }
    Ok(InjectivityDomain { model: *m, radius })
}

impl InjectivityDomain {
    /// Tanaka–Webster curvature of the underlying model.
    pub fn k(&self) -> f64 {
        self.model.curvature()
    }

    /// Largest radius actually reached by the domain.
    pub fn r_max(&self) -> f64 {
        match self.model.kind {
            ModelKind::Su2 => self.radius.min(2.0 * PI / self.model.c),
            _ => self.radius,
        }
    }

    /// Half-height of the domain's slice at radius `r`, `None` outside.
    pub fn h_max(&self, r: f64) -> Option<f64> {
        if r < 0.0 || r > self.radius {
            return None;
        }
        let k = self.k();
        let rest = FOUR_PI2 - k * r * r;
        if rest < 0.0 {
            None
        } else {
            Some(rest.sqrt())
        }
    }

    pub fn contains(&self, r: f64, h: f64) -> bool {
        if r < 0.0 || r > self.radius {
            return false;
        }
        h * h + self.k() * r * r <= FOUR_PI2
    }

    /// Membership for momenta (h₀, h₁, h₂).
    pub fn contains_momenta(&self, h: &nalgebra::Vector3<f64>) -> bool {
        self.contains(h[1].hypot(h[2]), h[0])
    }

    /// Signed distance-like margin of the conjugate boundary: positive
    /// inside, zero on σ = h² + k r² = 4π².
    pub fn boundary_margin(&self, r: f64, h: f64) -> f64 {
        FOUR_PI2 - (h * h + self.k() * r * r)
    }

    /// Upper conjugate-boundary point at radius `r`.
    pub fn boundary_point(&self, r: f64) -> Option<(f64, f64)> {
        self.h_max(r).map(|h| (r, h))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heisenberg_membership() {
        let d = injectivity_domain(&ModelSpace::heisenberg(), 1.0).unwrap();
        assert!(d.contains(0.5, PI));
        assert!(!d.contains(0.5, 2.0 * PI + 1e-9));
        assert!(!d.contains(1.1, 0.0));
    }

    #[test]
    fn su2_excludes_past_two_pi() {
        let d = injectivity_domain(&ModelSpace::su2(1.0).unwrap(), 1.0).unwrap();
        assert!(!d.contains(0.0, 2.0 * PI + 1e-6));
        assert!(d.contains(0.0, 2.0 * PI));
    }

    #[test]
    fn sl2_boundary_and_validity() {
        let m = ModelSpace::sl2(1.0).unwrap();
        let d = injectivity_domain(&m, 2.0).unwrap();
        let h = (FOUR_PI2 + 1.0).sqrt();
        assert!(d.boundary_margin(1.0, h).abs() < 1e-12);
        assert!(injectivity_domain(&m, 9.0).is_err());
        assert!(injectivity_domain(&m, -1.0).is_err());
    }

    #[test]
    fn monotone_in_radius() {
        for m in [ModelSpace::heisenberg(), ModelSpace::su2(1.0).unwrap(), ModelSpace::sl2(1.0).unwrap()] {
            let small = injectivity_domain(&m, 1.0).unwrap();
            let large = injectivity_domain(&m, 2.0).unwrap();
            for i in 0..40 {
                for j in 0..40 {
                    let (r, h) = (i as f64 * 0.05, -7.0 + j as f64 * 0.35);
                    if small.contains(r, h) {
                        assert!(large.contains(r, h));
                    }
                }
            }
        }
    }
}
