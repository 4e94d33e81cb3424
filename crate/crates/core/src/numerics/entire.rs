//! Entire functions of z = τ² that appear in every closed form of the
//! Jacobi/Riccati machinery.
//!
//! Writing the trigonometric expressions as functions of the signed square
//! z = ±τ² folds the three curvature cases (trigonometric, hyperbolic and the
//! polynomial limit at z = 0) into one analytic function each:
//!
//! | name     | z > 0, s = √z                    | z < 0, s = √(−z)                  | z = 0 |
//! |----------|----------------------------------|-----------------------------------|-------|
//! | `cos_s`  | cos s                            | cosh s                            | 1     |
//! | `sinc_s` | sin s / s                        | sinh s / s                        | 1     |
//! | `p`      | (1 − cos s)/z                    | (1 − cosh s)/z                    | 1/2   |
//! | `q`      | (sin s/s − cos s)/z              | (sinh s/s − cosh s)/z             | 1/3   |
//! | `d`      | (2 − 2cos s − s sin s)/z²        | (2 − 2cosh s + s sinh s)/z²       | 1/12  |
//!
//! Near z = 0 the closed forms lose digits to cancellation, so each function
//! switches to its Taylor series for |z| < [`SERIES_RADIUS`].

/// Below this |z| the Taylor series is used.
pub const SERIES_RADIUS: f64 = 1.0;

const SERIES_TERMS: usize = 16;

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Σ (−z)ⁿ · coeff(n) for n < SERIES_TERMS.
fn series(z: f64, coeff: impl Fn(usize) -> f64) -> f64 {
    let mut acc = 0.0;
    let mut pow = 1.0;
    for n in 0..SERIES_TERMS {
        acc += pow * coeff(n);
        pow *= -z;
    }
    acc
}

pub fn cos_s(z: f64) -> f64 {
    if z >= 0.0 {
        z.sqrt().cos()
    } else {
        (-z).sqrt().cosh()
    }
}

pub fn sinc_s(z: f64) -> f64 {
    if z.abs() < SERIES_RADIUS {
        return series(z, |n| 1.0 / factorial(2 * n + 1));
    }
    if z > 0.0 {
        let s = z.sqrt();
        s.sin() / s
    } else {
        let s = (-z).sqrt();
        s.sinh() / s
    }
}

pub fn p(z: f64) -> f64 {
    if z.abs() < SERIES_RADIUS {
        return series(z, |n| 1.0 / factorial(2 * n + 2));
    }
    (1.0 - cos_s(z)) / z
}

pub fn q(z: f64) -> f64 {
    if z.abs() < SERIES_RADIUS {
        return series(z, |n| (2 * n + 2) as f64 / factorial(2 * n + 3));
    }
    (sinc_s(z) - cos_s(z)) / z
}

pub fn d(z: f64) -> f64 {
    if z.abs() < SERIES_RADIUS {
        return series(z, |n| (2 * n + 2) as f64 / factorial(2 * n + 4));
    }
    if z > 0.0 {
        let s = z.sqrt();
        (2.0 - 2.0 * s.cos() - s * s.sin()) / (z * z)
    } else {
        let s = (-z).sqrt();
        (2.0 - 2.0 * s.cosh() + s * s.sinh()) / (z * z)
    }
}

/// The numerator 2 − 2cos τ − τ sin τ itself (z²·d(z)); zero at τ = 2π.
pub fn d_numerator(z: f64) -> f64 {
    z * z * d(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn closed_d(z: f64) -> f64 {
        if z > 0.0 {
            let s = z.sqrt();
            (2.0 - 2.0 * s.cos() - s * s.sin()) / (z * z)
        } else {
            let s = (-z).sqrt();
            (2.0 - 2.0 * s.cosh() + s * s.sinh()) / (z * z)
        }
    }

    #[test]
    fn values_at_zero() {
        assert_eq!(cos_s(0.0), 1.0);
        assert_eq!(sinc_s(0.0), 1.0);
        assert_eq!(p(0.0), 0.5);
        assert!((q(0.0) - 1.0 / 3.0).abs() < 1e-16);
        assert!((d(0.0) - 1.0 / 12.0).abs() < 1e-16);
    }

    #[test]
    fn series_and_closed_forms_agree_at_handover() {
        for &z in &[0.999_999_f64, -0.999_999, 1.000_001, -1.000_001, 0.7, -0.7] {
            let s = z.abs().sqrt();
            let (c, sn) = if z > 0.0 {
                (s.cos(), s.sin() / s)
            } else {
                (s.cosh(), s.sinh() / s)
            };
            assert!((sinc_s(z) - sn).abs() < 1e-14, "sinc at {z}");
            assert!((p(z) - (1.0 - c) / z).abs() < 1e-14, "p at {z}");
            assert!((q(z) - (sn - c) / z).abs() < 1e-13, "q at {z}");
            assert!((d(z) - closed_d(z)).abs() < 1e-12, "d at {z}");
        }
    }

    #[test]
    fn d_numerator_vanishes_at_two_pi() {
        assert!(d_numerator(4.0 * PI * PI).abs() < 1e-12);
        assert!((d_numerator(PI * PI) - 4.0).abs() < 1e-12);
    }
}
