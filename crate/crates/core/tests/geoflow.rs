use num_complex::Complex64;
use proptest::prelude::*;
use sascomp::frame::{Momenta, Point};
use sascomp::geoflow::{exp_map, trajectory, FD_FLOW_TOL};
use sascomp::models::ModelSpace;
use sascomp::numerics::quad::adaptive;

/// Planar part in canonical coordinates: x + iy = w₀(1 − e^{−iθt})/(iθ)
/// with w₀ = h₁ + ih₂, θ = h₀; z from the area integral ½∫(xẏ − yẋ).
fn heisenberg_reference(alpha: &Momenta, t: f64) -> Point {
    let w0 = Complex64::new(alpha[1], alpha[2]);
    let th = alpha[0];
    let planar = |s: f64| {
        if th.abs() < 1e-12 {
            w0 * s
        } else {
            w0 * (1.0 - Complex64::new(0.0, -th * s).exp()) / Complex64::new(0.0, th)
        }
    };
    let velocity = |s: f64| w0 * Complex64::new(0.0, -th * s).exp();
    let z = adaptive(
        |s| {
            let (p, v) = (planar(s), velocity(s));
            0.5 * (p.re * v.im - p.im * v.re)
        },
        0.0,
        t,
        1e-14,
        1e-13,
    )
    .value;
    let p = planar(t);
    Point::new(p.re, p.im, z, 0.0)
}

#[test]
fn heisenberg_flow_matches_canonical_coordinates() {
    let m = ModelSpace::heisenberg();
    for alpha in [Momenta::new(0.0, 1.0, 0.5), Momenta::new(2.0, -0.3, 0.8), Momenta::new(-5.0, 1.2, 0.1)] {
        let times = [0.3, 1.0, 2.5];
        let states = trajectory(&m, &Point::zeros(), &alpha, &times, FD_FLOW_TOL).unwrap();
        for (s, &t) in states.iter().zip(&times) {
            let expect = heisenberg_reference(&alpha, t);
            assert!((s.x - expect).norm() < 1e-9, "{alpha:?} t={t}: {} vs {}", s.x, expect);
        }
    }
}

fn model(kind: u8) -> ModelSpace {
    match kind {
        0 => ModelSpace::heisenberg(),
        1 => ModelSpace::su2(1.2).unwrap(),
        _ => ModelSpace::sl2(0.8).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hamiltonian_is_conserved(kind in 0u8..3, h0 in -4.0..4.0f64, h1 in -2.0..2.0f64, h2 in -2.0..2.0f64) {
        let m = model(kind);
        let alpha = Momenta::new(h0, h1, h2);
        let e0 = 0.5 * (h1 * h1 + h2 * h2);
        let states = trajectory(&m, &m.origin(), &alpha, &[0.5, 1.0, 2.0], FD_FLOW_TOL).unwrap();
        for s in states {
            prop_assert!((s.hamiltonian() - e0).abs() < 1e-9 * (1.0 + e0));
        }
    }

    #[test]
    fn time_rescaling(kind in 0u8..3, h0 in -3.0..3.0f64, h1 in -1.5..1.5f64, h2 in -1.5..1.5f64, lambda in 0.2..2.0f64) {
        let m = model(kind);
        let alpha = Momenta::new(h0, h1, h2);
        let a = exp_map(&m, &m.origin(), &(alpha * lambda), 1.0).unwrap();
        let b = exp_map(&m, &m.origin(), &alpha, lambda).unwrap();
        prop_assert!((a - b).norm() < 1e-8, "{} vs {}", a, b);
    }
}
