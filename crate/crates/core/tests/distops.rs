use nalgebra::Matrix3;
use sascomp::distops::*;
use sascomp::frame::{ContactFrame, Momenta, Point};
use sascomp::geoflow::exp_map;
use sascomp::models::ModelSpace;
use std::f64::consts::PI;

#[test]
fn shooting_matches_closed_form_heisenberg() {
    let m = ModelSpace::heisenberg();
    let o = Point::zeros();
    for x in [
        Point::new(1.0, 0.0, 0.0, 0.0),
        Point::new(0.3, -0.5, 0.2, 0.0),
        Point::new(0.0, 0.0, 0.25, 0.0),
        Point::new(-0.7, 0.1, -0.4, 0.0),
    ] {
        let d = distance(&m, &o, &x).unwrap();
        let exact = heisenberg_distance(&o, &x);
        assert!((d.r - exact).abs() < 1e-7, "{x:?}: {} vs {exact}", d.r);
        assert!(d.residual < 1e-8);
    }
    let d = distance(&m, &o, &Point::new(1.0, 0.0, 0.0, 0.0)).unwrap();
    assert!(d.v0r.abs() < 1e-8);
}

#[test]
fn round_trip_on_groups() {
    for m in [ModelSpace::su2(1.0).unwrap(), ModelSpace::sl2(1.0).unwrap()] {
        let o = m.origin();
        for alpha in [Momenta::new(1.0, 0.8, 0.3), Momenta::new(-2.5, 0.2, -1.1), Momenta::new(0.2, -0.5, 0.5)] {
            let x = exp_map(&m, &o, &alpha, 1.0).unwrap();
            let d = distance(&m, &o, &x).unwrap();
            let r = alpha[1].hypot(alpha[2]);
            assert!((d.r - r).abs() < 1e-7, "{:?} {alpha:?}: {} vs {r}", m.kind, d.r);
        }
    }
}

#[test]
fn hessian_of_ds_at_unit_point() {
    let m = ModelSpace::heisenberg();
    let ev = evaluate_distance_field(&m, &Point::new(1.0, 0.0, 0.0, 0.0), None).unwrap();
    let h = ev.hessian.matrix();
    let expect = -Matrix3::new(4.0, 6.0, 0.0, 6.0, 12.0, 0.0, 0.0, 0.0, 1.0);
    println!("{h}");
    assert!((h - expect).abs().max() < 1e-4, "{h}");
}

#[test]
fn fd_hessian_matches_space_form_everywhere() {
    for m in [ModelSpace::heisenberg(), ModelSpace::su2(1.0).unwrap(), ModelSpace::sl2(1.0).unwrap()] {
        let k = m.curvature();
        for (x, guess) in interior_samples(&m, 1.5, 6).unwrap() {
            let ev = evaluate_distance_field(&m, &x, Some(&guess)).unwrap();
            let sf = hessian_space_form(k, -0.5 * ev.dist.r.powi(2), ev.jet.grad[0]).unwrap();
            let err = (ev.hessian.matrix() - sf.matrix()).abs().max();
            assert!(err < 1e-3, "{:?} at {x:?}: err {err}\n{}\n{}", m.kind, ev.hessian.matrix(), sf.matrix());
            let sc = m.structure_constants(&x).unwrap();
            assert!((ev.hessian.trace_c2() - sublaplacian(&sc, &ev.jet)).abs() < 1e-8);
            assert!(ev.hessian.symmetry_residual < 1e-8, "{:e}", ev.hessian.symmetry_residual);
        }
    }
    let _ = PI;
}

fn points(m: &ModelSpace, n: usize) -> Vec<Point> {
    interior_samples(m, 1.5, n).unwrap().into_iter().map(|(x, _)| x).collect()
}

#[test]
fn laplacian_comparison_signs() {
    let su2 = ModelSpace::su2(1.0).unwrap();
    let rep = laplacian_compare(&su2, 0.0, &points(&su2, 6)).unwrap();
    assert!(rep.passed(), "{:#?}", rep.failures().collect::<Vec<_>>());
    let sl2 = ModelSpace::sl2(1.0).unwrap();
    let rep = laplacian_compare(&sl2, 0.0, &points(&sl2, 6)).unwrap();
    assert!(rep.passed(), "{:#?}", rep.failures().collect::<Vec<_>>());
    for m in [ModelSpace::heisenberg(), su2, sl2] {
        let rep = laplacian_compare(&m, m.curvature(), &points(&m, 4)).unwrap();
        assert!(rep.passed());
        assert!(rep.samples.iter().all(|s| s.margin.abs() < 1e-5), "{rep:#?}");
    }
}
