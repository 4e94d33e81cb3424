use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sascomp::distops::{distance, heisenberg_distance};
use sascomp::frame::Point;
use sascomp::heat::*;
use sascomp::models::ModelSpace;

#[test]
fn remark_residual_sweep() {
    let mut worst: f64 = 0.0;
    for i in 0..=40 {
        for j in 0..=49 {
            let t = 2.0 * i as f64 / 40.0;
            let s = 0.1 + 4.9 * j as f64 / 49.0;
            worst = worst.max(remark_residual(t, s, 0.1).abs());
        }
    }
    assert!(worst < 1e-10, "{worst:e}");
}

#[test]
fn radial_solver_tracks_explicit_solution() {
    let (eps, amp) = (0.1, 0.1f64.powf(2.5));
    let opts = RadialOptions { s_max: 6.0, nodes: 601, t_end: 1.0, snapshots: 11 };
    let b = solve_comparison_pde(
        0.0,
        &|s| remark_solution(0.0, s, eps, amp),
        &|t| remark_solution(t, 6.0, eps, amp),
        &opts,
    )
    .unwrap();
    let mut err: f64 = 0.0;
    for (ti, &t) in b.times.iter().enumerate() {
        for (j, &s) in b.s.iter().enumerate() {
            err = err.max((b.values[ti][j] - remark_solution(t, s, eps, amp)).abs());
        }
    }
    assert!(err < 1e-5, "{err:e}");
    assert!(b.max_slope <= 1e-12);
    assert!(b.derivative_residual < 1e-3, "{}", b.derivative_residual);
    let mid = b.value(0.55, 1.234);
    assert!((mid - remark_solution(0.55, 1.234, eps, amp)).abs() < 1e-3);
}

#[test]
fn decreasing_data_stay_decreasing() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in [0.0, 0.5, 1.0] {
        let s_max = if k > 0.0 { 0.9 * 2.0 * std::f64::consts::PI / f64::sqrt(k) } else { 5.0 };
        let (a, w): (f64, f64) = (rng.gen_range(0.5..2.0), rng.gen_range(0.3..1.5));
        let init = move |s: f64| a / (1.0 + (s / w).powi(2));
        let right = init(s_max);
        let opts = RadialOptions { s_max, nodes: 241, t_end: 0.5, snapshots: 6 };
        let b = solve_comparison_pde(k, &init, &|_| right, &opts).unwrap();
        assert!(b.max_slope <= 1e-10, "k = {k}: {}", b.max_slope);
    }
}

#[test]
fn closed_form_distance_matches_shooting_on_grid_nodes() {
    let m = ModelSpace::heisenberg();
    let o = Point::zeros();
    for p in [[0.8, 0.3, 0.1], [-1.2, 0.5, -0.3], [0.2, -0.9, 0.45], [2.0, 1.0, 0.2]] {
        let x = Point::new(p[0], p[1], p[2], 0.0);
        let shot = distance(&m, &o, &x).unwrap().r;
        assert!((shot - heisenberg_distance(&o, &x)).abs() < 1e-8);
    }
}

#[test]
fn pipeline_refinement() {
    let mut margins = Vec::new();
    for n in [16, 24, 32] {
        let cfg = PipelineConfig { nodes: n, ..Default::default() };
        let (sol, rep) = heisenberg_pipeline(&cfg).unwrap();
        assert!(rep.hypotheses_hold());
        println!("n = {n}: min margin {:e}, steps dt {:e}", rep.min_margin(), sol.grid.dt);
        margins.push(rep.min_margin());
    }
    assert!(margins.iter().all(|&m| m >= -1e-6), "{margins:?}");
}

#[test]
fn zero_boundary_mass_decreases() {
    let g = HeatGrid::new([21, 21, 21], [-1.0, -1.0, -0.5], [1.0, 1.0, 0.5], 0.9).unwrap();
    let bump = |p: &Point| (-(p[0] * p[0] + p[1] * p[1]) * 4.0 - p[2] * p[2] * 16.0).exp();
    let sol = solve_sr_heat(&g, &bump, &|_, _, _| None, 0.05, 6).unwrap();
    let mass: Vec<f64> = sol.fields.iter().map(|f| f.iter().sum()).collect();
    assert!(mass.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{mass:?}");
}

#[test]
fn csv_export_has_header_and_rows() {
    let g = HeatGrid::new([3, 3, 3], [-1.0; 3], [1.0; 3], 0.9).unwrap();
    let sol = solve_sr_heat(&g, &|_| 1.0, &|_, _, _| None, 0.01, 2).unwrap();
    let mut buf = Vec::new();
    write_field_csv(&sol, 1, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next(), Some("x,y,z,u"));
    assert_eq!(text.lines().count(), 28);
}
