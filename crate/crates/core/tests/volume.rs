use sascomp::models::ModelSpace;
use sascomp::volume::{ball_volume, ball_volume_exp_oracle, bishop_check};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn oracle_matches_closed_form_on_all_models() {
    let cases = [
        (ModelSpace::heisenberg(), 1.0),
        (ModelSpace::su2(1.0).unwrap(), 1.5),
        (ModelSpace::sl2(1.0).unwrap(), 2.0),
    ];
    for (m, r) in cases {
        let closed = ball_volume(&m, r).unwrap();
        let oracle = ball_volume_exp_oracle(&m, r, 32).unwrap();
        let e = rel(oracle.volume, closed.volume);
        assert!(e < 1e-3, "{:?} R={r}: {} vs {} ({e:e})", m.kind, oracle.volume, closed.volume);
        assert!(oracle.err >= (oracle.volume - closed.volume).abs(), "{oracle:?} vs {closed:?}");
    }
}

#[test]
fn space_form_volume_nonincreasing_in_k() {
    for r in [0.5, 1.0, 2.0] {
        let vols: Vec<f64> = [-1.0, -0.5, 0.0, 0.5, 1.0]
            .iter()
            .map(|&k| ball_volume(&ModelSpace::space_form(k), r).unwrap().volume)
            .collect();
        assert!(vols.windows(2).all(|w| w[1] <= w[0]), "R={r}: {vols:?}");
    }
}

#[test]
fn bishop_orders_models() {
    let su2 = ModelSpace::su2(1.0).unwrap();
    assert!(bishop_check(0.0, &su2, 2.0).unwrap().passed());
    let h = ModelSpace::heisenberg();
    assert!(bishop_check(-1.0, &h, 2.0).unwrap().passed());
    // κ = −1 is below k_lower = 0: hypothesis violated, not the claim
    let sl2 = ModelSpace::sl2(1.0).unwrap();
    let rep = bishop_check(0.0, &sl2, 2.0).unwrap();
    assert!(!rep.hypotheses_hold());
}
