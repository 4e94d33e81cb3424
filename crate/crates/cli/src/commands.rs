use crate::output::Report;
use crate::{CliError, Common};
use nalgebra::Matrix3;
use sascomp::acceptance::{run_all, AcceptanceConfig};
use sascomp::distops::{evaluate_distance_field, hessian_space_form, interior_samples, laplacian_compare, sublaplacian};
use sascomp::frame::{ContactFrame, Momenta, Point};
use sascomp::geoflow::{trajectory, FD_FLOW_TOL};
use sascomp::heat::{heisenberg_pipeline, write_field_csv, PipelineConfig};
use sascomp::models::{injectivity_domain, sl2_cut_analysis, ModelError, ModelKind, ModelSpace};
use sascomp::riccati::{closed_form_s, closed_form_u, det_b_closed, integrate_ab, CurvatureProfile};
use sascomp::volume::{ball_volume, ball_volume_exp_oracle, bishop_check, VolumeError, MIN_ORACLE_GRID};
use serde_json::{json, Value};
use std::f64::consts::PI;

fn failed(e: impl std::fmt::Display) -> CliError {
    CliError::Failed(e.to_string())
}

fn model_err(e: ModelError) -> CliError {
    match e {
        ModelError::BadScale(_) | ModelError::BadRadius(_) | ModelError::OutOfValidity { .. } | ModelError::UnknownKind(_) => {
            CliError::Config(e.to_string())
        }
        other => failed(other),
    }
}

fn volume_err(e: VolumeError) -> CliError {
    match e {
        VolumeError::Domain(m) => model_err(m),
        VolumeError::Grid { .. } => CliError::Config(e.to_string()),
        other => failed(other),
    }
}

fn require_radius(c: &Common) -> Result<f64, CliError> {
    c.radius.ok_or_else(|| CliError::Config("--R is required for this command".into()))
}

fn grid_at_least(c: &Common, default: usize, min: usize) -> Result<usize, CliError> {
    let g = c.grid.unwrap_or(default);
    if g < min {
        return Err(CliError::Config(format!("--grid must be at least {min}, got {g}")));
    }
    Ok(g)
}

fn point_cells(p: &Point) -> Vec<Value> {
    (0..4).map(|i| json!(p[i])).collect()
}

/// Columns: k_lower, volume, reference_volume, margin, hypotheses, passed.
pub fn volume(c: &Common) -> Result<Report, CliError> {
    let m = c.model_space()?;
    let radius = require_radius(c)?;
    let grid = grid_at_least(c, 32, MIN_ORACLE_GRID)?;
    let tol = c.tol.unwrap_or(1e-3);
    let exact = ball_volume(&m, radius).map_err(volume_err)?;
    let oracle = ball_volume_exp_oracle(&m, radius, grid).map_err(volume_err)?;
    let rel = if exact.volume > 0.0 {
        (oracle.volume - exact.volume).abs() / exact.volume
    } else {
        (oracle.volume - exact.volume).abs()
    };
    let mut rep = Report::new("volume", vec!["k_lower", "volume", "reference_volume", "margin", "hypotheses", "passed"]);
    let mut ks = vec![-1.0, -0.5, 0.0, 0.5, 1.0];
    if let Some(k) = c.k {
        ks.push(k);
    }
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    let mut bishop_ok = true;
    for k in ks {
        let space = ModelSpace::space_form(k);
        if space.radius_bound().is_some_and(|b| radius > b) {
            continue;
        }
        let b = bishop_check(k, &m, radius).map_err(volume_err)?;
        let reference = ball_volume(&space, radius).map_err(volume_err)?.volume;
        if b.hypotheses_hold() {
            bishop_ok &= b.claims_hold();
        }
        rep.row(vec![
            json!(k),
            json!(exact.volume),
            json!(reference),
            json!(b.samples[0].margin),
            json!(b.hypotheses_hold()),
            json!(b.passed()),
        ]);
    }
    rep.passed = rel <= tol && bishop_ok;
    rep.summary = json!({ "closed_form": exact, "oracle": oracle, "relative_error": rel, "tolerance": tol });
    Ok(rep)
}

/// Columns: t, x0..x3, h0, h1, h2, hamiltonian.
pub fn geodesic(c: &Common, alpha: &[f64], t_end: f64, steps: usize) -> Result<Report, CliError> {
    if alpha.len() != 3 {
        return Err(CliError::Config(format!("--alpha takes h0,h1,h2, got {} values", alpha.len())));
    }
    if !(t_end > 0.0) || steps == 0 {
        return Err(CliError::Config("--t-end must be positive and --steps at least 1".into()));
    }
    let m = c.model_space()?;
    let a = Momenta::new(alpha[0], alpha[1], alpha[2]);
    let times: Vec<f64> = (0..=steps).map(|i| t_end * i as f64 / steps as f64).collect();
    let states = trajectory(&m, &m.origin(), &a, &times, FD_FLOW_TOL).map_err(failed)?;
    let tol = c.tol.unwrap_or(1e-8);
    let e0 = 0.5 * (a[1] * a[1] + a[2] * a[2]);
    let mut rep = Report::new("geodesic", vec!["t", "x0", "x1", "x2", "x3", "h0", "h1", "h2", "hamiltonian"]);
    let mut drift = 0.0f64;
    for (t, s) in times.iter().zip(&states) {
        drift = drift.max((s.hamiltonian() - e0).abs());
        let mut row = vec![json!(t)];
        row.extend(point_cells(&s.x));
        row.extend((0..3).map(|i| json!(s.h[i])));
        row.push(json!(s.hamiltonian()));
        rep.row(row);
    }
    rep.passed = drift <= tol * (1.0 + e0);
    rep.summary = json!({ "energy_drift": drift, "tolerance": tol });
    Ok(rep)
}

/// Columns: r, h_max (boundary of Ω_R in the (r, h) half-plane).
pub fn cutlocus(c: &Common) -> Result<Report, CliError> {
    let m = c.model_space()?;
    let tol = c.tol.unwrap_or(1e-6);
    let cut = sl2_cut_analysis(tol).map_err(model_err)?;
    let radius = match c.radius {
        Some(r) => r,
        None => m.radius_bound().unwrap_or(2.0 * PI / c.c),
    };
    let dom = injectivity_domain(&m, radius).map_err(model_err)?;
    let n = c.grid.unwrap_or(200).max(2);
    let mut rep = Report::new("cutlocus", vec!["r", "h_max"]);
    for i in 0..=n {
        let r = dom.r_max() * i as f64 / n as f64;
        if let Some(h) = dom.h_max(r) {
            rep.row(vec![json!(r), json!(h)]);
        }
    }
    rep.passed = cut.passed;
    rep.summary = json!({
        "analysis": cut,
        "r2_over_8pi2": cut.r2 / (8.0 * PI * PI),
        "sl2_radius_bound": cut.r2.sqrt() / c.c,
        "domain_radius": radius,
    });
    Ok(rep)
}

fn rel_err(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
    (a - b).abs().max() / b.abs().max().max(1.0)
}

/// Columns: k, h0, H, t, u_err, s_err, det_err.
pub fn riccati(c: &Common) -> Result<Report, CliError> {
    let k = match c.k {
        Some(k) => k,
        None => c.model_space()?.curvature(),
    };
    let tol = c.tol.unwrap_or(1e-8);
    let n = c.grid.unwrap_or(8).max(1);
    let mut rep = Report::new("riccati", vec!["k", "h0", "H", "t", "u_err", "s_err", "det_err"]);
    let mut worst = 0.0f64;
    for h0 in [0.0, 1.0, PI] {
        for hh in [0.5, 2.0] {
            let sigma = h0 * h0 + 2.0 * hh * k;
            let t_max = if sigma > 0.0 { (0.95 * 0.5 * PI / sigma.sqrt()).min(2.0) } else { 2.0 };
            let times: Vec<f64> = (1..=n).map(|i| t_max * i as f64 / n as f64).collect();
            let j = integrate_ab(&CurvatureProfile::space_form(k, h0, hh), &Matrix3::identity(), &Matrix3::zeros(), &times)
                .map_err(failed)?;
            for (i, &t) in times.iter().enumerate() {
                let u = closed_form_u(k, h0, hh, t).map_err(failed)?;
                let s = closed_form_s(k, h0, hh, t).map_err(failed)?;
                let eu = rel_err(&j.u(i).ok_or_else(|| failed("singular A"))?, &u);
                let es = rel_err(&j.s(i).ok_or_else(|| failed("singular B"))?, &s);
                let det = det_b_closed(k, h0, hh, t);
                let ed = (j.det_b(i).abs() - det).abs() / det.abs().max(1.0);
                worst = worst.max(eu).max(es).max(ed);
                rep.row(vec![json!(k), json!(h0), json!(hh), json!(t), json!(eu), json!(es), json!(ed)]);
            }
        }
    }
    rep.passed = worst <= tol;
    rep.summary = json!({ "max_error": worst, "tolerance": tol });
    Ok(rep)
}

/// Columns: x0..x3, r, v0r, space_form_err, trace_err, symmetry_residual, h33.
pub fn hessian(c: &Common) -> Result<Report, CliError> {
    let m = c.model_space()?;
    let radius = c.radius.unwrap_or(1.5);
    injectivity_domain(&m, radius).map_err(model_err)?;
    let n = grid_at_least(c, 10, 1)?;
    let tol = c.tol.unwrap_or(1e-3);
    let k = m.curvature();
    let mut rep = Report::new(
        "hessian",
        vec!["x0", "x1", "x2", "x3", "r", "v0r", "space_form_err", "trace_err", "symmetry_residual", "h33"],
    );
    let mut ok = true;
    for (x, guess) in interior_samples(&m, radius, n).map_err(failed)? {
        let ev = evaluate_distance_field(&m, &x, Some(&guess)).map_err(failed)?;
        let sf = hessian_space_form(k, -0.5 * ev.dist.r.powi(2), ev.jet.grad[0]).map_err(failed)?;
        let err = (ev.hessian.matrix() - sf.matrix()).abs().max();
        let sc = m.structure_constants(&x).map_err(failed)?;
        let tr = (ev.hessian.trace_c2() - sublaplacian(&sc, &ev.jet)).abs();
        ok &= err <= tol && tr <= 1e-8 && ev.hessian.symmetry_residual <= 1e-8;
        let mut row = point_cells(&x);
        row.extend([
            json!(ev.dist.r),
            json!(ev.dist.v0r),
            json!(err),
            json!(tr),
            json!(ev.hessian.symmetry_residual),
            json!(ev.hessian.entries[2][2]),
        ]);
        rep.row(row);
    }
    rep.passed = ok;
    rep.summary = json!({ "curvature": k, "radius": radius, "tolerance": tol });
    Ok(rep)
}

/// Columns: kind, label, t_or_x0, x1, x2, x3, lhs, rhs, margin, passed.
pub fn compare(c: &Common) -> Result<Report, CliError> {
    let m = c.model_space()?;
    let k = c.k.unwrap_or(0.0);
    let radius = c.radius.unwrap_or(1.5);
    injectivity_domain(&m, radius).map_err(model_err)?;
    let n = grid_at_least(c, 8, 1)?;
    let pts: Vec<Point> = interior_samples(&m, radius, n).map_err(failed)?.into_iter().map(|(x, _)| x).collect();
    let report = laplacian_compare(&m, k, &pts).map_err(failed)?;
    let mut rep = Report::new("compare", vec!["kind", "label", "x0", "x1", "x2", "x3", "lhs", "rhs", "margin", "passed"]);
    for (kind, list) in [("hypothesis", &report.hypotheses), ("claim", &report.samples)] {
        for s in list {
            let mut row = vec![json!(kind), json!(s.label)];
            row.extend((0..4).map(|i| json!(s.at.get(i).copied().unwrap_or(f64::NAN))));
            row.extend([json!(s.lhs), json!(s.rhs), json!(s.margin), json!(s.passed)]);
            rep.row(row);
        }
    }
    rep.passed = report.passed();
    rep.summary = json!({
        "model_curvature": m.curvature(),
        "k": k,
        "min_margin": report.min_margin(),
        "hypotheses_hold": report.hypotheses_hold(),
        "claims_hold": report.claims_hold(),
    });
    Ok(rep)
}

/// Columns: role, t, x, y, z, barrier, u, margin, passed. One row per
/// snapshot and role with the worst node.
pub fn heat(c: &Common, eps: f64, t_end: f64) -> Result<Report, CliError> {
    if c.model != ModelKind::Heisenberg {
        return Err(CliError::Config("heat runs on the Heisenberg group only".into()));
    }
    if !(eps > 0.0 && t_end > 0.0) {
        return Err(CliError::Config("--eps and --t-end must be positive".into()));
    }
    let nodes = grid_at_least(c, 32, 8)?;
    let tol = c.tol.unwrap_or(1e-6);
    let cfg = PipelineConfig {
        nodes,
        eps,
        t_end,
        ..Default::default()
    };
    let (sol, report) = heisenberg_pipeline(&cfg).map_err(failed)?;
    let mut rep = Report::new("heat", vec!["role", "label", "t", "x", "y", "z", "barrier", "u", "margin", "passed"]);
    for (role, list) in [("hypothesis", &report.hypotheses), ("claim", &report.samples)] {
        for s in list {
            let mut row = vec![json!(role), json!(s.label)];
            row.extend(s.at.iter().map(|v| json!(v)));
            row.extend([json!(s.lhs), json!(s.rhs), json!(s.margin), json!(s.margin >= -tol)]);
            rep.row(row);
        }
    }
    let mut field = Vec::new();
    write_field_csv(&sol, sol.fields.len() - 1, &mut field).map_err(failed)?;
    rep.attachments.push(("heat_field.csv".into(), String::from_utf8_lossy(&field).into_owned()));
    rep.passed = report.hypotheses_hold() && report.min_margin() >= -tol;
    rep.summary = json!({
        "config": cfg,
        "grid": sol.grid,
        "min_margin": report.min_margin(),
        "tolerance": tol,
        "final_time": sol.times.last(),
    });
    Ok(rep)
}

/// Columns: id, name, passed, elapsed_s.
pub fn selftest(c: &Common) -> Result<Report, CliError> {
    let mut cfg = AcceptanceConfig {
        seed: c.seed,
        ..Default::default()
    };
    if let Some(g) = c.grid {
        if g < MIN_ORACLE_GRID {
            return Err(CliError::Config(format!("--grid must be at least {MIN_ORACLE_GRID}")));
        }
        cfg.volume_grid = g;
    }
    let results = run_all(&cfg);
    let mut rep = Report::new("selftest", vec!["id", "name", "passed", "elapsed_s"]);
    for r in &results {
        println!("{r}");
        rep.row(vec![json!(r.id), json!(r.name), json!(r.passed), json!(r.elapsed_s)]);
    }
    rep.passed = results.iter().all(|r| r.passed);
    rep.summary = json!({ "config": cfg, "criteria": results });
    Ok(rep)
}
