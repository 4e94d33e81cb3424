//! End-to-end acceptance checks. Each criterion returns named metrics and
//! a verdict; the CLI `selftest` and the test suite both run these.

use crate::distops::{
    evaluate_distance_field, hessian_space_form, interior_samples, laplacian_compare, sublaplacian, DistError,
};
use crate::frame::{riemannian_kappa_oracle, tanaka_webster_kappa, ContactFrame, FrameError, Point};
use crate::heat::{heisenberg_pipeline, remark_residual, PipelineConfig};
use crate::models::{sl2_cut_analysis, ModelSpace};
use crate::riccati::{
    closed_form_s, closed_form_u, det_b_closed, integrate_ab, riccati_compare, CurvatureProfile,
};
use crate::volume::{ball_volume, ball_volume_exp_oracle, bishop_check, BISHOP_REL_TOL};
use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

/// Outcome of one criterion.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub metrics: BTreeMap<String, f64>,
    pub elapsed_s: f64,
    /// set when the criterion could not be evaluated at all
    pub error: Option<String>,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{verdict}] {} {} ({:.1} s)", self.id, self.name, self.elapsed_s)?;
        for (k, v) in &self.metrics {
            write!(f, " {k}={v:.3e}")?;
        }
        if let Some(e) = &self.error {
            write!(f, " error: {e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AcceptanceConfig {
    pub seed: u64,
    pub volume_grid: usize,
    pub hessian_points: usize,
    pub heat_levels: Vec<usize>,
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            volume_grid: 64,
            hessian_points: 50,
            heat_levels: vec![32, 48, 64],
        }
    }
}

type Metrics = BTreeMap<String, f64>;

struct Tally {
    metrics: Metrics,
    passed: bool,
}

impl Tally {
    fn new() -> Self {
        Self {
            metrics: Metrics::new(),
            passed: true,
        }
    }

    /// Records `value` and requires `value ≤ bound`.
    fn at_most(&mut self, name: &str, value: f64, bound: f64) {
        self.metrics.insert(name.to_string(), value);
        if !(value <= bound) {
            self.passed = false;
        }
    }

    fn require(&mut self, name: &str, ok: bool) {
        self.metrics.insert(name.to_string(), if ok { 1.0 } else { 0.0 });
        self.passed &= ok;
    }
}

fn finish(id: u8, name: &str, start: Instant, outcome: Result<Tally, String>) -> CriterionResult {
    let elapsed_s = start.elapsed().as_secs_f64();
    match outcome {
        Ok(t) => CriterionResult {
            id,
            name: name.to_string(),
            passed: t.passed,
            metrics: t.metrics,
            elapsed_s,
            error: None,
        },
        Err(e) => CriterionResult {
            id,
            name: name.to_string(),
            passed: false,
            metrics: Metrics::new(),
            elapsed_s,
            error: Some(e),
        },
    }
}

fn rel_err(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
    (a - b).abs().max() / b.abs().max().max(1.0)
}

/// Closed-form U, S and |det B| against the (A, B) integration.
pub fn riccati_closed_forms() -> CriterionResult {
    let start = Instant::now();
    let run = || -> Result<Tally, String> {
        let (mut eu, mut es, mut ed) = (0.0f64, 0.0f64, 0.0f64);
        let mut cases = 0;
        let ks = [-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0];
        let h0s = [-3.0 * PI, -PI, -1.0, 0.0, 0.5, PI, 3.0 * PI];
        let hs = [0.1, 0.5, 1.0, 2.0, 4.0];
        for &k in &ks {
            for &h0 in &h0s {
                for &hh in &hs {
                    let sigma = h0 * h0 + 2.0 * hh * k;
                    // first pole of U is at √σ·t = π/2
                    let t_max = if sigma > 0.0 { (0.95 * 0.5 * PI / sigma.sqrt()).min(2.0) } else { 2.0 };
                    let times: Vec<f64> = (1..=10).map(|i| t_max * i as f64 / 10.0).collect();
                    let j = integrate_ab(
                        &CurvatureProfile::space_form(k, h0, hh),
                        &Matrix3::identity(),
                        &Matrix3::zeros(),
                        &times,
                    )
                    .map_err(|e| e.to_string())?;
                    for (i, &t) in times.iter().enumerate() {
                        let u = closed_form_u(k, h0, hh, t).map_err(|e| e.to_string())?;
                        let s = closed_form_s(k, h0, hh, t).map_err(|e| e.to_string())?;
                        eu = eu.max(rel_err(&j.u(i).ok_or("singular A")?, &u));
                        es = es.max(rel_err(&j.s(i).ok_or("singular B")?, &s));
                        let det = det_b_closed(k, h0, hh, t);
                        ed = ed.max((j.det_b(i).abs() - det).abs() / det.abs().max(1.0));
                    }
                    cases += 1;
                }
            }
        }
        let mut t = Tally::new();
        t.metrics.insert("cases".into(), cases as f64);
        t.at_most("max_u_err", eu, 1e-8);
        t.at_most("max_s_err", es, 1e-8);
        t.at_most("max_det_err", ed, 1e-9);
        Ok(t)
    };
    finish(1, "riccati closed forms", start, run())
}

/// The model frame with every structure constant recomputed from
/// finite-difference brackets, so curvature goes through the generic path.
struct BracketFrame<'a>(&'a ModelSpace);

impl ContactFrame for BracketFrame<'_> {
    fn frame(&self, p: &Point) -> [Point; 3] {
        self.0.frame(p)
    }
    fn components(&self, p: &Point, w: &Point) -> Result<Vector3<f64>, FrameError> {
        self.0.components(p, w)
    }
    fn shift(&self, p: &Point, c: &Vector3<f64>) -> Point {
        self.0.shift(p, c)
    }
    fn project(&self, p: &mut Point) {
        self.0.project(p)
    }
}

/// Tanaka–Webster κ against half the Riemannian combination at random
/// points, and the exact model values.
pub fn curvature_identity(seed: u64) -> CriterionResult {
    let start = Instant::now();
    let run = || -> Result<Tally, String> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = 1.3;
        let models = [
            ModelSpace::heisenberg(),
            ModelSpace::su2(c).map_err(|e| e.to_string())?,
            ModelSpace::sl2(c).map_err(|e| e.to_string())?,
        ];
        let mut t = Tally::new();
        for m in &models {
            let (mut gap, mut model_err) = (0.0f64, 0.0f64);
            let expect = m.curvature();
            for _ in 0..100 {
                let v = Vector3::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                let p = m.shift(&m.origin(), &v);
                let fd = BracketFrame(m);
                let tw = tanaka_webster_kappa(&fd, &p).map_err(|e| e.to_string())?;
                let oracle = riemannian_kappa_oracle(&fd, &p).map_err(|e| e.to_string())?;
                gap = gap.max((tw - oracle).abs());
                model_err = model_err.max((tanaka_webster_kappa(m, &p).map_err(|e| e.to_string())? - expect).abs());
            }
            t.at_most(&format!("{}_identity_gap", m.kind), gap, 1e-6);
            t.at_most(&format!("{}_model_value_err", m.kind), model_err, 1e-10);
        }
        Ok(t)
    };
    finish(2, "curvature identity", start, run())
}

/// r₁, r₂, r₃ for the SL(2) cut locus.
pub fn sl2_cut() -> CriterionResult {
    let start = Instant::now();
    let run = || -> Result<Tally, String> {
        let rep = sl2_cut_analysis(1e-6).map_err(|e| e.to_string())?;
        let mut t = Tally::new();
        t.metrics.insert("r1".into(), rep.r1);
        t.metrics.insert("r2".into(), rep.r2);
        t.metrics.insert("r3".into(), rep.r3);
        t.at_most("r2_minus_8pi2", rep.residuals.r2_minus_8pi2.abs(), 1e-6);
        t.require("r2_lt_r3_le_r1", rep.r2 < rep.r3 && rep.r3 <= rep.r1);
        t.at_most("f_identity_residual", rep.residuals.f1g.max_f, 1e-6);
        t.at_most("g_identity_residual", rep.residuals.f1g.max_g, 1e-6);
        t.require("report_passed", rep.passed);
        Ok(t)
    };
    finish(3, "sl2 cut locus", start, run())
}

/// Closed-form ball volumes against the exponential-map oracle.
pub fn volume_oracle(grid: usize) -> CriterionResult {
    let start = Instant::now();
    let run = || -> Result<Tally, String> {
        let mut t = Tally::new();
        let cases = [
            (ModelSpace::heisenberg(), [0.5, 1.0, 2.0]),
            (ModelSpace::su2(1.0).map_err(|e| e.to_string())?, [0.5, 1.0, 2.0]),
            (ModelSpace::sl2(1.0).map_err(|e| e.to_string())?, [0.5, 1.0, 2.0]),
        ];
        let mut heis = BTreeMap::new();
        for (m, radii) in &cases {
            let mut worst = 0.0f64;
            for &r in radii {
                let exact = ball_volume(m, r).map_err(|e| e.to_string())?;
                let oracle = ball_volume_exp_oracle(m, r, grid).map_err(|e| e.to_string())?;
                worst = worst.max((oracle.volume - exact.volume).abs() / exact.volume);
                if m.curvature() == 0.0 {
                    heis.insert((r * 2.0) as u32, oracle.volume);
                }
            }
            t.at_most(&format!("{}_rel_err", m.kind), worst, 1e-3);
        }
        let ratio = heis[&4] / heis[&2];
        t.at_most("heisenberg_scaling_err", (ratio - 16.0).abs() / 16.0, 1e-3);
        Ok(t)
    };
    finish(4, "volume oracle", start, run())
}

/// Space-form volumes are nonincreasing in k; Bishop equality case.
pub fn bishop_ordering() -> CriterionResult {
    let start = Instant::now();
    let run = || -> Result<Tally, String> {
        let mut t = Tally::new();
        let radius = 1.5;
        let ks = [-1.0, -0.5, 0.0, 0.5, 1.0];
        let vols: Vec<f64> = ks
            .iter()
            .map(|&k| ball_volume(&ModelSpace::space_form(k), radius).map(|v| v.volume))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let worst_increase = vols.windows(2).map(|w| (w[1] - w[0]) / w[0]).fold(f64::NEG_INFINITY, f64::max);
        t.at_most("max_relative_increase", worst_increase, 0.0);
        let su2 = ModelSpace::su2(1.0).map_err(|e| e.to_string())?;
        let eq = bishop_check(1.0, &su2, radius).map_err(|e| e.to_string())?;
        t.at_most("equality_margin", eq.samples[0].margin.abs(), BISHOP_REL_TOL);
        t.require("equality_report_passed", eq.passed());
        let strict = bishop_check(0.0, &su2, radius).map_err(|e| e.to_string())?;
        t.require("su2_vs_k0_passed", strict.passed());
        Ok(t)
    };
    finish(5, "bishop ordering", start, run())
}

/// Hessian of the distance against the space-form formula, the trace and
/// symmetry identities, and the signs of the comparison margins.
pub fn hessian_laplacian(points: usize) -> CriterionResult {
    let start = Instant::now();
    let models = match (ModelSpace::su2(1.0), ModelSpace::sl2(1.0)) {
        (Ok(a), Ok(b)) => [ModelSpace::heisenberg(), a, b],
        (Err(e), _) | (_, Err(e)) => return finish(6, "hessian and laplacian", start, Err(e.to_string())),
    };
    let run = || -> Result<Tally, DistError> {
        let mut t = Tally::new();
        for m in &models {
            let k = m.curvature();
            let (mut e_sf, mut e_tr, mut e_sym, mut e_33, mut e_x3) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
            for (x, guess) in interior_samples(m, 1.5, points)? {
                let ev = evaluate_distance_field(m, &x, Some(&guess))?;
                let h = ev.hessian.matrix();
                let sf = hessian_space_form(k, -0.5 * ev.dist.r.powi(2), ev.jet.grad[0])?;
                e_sf = e_sf.max((h - sf.matrix()).abs().max());
                let sc = m.structure_constants(&x)?;
                e_tr = e_tr.max((ev.hessian.trace_c2() - sublaplacian(&sc, &ev.jet)).abs());
                e_sym = e_sym.max(ev.hessian.symmetry_residual);
                e_33 = e_33.max((h[(2, 2)] + 1.0).abs());
                e_x3 = e_x3.max(h[(0, 2)].abs().max(h[(1, 2)].abs()));
            }
            let kind = m.kind;
            t.at_most(&format!("{kind}_space_form_err"), e_sf, 1e-3);
            t.at_most(&format!("{kind}_trace_err"), e_tr, 1e-8);
            t.at_most(&format!("{kind}_symmetry_err"), e_sym, 1e-8);
            t.at_most(&format!("{kind}_h33_err"), e_33, 1e-3);
            t.at_most(&format!("{kind}_h13_h23_err"), e_x3, 1e-3);
        }
        for m in &models[1..] {
            let pts: Vec<Point> = interior_samples(m, 1.5, 8)?.into_iter().map(|(x, _)| x).collect();
            let rep = laplacian_compare(m, 0.0, &pts)?;
            t.metrics.insert(format!("{}_vs_k0_min_margin", m.kind), rep.min_margin());
            t.require(&format!("{}_vs_k0_signed", m.kind), rep.passed());
        }
        Ok(t)
    };
    finish(6, "hessian and laplacian", start, run().map_err(|e| e.to_string()))
}

/// Residual of the explicit radial solution and the heat comparison on a
/// sequence of refined grids.
pub fn cheeger_yau(levels: &[usize]) -> CriterionResult {
    let start = Instant::now();
    let run = || -> Result<Tally, String> {
        let mut t = Tally::new();
        let mut worst = 0.0f64;
        for i in 0..=40 {
            for j in 0..=49 {
                let (tt, s) = (2.0 * i as f64 / 40.0, 0.1 + 4.9 * j as f64 / 49.0);
                worst = worst.max(remark_residual(tt, s, 0.1).abs());
            }
        }
        t.at_most("remark_residual", worst, 1e-10);
        let mut margins = Vec::new();
        for &n in levels {
            let cfg = PipelineConfig {
                nodes: n,
                ..Default::default()
            };
            let (_, rep) = heisenberg_pipeline(&cfg).map_err(|e| e.to_string())?;
            t.require(&format!("hypotheses_n{n}"), rep.hypotheses_hold());
            t.metrics.insert(format!("min_margin_n{n}"), rep.min_margin());
            t.passed &= rep.min_margin() >= -1e-6;
            margins.push(rep.min_margin());
        }
        // refinement must not push the margin below tolerance
        if let [.., a, b] = margins[..] {
            t.at_most("refinement_degradation", (a - b).max(0.0), 1e-6);
        }
        Ok(t)
    };
    finish(7, "cheeger-yau heat comparison", start, run())
}

/// Eigen-order of U and det-ratio monotonicity on random ordered profile
/// pairs.
pub fn riccati_comparison(seed: u64, count: usize) -> CriterionResult {
    let start = Instant::now();
    let run = || -> Result<Tally, String> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut failures, mut min_margin) = (0usize, f64::INFINITY);
        for _ in 0..count {
            let h0: f64 = rng.gen_range(-1.5..1.5);
            let hh: f64 = rng.gen_range(0.1..1.0);
            let (a, b, w, ph) = (
                rng.gen_range(-2.0..1.0),
                rng.gen_range(0.0..0.5),
                rng.gen_range(0.5..6.0),
                rng.gen_range(0.0..2.0 * PI),
            );
            let (g, e, nu) = (rng.gen_range(0.0..0.5), rng.gen_range(0.0..0.5), rng.gen_range(0.5..6.0));
            let lower = CurvatureProfile::sasakian(h0, hh, move |t| a + b * (w * t + ph).sin());
            let upper = CurvatureProfile::sasakian(h0, hh, move |t| a + b * (w * t + ph).sin() + g + e * (nu * t).cos().powi(2));
            let sup = h0 * h0 + 2.0 * hh * (a + b + g + e);
            let t_max = if sup > 0.0 { (0.9 * 0.5 * PI / sup.sqrt()).min(2.0) } else { 2.0 };
            let times: Vec<f64> = (1..=12).map(|i| t_max * i as f64 / 12.0).collect();
            let rep = riccati_compare(&lower, &upper, &times).map_err(|e| e.to_string())?;
            if !rep.passed() {
                failures += 1;
            }
            min_margin = min_margin.min(rep.min_margin());
        }
        let mut t = Tally::new();
        t.metrics.insert("profiles".into(), count as f64);
        t.metrics.insert("min_margin".into(), min_margin);
        t.at_most("failures", failures as f64, 0.0);
        Ok(t)
    };
    finish(8, "riccati comparison", start, run())
}

/// Runs every criterion in order.
pub fn run_all(cfg: &AcceptanceConfig) -> Vec<CriterionResult> {
    vec![
        riccati_closed_forms(),
        curvature_identity(cfg.seed),
        sl2_cut(),
        volume_oracle(cfg.volume_grid),
        bishop_ordering(),
        hessian_laplacian(cfg.hessian_points),
        cheeger_yau(&cfg.heat_levels),
        riccati_comparison(cfg.seed, 200),
    ]
}
