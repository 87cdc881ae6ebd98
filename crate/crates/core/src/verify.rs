//! The oracle suite behind `enclosure verify` and the acceptance tests.
//!
//! Each criterion compares a production code path against an independent
//! route (nested quadrature, Monte Carlo, finite differences, brute-force
//! search or a closed form derived separately) at a fixed tolerance.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::OnceLock;
use std::time::Instant;

use nalgebra::{Matrix3, Rotation3, Unit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{
    broken_path_gradient, broken_path_length, det_closed_form, det_shape_diff, max_shift, CorrectionVariant,
    HeightChart, SpheroidFrame, TangentFrame, UnitPairGeometry, Vec3, VALIDATED_VARIANT,
};
use crate::indicator::{curve_from_trace, curve_semianalytic, decay_fit, resolvable_tau_cap, scaled_limit, tau_window};
use crate::numeric::fd_hessian_2d;
use crate::obstacle::{first_reflector, min_broken_path, min_over_triple_surfaces, Ball, Ellipsoid, ObstacleShape};
use crate::potentials::{
    asymptotic_rhs, ball_ball_integral, AsymptoticInputs, AsymptoticKind, JProblem, YukawaBallField,
};
use crate::probe::{
    direction_excess, principal_directions, reconstruct_ball, scan_reflector, DataSource, ReconstructOptions,
    ScanOptions,
};
use crate::quadrature::adaptive_gk;
use crate::wavesim::{free_space_ball_integral, simulate, Formulation, ReceiverTrace, SimulationConfig};

pub const CRITERIA: [(u32, &str); 15] = [
    (1, "ball potential closed form vs quadrature"),
    (2, "ball-ball integral vs Monte Carlo"),
    (3, "spheroid shape operator vs finite differences"),
    (4, "broken-path Hessian identity"),
    (5, "determinant closed-form variant"),
    (6, "triple-surface minimum identity"),
    (7, "J surface vs volume route"),
    (8, "Laplace surface integral limit"),
    (9, "scaled indicator limits"),
    (10, "FDTD decay rate on S1"),
    (11, "reflector scan"),
    (12, "shift dichotomy and singleton"),
    (13, "ball reconstruction"),
    (14, "rotation scan"),
    (15, "FDTD self-checks"),
];

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {} ({:.1} s): {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.seconds,
            self.detail
        )
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 20240917 }
    }
}

type Outcome = Result<(bool, String)>;

pub fn run_criterion(id: u32, opts: &VerifyOptions) -> CriterionResult {
    let name = CRITERIA
        .iter()
        .find(|(i, _)| *i == id)
        .map(|(_, n)| n.to_string())
        .unwrap_or_else(|| format!("unknown criterion {id}"));
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(id as u64));
    let outcome: Outcome = match id {
        1 => potential_oracle(&mut rng),
        2 => double_ball_monte_carlo(&mut rng),
        3 => spheroid_algebra(&mut rng),
        4 => hessian_identity(&mut rng),
        5 => det_variant(&mut rng),
        6 => triple_surface(&mut rng),
        7 => j_cross_validation(),
        8 => laplace_limit(),
        9 => scaled_limits(),
        10 => fdtd_decay(),
        11 => reflector_scan(),
        12 => dichotomies(&mut rng),
        13 => ball_reconstruction(),
        14 => rotation_scan(),
        15 => fdtd_self_checks(),
        _ => Err(Error::InvalidParameter(format!("no criterion {id}"))),
    };
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionResult {
        id,
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run_all(opts: &VerifyOptions) -> Vec<CriterionResult> {
    CRITERIA.iter().map(|(id, _)| run_criterion(*id, opts)).collect()
}

fn s1() -> (ObstacleShape, Ball, Ball) {
    (
        ObstacleShape::sphere(Vec3::zeros(), 1.0).unwrap(),
        Ball::new(Vec3::new(4.0, 0.0, 0.0), 0.5).unwrap(),
        Ball::new(Vec3::new(0.0, 4.0, 0.0), 0.5).unwrap(),
    )
}

fn s1_reflector() -> Vec3 {
    Vec3::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0)
}

fn unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

fn in_ball(rng: &mut ChaCha8Rng, b: &Ball) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if v.norm_squared() <= 1.0 {
            return b.center + b.radius * v;
        }
    }
}

/// A random ellipsoid with a surface point `q` and foci placed
/// symmetrically about the normal at `q`, so that the reflection law holds.
struct SnellConfig {
    ellipsoid: Ellipsoid,
    q: Vec3,
    p: Vec3,
    p_prime: Vec3,
}

fn random_snell_config(rng: &mut ChaCha8Rng) -> SnellConfig {
    let axes = Vec3::new(
        rng.random_range(0.5..2.0),
        rng.random_range(0.5..2.0),
        rng.random_range(0.5..2.0),
    );
    let rot = Rotation3::from_scaled_axis(unit(rng) * rng.random_range(0.0..PI)).into_inner();
    let e = Ellipsoid::new(Vec3::zeros(), axes, rot).unwrap();
    let q = e.point(&unit(rng));
    let nu = e.normal(&q);
    let tangent = Unit::new_normalize(nu.cross(&unit(rng)));
    let alpha = rng.random_range(0.15..1.2);
    let p = q + rng.random_range(2.5..5.0) * (Rotation3::from_axis_angle(&tangent, alpha) * nu);
    let p_prime = q + rng.random_range(2.5..5.0) * (Rotation3::from_axis_angle(&tangent, -alpha) * nu);
    SnellConfig {
        ellipsoid: e,
        q,
        p,
        p_prime,
    }
}

fn rel_matrix_error(a: &crate::geom::Mat2, b: &crate::geom::Mat2) -> f64 {
    (a - b).abs().max() / a.abs().max().max(b.abs().max())
}

// 1 ---------------------------------------------------------------------

/// `(1/4π) ∫_B e^{-τ|x-y|}/|x-y| dy` by nested quadrature in spherical
/// coordinates about the ball center, with `μ = 1 - u²` to remove the
/// endpoint singularity when `ρ = r`.
fn potential_by_quadrature(tau: f64, eta: f64, r: f64) -> f64 {
    let shell = |rho: f64| {
        let inner = adaptive_gk(
            |u| {
                let d = ((r - rho).powi(2) + 2.0 * r * rho * u * u).sqrt().max(1e-300);
                2.0 * u * (-tau * d).exp() / d
            },
            0.0,
            std::f64::consts::SQRT_2,
            1e-300,
            1e-13,
            400,
        );
        0.5 * rho * rho * inner.value
    };
    let mut total = 0.0;
    let cuts: Vec<f64> = if r > 0.0 && r < eta {
        vec![0.0, r, eta]
    } else {
        vec![0.0, eta]
    };
    for w in cuts.windows(2) {
        total += adaptive_gk(shell, w[0], w[1], 1e-300, 1e-12, 400).value;
    }
    total
}

fn potential_oracle(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let tau = rng.random_range(0.5..20.0);
        let eta = rng.random_range(0.2..2.0);
        let r = rng.random_range(0.05..3.0) * eta;
        let field = YukawaBallField::new(Ball::new(Vec3::zeros(), eta)?, tau)?;
        let v = field.value(&Vec3::new(r, 0.0, 0.0));
        let q = potential_by_quadrature(tau, eta, r);
        worst = worst.max(((v - q) / q).abs());
    }
    Ok((worst < 1e-6, format!("max rel err {worst:.2e} over 20 samples")))
}

// 2 ---------------------------------------------------------------------

fn double_ball_monte_carlo(rng: &mut ChaCha8Rng) -> Outcome {
    let b = Ball::new(Vec3::zeros(), 0.5)?;
    let bp = Ball::new(Vec3::new(2.0, 0.5, 0.0), 0.7)?;
    let tau = 1.0;
    let n = 10_000_000usize;
    let mut sum = 0.0;
    for _ in 0..n {
        let x = in_ball(rng, &b);
        let y = in_ball(rng, &bp);
        let d = (x - y).norm();
        sum += (-tau * d).exp() / (4.0 * PI * d);
    }
    let mc = b.volume() * bp.volume() * sum / n as f64;
    let exact = ball_ball_integral(&b, &bp, tau)?;
    let rel = ((exact - mc) / exact).abs();
    Ok((rel < 1e-3, format!("closed {exact:.6e} vs MC {mc:.6e}, rel {rel:.2e}")))
}

// 3 ---------------------------------------------------------------------

/// Outward height of the spheroid over its tangent plane at `x`, by Newton
/// iteration on the level function along the normal.
fn spheroid_height(frame: &SpheroidFrame, tf: &TangentFrame, sigma: [f64; 2]) -> f64 {
    let mut t = 0.0;
    for _ in 0..60 {
        let y = tf.chart_point(sigma, t);
        let f = broken_path_length(&y, &frame.p(), &frame.p_prime()) - frame.c();
        let df = broken_path_gradient(&y, &frame.p(), &frame.p_prime()).dot(&tf.nu);
        let step = f / df;
        t -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    t
}

fn spheroid_algebra(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut worst_k: f64 = 0.0;
    let mut worst_h: f64 = 0.0;
    for _ in 0..200 {
        let p = Vec3::new(
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
        );
        let pp = p + rng.random_range(0.0..4.0) * unit(rng);
        let c = (p - pp).norm() + rng.random_range(0.3..4.0);
        let frame = SpheroidFrame::new(p, pp, c)?;
        let x = frame.point(&unit(rng));
        let sc = frame.shape_operator(&x)?;
        let outward = -frame.inward_normal(&x)?;
        let tf = TangentFrame::new(x, outward, None);
        let scale = (x - p).norm().min((x - pp).norm());
        let hess = fd_hessian_2d(|s| spheroid_height(&frame, &tf, s), 1e-4 * scale);
        // Positive operator with respect to the inward normal is minus the
        // Hessian of the outward height.
        let op = sc.op.in_frame(&tf);
        worst = worst.max(rel_matrix_error(&op.m, &(-hess)));
        let geo = UnitPairGeometry::new(&x, &p, &pp)?;
        let lam = geo.lambda;
        worst_k = worst_k
            .max((op.m.determinant() - 0.25 * lam * lam).abs() / (0.25 * lam * lam))
            .max(((-hess).determinant() - 0.25 * lam * lam).abs() / (0.25 * lam * lam));
        let h_exact = lam * (3.0 + geo.dot) / (4.0 * (2.0 * (1.0 + geo.dot)).sqrt());
        worst_h = worst_h.max((0.5 * op.m.trace() - h_exact).abs() / h_exact);
    }
    // With p = p' both mean-curvature forms reduce to λ/2.
    let p = Vec3::new(0.3, -0.2, 1.0);
    let frame = SpheroidFrame::new(p, p, 3.0)?;
    let x = frame.point(&Vec3::new(0.6, 0.0, 0.8));
    let lam = 2.0 / 1.5;
    let mono = (frame.shape_operator(&x)?.mean - lam * 4.0 / 8.0).abs();
    let ok = worst < 1e-5 && worst_k < 1e-5 && worst_h < 1e-12 && mono < 1e-12;
    Ok((
        ok,
        format!(
            "operator rel err {worst:.2e}; K=λ²/4 rel err {worst_k:.2e}; H rel err {worst_h:.2e}; monostatic H err {mono:.1e}"
        ),
    ))
}

// 4 ---------------------------------------------------------------------

fn hessian_check(e: &Ellipsoid, q: &Vec3, p: &Vec3, pp: &Vec3) -> Result<f64> {
    let geo = UnitPairGeometry::new(q, p, pp)?;
    let hint = (geo.cross.norm() > 1e-8).then_some(geo.cross);
    let chart = e.chart(q, hint);
    let tf = *chart.frame();
    let fd = fd_hessian_2d(|s| broken_path_length(&tf.chart_point(s, chart.height(s)), p, pp), 1e-4);
    let se = SpheroidFrame::new(*p, *pp, geo.broken_path())?.shape_operator(q)?.op;
    let sd = e.shape_operator(q, hint);
    let diff = se.minus(&sd).in_frame(&tf);
    let predicted = (2.0 * (1.0 + geo.dot)).sqrt() * diff.m;
    Ok(rel_matrix_error(&predicted, &fd))
}

fn hessian_identity(rng: &mut ChaCha8Rng) -> Outcome {
    let (_, b, bp) = s1();
    let sphere = Ellipsoid::sphere(Vec3::zeros(), 1.0)?;
    let mut worst = hessian_check(&sphere, &s1_reflector(), &b.center, &bp.center)?;
    for _ in 0..20 {
        let cfg = random_snell_config(rng);
        worst = worst.max(hessian_check(&cfg.ellipsoid, &cfg.q, &cfg.p, &cfg.p_prime)?);
    }
    Ok((
        worst <= 1e-5,
        format!("max componentwise rel err {worst:.2e} (S1 + 20 ellipsoids)"),
    ))
}

// 5 ---------------------------------------------------------------------

/// Runs the variant comparison and returns the variant that matched every
/// configuration, if exactly one did.
pub fn resolve_det_variant(seed: u64, n: usize) -> Result<(Option<CorrectionVariant>, [usize; 2], f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let variants = [CorrectionVariant::Half, CorrectionVariant::Quarter];
    let mut matches = [0usize; 2];
    let mut best_err: f64 = 0.0;
    for _ in 0..n {
        let cfg = random_snell_config(&mut rng);
        let geo = UnitPairGeometry::new(&cfg.q, &cfg.p, &cfg.p_prime)?;
        let eta_prime = 0.5;
        let smax = max_shift(&geo, &cfg.p, &cfg.p_prime, eta_prime);
        let s = rng.random_range(0.0..0.9) * smax;
        let hint = (geo.cross.norm() > 1e-8).then_some(geo.cross);
        let op = cfg.ellipsoid.shape_operator(&cfg.q, hint);
        let direct = det_shape_diff(&cfg.q, &op, &cfg.p, &cfg.p_prime, s, eta_prime)?;
        let mut errs = [0.0; 2];
        for (k, v) in variants.iter().enumerate() {
            let closed = det_closed_form(&geo, &op, s, eta_prime, &cfg.p, &cfg.p_prime, *v)?;
            errs[k] = ((closed - direct) / direct).abs();
            if errs[k] < 1e-9 {
                matches[k] += 1;
            }
        }
        best_err = best_err.max(errs[0].min(errs[1]));
    }
    let winner = match (matches[0] == n, matches[1] == n) {
        (true, false) => Some(variants[0]),
        (false, true) => Some(variants[1]),
        _ => None,
    };
    Ok((winner, matches, best_err))
}

fn det_variant(rng: &mut ChaCha8Rng) -> Outcome {
    let (winner, m, err) = resolve_det_variant(rng.random(), 100)?;
    let ok = winner == Some(VALIDATED_VARIANT);
    Ok((
        ok,
        format!(
            "variant={} (coefficient 1/2 matched {}/100, 1/4 matched {}/100, worst best-match err {err:.1e})",
            winner.map(|v| v.label()).unwrap_or("none"),
            m[0],
            m[1]
        ),
    ))
}

// 6 ---------------------------------------------------------------------

fn triple_surface(rng: &mut ChaCha8Rng) -> Outcome {
    let (d, b, bp) = s1();
    let mut cases = vec![(d, b, bp)];
    while cases.len() < 11 {
        let e = Ellipsoid::new(
            Vec3::zeros(),
            Vec3::new(
                rng.random_range(0.6..1.5),
                rng.random_range(0.6..1.5),
                rng.random_range(0.6..1.5),
            ),
            Rotation3::from_scaled_axis(unit(rng) * rng.random_range(0.0..PI)).into_inner(),
        )?;
        let d = ObstacleShape::Ellipsoid(e);
        let b = Ball::new(rng.random_range(2.5..4.5) * unit(rng), rng.random_range(0.2..0.6))?;
        let bp = Ball::new(rng.random_range(2.5..4.5) * unit(rng), rng.random_range(0.2..0.6))?;
        if !b.disjoint(&bp) || crate::obstacle::hull_clearance(&d, &b, &bp) <= 0.05 {
            continue;
        }
        cases.push((d, b, bp));
    }
    let mut worst_ratio: f64 = 0.0;
    for (d, b, bp) in &cases {
        let t = min_over_triple_surfaces(d, b, bp)?;
        let (c, _) = min_broken_path(d, &b.center, &bp.center)?;
        worst_ratio = worst_ratio.max((t.value - (c - b.radius - bp.radius)).abs() / (2.0 * t.spacing));
    }
    Ok((
        worst_ratio <= 1.0,
        format!(
            "max |diff| / (2 × spacing) = {worst_ratio:.2e} over {} configurations",
            cases.len()
        ),
    ))
}

// 7 ---------------------------------------------------------------------

fn j_cross_validation() -> Outcome {
    let (d, b, bp) = s1();
    let problem = JProblem::new(&d, &b, &bp)?;
    let mut worst: f64 = 0.0;
    for tau in [2.0, 4.0, 6.0, 8.0, 10.0] {
        let s = problem.boundary(tau)?.to_f64();
        let v = problem.volume(tau)?.to_f64();
        worst = worst.max(((s - v) / v).abs());
    }
    Ok((worst < 5e-3, format!("max rel diff {worst:.2e} for τ in [2, 10]")))
}

// 8 ---------------------------------------------------------------------

fn laplace_limit() -> Outcome {
    let (d, b, bp) = s1();
    let problem = JProblem::new(&d, &b, &bp)?;
    let rhs = asymptotic_rhs(
        AsymptoticKind::LaplaceSurface,
        &AsymptoticInputs::from_geometry(&d, &b, &bp, 0.0)?,
    )?;
    let taus = [10.0, 20.0, 30.0, 40.0];
    let errs = taus
        .iter()
        .map(|&t| Ok(((problem.laplace_scaled(t)? - rhs) / rhs).abs()))
        .collect::<Result<Vec<f64>>>()?;
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    let last = *errs.last().unwrap();
    let listing: Vec<String> = taus.iter().zip(&errs).map(|(t, e)| format!("τ={t}: {e:.3}")).collect();
    Ok((
        decreasing && last < 0.02,
        format!("rel err {} (limit {rhs:.6})", listing.join(", ")),
    ))
}

// 9 ---------------------------------------------------------------------

fn scaled_limits() -> Outcome {
    let (d, b, bp) = s1();
    let problem = JProblem::new(&d, &b, &bp)?;
    let rhs = asymptotic_rhs(
        AsymptoticKind::Bistatic,
        &AsymptoticInputs::from_geometry(&d, &b, &bp, 0.0)?,
    )?;
    let curve = curve_semianalytic(&problem, &tau_window(50.0, 1600.0, 16), "sphere")?;
    let lim = scaled_limit(&curve, problem.kappa)?;
    let err = (lim.extrapolated - rhs).abs() / rhs;
    let err_ref = (lim.extrapolated - 0.02583).abs() / 0.02583;

    let mono_d = ObstacleShape::sphere(Vec3::zeros(), 1.0)?;
    let mb = Ball::new(Vec3::new(3.0, 0.0, 0.0), 0.5)?;
    let mono = JProblem::new(&mono_d, &mb, &mb)?;
    let mrhs = asymptotic_rhs(
        AsymptoticKind::Monostatic,
        &AsymptoticInputs::from_geometry(&mono_d, &mb, &mb, 0.0)?,
    )?;
    let mcurve = curve_semianalytic(&mono, &tau_window(50.0, 1600.0, 16), "sphere")?;
    let mlim = scaled_limit(&mcurve, mono.kappa)?;
    let merr = (mlim.extrapolated - mrhs).abs() / mrhs;
    Ok((
        err < 0.05 && err_ref < 0.05 && merr < 0.05 && !lim.divergent && !mlim.divergent,
        format!(
            "S1 limit {:.6} vs {rhs:.6} (rel {err:.1e}); monostatic {:.6} vs {mrhs:.6} (rel {merr:.1e})",
            lim.extrapolated, mlim.extrapolated
        ),
    ))
}

// 10 --------------------------------------------------------------------

/// FDTD traces of S1 at `h = 0.05` and the `2h` companion, computed once.
pub struct S1Traces {
    pub fine: ReceiverTrace,
    pub coarse: ReceiverTrace,
    /// Largest trusted `τ` of the fine run.
    pub tau_cap: f64,
}

pub fn s1_traces() -> Result<&'static S1Traces> {
    static CELL: OnceLock<std::result::Result<S1Traces, String>> = OnceLock::new();
    CELL.get_or_init(|| {
        let (d, b, bp) = s1();
        let run = |h: f64| simulate(&SimulationConfig::new(h, 8.0, Some(d.clone()), b, bp)).map_err(|e| e.to_string());
        let fine = run(0.05)?;
        let coarse = run(0.1)?;
        let taus = tau_window(2.0, 20.0, 37);
        let cf = curve_from_trace(&fine, &bp, &taus, "sphere").map_err(|e| e.to_string())?;
        let cc = curve_from_trace(&coarse, &bp, &taus, "sphere").map_err(|e| e.to_string())?;
        let tau_cap = resolvable_tau_cap(&cf, &cc, 0.05).map_err(|e| e.to_string())?.min(20.0);
        Ok(S1Traces { fine, coarse, tau_cap })
    })
    .as_ref()
    .map_err(|e| Error::Simulation(e.clone()))
}

fn fdtd_decay() -> Outcome {
    let (_, _, bp) = s1();
    let tr = s1_traces()?;
    let taus = tau_window(4.0, tr.tau_cap, 16);
    let curve = curve_from_trace(&tr.fine, &bp, &taus, "sphere")?;
    let positive = curve.values.iter().all(|v| v.is_positive());
    let fit = decay_fit(&curve)?;
    let rel = (fit.rate - 5.73590).abs() / 5.73590;
    Ok((
        positive && rel < 0.03,
        format!(
            "rate {:.4} ± {:.4} on τ ∈ [4, {:.2}] (rel err {rel:.2e}); I > 0: {positive}",
            fit.rate, fit.uncertainty, tr.tau_cap
        ),
    ))
}

// 11 --------------------------------------------------------------------

fn semianalytic_source(d: &ObstacleShape) -> DataSource<'_> {
    DataSource::SemiAnalytic {
        obstacle: d,
        decay_taus: tau_window(40.0, 640.0, 10),
        limit_taus: tau_window(50.0, 1600.0, 12),
    }
}

fn fdtd_source(tr: &S1Traces) -> DataSource<'_> {
    DataSource::Fdtd {
        trace: &tr.fine,
        decay_taus: tau_window(4.0, tr.tau_cap, 16),
        limit_taus: tau_window(4.0, tr.tau_cap, 16),
    }
}

fn reflector_scan() -> Outcome {
    let (d, b, bp) = s1();
    let src = semianalytic_source(&d);
    let r = src.rate(&b, &bp)?;
    let c = r.rate + b.radius + bp.radius;
    let opts = ScanOptions::default();
    let scan = scan_reflector(&src, &b, &bp, c, r.uncertainty, &opts)?;
    let q_true = s1_reflector();
    let omega_star = (q_true - bp.center).normalize();
    let hit_star = direction_excess(&src, &b, &bp, opts.s, c, &omega_star)?.abs() <= scan.delta_c;
    let miss_z = direction_excess(&src, &b, &bp, opts.s, c, &Vec3::z())? > scan.delta_c;
    let mut detail = format!(
        "{} cluster(s) on {} directions, δc {:.3e}; ω* hit {hit_star}, (0,0,1) miss {miss_z}",
        scan.clusters.len(),
        scan.omegas.len(),
        scan.delta_c
    );
    let mut ok = scan.clusters.len() == 1 && hit_star && miss_z;
    if let Some(cl) = scan.clusters.first() {
        let qe = (cl.q - q_true).norm();
        let ne = cl.normal.dot(&q_true).clamp(-1.0, 1.0).acos().to_degrees();
        ok &= qe < 0.02 && ne < 1.0;
        detail += &format!("; semi-analytic q err {qe:.2e}, normal err {ne:.3}°");
    }
    // The FDTD scan is reported for reference.
    if let Ok(tr) = s1_traces() {
        let f = fdtd_source(tr);
        if let Ok(fr) = f.rate(&b, &bp) {
            let fc = fr.rate + b.radius + bp.radius;
            if let Ok(fs) = scan_reflector(&f, &b, &bp, fc, fr.uncertainty, &opts) {
                if let Some(cl) = fs.clusters.first() {
                    detail += &format!(
                        "; FDTD: {} cluster(s), q err {:.3}",
                        fs.clusters.len(),
                        (cl.q - q_true).norm()
                    );
                }
            }
        }
    }
    Ok((ok, detail))
}

// 12 --------------------------------------------------------------------

fn dichotomies(rng: &mut ChaCha8Rng) -> Outcome {
    let (d, b, bp) = s1();
    let (p, pp) = (b.center, bp.center);
    let (c, _) = min_broken_path(&d, &p, &pp)?;
    let frame = SpheroidFrame::new(p, pp, c)?;
    let s = 0.3;
    let mut dirs: Vec<Vec3> = (0..100).map(|_| unit(rng)).collect();
    dirs.push((s1_reflector() - pp).normalize());
    let (mut agree, mut ambiguous) = (0usize, 0usize);
    let mut equal_count = 0usize;
    for w in &dirs {
        let (m, _) = min_broken_path(&d, &p, &(pp + s * w))?;
        let excess = m - (c - s);
        let dist = (frame.point(w).norm() - 1.0).abs();
        // Bands: equality below 1e-9, strict above 1e-6; membership below
        // 1e-6, non-membership above 1e-3.
        let equal = excess <= 1e-9;
        let strict = excess > 1e-6;
        let member = dist <= 1e-6;
        let outside = dist > 1e-3;
        if !(equal || strict) || !(member || outside) {
            ambiguous += 1;
            continue;
        }
        if excess < -1e-9 {
            continue;
        }
        equal_count += equal as usize;
        if equal == member {
            agree += 1;
        }
    }
    let classified = dirs.len() - ambiguous;

    // Shift singleton on the sphere and on a prolate spheroid.
    let mut singleton_ok = true;
    let mut singleton_worst: f64 = 0.0;
    let e = ObstacleShape::Ellipsoid(Ellipsoid::new(
        Vec3::new(0.2, -0.1, 0.3),
        Vec3::new(1.5, 0.8, 1.0),
        Rotation3::from_euler_angles(0.3, -0.2, 0.5).into_inner(),
    )?);
    for (obs, p, pp) in [(&d, p, pp), (&e, Vec3::new(3.5, 1.0, 0.5), Vec3::new(-0.5, 3.8, -0.4))] {
        let set = first_reflector(obs, &p, &pp, 0.0)?;
        let q = set.single()?.q;
        let ap = (q - pp).normalize();
        let geo = UnitPairGeometry::new(&q, &p, &pp)?;
        let smax = max_shift(&geo, &p, &pp, 0.5);
        for k in 1..=4 {
            let s = smax * k as f64 / 5.0;
            let shifted = first_reflector(obs, &p, &(pp + s * ap), 0.0)?;
            if shifted.points.len() != 1 {
                singleton_ok = false;
                continue;
            }
            singleton_worst = singleton_worst.max((shifted.points[0].q - q).norm());
        }
    }
    singleton_ok &= singleton_worst < 1e-6;
    Ok((
        agree == classified && ambiguous == 0 && equal_count == 1 && singleton_ok,
        format!(
            "dichotomy agreement {agree}/{classified} ({ambiguous} in tolerance bands, {equal_count} equality); shift singleton ok {singleton_ok} (max drift {singleton_worst:.1e})"
        ),
    ))
}

// 13 --------------------------------------------------------------------

fn ball_reconstruction() -> Outcome {
    let (d, b, bp) = s1();
    let opts = ReconstructOptions::default();
    let g = reconstruct_ball(&DataSource::Geometry(&d), &b, &bp, &opts)?;
    let g_err = g.center.norm().max((g.radius - 1.0).abs());
    let sa = reconstruct_ball(&semianalytic_source(&d), &b, &bp, &opts)?;
    let sa_err = sa.center.norm().max((sa.radius - 1.0).abs());
    let mut detail = format!(
        "geometry err {g_err:.1e}; semi-analytic center {:.4} radius {:.4}",
        sa.center.norm(),
        sa.radius
    );
    let f_err = match s1_traces().and_then(|tr| reconstruct_ball(&fdtd_source(tr), &b, &bp, &opts)) {
        Ok(f) => {
            detail += &format!("; FDTD center {:.4} radius {:.4}", f.center.norm(), f.radius);
            f.center.norm().max((f.radius - 1.0).abs())
        }
        Err(e) => {
            detail += &format!("; FDTD failed: {e}");
            f64::INFINITY
        }
    };
    Ok((g_err < 1e-6 && sa_err < 0.05 && f_err < 0.10, detail))
}

// 14 --------------------------------------------------------------------

fn rotation_scan() -> Outcome {
    let (a, r) = (2.0, 1.0);
    let e = Ellipsoid::new(Vec3::zeros(), Vec3::new(a, r, r), Matrix3::identity())?;
    let d = ObstacleShape::Ellipsoid(e);
    let q = Vec3::new(1.2, 0.64, 0.48);
    let nu = Vec3::new(q.x / (a * a), q.y / (r * r), q.z / (r * r)).normalize();
    let tilt = Unit::new_normalize(nu.cross(&Vec3::new(0.3, -1.0, 0.7)));
    let b = Ball::new(q + 3.0 * (Rotation3::from_axis_angle(&tilt, 0.7) * nu), 0.4)?;
    let bp = Ball::new(q + 3.5 * (Rotation3::from_axis_angle(&tilt, -0.7) * nu), 0.4)?;
    let thetas: Vec<f64> = (0..12).map(|k| k as f64 * PI / 12.0).collect();
    let rep = principal_directions(&DataSource::Geometry(&d), &q, &b, &bp, &thetas, 0.1, 0.3, 1e-6)?;
    // Lines of curvature of a surface of revolution: parallels and meridians.
    let parallel = Vec3::x().cross(&q).normalize();
    let meridian = nu.cross(&parallel);
    let ang = |u: &Vec3, v: &Vec3| u.dot(v).abs().min(1.0).acos().to_degrees();
    let dir_err = match rep.directions {
        Some((v1, v2)) => ang(&v1, &parallel)
            .min(ang(&v1, &meridian))
            .max(ang(&v2, &parallel).min(ang(&v2, &meridian))),
        None => f64::INFINITY,
    };
    let s2 = q.x * q.x / a.powi(4) + (q.y * q.y + q.z * q.z) / r.powi(4);
    let h = (q.norm_squared() - a * a - 2.0 * r * r) / (2.0 * (a * r * r).powi(2) * s2.powf(1.5));
    let h_err = (rep.mean / h - 1.0).abs();

    let (sd, sb, sbp) = s1();
    let sph = principal_directions(
        &DataSource::Geometry(&sd),
        &s1_reflector(),
        &sb,
        &sbp,
        &thetas,
        0.1,
        0.3,
        1e-6,
    )?;
    Ok((
        dir_err < 2.0 && h_err < 0.02 && sph.isotropic && rep.invariance_error < 1e-12,
        format!(
            "direction err {dir_err:.2e}°, H {:.5} vs {h:.5} (rel {h_err:.1e}); sphere isotropic {}",
            rep.mean, sph.isotropic
        ),
    ))
}

// 15 --------------------------------------------------------------------

fn fdtd_self_checks() -> Outcome {
    let b = Ball::new(Vec3::new(1.5, 0.0, 0.0), 0.5)?;
    let bp = Ball::new(Vec3::new(0.0, 1.5, 0.0), 0.5)?;
    let t_final = 3.0;
    let err_at = |h: f64| -> Result<(f64, f64)> {
        let tr = simulate(&SimulationConfig::new(h, t_final, None, b, bp).with_formulation(Formulation::Total))?;
        let s = tr.integrated();
        let (mut num, mut den) = (0.0, 0.0);
        for (n, v) in s.iter().enumerate() {
            let e = free_space_ball_integral(&b, &bp, tr.time(n));
            num += (v - e).powi(2);
            den += e * e;
        }
        let arrival = (b.center - bp.center).norm() - b.radius - bp.radius;
        Ok(((num / den).sqrt(), tr.relative_level_before(arrival)))
    };
    let (e1, _) = err_at(0.1)?;
    let (e2, floor) = err_at(0.05)?;
    let order = (e1 / e2).log2();
    Ok((
        e2 < 0.02 && floor < 1e-3 && order >= 1.0,
        format!("rel L2 err {e2:.2e} at h=0.05 ({e1:.2e} at 0.1, order {order:.2}); pre-arrival level {floor:.1e}"),
    ))
}
