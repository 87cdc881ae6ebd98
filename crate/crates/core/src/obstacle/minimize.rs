//! Global minimization over obstacle surfaces: dense sampling, local
//! refinement, clustering.

use nalgebra::{SymmetricEigen, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{broken_path_gradient, broken_path_length, orthogonal_unit, snell_residual, UnitPairGeometry, Vec3};
use crate::numeric::fd_hessian_2d;

use super::ellipsoid::Ellipsoid;
use super::icosphere::icosphere;
use super::mesh::{closest_on_triangle, TriMesh};
use super::{Ball, ObstacleShape};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MinimizerOptions {
    /// Icosphere level for analytic components (level 7: 163842 samples).
    pub sample_level: usize,
    /// Cluster radius as a fraction of the obstacle diameter.
    pub cluster_factor: f64,
    /// More clusters than this is reported as a degenerate band.
    pub max_clusters: usize,
    /// Candidates within this relative gap of the minimum are kept.
    pub value_tolerance: f64,
    /// Local minima of the sampled function that get refined.
    pub max_seeds: usize,
}

impl Default for MinimizerOptions {
    fn default() -> Self {
        Self {
            sample_level: 7,
            cluster_factor: 1e-3,
            max_clusters: 64,
            value_tolerance: 1e-9,
            max_seeds: 256,
        }
    }
}

impl MinimizerOptions {
    pub fn coarse() -> Self {
        Self {
            sample_level: 5,
            ..Self::default()
        }
    }
}

/// A refined local minimizer on the surface.
#[derive(Clone, Copy, Debug)]
pub struct Candidate {
    pub x: Vec3,
    pub value: f64,
    pub normal: Vec3,
}

/// Samples `f` on the surface, refines every sampled local minimum and
/// returns the refined points sorted by value.
pub fn minimize_on_surface<F>(obstacle: &ObstacleShape, f: &F, level: usize, max_seeds: usize) -> Vec<Candidate>
where
    F: Fn(&Vec3) -> (f64, Vec3) + Sync,
{
    let mut out: Vec<Candidate> = obstacle
        .leaves()
        .into_iter()
        .flat_map(|leaf| match leaf {
            ObstacleShape::Ellipsoid(e) => minimize_on_ellipsoid(e, f, level, max_seeds),
            ObstacleShape::Mesh(m) => minimize_on_mesh(m, f, max_seeds),
            ObstacleShape::Union(_) => unreachable!(),
        })
        .collect();
    out.sort_by(|a, b| a.value.total_cmp(&b.value));
    out
}

/// Local refinement of `f` on the leaf nearest to `x0`.
pub fn refine_at<F>(obstacle: &ObstacleShape, x0: &Vec3, f: &F) -> Candidate
where
    F: Fn(&Vec3) -> (f64, Vec3) + Sync,
{
    match obstacle.leaf_near(x0) {
        ObstacleShape::Ellipsoid(e) => refine_on_ellipsoid(e, &e.param_of(&e.project(x0)), f),
        ObstacleShape::Mesh(m) => {
            let (_, tri, _) = m.closest_point(x0);
            let seed = m.triangles[tri][0] as usize;
            refine_on_mesh(m, seed, f)
        }
        ObstacleShape::Union(_) => unreachable!(),
    }
}

fn graph_local_minima(values: &[f64], neighbors: impl Fn(usize) -> Vec<usize>, max_seeds: usize) -> Vec<usize> {
    let mut minima: Vec<usize> = (0..values.len())
        .filter(|&i| neighbors(i).iter().all(|&j| values[i] <= values[j]))
        .collect();
    minima.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    minima.truncate(max_seeds);
    minima
}

fn minimize_on_ellipsoid<F>(e: &Ellipsoid, f: &F, level: usize, max_seeds: usize) -> Vec<Candidate>
where
    F: Fn(&Vec3) -> (f64, Vec3) + Sync,
{
    let ico = icosphere(level);
    let values: Vec<f64> = ico.vertices.par_iter().map(|u| f(&e.point(u)).0).collect();
    let seeds = graph_local_minima(
        &values,
        |i| ico.neighbors(i).iter().map(|&j| j as usize).collect(),
        max_seeds,
    );
    seeds
        .par_iter()
        .map(|&i| refine_on_ellipsoid(e, &ico.vertices[i], f))
        .collect()
}

/// Damped Newton iteration on the parameter sphere, `u ↦ normalize(u + w)`,
/// with exact gradient and finite-difference Hessian.
fn refine_on_ellipsoid<F>(e: &Ellipsoid, u0: &Vec3, f: &F) -> Candidate
where
    F: Fn(&Vec3) -> (f64, Vec3) + Sync,
{
    let eval = |u: &Vec3| f(&e.point(u)).0;
    let scale = e.max_semi_axis();
    let mut u = u0.normalize();
    for _ in 0..100 {
        let (v, g) = f(&e.point(&u));
        let gu = (e.rotation.transpose() * g).component_mul(&e.semi_axes);
        let t1 = orthogonal_unit(&u);
        let t2 = u.cross(&t1);
        let grad = Vector2::new(t1.dot(&gu), t2.dot(&gu));
        if grad.norm() < 1e-14 * scale * (1.0 + g.norm()) {
            break;
        }
        let hess = fd_hessian_2d(|w| eval(&(u + w[0] * t1 + w[1] * t2).normalize()), 1e-4);
        let eig = SymmetricEigen::new(hess);
        let lo = eig.eigenvalues.min();
        let hi = eig.eigenvalues.max().abs().max(1e-300);
        let step = if lo > 1e-8 * hi {
            -(hess.try_inverse().unwrap() * grad)
        } else {
            -grad / hi
        };
        let slope = grad.dot(&step);
        let mut alpha = 1.0;
        let mut moved = false;
        while alpha > 1e-12 {
            let trial = (u + alpha * (step.x * t1 + step.y * t2)).normalize();
            let fv = eval(&trial);
            if fv <= v + 1e-4 * alpha * slope || (alpha == 1.0 && fv <= v + 4.0 * f64::EPSILON * v.abs()) {
                u = trial;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !moved || alpha * step.norm() < 1e-15 {
            break;
        }
    }
    let x = e.point(&u);
    Candidate {
        x,
        value: f(&x).0,
        normal: e.normal_param(&u),
    }
}

fn minimize_on_mesh<F>(m: &TriMesh, f: &F, max_seeds: usize) -> Vec<Candidate>
where
    F: Fn(&Vec3) -> (f64, Vec3) + Sync,
{
    let values: Vec<f64> = m.vertices.par_iter().map(|x| f(x).0).collect();
    let seeds = graph_local_minima(
        &values,
        |i| m.neighbors(i).iter().map(|&j| j as usize).collect(),
        max_seeds,
    );
    seeds.par_iter().map(|&i| refine_on_mesh(m, i, f)).collect()
}

/// Minimizes over every triangle touching the two-ring of `seed`.
fn refine_on_mesh<F>(m: &TriMesh, seed: usize, f: &F) -> Candidate
where
    F: Fn(&Vec3) -> (f64, Vec3) + Sync,
{
    let mut ring = vec![seed];
    for _ in 0..2 {
        let mut next = ring.clone();
        for &v in &ring {
            for &w in m.neighbors(v) {
                if !next.contains(&(w as usize)) {
                    next.push(w as usize);
                }
            }
        }
        ring = next;
    }
    let mut best = (f64::INFINITY, m.vertices[seed]);
    for (ti, t) in m.triangles.iter().enumerate() {
        if !t.iter().any(|&v| ring.contains(&(v as usize))) {
            continue;
        }
        let (x, v) = minimize_on_triangle(&m.triangle(ti), f);
        if v < best.0 {
            best = (v, x);
        }
    }
    Candidate {
        x: best.1,
        value: best.0,
        normal: m.normal(&best.1),
    }
}

/// Projected gradient descent with backtracking on a single triangle.
fn minimize_on_triangle<F>(tri: &[Vec3; 3], f: &F) -> (Vec3, f64)
where
    F: Fn(&Vec3) -> (f64, Vec3),
{
    let [a, b, c] = tri;
    let diam = (b - a).norm().max((c - b).norm()).max((a - c).norm());
    let mut x = (a + b + c) / 3.0;
    let (mut v, mut g) = f(&x);
    let mut alpha = diam / (g.norm() + 1e-300);
    for _ in 0..500 {
        let mut accepted = None;
        for _ in 0..60 {
            let y = closest_on_triangle(&(x - alpha * g), a, b, c).0;
            let d = y - x;
            let (fy, gy) = f(&y);
            if fy <= v + g.dot(&d) + d.norm_squared() / (2.0 * alpha) {
                accepted = Some((y, fy, gy));
                break;
            }
            alpha *= 0.5;
        }
        let Some((y, fy, gy)) = accepted else { break };
        let moved = (y - x).norm();
        x = y;
        v = fy;
        g = gy;
        alpha *= 2.0;
        if moved < 1e-15 * diam.max(1.0) {
            break;
        }
    }
    (x, v)
}

fn cluster(cands: &[Candidate], gap: f64, radius: f64) -> Vec<Candidate> {
    let Some(min) = cands.iter().map(|c| c.value).reduce(f64::min) else {
        return Vec::new();
    };
    let mut reps: Vec<Candidate> = Vec::new();
    let mut sorted: Vec<&Candidate> = cands.iter().filter(|c| c.value <= min + gap).collect();
    sorted.sort_by(|a, b| a.value.total_cmp(&b.value));
    for c in sorted {
        if reps.iter().all(|r| (r.x - c.x).norm() > radius) {
            reps.push(*c);
        }
    }
    reps
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Reflector {
    pub q: Vec3,
    /// Outward normal of the obstacle.
    pub normal: Vec3,
    pub phi: f64,
    pub snell_residual: f64,
}

/// Clustered global minimizers of the broken-path length.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReflectorSet {
    pub points: Vec<Reflector>,
    pub cluster_tolerance: f64,
    pub c_min: f64,
}

impl ReflectorSet {
    pub fn single(&self) -> Result<&Reflector> {
        match self.points.as_slice() {
            [r] => Ok(r),
            other => Err(Error::Hypothesis(format!(
                "expected a single first reflection point, found {}",
                other.len()
            ))),
        }
    }
}

fn check_pair(obstacle: &ObstacleShape, p: &Vec3, p_prime: &Vec3) -> Result<()> {
    if obstacle.contains(p) || obstacle.contains(p_prime) {
        return Err(Error::Hypothesis(
            "source and receiver points must lie outside the closed obstacle".into(),
        ));
    }
    if obstacle.segment_hits(p, p_prime) {
        return Err(Error::Shadow);
    }
    Ok(())
}

/// `min φ(x; p, p')` over the boundary and the set of minimizers.
pub fn min_broken_path(obstacle: &ObstacleShape, p: &Vec3, p_prime: &Vec3) -> Result<(f64, ReflectorSet)> {
    min_broken_path_with(obstacle, p, p_prime, &MinimizerOptions::default())
}

pub fn min_broken_path_with(
    obstacle: &ObstacleShape,
    p: &Vec3,
    p_prime: &Vec3,
    opts: &MinimizerOptions,
) -> Result<(f64, ReflectorSet)> {
    check_pair(obstacle, p, p_prime)?;
    let f = |x: &Vec3| (broken_path_length(x, p, p_prime), broken_path_gradient(x, p, p_prime));
    let cands = minimize_on_surface(obstacle, &f, opts.sample_level, opts.max_seeds);
    let c_min = cands
        .first()
        .map(|c| c.value)
        .ok_or_else(|| Error::Degenerate("obstacle has no surface samples".into()))?;
    let radius = opts.cluster_factor * obstacle.diameter();
    let reps = cluster(&cands, opts.value_tolerance * c_min, radius);
    if reps.len() > opts.max_clusters {
        return Err(Error::DegenerateReflector(reps.len()));
    }
    let points = reps
        .iter()
        .map(|c| {
            let residual = UnitPairGeometry::new(&c.x, p, p_prime)
                .map(|g| snell_residual(&g, &c.normal))
                .unwrap_or(f64::NAN);
            Reflector {
                q: c.x,
                normal: c.normal,
                phi: c.value,
                snell_residual: residual,
            }
        })
        .collect();
    Ok((
        c_min,
        ReflectorSet {
            points,
            cluster_tolerance: radius,
            c_min,
        },
    ))
}

/// The first reflector with cluster radius `tol` (defaults apply when `tol`
/// is not positive).
pub fn first_reflector(obstacle: &ObstacleShape, p: &Vec3, p_prime: &Vec3, tol: f64) -> Result<ReflectorSet> {
    let mut opts = MinimizerOptions::default();
    if tol > 0.0 {
        opts.cluster_factor = tol / obstacle.diameter();
    }
    Ok(min_broken_path_with(obstacle, p, p_prime, &opts)?.1)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TripleMinimum {
    pub value: f64,
    pub x: Vec3,
    pub y: Vec3,
    pub y_prime: Vec3,
    /// Largest sample spacing among the three sampled surfaces.
    pub spacing: f64,
}

fn sphere_samples(ball: &Ball, level: usize) -> Vec<Vec3> {
    icosphere(level)
        .vertices
        .iter()
        .map(|u| ball.center + ball.radius * u)
        .collect()
}

/// `min φ(x; y, y')` over `∂D × ∂B × ∂B'` by brute force over sampled
/// surfaces, followed by alternating local refinement.
pub fn min_over_triple_surfaces(obstacle: &ObstacleShape, b: &Ball, b_prime: &Ball) -> Result<TripleMinimum> {
    let level = 5;
    let xs = obstacle.surface_samples(level);
    let ys = sphere_samples(b, 2);
    let yps = sphere_samples(b_prime, 2);
    let nearest = |x: &Vec3, set: &[Vec3]| {
        set.iter()
            .map(|y| ((y - x).norm(), *y))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap()
    };
    let (mut best, mut x, mut y, mut yp) = xs
        .par_iter()
        .map(|(x, _)| {
            let (d1, y) = nearest(x, &ys);
            let (d2, yp) = nearest(x, &yps);
            (d1 + d2, *x, y, yp)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .ok_or_else(|| Error::Degenerate("obstacle has no surface samples".into()))?;
    let spacing = obstacle
        .sample_spacing(level)
        .max(icosphere(2).spacing() * b.radius.max(b_prime.radius));
    for _ in 0..100 {
        let f = |z: &Vec3| (broken_path_length(z, &y, &yp), broken_path_gradient(z, &y, &yp));
        let c = refine_at(obstacle, &x, &f);
        x = c.x;
        y = b.center + b.radius * (x - b.center).normalize();
        yp = b_prime.center + b_prime.radius * (x - b_prime.center).normalize();
        let v = broken_path_length(&x, &y, &yp);
        let done = (best - v).abs() < 1e-15 * v;
        best = v;
        if done {
            break;
        }
    }
    Ok(TripleMinimum {
        value: best,
        x,
        y,
        y_prime: yp,
        spacing,
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Thresholds {
    /// Minimal observation time for the decay-rate extraction.
    pub decay: f64,
    /// Minimal observation time for the shifted-receiver scan.
    pub scan: f64,
    pub worst_direction: Vec3,
}

/// Observation-time thresholds for a source/receiver configuration.
pub fn t_thresholds(obstacle: &ObstacleShape, b: &Ball, b_prime: &Ball, s: f64) -> Result<Thresholds> {
    let opts = MinimizerOptions::coarse();
    let (c, _) = min_broken_path_with(obstacle, &b.center, &b_prime.center, &MinimizerOptions::default())?;
    let decay = c - b.radius - b_prime.radius;
    if s == 0.0 {
        return Ok(Thresholds {
            decay,
            scan: decay,
            worst_direction: Vec3::zeros(),
        });
    }
    let dirs = &icosphere(3).vertices;
    let (scan, worst) = dirs
        .par_iter()
        .filter_map(|w| {
            let pp = b_prime.center + s * w;
            min_broken_path_with(obstacle, &b.center, &pp, &opts)
                .ok()
                .map(|(c, _)| (c - (b.radius + b_prime.radius - s), *w))
        })
        .reduce(
            || (f64::NEG_INFINITY, Vec3::zeros()),
            |a, b| if b.0 > a.0 { b } else { a },
        );
    Ok(Thresholds {
        decay,
        scan: scan.max(decay),
        worst_direction: worst,
    })
}

/// `min_t |x - c(t)| - r(t)` with `c, r` interpolating the two balls; this is
/// non-positive exactly on the convex hull of `B ∪ B'`.
pub fn hull_distance(x: &Vec3, b: &Ball, b_prime: &Ball) -> (f64, Vec3) {
    let g = |t: f64| {
        let c = b.center + t * (b_prime.center - b.center);
        (x - c).norm() - ((1.0 - t) * b.radius + t * b_prime.radius)
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if g(m1) <= g(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let t = 0.5 * (lo + hi);
    let c = b.center + t * (b_prime.center - b.center);
    (g(t), (x - c).normalize())
}

/// Signed clearance between the obstacle and the convex hull of `B ∪ B'`;
/// positive when they are disjoint.
pub fn hull_clearance(obstacle: &ObstacleShape, b: &Ball, b_prime: &Ball) -> f64 {
    hull_clearance_at_level(obstacle, b, b_prime, 5)
}

/// [`hull_clearance`] with the sampling level of the global search.
pub fn hull_clearance_at_level(obstacle: &ObstacleShape, b: &Ball, b_prime: &Ball, level: usize) -> f64 {
    if obstacle.contains(&b.center) || obstacle.contains(&b_prime.center) {
        return -1.0;
    }
    let f = |x: &Vec3| hull_distance(x, b, b_prime);
    minimize_on_surface(obstacle, &f, level, 16)
        .first()
        .map(|c| c.value)
        .unwrap_or(f64::NAN)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CdConstants {
    /// Infimum of `1 + cos∠(p - x, p' - x)` over the obstacle; 0 flags a
    /// violated segment condition.
    pub points: f64,
    /// Infimum over the obstacle and both balls; 0 flags a violated hull
    /// condition.
    pub balls: f64,
}

fn one_plus_cos(x: &Vec3, p: &Vec3, p_prime: &Vec3) -> (f64, Vec3) {
    let da = p - x;
    let db = p_prime - x;
    let (ra, rb) = (da.norm(), db.norm());
    let a = da / ra;
    let b = db / rb;
    let grad = -(b - a * a.dot(&b)) / ra - (a - b * a.dot(&b)) / rb;
    (1.0 + a.dot(&b), grad)
}

fn one_plus_cos_balls(x: &Vec3, b: &Ball, b_prime: &Ball) -> f64 {
    let da = b.center - x;
    let db = b_prime.center - x;
    let theta = (da.dot(&db) / (da.norm() * db.norm())).clamp(-1.0, 1.0).acos();
    let widen = (b.radius / da.norm()).min(1.0).asin() + (b_prime.radius / db.norm()).min(1.0).asin();
    1.0 + (theta + widen).min(std::f64::consts::PI).cos()
}

/// The two positivity constants of the lower-bound arguments. Both infima
/// are attained on the boundary, since the angle subtended by a segment has
/// no interior maximum away from the segment.
pub fn c_d_constants(obstacle: &ObstacleShape, p: &Vec3, p_prime: &Vec3, b: &Ball, b_prime: &Ball) -> CdConstants {
    let points = if check_pair(obstacle, p, p_prime).is_err() {
        0.0
    } else {
        let f = |x: &Vec3| one_plus_cos(x, p, p_prime);
        minimize_on_surface(obstacle, &f, 6, 16)
            .first()
            .map(|c| c.value.max(0.0))
            .unwrap_or(0.0)
    };
    let balls = if hull_clearance(obstacle, b, b_prime) <= 0.0 {
        0.0
    } else {
        let f = |x: &Vec3| {
            let h = 1e-6 * (1.0 + x.norm());
            let mut g = Vec3::zeros();
            for k in 0..3 {
                let mut e = Vec3::zeros();
                e[k] = h;
                g[k] =
                    (one_plus_cos_balls(&(x + e), b, b_prime) - one_plus_cos_balls(&(x - e), b, b_prime)) / (2.0 * h);
            }
            (one_plus_cos_balls(x, b, b_prime), g)
        };
        minimize_on_surface(obstacle, &f, 6, 16)
            .first()
            .map(|c| c.value.max(0.0))
            .unwrap_or(0.0)
    };
    CdConstants { points, balls }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s1() -> (ObstacleShape, Vec3, Vec3) {
        (
            ObstacleShape::sphere(Vec3::zeros(), 1.0).unwrap(),
            Vec3::new(4.0, 0.0, 0.0),
            Vec3::new(0.0, 4.0, 0.0),
        )
    }

    #[test]
    fn s1_reflector() {
        let (d, p, pp) = s1();
        let (c, set) = min_broken_path(&d, &p, &pp).unwrap();
        let r = set.single().unwrap();
        let q = Vec3::new(1.0, 1.0, 0.0).normalize();
        assert!((c - 2.0 * (q - p).norm()).abs() < 1e-12, "c = {c}");
        assert!((r.q - q).norm() < 1e-7);
        assert!(r.snell_residual < 1e-8);
    }

    #[test]
    fn monostatic_sphere() {
        let d = ObstacleShape::sphere(Vec3::new(0.5, 0.0, 0.0), 1.0).unwrap();
        let p = Vec3::new(0.5, 3.0, 0.0);
        let (c, set) = min_broken_path(&d, &p, &p).unwrap();
        assert!((c - 2.0 * (3.0 - 1.0)).abs() < 1e-12);
        assert!((set.single().unwrap().q - Vec3::new(0.5, 1.0, 0.0)).norm() < 1e-7);
    }

    #[test]
    fn shadow_and_inside_rejected() {
        let (d, _, _) = s1();
        let p = Vec3::new(3.0, 0.0, 0.0);
        let pp = Vec3::new(-3.0, 0.0, 0.0);
        assert!(matches!(min_broken_path(&d, &p, &pp), Err(Error::Shadow)));
        assert!(min_broken_path(&d, &Vec3::new(0.5, 0.0, 0.0), &p).is_err());
    }

    #[test]
    fn triple_surface_identity_on_s1() {
        let (d, p, pp) = s1();
        let b = Ball::new(p, 0.5).unwrap();
        let bp = Ball::new(pp, 0.5).unwrap();
        let t = min_over_triple_surfaces(&d, &b, &bp).unwrap();
        let (c, _) = min_broken_path(&d, &p, &pp).unwrap();
        assert!((t.value - (c - 1.0)).abs() < 1e-9, "{} vs {}", t.value, c - 1.0);
    }

    #[test]
    fn thresholds_on_s1() {
        let (d, p, pp) = s1();
        let b = Ball::new(p, 0.5).unwrap();
        let bp = Ball::new(pp, 0.5).unwrap();
        let t = t_thresholds(&d, &b, &bp, 0.25).unwrap();
        assert!((t.decay - 5.735917).abs() < 1e-5);
        assert!(t.scan >= t.decay);
        let t0 = t_thresholds(&d, &b, &bp, 1e-9).unwrap();
        assert!((t0.scan - t0.decay).abs() < 1e-6);
    }

    #[test]
    fn cd_constants_positive_on_s1() {
        let (d, p, pp) = s1();
        let b = Ball::new(p, 0.5).unwrap();
        let bp = Ball::new(pp, 0.5).unwrap();
        let cd = c_d_constants(&d, &p, &pp, &b, &bp);
        assert!(cd.points > 0.0 && cd.balls > 0.0 && cd.balls <= cd.points);
        assert!(hull_clearance(&d, &b, &bp) > 0.0);
    }

    #[test]
    fn hull_distance_matches_geometry() {
        let b = Ball::new(Vec3::zeros(), 1.0).unwrap();
        let bp = Ball::new(Vec3::new(10.0, 0.0, 0.0), 1.0).unwrap();
        assert!((hull_distance(&Vec3::new(5.0, 3.0, 0.0), &b, &bp).0 - 2.0).abs() < 1e-9);
        assert!(hull_distance(&Vec3::new(5.0, 0.5, 0.0), &b, &bp).0 < 0.0);
    }
}
