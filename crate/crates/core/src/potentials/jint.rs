//! Semi-analytic evaluation of
//!
//! ```text
//! J(τ) = ∫_D (∇v_f·∇v_g + τ² v_f v_g) dx = ∫_{∂D} (∂v_f/∂ν) v_g dS
//! ```
//!
//! for ball sources, and of the leading-order surface integrals that
//! describe its large-τ behaviour. Integrands are multiplied by `e^{τκ}`,
//! `κ = min_{∂D} (d_B + d_B')`, and results carry that shift in log form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{broken_path_gradient, broken_path_length, orthogonal_unit, Vec3};
use crate::numeric::LogValue;
use crate::obstacle::{
    hull_clearance_at_level, min_broken_path_with, minimize_on_surface, Ball, Ellipsoid, MinimizerOptions,
    ObstacleShape, ReflectorSet, TriMesh,
};
use crate::quadrature::{adaptive_gk, adaptive_triangle, periodic_trapezoid, QuadResult};

use super::yukawa::YukawaBallField;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JMethod {
    Boundary,
    Volume,
    KernelExpansion,
    KernelProduct,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct JEvaluation {
    pub tau: f64,
    pub value: LogValue,
    pub method: JMethod,
    /// Quadrature error estimate relative to the value.
    pub rel_error: f64,
    pub evaluations: usize,
}

impl JEvaluation {
    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }
}

/// Requested relative accuracy and the loosest accepted one.
const REL_TOL: f64 = 1e-8;
const ACCEPT_TOL: f64 = 1e-4;

/// Precomputed geometry shared by all τ.
#[derive(Clone, Debug)]
pub struct JProblem {
    pub obstacle: ObstacleShape,
    pub b: Ball,
    pub b_prime: Ball,
    pub reflectors: ReflectorSet,
    /// `min_{∂D} φ(x; p, p')`.
    pub c: f64,
    /// `c - η - η'`.
    pub kappa: f64,
    poles: Vec<Vec3>,
}

impl JProblem {
    pub fn new(obstacle: &ObstacleShape, b: &Ball, b_prime: &Ball) -> Result<Self> {
        Self::with_options(obstacle, b, b_prime, &MinimizerOptions::default())
    }

    /// As [`JProblem::new`] with explicit minimizer settings; coarse settings
    /// make repeated setups (direction scans) affordable.
    pub fn with_options(obstacle: &ObstacleShape, b: &Ball, b_prime: &Ball, opts: &MinimizerOptions) -> Result<Self> {
        if hull_clearance_at_level(obstacle, b, b_prime, opts.sample_level.min(4)) <= 0.0 {
            return Err(Error::Hypothesis(
                "the convex hull of the source and receiver balls must not meet the obstacle".into(),
            ));
        }
        let (p, pp) = (b.center, b_prime.center);
        let (c, reflectors) = min_broken_path_with(obstacle, &p, &pp, opts)?;
        let f = |x: &Vec3| (broken_path_length(x, &p, &pp), broken_path_gradient(x, &p, &pp));
        let poles = obstacle
            .leaves()
            .into_iter()
            .map(|leaf| {
                minimize_on_surface(leaf, &f, opts.sample_level.min(5), 8)
                    .first()
                    .map(|c| c.x)
                    .unwrap_or_else(|| leaf.project(&p))
            })
            .collect();
        Ok(Self {
            obstacle: obstacle.clone(),
            b: *b,
            b_prime: *b_prime,
            reflectors,
            c,
            kappa: c - b.radius - b_prime.radius,
            poles,
        })
    }

    fn fields(&self, tau: f64) -> Result<(YukawaBallField, YukawaBallField)> {
        Ok((
            YukawaBallField::new(self.b, tau)?,
            YukawaBallField::new(self.b_prime, tau)?,
        ))
    }

    fn finish(&self, tau: f64, q: QuadResult, method: JMethod) -> Result<JEvaluation> {
        let rel = q.error / q.value.abs().max(1e-300);
        if rel > ACCEPT_TOL {
            return Err(Error::Quadrature {
                achieved: rel,
                wanted: ACCEPT_TOL,
            });
        }
        let value = LogValue::from_scaled(q.value, tau * self.kappa);
        Ok(JEvaluation {
            tau,
            value,
            method,
            rel_error: rel,
            evaluations: q.evaluations,
        })
    }

    /// Surface route, exact up to quadrature error.
    pub fn boundary(&self, tau: f64) -> Result<JEvaluation> {
        let (vf, vg) = self.fields(tau)?;
        let (p, pp) = (self.b.center, self.b_prime.center);
        let (eta, etap) = (self.b.radius, self.b_prime.radius);
        let kappa = self.kappa;
        let t3 = tau * tau * tau;
        let f = move |x: &Vec3, nu: &Vec3| {
            let r = (x - p).norm();
            let rp = (x - pp).norm();
            let e = (-tau * (r - eta + rp - etap - kappa)).exp();
            let dn = (p - x).dot(nu) / r * vf.m_hat() * (1.0 + tau * r) / (t3 * r * r);
            dn * vg.m_hat() / (t3 * rp) * e
        };
        let q = self.integrate_surface(&f)?;
        self.finish(tau, q, JMethod::Boundary)
    }

    /// Volume route over the interior of the obstacle. `D` lies outside
    /// both balls, so only the exterior closed forms are needed.
    pub fn volume(&self, tau: f64) -> Result<JEvaluation> {
        let (vf, vg) = self.fields(tau)?;
        let (p, pp) = (self.b.center, self.b_prime.center);
        let (eta, etap) = (self.b.radius, self.b_prime.radius);
        let kappa = self.kappa;
        let t3 = tau * tau * tau;
        let g = move |x: &Vec3| {
            let r = (x - p).norm();
            let rp = (x - pp).norm();
            let e = (-tau * (r - eta + rp - etap - kappa)).exp();
            let af = vf.m_hat() * (1.0 + tau * r) / (t3 * r * r);
            let ag = vg.m_hat() * (1.0 + tau * rp) / (t3 * rp * rp);
            let dot = ((p - x) / r).dot(&((pp - x) / rp));
            (af * ag * dot + tau * tau * vf.m_hat() * vg.m_hat() / (t3 * t3 * r * rp)) * e
        };
        let q = self.integrate_volume(&g)?;
        self.finish(tau, q, JMethod::Volume)
    }

    /// Leading term of the large-τ expansion (single surface integral).
    pub fn kernel_expansion(&self, tau: f64) -> Result<JEvaluation> {
        let (eta, etap) = (self.b.radius, self.b_prime.radius);
        if eta - 1.0 / tau <= 0.0 || etap - 1.0 / tau <= 0.0 {
            return Err(Error::Hypothesis(format!(
                "τ = {tau} is outside the asymptotic regime (need τ > 1/η and τ > 1/η')"
            )));
        }
        let (p, pp) = (self.b.center, self.b_prime.center);
        let kappa = self.kappa;
        let f = move |x: &Vec3, nu: &Vec3| {
            let r = (x - p).norm();
            let rp = (x - pp).norm();
            let e = (-tau * (r - eta + rp - etap - kappa)).exp();
            (p - x).dot(nu) / (r * r * rp) * (1.0 + 1.0 / (tau * r)) * e
        };
        let q = self.integrate_surface(&f)?;
        let pre = (eta - 1.0 / tau) * (etap - 1.0 / tau) / (4.0 * tau * tau * tau);
        let q = QuadResult {
            value: q.value * pre,
            error: q.error * pre,
            ..q
        };
        self.finish(tau, q, JMethod::KernelExpansion)
    }

    /// Product of the two one-ball expansions, including their secondary
    /// exponentials.
    pub fn kernel_product(&self, tau: f64) -> Result<JEvaluation> {
        let (p, pp) = (self.b.center, self.b_prime.center);
        let (eta, etap) = (self.b.radius, self.b_prime.radius);
        let kappa = self.kappa;
        let f = move |x: &Vec3, nu: &Vec3| {
            let r = (x - p).norm();
            let rp = (x - pp).norm();
            let lb = (r * r - eta * eta).sqrt();
            let lbp = (rp * rp - etap * etap).sqrt();
            // Each factor is a sum of two terms; keep the exponents apart so the
            // e^{τκ} shift can be applied before exponentiating.
            let j2 = [
                (r - eta, (eta - 1.0 / tau) * (1.0 + 1.0 / (tau * r)) / (tau * r)),
                (lb, (lb + 1.0 / tau) / (tau * tau * r * r)),
            ];
            let j1 = [
                (rp - etap, (etap - 1.0 / tau) / (tau * rp)),
                (lbp, 1.0 / (tau * tau * rp)),
            ];
            let mut sum = 0.0;
            for (ea, ca) in j2 {
                for (eb, cb) in j1 {
                    sum += ca * cb * (-tau * (ea + eb - kappa)).exp();
                }
            }
            (p - x).dot(nu) / r * sum / (4.0 * tau)
        };
        let q = self.integrate_surface(&f)?;
        self.finish(tau, q, JMethod::KernelProduct)
    }

    /// `τ e^{τc} ∫ (p-x)·ν/(|x-p|²|x-p'|) (1 + 1/(τ|x-p|)) e^{-τφ} dS`.
    pub fn laplace_scaled(&self, tau: f64) -> Result<f64> {
        let (p, pp) = (self.b.center, self.b_prime.center);
        let c = self.c;
        let f = move |x: &Vec3, nu: &Vec3| {
            let r = (x - p).norm();
            let rp = (x - pp).norm();
            let e = (-tau * (r + rp - c)).exp();
            (p - x).dot(nu) / (r * r * rp) * (1.0 + 1.0 / (tau * r)) * e
        };
        let q = self.integrate_surface(&f)?;
        let rel = q.error / q.value.abs().max(1e-300);
        if rel > ACCEPT_TOL {
            return Err(Error::Quadrature {
                achieved: rel,
                wanted: ACCEPT_TOL,
            });
        }
        Ok(tau * q.value)
    }

    fn integrate_surface(&self, f: &dyn Fn(&Vec3, &Vec3) -> f64) -> Result<QuadResult> {
        let mut total = QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
            converged: true,
        };
        for (leaf, pole) in self.obstacle.leaves().into_iter().zip(&self.poles) {
            let r = match leaf {
                ObstacleShape::Ellipsoid(e) => ellipsoid_surface(e, pole, f),
                ObstacleShape::Mesh(m) => mesh_surface(m, pole, f),
                ObstacleShape::Union(_) => unreachable!(),
            };
            total.value += r.value;
            total.error += r.error;
            total.evaluations += r.evaluations;
            total.converged &= r.converged;
        }
        Ok(total)
    }

    fn integrate_volume(&self, f: &dyn Fn(&Vec3) -> f64) -> Result<QuadResult> {
        let mut total = QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
            converged: true,
        };
        for (leaf, pole) in self.obstacle.leaves().into_iter().zip(&self.poles) {
            let r = match leaf {
                ObstacleShape::Ellipsoid(e) => ellipsoid_volume(e, pole, f),
                ObstacleShape::Mesh(m) => mesh_volume(m, pole, f),
                ObstacleShape::Union(_) => unreachable!(),
            };
            total.value += r.value;
            total.error += r.error;
            total.evaluations += r.evaluations;
            total.converged &= r.converged;
        }
        Ok(total)
    }
}

/// Spherical parametrization of an ellipsoid with its pole at the body
/// parameter of `pole`.
struct PolarChart {
    u0: Vec3,
    t1: Vec3,
    t2: Vec3,
}

impl PolarChart {
    fn new(e: &Ellipsoid, pole: &Vec3) -> Self {
        let u0 = e.param_of(pole);
        let t1 = orthogonal_unit(&u0);
        let t2 = u0.cross(&t1);
        Self { u0, t1, t2 }
    }

    fn u(&self, theta: f64, phi: f64) -> Vec3 {
        let (s, c) = theta.sin_cos();
        c * self.u0 + s * (phi.cos() * self.t1 + phi.sin() * self.t2)
    }
}

fn ellipsoid_surface(e: &Ellipsoid, pole: &Vec3, f: &dyn Fn(&Vec3, &Vec3) -> f64) -> QuadResult {
    let chart = PolarChart::new(e, pole);
    let peak = f(&e.point(&chart.u0), &e.normal_param(&chart.u0)).abs() * e.area_factor(&chart.u0);
    let abs_tol = 1e-13 * peak.max(1e-300);
    let mut evals = 0;
    let mut inner_ok = true;
    let mut r = adaptive_gk(
        |theta| {
            let s = theta.sin();
            if s == 0.0 {
                return 0.0;
            }
            let q = periodic_trapezoid(
                |phi| {
                    let u = chart.u(theta, phi);
                    f(&e.point(&u), &e.normal_param(&u)) * e.area_factor(&u)
                },
                8,
                1e-3 * abs_tol,
                1e-11,
                1 << 14,
            );
            evals += q.evaluations;
            inner_ok &= q.converged;
            q.value * s
        },
        0.0,
        std::f64::consts::PI,
        abs_tol,
        REL_TOL,
        400,
    );
    r.evaluations = evals;
    r.converged &= inner_ok;
    r
}

fn ellipsoid_volume(e: &Ellipsoid, pole: &Vec3, f: &dyn Fn(&Vec3) -> f64) -> QuadResult {
    let chart = PolarChart::new(e, pole);
    let jac = e.semi_axes.product();
    let body = |u: &Vec3, rho: f64| e.center + e.rotation * e.semi_axes.component_mul(&(rho * u));
    let peak = f(&body(&chart.u0, 1.0 - 1e-9)).abs() * jac;
    let abs_tol = 1e-14 * peak.max(1e-300);
    let mut evals = 0;
    let mut inner_ok = true;
    let mut r = adaptive_gk(
        |theta| {
            let s = theta.sin();
            if s == 0.0 {
                return 0.0;
            }
            let q = periodic_trapezoid(
                |phi| {
                    let u = chart.u(theta, phi);
                    let radial = adaptive_gk(
                        |rho| rho * rho * f(&body(&u, rho)),
                        0.0,
                        1.0,
                        1e-4 * abs_tol,
                        1e-11,
                        200,
                    );
                    evals += radial.evaluations;
                    inner_ok &= radial.converged;
                    radial.value * jac
                },
                8,
                1e-3 * abs_tol,
                1e-10,
                1 << 12,
            );
            inner_ok &= q.converged;
            q.value * s
        },
        0.0,
        std::f64::consts::PI,
        abs_tol,
        REL_TOL,
        400,
    );
    r.evaluations = evals;
    r.converged &= inner_ok;
    r
}

fn mesh_surface(m: &TriMesh, pole: &Vec3, f: &dyn Fn(&Vec3, &Vec3) -> f64) -> QuadResult {
    let (foot, tri, _) = m.closest_point(pole);
    let t = m.triangle(tri);
    let nu = (t[1] - t[0]).cross(&(t[2] - t[0])).normalize();
    let peak = f(&foot, &nu).abs();
    let tol = 1e-12 * peak.max(1e-300) * m.h_mesh() * m.h_mesh();
    let mut total = QuadResult {
        value: 0.0,
        error: 0.0,
        evaluations: 0,
        converged: true,
    };
    for i in 0..m.triangles.len() {
        let t = m.triangle(i);
        let nu = (t[1] - t[0]).cross(&(t[2] - t[0])).normalize();
        let r = adaptive_triangle(&mut |x| f(x, &nu), &t, tol, 8);
        total.value += r.value;
        total.error += r.error;
        total.evaluations += r.evaluations;
        total.converged &= r.converged;
    }
    total
}

/// Cone decomposition from the vertex centroid; exact for meshes that are
/// star-shaped with respect to it.
fn mesh_volume(m: &TriMesh, pole: &Vec3, f: &dyn Fn(&Vec3) -> f64) -> QuadResult {
    let c = m.centroid();
    let peak = f(&(pole + 1e-9 * (c - pole))).abs();
    let tol = 1e-13 * peak.max(1e-300) * m.h_mesh().powi(3);
    let mut total = QuadResult {
        value: 0.0,
        error: 0.0,
        evaluations: 0,
        converged: true,
    };
    for i in 0..m.triangles.len() {
        let t = m.triangle(i);
        let n = (t[1] - t[0]).cross(&(t[2] - t[0])).normalize();
        let height = (t[0] - c).dot(&n);
        let mut inner = |y: &Vec3| {
            adaptive_gk(
                |rho| rho * rho * f(&(c + rho * (y - c))),
                0.0,
                1.0,
                1e-3 * tol,
                1e-10,
                100,
            )
            .value
                * height
        };
        let r = adaptive_triangle(&mut inner, &t, tol, 6);
        total.value += r.value;
        total.error += r.error;
        total.evaluations += r.evaluations;
        total.converged &= r.converged;
    }
    total
}

pub fn j_boundary(obstacle: &ObstacleShape, b: &Ball, b_prime: &Ball, tau: f64) -> Result<JEvaluation> {
    JProblem::new(obstacle, b, b_prime)?.boundary(tau)
}

pub fn j_volume(obstacle: &ObstacleShape, b: &Ball, b_prime: &Ball, tau: f64) -> Result<JEvaluation> {
    JProblem::new(obstacle, b, b_prime)?.volume(tau)
}

pub fn j_kernel_expansion(obstacle: &ObstacleShape, b: &Ball, b_prime: &Ball, tau: f64) -> Result<JEvaluation> {
    JProblem::new(obstacle, b, b_prime)?.kernel_expansion(tau)
}

/// The volume kernel `K_τ(x, y, y')` of the three-point representation of `J`.
pub fn volume_kernel(x: &Vec3, y: &Vec3, y_prime: &Vec3, tau: f64) -> f64 {
    let a = y - x;
    let b = y_prime - x;
    let (ra, rb) = (a.norm(), b.norm());
    (1.0 / ra + tau) * (1.0 / rb + tau) * (a / ra).dot(&(b / rb)) + tau * tau
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s1() -> JProblem {
        let d = ObstacleShape::sphere(Vec3::zeros(), 1.0).unwrap();
        let b = Ball::new(Vec3::new(4.0, 0.0, 0.0), 0.5).unwrap();
        let bp = Ball::new(Vec3::new(0.0, 4.0, 0.0), 0.5).unwrap();
        JProblem::new(&d, &b, &bp).unwrap()
    }

    #[test]
    fn boundary_matches_volume() {
        let pb = s1();
        for tau in [2.0, 6.0, 10.0] {
            let a = pb.boundary(tau).unwrap();
            let v = pb.volume(tau).unwrap();
            let rel = (a.to_f64() / v.to_f64() - 1.0).abs();
            eprintln!(
                "tau {tau}: boundary {:e} volume {:e} rel {rel:e} evals {} {}",
                a.to_f64(),
                v.to_f64(),
                a.evaluations,
                v.evaluations
            );
            assert!(rel < 1e-6);
        }
    }

    #[test]
    fn kernel_expansion_tracks_boundary() {
        let pb = s1();
        let mut last = f64::INFINITY;
        for tau in [10.0, 20.0, 40.0] {
            let j = pb.boundary(tau).unwrap();
            let k = pb.kernel_expansion(tau).unwrap();
            let kp = pb.kernel_product(tau).unwrap();
            let dev = (k.value.log_mag - j.value.log_mag).exp_m1().abs();
            let devp = (kp.value.log_mag - j.value.log_mag).exp_m1().abs();
            assert!(dev < 0.03 && devp < 0.03, "τ = {tau}: {dev} {devp}");
            assert!(dev <= last.max(1e-12));
            last = dev;
        }
        assert!(pb.kernel_expansion(1.5).is_err());
    }

    #[test]
    fn laplace_limit() {
        // π / (|q-p||q-p'| √det) at the S1 reflector.
        let limit = 0.2066478;
        let pb = s1();
        let mut last = f64::INFINITY;
        for tau in [10.0, 40.0, 160.0] {
            let err = (pb.laplace_scaled(tau).unwrap() / limit - 1.0).abs();
            assert!(err < last, "tau {tau}: {err}");
            last = err;
        }
        assert!(last < 6e-3, "{last}");
    }
}
