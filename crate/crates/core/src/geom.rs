//! Broken paths, confocal spheroids and the curvature algebra at a first
//! reflection point.
//!
//! Conventions used throughout the crate:
//!
//! * `A = (q - p)/|q - p|` and `A' = (q - p')/|q - p'|` are the unit vectors
//!   pointing from the two foci to the surface point.
//! * A shape operator is stored as the Hessian of the height function over the
//!   tangent plane, where heights are measured along the frame normal. For an
//!   obstacle the frame normal is the outward normal, so a convex obstacle has a
//!   negative semidefinite operator. For a spheroid the frame normal is the
//!   inward normal, which makes the spheroid operator positive definite and lets
//!   both live in the same basis at a point of tangency.

use nalgebra::{Matrix2, SymmetricEigen, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat2 = Matrix2<f64>;

/// `|p - x| + |x - p'|`.
#[inline]
pub fn broken_path_length(x: &Vec3, p: &Vec3, p_prime: &Vec3) -> f64 {
    (p - x).norm() + (x - p_prime).norm()
}

/// Gradient of the broken-path length with respect to `x`.
#[inline]
pub fn broken_path_gradient(x: &Vec3, p: &Vec3, p_prime: &Vec3) -> Vec3 {
    (x - p).normalize() + (x - p_prime).normalize()
}

/// Unit vector orthogonal to `n`, chosen deterministically by Gram-Schmidt on
/// the coordinate axis least aligned with `n`.
pub fn orthogonal_unit(n: &Vec3) -> Vec3 {
    let a = n.abs();
    let axis = if a.x <= a.y && a.x <= a.z {
        Vec3::x()
    } else if a.y <= a.z {
        Vec3::y()
    } else {
        Vec3::z()
    };
    (axis - n * n.dot(&axis)).normalize()
}

/// The level set `{x : |x - p| + |x - p'| = c}` with `c > |p - p'|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpheroidFrame {
    p: Vec3,
    p_prime: Vec3,
    c: f64,
}

impl SpheroidFrame {
    pub fn new(p: Vec3, p_prime: Vec3, c: f64) -> Result<Self> {
        let focal = (p - p_prime).norm();
        if !(c > focal) || !c.is_finite() {
            return Err(Error::InvalidSpheroid { c, focal });
        }
        Ok(Self { p, p_prime, c })
    }

    pub fn p(&self) -> Vec3 {
        self.p
    }

    pub fn p_prime(&self) -> Vec3 {
        self.p_prime
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn focal_distance(&self) -> f64 {
        (self.p - self.p_prime).norm()
    }

    /// Semi-axes `(major, minor)` of the ellipse of revolution.
    pub fn semi_axes(&self) -> (f64, f64) {
        let a = 0.5 * self.c;
        let f = 0.5 * self.focal_distance();
        (a, (a * a - f * f).sqrt())
    }

    pub fn center(&self) -> Vec3 {
        0.5 * (self.p + self.p_prime)
    }

    /// `φ(x; p, p') - c`; negative inside the spheroid.
    pub fn level(&self, x: &Vec3) -> f64 {
        broken_path_length(x, &self.p, &self.p_prime) - self.c
    }

    /// Distance from `p'` to the spheroid along the ray `p' + sω`.
    pub fn radial(&self, omega: &Vec3) -> f64 {
        let w = omega.normalize();
        let d = self.p - self.p_prime;
        (self.c * self.c - d.norm_squared()) / (2.0 * (self.c - w.dot(&d)))
    }

    pub fn point(&self, omega: &Vec3) -> Vec3 {
        let w = omega.normalize();
        self.p_prime + self.radial(&w) * w
    }

    /// Inward unit normal at a point of the spheroid.
    pub fn inward_normal(&self, x: &Vec3) -> Result<Vec3> {
        let g = broken_path_gradient(x, &self.p, &self.p_prime);
        let n = g.norm();
        if !(n > 1e-12) {
            return Err(Error::Degenerate("point lies on the focal segment".to_string()));
        }
        Ok(-g / n)
    }

    /// Shape operator, principal curvatures and Gauss/mean curvature with
    /// respect to the inward normal.
    pub fn shape_operator(&self, x: &Vec3) -> Result<SpheroidCurvature> {
        let nu = self.inward_normal(x)?;
        let a = (x - self.p).normalize();
        let ap = (x - self.p_prime).normalize();
        let dot = a.dot(&ap);
        let lambda = 1.0 / (x - self.p).norm() + 1.0 / (x - self.p_prime).norm();
        let cross = a.cross(&ap);
        let hint = if cross.norm() > 1e-8 { Some(cross) } else { None };
        let frame = TangentFrame::new(*x, nu, hint);
        let gamma = lambda / (2.0 * (1.0 + dot)).sqrt();
        let ca = Vector2::new(a.dot(&frame.e1), a.dot(&frame.e2));
        let cb = Vector2::new(ap.dot(&frame.e1), ap.dot(&frame.e2));
        let m = gamma * (Mat2::identity() - 0.5 * ca * ca.transpose() - 0.5 * cb * cb.transpose());
        let k1 = gamma;
        let k2 = gamma * 0.5 * (1.0 + dot);
        Ok(SpheroidCurvature {
            op: ShapeOperator2::new(frame, m),
            k1,
            k2,
            gauss: 0.25 * lambda * lambda,
            mean: 0.5 * (k1 + k2),
        })
    }

    /// The spheroid `E_{c-s}(p, p' + sA')` through `q`, with `A'` taken at `q`.
    pub fn shifted(&self, q: &Vec3, s: f64) -> Result<SpheroidFrame> {
        let ap = (q - self.p_prime).normalize();
        SpheroidFrame::new(self.p, self.p_prime + s * ap, self.c - s)
    }
}

pub fn spheroid_radial(omega: &Vec3, frame: &SpheroidFrame) -> f64 {
    frame.radial(omega)
}

pub fn spheroid_point(omega: &Vec3, frame: &SpheroidFrame) -> Vec3 {
    frame.point(omega)
}

pub fn spheroid_inward_normal(x: &Vec3, frame: &SpheroidFrame) -> Result<Vec3> {
    frame.inward_normal(x)
}

pub fn spheroid_shape_operator(x: &Vec3, frame: &SpheroidFrame) -> Result<SpheroidCurvature> {
    frame.shape_operator(x)
}

#[derive(Clone, Debug)]
pub struct SpheroidCurvature {
    pub op: ShapeOperator2,
    pub k1: f64,
    pub k2: f64,
    pub gauss: f64,
    pub mean: f64,
}

/// Orthonormal, right-handed frame `(e1, e2, nu)` at a surface point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentFrame {
    pub q: Vec3,
    pub e1: Vec3,
    pub e2: Vec3,
    pub nu: Vec3,
}

impl TangentFrame {
    /// Builds a frame with normal `nu`. `e1` follows the tangential part of
    /// `hint` when that is not negligible.
    pub fn new(q: Vec3, nu: Vec3, hint: Option<Vec3>) -> Self {
        let nu = nu.normalize();
        let e1 = hint
            .map(|h| h - nu * nu.dot(&h))
            .filter(|t| t.norm() > 1e-8)
            .map(|t| t.normalize())
            .unwrap_or_else(|| orthogonal_unit(&nu));
        let e2 = nu.cross(&e1);
        Self { q, e1, e2, nu }
    }

    /// Tangential coordinates of `v`.
    pub fn coords(&self, v: &Vec3) -> Vector2<f64> {
        Vector2::new(v.dot(&self.e1), v.dot(&self.e2))
    }

    pub fn tangent(&self, s: &Vector2<f64>) -> Vec3 {
        s.x * self.e1 + s.y * self.e2
    }

    /// `q + σ1 e1 + σ2 e2 + h ν`.
    pub fn chart_point(&self, sigma: [f64; 2], height: f64) -> Vec3 {
        self.q + sigma[0] * self.e1 + sigma[1] * self.e2 + height * self.nu
    }

    pub fn orthonormality_error(&self) -> f64 {
        let mut err: f64 = 0.0;
        for v in [self.e1, self.e2, self.nu] {
            err = err.max((v.norm() - 1.0).abs());
        }
        err = err
            .max(self.e1.dot(&self.e2).abs())
            .max(self.e1.dot(&self.nu).abs())
            .max(self.e2.dot(&self.nu).abs());
        err.max((self.e1.cross(&self.e2) - self.nu).norm())
    }

    /// Rotation taking coordinates in `self` to coordinates in `other`; both
    /// frames must share the tangent plane.
    fn transfer(&self, other: &TangentFrame) -> Mat2 {
        Mat2::new(
            other.e1.dot(&self.e1),
            other.e1.dot(&self.e2),
            other.e2.dot(&self.e1),
            other.e2.dot(&self.e2),
        )
    }
}

/// A symmetric tangent-space operator expressed in a [`TangentFrame`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShapeOperator2 {
    pub frame: TangentFrame,
    pub m: Mat2,
}

impl ShapeOperator2 {
    pub fn new(frame: TangentFrame, m: Mat2) -> Self {
        let off = 0.5 * (m[(0, 1)] + m[(1, 0)]);
        let m = Mat2::new(m[(0, 0)], off, off, m[(1, 1)]);
        Self { frame, m }
    }

    /// Principal curvatures `k1 >= k2` with their (3D) principal directions.
    pub fn principal(&self) -> (f64, f64, Vec3, Vec3) {
        let eig = SymmetricEigen::new(self.m);
        let (i1, i2) = if eig.eigenvalues[0] >= eig.eigenvalues[1] {
            (0, 1)
        } else {
            (1, 0)
        };
        let v1 = self.frame.tangent(&eig.eigenvectors.column(i1).into_owned());
        let v2 = self.frame.tangent(&eig.eigenvectors.column(i2).into_owned());
        (eig.eigenvalues[i1], eig.eigenvalues[i2], v1, v2)
    }

    pub fn gauss(&self) -> f64 {
        self.m.determinant()
    }

    pub fn mean(&self) -> f64 {
        0.5 * self.m.trace()
    }

    /// `S(v)·v` for a 3D vector, using its tangential part.
    pub fn quad_form(&self, v: &Vec3) -> f64 {
        let s = self.frame.coords(v);
        (s.transpose() * self.m * s)[(0, 0)]
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.frame.tangent(&(self.m * self.frame.coords(v)))
    }

    /// Same operator in another basis of the same tangent plane.
    pub fn in_frame(&self, other: &TangentFrame) -> ShapeOperator2 {
        let r = self.frame.transfer(other);
        ShapeOperator2::new(*other, r * self.m * r.transpose())
    }

    /// `self - other`, expressed in `self`'s frame.
    pub fn minus(&self, other: &ShapeOperator2) -> ShapeOperator2 {
        let o = other.in_frame(&self.frame);
        ShapeOperator2::new(self.frame, self.m - o.m)
    }

    pub fn symmetry_error(&self) -> f64 {
        (self.m[(0, 1)] - self.m[(1, 0)]).abs()
    }
}

/// Unit directions from the foci to a surface point and derived quantities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitPairGeometry {
    pub q: Vec3,
    pub a: Vec3,
    pub a_prime: Vec3,
    pub dot: f64,
    pub cross: Vec3,
    pub lambda: f64,
    pub dist_p: f64,
    pub dist_p_prime: f64,
}

impl UnitPairGeometry {
    pub fn new(q: &Vec3, p: &Vec3, p_prime: &Vec3) -> Result<Self> {
        let dp = (q - p).norm();
        let dpp = (q - p_prime).norm();
        if !(dp > 0.0 && dpp > 0.0) {
            return Err(Error::Degenerate("surface point coincides with a focus".to_string()));
        }
        let a = (q - p) / dp;
        let a_prime = (q - p_prime) / dpp;
        Ok(Self {
            q: *q,
            a,
            a_prime,
            dot: a.dot(&a_prime),
            cross: a.cross(&a_prime),
            lambda: 1.0 / dp + 1.0 / dpp,
            dist_p: dp,
            dist_p_prime: dpp,
        })
    }

    /// `λ(q; p, p' + sA')`.
    pub fn shifted_lambda(&self, s: f64) -> f64 {
        1.0 / self.dist_p + 1.0 / (self.dist_p_prime - s)
    }

    pub fn broken_path(&self) -> f64 {
        self.dist_p + self.dist_p_prime
    }
}

/// Normal predicted by the reflection law, `-(A + A')/sqrt(2(1 + A·A'))`.
pub fn snell_normal(geo: &UnitPairGeometry) -> Result<Vec3> {
    let w = 2.0 * (1.0 + geo.dot);
    if !(w > 1e-12) {
        return Err(Error::Degenerate(
            "point lies on the segment between the foci".to_string(),
        ));
    }
    Ok(-(geo.a + geo.a_prime) / w.sqrt())
}

/// `|A + A' + sqrt(2(1 + A·A')) ν|`.
pub fn snell_residual(geo: &UnitPairGeometry, nu: &Vec3) -> f64 {
    let w = (2.0 * (1.0 + geo.dot)).max(0.0).sqrt();
    (geo.a + geo.a_prime + w * nu).norm()
}

/// Local graph `x = q + σ1 e1 + σ2 e2 + f(σ) ν` of a surface over its
/// tangent plane.
pub trait HeightChart {
    fn frame(&self) -> &TangentFrame;

    fn height(&self, sigma: [f64; 2]) -> f64;

    /// Length scale used for finite-difference steps.
    fn length_scale(&self) -> f64 {
        1.0
    }

    /// `∇²f(0)`. The default uses central differences with step
    /// `1e-4 × length_scale`.
    fn hessian_at_origin(&self) -> Mat2 {
        crate::numeric::fd_hessian_2d(|s| self.height(s), 1e-4 * self.length_scale())
    }
}

/// Hessian of `σ ↦ φ(x_q(σ); p, p')` at `σ = 0`, assembled from the
/// first and second derivatives of the distance functions along the chart.
pub fn hessian_phi_chart(
    q: &Vec3,
    tf: &TangentFrame,
    p: &Vec3,
    p_prime: &Vec3,
    chart: &dyn HeightChart,
) -> Result<Mat2> {
    let geo = UnitPairGeometry::new(q, p, p_prime)?;
    let sum = geo.a + geo.a_prime;
    let residual = sum.dot(&tf.e1).abs().max(sum.dot(&tf.e2).abs());
    if residual > 1e-6 {
        return Err(Error::NonStationary(residual));
    }
    let fh = chart.hessian_at_origin();
    let e = [tf.e1, tf.e2];
    let along_nu = geo.a.dot(&tf.nu) + geo.a_prime.dot(&tf.nu);
    let mut h = Mat2::zeros();
    for k in 0..2 {
        for j in 0..2 {
            let a_kj = geo.a.dot(&e[k]) * geo.a.dot(&e[j]) / geo.dist_p
                + geo.a_prime.dot(&e[k]) * geo.a_prime.dot(&e[j]) / geo.dist_p_prime
                - fh[(k, j)] * along_nu;
            h[(k, j)] = if k == j { geo.lambda } else { 0.0 } - a_kj;
        }
    }
    Ok(h)
}

/// Largest admissible focus shift, `min(η', (c - |p - p'|)/2)`.
pub fn max_shift(geo: &UnitPairGeometry, p: &Vec3, p_prime: &Vec3, eta_prime: f64) -> f64 {
    let c = geo.broken_path();
    eta_prime.min(0.5 * (c - (p - p_prime).norm()))
}

fn check_shift(s: f64, max: f64) -> Result<()> {
    if !(s >= 0.0 && s < max) {
        return Err(Error::ShiftOutOfRange { s, max });
    }
    Ok(())
}

/// `det(S_q(E_{c-s}(p, p' + sA')) - S_q(∂D))`, computed from the two shape
/// operators in a shared tangent basis.
pub fn det_shape_diff(
    q: &Vec3,
    obstacle_op: &ShapeOperator2,
    p: &Vec3,
    p_prime: &Vec3,
    s: f64,
    eta_prime: f64,
) -> Result<f64> {
    let geo = UnitPairGeometry::new(q, p, p_prime)?;
    check_shift(s, max_shift(&geo, p, p_prime, eta_prime))?;
    let frame = SpheroidFrame::new(*p, *p_prime, geo.broken_path())?.shifted(q, s)?;
    let spheroid = frame.shape_operator(q)?;
    Ok(spheroid.op.minus(obstacle_op).m.determinant())
}

/// Which coefficient multiplies the bistatic correction term
/// `S(A×A')·(A×A') / (1 + A·A')` in the closed-form determinant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionVariant {
    /// Coefficient 1/2.
    Half,
    /// Coefficient 1/4.
    Quarter,
}

impl CorrectionVariant {
    pub fn coefficient(self) -> f64 {
        match self {
            CorrectionVariant::Half => 0.5,
            CorrectionVariant::Quarter => 0.25,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CorrectionVariant::Half => "half",
            CorrectionVariant::Quarter => "quarter",
        }
    }
}

/// The variant that agrees with the direct determinant; fixed by the
/// `det_variant_resolution` test suite and used by every downstream solver.
pub const VALIDATED_VARIANT: CorrectionVariant = CorrectionVariant::Quarter;

/// `H - κ S(A×A')·(A×A') / (1 + A·A')`, the mean-curvature combination that
/// the shifted-focus system recovers.
pub fn curvature_combination(geo: &UnitPairGeometry, obstacle_op: &ShapeOperator2, variant: CorrectionVariant) -> f64 {
    obstacle_op.mean() - variant.coefficient() * obstacle_op.quad_form(&geo.cross) / (1.0 + geo.dot)
}

/// Closed form of [`det_shape_diff`] in terms of the obstacle's mean and
/// Gauss curvature and the bistatic correction term.
pub fn det_closed_form(
    geo: &UnitPairGeometry,
    obstacle_op: &ShapeOperator2,
    s: f64,
    eta_prime: f64,
    p: &Vec3,
    p_prime: &Vec3,
    variant: CorrectionVariant,
) -> Result<f64> {
    check_shift(s, max_shift(geo, p, p_prime, eta_prime))?;
    let lam = geo.shifted_lambda(s);
    let b = (2.0 / (1.0 + geo.dot)).sqrt();
    Ok(0.25 * lam * lam - b * lam * curvature_combination(geo, obstacle_op, variant) + obstacle_op.gauss())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s1() -> (Vec3, Vec3, Vec3) {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        (Vec3::new(4.0, 0.0, 0.0), Vec3::new(0.0, 4.0, 0.0), Vec3::new(h, h, 0.0))
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn broken_path_examples() {
        let (p, pp, q) = s1();
        assert!(close(broken_path_length(&p, &p, &pp), (p - pp).norm(), 1e-15));
        let x = Vec3::new(1.0, -2.0, 0.5);
        assert!(close(broken_path_length(&x, &p, &p), 2.0 * (x - p).norm(), 1e-14));
        assert!(close(broken_path_length(&q, &p, &pp), 6.735917, 1e-6));
    }

    #[test]
    fn spheroid_rejects_small_c() {
        let (p, pp, _) = s1();
        assert!(SpheroidFrame::new(p, pp, (p - pp).norm()).is_err());
        assert!(SpheroidFrame::new(p, pp, 1.0).is_err());
    }

    #[test]
    fn radial_map_examples() {
        let p = Vec3::new(1.0, 2.0, 3.0);
        let f = SpheroidFrame::new(p, p, 3.0).unwrap();
        assert!(close(f.radial(&Vec3::new(0.3, -0.2, 0.9)), 1.5, 1e-15));
        let pt = f.point(&Vec3::z());
        assert!((pt - (p + Vec3::new(0.0, 0.0, 1.5))).norm() < 1e-15);

        let (p, pp, q) = s1();
        let c = broken_path_length(&q, &p, &pp);
        let f = SpheroidFrame::new(p, pp, c).unwrap();
        let axis = (p - pp).normalize();
        assert!(close(f.radial(&axis), 0.5 * (c + (p - pp).norm()), 1e-12));
        let w = (q - pp).normalize();
        assert!(close(f.radial(&w), (q - pp).norm(), 1e-12));
        assert!(close(f.radial(&w), 3.367959, 1e-6));
        assert!((f.point(&w) - q).norm() < 1e-10);
    }

    #[test]
    fn inward_normal_examples() {
        let p = Vec3::new(0.5, 0.0, -1.0);
        let f = SpheroidFrame::new(p, p, 2.0).unwrap();
        let x = f.point(&Vec3::new(1.0, 1.0, 0.0));
        let n = f.inward_normal(&x).unwrap();
        assert!((n + (x - p).normalize()).norm() < 1e-14);

        let (p, pp, q) = s1();
        let f = SpheroidFrame::new(p, pp, broken_path_length(&q, &p, &pp)).unwrap();
        let n = f.inward_normal(&q).unwrap();
        assert!((n - Vec3::new(1.0, 1.0, 0.0).normalize()).norm() < 1e-12);

        // Major-axis vertex beyond p.
        let axis = (p - pp).normalize();
        let v = f.point(&axis);
        let n = f.inward_normal(&v).unwrap();
        assert!((n + axis).norm() < 1e-12);
        // Moving inward lowers the level.
        assert!(f.level(&(q + 1e-6 * f.inward_normal(&q).unwrap())) < 0.0);
    }

    #[test]
    fn spheroid_curvature_examples() {
        let p = Vec3::new(0.0, 0.0, 0.0);
        let f = SpheroidFrame::new(p, p, 3.0).unwrap();
        let sc = f.shape_operator(&f.point(&Vec3::x())).unwrap();
        assert!(close(sc.k1, 2.0 / 3.0, 1e-14));
        assert!(close(sc.k2, 2.0 / 3.0, 1e-14));
        assert!(close(sc.gauss, 4.0 / 9.0, 1e-14));
        assert!(close(sc.mean, 2.0 / 3.0, 1e-14));

        let (p, pp, q) = s1();
        let f = SpheroidFrame::new(p, pp, broken_path_length(&q, &p, &pp)).unwrap();
        let sc = f.shape_operator(&q).unwrap();
        assert!(close(sc.k1, 0.546918, 1e-6), "k1 = {}", sc.k1);
        assert!(close(sc.k2, 0.161192, 1e-6), "k2 = {}", sc.k2);
        let (e1, e2, v1, v2) = sc.op.principal();
        assert!(close(e1, sc.k1, 1e-12) && close(e2, sc.k2, 1e-12));
        let a = (q - p).normalize();
        let ap = (q - pp).normalize();
        assert!(v1.cross(&a.cross(&ap)).norm() < 1e-10);
        assert!(v2.cross(&(a - ap)).norm() < 1e-10);
    }

    #[test]
    fn snell_normal_examples() {
        let (p, pp, q) = s1();
        let geo = UnitPairGeometry::new(&q, &p, &pp).unwrap();
        let n = snell_normal(&geo).unwrap();
        assert!((n - Vec3::new(1.0, 1.0, 0.0).normalize()).norm() < 1e-12);
        assert!(close(geo.dot, -0.410543, 1e-6));
        assert!(close(geo.lambda, 0.593832, 1e-6));
        let expect = -((1.0 + geo.dot) / 2.0).sqrt();
        assert!(close(geo.a.dot(&n), expect, 1e-12));
        assert!(close(geo.a_prime.dot(&n), expect, 1e-12));

        // A = A' (p = p').
        let geo = UnitPairGeometry::new(&q, &p, &p).unwrap();
        assert!((snell_normal(&geo).unwrap() + geo.a).norm() < 1e-14);

        // Perpendicular pair.
        let q0 = Vec3::zeros();
        let geo = UnitPairGeometry::new(&q0, &Vec3::new(-1.0, 0.0, 0.0), &Vec3::new(0.0, -1.0, 0.0)).unwrap();
        let n = snell_normal(&geo).unwrap();
        assert!((n + (geo.a + geo.a_prime) / 2f64.sqrt()).norm() < 1e-14);

        // On the focal segment.
        let geo = UnitPairGeometry::new(&q0, &Vec3::new(-1.0, 0.0, 0.0), &Vec3::new(2.0, 0.0, 0.0)).unwrap();
        assert!(snell_normal(&geo).is_err());
    }

    #[test]
    fn frame_is_right_handed() {
        let f = TangentFrame::new(Vec3::zeros(), Vec3::new(0.2, -0.7, 0.3), None);
        assert!(f.orthonormality_error() < 1e-14);
        let f = TangentFrame::new(Vec3::zeros(), Vec3::z(), Some(Vec3::new(1.0, 1.0, 5.0)));
        assert!((f.e1 - Vec3::new(1.0, 1.0, 0.0).normalize()).norm() < 1e-14);
        assert!(f.orthonormality_error() < 1e-14);
    }

    #[test]
    fn operator_frame_change_preserves_invariants() {
        let f1 = TangentFrame::new(Vec3::zeros(), Vec3::z(), None);
        let f2 = TangentFrame::new(Vec3::zeros(), Vec3::z(), Some(Vec3::new(0.3, 0.8, 0.0)));
        let op = ShapeOperator2::new(f1, Mat2::new(-1.0, 0.3, 0.3, -0.2));
        let moved = op.in_frame(&f2);
        assert!(close(moved.gauss(), op.gauss(), 1e-14));
        assert!(close(moved.mean(), op.mean(), 1e-14));
        let v = Vec3::new(0.4, -1.1, 0.0);
        assert!(close(moved.quad_form(&v), op.quad_form(&v), 1e-14));
    }

    fn unit_sphere_op(q: &Vec3) -> ShapeOperator2 {
        ShapeOperator2::new(TangentFrame::new(*q, q.normalize(), None), -Mat2::identity())
    }

    #[test]
    fn det_shape_diff_s1() {
        let (p, pp, q) = s1();
        let d = det_shape_diff(&q, &unit_sphere_op(&q), &p, &pp, 0.0, 0.5).unwrap();
        assert!(close(d, 1.796269, 1e-6), "det = {d}");
        let f = SpheroidFrame::new(p, pp, broken_path_length(&q, &p, &pp)).unwrap();
        let sc = f.shape_operator(&q).unwrap();
        assert!(close(d, (sc.k1 + 1.0) * (sc.k2 + 1.0), 1e-12));
        assert!(det_shape_diff(&q, &unit_sphere_op(&q), &p, &pp, 0.5, 0.5).is_err());
        assert!(det_shape_diff(&q, &unit_sphere_op(&q), &p, &pp, -0.1, 0.5).is_err());
    }

    #[test]
    fn det_shape_diff_is_increasing_and_continuous_in_shift() {
        let (p, pp, q) = s1();
        let op = unit_sphere_op(&q);
        let d0 = det_shape_diff(&q, &op, &p, &pp, 0.0, 0.5).unwrap();
        let mut prev = d0;
        for s in [1e-3, 1e-2, 0.1, 0.2, 0.3, 0.45] {
            let d = det_shape_diff(&q, &op, &p, &pp, s, 0.5).unwrap();
            assert!(d > prev);
            prev = d;
        }
        let d3 = det_shape_diff(&q, &op, &p, &pp, 1e-3, 0.5).unwrap();
        let d2 = det_shape_diff(&q, &op, &p, &pp, 1e-2, 0.5).unwrap();
        assert!((d3 - d0).abs() <= 0.2 * 1e-3);
        assert!((d2 - d0).abs() <= 0.2 * 1e-2);
    }

    #[test]
    fn det_shape_diff_monostatic_sphere() {
        let d = 3.0;
        let p = Vec3::new(d, 0.0, 0.0);
        let q = Vec3::new(1.0, 0.0, 0.0);
        let det = det_shape_diff(&q, &unit_sphere_op(&q), &p, &p, 0.0, 0.5).unwrap();
        // Distance from focus to reflection point is d - R = 2.
        let mu = 1.0 / (d - 1.0);
        assert!(close(det, (mu + 1.0) * (mu + 1.0), 1e-12));
    }

    #[test]
    fn det_variants_on_s1() {
        let (p, pp, q) = s1();
        let geo = UnitPairGeometry::new(&q, &p, &pp).unwrap();
        let op = unit_sphere_op(&q);
        let r = det_closed_form(&geo, &op, 0.0, 0.5, &p, &pp, CorrectionVariant::Quarter).unwrap();
        let pr = det_closed_form(&geo, &op, 0.0, 0.5, &p, &pp, CorrectionVariant::Half).unwrap();
        assert!(close(r, 1.796269, 1e-6), "quarter {r}");
        assert!(close(pr, 1.410543, 1e-6), "half {pr}");
    }

    #[test]
    fn det_variants_agree_without_bistatic_correction() {
        let p = Vec3::new(3.0, 0.0, 0.0);
        let q = Vec3::new(1.0, 0.0, 0.0);
        let geo = UnitPairGeometry::new(&q, &p, &p).unwrap();
        let op = unit_sphere_op(&q);
        let a = det_closed_form(&geo, &op, 0.0, 0.5, &p, &p, CorrectionVariant::Half).unwrap();
        let b = det_closed_form(&geo, &op, 0.0, 0.5, &p, &p, CorrectionVariant::Quarter).unwrap();
        assert!(close(a, b, 1e-15));
        assert!(close(a, (0.5 * geo.lambda + 1.0).powi(2), 1e-14));
    }

    #[test]
    fn det_constant_term_is_gauss_curvature() {
        // With λ' -> 0 the closed form collapses to K; check the linear structure
        // by evaluating the polynomial in λ' directly.
        let q = Vec3::zeros();
        let frame = TangentFrame::new(q, Vec3::z(), None);
        let op = ShapeOperator2::new(frame, Mat2::new(-0.7, 0.2, 0.2, -0.3));
        let p = Vec3::new(-3.0, 0.0, 4.0);
        let pp = Vec3::new(3.0, 0.0, 4.0);
        let geo = UnitPairGeometry::new(&q, &p, &pp).unwrap();
        for v in [CorrectionVariant::Half, CorrectionVariant::Quarter] {
            let lam = geo.lambda;
            let d = det_closed_form(&geo, &op, 0.0, 0.5, &p, &pp, v).unwrap();
            let b = (2.0 / (1.0 + geo.dot)).sqrt();
            let lin = -b * lam * curvature_combination(&geo, &op, v);
            assert!(close(d - 0.25 * lam * lam - lin, op.gauss(), 1e-14));
        }
    }
}
