use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{HeightChart, Mat2, ShapeOperator2, TangentFrame, Vec3};

/// Ellipsoid `{x : |diag(1/a) Rᵀ (x - center)| ≤ 1}`; the columns of `rotation`
/// are the body axes in world coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ellipsoid {
    pub center: Vec3,
    pub semi_axes: Vec3,
    pub rotation: Matrix3<f64>,
}

impl Ellipsoid {
    pub fn new(center: Vec3, semi_axes: Vec3, rotation: Matrix3<f64>) -> Result<Self> {
        if semi_axes.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ellipsoid semi-axes must be positive, got {semi_axes:?}"
            )));
        }
        let orth = (rotation.transpose() * rotation - Matrix3::identity()).norm();
        if orth > 1e-9 || rotation.determinant() < 0.0 {
            return Err(Error::InvalidParameter(
                "ellipsoid rotation must be a proper orthogonal matrix".to_string(),
            ));
        }
        Ok(Self {
            center,
            semi_axes,
            rotation,
        })
    }

    pub fn sphere(center: Vec3, radius: f64) -> Result<Self> {
        Self::new(center, Vec3::repeat(radius), Matrix3::identity())
    }

    pub fn is_sphere(&self) -> bool {
        let a = self.semi_axes;
        a.x == a.y && a.y == a.z
    }

    pub fn body(&self, x: &Vec3) -> Vec3 {
        self.rotation.transpose() * (x - self.center)
    }

    /// `|y/a|² - 1` in body coordinates; negative inside.
    pub fn level(&self, x: &Vec3) -> f64 {
        self.body(x).component_div(&self.semi_axes).norm_squared() - 1.0
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        self.level(x) <= 0.0
    }

    /// Surface point for a unit vector `u` of the parameter sphere.
    pub fn point(&self, u: &Vec3) -> Vec3 {
        self.center + self.rotation * self.semi_axes.component_mul(u)
    }

    /// Parameter of a surface point (inverse of [`Ellipsoid::point`]).
    pub fn param_of(&self, x: &Vec3) -> Vec3 {
        self.body(x).component_div(&self.semi_axes).normalize()
    }

    pub fn normal_param(&self, u: &Vec3) -> Vec3 {
        (self.rotation * u.component_div(&self.semi_axes)).normalize()
    }

    /// Outward unit normal of the level set through `x`.
    pub fn normal(&self, x: &Vec3) -> Vec3 {
        let a2 = self.semi_axes.component_mul(&self.semi_axes);
        (self.rotation * self.body(x).component_div(&a2)).normalize()
    }

    /// Surface area element per unit solid angle of the parameter sphere.
    pub fn area_factor(&self, u: &Vec3) -> f64 {
        let a = self.semi_axes;
        a.x * a.y * a.z * u.component_div(&a).norm()
    }

    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * std::f64::consts::PI * self.semi_axes.product()
    }

    pub fn max_semi_axis(&self) -> f64 {
        self.semi_axes.max()
    }

    /// World-axis half extents of the bounding box.
    pub fn half_extents(&self) -> Vec3 {
        let mut h = Vec3::zeros();
        for i in 0..3 {
            let mut s = 0.0;
            for j in 0..3 {
                s += (self.rotation[(i, j)] * self.semi_axes[j]).powi(2);
            }
            h[i] = s.sqrt();
        }
        h
    }

    /// Parameter interval `[t0, t1]` where `o + t d` lies inside.
    pub fn line_interval(&self, o: &Vec3, d: &Vec3) -> Option<(f64, f64)> {
        let y = self.body(o).component_div(&self.semi_axes);
        let m = (self.rotation.transpose() * d).component_div(&self.semi_axes);
        let a = m.norm_squared();
        let b = y.dot(&m);
        let c = y.norm_squared() - 1.0;
        let disc = b * b - a * c;
        if a == 0.0 || disc < 0.0 {
            return None;
        }
        let r = disc.sqrt();
        Some(((-b - r) / a, (-b + r) / a))
    }

    /// Pulls a nearby point onto the surface along the level-set gradient.
    pub fn project(&self, x: &Vec3) -> Vec3 {
        let a2 = self.semi_axes.component_mul(&self.semi_axes);
        let mut p = *x;
        for _ in 0..50 {
            let y = self.body(&p);
            let g = self.rotation * (2.0 * y.component_div(&a2));
            let f = self.level(&p);
            let step = f / g.norm_squared() * g;
            p -= step;
            if step.norm() < 1e-15 * self.max_semi_axis() {
                break;
            }
        }
        p
    }

    pub fn frame(&self, q: &Vec3, hint: Option<Vec3>) -> TangentFrame {
        TangentFrame::new(*q, self.normal(q), hint)
    }

    /// Closed-form second fundamental form in the outward height chart:
    /// `f_ij = -e_iᵀ Q e_j / |Q y|` with `Q = R diag(1/a²) Rᵀ`.
    pub fn shape_operator(&self, q: &Vec3, hint: Option<Vec3>) -> ShapeOperator2 {
        let frame = self.frame(q, hint);
        let a2 = self.semi_axes.component_mul(&self.semi_axes);
        let q_mat = self.rotation * Matrix3::from_diagonal(&a2.map(|v| 1.0 / v)) * self.rotation.transpose();
        let grad = (q_mat * (q - self.center)).norm();
        let e = [frame.e1, frame.e2];
        let mut m = Mat2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j)] = -e[i].dot(&(q_mat * e[j])) / grad;
            }
        }
        if self.is_sphere() {
            m = -Mat2::identity() / self.semi_axes.x;
        }
        ShapeOperator2::new(frame, m)
    }

    pub fn chart(&self, q: &Vec3, hint: Option<Vec3>) -> EllipsoidChart {
        EllipsoidChart {
            ellipsoid: *self,
            frame: self.frame(q, hint),
        }
    }
}

/// Exact outward height function of an ellipsoid over a tangent plane.
#[derive(Clone, Copy, Debug)]
pub struct EllipsoidChart {
    pub ellipsoid: Ellipsoid,
    pub frame: TangentFrame,
}

impl HeightChart for EllipsoidChart {
    fn frame(&self) -> &TangentFrame {
        &self.frame
    }

    fn height(&self, sigma: [f64; 2]) -> f64 {
        let e = &self.ellipsoid;
        let b = self.frame.chart_point(sigma, 0.0);
        let y = e.body(&b).component_div(&e.semi_axes);
        let m = (e.rotation.transpose() * self.frame.nu).component_div(&e.semi_axes);
        let a = m.norm_squared();
        let bb = y.dot(&m);
        let c = y.norm_squared() - 1.0;
        let disc = (bb * bb - a * c).max(0.0);
        // Root of smaller magnitude, in cancellation-free form.
        let denom = bb + bb.signum() * disc.sqrt();
        if denom == 0.0 {
            0.0
        } else {
            -c / denom
        }
    }

    fn length_scale(&self) -> f64 {
        self.ellipsoid.semi_axes.min()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Rotation3;

    #[test]
    fn sphere_curvature() {
        let s = Ellipsoid::sphere(Vec3::zeros(), 1.0).unwrap();
        let q = Vec3::new(0.0, 0.6, 0.8);
        let op = s.shape_operator(&q, None);
        assert!((op.gauss() - 1.0).abs() < 1e-15);
        assert!((op.mean() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn ellipsoid_tip_curvature() {
        let e = Ellipsoid::new(Vec3::zeros(), Vec3::new(2.0, 1.0, 1.0), Matrix3::identity()).unwrap();
        let q = Vec3::new(2.0, 0.0, 0.0);
        let op = e.shape_operator(&q, None);
        assert!((op.gauss() - 4.0).abs() < 1e-12);
        assert!((op.mean() + 2.0).abs() < 1e-12);
    }

    #[test]
    fn chart_matches_closed_form_hessian() {
        let rot = Rotation3::from_euler_angles(0.3, -0.7, 1.1).into_inner();
        let e = Ellipsoid::new(Vec3::new(0.2, -0.1, 0.4), Vec3::new(1.5, 1.0, 0.7), rot).unwrap();
        for u in [Vec3::new(0.3, 0.4, 0.8), Vec3::new(-0.9, 0.1, 0.2)] {
            let q = e.point(&u.normalize());
            let op = e.shape_operator(&q, None);
            let chart = e.chart(&q, None);
            assert!(chart.height([0.0, 0.0]).abs() < 1e-14);
            let h = chart.hessian_at_origin();
            assert!((h - op.m).norm() < 1e-6 * op.m.norm());
            let x = chart.frame.chart_point([0.05, -0.03], chart.height([0.05, -0.03]));
            assert!(e.level(&x).abs() < 1e-13);
        }
    }

    #[test]
    fn line_interval_and_projection() {
        let e = Ellipsoid::new(Vec3::zeros(), Vec3::new(2.0, 1.0, 1.0), Matrix3::identity()).unwrap();
        let (t0, t1) = e.line_interval(&Vec3::new(-5.0, 0.0, 0.0), &Vec3::x()).unwrap();
        assert!((t0 - 3.0).abs() < 1e-14 && (t1 - 7.0).abs() < 1e-14);
        assert!(e.line_interval(&Vec3::new(0.0, 2.0, 0.0), &Vec3::x()).is_none());
        let p = e.project(&Vec3::new(1.0, 0.9, 0.1));
        assert!(e.level(&p).abs() < 1e-14);
        assert!((e.half_extents() - Vec3::new(2.0, 1.0, 1.0)).norm() < 1e-15);
    }
}
