//! Obstacle shapes and the first reflector of a source/receiver pair.

mod ellipsoid;
mod icosphere;
mod mesh;
mod minimize;

use std::sync::Arc;

pub use ellipsoid::{Ellipsoid, EllipsoidChart};
pub use icosphere::{icosphere, Icosphere};
pub use mesh::TriMesh;
pub use minimize::{
    c_d_constants, first_reflector, hull_clearance, hull_clearance_at_level, min_broken_path, min_broken_path_with,
    min_over_triple_surfaces, minimize_on_surface, t_thresholds, CdConstants, MinimizerOptions, Reflector,
    ReflectorSet, Thresholds, TripleMinimum,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{ShapeOperator2, TangentFrame, Vec3};

/// Source or receiver region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec3,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec3, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        (x - self.center).norm() <= self.radius
    }

    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * std::f64::consts::PI * self.radius.powi(3)
    }

    pub fn disjoint(&self, other: &Ball) -> bool {
        (self.center - other.center).norm() > self.radius + other.radius
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObstacleKind {
    Sphere,
    Ellipsoid,
    Mesh,
    Union,
}

/// A sound-soft obstacle. Union members must be pairwise disjoint.
#[derive(Clone, Debug)]
pub enum ObstacleShape {
    Ellipsoid(Ellipsoid),
    Mesh(Arc<TriMesh>),
    Union(Vec<ObstacleShape>),
}

/// Shape operator at a surface point together with its invariants.
#[derive(Clone, Copy, Debug)]
pub struct ShapeReport {
    pub op: ShapeOperator2,
    pub gauss: f64,
    pub mean: f64,
    pub frame: TangentFrame,
}

impl ObstacleShape {
    pub fn sphere(center: Vec3, radius: f64) -> Result<Self> {
        Ok(Self::Ellipsoid(Ellipsoid::sphere(center, radius)?))
    }

    pub fn mesh(mesh: TriMesh) -> Self {
        Self::Mesh(Arc::new(mesh))
    }

    pub fn kind(&self) -> ObstacleKind {
        match self {
            Self::Ellipsoid(e) if e.is_sphere() => ObstacleKind::Sphere,
            Self::Ellipsoid(_) => ObstacleKind::Ellipsoid,
            Self::Mesh(_) => ObstacleKind::Mesh,
            Self::Union(_) => ObstacleKind::Union,
        }
    }

    /// Non-union components.
    pub fn leaves(&self) -> Vec<&ObstacleShape> {
        match self {
            Self::Union(parts) => parts.iter().flat_map(|p| p.leaves()).collect(),
            leaf => vec![leaf],
        }
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        match self {
            Self::Ellipsoid(e) => e.contains(x),
            Self::Mesh(m) => m.contains(x),
            Self::Union(parts) => parts.iter().any(|p| p.contains(x)),
        }
    }

    /// Sorted, merged inside intervals of the line `o + t d`.
    pub fn line_intervals(&self, o: &Vec3, d: &Vec3) -> Vec<(f64, f64)> {
        let mut iv: Vec<(f64, f64)> = match self {
            Self::Ellipsoid(e) => e.line_interval(o, d).into_iter().collect(),
            Self::Mesh(m) => m.line_intervals(o, d),
            Self::Union(parts) => parts.iter().flat_map(|p| p.line_intervals(o, d)).collect(),
        };
        iv.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(iv.len());
        for (a, b) in iv {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        merged
    }

    /// Whether the closed segment `[a, b]` meets the closed obstacle.
    pub fn segment_hits(&self, a: &Vec3, b: &Vec3) -> bool {
        self.line_intervals(a, &(b - a))
            .iter()
            .any(|&(t0, t1)| t1 >= 0.0 && t0 <= 1.0)
    }

    pub fn bounding_box(&self) -> (Vec3, Vec3) {
        match self {
            Self::Ellipsoid(e) => {
                let h = e.half_extents();
                (e.center - h, e.center + h)
            }
            Self::Mesh(m) => m.bounding_box(),
            Self::Union(parts) => parts.iter().map(|p| p.bounding_box()).fold(
                (Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY)),
                |(lo, hi), (a, b)| (lo.inf(&a), hi.sup(&b)),
            ),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Self::Ellipsoid(e) => 2.0 * e.max_semi_axis(),
            _ => {
                let (lo, hi) = self.bounding_box();
                (hi - lo).norm()
            }
        }
    }

    /// Leaf whose surface is closest to `x`.
    pub fn leaf_near(&self, x: &Vec3) -> &ObstacleShape {
        match self {
            Self::Union(parts) => parts
                .iter()
                .map(|p| p.leaf_near(x))
                .min_by(|a, b| (a.project(x) - x).norm().total_cmp(&(b.project(x) - x).norm()))
                .expect("union has at least one part"),
            leaf => leaf,
        }
    }

    /// Nearby surface point.
    pub fn project(&self, x: &Vec3) -> Vec3 {
        match self {
            Self::Ellipsoid(e) => e.project(x),
            Self::Mesh(m) => m.closest_point(x).0,
            Self::Union(_) => self.leaf_near(x).project(x),
        }
    }

    /// Outward unit normal at (the projection of) `x`.
    pub fn normal(&self, x: &Vec3) -> Vec3 {
        match self {
            Self::Ellipsoid(e) => e.normal(&e.project(x)),
            Self::Mesh(m) => m.normal(x),
            Self::Union(_) => self.leaf_near(x).normal(x),
        }
    }

    /// Shape operator in the outward-normal height chart (a convex obstacle
    /// gives a negative semidefinite operator). `hint` orients `e1`.
    pub fn shape_operator_at(&self, q: &Vec3, hint: Option<Vec3>) -> Result<ShapeReport> {
        let op = match self.leaf_near(q) {
            Self::Ellipsoid(e) => e.shape_operator(&e.project(q), hint),
            Self::Mesh(m) => m.shape_operator(q, hint)?,
            Self::Union(_) => unreachable!("leaf_near returns a leaf"),
        };
        Ok(ShapeReport {
            gauss: op.gauss(),
            mean: op.mean(),
            frame: op.frame,
            op,
        })
    }

    /// Surface points with outward normals: icosphere parameters for analytic
    /// components, vertices for meshes.
    pub fn surface_samples(&self, level: usize) -> Vec<(Vec3, Vec3)> {
        match self {
            Self::Ellipsoid(e) => icosphere(level)
                .vertices
                .iter()
                .map(|u| (e.point(u), e.normal_param(u)))
                .collect(),
            Self::Mesh(m) => (0..m.vertices.len())
                .map(|i| (m.vertices[i], m.vertex_normal(i)))
                .collect(),
            Self::Union(parts) => parts.iter().flat_map(|p| p.surface_samples(level)).collect(),
        }
    }

    /// Characteristic spacing of [`ObstacleShape::surface_samples`].
    pub fn sample_spacing(&self, level: usize) -> f64 {
        match self {
            Self::Ellipsoid(e) => icosphere(level).spacing() * e.max_semi_axis(),
            Self::Mesh(m) => m.h_mesh(),
            Self::Union(parts) => parts.iter().map(|p| p.sample_spacing(level)).fold(0.0, f64::max),
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Self::Ellipsoid(e) => e.volume(),
            Self::Mesh(m) => m.signed_volume(),
            Self::Union(parts) => parts.iter().map(|p| p.volume()).sum(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn union_intervals_merge() {
        let u = ObstacleShape::Union(vec![
            ObstacleShape::sphere(Vec3::new(-2.0, 0.0, 0.0), 1.0).unwrap(),
            ObstacleShape::sphere(Vec3::new(2.0, 0.0, 0.0), 1.0).unwrap(),
        ]);
        let iv = u.line_intervals(&Vec3::new(-5.0, 0.0, 0.0), &Vec3::x());
        assert_eq!(iv.len(), 2);
        assert!((iv[0].0 - 2.0).abs() < 1e-14 && (iv[1].1 - 8.0).abs() < 1e-14);
        assert!(u.segment_hits(&Vec3::new(-5.0, 0.0, 0.0), &Vec3::new(0.0, 0.0, 0.0)));
        assert!(!u.segment_hits(&Vec3::new(0.0, 0.0, 0.0), &Vec3::new(0.0, 5.0, 0.0)));
        assert_eq!(u.kind(), ObstacleKind::Union);
        assert_eq!(u.leaves().len(), 2);
        let n = u.normal(&Vec3::new(3.0, 0.0, 0.0));
        assert!((n - Vec3::x()).norm() < 1e-14);
    }

    #[test]
    fn ball_checks() {
        assert!(Ball::new(Vec3::zeros(), 0.0).is_err());
        let a = Ball::new(Vec3::zeros(), 1.0).unwrap();
        let b = Ball::new(Vec3::new(2.5, 0.0, 0.0), 1.0).unwrap();
        assert!(a.disjoint(&b));
        assert!(!a.disjoint(&Ball::new(Vec3::new(1.5, 0.0, 0.0), 1.0).unwrap()));
    }
}
