use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::{Mat2, ShapeOperator2, TangentFrame, Vec3};
use crate::numeric::least_squares;

use super::ellipsoid::Ellipsoid;
use super::icosphere::{build_adjacency, Icosphere};

/// Closed, consistently wound triangle surface.
#[derive(Clone, Debug)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
    offsets: Vec<u32>,
    adjacency: Vec<u32>,
    vertex_normals: Vec<Vec3>,
    h_mesh: f64,
}

impl TriMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        if triangles.len() < 4 {
            return Err(Error::InvalidParameter("mesh needs at least 4 triangles".into()));
        }
        let n = vertices.len();
        let mut directed: HashMap<(u32, u32), u32> = HashMap::new();
        for t in &triangles {
            if t.iter().any(|&i| i as usize >= n) {
                return Err(Error::InvalidParameter("triangle index out of range".into()));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::InvalidParameter("degenerate triangle".into()));
            }
            for k in 0..3 {
                *directed.entry((t[k], t[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        for (&(a, b), &count) in &directed {
            if count != 1 || directed.get(&(b, a)) != Some(&1) {
                return Err(Error::InvalidParameter(format!(
                    "mesh is not watertight with consistent winding at edge ({}, {})",
                    a + 1,
                    b + 1
                )));
            }
        }
        let (offsets, adjacency) = build_adjacency(n, &triangles);
        let mut vertex_normals = vec![Vec3::zeros(); n];
        let mut edge_sum = 0.0;
        for t in &triangles {
            let [a, b, c] = t.map(|i| vertices[i as usize]);
            let w = (b - a).cross(&(c - a));
            for &i in t {
                vertex_normals[i as usize] += w;
            }
            edge_sum += (b - a).norm() + (c - b).norm() + (a - c).norm();
        }
        for v in &mut vertex_normals {
            *v = v.normalize();
        }
        let mesh = Self {
            vertices,
            h_mesh: edge_sum / (3.0 * triangles.len() as f64),
            triangles,
            offsets,
            adjacency,
            vertex_normals,
        };
        if !(mesh.signed_volume() > 0.0) {
            return Err(Error::InvalidParameter(
                "mesh encloses non-positive signed volume (inward winding?)".into(),
            ));
        }
        Ok(mesh)
    }

    /// Parses `v x y z` / `f i j k` lines (1-based indices). Other lines
    /// starting with `#` or blank are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let tag = it.next().unwrap_or("");
            let rest: Vec<&str> = it.collect();
            let bad = |what: &str| Error::Parse(format!("line {}: {what}: `{line}`", lineno + 1));
            match tag {
                "v" => {
                    if rest.len() != 3 {
                        return Err(bad("expected three coordinates"));
                    }
                    let c: std::result::Result<Vec<f64>, _> = rest.iter().map(|s| s.parse()).collect();
                    let c = c.map_err(|_| bad("invalid coordinate"))?;
                    vertices.push(Vec3::new(c[0], c[1], c[2]));
                }
                "f" => {
                    if rest.len() != 3 {
                        return Err(bad("expected three indices"));
                    }
                    let mut t = [0u32; 3];
                    for (k, s) in rest.iter().enumerate() {
                        let i: u32 = s.parse().map_err(|_| bad("invalid index"))?;
                        if i == 0 {
                            return Err(bad("indices are 1-based"));
                        }
                        t[k] = i - 1;
                    }
                    triangles.push(t);
                }
                _ => return Err(bad("unknown record")),
            }
        }
        Self::new(vertices, triangles)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for v in &self.vertices {
            s.push_str(&format!("v {} {} {}\n", v.x, v.y, v.z));
        }
        for t in &self.triangles {
            s.push_str(&format!("f {} {} {}\n", t[0] + 1, t[1] + 1, t[2] + 1));
        }
        s
    }

    /// Triangulation of an ellipsoid through an icosphere of the given level.
    pub fn from_ellipsoid(e: &Ellipsoid, level: usize) -> Self {
        let ico = Icosphere::build(level);
        let vertices = ico.vertices.iter().map(|u| e.point(u)).collect();
        Self::new(vertices, ico.triangles.clone()).expect("icosphere triangulation is valid")
    }

    pub fn h_mesh(&self) -> f64 {
        self.h_mesh
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.adjacency[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    pub fn triangle(&self, i: usize) -> [Vec3; 3] {
        self.triangles[i].map(|k| self.vertices[k as usize])
    }

    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i as usize]);
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    pub fn centroid(&self) -> Vec3 {
        self.vertices.iter().sum::<Vec3>() / self.vertices.len() as f64
    }

    pub fn bounding_box(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    pub fn vertex_normal(&self, i: usize) -> Vec3 {
        self.vertex_normals[i]
    }

    /// Sorted ray parameters where `o + t d` crosses the surface.
    pub fn crossings(&self, o: &Vec3, d: &Vec3) -> Vec<f64> {
        let mut ts: Vec<f64> = self
            .triangles
            .iter()
            .filter_map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i as usize]);
                ray_triangle(o, d, &a, &b, &c)
            })
            .collect();
        ts.sort_by(f64::total_cmp);
        ts
    }

    /// Inside intervals of the line `o + t d`.
    pub fn line_intervals(&self, o: &Vec3, d: &Vec3) -> Vec<(f64, f64)> {
        self.crossings(o, d).chunks_exact(2).map(|c| (c[0], c[1])).collect()
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        // Direction chosen to avoid alignment with typical mesh edges.
        let d = Vec3::new(0.5773, 0.5774, 0.577_35).normalize();
        self.crossings(x, &d).iter().filter(|&&t| t > 0.0).count() % 2 == 1
    }

    /// Closest surface point, its triangle and barycentric coordinates.
    pub fn closest_point(&self, x: &Vec3) -> (Vec3, usize, [f64; 3]) {
        let mut best = (f64::INFINITY, Vec3::zeros(), 0, [0.0; 3]);
        for (i, t) in self.triangles.iter().enumerate() {
            let [a, b, c] = t.map(|k| self.vertices[k as usize]);
            let (p, bary) = closest_on_triangle(x, &a, &b, &c);
            let d = (p - x).norm_squared();
            if d < best.0 {
                best = (d, p, i, bary);
            }
        }
        (best.1, best.2, best.3)
    }

    /// Interpolated vertex normal at the closest surface point.
    pub fn normal(&self, x: &Vec3) -> Vec3 {
        let (_, tri, bary) = self.closest_point(x);
        let t = self.triangles[tri];
        (0..3)
            .map(|k| bary[k] * self.vertex_normals[t[k] as usize])
            .sum::<Vec3>()
            .normalize()
    }

    /// Least-squares quadric fit of the surface around `q` over two vertex
    /// rings.
    pub fn shape_operator(&self, q: &Vec3, hint: Option<Vec3>) -> Result<ShapeOperator2> {
        let (foot, tri, _) = self.closest_point(q);
        let mut ring: Vec<usize> = self.triangles[tri].iter().map(|&i| i as usize).collect();
        for _ in 0..2 {
            let mut next = ring.clone();
            for &v in &ring {
                for &w in self.neighbors(v) {
                    if !next.contains(&(w as usize)) {
                        next.push(w as usize);
                    }
                }
            }
            ring = next;
        }
        let fit = |frame: &TangentFrame| -> Result<Vec<f64>> {
            let mut rows = Vec::with_capacity(ring.len());
            let mut rhs = Vec::with_capacity(ring.len());
            for &v in &ring {
                let d = self.vertices[v] - foot;
                let (s, t) = (d.dot(&frame.e1), d.dot(&frame.e2));
                rows.push(vec![0.5 * s * s, s * t, 0.5 * t * t, s, t, 1.0]);
                rhs.push(d.dot(&frame.nu));
            }
            let usable = rows
                .iter()
                .filter(|r| r[3].abs() + r[4].abs() > 1e-3 * self.h_mesh)
                .count();
            if usable < 6 {
                return Err(Error::FitFailed(format!(
                    "only {usable} usable neighbours around the query point"
                )));
            }
            least_squares(&rows, &rhs, 1e-10).ok_or_else(|| Error::FitFailed("normal equations are singular".into()))
        };
        let mut frame = TangentFrame::new(foot, self.normal(&foot), hint);
        let mut coef = fit(&frame)?;
        // Tilt the frame until the fitted surface is horizontal at the foot point.
        for _ in 0..3 {
            let grad = frame.e1 * coef[3] + frame.e2 * coef[4];
            if grad.norm() < 1e-12 {
                break;
            }
            frame = TangentFrame::new(foot, (frame.nu - grad).normalize(), hint);
            coef = fit(&frame)?;
        }
        Ok(ShapeOperator2::new(
            frame,
            Mat2::new(coef[0], coef[1], coef[1], coef[2]),
        ))
    }
}

/// Möller-Trumbore intersection parameter, if the line meets the triangle.
fn ray_triangle(o: &Vec3, d: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Option<f64> {
    let e1 = b - a;
    let e2 = c - a;
    let pv = d.cross(&e2);
    let det = e1.dot(&pv);
    if det.abs() < 1e-300 {
        return None;
    }
    let inv = 1.0 / det;
    let tv = o - a;
    let u = tv.dot(&pv) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let qv = tv.cross(&e1);
    let v = d.dot(&qv) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    Some(e2.dot(&qv) * inv)
}

/// Closest point on a triangle with barycentric weights for `(a, b, c)`.
pub(crate) fn closest_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> (Vec3, [f64; 3]) {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return (*a, [1.0, 0.0, 0.0]);
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return (*b, [0.0, 1.0, 0.0]);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (a + v * ab, [1.0 - v, v, 0.0]);
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return (*c, [0.0, 0.0, 1.0]);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (a + w * ac, [1.0 - w, 0.0, w]);
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (b + w * (c - b), [0.0, 1.0 - w, w]);
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (a + ab * v + ac * w, [1.0 - v - w, v, w])
}

#[cfg(test)]
mod tests {
    use super::*;

    const TETRA: &str = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 3 2\nf 1 2 4\nf 1 4 3\nf 2 3 4\n";

    #[test]
    fn parses_tetrahedron() {
        let m = TriMesh::parse(TETRA).unwrap();
        assert!((m.signed_volume() - 1.0 / 6.0).abs() < 1e-15);
        assert!(m.contains(&Vec3::new(0.1, 0.1, 0.1)));
        assert!(!m.contains(&Vec3::new(0.5, 0.5, 0.5)));
        let round = TriMesh::parse(&m.to_text()).unwrap();
        assert_eq!(round.triangles, m.triangles);
    }

    #[test]
    fn rejects_bad_meshes() {
        let flipped = TETRA.replace("f 1 3 2", "f 1 2 3");
        assert!(TriMesh::parse(&flipped).is_err());
        let open = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 3 2\nf 1 2 4\nf 1 4 3\nf 1 4 3\n";
        assert!(TriMesh::parse(open).is_err());
        assert!(TriMesh::parse("v 0 0\n").is_err());
        assert!(TriMesh::parse("f 0 1 2\n").is_err());
        let inward = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 2 3\nf 1 4 2\nf 1 3 4\nf 2 4 3\n";
        assert!(TriMesh::parse(inward).is_err());
    }

    #[test]
    fn sphere_mesh_curvature_and_inside() {
        let e = Ellipsoid::sphere(Vec3::zeros(), 1.0).unwrap();
        let m = TriMesh::from_ellipsoid(&e, 4);
        let q = Vec3::new(0.3, -0.5, 0.7).normalize();
        let op = m.shape_operator(&q, None).unwrap();
        assert!((op.gauss() - 1.0).abs() < 0.05, "K = {}", op.gauss());
        assert!((op.mean() + 1.0).abs() < 0.05, "H = {}", op.mean());
        assert!(m.contains(&Vec3::new(0.1, 0.2, -0.3)));
        assert!(!m.contains(&Vec3::new(1.1, 0.0, 0.0)));
        let iv = m.line_intervals(&Vec3::new(-3.0, 0.01, 0.02), &Vec3::x());
        assert_eq!(iv.len(), 1);
        assert!((iv[0].1 - iv[0].0 - 2.0).abs() < 0.01);
    }

    #[test]
    fn flat_patch_has_no_curvature() {
        // A large flat box face, sampled on a fine grid.
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        let n = 12;
        let id = |i: usize, j: usize| (i * (n + 1) + j) as u32;
        for i in 0..=n {
            for j in 0..=n {
                vertices.push(Vec3::new(
                    i as f64 / n as f64 * 4.0 - 2.0,
                    j as f64 / n as f64 * 4.0 - 2.0,
                    0.0,
                ));
            }
        }
        for i in 0..n {
            for j in 0..n {
                triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        // Close it with an apex below so the surface is watertight.
        let apex = vertices.len() as u32;
        vertices.push(Vec3::new(0.0, 0.0, -3.0));
        for k in 0..n {
            triangles.push([id(k + 1, 0), id(k, 0), apex]);
            triangles.push([id(k, n), id(k + 1, n), apex]);
            triangles.push([id(0, k), id(0, k + 1), apex]);
            triangles.push([id(n, k + 1), id(n, k), apex]);
        }
        let m = TriMesh::new(vertices, triangles).unwrap();
        let op = m.shape_operator(&Vec3::new(0.1, -0.2, 0.0), None).unwrap();
        assert!(op.gauss().abs() < 1e-8 && op.mean().abs() < 1e-8);
        assert!((op.frame.nu - Vec3::z()).norm() < 1e-8);
    }

    #[test]
    fn closest_point_regions() {
        let a = Vec3::zeros();
        let b = Vec3::x();
        let c = Vec3::y();
        let (p, w) = closest_on_triangle(&Vec3::new(0.2, 0.2, 1.0), &a, &b, &c);
        assert!((p - Vec3::new(0.2, 0.2, 0.0)).norm() < 1e-15);
        assert!((w[0] - 0.6).abs() < 1e-15);
        let (p, _) = closest_on_triangle(&Vec3::new(2.0, -1.0, 0.0), &a, &b, &c);
        assert!((p - b).norm() < 1e-15);
    }
}
