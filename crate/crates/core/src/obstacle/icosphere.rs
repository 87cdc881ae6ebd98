//! Geodesic subdivision of the icosahedron, used for uniform direction and
//! surface sampling.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::geom::Vec3;

#[derive(Debug)]
pub struct Icosphere {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
    offsets: Vec<u32>,
    adjacency: Vec<u32>,
}

impl Icosphere {
    /// `10·4^level + 2` unit vectors.
    pub fn build(level: usize) -> Self {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let mut vertices: Vec<Vec3> = [
            (-1.0, t, 0.0),
            (1.0, t, 0.0),
            (-1.0, -t, 0.0),
            (1.0, -t, 0.0),
            (0.0, -1.0, t),
            (0.0, 1.0, t),
            (0.0, -1.0, -t),
            (0.0, 1.0, -t),
            (t, 0.0, -1.0),
            (t, 0.0, 1.0),
            (-t, 0.0, -1.0),
            (-t, 0.0, 1.0),
        ]
        .iter()
        .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
        .collect();
        let mut triangles: Vec<[u32; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        for _ in 0..level {
            let mut cache: HashMap<(u32, u32), u32> = HashMap::with_capacity(triangles.len() * 2);
            let mut midpoint = |a: u32, b: u32, verts: &mut Vec<Vec3>| -> u32 {
                let key = if a < b { (a, b) } else { (b, a) };
                *cache.entry(key).or_insert_with(|| {
                    verts.push((verts[a as usize] + verts[b as usize]).normalize());
                    (verts.len() - 1) as u32
                })
            };
            let mut next = Vec::with_capacity(triangles.len() * 4);
            for &[a, b, c] in &triangles {
                let ab = midpoint(a, b, &mut vertices);
                let bc = midpoint(b, c, &mut vertices);
                let ca = midpoint(c, a, &mut vertices);
                next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            triangles = next;
        }
        let (offsets, adjacency) = build_adjacency(vertices.len(), &triangles);
        Self {
            vertices,
            triangles,
            offsets,
            adjacency,
        }
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.adjacency[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    /// Mean angular spacing between neighbouring vertices (radians).
    pub fn spacing(&self) -> f64 {
        (4.0 * std::f64::consts::PI / self.vertices.len() as f64).sqrt() * 1.1
    }
}

pub(crate) fn build_adjacency(n: usize, triangles: &[[u32; 3]]) -> (Vec<u32>, Vec<u32>) {
    let mut lists: Vec<Vec<u32>> = vec![Vec::new(); n];
    for t in triangles {
        for k in 0..3 {
            let a = t[k] as usize;
            let b = t[(k + 1) % 3];
            if !lists[a].contains(&b) {
                lists[a].push(b);
            }
            let c = t[(k + 2) % 3];
            if !lists[a].contains(&c) {
                lists[a].push(c);
            }
        }
    }
    let mut offsets = Vec::with_capacity(n + 1);
    let mut adjacency = Vec::new();
    offsets.push(0);
    for l in lists {
        adjacency.extend(l);
        offsets.push(adjacency.len() as u32);
    }
    (offsets, adjacency)
}

/// Shared, lazily built icosphere of the given level.
pub fn icosphere(level: usize) -> Arc<Icosphere> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Icosphere>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(s) = cache.lock().unwrap().get(&level) {
        return s.clone();
    }
    let built = Arc::new(Icosphere::build(level));
    cache.lock().unwrap().entry(level).or_insert(built).clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertex_counts() {
        for level in 0..5 {
            let s = Icosphere::build(level);
            assert_eq!(s.vertices.len(), 10 * 4usize.pow(level as u32) + 2);
            assert_eq!(s.triangles.len(), 20 * 4usize.pow(level as u32));
        }
        assert_eq!(icosphere(4).vertices.len(), 2562);
    }

    #[test]
    fn outward_winding_and_valence() {
        let s = Icosphere::build(2);
        for t in &s.triangles {
            let [a, b, c] = t.map(|i| s.vertices[i as usize]);
            assert!((b - a).cross(&(c - a)).dot(&(a + b + c)) > 0.0);
        }
        for i in 0..s.vertices.len() {
            let k = s.neighbors(i).len();
            assert!(k == 5 || k == 6);
        }
    }
}
