//! Quadrature rules: adaptive Gauss-Kronrod, periodic trapezoid, Gauss-Legendre
//! and an adaptive triangle rule.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::geom::Vec3;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive 15-point Gauss-Kronrod integration. Stops when the
/// summed error estimate is below `max(abs_tol, rel_tol·|I|)`.
pub fn adaptive_gk(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_segments: usize,
) -> QuadResult {
    let (v, e) = gk15(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        a,
        b,
        value: v,
        error: e,
    });
    let mut total = v;
    let mut err = e;
    let mut evals = 15;
    while err > abs_tol.max(rel_tol * total.abs()) && heap.len() < max_segments {
        let s = heap.pop().expect("heap is never empty");
        let m = 0.5 * (s.a + s.b);
        let (v1, e1) = gk15(&mut f, s.a, m);
        let (v2, e2) = gk15(&mut f, m, s.b);
        evals += 30;
        total += v1 + v2 - s.value;
        err += e1 + e2 - s.error;
        heap.push(Segment {
            a: s.a,
            b: m,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: m,
            b: s.b,
            value: v2,
            error: e2,
        });
    }
    // Re-sum to shed accumulated rounding from the running updates.
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    QuadResult {
        value,
        error,
        evaluations: evals,
        converged: error <= abs_tol.max(rel_tol * value.abs()),
    }
}

/// Trapezoid rule on `[0, 2π)` with doubling from `n0` points until two
/// successive values agree to `max(abs_tol, rel_tol·|I|)`.
pub fn periodic_trapezoid(
    mut f: impl FnMut(f64) -> f64,
    n0: usize,
    abs_tol: f64,
    rel_tol: f64,
    max_n: usize,
) -> QuadResult {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut n = n0.max(2);
    let mut sum: f64 = (0..n).map(|k| f(two_pi * k as f64 / n as f64)).sum();
    let mut value = sum * two_pi / n as f64;
    let mut evals = n;
    loop {
        if 2 * n > max_n {
            return QuadResult {
                value,
                error: f64::INFINITY,
                evaluations: evals,
                converged: false,
            };
        }
        // The odd points of the doubled grid.
        let add: f64 = (0..n).map(|k| f(two_pi * (2 * k + 1) as f64 / (2 * n) as f64)).sum();
        evals += n;
        sum += add;
        n *= 2;
        let next = sum * two_pi / n as f64;
        let change = (next - value).abs();
        value = next;
        if change <= abs_tol.max(rel_tol * value.abs()) {
            return QuadResult {
                value,
                error: change,
                evaluations: evals,
                converged: true,
            };
        }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` (Golub-Welsch).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = k as f64 / ((4 * k * k - 1) as f64).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], 2.0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Degree-5 seven-point triangle rule: barycentric coordinates and weights
/// summing to one.
pub const TRIANGLE_7: [([f64; 3], f64); 7] = [
    ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
    (
        [0.059_715_871_789_770, 0.470_142_064_105_115, 0.470_142_064_105_115],
        0.132_394_152_788_506,
    ),
    (
        [0.470_142_064_105_115, 0.059_715_871_789_770, 0.470_142_064_105_115],
        0.132_394_152_788_506,
    ),
    (
        [0.470_142_064_105_115, 0.470_142_064_105_115, 0.059_715_871_789_770],
        0.132_394_152_788_506,
    ),
    (
        [0.797_426_985_353_087, 0.101_286_507_323_456, 0.101_286_507_323_456],
        0.125_939_180_544_827,
    ),
    (
        [0.101_286_507_323_456, 0.797_426_985_353_087, 0.101_286_507_323_456],
        0.125_939_180_544_827,
    ),
    (
        [0.101_286_507_323_456, 0.101_286_507_323_456, 0.797_426_985_353_087],
        0.125_939_180_544_827,
    ),
];

fn triangle_rule(f: &mut impl FnMut(&Vec3) -> f64, t: &[Vec3; 3]) -> f64 {
    let area = 0.5 * (t[1] - t[0]).cross(&(t[2] - t[0])).norm();
    TRIANGLE_7
        .iter()
        .map(|(b, w)| w * f(&(b[0] * t[0] + b[1] * t[1] + b[2] * t[2])))
        .sum::<f64>()
        * area
}

fn midpoint_split(t: &[Vec3; 3]) -> [[Vec3; 3]; 4] {
    let m01 = 0.5 * (t[0] + t[1]);
    let m12 = 0.5 * (t[1] + t[2]);
    let m20 = 0.5 * (t[2] + t[0]);
    [[t[0], m01, m20], [m01, t[1], m12], [m20, m12, t[2]], [m01, m12, m20]]
}

/// Recursive subdivision of a flat triangle until the parent and children
/// estimates agree to `abs_tol` (scaled by the area fraction).
pub fn adaptive_triangle(
    f: &mut impl FnMut(&Vec3) -> f64,
    t: &[Vec3; 3],
    abs_tol: f64,
    max_depth: usize,
) -> QuadResult {
    fn rec(
        f: &mut impl FnMut(&Vec3) -> f64,
        t: &[Vec3; 3],
        coarse: f64,
        tol: f64,
        depth: usize,
        evals: &mut usize,
        ok: &mut bool,
    ) -> (f64, f64) {
        let kids = midpoint_split(t);
        let vals: Vec<f64> = kids.iter().map(|k| triangle_rule(f, k)).collect();
        *evals += 28;
        let fine: f64 = vals.iter().sum();
        let err = (fine - coarse).abs();
        if err <= tol {
            return (fine, err);
        }
        if depth == 0 {
            *ok = false;
            return (fine, err);
        }
        let mut total = 0.0;
        let mut e = 0.0;
        for (k, v) in kids.iter().zip(vals) {
            let (a, b) = rec(f, k, v, 0.25 * tol, depth - 1, evals, ok);
            total += a;
            e += b;
        }
        (total, e)
    }
    let mut evals = 7;
    let mut ok = true;
    let coarse = triangle_rule(f, t);
    let (value, error) = rec(f, t, coarse, abs_tol, max_depth, &mut evals, &mut ok);
    QuadResult {
        value,
        error,
        evaluations: evals,
        converged: ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_integrates_peaked_function() {
        let tau = 200.0;
        let r = adaptive_gk(|x| (-tau * x).exp(), 0.0, 3.0, 0.0, 1e-12, 200);
        assert!(r.converged);
        assert!((r.value - (1.0 - (-3.0 * tau).exp()) / tau).abs() < 1e-13);
    }

    #[test]
    fn gk_exact_for_polynomials() {
        let r = adaptive_gk(|x| x.powi(20), -1.0, 1.0, 0.0, 1e-15, 1);
        assert!((r.value - 2.0 / 21.0).abs() < 1e-15);
    }

    #[test]
    fn trapezoid_is_spectral_for_periodic() {
        // ∫ e^{cos φ} dφ = 2π I0(1).
        let r = periodic_trapezoid(|p| p.cos().exp(), 4, 0.0, 1e-14, 1024);
        assert!(r.converged);
        assert!((r.value - 2.0 * std::f64::consts::PI * 1.266_065_877_752_008_4).abs() < 1e-13);
    }

    #[test]
    fn legendre_rule() {
        let (x, w) = gauss_legendre(8);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((i - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn triangle_rules() {
        let t = [Vec3::zeros(), Vec3::x(), Vec3::y()];
        let w: f64 = TRIANGLE_7.iter().map(|(_, w)| w).sum();
        assert!((w - 1.0).abs() < 1e-12);
        // ∫ x^2 y^2 over the unit right triangle is 1/180.
        let mut f = |p: &Vec3| p.x * p.x * p.y * p.y;
        let r = adaptive_triangle(&mut f, &t, 1e-14, 10);
        assert!((r.value - 1.0 / 180.0).abs() < 1e-13);
        let mut g = |p: &Vec3| (-30.0 * (p.x + p.y)).exp();
        let r = adaptive_triangle(&mut g, &t, 1e-12, 12);
        let exact = (1.0 - (-30.0f64).exp() * 31.0) / 900.0;
        assert!((r.value - exact).abs() < 1e-10, "{} vs {exact}", r.value);
    }
}
