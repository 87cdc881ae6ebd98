//! Free-space solution of `u_tt = Δu`, `u(·,0) = 0`, `u_t(·,0) = χ_B`.
//!
//! By Kirchhoff's formula `u(x,t) = |S(x,t) ∩ B| / (4πt)`, which for
//! `r = |x - p|` reduces to
//!
//! ```text
//! u = t                          for t ≤ η - r
//! u = (η² - (t - r)²) / (4r)     for |η - r| ≤ t ≤ η + r
//! u = 0                          otherwise
//! ```

use crate::geom::Vec3;
use crate::obstacle::Ball;
use crate::quadrature::adaptive_gk;

pub fn free_space_u(x: &Vec3, t: f64, ball: &Ball) -> f64 {
    free_space_radial((x - ball.center).norm(), t, ball.radius)
}

pub fn free_space_radial(r: f64, t: f64, eta: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t <= eta - r {
        t
    } else if t >= (eta - r).abs() && t <= eta + r {
        (eta * eta - (t - r) * (t - r)) / (4.0 * r)
    } else {
        0.0
    }
}

/// `∫_{B'} u(x,t) dx` for the free-space field of `B`, with `B'` disjoint
/// from `B`.
pub fn free_space_ball_integral(source: &Ball, receiver: &Ball, t: f64) -> f64 {
    let d = (source.center - receiver.center).norm();
    let (eta, er) = (source.radius, receiver.radius);
    // Area of the sphere |x - p| = r inside B'.
    let lens = |r: f64| {
        if (r - d).abs() >= er {
            0.0
        } else {
            std::f64::consts::PI * r * (er * er - (r - d) * (r - d)) / d
        }
    };
    let a = (d - er).max(t - eta).max(0.0);
    let b = (d + er).min(t + eta);
    if b <= a {
        return 0.0;
    }
    adaptive_gk(|r| free_space_radial(r, t, eta) * lens(r), a, b, 1e-15, 1e-12, 100).value
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_profile_is_continuous() {
        let eta = 0.5;
        for r in [0.1_f64, 0.3, 0.7, 2.0] {
            for t in [eta - r, eta + r, (r - eta).abs()] as [f64; 3] {
                if t <= 0.0 {
                    continue;
                }
                let a = free_space_radial(r, t - 1e-9, eta);
                let b = free_space_radial(r, t + 1e-9, eta);
                assert!((a - b).abs() < 1e-7, "r {r} t {t}");
            }
        }
    }

    #[test]
    fn time_integral_matches_ball_volume() {
        // ∫_0^∞ u(x,t) dt = ∫_B 1/(4π|x-y|) dy = η³/(3r) outside B.
        let r = 2.0;
        let q = adaptive_gk(|t| free_space_radial(r, t, 0.5), 1.5, 2.5, 1e-15, 1e-13, 50);
        assert!((q.value - 0.125 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn ball_integral_total_mass() {
        // ∫_0^∞ ∫_{B'} u dx dt = |B||B'| / (4π d).
        let s = Ball::new(Vec3::zeros(), 0.5).unwrap();
        let rcv = Ball::new(Vec3::new(3.0, 0.0, 0.0), 0.4).unwrap();
        let q = adaptive_gk(|t| free_space_ball_integral(&s, &rcv, t), 2.1, 3.9, 1e-14, 1e-11, 200);
        let expect = s.volume() * rcv.volume() / (4.0 * std::f64::consts::PI * 3.0);
        assert!((q.value - expect).abs() < 1e-9 * expect, "{} vs {expect}", q.value);
    }
}
