//! Modified-Helmholtz potential of a uniform ball,
//!
//! ```text
//! v(x) = (1/4π) ∫_B e^{-τ|x-y|}/|x-y| dy,   (Δ - τ²) v = -χ_B.
//! ```
//!
//! With `M(z) = z cosh z - sinh z` and `r = |x - p|`:
//!
//! ```text
//! r ≥ η:  v = M(τη) e^{-τr} / (τ³ r)
//! r < η:  v = 1/τ² - (1 + τη) e^{-τη} sinh(τr) / (τ³ r)
//! ```
//!
//! Everything is evaluated through `M̂(z) = M(z) e^{-z}` so that large `τη`
//! does not overflow.

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::numeric::LogValue;
use crate::obstacle::Ball;

/// `z cosh z - sinh z`.
pub fn m_factor(z: f64) -> f64 {
    if z < 1.0 {
        series_m(z)
    } else {
        m_hat(z) * z.exp()
    }
}

/// `M(z) e^{-z}`.
pub fn m_hat(z: f64) -> f64 {
    if z < 1.0 {
        series_m(z) * (-z).exp()
    } else {
        let e = (-2.0 * z).exp();
        0.5 * (z * (1.0 + e) - (1.0 - e))
    }
}

/// `Σ_{k≥1} 2k z^{2k+1} / (2k+1)!`.
fn series_m(z: f64) -> f64 {
    let z2 = z * z;
    let mut pow_fact = z; // z^{2k+1}/(2k+1)!
    let mut sum = 0.0;
    for k in 1..40 {
        let kk = k as f64;
        pow_fact *= z2 / ((2.0 * kk) * (2.0 * kk + 1.0));
        let term = 2.0 * kk * pow_fact;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YukawaBallField {
    pub ball: Ball,
    pub tau: f64,
    m_hat: f64,
}

impl YukawaBallField {
    pub fn new(ball: Ball, tau: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidParameter(format!("τ must be positive, got {tau}")));
        }
        Ok(Self {
            ball,
            tau,
            m_hat: m_hat(tau * ball.radius),
        })
    }

    /// `M(τη)`; overflows for `τη` beyond about 700.
    pub fn m(&self) -> f64 {
        m_factor(self.tau * self.ball.radius)
    }

    pub fn m_hat(&self) -> f64 {
        self.m_hat
    }

    pub fn value(&self, x: &Vec3) -> f64 {
        let t = self.tau;
        let eta = self.ball.radius;
        let r = (x - self.ball.center).norm();
        if r >= eta {
            self.m_hat * (-t * (r - eta)).exp() / (t * t * t * r)
        } else {
            // sinh(τr) e^{-τη} / (τ r), written to stay finite for r → 0.
            let z = t * r;
            let s = if z < 1e-4 {
                (-t * eta).exp() * (1.0 + z * z / 6.0)
            } else {
                0.5 * ((z - t * eta).exp() - (-z - t * eta).exp()) / z
            };
            (1.0 - (1.0 + t * eta) * s) / (t * t)
        }
    }

    pub fn gradient(&self, x: &Vec3) -> Vec3 {
        let t = self.tau;
        let eta = self.ball.radius;
        let d = x - self.ball.center;
        let r = d.norm();
        if r == 0.0 {
            return Vec3::zeros();
        }
        if r >= eta {
            -d / r * self.m_hat * (-t * (r - eta)).exp() * (1.0 + t * r) / (t * t * t * r * r)
        } else {
            let z = t * r;
            // (1 + τη) e^{-τη} M(τr) with M(τr) = M̂(τr) e^{τr}.
            let coef = (1.0 + t * eta) * m_hat(z) * (z - t * eta).exp();
            -d / r * coef / (t * t * t * r * r)
        }
    }

    /// `log v(x)` for exterior points, usable where `v` underflows.
    pub fn log_value_exterior(&self, x: &Vec3) -> f64 {
        let t = self.tau;
        let r = (x - self.ball.center).norm();
        self.m_hat.ln() - t * (r - self.ball.radius) - (t * t * t * r).ln()
    }
}

/// `∫_{B'} v_{χ_B} dx = 4π M(τη) M(τη') e^{-τd} / (τ⁶ d)`, by the mean-value
/// property of the exterior field applied twice.
pub fn ball_ball_integral(b: &Ball, b_prime: &Ball, tau: f64) -> Result<f64> {
    Ok(ball_ball_integral_log(b, b_prime, tau)?.to_f64())
}

pub fn ball_ball_integral_log(b: &Ball, b_prime: &Ball, tau: f64) -> Result<LogValue> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!("τ must be positive, got {tau}")));
    }
    if !b.disjoint(b_prime) {
        return Err(Error::Hypothesis("source and receiver balls must be disjoint".into()));
    }
    // Symmetric in the two balls, evaluated in a fixed order.
    let (r1, r2) = if b.radius <= b_prime.radius {
        (b.radius, b_prime.radius)
    } else {
        (b_prime.radius, b.radius)
    };
    let d = (b.center - b_prime.center).norm();
    let scaled = 4.0 * std::f64::consts::PI * m_hat(tau * r1) * m_hat(tau * r2) / (tau.powi(6) * d);
    Ok(LogValue::from_scaled(scaled, tau * (d - r1 - r2)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn m_factor_branches_agree() {
        for z in [1e-3_f64, 0.3, 0.999, 1.0, 1.001, 2.0, 5.0] {
            let direct = z * z.cosh() - z.sinh();
            assert!(
                (m_factor(z) - direct).abs() <= 1e-12 * direct.abs().max(1e-300) + 1e-15 * z.cosh(),
                "z = {z}"
            );
        }
        assert!((m_hat(1.0) - (-1f64).exp() * (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn reference_value() {
        let b = Ball::new(Vec3::zeros(), 0.5).unwrap();
        let v = YukawaBallField::new(b, 2.0).unwrap();
        let x = Vec3::new(3.0, 0.0, 0.0);
        let expect = (-7f64).exp() / 24.0;
        assert!((v.value(&x) - expect).abs() < 1e-15 * expect * 10.0);
        assert!((v.value(&x) - 3.7995e-5).abs() < 1e-8);
        assert!((v.log_value_exterior(&x) - expect.ln()).abs() < 1e-13);
    }

    #[test]
    fn continuity_and_pde() {
        let b = Ball::new(Vec3::new(0.1, -0.2, 0.3), 0.7).unwrap();
        let v = YukawaBallField::new(b, 3.0).unwrap();
        let dir = Vec3::new(0.3, 0.4, -0.5).normalize();
        let inside = b.center + (0.7 - 1e-9) * dir;
        let outside = b.center + (0.7 + 1e-9) * dir;
        assert!((v.value(&inside) - v.value(&outside)).abs() < 1e-8);
        assert!((v.gradient(&inside) - v.gradient(&outside)).norm() < 1e-8);
        let h = 1e-3;
        for (x, rhs) in [(b.center + 0.3 * dir, -1.0), (b.center + 1.5 * dir, 0.0)] {
            let mut lap = -6.0 * v.value(&x);
            for k in 0..3 {
                let mut e = Vec3::zeros();
                e[k] = h;
                lap += v.value(&(x + e)) + v.value(&(x - e));
            }
            lap /= h * h;
            let residual = lap - 9.0 * v.value(&x) - rhs;
            assert!(residual.abs() < 1e-5, "residual {residual}");
        }
        // Gradient matches finite differences inside and outside.
        for x in [b.center + 0.2 * dir, b.center + 2.0 * dir] {
            let g = v.gradient(&x);
            for k in 0..3 {
                let mut e = Vec3::zeros();
                e[k] = 1e-6;
                let fd = (v.value(&(x + e)) - v.value(&(x - e))) / 2e-6;
                assert!((fd - g[k]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn newtonian_limit() {
        let b = Ball::new(Vec3::zeros(), 0.5).unwrap();
        let v = YukawaBallField::new(b, 1e-6).unwrap();
        let x = Vec3::new(2.0, 0.0, 0.0);
        assert!((v.value(&x) - 0.125 / 6.0).abs() < 1e-7);
    }

    #[test]
    fn ball_ball_symmetry_and_guard() {
        let b = Ball::new(Vec3::new(4.0, 0.0, 0.0), 0.5).unwrap();
        let bp = Ball::new(Vec3::new(0.0, 4.0, 0.0), 0.3).unwrap();
        let a = ball_ball_integral(&b, &bp, 2.0).unwrap();
        let c = ball_ball_integral(&bp, &b, 2.0).unwrap();
        assert_eq!(a.to_bits(), c.to_bits());
        let close = Ball::new(Vec3::new(4.5, 0.0, 0.0), 0.3).unwrap();
        assert!(ball_ball_integral(&b, &close, 2.0).is_err());
        let bb = Ball::new(Vec3::new(0.0, 4.0, 0.0), 0.5).unwrap();
        assert!((ball_ball_integral(&b, &bb, 2.0).unwrap() - 5.728e-8).abs() < 1e-10);
    }
}
