//! Small numerical helpers shared by several modules.

use crate::geom::Mat2;

/// Central-difference Hessian of a function of two variables at the origin.
pub fn fd_hessian_2d(f: impl Fn([f64; 2]) -> f64, h: f64) -> Mat2 {
    let f0 = f([0.0, 0.0]);
    let fxx = (f([h, 0.0]) - 2.0 * f0 + f([-h, 0.0])) / (h * h);
    let fyy = (f([0.0, h]) - 2.0 * f0 + f([0.0, -h])) / (h * h);
    let fxy = (f([h, h]) - f([h, -h]) - f([-h, h]) + f([-h, -h])) / (4.0 * h * h);
    Mat2::new(fxx, fxy, fxy, fyy)
}

/// Log-magnitude representation of a real number, used where `e^{-τc}`
/// would underflow.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LogValue {
    pub log_mag: f64,
    pub sign: f64,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        log_mag: f64::NEG_INFINITY,
        sign: 0.0,
    };

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self {
                log_mag: x.abs().ln(),
                sign: x.signum(),
            }
        }
    }

    /// `scaled · e^{-shift}`.
    pub fn from_scaled(scaled: f64, shift: f64) -> Self {
        let mut v = Self::from_f64(scaled);
        v.log_mag -= shift;
        v
    }

    pub fn to_f64(self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.log_mag.exp()
        }
    }

    pub fn is_positive(self) -> bool {
        self.sign > 0.0
    }

    pub fn scale(self, factor: f64) -> Self {
        let f = Self::from_f64(factor);
        Self {
            log_mag: self.log_mag + f.log_mag,
            sign: self.sign * f.sign,
        }
    }

    pub fn add(self, other: Self) -> Self {
        if self.sign == 0.0 {
            return other;
        }
        if other.sign == 0.0 {
            return self;
        }
        let m = self.log_mag.max(other.log_mag);
        let s = self.sign * (self.log_mag - m).exp() + other.sign * (other.log_mag - m).exp();
        let mut v = Self::from_f64(s);
        v.log_mag += m;
        v
    }

    pub fn neg(self) -> Self {
        Self {
            log_mag: self.log_mag,
            sign: -self.sign,
        }
    }
}

/// Solves the dense least-squares problem `min |A x - b|² + ridge |D x|²`,
/// `D` the column scaling. `rows` are the rows of `A`. Returns `None` for a
/// rank-deficient system.
pub fn least_squares(rows: &[Vec<f64>], b: &[f64], ridge: f64) -> Option<Vec<f64>> {
    let n = rows.first()?.len();
    let m = rows.len();
    // Column equilibration before an SVD solve; normal equations lose too
    // much precision on mixed-scale bases such as (τ, 1/τ, 1/τ²).
    let mut scale = vec![0.0f64; n];
    for r in rows {
        for (s, v) in scale.iter_mut().zip(r) {
            *s = s.max(v.abs());
        }
    }
    if scale.iter().any(|s| !(*s > 0.0)) {
        return None;
    }
    let extra = if ridge > 0.0 { n } else { 0 };
    let a = nalgebra::DMatrix::<f64>::from_fn(m + extra, n, |i, j| {
        if i < m {
            rows[i][j] / scale[j]
        } else if i - m == j {
            ridge.sqrt()
        } else {
            0.0
        }
    });
    let y = nalgebra::DVector::<f64>::from_fn(m + extra, |i, _| if i < m { b[i] } else { 0.0 });
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    if !(smax > 0.0) || svd.singular_values.min() <= 1e-14 * smax {
        return None;
    }
    let x = svd.solve(&y, 0.0).ok()?;
    Some(x.iter().zip(&scale).map(|(v, s)| v / s).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_value_arithmetic() {
        let a = LogValue::from_f64(3.0);
        let b = LogValue::from_f64(-1.0);
        assert!((a.add(b).to_f64() - 2.0).abs() < 1e-14);
        assert!((a.scale(-2.0).to_f64() + 6.0).abs() < 1e-14);
        let tiny = LogValue::from_scaled(2.0, 1000.0);
        assert!(tiny.to_f64() == 0.0);
        assert!((tiny.log_mag - (2f64.ln() - 1000.0)).abs() < 1e-12);
        assert_eq!(LogValue::ZERO.add(a), a);
    }

    #[test]
    fn least_squares_recovers_line() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![1.0, i as f64]).collect();
        let b: Vec<f64> = (0..10).map(|i| 2.0 - 0.5 * i as f64).collect();
        let x = least_squares(&rows, &b, 0.0).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-10 && (x[1] + 0.5).abs() < 1e-10);
    }

    #[test]
    fn fd_hessian_of_quadratic() {
        let h = fd_hessian_2d(|s| 1.5 * s[0] * s[0] - 0.4 * s[0] * s[1] + 0.25 * s[1] * s[1], 1e-3);
        assert!((h[(0, 0)] - 3.0).abs() < 1e-6);
        assert!((h[(0, 1)] + 0.4).abs() < 1e-6);
        assert!((h[(1, 1)] - 0.5).abs() < 1e-6);
    }
}
