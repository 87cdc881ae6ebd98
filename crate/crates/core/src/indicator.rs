//! The indicator `I(τ) = ∫_B v_g dx - ∫_{B'} w_f dx`, its exponential decay
//! rate and its scaled limit.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{least_squares, LogValue};
use crate::obstacle::Ball;
use crate::potentials::{ball_ball_integral_log, JProblem};
use crate::quadrature::adaptive_gk;
use crate::wavesim::{free_space_ball_integral, Formulation, ReceiverTrace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndicatorSource {
    Fdtd,
    #[serde(rename = "semianalytic_2J")]
    Semianalytic2J,
}

impl IndicatorSource {
    pub fn label(self) -> &'static str {
        match self {
            Self::Fdtd => "fdtd",
            Self::Semianalytic2J => "semianalytic_2J",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeometryDescriptor {
    pub source: Ball,
    pub receiver: Ball,
    pub obstacle: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IndicatorCurve {
    pub taus: Vec<f64>,
    pub values: Vec<LogValue>,
    pub source: IndicatorSource,
    pub geometry: GeometryDescriptor,
    /// Smallest sampled `τ` from which every later value is positive.
    pub tau0: Option<f64>,
}

impl IndicatorCurve {
    pub fn new(taus: Vec<f64>, values: Vec<LogValue>, source: IndicatorSource, geometry: GeometryDescriptor) -> Self {
        let mut tau0 = None;
        for (t, v) in taus.iter().zip(&values).rev() {
            if v.is_positive() {
                tau0 = Some(*t);
            } else {
                break;
            }
        }
        Self {
            taus,
            values,
            source,
            geometry,
            tau0,
        }
    }

    /// Samples with `lo ≤ τ ≤ hi`.
    pub fn window(&self, lo: f64, hi: f64) -> IndicatorCurve {
        let (taus, values): (Vec<f64>, Vec<LogValue>) = self
            .taus
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| **t >= lo && **t <= hi)
            .map(|(t, v)| (*t, *v))
            .unzip();
        IndicatorCurve::new(taus, values, self.source, self.geometry.clone())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "tau,log_indicator,sign,source")?;
        for (t, v) in self.taus.iter().zip(&self.values) {
            writeln!(f, "{t:.17e},{:.17e},{},{}", v.log_mag, v.sign, self.source.label())?;
        }
        Ok(())
    }

    pub fn read_csv(path: &Path, geometry: GeometryDescriptor) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "tau,log_indicator,sign,source" => {}
            _ => return Err(Error::Parse("missing curve CSV header".into())),
        }
        let mut taus = Vec::new();
        let mut values = Vec::new();
        let mut source = IndicatorSource::Fdtd;
        for (n, line) in lines.enumerate() {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(Error::Parse(format!("line {}: expected 4 columns", n + 2)));
            }
            let num = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", n + 2)))
            };
            taus.push(num(cols[0])?);
            let log_mag = num(cols[1])?;
            let sign = num(cols[2])?;
            values.push(if sign == 0.0 {
                LogValue::ZERO
            } else {
                LogValue { log_mag, sign }
            });
            source = match cols[3].trim() {
                "fdtd" => IndicatorSource::Fdtd,
                "semianalytic_2J" => IndicatorSource::Semianalytic2J,
                other => return Err(Error::Parse(format!("unknown source {other}"))),
            };
        }
        Ok(Self::new(taus, values, source, geometry))
    }
}

/// `n` log-spaced samples of `[lo, hi]`.
pub fn tau_window(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64)).collect()
}

/// `I(τ) = ∫_B v_g dx - Σ_i weights_i w_f(x_i, τ)`, with the first term in
/// closed form.
pub fn indicator_value(tau: f64, w_field: &[f64], weights: &[f64], b: &Ball, b_prime: &Ball) -> Result<LogValue> {
    if w_field.len() != weights.len() {
        return Err(Error::InvalidParameter(format!(
            "{} field values for {} quadrature nodes",
            w_field.len(),
            weights.len()
        )));
    }
    let direct = ball_ball_integral_log(b, b_prime, tau)?;
    let received: f64 = w_field.iter().zip(weights).map(|(w, q)| w * q).sum();
    Ok(direct.add(LogValue::from_f64(-received)))
}

/// `∫_{B'} ∫_T^∞ e^{-τt} u_inc dt dx`: the part of `∫_B v_g` that a record
/// ending at `T` does not see. Zero once the direct wave has passed `B'`.
pub fn incident_tail(b: &Ball, b_prime: &Ball, t_final: f64, tau: f64) -> f64 {
    let d = (b.center - b_prime.center).norm();
    let end = d + b.radius + b_prime.radius;
    if t_final >= end {
        return 0.0;
    }
    adaptive_gk(
        |t| (-tau * t).exp() * free_space_ball_integral(b, b_prime, t),
        t_final,
        end,
        0.0,
        1e-10,
        200,
    )
    .value
}

/// Indicator curve for the ball `g_ball ⊂ B'` from a receiver trace.
pub fn curve_from_trace(trace: &ReceiverTrace, g_ball: &Ball, taus: &[f64], obstacle: &str) -> Result<IndicatorCurve> {
    let weights = trace.ball_weights(g_ball)?;
    let received = trace.laplace_integrated(&weights, taus);
    let values = taus
        .iter()
        .zip(&received)
        .map(|(&tau, &r)| match trace.formulation {
            Formulation::Total => Ok(ball_ball_integral_log(&trace.source, g_ball, tau)?.add(LogValue::from_f64(-r))),
            Formulation::Scattered => Ok(LogValue::from_f64(
                incident_tail(&trace.source, g_ball, trace.t_final, tau) - r,
            )),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IndicatorCurve::new(
        taus.to_vec(),
        values,
        IndicatorSource::Fdtd,
        GeometryDescriptor {
            source: trace.source,
            receiver: *g_ball,
            obstacle: obstacle.to_string(),
        },
    ))
}

/// `I := 2J(τ)` evaluated semi-analytically.
pub fn curve_semianalytic(problem: &JProblem, taus: &[f64], obstacle: &str) -> Result<IndicatorCurve> {
    let values = taus
        .par_iter()
        .map(|&t| problem.boundary(t).map(|j| j.value.scale(2.0)))
        .collect::<Result<Vec<_>>>()?;
    Ok(IndicatorCurve::new(
        taus.to_vec(),
        values,
        IndicatorSource::Semianalytic2J,
        GeometryDescriptor {
            source: problem.b,
            receiver: problem.b_prime,
            obstacle: obstacle.to_string(),
        },
    ))
}

/// Largest `τ` at which a trace computed with step `h` is trusted, judged
/// from a companion run at `2h`: the coarse run departs from the fine one at
/// some `τ_c`, and the onset of dispersion error scales like `1/h`, so the
/// fine run is trusted up to `2τ_c`.
pub fn resolvable_tau_cap(fine: &IndicatorCurve, coarse: &IndicatorCurve, tol: f64) -> Result<f64> {
    if fine.taus != coarse.taus {
        return Err(Error::InvalidParameter("curves sampled at different τ".into()));
    }
    let mut cap = fine.taus.last().copied().unwrap_or(0.0);
    for ((t, a), b) in fine.taus.iter().zip(&fine.values).zip(&coarse.values) {
        let diff = if a.sign != b.sign {
            f64::INFINITY
        } else {
            (b.log_mag - a.log_mag).exp_m1().abs()
        };
        if diff > tol {
            cap = *t;
            break;
        }
    }
    Ok(2.0 * cap)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayFit {
    /// Regression estimate of `lim -(1/τ) log I(τ)`.
    pub rate: f64,
    pub uncertainty: f64,
    /// `-log I/τ` at the largest sampled `τ`.
    pub pointwise: f64,
    /// `(log I(τ_{n-1}) - log I(τ_n)) / (τ_n - τ_{n-1})` for the last pair.
    pub pairwise: f64,
    /// Last-pair slope after removing the fitted `μ log τ` term.
    pub pairwise_corrected: f64,
    /// Coefficient of `log τ` in `-log I`.
    pub mu: f64,
    pub intercept: f64,
    pub slope_std_error: f64,
    pub window: (f64, f64),
    pub samples: usize,
    pub residual_rms: f64,
    pub source: IndicatorSource,
}

/// Fits `-log I(τ) = rate·τ + μ log τ + β` by least squares. The `log τ`
/// term absorbs the algebraic prefactor of `I`.
pub fn decay_fit(curve: &IndicatorCurve) -> Result<DecayFit> {
    let n = curve.taus.len();
    if n < 8 {
        return Err(Error::DecayFit(format!("need at least 8 samples, got {n}")));
    }
    if let Some((t, _)) = curve.taus.iter().zip(&curve.values).find(|(_, v)| !v.is_positive()) {
        return Err(Error::DecayFit(format!("indicator is not positive at τ = {t}")));
    }
    for k in 1..n {
        if !(curve.taus[k] > curve.taus[k - 1]) {
            return Err(Error::DecayFit("τ samples must increase".into()));
        }
        if !(curve.values[k].log_mag < curve.values[k - 1].log_mag) {
            return Err(Error::DecayFit(format!(
                "log I is not decreasing near τ = {}; widen the τ window or lengthen T",
                curve.taus[k]
            )));
        }
    }
    let t = &curve.taus;
    let y: Vec<f64> = curve.values.iter().map(|v| -v.log_mag).collect();
    let rows: Vec<Vec<f64>> = t.iter().map(|&x| vec![x, x.ln(), 1.0]).collect();
    let c = least_squares(&rows, &y, 0.0).ok_or_else(|| Error::DecayFit("singular regression".into()))?;
    let (rate, mu, beta) = (c[0], c[1], c[2]);
    let resid: Vec<f64> = rows
        .iter()
        .zip(&y)
        .map(|(r, yy)| yy - (rate * r[0] + mu * r[1] + beta * r[2]))
        .collect();
    let ss: f64 = resid.iter().map(|r| r * r).sum();
    let rms = (ss / n as f64).sqrt();
    // Standard error of the slope from (XᵀX)⁻¹.
    let xtx = nalgebra::Matrix3::from_fn(|a, b| rows.iter().map(|r| r[a] * r[b]).sum::<f64>());
    let sigma2 = if n > 3 { ss / (n - 3) as f64 } else { 0.0 };
    let se = xtx
        .try_inverse()
        .map(|m| (sigma2 * m[(0, 0)]).max(0.0).sqrt())
        .unwrap_or(f64::INFINITY);
    let (ta, tb) = (t[n - 2], t[n - 1]);
    let pairwise = (y[n - 1] - y[n - 2]) / (tb - ta);
    let pairwise_corrected = (y[n - 1] - mu * tb.ln() - y[n - 2] + mu * ta.ln()) / (tb - ta);
    let uncertainty = (pairwise_corrected - rate).abs().max(2.0 * se);
    Ok(DecayFit {
        rate,
        uncertainty,
        pointwise: y[n - 1] / tb,
        pairwise,
        pairwise_corrected,
        mu,
        intercept: beta,
        slope_std_error: se,
        window: (t[0], tb),
        samples: n,
        residual_rms: rms,
        source: curve.source,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScaledLimit {
    pub kappa: f64,
    pub taus: Vec<f64>,
    /// `τ⁴ e^{τκ} I(τ)`.
    pub scaled: Vec<f64>,
    /// Last sample of the sequence.
    pub last: f64,
    /// Fit of `L + a/τ + b/τ²` over the tail, evaluated at `τ = ∞`.
    pub extrapolated: f64,
    /// Largest relative change between consecutive tail samples.
    pub tail_variation: f64,
    /// Slope of `log(scaled)` against `τ` over the tail.
    pub log_slope: f64,
    /// Set when the slope shows that `κ` does not match the decay of `I`.
    pub divergent: bool,
}

/// Number of trailing samples used for extrapolation and diagnostics.
const TAIL: usize = 6;

pub fn scaled_limit(curve: &IndicatorCurve, kappa: f64) -> Result<ScaledLimit> {
    let n = curve.taus.len();
    if n < 3 {
        return Err(Error::DecayFit("need at least 3 samples".into()));
    }
    let scaled: Vec<f64> = curve
        .taus
        .iter()
        .zip(&curve.values)
        .map(|(&t, v)| {
            let mut s = *v;
            s.log_mag += 4.0 * t.ln() + t * kappa;
            s.to_f64()
        })
        .collect();
    let k = n.min(TAIL);
    let tail_t = &curve.taus[n - k..];
    let tail_s = &scaled[n - k..];
    let tail_variation = tail_s
        .windows(2)
        .map(|w| ((w[1] - w[0]) / w[1]).abs())
        .fold(0.0, f64::max);
    let logs: Vec<Vec<f64>> = tail_t.iter().map(|&t| vec![t, 1.0]).collect();
    let ly: Vec<f64> = tail_s.iter().map(|s| s.abs().ln()).collect();
    let log_slope = least_squares(&logs, &ly, 0.0).map(|c| c[0]).unwrap_or(f64::NAN);
    let degree = if k >= 5 { 3 } else { 2.min(k) };
    let rows: Vec<Vec<f64>> = tail_t
        .iter()
        .map(|&t| (0..degree).map(|p| t.powi(-(p as i32))).collect())
        .collect();
    let extrapolated = least_squares(&rows, tail_s, 0.0)
        .map(|c| c[0])
        .unwrap_or(*tail_s.last().unwrap());
    Ok(ScaledLimit {
        kappa,
        taus: curve.taus.clone(),
        last: *scaled.last().unwrap(),
        scaled,
        extrapolated,
        tail_variation,
        log_slope,
        divergent: !(log_slope.abs() <= 2e-3 * kappa.abs().max(1.0)),
    })
}

/// Joint fit of `log(τ⁴ I) = log L - κτ + a/τ + b/τ²`, for when `κ` is
/// only known from data and too coarsely to scale by at large `τ`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct JointLimit {
    pub limit: f64,
    pub kappa: f64,
    pub residual_rms: f64,
}

pub fn joint_limit(curve: &IndicatorCurve) -> Result<JointLimit> {
    let n = curve.taus.len();
    if n < 6 {
        return Err(Error::DecayFit(format!("need at least 6 samples, got {n}")));
    }
    if let Some((t, _)) = curve.taus.iter().zip(&curve.values).find(|(_, v)| !v.is_positive()) {
        return Err(Error::DecayFit(format!("indicator is not positive at τ = {t}")));
    }
    // Centering τ keeps the normal equations well conditioned.
    let t0 = curve.taus.iter().sum::<f64>() / n as f64;
    let rows: Vec<Vec<f64>> = curve
        .taus
        .iter()
        .map(|&t| vec![1.0, t0 - t, 1.0 / t, 1.0 / (t * t)])
        .collect();
    let y: Vec<f64> = curve
        .taus
        .iter()
        .zip(&curve.values)
        .map(|(&t, v)| v.log_mag + 4.0 * t.ln())
        .collect();
    let c = least_squares(&rows, &y, 0.0).ok_or_else(|| Error::DecayFit("singular regression".into()))?;
    let ss: f64 = rows
        .iter()
        .zip(&y)
        .map(|(r, yy)| {
            let f: f64 = r.iter().zip(&c).map(|(a, b)| a * b).sum();
            (yy - f).powi(2)
        })
        .sum();
    Ok(JointLimit {
        limit: (c[0] + c[1] * t0).exp(),
        kappa: c[1],
        residual_rms: (ss / n as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec3;

    fn geometry() -> GeometryDescriptor {
        GeometryDescriptor {
            source: Ball::new(Vec3::new(4.0, 0.0, 0.0), 0.5).unwrap(),
            receiver: Ball::new(Vec3::new(0.0, 4.0, 0.0), 0.5).unwrap(),
            obstacle: "manufactured".into(),
        }
    }

    fn manufactured(taus: &[f64], f: impl Fn(f64) -> LogValue) -> IndicatorCurve {
        IndicatorCurve::new(
            taus.to_vec(),
            taus.iter().map(|&t| f(t)).collect(),
            IndicatorSource::Semianalytic2J,
            geometry(),
        )
    }

    #[test]
    fn recovers_manufactured_rate() {
        let alpha = 5.7359;
        let c = manufactured(&tau_window(10.0, 40.0, 16), |t| LogValue {
            log_mag: 3.0 * t.ln() - alpha * t,
            sign: 1.0,
        });
        let fit = decay_fit(&c).unwrap();
        assert!((fit.rate / alpha - 1.0).abs() < 1e-3);
        assert!((fit.mu + 3.0).abs() < 1e-6);
    }

    #[test]
    fn decay_fit_guards() {
        let c = manufactured(&tau_window(1.0, 2.0, 5), |t| LogValue::from_f64((-t).exp()));
        assert!(decay_fit(&c).is_err());
        let c = manufactured(&tau_window(1.0, 20.0, 10), |t| LogValue::from_f64((t - 10.0).sin()));
        assert!(decay_fit(&c).is_err());
        let c = manufactured(&tau_window(1.0, 20.0, 10), |t| LogValue::from_f64((0.5 * t).exp()));
        assert!(matches!(decay_fit(&c), Err(Error::DecayFit(_))));
    }

    #[test]
    fn scaled_limit_manufactured() {
        let kappa = 5.7359;
        let cst = 0.025;
        let taus = tau_window(10.0, 4000.0, 24);
        let c = manufactured(&taus, |t| LogValue {
            log_mag: (cst * (1.0 + t.powf(-0.5))).ln() - 4.0 * t.ln() - kappa * t,
            sign: 1.0,
        });
        let s = scaled_limit(&c, kappa).unwrap();
        assert!(!s.divergent);
        assert!((s.last - cst).abs() <= 1.1 * cst * 4000f64.powf(-0.5));
        let wrong = scaled_limit(&c, 1.01 * kappa).unwrap();
        assert!(wrong.divergent);
    }

    #[test]
    fn csv_round_trip() {
        let c = manufactured(&tau_window(4.0, 40.0, 5), |t| LogValue { log_mag: -t, sign: 1.0 });
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.csv");
        c.write_csv(&p).unwrap();
        let back = IndicatorCurve::read_csv(&p, geometry()).unwrap();
        assert_eq!(back.taus, c.taus);
        for (a, b) in back.values.iter().zip(&c.values) {
            assert_eq!(a.log_mag, b.log_mag);
        }
        assert_eq!(back.source, c.source);
    }

    #[test]
    fn indicator_value_combines_terms() {
        let g = geometry();
        let direct = ball_ball_integral_log(&g.source, &g.receiver, 2.0).unwrap().to_f64();
        let v = indicator_value(2.0, &[1e-9, 2e-9], &[1.0, 0.5], &g.source, &g.receiver).unwrap();
        assert!((v.to_f64() - (direct - 2e-9)).abs() < 1e-20);
        assert!(indicator_value(2.0, &[1.0], &[1.0, 0.5], &g.source, &g.receiver).is_err());
    }

    #[test]
    fn window_positivity_record() {
        let c = manufactured(&[1.0, 2.0, 3.0, 4.0], |t| LogValue::from_f64(t - 2.5));
        assert_eq!(c.tau0, Some(3.0));
    }
}
