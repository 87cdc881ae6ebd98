//! Finite-time Laplace transform `w(τ) = ∫_0^T e^{-τt} u(t) dt` of sampled
//! traces.
//!
//! The weights integrate the piecewise-linear interpolant of the samples
//! against `e^{-τt}` exactly, so a constant trace is transformed without
//! error for every `τ` and `τ dt`.

use rayon::prelude::*;

/// `(cosh x - 1)·2/x²`, `(x - 1 + e^{-x})/x²` and `(e^{x} - 1 - x)/x²` with
/// series fallbacks near zero.
fn interior_factor(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        1.0 + x * x / 12.0
    } else {
        let s = (0.5 * x).sinh() / (0.5 * x);
        s * s
    }
}

fn start_factor(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        0.5 - x / 6.0 + x * x / 24.0
    } else {
        (x - 1.0 + (-x).exp()) / (x * x)
    }
}

fn end_factor(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        0.5 + x / 6.0 + x * x / 24.0
    } else {
        (x.exp_m1() - x) / (x * x)
    }
}

/// Weights `W_n` with `w(τ) = Σ_n W_n u_n` for samples at `t_n = n dt`,
/// `n = 0..=n_steps`.
pub fn laplace_weights(tau: f64, dt: f64, n_steps: usize) -> Vec<f64> {
    let x = tau * dt;
    let mid = dt * interior_factor(x);
    let mut w: Vec<f64> = (0..=n_steps).map(|n| (-tau * n as f64 * dt).exp() * mid).collect();
    if n_steps == 0 {
        w[0] = 0.0;
        return w;
    }
    w[0] = dt * start_factor(x);
    w[n_steps] = (-tau * n_steps as f64 * dt).exp() * dt * end_factor(x);
    w
}

/// Transform of a single trace.
pub fn laplace_trace(samples: &[f64], dt: f64, tau: f64) -> f64 {
    let w = laplace_weights(tau, dt, samples.len().saturating_sub(1));
    w.iter().zip(samples).map(|(w, u)| w * u).sum()
}

/// Transforms of many traces stored time-major (`samples[n * n_nodes + i]`).
/// Returns `out[k][i] = w(x_i, τ_k)`.
pub fn accumulate_laplace(samples: &[f64], n_nodes: usize, dt: f64, taus: &[f64]) -> Vec<Vec<f64>> {
    let n_times = samples.len().checked_div(n_nodes).unwrap_or(0);
    taus.par_iter()
        .map(|&tau| {
            let w = laplace_weights(tau, dt, n_times.saturating_sub(1));
            let mut acc = vec![0.0; n_nodes];
            for (n, wn) in w.iter().enumerate() {
                let row = &samples[n * n_nodes..(n + 1) * n_nodes];
                for (a, u) in acc.iter_mut().zip(row) {
                    *a += wn * u;
                }
            }
            acc
        })
        .collect()
}

/// Laplace accumulators updated while time stepping, so that full traces
/// need not be stored.
#[derive(Clone, Debug)]
pub struct LaplaceAccumulator {
    pub taus: Vec<f64>,
    dt: f64,
    n_steps: usize,
    n: usize,
    pub values: Vec<Vec<f64>>,
}

impl LaplaceAccumulator {
    pub fn new(taus: &[f64], dt: f64, n_steps: usize, n_nodes: usize) -> Self {
        Self {
            taus: taus.to_vec(),
            dt,
            n_steps,
            n: 0,
            values: vec![vec![0.0; n_nodes]; taus.len()],
        }
    }

    /// Adds the samples of the next time level.
    pub fn push(&mut self, row: &[f64]) {
        let n = self.n;
        for (k, &tau) in self.taus.iter().enumerate() {
            let x = tau * self.dt;
            let w = if self.n_steps == 0 {
                0.0
            } else if n == 0 {
                self.dt * start_factor(x)
            } else if n == self.n_steps {
                (-tau * n as f64 * self.dt).exp() * self.dt * end_factor(x)
            } else {
                (-tau * n as f64 * self.dt).exp() * self.dt * interior_factor(x)
            };
            for (a, u) in self.values[k].iter_mut().zip(row) {
                *a += w * u;
            }
        }
        self.n += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_trace() {
        let (dt, n) = (0.025, 320);
        let t = dt * n as f64;
        let u = vec![1.0; n + 1];
        for tau in [0.5, 4.0, 40.0, 400.0] {
            let w = laplace_trace(&u, dt, tau);
            let exact = -(-tau * t).exp_m1() / tau;
            assert!((w - exact).abs() < 1e-14 * exact.max(1e-300) * 10.0, "τ = {tau}");
        }
    }

    #[test]
    fn sine_trace() {
        let (dt, n) = (2e-5, 250_000);
        let t = dt * n as f64;
        let om = 1.3;
        let u: Vec<f64> = (0..=n).map(|k| (om * k as f64 * dt).sin()).collect();
        for tau in [0.5, 2.0, 8.0] {
            let w = laplace_trace(&u, dt, tau);
            let exact =
                om / (tau * tau + om * om) * (1.0 - (-tau * t).exp() * ((om * t).cos() + tau / om * (om * t).sin()));
            assert!((w - exact).abs() < 1e-10, "τ = {tau}: {w} vs {exact}");
        }
    }

    #[test]
    fn accumulator_matches_batch() {
        let (dt, n, nodes) = (0.1, 50, 3);
        let samples: Vec<f64> = (0..(n + 1) * nodes).map(|k| ((k * 7919) % 13) as f64 - 6.0).collect();
        let taus = [1.0, 3.0];
        let batch = accumulate_laplace(&samples, nodes, dt, &taus);
        let mut acc = LaplaceAccumulator::new(&taus, dt, n, nodes);
        for row in samples.chunks(nodes) {
            acc.push(row);
        }
        for (b, a) in batch.iter().zip(&acc.values) {
            for (x, y) in b.iter().zip(a) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
