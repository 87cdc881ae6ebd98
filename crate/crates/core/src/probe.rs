//! Reconstruction procedures: reflector detection by a direction scan over
//! shifted receiver balls, curvature extraction from two focus shifts, ball
//! reconstruction and the rotation scan for principal directions.
//!
//! Every procedure reads its data through a [`DataSource`], which is either
//! exact geometry (verification), the semi-analytic indicator `2J`, or an
//! FDTD receiver trace.

use nalgebra::{Rotation3, Unit};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{
    max_shift, snell_normal, Mat2, ShapeOperator2, SpheroidFrame, TangentFrame, UnitPairGeometry, Vec3,
    VALIDATED_VARIANT,
};
use crate::indicator::{curve_from_trace, curve_semianalytic, decay_fit, joint_limit, JointLimit};
use crate::numeric::least_squares;
use crate::obstacle::{icosphere, min_broken_path_with, Ball, MinimizerOptions, ObstacleShape};
use crate::potentials::{asymptotic_rhs, AsymptoticInputs, AsymptoticKind, JProblem, ReflectorTerm};
use crate::wavesim::ReceiverTrace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeMode {
    Geometry,
    SemiAnalytic,
    Fdtd,
}

/// Where decay rates and scaled limits come from.
#[derive(Clone, Debug)]
pub enum DataSource<'a> {
    /// Exact minima and curvature determinants of a known obstacle.
    Geometry(&'a ObstacleShape),
    /// The indicator `2J`, evaluated semi-analytically.
    SemiAnalytic {
        obstacle: &'a ObstacleShape,
        decay_taus: Vec<f64>,
        limit_taus: Vec<f64>,
    },
    /// A stored receiver trace; `limit_taus` must stay below the resolvable
    /// cap of the run.
    Fdtd {
        trace: &'a ReceiverTrace,
        decay_taus: Vec<f64>,
        limit_taus: Vec<f64>,
    },
}

/// Estimate of `min_{∂D} φ(x; p, p_g) - η - η_g` for a ball pair.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RateEstimate {
    pub rate: f64,
    pub uncertainty: f64,
}

impl DataSource<'_> {
    pub fn mode(&self) -> ProbeMode {
        match self {
            DataSource::Geometry(_) => ProbeMode::Geometry,
            DataSource::SemiAnalytic { .. } => ProbeMode::SemiAnalytic,
            DataSource::Fdtd { .. } => ProbeMode::Fdtd,
        }
    }

    pub fn obstacle(&self) -> Option<&ObstacleShape> {
        match self {
            DataSource::Geometry(o) => Some(o),
            DataSource::SemiAnalytic { obstacle, .. } => Some(obstacle),
            DataSource::Fdtd { .. } => None,
        }
    }

    fn check_trace_source(trace: &ReceiverTrace, b: &Ball) -> Result<()> {
        if (trace.source.center - b.center).norm() > 1e-12 || (trace.source.radius - b.radius).abs() > 1e-12 {
            return Err(Error::InvalidParameter(
                "the trace was recorded for a different source ball".into(),
            ));
        }
        Ok(())
    }

    /// Decay rate of the indicator for the pair `(b, g)`.
    pub fn rate(&self, b: &Ball, g: &Ball) -> Result<RateEstimate> {
        match self {
            DataSource::Geometry(obstacle) => {
                let (c, _) = min_broken_path_with(obstacle, &b.center, &g.center, &MinimizerOptions::coarse())?;
                Ok(RateEstimate {
                    rate: c - b.radius - g.radius,
                    uncertainty: 0.0,
                })
            }
            DataSource::SemiAnalytic {
                obstacle, decay_taus, ..
            } => {
                let problem = JProblem::with_options(obstacle, b, g, &MinimizerOptions::coarse())?;
                let fit = decay_fit(&curve_semianalytic(&problem, decay_taus, "")?)?;
                Ok(RateEstimate {
                    rate: fit.rate,
                    uncertainty: fit.uncertainty,
                })
            }
            DataSource::Fdtd { trace, decay_taus, .. } => {
                Self::check_trace_source(trace, b)?;
                let fit = decay_fit(&curve_from_trace(trace, g, decay_taus, "")?)?;
                Ok(RateEstimate {
                    rate: fit.rate,
                    uncertainty: fit.uncertainty,
                })
            }
        }
    }

    /// `lim τ⁴ e^{τκ} I(τ)` for the pair `(b, g)`, with `κ` fitted jointly
    /// from the same samples.
    pub fn scaled_limit(&self, b: &Ball, g: &Ball) -> Result<JointLimit> {
        let curve = match self {
            DataSource::Geometry(_) => {
                return Err(Error::InvalidParameter(
                    "geometry mode evaluates determinants directly".into(),
                ))
            }
            DataSource::SemiAnalytic {
                obstacle, limit_taus, ..
            } => {
                let problem = JProblem::with_options(obstacle, b, g, &MinimizerOptions::coarse())?;
                curve_semianalytic(&problem, limit_taus, "")?
            }
            DataSource::Fdtd { trace, limit_taus, .. } => {
                Self::check_trace_source(trace, b)?;
                curve_from_trace(trace, g, limit_taus, "")?
            }
        };
        let lim = joint_limit(&curve)?;
        if !(lim.limit > 0.0 && lim.limit.is_finite()) {
            return Err(Error::DecayFit(format!(
                "scaled indicator has no positive limit ({})",
                lim.limit
            )));
        }
        Ok(lim)
    }
}

/// `ν_q = -(A + A')/sqrt(2(1 + A·A'))`.
pub fn extract_normal(q: &Vec3, p: &Vec3, p_prime: &Vec3) -> Result<Vec3> {
    snell_normal(&UnitPairGeometry::new(q, p, p_prime)?)
}

/// One connected group of hit directions and its refined representative.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HitCluster {
    /// Indices into the scan grid.
    pub members: Vec<usize>,
    pub omega: Vec3,
    pub q: Vec3,
    pub normal: Vec3,
    /// Rate excess at the refined direction.
    pub excess: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanResult {
    pub mode: ProbeMode,
    pub s: f64,
    pub c: f64,
    pub delta_c: f64,
    pub omegas: Vec<Vec3>,
    /// Fitted rate plus `η + η' - s`; `None` where the fit failed.
    pub rates: Vec<Option<f64>>,
    pub hits: Vec<bool>,
    /// `p' + s(ω; p, p', c) ω` for every hit.
    pub hit_points: Vec<(usize, Vec3)>,
    pub clusters: Vec<HitCluster>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ScanOptions {
    pub s: f64,
    pub grid_level: usize,
    /// Overrides the default band `max(2·uncertainty, 0.01·c)`.
    pub delta_c: Option<f64>,
    pub refine_rounds: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            s: 0.3,
            grid_level: 4,
            delta_c: None,
            refine_rounds: 4,
        }
    }
}

/// Rate excess `rate_ω + η + η' - c` of the shifted ball in direction `ω`;
/// it vanishes exactly when `ω` points at a first reflector.
pub fn direction_excess(source: &DataSource, b: &Ball, bp: &Ball, s: f64, c: f64, omega: &Vec3) -> Result<f64> {
    let g = Ball::new(bp.center + s * omega, bp.radius - s)?;
    let r = source.rate(b, &g)?;
    Ok(r.rate + b.radius + g.radius + s - c)
}

/// Minimizes the excess near `omega0` by repeated quadratic fits on a
/// shrinking stencil in the tangent plane of the direction sphere.
fn refine_direction(
    source: &DataSource,
    b: &Ball,
    bp: &Ball,
    s: f64,
    c: f64,
    omega0: Vec3,
    radius0: f64,
    rounds: usize,
) -> (Vec3, f64) {
    let mut omega = omega0;
    let mut best = direction_excess(source, b, bp, s, c, &omega).unwrap_or(f64::INFINITY);
    let mut r = radius0;
    for _ in 0..rounds {
        let tf = TangentFrame::new(Vec3::zeros(), omega, None);
        let offsets: Vec<(f64, f64)> = (-2..=2)
            .flat_map(|i| (-2..=2).map(move |j| (i as f64 * 0.5, j as f64 * 0.5)))
            .collect();
        let samples: Vec<(f64, f64, f64)> = offsets
            .par_iter()
            .filter_map(|&(x, y)| {
                let w = (omega + r * (x * tf.e1 + y * tf.e2)).normalize();
                direction_excess(source, b, bp, s, c, &w).ok().map(|e| (x, y, e))
            })
            .collect();
        let mut next = omega;
        let mut next_val = best;
        for &(x, y, e) in &samples {
            if e < next_val {
                next_val = e;
                next = (omega + r * (x * tf.e1 + y * tf.e2)).normalize();
            }
        }
        if samples.len() >= 6 {
            let rows: Vec<Vec<f64>> = samples
                .iter()
                .map(|&(x, y, _)| vec![1.0, x, y, x * x, x * y, y * y])
                .collect();
            let vals: Vec<f64> = samples.iter().map(|s| s.2).collect();
            if let Some(k) = least_squares(&rows, &vals, 0.0) {
                let h = Mat2::new(2.0 * k[3], k[4], k[4], 2.0 * k[5]);
                if h.determinant() > 0.0 && h[(0, 0)] > 0.0 {
                    if let Some(v) = h.try_inverse().map(|hi| -(hi * nalgebra::Vector2::new(k[1], k[2]))) {
                        if v.norm() <= 1.5 {
                            let w = (omega + r * (v.x * tf.e1 + v.y * tf.e2)).normalize();
                            if let Ok(e) = direction_excess(source, b, bp, s, c, &w) {
                                if e <= next_val + 1e-12 * c {
                                    next = w;
                                    next_val = e;
                                }
                            }
                        }
                    }
                }
            }
        }
        omega = next;
        best = next_val;
        r *= 0.25;
    }
    (omega, best)
}

/// Scans shifted receiver balls `B_{η'-s}(p' + sω)` over an icosphere grid
/// of directions and classifies each as a hit when its rate excess is within
/// `δc`. `c` and its uncertainty come from a decay fit of the unshifted pair.
pub fn scan_reflector(
    source: &DataSource,
    b: &Ball,
    bp: &Ball,
    c: f64,
    c_uncertainty: f64,
    opts: &ScanOptions,
) -> Result<ScanResult> {
    let s = opts.s;
    if !(s > 0.0 && s < bp.radius) {
        return Err(Error::ShiftOutOfRange { s, max: bp.radius });
    }
    if !(c.is_finite() && c > (b.center - bp.center).norm()) {
        return Err(Error::InvalidParameter(
            "scan needs the broken-path minimum c from a decay fit".into(),
        ));
    }
    let delta_c = opts.delta_c.unwrap_or_else(|| (2.0 * c_uncertainty).max(1e-2 * c));
    let frame = SpheroidFrame::new(b.center, bp.center, c)?;
    let grid = icosphere(opts.grid_level);
    let rates: Vec<Option<f64>> = grid
        .vertices
        .par_iter()
        .map(|w| direction_excess(source, b, bp, s, c, w).ok().map(|e| e + c - s))
        .collect();
    let hits: Vec<bool> = rates
        .iter()
        .map(|r| r.is_some_and(|r| (r - (c - s)).abs() <= delta_c))
        .collect();
    let hit_points = hits
        .iter()
        .enumerate()
        .filter(|(_, h)| **h)
        .map(|(i, _)| (i, frame.point(&grid.vertices[i])))
        .collect();

    // Connected components of the hit set on the icosphere graph.
    let mut label = vec![usize::MAX; hits.len()];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for start in 0..hits.len() {
        if !hits[start] || label[start] != usize::MAX {
            continue;
        }
        let id = groups.len();
        let mut stack = vec![start];
        let mut members = Vec::new();
        label[start] = id;
        while let Some(i) = stack.pop() {
            members.push(i);
            for &j in grid.neighbors(i) {
                let j = j as usize;
                if hits[j] && label[j] == usize::MAX {
                    label[j] = id;
                    stack.push(j);
                }
            }
        }
        members.sort_unstable();
        groups.push(members);
    }

    let spacing = grid.spacing();
    let clusters = groups
        .into_iter()
        .map(|members| {
            let &start = members
                .iter()
                .min_by(|&&i, &&j| rates[i].unwrap().total_cmp(&rates[j].unwrap()))
                .unwrap();
            let (omega, ex) = refine_direction(
                source,
                b,
                bp,
                s,
                c,
                grid.vertices[start],
                2.0 * spacing,
                opts.refine_rounds,
            );
            let q = frame.point(&omega);
            Ok(HitCluster {
                members,
                omega,
                q,
                normal: extract_normal(&q, &b.center, &bp.center)?,
                excess: ex,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ScanResult {
        mode: source.mode(),
        s,
        c,
        delta_c,
        omegas: grid.vertices.clone(),
        rates,
        hits,
        hit_points,
        clusters,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub mode: ProbeMode,
    pub q: Vec3,
    pub normal: Vec3,
    /// Extracted Gauss curvature.
    pub gauss: f64,
    /// Extracted mean-curvature combination `H - κ S(A×A')·(A×A')/(1 + A·A')`.
    pub h_combination: f64,
    /// Correction variant used for `κ`.
    pub variant: String,
    pub shifts: [f64; 2],
    pub dets: [f64; 2],
    pub condition: f64,
}

/// `det(S_q(E_{c-s}(p, p' + sA')) - S_q(∂D))` from a scaled limit `L`,
/// inverting the leading-order asymptotics of the shifted pair.
pub fn det_from_limit(geo: &UnitPairGeometry, eta: f64, eta_prime: f64, s: f64, limit: f64) -> Result<f64> {
    let inputs = AsymptoticInputs {
        terms: vec![ReflectorTerm {
            q: geo.q,
            dist_p: geo.dist_p,
            dist_p_prime: geo.dist_p_prime,
            det: 1.0,
        }],
        eta,
        eta_prime,
        s,
    };
    let unit = asymptotic_rhs(AsymptoticKind::ShiftedBistatic, &inputs)?;
    Ok((unit / limit).powi(2))
}

/// Determinants at shifts `s1 < s2` and the unique solution of the linear
/// system they define for the mean-curvature combination and `K`.
pub fn curvature_extract(
    source: &DataSource,
    q: &Vec3,
    b: &Ball,
    bp: &Ball,
    s1: f64,
    s2: f64,
) -> Result<CurvatureReport> {
    let (p, pp) = (b.center, bp.center);
    let geo = UnitPairGeometry::new(q, &p, &pp)?;
    let normal = snell_normal(&geo)?;
    let smax = max_shift(&geo, &p, &pp, bp.radius);
    if !(s1 > 0.0 && s1 < s2) {
        return Err(Error::InvalidParameter(format!(
            "shifts must satisfy 0 < s1 < s2, got {s1}, {s2}"
        )));
    }
    if s2 >= smax {
        return Err(Error::ShiftOutOfRange { s: s2, max: smax });
    }
    let shifts = [s1, s2];
    let mut dets = [0.0; 2];
    match source {
        DataSource::Geometry(obstacle) => {
            let hint = (geo.cross.norm() > 1e-8).then_some(geo.cross);
            let op = obstacle.shape_operator_at(q, hint)?.op;
            for (d, &s) in dets.iter_mut().zip(&shifts) {
                *d = crate::geom::det_shape_diff(q, &op, &p, &pp, s, bp.radius)?;
            }
        }
        _ => {
            for (d, &s) in dets.iter_mut().zip(&shifts) {
                let g = Ball::new(pp + s * geo.a_prime, bp.radius - s)?;
                let limit = source.scaled_limit(b, &g)?;
                *d = det_from_limit(&geo, b.radius, bp.radius, s, limit.limit)?;
            }
        }
    }
    for &d in &dets {
        if !(d > 0.0) {
            return Err(Error::DegenerateDeterminant(d));
        }
    }
    // det_i - λ_i²/4 = -β λ_i X + K with β = sqrt(2/(1 + A·A')).
    let beta = (2.0 / (1.0 + geo.dot)).sqrt();
    let lam = [geo.shifted_lambda(s1), geo.shifted_lambda(s2)];
    let m = Mat2::new(-beta * lam[0], 1.0, -beta * lam[1], 1.0);
    let sv = m.singular_values();
    let condition = sv.max() / sv.min();
    if !(condition < 1e10) {
        return Err(Error::IllConditioned(format!(
            "shift system condition number {condition:.3e}"
        )));
    }
    let rhs = nalgebra::Vector2::new(dets[0] - 0.25 * lam[0] * lam[0], dets[1] - 0.25 * lam[1] * lam[1]);
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::IllConditioned("singular shift system".into()))?;
    Ok(CurvatureReport {
        mode: source.mode(),
        q: *q,
        normal,
        gauss: sol[1],
        h_combination: sol[0],
        variant: VALIDATED_VARIANT.label().to_string(),
        shifts,
        dets,
        condition,
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ReconstructOptions {
    pub scan: ScanOptions,
    pub s1: f64,
    pub s2: f64,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        Self {
            scan: ScanOptions::default(),
            s1: 0.1,
            s2: 0.4,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BallReconstruction {
    pub mode: ProbeMode,
    pub center: Vec3,
    pub radius: f64,
    pub c: f64,
    pub c_uncertainty: f64,
    pub reflector: Vec3,
    pub normal: Vec3,
    pub curvature: CurvatureReport,
    pub scan_hits: usize,
}

/// Recovers a ball obstacle: broken-path minimum from the decay rate, the
/// unique reflector from the direction scan, and the radius from the Gauss
/// curvature there.
pub fn reconstruct_ball(
    source: &DataSource,
    b: &Ball,
    bp: &Ball,
    opts: &ReconstructOptions,
) -> Result<BallReconstruction> {
    let r = source.rate(b, bp)?;
    let c = r.rate + b.radius + bp.radius;
    let scan = scan_reflector(source, b, bp, c, r.uncertainty, &opts.scan)?;
    let cluster = match scan.clusters.as_slice() {
        [one] => one,
        [] => return Err(Error::Hypothesis("the scan found no reflector".into())),
        many => {
            return Err(Error::Hypothesis(format!(
                "the scan found {} reflector clusters; the obstacle is not a ball or δc is too loose",
                many.len()
            )))
        }
    };
    // A ball has a single reflector at the point of the spheroid E_c.
    let mut s2 = opts.s2;
    let geo = UnitPairGeometry::new(&cluster.q, &b.center, &bp.center)?;
    let smax = max_shift(&geo, &b.center, &bp.center, bp.radius);
    if s2 >= smax {
        s2 = 0.5 * (opts.s1 + smax);
    }
    let curvature = curvature_extract(source, &cluster.q, b, bp, opts.s1, s2)?;
    if !(curvature.gauss > 0.0) {
        return Err(Error::Hypothesis(format!(
            "extracted Gauss curvature {} is not positive",
            curvature.gauss
        )));
    }
    let radius = 1.0 / curvature.gauss.sqrt();
    Ok(BallReconstruction {
        mode: source.mode(),
        center: cluster.q - radius * cluster.normal,
        radius,
        c,
        c_uncertainty: r.uncertainty,
        reflector: cluster.q,
        normal: cluster.normal,
        curvature,
        scan_hits: cluster.members.len(),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PrincipalReport {
    pub mode: ProbeMode,
    pub q: Vec3,
    pub normal: Vec3,
    pub thetas: Vec<f64>,
    /// Mean-curvature combination at each rotation angle.
    pub combination: Vec<f64>,
    pub gauss: Vec<f64>,
    /// `a0 + a1 cos 2θ + a2 sin 2θ` fitted to the combination.
    pub fit: [f64; 3],
    pub isotropic: bool,
    /// Directions of the larger and the smaller principal curvature; `None`
    /// when isotropic.
    pub directions: Option<(Vec3, Vec3)>,
    pub mean: f64,
    pub gauss_mean: f64,
    pub principal: (f64, f64),
    /// Shape operator in the frame `(V1, V2, ν)` (any frame when isotropic).
    pub frame: TangentFrame,
    pub shape_operator: [[f64; 2]; 2],
    /// Largest change of `φ(q; p(θ), p'(θ))` and `A·A'` over the rotation.
    pub invariance_error: f64,
}

/// Rotates the foci about the normal line at `q` and reads off the
/// principal directions from the angular variation of the extracted
/// combination, whose correction term depends on the direction of `A×A'`.
pub fn principal_directions(
    source: &DataSource,
    q: &Vec3,
    b: &Ball,
    bp: &Ball,
    thetas: &[f64],
    s1: f64,
    s2: f64,
    isotropic_tol: f64,
) -> Result<PrincipalReport> {
    if thetas.len() < 3 {
        return Err(Error::InvalidParameter("need at least 3 rotation angles".into()));
    }
    let geo = UnitPairGeometry::new(q, &b.center, &bp.center)?;
    if geo.cross.norm() < 1e-8 {
        return Err(Error::Degenerate(
            "A×A' vanishes; rotating about the normal gives no information".into(),
        ));
    }
    let nu = snell_normal(&geo)?;
    let axis = Unit::new_normalize(nu);
    let phi0 = geo.broken_path();
    let rotated = |theta: f64| -> Result<(Ball, Ball)> {
        let r = Rotation3::from_axis_angle(&axis, theta);
        Ok((
            Ball::new(q + r * (b.center - q), b.radius)?,
            Ball::new(q + r * (bp.center - q), bp.radius)?,
        ))
    };
    let reports = thetas
        .par_iter()
        .map(|&t| {
            let (bt, bpt) = rotated(t)?;
            curvature_extract(source, q, &bt, &bpt, s1, s2)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut invariance_error: f64 = 0.0;
    for &t in thetas {
        let (bt, bpt) = rotated(t)?;
        let g = UnitPairGeometry::new(q, &bt.center, &bpt.center)?;
        invariance_error = invariance_error
            .max((g.broken_path() - phi0).abs())
            .max((g.dot - geo.dot).abs());
    }
    let combination: Vec<f64> = reports.iter().map(|r| r.h_combination).collect();
    let gauss: Vec<f64> = reports.iter().map(|r| r.gauss).collect();
    let rows: Vec<Vec<f64>> = thetas
        .iter()
        .map(|&t| vec![1.0, (2.0 * t).cos(), (2.0 * t).sin()])
        .collect();
    let k = least_squares(&rows, &combination, 0.0)
        .ok_or_else(|| Error::IllConditioned("rotation angles do not determine a 2θ sinusoid".into()))?;
    // X(θ) = H(1 - g) - gΔ cos 2(θ - θ1), with g the correction weight and
    // Δ half the principal curvature gap.
    let g = VALIDATED_VARIANT.coefficient() * geo.cross.norm_squared() / (1.0 + geo.dot);
    let mean = k[0] / (1.0 - g);
    let gauss_mean = gauss.iter().sum::<f64>() / gauss.len() as f64;
    let amplitude = k[1].hypot(k[2]);
    let isotropic = amplitude <= isotropic_tol * k[0].abs().max(1.0);
    let u0 = geo.cross.normalize();
    let gap = (mean * mean - gauss_mean).max(0.0).sqrt();
    let principal = (mean + gap, mean - gap);
    let (directions, frame) = if isotropic {
        (None, TangentFrame::new(*q, nu, Some(u0)))
    } else {
        let theta1 = 0.5 * (-k[2]).atan2(-k[1]);
        let v1 = Rotation3::from_axis_angle(&axis, theta1) * u0;
        let tf = TangentFrame::new(*q, nu, Some(v1));
        ((Some((tf.e1, tf.e2))), tf)
    };
    let op = ShapeOperator2::new(frame, Mat2::new(principal.0, 0.0, 0.0, principal.1));
    Ok(PrincipalReport {
        mode: source.mode(),
        q: *q,
        normal: nu,
        thetas: thetas.to_vec(),
        combination,
        gauss,
        fit: [k[0], k[1], k[2]],
        isotropic,
        directions,
        mean,
        gauss_mean,
        principal,
        frame,
        shape_operator: [[op.m[(0, 0)], op.m[(0, 1)]], [op.m[(1, 0)], op.m[(1, 1)]]],
        invariance_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn s1() -> (ObstacleShape, Ball, Ball) {
        (
            ObstacleShape::sphere(Vec3::zeros(), 1.0).unwrap(),
            Ball::new(Vec3::new(4.0, 0.0, 0.0), 0.5).unwrap(),
            Ball::new(Vec3::new(0.0, 4.0, 0.0), 0.5).unwrap(),
        )
    }

    #[test]
    fn normal_examples() {
        let (_, b, bp) = s1();
        let q = Vec3::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0);
        let n = extract_normal(&q, &b.center, &bp.center).unwrap();
        assert!((n - q).norm() < 1e-12);
        let p = Vec3::new(3.0, 0.0, 0.0);
        let q = Vec3::new(1.0, 0.0, 0.0);
        assert!((extract_normal(&q, &p, &p).unwrap() - q).norm() < 1e-15);
        assert!(extract_normal(&Vec3::zeros(), &Vec3::x(), &-Vec3::x()).is_err());
    }

    #[test]
    fn geometry_curvature_on_s1() {
        let (d, b, bp) = s1();
        let q = Vec3::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0);
        let r = curvature_extract(&DataSource::Geometry(&d), &q, &b, &bp, 0.1, 0.2).unwrap();
        assert!((r.gauss - 1.0).abs() < 1e-6, "{}", r.gauss);
        // Sphere: S = -I, so S(C)·C = -|C|².
        let geo = UnitPairGeometry::new(&q, &b.center, &bp.center).unwrap();
        let expect = -1.0 + 0.25 * geo.cross.norm_squared() / (1.0 + geo.dot);
        assert!((r.h_combination - expect).abs() < 1e-6);
        assert!(r.dets[1] > r.dets[0]);
        assert!(curvature_extract(&DataSource::Geometry(&d), &q, &b, &bp, 0.2, 0.2).is_err());
    }

    #[test]
    fn monostatic_combination_is_mean_curvature() {
        let d = ObstacleShape::sphere(Vec3::zeros(), 2.0).unwrap();
        let b = Ball::new(Vec3::new(5.0, 0.0, 0.0), 0.5).unwrap();
        let q = Vec3::new(2.0, 0.0, 0.0);
        let r = curvature_extract(&DataSource::Geometry(&d), &q, &b, &b, 0.1, 0.3).unwrap();
        assert!((r.h_combination + 0.5).abs() < 1e-6);
        assert!((r.gauss - 0.25).abs() < 1e-6);
    }

    #[test]
    fn geometry_ball_reconstruction() {
        let (d, b, bp) = s1();
        let rec = reconstruct_ball(&DataSource::Geometry(&d), &b, &bp, &ReconstructOptions::default()).unwrap();
        assert!(rec.center.norm() < 1e-6, "{:?}", rec.center);
        assert!((rec.radius - 1.0).abs() < 1e-6, "{}", rec.radius);
    }

    #[test]
    fn sphere_is_isotropic() {
        let (d, b, bp) = s1();
        let q = Vec3::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0);
        let thetas: Vec<f64> = (0..8).map(|k| k as f64 * std::f64::consts::PI / 8.0).collect();
        let r = principal_directions(&DataSource::Geometry(&d), &q, &b, &bp, &thetas, 0.1, 0.2, 1e-6).unwrap();
        assert!(r.isotropic);
        assert!(r.invariance_error < 1e-12);
        assert!((r.mean + 1.0).abs() < 1e-6);
        for x in &r.combination {
            assert!((x - r.combination[0]).abs() < 1e-7);
        }
    }

    #[test]
    fn prolate_spheroid_principal_directions() {
        let (a, bb) = (2.0, 1.0);
        let e = crate::obstacle::Ellipsoid::new(Vec3::zeros(), Vec3::new(a, bb, bb), nalgebra::Matrix3::identity())
            .unwrap();
        let d = ObstacleShape::Ellipsoid(e);
        let q = Vec3::new(1.2, 0.64, 0.48);
        let grad = Vec3::new(q.x / (a * a), q.y / (bb * bb), q.z / (bb * bb));
        let nu = grad.normalize();
        let tilt = Unit::new_normalize(nu.cross(&Vec3::new(0.3, -1.0, 0.7)));
        let p = q + 3.0 * (Rotation3::from_axis_angle(&tilt, 0.7) * nu);
        let pp = q + 3.5 * (Rotation3::from_axis_angle(&tilt, -0.7) * nu);
        let b = Ball::new(p, 0.4).unwrap();
        let bp = Ball::new(pp, 0.4).unwrap();
        let thetas: Vec<f64> = (0..12).map(|k| k as f64 * std::f64::consts::PI / 12.0).collect();
        let r = principal_directions(&DataSource::Geometry(&d), &q, &b, &bp, &thetas, 0.1, 0.3, 1e-6).unwrap();
        assert!(!r.isotropic);
        // Parallels of a surface of revolution about the x axis and the
        // meridians are the lines of curvature.
        let parallel = Vec3::x().cross(&q).normalize();
        let meridian = nu.cross(&parallel);
        let (v1, v2) = r.directions.unwrap();
        let ang = |u: &Vec3, v: &Vec3| u.dot(v).abs().min(1.0).acos().to_degrees();
        let best = ang(&v1, &parallel).min(ang(&v1, &meridian));
        assert!(best < 2.0, "{best}");
        assert!(ang(&v1, &v2) > 89.999);
        let s2 = q.x * q.x / a.powi(4) + (q.y * q.y + q.z * q.z) / bb.powi(4);
        let h = (q.norm_squared() - a * a - 2.0 * bb * bb) / (2.0 * (a * bb * bb).powi(2) * s2.powf(1.5));
        assert!((r.mean / h - 1.0).abs() < 0.02, "{} vs {h}", r.mean);
        assert!(r.invariance_error < 1e-12);
    }
}
