//! JSON run configuration shared by the command-line tool and the C API.
//!
//! Lengths are in the same units as the wave speed, which is fixed to 1.
//!
//! ```json
//! {
//!   "obstacle": { "kind": "sphere", "center": [0, 0, 0], "radius": 1 },
//!   "source":   { "center": [4, 0, 0], "radius": 0.5 },
//!   "receiver": { "center": [0, 4, 0], "radius": 0.5 },
//!   "mode": "semi_analytic",
//!   "tau": { "min": 40, "max": 640, "count": 10 },
//!   "fdtd": { "h": 0.05, "t_final": 8 },
//!   "out": "out",
//!   "seed": 0
//! }
//! ```
//!
//! Obstacle kinds: `sphere {center, radius}`, `ellipsoid {center, semi_axes,
//! rotation?}`, `mesh {path}` (ASCII `v`/`f` lines) and `union {members}`.
//! Every section other than the geometry is optional.

use std::path::{Path, PathBuf};

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::indicator::{curve_from_trace, resolvable_tau_cap, tau_window};
use crate::obstacle::{hull_clearance_at_level, min_broken_path, Ball, Ellipsoid, ObstacleShape, TriMesh};
use crate::probe::{DataSource, ProbeMode, ReconstructOptions, ScanOptions};
use crate::wavesim::{simulate, Formulation, ReceiverTrace, SimulationConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObstacleSpec {
    Sphere {
        center: Vec3,
        radius: f64,
    },
    Ellipsoid {
        center: Vec3,
        semi_axes: Vec3,
        /// Columns are the body axes; identity when absent.
        #[serde(default)]
        rotation: Option<[[f64; 3]; 3]>,
    },
    Mesh {
        path: PathBuf,
    },
    Union {
        members: Vec<ObstacleSpec>,
    },
}

impl ObstacleSpec {
    /// Relative mesh paths are resolved against `base`.
    pub fn build(&self, base: &Path) -> Result<ObstacleShape> {
        Ok(match self {
            ObstacleSpec::Sphere { center, radius } => ObstacleShape::sphere(*center, *radius)?,
            ObstacleSpec::Ellipsoid {
                center,
                semi_axes,
                rotation,
            } => {
                let rot = rotation
                    .map(|r| Matrix3::from_fn(|i, j| r[i][j]))
                    .unwrap_or_else(Matrix3::identity);
                ObstacleShape::Ellipsoid(Ellipsoid::new(*center, *semi_axes, rot)?)
            }
            ObstacleSpec::Mesh { path } => ObstacleShape::mesh(TriMesh::load(&base.join(path))?),
            ObstacleSpec::Union { members } => {
                if members.is_empty() {
                    return Err(Error::InvalidParameter("union obstacle has no members".into()));
                }
                ObstacleShape::Union(members.iter().map(|m| m.build(base)).collect::<Result<_>>()?)
            }
        })
    }

    pub fn describe(&self) -> String {
        match self {
            ObstacleSpec::Sphere { radius, .. } => format!("sphere(r={radius})"),
            ObstacleSpec::Ellipsoid { semi_axes, .. } => {
                format!("ellipsoid({}, {}, {})", semi_axes.x, semi_axes.y, semi_axes.z)
            }
            ObstacleSpec::Mesh { path } => format!("mesh({})", path.display()),
            ObstacleSpec::Union { members } => {
                let parts: Vec<String> = members.iter().map(|m| m.describe()).collect();
                format!("union[{}]", parts.join(", "))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauSpec {
    pub min: f64,
    /// For FDTD data, the resolvable cap of the run when absent.
    #[serde(default)]
    pub max: Option<f64>,
    pub count: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FdtdSpec {
    pub h: f64,
    pub t_final: f64,
    pub cfl: f64,
    pub formulation: Formulation,
    pub margin_cells: usize,
    /// Also run at `2h` to bound the trusted `τ` range.
    pub companion: bool,
    /// Tolerance of the fine/coarse agreement that sets the `τ` cap.
    pub cap_tolerance: f64,
}

impl Default for FdtdSpec {
    fn default() -> Self {
        Self {
            h: 0.05,
            t_final: 8.0,
            cfl: 0.5,
            formulation: Formulation::Scattered,
            margin_cells: 4,
            companion: true,
            cap_tolerance: 0.05,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeSpec {
    pub s: f64,
    pub grid_level: usize,
    pub delta_c: Option<f64>,
    pub refine_rounds: usize,
    pub s1: f64,
    pub s2: f64,
    /// Rotation angles for `principal`, evenly spaced in `[0, π)`.
    pub rotations: usize,
    pub isotropic_tol: f64,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        let r = ReconstructOptions::default();
        Self {
            s: r.scan.s,
            grid_level: r.scan.grid_level,
            delta_c: r.scan.delta_c,
            refine_rounds: r.scan.refine_rounds,
            s1: r.s1,
            s2: r.s2,
            rotations: 12,
            isotropic_tol: 1e-3,
        }
    }
}

impl ProbeSpec {
    pub fn scan_options(&self) -> ScanOptions {
        ScanOptions {
            s: self.s,
            grid_level: self.grid_level,
            delta_c: self.delta_c,
            refine_rounds: self.refine_rounds,
        }
    }

    pub fn reconstruct_options(&self) -> ReconstructOptions {
        ReconstructOptions {
            scan: self.scan_options(),
            s1: self.s1,
            s2: self.s2,
        }
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..self.rotations)
            .map(|k| k as f64 * std::f64::consts::PI / self.rotations as f64)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub obstacle: ObstacleSpec,
    pub source: Ball,
    pub receiver: Ball,
    #[serde(default = "default_mode")]
    pub mode: ProbeMode,
    /// Window of the decay fit; a mode-dependent default when absent.
    #[serde(default)]
    pub tau: Option<TauSpec>,
    /// Window of the scaled-limit fits used for curvature.
    #[serde(default)]
    pub limit_tau: Option<TauSpec>,
    #[serde(default)]
    pub fdtd: FdtdSpec,
    #[serde(default)]
    pub probe: ProbeSpec,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn default_mode() -> ProbeMode {
    ProbeMode::SemiAnalytic
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

/// Validated geometry ready for a run.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub obstacle: ObstacleShape,
    /// `min_{∂D} φ(x; p, p') - η - η'`.
    pub decay_threshold: f64,
    pub hull_clearance: f64,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn s1() -> Self {
        Self {
            obstacle: ObstacleSpec::Sphere {
                center: Vec3::zeros(),
                radius: 1.0,
            },
            source: Ball {
                center: Vec3::new(4.0, 0.0, 0.0),
                radius: 0.5,
            },
            receiver: Ball {
                center: Vec3::new(0.0, 4.0, 0.0),
                radius: 0.5,
            },
            mode: default_mode(),
            tau: None,
            limit_tau: None,
            fdtd: FdtdSpec::default(),
            probe: ProbeSpec::default(),
            out: default_out(),
            seed: 0,
        }
    }

    /// Builds the obstacle and checks the hypotheses every run relies on:
    /// positive radii, disjoint closed balls, the closed convex hull of the
    /// balls disjoint from the obstacle, and for FDTD data a final time
    /// beyond the first-arrival threshold.
    pub fn prepare(&self, base: &Path) -> Result<Prepared> {
        let b = Ball::new(self.source.center, self.source.radius)?;
        let bp = Ball::new(self.receiver.center, self.receiver.radius)?;
        if b.center != bp.center && !b.disjoint(&bp) {
            return Err(Error::Hypothesis(
                "source and receiver balls overlap; use identical balls for monostatic data".into(),
            ));
        }
        let obstacle = self.obstacle.build(base)?;
        let clearance = hull_clearance_at_level(&obstacle, &b, &bp, 4);
        if clearance <= 0.0 {
            return Err(Error::Hypothesis(format!(
                "hull condition violated: the convex hull of the closed source and receiver balls meets the obstacle (clearance {clearance:.4})"
            )));
        }
        let (c, _) = min_broken_path(&obstacle, &b.center, &bp.center)?;
        let threshold = c - b.radius - bp.radius;
        if self.mode == ProbeMode::Fdtd && self.fdtd.t_final <= threshold {
            return Err(Error::Hypothesis(format!(
                "observation time condition violated: T={} < {threshold:.3}",
                self.fdtd.t_final
            )));
        }
        Ok(Prepared {
            obstacle,
            decay_threshold: threshold,
            hull_clearance: clearance,
        })
    }

    pub fn simulation(&self, obstacle: &ObstacleShape, h: f64) -> SimulationConfig {
        let mut cfg = SimulationConfig::new(h, self.fdtd.t_final, Some(obstacle.clone()), self.source, self.receiver)
            .with_formulation(self.fdtd.formulation);
        cfg.cfl = self.fdtd.cfl;
        cfg.margin_cells = self.fdtd.margin_cells;
        cfg
    }

    /// Decay window, with the FDTD upper end capped at `cap` when absent.
    pub fn decay_taus(&self, cap: Option<f64>) -> Result<Vec<f64>> {
        self.window(
            self.tau,
            cap,
            TauSpec {
                min: 40.0,
                max: Some(640.0),
                count: 10,
            },
        )
    }

    pub fn limit_taus(&self, cap: Option<f64>) -> Result<Vec<f64>> {
        self.window(
            self.limit_tau,
            cap,
            TauSpec {
                min: 50.0,
                max: Some(1600.0),
                count: 12,
            },
        )
    }

    fn window(&self, spec: Option<TauSpec>, cap: Option<f64>, semi: TauSpec) -> Result<Vec<f64>> {
        let fdtd = TauSpec {
            min: 4.0,
            max: None,
            count: 16,
        };
        let t = spec.unwrap_or(if self.mode == ProbeMode::Fdtd { fdtd } else { semi });
        let max = match (t.max, cap) {
            (Some(m), _) => m,
            (None, Some(c)) => c,
            (None, None) => {
                return Err(Error::InvalidParameter(
                    "τ window needs an upper end (or an FDTD companion run to cap it)".into(),
                ))
            }
        };
        if !(t.min > 0.0 && max > t.min && t.count >= 2) {
            return Err(Error::InvalidParameter(format!(
                "invalid τ window [{}, {max}] with {} samples",
                t.min, t.count
            )));
        }
        Ok(tau_window(t.min, max, t.count))
    }
}

/// A validated configuration together with any FDTD traces it uses.
#[derive(Clone, Debug)]
pub struct Session {
    pub config: RunConfig,
    pub prepared: Prepared,
    pub trace: Option<ReceiverTrace>,
    pub companion: Option<ReceiverTrace>,
    /// Largest trusted `τ` of `trace`, from the companion run.
    pub tau_cap: Option<f64>,
}

impl Session {
    pub fn new(config: RunConfig, base: &Path) -> Result<Self> {
        let prepared = config.prepare(base)?;
        Ok(Self {
            config,
            prepared,
            trace: None,
            companion: None,
            tau_cap: None,
        })
    }

    pub fn balls(&self) -> Result<(Ball, Ball)> {
        Ok((
            Ball::new(self.config.source.center, self.config.source.radius)?,
            Ball::new(self.config.receiver.center, self.config.receiver.radius)?,
        ))
    }

    /// Runs the solver at `h`, and at `2h` when a companion is configured.
    pub fn simulate(&mut self) -> Result<()> {
        let h = self.config.fdtd.h;
        let fine = simulate(&self.config.simulation(&self.prepared.obstacle, h))?;
        let coarse = if self.config.fdtd.companion {
            Some(simulate(&self.config.simulation(&self.prepared.obstacle, 2.0 * h))?)
        } else {
            None
        };
        self.attach(fine, coarse)
    }

    pub fn attach(&mut self, fine: ReceiverTrace, coarse: Option<ReceiverTrace>) -> Result<()> {
        for t in std::iter::once(&fine).chain(coarse.as_ref()) {
            if t.source != self.config.source || t.receiver != self.config.receiver {
                return Err(Error::InvalidParameter(
                    "trace was recorded for different balls than the configuration".into(),
                ));
            }
        }
        self.tau_cap = match &coarse {
            Some(c) => {
                let taus = tau_window(2.0, 20.0, 37);
                let a = curve_from_trace(&fine, &self.config.receiver, &taus, "")?;
                let b = curve_from_trace(c, &self.config.receiver, &taus, "")?;
                Some(resolvable_tau_cap(&a, &b, self.config.fdtd.cap_tolerance)?)
            }
            None => None,
        };
        self.trace = Some(fine);
        self.companion = coarse;
        Ok(())
    }

    pub fn source(&self) -> Result<DataSource<'_>> {
        let d = &self.prepared.obstacle;
        Ok(match self.config.mode {
            ProbeMode::Geometry => DataSource::Geometry(d),
            ProbeMode::SemiAnalytic => DataSource::SemiAnalytic {
                obstacle: d,
                decay_taus: self.config.decay_taus(None)?,
                limit_taus: self.config.limit_taus(None)?,
            },
            ProbeMode::Fdtd => DataSource::Fdtd {
                trace: self
                    .trace
                    .as_ref()
                    .ok_or_else(|| Error::InvalidParameter("FDTD mode needs a simulated or loaded trace".into()))?,
                decay_taus: self.config.decay_taus(self.tau_cap)?,
                limit_taus: self.config.limit_taus(self.tau_cap)?,
            },
        })
    }

    /// The τ windows in use; `None` in geometry mode.
    pub fn windows(&self) -> (Option<Vec<f64>>, Option<Vec<f64>>) {
        match self.config.mode {
            ProbeMode::Geometry => (None, None),
            _ => (
                self.config.decay_taus(self.tau_cap).ok(),
                self.config.limit_taus(self.tau_cap).ok(),
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s1_round_trips_through_json() {
        let c = RunConfig::s1();
        let text = serde_json::to_string_pretty(&c).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), c);
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let c = RunConfig::from_json(
            r#"{"obstacle": {"kind": "ellipsoid", "center": [0,0,0], "semi_axes": [2,1,1]},
                "source": {"center": [5,1,0], "radius": 0.5},
                "receiver": {"center": [1,5,0], "radius": 0.5}}"#,
        )
        .unwrap();
        assert_eq!(c.mode, ProbeMode::SemiAnalytic);
        assert_eq!(c.fdtd, FdtdSpec::default());
        let p = c.prepare(Path::new(".")).unwrap();
        assert!(p.hull_clearance > 0.0);
        assert_eq!(c.decay_taus(None).unwrap().len(), 10);
    }

    #[test]
    fn s1_threshold() {
        let p = RunConfig::s1().prepare(Path::new(".")).unwrap();
        assert!((p.decay_threshold - 5.735917).abs() < 1e-5);
    }

    #[test]
    fn overlapping_ball_is_rejected() {
        let mut c = RunConfig::s1();
        c.source.center = Vec3::new(1.2, 0.0, 0.0);
        let e = c.prepare(Path::new(".")).unwrap_err().to_string();
        assert!(e.contains("hull condition"), "{e}");
    }

    #[test]
    fn short_fdtd_run_is_rejected() {
        let mut c = RunConfig::s1();
        c.mode = ProbeMode::Fdtd;
        c.fdtd.t_final = 4.0;
        let e = c.prepare(Path::new(".")).unwrap_err().to_string();
        assert!(e.contains("T=4 < 5.736"), "{e}");
    }

    #[test]
    fn fdtd_window_needs_a_cap() {
        let mut c = RunConfig::s1();
        c.mode = ProbeMode::Fdtd;
        assert!(c.decay_taus(None).is_err());
        let w = c.decay_taus(Some(12.0)).unwrap();
        assert_eq!((w[0], *w.last().unwrap(), w.len()), (4.0, 12.0, 16));
    }
}
