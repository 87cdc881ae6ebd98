//! Binary trace archive plus JSON sidecar.
//!
//! Layout (little-endian):
//!
//! ```text
//! magic "ENCL1" | u8 formulation | u16 reserved
//! f64 h, dt, t_final | u64 n_steps, n_nodes
//! f64 lo[3] | u64 dims[3]
//! f64 source[4] (center, radius) | f64 receiver[4]
//! f64 nodes[n_nodes][3] | f64 weights[n_nodes]
//! f64 samples[(n_steps + 1) * n_nodes]      time-major
//! u64 n_energy | f64 energy[n_energy][2]
//! ```

use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Formulation, GridInfo, ReceiverTrace};
use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::obstacle::Ball;

pub const ARCHIVE_MAGIC: &[u8; 5] = b"ENCL1";

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TraceSidecar {
    pub format: String,
    pub formulation: Formulation,
    pub h: f64,
    pub dt: f64,
    pub t_final: f64,
    pub n_steps: usize,
    pub n_nodes: usize,
    pub grid: GridInfo,
    pub source: Ball,
    pub receiver: Ball,
    /// Free-form description of the obstacle.
    pub obstacle: String,
    pub seed: Option<u64>,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".json");
    PathBuf::from(p)
}

struct W<T: Write>(T);

impl<T: Write> W<T> {
    fn f(&mut self, v: f64) -> Result<()> {
        Ok(self.0.write_all(&v.to_le_bytes())?)
    }
    fn u(&mut self, v: u64) -> Result<()> {
        Ok(self.0.write_all(&v.to_le_bytes())?)
    }
    fn v3(&mut self, v: &Vec3) -> Result<()> {
        for k in 0..3 {
            self.f(v[k])?;
        }
        Ok(())
    }
    fn ball(&mut self, b: &Ball) -> Result<()> {
        self.v3(&b.center)?;
        self.f(b.radius)
    }
}

struct R<T: Read>(T);

impl<T: Read> R<T> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.0
            .read_exact(&mut b)
            .map_err(|e| Error::Parse(format!("truncated trace archive: {e}")))?;
        Ok(b)
    }
    fn f(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
    fn u(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn v3(&mut self) -> Result<Vec3> {
        Ok(Vec3::new(self.f()?, self.f()?, self.f()?))
    }
    fn ball(&mut self) -> Result<Ball> {
        let c = self.v3()?;
        Ball::new(c, self.f()?)
    }
}

/// Writes `path` and `path.json`.
pub fn write_archive(trace: &ReceiverTrace, path: &Path, obstacle: &str, seed: Option<u64>) -> Result<()> {
    let mut w = W(BufWriter::new(std::fs::File::create(path)?));
    w.0.write_all(ARCHIVE_MAGIC)?;
    let form = match trace.formulation {
        Formulation::Total => 0u8,
        Formulation::Scattered => 1u8,
    };
    w.0.write_all(&[form, 0, 0])?;
    w.f(trace.h)?;
    w.f(trace.dt)?;
    w.f(trace.t_final)?;
    w.u(trace.n_steps as u64)?;
    w.u(trace.n_nodes() as u64)?;
    w.v3(&trace.grid.lo)?;
    for d in trace.grid.dims {
        w.u(d as u64)?;
    }
    w.ball(&trace.source)?;
    w.ball(&trace.receiver)?;
    for x in &trace.nodes {
        w.v3(x)?;
    }
    for v in trace.weights.iter().chain(&trace.samples) {
        w.f(*v)?;
    }
    w.u(trace.energy.len() as u64)?;
    for (t, e) in &trace.energy {
        w.f(*t)?;
        w.f(*e)?;
    }
    w.0.flush()?;

    let side = TraceSidecar {
        format: "ENCL1".into(),
        formulation: trace.formulation,
        h: trace.h,
        dt: trace.dt,
        t_final: trace.t_final,
        n_steps: trace.n_steps,
        n_nodes: trace.n_nodes(),
        grid: trace.grid,
        source: trace.source,
        receiver: trace.receiver,
        obstacle: obstacle.to_string(),
        seed,
    };
    std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&side)?)?;
    Ok(())
}

pub fn read_archive(path: &Path) -> Result<ReceiverTrace> {
    let mut r = R(BufReader::new(std::fs::File::open(path)?));
    let magic: [u8; 5] = r.bytes()?;
    if &magic != ARCHIVE_MAGIC {
        return Err(Error::Parse("not an ENCL1 trace archive".into()));
    }
    let head: [u8; 3] = r.bytes()?;
    let formulation = match head[0] {
        0 => Formulation::Total,
        1 => Formulation::Scattered,
        other => return Err(Error::Parse(format!("unknown formulation tag {other}"))),
    };
    let h = r.f()?;
    let dt = r.f()?;
    let t_final = r.f()?;
    let n_steps = r.u()? as usize;
    let n_nodes = r.u()? as usize;
    let lo = r.v3()?;
    let dims = [r.u()? as usize, r.u()? as usize, r.u()? as usize];
    let source = r.ball()?;
    let receiver = r.ball()?;
    let nodes = (0..n_nodes).map(|_| r.v3()).collect::<Result<Vec<_>>>()?;
    let weights = (0..n_nodes).map(|_| r.f()).collect::<Result<Vec<_>>>()?;
    let samples = (0..(n_steps + 1) * n_nodes)
        .map(|_| r.f())
        .collect::<Result<Vec<_>>>()?;
    let ne = r.u()? as usize;
    let energy = (0..ne).map(|_| Ok((r.f()?, r.f()?))).collect::<Result<Vec<_>>>()?;
    Ok(ReceiverTrace {
        formulation,
        h,
        dt,
        t_final,
        n_steps,
        source,
        receiver,
        grid: GridInfo { lo, dims, h },
        nodes,
        weights,
        samples,
        energy,
    })
}

pub fn read_sidecar(path: &Path) -> Result<TraceSidecar> {
    Ok(serde_json::from_str(&std::fs::read_to_string(sidecar_path(path))?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavesim::{simulate, SimulationConfig};

    #[test]
    fn round_trip() {
        let b = Ball::new(Vec3::new(1.0, 0.0, 0.0), 0.3).unwrap();
        let bp = Ball::new(Vec3::new(0.0, 1.0, 0.0), 0.3).unwrap();
        let tr = simulate(&SimulationConfig::new(0.1, 1.5, None, b, bp).with_formulation(Formulation::Total)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("trace.encl");
        write_archive(&tr, &p, "none", Some(7)).unwrap();
        let back = read_archive(&p).unwrap();
        assert_eq!(back.samples, tr.samples);
        assert_eq!(back.nodes, tr.nodes);
        assert_eq!(back.grid, tr.grid);
        let side = read_sidecar(&p).unwrap();
        assert_eq!(side.seed, Some(7));
        assert_eq!(side.n_nodes, tr.n_nodes());
        let bytes = std::fs::read(&p).unwrap();
        assert_eq!(&bytes[..5], b"ENCL1");
        std::fs::write(&p, b"XXXXX").unwrap();
        assert!(read_archive(&p).is_err());
    }
}
