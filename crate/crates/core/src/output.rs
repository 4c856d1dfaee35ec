//! File emission: CSV tables, run summary, field dumps and the manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::ale::QP_PER_CELL;
use crate::config::SimConfig;
use crate::diagnostics::{RefinementTable, ShiftReport};
use crate::driver::Simulation;
use crate::error::Result;
use crate::geometry::write_vtk;
use crate::mms::MmsStudy;

pub const SHIFTS_HEADER: &str = "field,h,value";
pub const REFINEMENT_HEADER: &str = "dt,diff_u,diff_eta";
pub const MMS_HEADER: &str = "study,h,dt,error_u,error_p";
pub const INTERFACE_HEADER: &str = "step,t,z,x,y";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Serialize)]
pub struct FileRecord {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: Option<SimConfig>,
    pub wall_clock_seconds: f64,
    pub files: Vec<FileRecord>,
}

/// Output directory that records every file it writes.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<FileRecord>,
    started: Instant,
}

impl OutputDir {
    pub fn create(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        std::fs::create_dir_all(&root)?;
        Ok(Self {
            root,
            files: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(&path, bytes)?;
        let digest = Sha256::digest(bytes);
        let mut hex = String::with_capacity(64);
        for b in digest.iter() {
            let _ = write!(hex, "{b:02x}");
        }
        self.files.retain(|f| f.path != rel);
        self.files.push(FileRecord {
            path: rel.to_string(),
            bytes: bytes.len(),
            sha256: hex,
        });
        Ok(path)
    }

    pub fn files(&self) -> &[FileRecord] {
        &self.files
    }

    /// Writes `manifest.json` listing every file written so far.
    pub fn finish(self, command: &str, config: Option<&SimConfig>) -> Result<RunManifest> {
        let manifest = RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.cloned(),
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            files: self.files,
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        std::fs::write(self.root.join("manifest.json"), text)?;
        Ok(manifest)
    }
}

pub fn shifts_csv(report: &ShiftReport) -> String {
    let mut s = String::from(SHIFTS_HEADER);
    s.push('\n');
    for v in &report.values {
        let _ = writeln!(s, "{},{},{}", v.field.name(), num(v.h), num(v.value));
    }
    s
}

pub fn refinement_csv(table: &RefinementTable) -> String {
    let mut s = String::from(REFINEMENT_HEADER);
    s.push('\n');
    for r in &table.rows {
        let _ = writeln!(s, "{},{},{}", num(r.dt), num(r.diff_u), num(r.diff_eta));
    }
    s
}

pub fn mms_csv(studies: &[&MmsStudy]) -> String {
    let mut s = String::from(MMS_HEADER);
    s.push('\n');
    for st in studies {
        for r in &st.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                r.study,
                num(r.h),
                num(r.dt),
                num(r.error_u),
                num(r.error_p)
            );
        }
    }
    s
}

/// Deformed interface node positions, appended to `buf` (header written by
/// the caller).
pub fn interface_rows(sim: &Simulation, buf: &mut String) {
    let g = &sim.grid;
    for (k, &z) in g.z.iter().enumerate() {
        let p = sim.map.position(&sim.mesh, g.nodes[k]);
        let _ = writeln!(buf, "{},{},{},{},{}", sim.step, num(sim.time()), num(z), num(p[0]), num(p[1]));
    }
}

/// Legacy VTK dump of velocity, pressure, ALE displacement and cell-mean Jacobian.
pub fn field_vtk(sim: &Simulation) -> String {
    let mesh = &sim.mesh;
    let u: Vec<[f64; 2]> = (0..mesh.num_nodes()).map(|n| sim.fluid.u[mesh.vertex_to_q2(n)]).collect();
    let j: Vec<f64> = sim
        .map
        .jacobian
        .chunks(QP_PER_CELL)
        .map(|c| c.iter().sum::<f64>() / QP_PER_CELL as f64)
        .collect();
    write_vtk(
        mesh,
        &[("velocity", &u), ("ale_displacement", &sim.map.displacement)],
        &[("pressure", &sim.fluid.p)],
        &[("jacobian", &j)],
    )
}
