//! On-disk trajectory layout:
//!
//! ```text
//! <dir>/manifest.json        params, solver config, termination, checksums
//! <dir>/invariants.csv       one InvariantRecord per row
//! <dir>/snapshots/index.csv  index,t,file,sha256
//! <dir>/snapshots/NNNNNN.bin little-endian field records
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::sha256_hex;
use crate::error::{GdnlsError, Result};
use crate::integrator::{Snapshot, SolverConfig, Termination, Trajectory};
use crate::invariants::{format_float, read_csv, write_csv};
use crate::model::ModelParams;
use crate::spectral::SpectralField;

pub const MANIFEST: &str = "manifest.json";
pub const INVARIANTS: &str = "invariants.csv";
pub const SNAPSHOT_INDEX: &str = "snapshots/index.csv";
const INDEX_HEADER: &str = "index,t,file,sha256";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileEntry {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub num_modes: usize,
    pub params: ModelParams,
    pub config: SolverConfig,
    pub termination: Termination,
    pub final_time: f64,
    pub snapshot_count: usize,
    pub invariants: Option<FileEntry>,
    pub snapshot_index: Option<FileEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WriteOptions {
    pub snapshots: bool,
    pub invariants: bool,
}

impl Default for WriteOptions {
    fn default() -> Self {
        Self {
            snapshots: true,
            invariants: true,
        }
    }
}

fn write_checked(dir: &Path, rel: &str, bytes: &[u8]) -> Result<FileEntry> {
    let path = dir.join(rel);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(&path, bytes)?;
    Ok(FileEntry {
        file: rel.to_string(),
        sha256: sha256_hex(bytes),
    })
}

fn read_checked(dir: &Path, entry: &FileEntry) -> Result<Vec<u8>> {
    let path = dir.join(&entry.file);
    let bytes = std::fs::read(&path)?;
    let found = sha256_hex(&bytes);
    if found != entry.sha256 {
        return Err(GdnlsError::Checksum {
            path: path.display().to_string(),
            expected: entry.sha256.clone(),
            found,
        });
    }
    Ok(bytes)
}

pub fn write_trajectory(dir: &Path, traj: &Trajectory, opts: WriteOptions) -> Result<Manifest> {
    std::fs::create_dir_all(dir)?;
    let invariants = if opts.invariants {
        let mut buf = Vec::new();
        write_csv(&mut buf, &traj.invariant_trace)?;
        Some(write_checked(dir, INVARIANTS, &buf)?)
    } else {
        None
    };
    let snapshot_index = if opts.snapshots {
        let mut index = format!("{INDEX_HEADER}\n");
        for (i, snap) in traj.snapshots.iter().enumerate() {
            let rel = format!("snapshots/{i:06}.bin");
            let entry = write_checked(dir, &rel, &snap.field.to_binary())?;
            index.push_str(&format!("{i},{},{},{}\n", format_float(snap.t), entry.file, entry.sha256));
        }
        Some(write_checked(dir, SNAPSHOT_INDEX, index.as_bytes())?)
    } else {
        None
    };
    let manifest = Manifest {
        num_modes: traj.initial().num_modes(),
        params: traj.params,
        config: traj.config,
        termination: traj.termination,
        final_time: traj.last().t,
        snapshot_count: traj.snapshots.len(),
        invariants,
        snapshot_index,
    };
    std::fs::write(dir.join(MANIFEST), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(dir.join(MANIFEST))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| GdnlsError::Config {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

/// Loads a stored trajectory, verifying every checksum. Requires snapshots;
/// an absent invariants file yields an empty trace.
pub fn read_trajectory(dir: &Path) -> Result<Trajectory> {
    let manifest = read_manifest(dir)?;
    let index_entry = manifest
        .snapshot_index
        .as_ref()
        .ok_or_else(|| GdnlsError::InsufficientData("trajectory was stored without snapshots".into()))?;
    let index = String::from_utf8(read_checked(dir, index_entry)?)
        .map_err(|e| GdnlsError::InvalidParameter(format!("snapshot index is not UTF-8: {e}")))?;
    let mut lines = index.lines();
    if lines.next() != Some(INDEX_HEADER) {
        return Err(GdnlsError::InvalidParameter("unexpected snapshot index header".into()));
    }
    let mut snapshots = Vec::with_capacity(manifest.snapshot_count);
    for (row, line) in lines.enumerate() {
        let bad = || GdnlsError::InvalidParameter(format!("malformed snapshot index row {}", row + 1));
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 4 {
            return Err(bad());
        }
        let t: f64 = cells[1].parse().map_err(|_| bad())?;
        let entry = FileEntry {
            file: cells[2].to_string(),
            sha256: cells[3].to_string(),
        };
        let field = SpectralField::from_binary(&read_checked(dir, &entry)?)?;
        if field.num_modes() != manifest.num_modes {
            return Err(GdnlsError::ModeMismatch {
                left: manifest.num_modes,
                right: field.num_modes(),
            });
        }
        snapshots.push(Snapshot { t, field });
    }
    if snapshots.len() != manifest.snapshot_count || snapshots.is_empty() {
        return Err(GdnlsError::InsufficientData(format!(
            "manifest lists {} snapshots, index holds {}",
            manifest.snapshot_count,
            snapshots.len()
        )));
    }
    let invariant_trace = match &manifest.invariants {
        Some(entry) => read_csv(read_checked(dir, entry)?.as_slice())?,
        None => Vec::new(),
    };
    Ok(Trajectory {
        params: manifest.params,
        config: manifest.config,
        snapshots,
        invariant_trace,
        termination: manifest.termination,
    })
}
