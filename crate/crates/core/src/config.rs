//! Run configuration: JSON schema, validation, dotted-path overrides, and the
//! initial-condition library.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{GdnlsError, Result};
use crate::integrator::SolverConfig;
use crate::model::ModelParams;
use crate::spectral::{fft_friendly_size, to_spectral, SpectralField, TWO_PI};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub num_modes: usize,
    pub model: ModelParams,
    pub solver: SolverConfig,
    pub initial: InitialSpec,
    #[serde(default)]
    pub outputs: OutputSpec,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    #[serde(default = "yes")]
    pub snapshots: bool,
    #[serde(default = "yes")]
    pub invariants: bool,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("runs")
}

fn yes() -> bool {
    true
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: default_out_dir(),
            snapshots: true,
            invariants: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    PlaneWave {
        amplitude: [f64; 2],
        k: i64,
    },
    ModeList {
        modes: Vec<(i64, [f64; 2])>,
    },
    SmoothPreset {
        name: Preset,
        amplitude: f64,
    },
    File {
        path: PathBuf,
        /// Hex SHA-256 of the file contents.
        sha256: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// `A (1 + 0.3 cos x) e^{i sin x}`.
    Bump,
}

impl Preset {
    pub fn sample(self, x: f64) -> Complex64 {
        match self {
            Preset::Bump => (1.0 + 0.3 * x.cos()) * Complex64::from_polar(1.0, x.sin()),
        }
    }
}

/// Samples `profile` densely and keeps the modes `-N..=N`.
pub fn truncate_profile(num_modes: usize, profile: impl Fn(f64) -> Complex64) -> Result<SpectralField> {
    let m = fft_friendly_size((8 * (2 * num_modes + 1)).max(1024));
    let values: Vec<Complex64> = (0..m).map(|j| profile(TWO_PI * j as f64 / m as f64)).collect();
    to_spectral(&values, num_modes)
}

/// `amplitude · (1 + 0.3 cos x) e^{i sin x}` truncated to `num_modes`.
pub fn bump(num_modes: usize, amplitude: f64) -> Result<SpectralField> {
    let f = truncate_profile(num_modes, |x| Preset::Bump.sample(x))?;
    Ok(&f * amplitude)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl InitialSpec {
    /// Resolves to a field on `num_modes`; relative file paths are taken
    /// relative to `base`.
    pub fn resolve(&self, num_modes: usize, base: &Path) -> Result<SpectralField> {
        match self {
            InitialSpec::PlaneWave { amplitude, k } => {
                SpectralField::plane_wave(num_modes, Complex64::new(amplitude[0], amplitude[1]), *k)
            }
            InitialSpec::ModeList { modes } => {
                let modes: Vec<_> = modes
                    .iter()
                    .map(|&(k, [re, im])| (k, Complex64::new(re, im)))
                    .collect();
                SpectralField::from_modes(num_modes, &modes)
            }
            InitialSpec::SmoothPreset { name, amplitude } => {
                let f = truncate_profile(num_modes, |x| name.sample(x))?;
                Ok(&f * *amplitude)
            }
            InitialSpec::File { path, sha256 } => {
                let full = if path.is_absolute() { path.clone() } else { base.join(path) };
                let bytes = std::fs::read(&full)?;
                let found = sha256_hex(&bytes);
                if !found.eq_ignore_ascii_case(sha256) {
                    return Err(GdnlsError::Checksum {
                        path: full.display().to_string(),
                        expected: sha256.clone(),
                        found,
                    });
                }
                let f = SpectralField::from_binary(&bytes)?;
                if f.num_modes() > num_modes {
                    return Err(config_err(
                        "initial.path",
                        format!(
                            "file holds {} modes but num_modes is {num_modes}",
                            f.num_modes()
                        ),
                    ));
                }
                Ok(f.resized(num_modes))
            }
        }
    }
}

fn config_err(path: &str, message: impl Into<String>) -> GdnlsError {
    GdnlsError::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_modes == 0 {
            return Err(config_err("num_modes", "must be at least 1"));
        }
        self.model
            .validate()
            .map_err(|e| config_err("model", e.to_string()))?;
        if let Some(k) = self.model.cutoff.modes() {
            if k > self.num_modes {
                return Err(config_err(
                    "model.cutoff",
                    format!("model.cutoff = {k} exceeds num_modes = {}", self.num_modes),
                ));
            }
        }
        self.solver
            .validate()
            .map_err(|e| config_err("solver", e.to_string()))?;
        match &self.initial {
            InitialSpec::PlaneWave { k, .. } if k.unsigned_abs() as usize > self.num_modes => {
                Err(config_err(
                    "initial.k",
                    format!("wavenumber {k} exceeds num_modes = {}", self.num_modes),
                ))
            }
            InitialSpec::ModeList { modes } => {
                match modes.iter().find(|(k, _)| k.unsigned_abs() as usize > self.num_modes) {
                    Some((k, _)) => Err(config_err(
                        "initial.modes",
                        format!("wavenumber {k} exceeds num_modes = {}", self.num_modes),
                    )),
                    None => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }

    /// Canonical JSON (fixed key order, two-space indent, trailing newline).
    pub fn to_canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    /// Short hash of the canonical form, used to name run directories.
    pub fn hash(&self) -> String {
        sha256_hex(self.to_canonical_json().as_bytes())[..12].to_string()
    }

    pub fn run_name(&self) -> String {
        format!("run-{}-seed{}", self.hash(), self.seed)
    }
}

/// Parses and validates a config from JSON text, applying `key=value`
/// overrides (dotted paths; values parsed as JSON, falling back to strings).
pub fn parse_config(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let mut value: Value = serde_json::from_str(text).map_err(|e| {
        config_err(
            &format!("line {}, column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    for o in overrides {
        apply_override(&mut value, o)?;
    }
    let cfg: RunConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        config_err(&path, e.into_inner().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path, overrides: &[String]) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, overrides)
}

pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| config_err(assignment, "override must look like key=value"))?;
    let new: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| config_err(key, format!("`{part}` is not inside an object")))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), new);
            return Ok(());
        }
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Err(config_err(key, "empty override key"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::Scheme;
    use crate::model::DEFAULT_OVERSAMPLE;
    use crate::spectral::Cutoff;

    const MINIMAL: &str = r#"{
        "num_modes": 32,
        "model": {"sigma": 1.5},
        "solver": {"dt": 0.001, "t_final": 1.0},
        "initial": {"kind": "smooth_preset", "name": "bump", "amplitude": 0.5}
    }"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(MINIMAL, &[]).unwrap();
        assert_eq!(cfg.model.oversample, DEFAULT_OVERSAMPLE);
        assert_eq!(cfg.model.cutoff, Cutoff::Unbounded);
        assert_eq!(cfg.solver.scheme, Scheme::IfRk4);
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn cutoff_above_modes_names_both_fields() {
        let err = parse_config(MINIMAL, &["model.cutoff=64".into()]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("model.cutoff") && msg.contains("num_modes"), "{msg}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_config(MINIMAL, &["model.sigmaa=2".into()]).unwrap_err();
        assert!(err.to_string().contains("sigmaa"), "{err}");
        let err = parse_config(MINIMAL, &["initial.ampl=2".into()]).unwrap_err();
        assert!(err.to_string().contains("ampl"), "{err}");
        let err = parse_config(MINIMAL, &["extra=1".into()]).unwrap_err();
        assert!(err.to_string().contains("extra"), "{err}");
    }

    #[test]
    fn syntax_errors_report_position() {
        let err = parse_config("{\n \"num_modes\": ,\n}", &[]).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn type_errors_report_field_path() {
        let err = parse_config(MINIMAL, &["solver.dt=\"fast\"".into()]).unwrap_err();
        assert!(err.to_string().contains("solver.dt"), "{err}");
    }

    #[test]
    fn canonical_emit_is_a_fixed_point() {
        let cfg = parse_config(MINIMAL, &["model.cutoff=16".into(), "seed=7".into()]).unwrap();
        let first = cfg.to_canonical_json();
        let again = parse_config(&first, &[]).unwrap().to_canonical_json();
        assert_eq!(first, again);
        assert_eq!(cfg.model.cutoff, Cutoff::Modes(16));
        assert_eq!(cfg.run_name(), parse_config(&first, &[]).unwrap().run_name());
    }

    #[test]
    fn bump_matches_its_profile() {
        let f = bump(16, 0.5).unwrap();
        let grid = crate::spectral::to_physical(&f, 2).unwrap();
        let m = grid.len();
        for (j, v) in grid.iter().enumerate() {
            let x = TWO_PI * j as f64 / m as f64;
            assert!((v - 0.5 * Preset::Bump.sample(x)).norm() < 1e-14);
        }
    }

    #[test]
    fn resolve_plane_wave_and_modes() {
        let pw = InitialSpec::PlaneWave { amplitude: [0.5, 0.0], k: 2 };
        let f = pw.resolve(4, Path::new(".")).unwrap();
        assert_eq!(f.coeff(2), Complex64::new(0.5, 0.0));
        let ml = InitialSpec::ModeList { modes: vec![(1, [0.1, 0.2]), (-3, [0.0, 1.0])] };
        let g = ml.resolve(4, Path::new(".")).unwrap();
        assert_eq!(g.coeff(-3), Complex64::new(0.0, 1.0));
    }

    #[test]
    fn file_initial_data_is_checksummed() {
        let dir = tempfile::tempdir().unwrap();
        let f = bump(6, 0.3).unwrap();
        let bytes = f.to_binary();
        std::fs::write(dir.path().join("u0.bin"), &bytes).unwrap();
        let good = InitialSpec::File { path: "u0.bin".into(), sha256: sha256_hex(&bytes) };
        assert_eq!(good.resolve(6, dir.path()).unwrap(), f);
        assert_eq!(good.resolve(8, dir.path()).unwrap(), f.resized(8));
        let bad = InitialSpec::File { path: "u0.bin".into(), sha256: "00".into() };
        assert!(matches!(bad.resolve(6, dir.path()), Err(GdnlsError::Checksum { .. })));
    }
}
