//! Checkpoint directories: `manifest.json` plus spectra in the binary field
//! format (`c128`, so a restart is bitwise).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{SolverConfig, SolverState};
use crate::error::{Result, TllError};
use crate::spectral::io::{load_field, save_field, Dtype};
use crate::spectral::{GridField, SpectralField};

pub const MANIFEST: &str = "manifest.json";
const STATE_FILE: &str = "state.tllf";
const PREV_FILE: &str = "prev_explicit.tllf";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointManifest {
    pub format: String,
    pub version: u32,
    pub step: u64,
    pub t: f64,
    pub dt: f64,
    pub config_hash: String,
    pub config: SolverConfig,
    pub state_file: String,
    pub prev_explicit_file: Option<String>,
}

fn spectrum_as_grid(spec: &SpectralField) -> Result<GridField> {
    GridField::from_data(spec.shape(), spec.data().to_vec())
}

pub fn save_checkpoint(dir: &Path, state: &SolverState, config: &SolverConfig) -> Result<CheckpointManifest> {
    fs::create_dir_all(dir)?;
    save_field(dir.join(STATE_FILE), &spectrum_as_grid(&state.spectrum)?, Dtype::Complex)?;
    let prev_explicit_file = match &state.prev_explicit {
        Some(prev) => {
            save_field(dir.join(PREV_FILE), &spectrum_as_grid(prev)?, Dtype::Complex)?;
            Some(PREV_FILE.to_string())
        }
        None => None,
    };
    let manifest = CheckpointManifest {
        format: "tll-checkpoint".into(),
        version: 1,
        step: state.step,
        t: state.t(),
        dt: state.dt,
        config_hash: config.hash(),
        config: config.clone(),
        state_file: STATE_FILE.into(),
        prev_explicit_file,
    };
    fs::write(dir.join(MANIFEST), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

fn load_spectrum(path: &Path) -> Result<SpectralField> {
    let (grid, _) = load_field(path)?;
    SpectralField::from_data(grid.shape(), grid.into_data())
}

pub fn load_checkpoint(dir: &Path) -> Result<(SolverState, CheckpointManifest)> {
    let manifest: CheckpointManifest = serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST))?)?;
    if manifest.format != "tll-checkpoint" || manifest.version != 1 {
        return Err(TllError::Format(format!(
            "unsupported checkpoint {} v{}",
            manifest.format, manifest.version
        )));
    }
    let spectrum = load_spectrum(&dir.join(&manifest.state_file))?;
    let prev_explicit = match &manifest.prev_explicit_file {
        Some(f) => Some(load_spectrum(&dir.join(f))?),
        None => None,
    };
    let state = SolverState {
        step: manifest.step,
        dt: manifest.dt,
        spectrum,
        prev_explicit,
    };
    Ok((state, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nse::{taylor_green, Forcing, Scheme, Solver};

    #[test]
    fn roundtrip_is_bitwise_and_resume_matches() {
        let cfg = SolverConfig {
            resolution: 16,
            dt: 0.01,
            t_max: 0.2,
            scheme: Scheme::Imex2,
            ..SolverConfig::default()
        };
        let solver = Solver::new(cfg.clone()).unwrap();
        let u0 = taylor_green(2, 16).unwrap().scale(3.0);
        let s0 = solver.initial_state(&u0).unwrap();
        let full = solver.run(s0.clone(), &Forcing::None, 20, None).unwrap().final_state;
        let half = solver.run(s0, &Forcing::None, 10, None).unwrap().final_state;
        let dir = tempfile::tempdir().unwrap();
        let manifest = save_checkpoint(dir.path(), &half, &cfg).unwrap();
        assert_eq!(manifest.step, 10);
        let (loaded, _) = load_checkpoint(dir.path()).unwrap();
        assert_eq!(loaded, half);
        let resumed = solver.run(loaded, &Forcing::None, 20, None).unwrap().final_state;
        assert_eq!(resumed.spectrum, full.spectrum);
    }
}
