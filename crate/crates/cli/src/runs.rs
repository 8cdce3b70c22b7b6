//! Run directories, atomic file writes, configuration hashing, and state
//! snapshots.
//!
//! A run directory is named after the command and a hash of the resolved
//! configuration, so identical runs land in identical places and their
//! files can be compared byte for byte.  All files are written to a
//! temporary name first and renamed into place, so a crash never leaves a
//! half-written artifact behind.

use crate::config::ProblemConfig;
use crate::formats::{fmt_f64, json_to_string};
use crate::CliError;
use num_complex::Complex64;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use vortexlab_core::{PathSpace, PathState};

/// Write bytes to `path` atomically (write to a sibling, then rename).
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::Io(format!("cannot rename into {}: {e}", path.display())))
}

/// The resolved configuration as a JSON value (defaults filled in).
pub fn resolved_config_value(config: &ProblemConfig) -> Value {
    serde_json::to_value(config).expect("config always serializes")
}

/// Canonical serialized form of the resolved configuration.
pub fn resolved_config_text(config: &ProblemConfig) -> String {
    json_to_string(&resolved_config_value(config))
}

/// Hex SHA-256 of the canonical resolved configuration.
pub fn config_hash(config: &ProblemConfig) -> String {
    let mut hasher = Sha256::new();
    hasher.update(resolved_config_text(config).as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// A created run directory with the resolved configuration written.
pub struct RunDir {
    pub path: PathBuf,
    pub hash: String,
}

impl RunDir {
    /// Create `base/<command>-<hash prefix>` and write `resolved.json`
    /// into it.  Existing files from a previous identical run are
    /// overwritten atomically.
    pub fn create(base: &Path, command: &str, config: &ProblemConfig) -> Result<Self, CliError> {
        let hash = config_hash(config);
        let path = base.join(format!("{command}-{}", &hash[..16]));
        std::fs::create_dir_all(&path)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
        let dir = RunDir { path, hash };
        dir.write_text("resolved.json", &resolved_config_text(config))?;
        Ok(dir)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<(), CliError> {
        atomic_write(&self.path.join(name), text.as_bytes())
    }

    pub fn write_json(&self, name: &str, value: &Value) -> Result<(), CliError> {
        self.write_text(name, &json_to_string(value))
    }
}

/// Serialize a path state as nested arrays: `v` as one `[re, im]` pair
/// per coordinate per node, `eta` as one real row per node.
pub fn state_to_value(state: &PathState) -> Value {
    let v: Vec<Value> = (0..=state.nt())
        .map(|i| {
            Value::Array(
                state
                    .v_row(i)
                    .iter()
                    .map(|z| json!([z.re, z.im]))
                    .collect(),
            )
        })
        .collect();
    let eta: Vec<Value> = (0..=state.nt())
        .map(|i| Value::Array(state.eta_row(i).iter().map(|x| json!(x)).collect()))
        .collect();
    json!({ "v": v, "eta": eta })
}

fn f64_of(value: &Value, what: &str) -> Result<f64, CliError> {
    value
        .as_f64()
        .ok_or_else(|| CliError::Io(format!("malformed state: {what} is not a number")))
}

/// Rebuild a path state from its serialized form.
pub fn state_from_value(value: &Value) -> Result<PathState, CliError> {
    let bad = |what: &str| CliError::Io(format!("malformed state: {what}"));
    let v_rows = value["v"].as_array().ok_or_else(|| bad("missing v"))?;
    let eta_rows = value["eta"].as_array().ok_or_else(|| bad("missing eta"))?;
    let mut v = Vec::with_capacity(v_rows.len());
    for row in v_rows {
        let row = row.as_array().ok_or_else(|| bad("v row"))?;
        let mut out = Vec::with_capacity(row.len());
        for z in row {
            let pair = z.as_array().ok_or_else(|| bad("v entry"))?;
            if pair.len() != 2 {
                return Err(bad("v entry length"));
            }
            out.push(Complex64::new(
                f64_of(&pair[0], "v re")?,
                f64_of(&pair[1], "v im")?,
            ));
        }
        v.push(out);
    }
    let mut eta = Vec::with_capacity(eta_rows.len());
    for row in eta_rows {
        let row = row.as_array().ok_or_else(|| bad("eta row"))?;
        let mut out = Vec::with_capacity(row.len());
        for x in row {
            out.push(f64_of(x, "eta entry")?);
        }
        eta.push(out);
    }
    PathState::new(v, eta).map_err(|e| CliError::Io(format!("malformed state: {e}")))
}

/// One flow snapshot: enough to resume the run bit for bit.
pub struct Snapshot {
    pub step: usize,
    pub s: f64,
    pub energy_accum: f64,
    pub gradient_norm: f64,
    pub action: f64,
    pub state: PathState,
    pub config_hash: String,
}

/// File name for the snapshot at a step.
pub fn snapshot_name(step: usize) -> String {
    format!("snapshot-{step:08}.json")
}

/// Write a snapshot, including the Coulomb data of the projected state
/// under the `coulomb` key.
pub fn write_snapshot(dir: &RunDir, space: &PathSpace, snap: &Snapshot) -> Result<(), CliError> {
    let coulomb = coulomb_block(space, &snap.state);
    let value = json!({
        "schema": 1,
        "config_hash": snap.config_hash,
        "step": snap.step,
        "s": snap.s,
        "energy_accum": snap.energy_accum,
        "gradient_norm": snap.gradient_norm,
        "action": snap.action,
        "path": state_to_value(&snap.state),
        "coulomb": coulomb,
    });
    dir.write_json(&snapshot_name(snap.step), &value)
}

/// Gauge-fixed bookkeeping quantities of a state, after projection onto
/// the constant-`eta` slice.  Returns `null` if the projection fails
/// (it cannot for admissible states).
fn coulomb_block(space: &PathSpace, state: &PathState) -> Value {
    let Ok((projected, _)) = vortexlab_core::coulomb_project(space, state) else {
        return Value::Null;
    };
    let Ok(data) = vortexlab_core::compute_coulomb_data(
        space,
        &projected,
        &vortexlab_core::HamiltonianFamily::Zero,
    ) else {
        return Value::Null;
    };
    json!({
        "kappa": data.kappa,
        "kappa_bar": data.kappa_bar,
        "mu_bar": data.mu_bar,
        "xi_v": data.xi_v,
    })
}

/// Read a snapshot back.
pub fn read_snapshot(path: &Path) -> Result<Snapshot, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read snapshot {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Io(format!("malformed snapshot {}: {e}", path.display())))?;
    if value["schema"].as_i64() != Some(1) {
        return Err(CliError::Io(format!(
            "snapshot {}: unsupported schema {}",
            path.display(),
            value["schema"]
        )));
    }
    let bad = |what: &str| CliError::Io(format!("snapshot {}: missing {what}", path.display()));
    Ok(Snapshot {
        step: value["step"].as_u64().ok_or_else(|| bad("step"))? as usize,
        s: value["s"].as_f64().ok_or_else(|| bad("s"))?,
        energy_accum: value["energy_accum"]
            .as_f64()
            .ok_or_else(|| bad("energy_accum"))?,
        gradient_norm: value["gradient_norm"]
            .as_f64()
            .ok_or_else(|| bad("gradient_norm"))?,
        action: value["action"].as_f64().ok_or_else(|| bad("action"))?,
        state: state_from_value(&value["path"])?,
        config_hash: value["config_hash"]
            .as_str()
            .ok_or_else(|| bad("config_hash"))?
            .to_string(),
    })
}

/// Format one trajectory CSV row.
pub fn trajectory_row(s: f64, energy: f64, gradient_norm: f64) -> String {
    crate::formats::csv_row(&[fmt_f64(s), fmt_f64(energy), fmt_f64(gradient_norm)])
}

/// Header for trajectory CSVs.
pub const TRAJECTORY_HEADER: &str = "s,energy,gradient_norm\n";

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use vortexlab_core::{sample_path, TimeGrid};

    #[test]
    fn states_round_trip_bit_exactly_through_json_text() {
        let grid = TimeGrid::new(16);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let state = sample_path(&grid, 2, 1, 6, 0.8, &mut rng);
        let text = json_to_string(&state_to_value(&state));
        let back = state_from_value(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, state);
    }

    #[test]
    fn config_hash_ignores_formatting_but_not_content() {
        let a = ProblemConfig::from_json("{}").unwrap();
        let b = ProblemConfig::from_json(r#"{ "grid": { "nt": 64 } }"#).unwrap();
        let c = ProblemConfig::from_json(r#"{"grid": {"nt": 128}}"#).unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));
        assert_ne!(config_hash(&a), config_hash(&c));
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("file.json");
        atomic_write(&path, b"one").unwrap();
        atomic_write(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert!(!path.with_extension("json.tmp").exists());
    }
}
