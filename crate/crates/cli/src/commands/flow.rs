//! `flow`: integrate the negative gradient flow of the configured system,
//! logging a trajectory CSV, periodic snapshots, and a final summary.
//!
//! The stepping loop mirrors the core integrator's bookkeeping exactly:
//! the accumulated energy uses the midpoint-state metric, and the
//! residual is the gradient norm under the system's effective structure.
//! Snapshots carry the full state with round-trip-exact floats, so a
//! resumed run reproduces the uninterrupted one bit for bit.

use crate::config::ProblemConfig;
use crate::runs::{
    read_snapshot, write_snapshot, RunDir, Snapshot, TRAJECTORY_HEADER,
};
use crate::{say, CliError};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use vortexlab_core::{
    flow_step, sample_tangent, AlmostComplexFamily, HamiltonianFamily, PathState, PdeSystem,
};

/// Arguments of the `flow` command.
#[derive(Debug, Clone, Default)]
pub struct FlowArgs {
    /// Critical label such as `1,+`, or a path to a state/snapshot file.
    pub initial: Option<String>,
    /// Amplitude of a seeded random displacement of the initial state.
    pub perturb: f64,
    /// Snapshot file to resume from.
    pub resume: Option<PathBuf>,
}

/// Run the flow; returns the run directory and the summary value.
pub fn cmd_flow(
    config: &ProblemConfig,
    args: &FlowArgs,
    out_base: &Path,
    quiet: bool,
) -> Result<(PathBuf, Value), CliError> {
    let resolved = config.resolve()?;
    let space = &resolved.space;
    let grid = space.grid();
    let rows = grid.nodes();
    let params = resolved.flow_params;
    let (he, je): (&HamiltonianFamily, &AlmostComplexFamily) = match resolved.system {
        PdeSystem::GeneralizedHiggs { .. } => (&resolved.hamiltonian, &resolved.jfamily),
        _ => (&HamiltonianFamily::Zero, &AlmostComplexFamily::Standard),
    };

    // Initial state: resumed snapshot, critical label, or state file.
    let (mut state, start_step, mut energy, dir_kind, origin) = match &args.resume {
        Some(snap_path) => {
            let snap = read_snapshot(snap_path)?;
            let expected = crate::runs::config_hash(config);
            if snap.config_hash != expected {
                return Err(CliError::Usage(format!(
                    "resume: snapshot {} was produced by a different configuration \
                     (hash {} vs {})",
                    snap_path.display(),
                    &snap.config_hash[..16],
                    &expected[..16],
                )));
            }
            let origin = format!("resume step {}", snap.step);
            (
                snap.state,
                snap.step,
                snap.energy_accum,
                format!("flow-from{:08}", snap.step),
                origin,
            )
        }
        None => {
            let given = args.initial.as_deref().ok_or_else(|| {
                CliError::Usage(
                    "flow: --initial LABEL|FILE is required (or --resume SNAPSHOT)".into(),
                )
            })?;
            let base = initial_state(&resolved.space, given)?;
            let state = if args.perturb != 0.0 {
                let mut rng = ChaCha8Rng::seed_from_u64(resolved.seed);
                let tangent = sample_tangent(
                    grid,
                    space.torus().n(),
                    space.torus().k(),
                    (grid.nt() / 4).max(2),
                    args.perturb,
                    &mut rng,
                );
                base.offset(&tangent, 1.0)?
            } else {
                base
            };
            (state, 0usize, 0.0f64, "flow".to_string(), given.to_string())
        }
    };
    if state.nt() != grid.nt() {
        return Err(CliError::Usage(format!(
            "grid.nt: initial state has {} intervals but the grid has {}",
            state.nt(),
            grid.nt()
        )));
    }
    space.check_state(&state)?;

    let dir = RunDir::create(out_base, &dir_kind, config)?;
    let steps = (params.s_max / params.ds).round().max(1.0) as usize;
    let measure = |state: &PathState| -> Result<(f64, f64), CliError> {
        let grad = space.action_gradient(state, he, je, false)?;
        let gnorm = space.norm(state, &grad, je);
        let action = space.action_value(state, he)?;
        Ok((gnorm, action))
    };

    let (mut gnorm, mut action) = measure(&state)?;
    let action_start = action;
    let mut csv = String::from(TRAJECTORY_HEADER);
    csv.push_str(&crate::runs::trajectory_row(
        start_step as f64 * params.ds,
        energy,
        gnorm,
    ));
    let snap_of = |step: usize, energy: f64, gnorm: f64, action: f64, state: &PathState| Snapshot {
        step,
        s: step as f64 * params.ds,
        energy_accum: energy,
        gradient_norm: gnorm,
        action,
        state: state.clone(),
        config_hash: dir.hash.clone(),
    };
    write_snapshot(&dir, space, &snap_of(start_step, energy, gnorm, action, &state))?;

    let mut converged = params.tol > 0.0 && gnorm <= params.tol;
    let mut taken = start_step;
    if !converged {
        for step in start_step + 1..=steps {
            let next = flow_step(
                space,
                &resolved.system,
                &resolved.hamiltonian,
                &resolved.jfamily,
                &state,
                params.ds,
                params.scheme,
            )
            .map_err(|e| CliError::Usage(format!("grid.ds: {e}")))?;
            // accumulated energy, with the metric at the midpoint state
            let mut speed_sq = vec![0.0; rows];
            for (i, sq) in speed_sq.iter_mut().enumerate() {
                let t = grid.node(i);
                let mid: Vec<Complex64> = state
                    .v_row(i)
                    .iter()
                    .zip(next.v_row(i))
                    .map(|(a, b)| 0.5 * (a + b))
                    .collect();
                let dv: Vec<Complex64> = state
                    .v_row(i)
                    .iter()
                    .zip(next.v_row(i))
                    .map(|(a, b)| (b - a) / params.ds)
                    .collect();
                let de: f64 = state
                    .eta_row(i)
                    .iter()
                    .zip(next.eta_row(i))
                    .map(|(a, b)| ((b - a) / params.ds).powi(2))
                    .sum();
                *sq = je.metric(t, &mid, &dv, &dv) + de;
            }
            energy += params.ds * grid.trapz(&speed_sq);
            state = next;
            taken = step;
            let m = measure(&state)?;
            gnorm = m.0;
            action = m.1;
            csv.push_str(&crate::runs::trajectory_row(
                step as f64 * params.ds,
                energy,
                gnorm,
            ));
            converged = params.tol > 0.0 && gnorm <= params.tol;
            if step % resolved.config.output.snapshot_every == 0 || step == steps || converged {
                write_snapshot(&dir, space, &snap_of(step, energy, gnorm, action, &state))?;
            }
            if converged {
                break;
            }
        }
    }

    let label = if space.torus().is_standard_circle() {
        space.identify_vortex_label(&state, 1e-4).ok()
    } else {
        None
    };
    let (want_csv, want_json) = config.wants();
    if want_csv {
        dir.write_text("trajectory.csv", &csv)?;
    }
    let summary = json!({
        "schema": 1,
        "config_hash": dir.hash,
        "initial": origin,
        "start_step": start_step,
        "steps": taken,
        "s_end": taken as f64 * params.ds,
        "converged": converged,
        "energy": energy,
        "action_start": action_start,
        "action_end": action,
        "gradient_norm": gnorm,
        "terminal_label": label.map(|(m, s)| json!([m, i64::from(s)])),
    });
    if want_json {
        dir.write_json("summary.json", &summary)?;
    }

    match label {
        Some((m, s)) => say(
            quiet,
            &format!(
                "terminal label ({m},{}); E = {:.6e}; {} after {} steps (s = {:.3})",
                if s > 0 { '+' } else { '-' },
                energy,
                if converged { "converged" } else { "stopped" },
                taken,
                taken as f64 * params.ds,
            ),
        ),
        None => say(
            quiet,
            &format!(
                "E = {:.6e}; {} after {} steps (s = {:.3}); gradient norm {:.3e}",
                energy,
                if converged { "converged" } else { "stopped" },
                taken,
                taken as f64 * params.ds,
                gnorm,
            ),
        ),
    }
    say(quiet, &format!("run directory: {}", dir.path.display()));
    Ok((dir.path.clone(), summary))
}

/// Build the initial state from a label such as `1,+` or a JSON file
/// containing either a bare state or a snapshot.
fn initial_state(
    space: &vortexlab_core::PathSpace,
    given: &str,
) -> Result<PathState, CliError> {
    if let Ok((m, sign)) = crate::config::parse_label(given) {
        return Ok(space.critical_representative(m, sign)?);
    }
    let path = Path::new(given);
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "flow: initial {given:?} is neither a label like 1,+ nor an existing file"
        )));
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Io(format!("malformed state file {}: {e}", path.display())))?;
    let state_value = if value.get("path").is_some() {
        &value["path"]
    } else {
        &value
    };
    crate::runs::state_from_value(state_value)
}
