//! `audit`: verify the energy identities of a finished trajectory.
//!
//! Finite-dimensional trajectories are checked against the perfect-square
//! energy decomposition and the second-order flow equation; runs of the
//! path-space systems are checked for the energy/action-drop identity and
//! spot-checked for gauge invariance of the action.

use crate::config::ProblemConfig;
use crate::formats::{csv_row, fmt_f64};
use crate::runs::{read_snapshot, RunDir};
use crate::{say, CliError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use vortexlab_core::{
    bogomolnyi_audit, euler_lagrange_residual, heteroclinic_between, GaugeTransform,
    HamiltonianFamily, MorseProblem, PathState, Trajectory,
};

/// What to audit.
#[derive(Debug, Clone)]
pub enum AuditTarget {
    /// A run directory produced by `flow` (snapshots) or by the demo
    /// (finite trajectory files).
    Dir(PathBuf),
    /// Generate the double-well heteroclinic into a fresh run directory,
    /// then audit it.
    DemoDoubleWell,
}

pub fn cmd_audit(
    config: &ProblemConfig,
    target: &AuditTarget,
    out_base: &Path,
    quiet: bool,
) -> Result<Value, CliError> {
    match target {
        AuditTarget::DemoDoubleWell => {
            let dir = RunDir::create(out_base, "audit-demo", config)?;
            let problem = MorseProblem::DoubleWell;
            let traj = heteroclinic_between(&problem, &[1e-3], 1e-3, 25.0, 1e-10)?;
            write_finite(&dir, "double_well", &traj)?;
            let report = audit_finite(&problem, &traj, quiet)?;
            dir.write_json("audit.json", &report)?;
            say(quiet, &format!("run directory: {}", dir.path.display()));
            Ok(report)
        }
        AuditTarget::Dir(path) => {
            if path.join("finite.json").exists() {
                let (problem, traj) = read_finite(path)?;
                let report = audit_finite(&problem, &traj, quiet)?;
                crate::runs::atomic_write(
                    &path.join("audit.json"),
                    crate::formats::json_to_string(&report).as_bytes(),
                )?;
                Ok(report)
            } else {
                let report = audit_pde(path, quiet)?;
                crate::runs::atomic_write(
                    &path.join("audit.json"),
                    crate::formats::json_to_string(&report).as_bytes(),
                )?;
                Ok(report)
            }
        }
    }
}

fn write_finite(dir: &RunDir, name: &str, traj: &Trajectory) -> Result<(), CliError> {
    let meta = json!({
        "schema": 1,
        "problem": name,
        "ds": traj.ds,
        "direction": traj.direction,
        "converged": traj.converged,
        "samples": traj.samples.len(),
    });
    dir.write_json("finite.json", &meta)?;
    let dim = traj.samples.first().map_or(0, Vec::len);
    let mut csv = String::from("s");
    for j in 0..dim {
        csv.push_str(&format!(",x{}", j + 1));
    }
    csv.push('\n');
    for (i, sample) in traj.samples.iter().enumerate() {
        let mut fields = vec![fmt_f64(i as f64 * traj.ds)];
        fields.extend(sample.iter().map(|x| fmt_f64(*x)));
        csv.push_str(&csv_row(&fields));
    }
    dir.write_text("trajectory-finite.csv", &csv)
}

fn read_finite(path: &Path) -> Result<(MorseProblem, Trajectory), CliError> {
    let meta_text = std::fs::read_to_string(path.join("finite.json"))
        .map_err(|e| CliError::Io(format!("cannot read finite.json: {e}")))?;
    let meta: Value = serde_json::from_str(&meta_text)
        .map_err(|e| CliError::Io(format!("malformed finite.json: {e}")))?;
    let problem = match meta["problem"].as_str() {
        Some("double_well") => MorseProblem::DoubleWell,
        Some(other) => {
            return Err(CliError::Io(format!(
                "finite.json: unknown problem {other:?}"
            )))
        }
        None => return Err(CliError::Io("finite.json: missing problem".into())),
    };
    let ds = meta["ds"]
        .as_f64()
        .ok_or_else(|| CliError::Io("finite.json: missing ds".into()))?;
    let csv = std::fs::read_to_string(path.join("trajectory-finite.csv"))
        .map_err(|e| CliError::Io(format!("cannot read trajectory-finite.csv: {e}")))?;
    let mut samples = Vec::new();
    for (i, line) in csv.lines().enumerate() {
        if i == 0 {
            continue; // header
        }
        let fields: Result<Vec<f64>, _> = line.split(',').skip(1).map(str::parse).collect();
        samples.push(fields.map_err(|e| {
            CliError::Io(format!("trajectory-finite.csv line {}: {e}", i + 1))
        })?);
    }
    Ok((
        problem,
        Trajectory {
            ds,
            direction: meta["direction"].as_i64().unwrap_or(1) as i8,
            samples,
            converged: meta["converged"].as_bool().unwrap_or(false),
        },
    ))
}

fn audit_finite(
    problem: &MorseProblem,
    traj: &Trajectory,
    quiet: bool,
) -> Result<Value, CliError> {
    let audit = bogomolnyi_audit(problem, traj)?;
    let el = euler_lagrange_residual(problem, traj)?;
    let first = traj.samples.first().expect("nonempty trajectory");
    let last = traj.samples.last().expect("nonempty trajectory");
    say(quiet, &format!("samples: {}", traj.samples.len()));
    say(
        quiet,
        &format!(
            "objective endpoints: {:.9} -> {:.9} (drop {:.9})",
            problem.value(first),
            problem.value(last),
            audit.potential_drop
        ),
    );
    say(quiet, &format!("E = {:.12}", audit.energy));
    say(
        quiet,
        &format!("selfdual completion term: {:.3e}", audit.completion),
    );
    say(
        quiet,
        &format!("energy identity residual: {:.3e}", audit.residual),
    );
    say(quiet, &format!("second-order flow residual: {:.3e}", el));
    Ok(json!({
        "schema": 1,
        "kind": "finite",
        "samples": traj.samples.len(),
        "energy": audit.energy,
        "completion": audit.completion,
        "potential_drop": audit.potential_drop,
        "residual": audit.residual,
        "euler_lagrange_residual": el,
    }))
}

fn audit_pde(path: &Path, quiet: bool) -> Result<Value, CliError> {
    let config_text = std::fs::read_to_string(path.join("resolved.json")).map_err(|e| {
        CliError::Io(format!(
            "{} has no finite.json and no readable resolved.json: {e}",
            path.display()
        ))
    })?;
    let config = ProblemConfig::from_json(&config_text)?;
    let resolved = config.resolve()?;
    let space = &resolved.space;

    let mut snaps: Vec<PathBuf> = std::fs::read_dir(path)
        .map_err(|e| CliError::Io(format!("cannot list {}: {e}", path.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("snapshot-") && n.ends_with(".json"))
        })
        .collect();
    snaps.sort();
    if snaps.is_empty() {
        return Err(CliError::Io(format!(
            "{}: no snapshot files to audit",
            path.display()
        )));
    }
    let first = read_snapshot(&snaps[0])?;
    let last = read_snapshot(snaps.last().expect("nonempty"))?;

    let h = match resolved.system {
        vortexlab_core::PdeSystem::GeneralizedHiggs { .. } => resolved.hamiltonian.clone(),
        _ => HamiltonianFamily::Zero,
    };
    let action_first = space.action_value(&first.state, &h)?;
    let action_last = space.action_value(&last.state, &h)?;
    for (stored, computed, which) in [
        (first.action, action_first, "first"),
        (last.action, action_last, "last"),
    ] {
        if (stored - computed).abs() > 1e-10 * computed.abs().max(1.0) {
            return Err(CliError::Io(format!(
                "{which} snapshot action {stored} disagrees with the state ({computed})"
            )));
        }
    }

    let energy = last.energy_accum - first.energy_accum;
    let drop = action_first - action_last;
    let residual = (energy - drop).abs();
    let relative = residual / drop.abs().max(1e-12);

    say(
        quiet,
        &format!(
            "action endpoints: {:.9} (s = {:.3}) -> {:.9} (s = {:.3})",
            action_first, first.s, action_last, last.s
        ),
    );
    say(quiet, &format!("E = {:.12}", energy));
    say(
        quiet,
        &format!("energy identity residual: {residual:.3e} (relative {relative:.3e})"),
    );

    // gauge spot checks exercise the unperturbed action on a smooth
    // reference path over the run's own grid: a unit winding shifts the
    // action by <tau, xi(1)> and a contractible loop leaves it unchanged.
    // (Discrete gauge invariance is spectrally accurate, so a rough flow
    // state would probe its own resolution rather than the conventions.)
    let torus = space.torus();
    let grid = space.grid();
    let reference = if torus.is_standard_circle() {
        space.critical_representative(1, 1)?
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(resolved.seed);
        let probe = torus.check_hypothesis_h(&mut rng, 64, 2.0);
        let zero = probe.zero_point.ok_or_else(|| {
            CliError::Usage(
                "gauge spot check needs a moment-map zero and none was found".into(),
            )
        })?;
        let point: Vec<f64> = zero.iter().map(|c| c.re).collect();
        PathState::constant(grid.nt(), &point, &vec![0.0; torus.k()])
    };
    let action_ref = space.action_value(&reference, &HamiltonianFamily::Zero)?;
    let mut unit = vec![0i64; torus.k()];
    unit[0] = 1;
    let winding = GaugeTransform::winding(torus, grid, &unit)?;
    let expected: f64 = torus
        .tau()
        .iter()
        .zip(winding.endpoint())
        .map(|(t, x)| t * x)
        .sum();
    let turned = winding.apply(torus, &reference)?;
    let shift = space.action_value(&turned, &HamiltonianFamily::Zero)? - action_ref;
    let winding_defect = (shift - expected).abs();

    let rows = grid.nodes();
    let dxi: Vec<Vec<f64>> = (0..rows)
        .map(|i| {
            let t = grid.node(i);
            vec![0.3 * 2.0 * std::f64::consts::PI * (2.0 * std::f64::consts::PI * t).cos();
                 torus.k()]
        })
        .collect();
    let loop_transform = GaugeTransform::from_rate(
        torus,
        grid,
        dxi,
        vortexlab_core::GroupElement::identity(torus.k()),
    )?;
    let looped = loop_transform.apply(torus, &reference)?;
    let loop_drift =
        (space.action_value(&looped, &HamiltonianFamily::Zero)? - action_ref).abs();

    let gauge_ok = winding_defect <= 1e-6 && loop_drift <= 1e-6;
    say(
        quiet,
        &format!(
            "gauge spot checks: {} (winding shift defect {winding_defect:.3e}, \
             contractible drift {loop_drift:.3e})",
            if gauge_ok { "ok" } else { "FAILED" }
        ),
    );

    Ok(json!({
        "schema": 1,
        "kind": "pde",
        "snapshots": snaps.len(),
        "s_first": first.s,
        "s_last": last.s,
        "action_first": action_first,
        "action_last": action_last,
        "energy": energy,
        "residual": residual,
        "relative_residual": relative,
        "winding_shift_defect": winding_defect,
        "contractible_drift": loop_drift,
        "gauge_ok": gauge_ok,
    }))
}
