//! `bvp`: search for connecting flow lines between labeled critical
//! points by strip-energy minimization, then test the solutions pairwise
//! for gauge equivalence.
//!
//! The success verdict requires at least two pairwise non-equivalent
//! solutions of positive finite energy.

use crate::config::ProblemConfig;
use crate::runs::{state_to_value, RunDir};
use crate::{say, CliError};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use vortexlab_core::{find_flow_line, gauge_equivalent, ConnectParams, FlowLineResult};

/// Arguments of the `bvp` command.
#[derive(Debug, Clone)]
pub struct BvpArgs {
    pub from: (i64, i8),
    pub to: Vec<(i64, i8)>,
    /// Independent minimization attempts per target.
    pub seeds: usize,
    /// Strip intervals in the flow parameter.
    pub ns: usize,
    /// Strip length in the flow parameter.
    pub s_len: f64,
    pub max_iters: usize,
}

impl Default for BvpArgs {
    fn default() -> Self {
        BvpArgs {
            from: (1, 1),
            to: vec![(0, 1), (0, -1)],
            seeds: 1,
            ns: 160,
            s_len: 12.0,
            max_iters: 20_000,
        }
    }
}

fn label_text(label: (i64, i8)) -> String {
    format!("({},{})", label.0, if label.1 > 0 { '+' } else { '-' })
}

/// Run the connecting-orbit search; returns the run directory and report.
pub fn cmd_bvp(
    config: &ProblemConfig,
    args: &BvpArgs,
    out_base: &Path,
    quiet: bool,
) -> Result<(PathBuf, Value), CliError> {
    let resolved = config.resolve()?;
    let space = &resolved.space;
    if args.to.is_empty() {
        return Err(CliError::Usage("bvp: at least one --to label is required".into()));
    }
    if args.seeds == 0 {
        return Err(CliError::Usage("bvp: seeds must be at least 1".into()));
    }
    for &to in &args.to {
        if to == args.from {
            return Err(CliError::Usage(format!(
                "bvp: from and to labels must differ (got {} twice); \
                 connecting solutions have positive energy",
                label_text(to)
            )));
        }
    }

    let dir = RunDir::create(out_base, "bvp", config)?;
    let mut solutions: Vec<(usize, u64, FlowLineResult)> = Vec::new();
    let mut attempts = Vec::new();
    let mut best_grad = f64::INFINITY;
    for (target_idx, &to) in args.to.iter().enumerate() {
        for attempt in 0..args.seeds {
            let seed = resolved
                .seed
                .wrapping_add((target_idx * args.seeds + attempt) as u64);
            let params = ConnectParams {
                ns: args.ns,
                s_len: args.s_len,
                max_iters: args.max_iters,
                grad_tol: if resolved.flow_params.tol > 0.0 {
                    resolved.flow_params.tol
                } else {
                    1e-6
                },
                // accept once within one percent of the action gap
                target: None,
                seed,
                noise: 1e-2,
            };
            let mut params = params;
            let result = {
                // the action gap between the pinned ends is the energy of
                // an exact connecting flow line
                let probe = find_gap(space, args.from, to)?;
                if probe <= 0.0 {
                    return Err(CliError::Usage(format!(
                        "bvp: target {} does not lie below {} (action gap {probe:.3e})",
                        label_text(to),
                        label_text(args.from)
                    )));
                }
                params.target = Some(probe * 1.01);
                find_flow_line(space, args.from, to, &params)?
            };
            best_grad = best_grad.min(result.grad_norm);
            say(
                quiet,
                &format!(
                    "{} -> {}: E = {:.6} (gap {:.6}), gradient {:.2e}, {} after {} iterations",
                    label_text(args.from),
                    label_text(to),
                    result.energy,
                    result.action_drop,
                    result.grad_norm,
                    if result.converged { "converged" } else { "stalled" },
                    result.iterations,
                ),
            );
            attempts.push(json!({
                "to": [to.0, i64::from(to.1)],
                "seed": seed,
                "energy": result.energy,
                "action_drop": result.action_drop,
                "grad_norm": result.grad_norm,
                "iterations": result.iterations,
                "converged": result.converged,
            }));
            if result.converged {
                solutions.push((target_idx, seed, result));
            }
        }
    }

    if solutions.is_empty() {
        return Err(CliError::Search(format!(
            "bvp: no connecting flow line converged; best gradient norm {best_grad:.3e}"
        )));
    }

    // pairwise gauge equivalence of the found strips
    let m = solutions.len();
    let mut equivalent = vec![vec![false; m]; m];
    for i in 0..m {
        equivalent[i][i] = true;
        for j in i + 1..m {
            let witness = gauge_equivalent(
                space.torus(),
                space.grid(),
                &solutions[i].2.states,
                &solutions[j].2.states,
                1e-3,
            )?;
            equivalent[i][j] = witness.is_some();
            equivalent[j][i] = equivalent[i][j];
        }
    }
    let verdict = (0..m).any(|i| {
        (i + 1..m).any(|j| {
            !equivalent[i][j]
                && solutions[i].2.energy > 0.0
                && solutions[j].2.energy > 0.0
                && solutions[i].2.energy.is_finite()
                && solutions[j].2.energy.is_finite()
        })
    });

    for (idx, (target_idx, seed, result)) in solutions.iter().enumerate() {
        let to = args.to[*target_idx];
        let doc = json!({
            "schema": 1,
            "config_hash": dir.hash,
            "from": [args.from.0, i64::from(args.from.1)],
            "to": [to.0, i64::from(to.1)],
            "seed": seed,
            "energy": result.energy,
            "grad_norm": result.grad_norm,
            "iterations": result.iterations,
            "first": state_to_value(&result.states[0]),
            "last": state_to_value(result.states.last().expect("nonempty strip")),
        });
        dir.write_json(&format!("solution-{idx:02}.json"), &doc)?;
    }

    let report = json!({
        "schema": 1,
        "config_hash": dir.hash,
        "from": [args.from.0, i64::from(args.from.1)],
        "targets": args.to.iter().map(|t| json!([t.0, i64::from(t.1)])).collect::<Vec<_>>(),
        "attempts": attempts,
        "solutions": solutions.len(),
        "gauge_equivalent": equivalent,
        "verdict": verdict,
    });
    let (_, want_json) = config.wants();
    if want_json {
        dir.write_json("report.json", &report)?;
    }
    say(
        quiet,
        &format!(
            "verdict: {}",
            if verdict {
                "at least two non-equivalent positive-energy solutions exist"
            } else {
                "fewer than two non-equivalent solutions found"
            }
        ),
    );
    Ok((dir.path.clone(), report))
}

fn find_gap(
    space: &vortexlab_core::PathSpace,
    from: (i64, i8),
    to: (i64, i8),
) -> Result<f64, CliError> {
    let h = vortexlab_core::HamiltonianFamily::Zero;
    let a = space.action_value(&space.critical_representative(from.0, from.1)?, &h)?;
    let b = space.action_value(&space.critical_representative(to.0, to.1)?, &h)?;
    Ok(a - b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_labels_are_rejected() {
        let out = tempfile::tempdir().unwrap();
        let config = ProblemConfig::from_json(r#"{"grid": {"nt": 16, "ds": 0.004}}"#).unwrap();
        let args = BvpArgs {
            from: (1, 1),
            to: vec![(1, 1)],
            ..BvpArgs::default()
        };
        let err = cmd_bvp(&config, &args, out.path(), true).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(format!("{err}").contains("positive energy"));
    }

    #[test]
    fn ascending_targets_are_rejected() {
        let out = tempfile::tempdir().unwrap();
        let config = ProblemConfig::from_json(r#"{"grid": {"nt": 16, "ds": 0.004}}"#).unwrap();
        let args = BvpArgs {
            from: (0, 1),
            to: vec![(1, 1)],
            ..BvpArgs::default()
        };
        let err = cmd_bvp(&config, &args, out.path(), true).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(format!("{err}").contains("action gap"));
    }

    #[test]
    fn small_grid_search_finds_a_connection() {
        let out = tempfile::tempdir().unwrap();
        let config = ProblemConfig::from_json(r#"{"grid": {"nt": 16, "ds": 0.004}}"#).unwrap();
        let args = BvpArgs {
            from: (1, 1),
            to: vec![(0, 1)],
            seeds: 1,
            ns: 60,
            s_len: 10.0,
            max_iters: 4000,
        };
        let (_, report) = cmd_bvp(&config, &args, out.path(), true).unwrap();
        assert_eq!(report["solutions"], json!(1));
        let energy = report["attempts"][0]["energy"].as_f64().unwrap();
        let gap = std::f64::consts::PI / 2.0;
        assert!((energy - gap).abs() / gap <= 0.011, "E = {energy}");
    }
}
