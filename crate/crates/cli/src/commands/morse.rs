//! `morse`: the quadratic-on-the-sphere Morse complex built by shooting,
//! its antipodal quotient, homology ranks over the two-element field, and
//! the rank-comparison verdict.

use crate::config::ProblemConfig;
use crate::formats::csv_row;
use crate::runs::RunDir;
use crate::{say, CliError};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use vortexlab_core::{
    antipodal_generator_action, principle_check, quotient_complex, sphere_morse_complex,
    ChainComplexGf2, ShootingOptions,
};

/// Arguments of the `morse` command.
#[derive(Debug, Clone)]
pub struct MorseArgs {
    pub lambda: [f64; 3],
    /// Double the angular shooting resolution (stability check).
    pub doubled_shooting: bool,
}

fn complex_value(cx: &ChainComplexGf2) -> Value {
    let top = cx.top_grading();
    let generators: Vec<Value> = (0..=top)
        .map(|d| Value::Array(cx.generators(d).iter().map(|g| json!(g)).collect()))
        .collect();
    let mut boundary = Vec::new();
    for d in 1..=top {
        let b = cx.boundary(d).expect("grading in range");
        for col in 0..b.cols() {
            for row in 0..b.rows() {
                if b.get(row, col) {
                    boundary.push(json!([d, row, col]));
                }
            }
        }
    }
    json!({
        "gradings": top + 1,
        "generators": generators,
        "boundary": boundary,
        "homology_ranks": cx.homology_ranks(),
        "euler_characteristic": cx.euler_characteristic(),
    })
}

/// Integer flow-line counts from each maximum orbit to each saddle orbit,
/// summed over the cover boundary by antipodal name pairing.
fn orbit_counts(cx: &ChainComplexGf2) -> Vec<(String, String, usize)> {
    let top = cx.top_grading();
    let maxima = cx.generators(top);
    let saddles = cx.generators(top - 1);
    let b = cx.boundary(top).expect("top boundary");
    let strip = |name: &str| name.trim_start_matches(['+', '-']).to_string();
    let mut out = Vec::new();
    // one representative per orbit: the '+' named generator
    for (col, max_name) in maxima.iter().enumerate() {
        if !max_name.starts_with('+') {
            continue;
        }
        let mut per_orbit: Vec<(String, usize)> = Vec::new();
        for (row, saddle_name) in saddles.iter().enumerate() {
            if b.get(row, col) {
                let orbit = strip(saddle_name);
                match per_orbit.iter_mut().find(|(o, _)| *o == orbit) {
                    Some((_, c)) => *c += 1,
                    None => per_orbit.push((orbit, 1)),
                }
            }
        }
        for (orbit, count) in per_orbit {
            out.push((format!("[{}]", strip(max_name)), format!("[{orbit}]"), count));
        }
    }
    out
}

/// Build both complexes, print the rank table and verdict, and write the
/// report; returns the run directory and the report value.
pub fn cmd_morse(
    config: &ProblemConfig,
    args: &MorseArgs,
    out_base: &Path,
    quiet: bool,
) -> Result<(PathBuf, Value), CliError> {
    let mut opts = ShootingOptions::default();
    if args.doubled_shooting {
        opts.coarse *= 2;
    }
    let cover = sphere_morse_complex(args.lambda, &opts)?;
    say(quiet, "∂² = 0: ok");
    let action = antipodal_generator_action(&cover)?;
    let quotient = quotient_complex(&cover, &action)?;
    let chain = principle_check(&cover, &action)?;

    let cover_ranks = cover.homology_ranks();
    let quotient_ranks = quotient.homology_ranks();
    let cover_total: usize = cover_ranks.iter().sum();
    let quotient_total: usize = quotient_ranks.iter().sum();
    // the rank comparison: a mismatch asserts a connecting flow line
    let verdict = cover_total != chain.group_order * quotient_total;

    let counts = orbit_counts(&cover);

    say(
        quiet,
        &format!(
            "cover generators per grading: {:?} (total {})",
            cover.generator_counts(),
            chain.cover_generators
        ),
    );
    for (from, to, count) in &counts {
        say(
            quiet,
            &format!(
                "flow lines {from} -> {to}: {count} ({} mod 2)",
                if count % 2 == 0 { "0" } else { "1" }
            ),
        );
    }
    say(
        quiet,
        &format!("cover homology ranks: {cover_ranks:?} (total {cover_total})"),
    );
    say(
        quiet,
        &format!(
            "quotient generators per grading: {:?} (total {})",
            quotient.generator_counts(),
            chain.quotient_generators
        ),
    );
    say(
        quiet,
        &format!("quotient homology ranks: {quotient_ranks:?} (total {quotient_total})"),
    );
    say(
        quiet,
        &format!(
            "chain rank identity: {} = {} x {}: ok",
            chain.cover_generators, chain.group_order, chain.quotient_generators
        ),
    );
    say(
        quiet,
        &format!(
            "verdict: {} ({} vs {} x {})",
            if verdict {
                "a connecting flow line of positive energy exists"
            } else {
                "ranks balance; no conclusion"
            },
            cover_total,
            chain.group_order,
            quotient_total
        ),
    );

    let dir = RunDir::create(out_base, "morse", config)?;
    let report = json!({
        "schema": 1,
        "config_hash": dir.hash,
        "lambda": args.lambda,
        "doubled_shooting": args.doubled_shooting,
        "cover": complex_value(&cover),
        "quotient": complex_value(&quotient),
        "flow_line_counts": counts
            .iter()
            .map(|(f, t, c)| json!({"from": f, "to": t, "count": c}))
            .collect::<Vec<_>>(),
        "chain_identity": {
            "group_order": chain.group_order,
            "cover_generators": chain.cover_generators,
            "quotient_generators": chain.quotient_generators,
            "cover_euler": chain.cover_euler,
            "quotient_euler": chain.quotient_euler,
        },
        "cover_total_rank": cover_total,
        "quotient_total_rank": quotient_total,
        "verdict": verdict,
    });
    let (want_csv, want_json) = config.wants();
    if want_json {
        dir.write_json("morse.json", &report)?;
    }
    if want_csv {
        let mut csv =
            String::from("grading,cover_generators,cover_rank,quotient_generators,quotient_rank\n");
        for d in 0..=cover.top_grading() {
            csv.push_str(&csv_row(&[
                d.to_string(),
                cover.generators(d).len().to_string(),
                cover_ranks[d].to_string(),
                quotient.generators(d).len().to_string(),
                quotient_ranks[d].to_string(),
            ]));
        }
        dir.write_text("morse.csv", &csv)?;
    }
    Ok((dir.path.clone(), report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_eigenvalues_exit_with_config_code() {
        let out = tempfile::tempdir().unwrap();
        let config = ProblemConfig::from_json("{}").unwrap();
        let args = MorseArgs {
            lambda: [1.0, 1.0, 2.0],
            doubled_shooting: false,
        };
        let err = cmd_morse(&config, &args, out.path(), true).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn demo_eigenvalues_reproduce_the_rank_table() {
        let out = tempfile::tempdir().unwrap();
        let config = ProblemConfig::from_json("{}").unwrap();
        let args = MorseArgs {
            lambda: [1.0, 2.0, 3.0],
            doubled_shooting: false,
        };
        let (_, report) = cmd_morse(&config, &args, out.path(), true).unwrap();
        assert_eq!(report["cover_total_rank"], json!(2));
        assert_eq!(report["quotient_total_rank"], json!(3));
        assert_eq!(report["verdict"], json!(true));
        assert_eq!(report["chain_identity"]["cover_generators"], json!(6));
        let counts = report["flow_line_counts"].as_array().unwrap();
        assert_eq!(counts.len(), 1, "one maximum orbit, one saddle orbit");
        assert_eq!(counts[0]["count"], json!(2));
    }
}
