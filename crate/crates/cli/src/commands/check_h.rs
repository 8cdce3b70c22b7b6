//! `check-h`: numerical probe of the standing hypotheses on the torus
//! action — a zero of the moment map exists, the action there is free,
//! and preimages of bounded sets look bounded (properness heuristic).

use crate::config::ProblemConfig;
use crate::runs::RunDir;
use crate::{say, CliError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::path::Path;

pub fn cmd_check_h(
    config: &ProblemConfig,
    samples: usize,
    radius: f64,
    out_base: &Path,
    quiet: bool,
) -> Result<Value, CliError> {
    if samples == 0 {
        return Err(CliError::Usage("check-h: samples must be at least 1".into()));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(CliError::Usage(format!(
            "check-h: radius must be positive (got {radius})"
        )));
    }
    let resolved = config.resolve()?;
    let torus = resolved.space.torus();
    let mut rng = ChaCha8Rng::seed_from_u64(resolved.seed);
    let report = torus.check_hypothesis_h(&mut rng, samples, radius);

    let isotropy: Vec<Vec<f64>> = torus
        .isotropy_lagrangian()
        .map(|els| els.iter().map(|g| g.angles().to_vec()).collect())
        .unwrap_or_default();

    match &report.zero_point {
        Some(_) => say(
            quiet,
            &format!(
                "moment map zero: found (residual {:.2e})",
                report.zero_residual
            ),
        ),
        None => say(
            quiet,
            &format!(
                "moment map zero: NOT found (best residual {:.2e})",
                report.zero_residual
            ),
        ),
    }
    match report.free_at_zero {
        Some(true) => say(quiet, "free action at the zero level: yes"),
        Some(false) => say(quiet, "free action at the zero level: NO"),
        None => say(quiet, "free action at the zero level: not checked (no zero)"),
    }
    say(
        quiet,
        &format!(
            "properness heuristic: {} (sup |z| = {:.4} over {} sampled preimages) [heuristic]",
            if report.proper_hint {
                "bounded"
            } else {
                "UNBOUNDED?"
            },
            report.preimage_sup_norm,
            report.sample_count,
        ),
    );

    let dir = RunDir::create(out_base, "check-h", config)?;
    let summary = json!({
        "schema": 1,
        "config_hash": dir.hash,
        "samples": samples,
        "radius": radius,
        "zero_found": report.zero_point.is_some(),
        "zero_residual": report.zero_residual,
        "free_at_zero": report.free_at_zero,
        "proper_hint": report.proper_hint,
        "preimage_sup_norm": report.preimage_sup_norm,
        "isotropy_elements": isotropy,
    });
    let (_, want_json) = config.wants();
    if want_json {
        dir.write_json("check-h.json", &summary)?;
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_hypotheses_all_pass() {
        let dir = tempfile::tempdir().unwrap();
        let config = ProblemConfig::from_json(r#"{"grid": {"nt": 16, "ds": 0.004}}"#).unwrap();
        let summary = cmd_check_h(&config, 50, 2.0, dir.path(), true).unwrap();
        assert_eq!(summary["zero_found"], json!(true));
        assert!(summary["zero_residual"].as_f64().unwrap() <= 1e-8);
        assert_eq!(summary["free_at_zero"], json!(true));
        assert_eq!(summary["proper_hint"], json!(true));
        // circle isotropy of the real locus: {1, -1}
        assert_eq!(summary["isotropy_elements"].as_array().unwrap().len(), 2);
    }
}
