//! `critical`: enumerate the labeled critical points of the circle-case
//! action over a winding range and tabulate actions and residuals.

use crate::config::ProblemConfig;
use crate::formats::{csv_row, fmt_f64};
use crate::runs::RunDir;
use crate::{say, CliError};
use serde_json::{json, Value};
use std::path::Path;
use vortexlab_core::HamiltonianFamily;

/// Enumerate critical points for `m_min ..= m_max`, print the table and
/// write `critical.json` / `critical.csv` into a run directory.  An empty
/// range produces an empty table and succeeds.
pub fn cmd_critical(
    config: &ProblemConfig,
    m_min: i64,
    m_max: i64,
    out_base: &Path,
    quiet: bool,
) -> Result<Value, CliError> {
    let resolved = config.resolve()?;
    if !resolved.space.torus().is_standard_circle() {
        return Err(CliError::Usage(
            "action.A: the critical table is defined for the standard circle action \
             (A = [[1]], tau = [-0.5])"
                .into(),
        ));
    }

    let rows = if m_min > m_max {
        Vec::new()
    } else {
        resolved.space.enumerate_vortex_critical(m_min, m_max)?
    };

    let dir = RunDir::create(out_base, "critical", config)?;
    let mut json_rows = Vec::with_capacity(rows.len());
    let mut csv = String::from("winding,sign,action,residual\n");
    say(quiet, "label    action                   residual");
    for item in &rows {
        let residual = resolved
            .space
            .critical_residual(&item.state, &HamiltonianFamily::Zero)?;
        let sign = if item.sign > 0 { '+' } else { '-' };
        say(
            quiet,
            &format!(
                "({:>2},{sign})  {:<24} {:.2e}",
                item.winding,
                fmt_f64(item.action),
                residual
            ),
        );
        csv.push_str(&csv_row(&[
            item.winding.to_string(),
            i64::from(item.sign).to_string(),
            fmt_f64(item.action),
            fmt_f64(residual),
        ]));
        json_rows.push(json!({
            "winding": item.winding,
            "sign": i64::from(item.sign),
            "action": item.action,
            "residual": residual,
        }));
    }

    let summary = json!({
        "schema": 1,
        "config_hash": dir.hash,
        "m_min": m_min,
        "m_max": m_max,
        "rows": json_rows,
    });
    let (want_csv, want_json) = config.wants();
    if want_json {
        dir.write_json("critical.json", &summary)?;
    }
    if want_csv {
        dir.write_text("critical.csv", &csv)?;
    }
    say(
        quiet,
        &format!("{} critical points -> {}", rows.len(), dir.path.display()),
    );
    Ok(summary)
}
