//! Problem configuration: a single JSON document describing the group
//! action, grids, flow system, Hamiltonian, solver and output layout.
//!
//! Unknown keys are rejected so that a typo never silently falls back to a
//! default, and every error message names the offending key.  A missing
//! section or field takes its documented default; the fully resolved
//! configuration (defaults filled in) is written into every run directory.

use crate::CliError;
use serde::{Deserialize, Serialize};
use std::path::Path;
use vortexlab_core::{
    stability_bound, AlmostComplexFamily, FlowParams, HamiltonianFamily, PathSpace, PdeSystem,
    Scheme, TimeGrid, TimeProfile, TorusAction,
};

/// Top-level configuration document.
#[derive(Debug, Clone, Serialize, Deserialize, Default, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemConfig {
    pub action: ActionConfig,
    pub grid: GridConfig,
    pub system: SystemConfig,
    pub hamiltonian: HamiltonianConfig,
    pub jfamily: JFamilyConfig,
    pub solver: SolverConfig,
    pub output: OutputConfig,
}

/// Integer weight matrix and moment-map level of the torus action.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ActionConfig {
    /// Weight matrix, one row per complex coordinate, one column per
    /// torus factor.
    #[serde(rename = "A")]
    pub a: Vec<Vec<i64>>,
    /// Level shift; one entry per torus factor.
    pub tau: Vec<f64>,
}

impl Default for ActionConfig {
    fn default() -> Self {
        ActionConfig {
            a: vec![vec![1]],
            tau: vec![-0.5],
        }
    }
}

/// Time grid and flow-parameter stepping.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// Number of time intervals on `[0, 1]`.
    pub nt: usize,
    /// Flow-parameter step.
    pub ds: f64,
    /// Flow horizon.
    pub s_max: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            nt: 64,
            ds: 0.004,
            s_max: 4.0,
        }
    }
}

/// Which first-order system the `flow` command integrates.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    /// One of `higgs`, `vortex`, `chern_simons`.
    pub kind: String,
    /// Warp regularization for `chern_simons`.
    pub epsilon: f64,
    /// Apply the moment-map level shift twice in the `eta`-equation of
    /// the `higgs` system.
    pub tau_double_shift: bool,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            kind: "higgs".into(),
            epsilon: 1e-8,
            tau_double_shift: false,
        }
    }
}

/// Hamiltonian perturbation family.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct HamiltonianConfig {
    /// One of `zero`, `bump`.
    pub kind: String,
    pub parameters: BumpParameters,
}

impl Default for HamiltonianConfig {
    fn default() -> Self {
        HamiltonianConfig {
            kind: "zero".into(),
            parameters: BumpParameters::default(),
        }
    }
}

/// Parameters of the compactly supported bump Hamiltonian; ignored when
/// the kind is `zero`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct BumpParameters {
    pub amplitude: f64,
    /// Bump center, one `[re, im]` pair per complex coordinate.
    pub center: Vec<[f64; 2]>,
    pub radius: f64,
    /// Time profile: `one` (constant) or `sinsq` (vanishing at the ends).
    pub profile: String,
}

impl Default for BumpParameters {
    fn default() -> Self {
        BumpParameters {
            amplitude: 0.05,
            center: vec![[0.3, 0.0]],
            radius: 1.0,
            profile: "sinsq".into(),
        }
    }
}

/// Almost complex structure family.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct JFamilyConfig {
    /// Only `standard` is implemented.
    pub kind: String,
}

impl Default for JFamilyConfig {
    fn default() -> Self {
        JFamilyConfig {
            kind: "standard".into(),
        }
    }
}

/// Integrator scheme, convergence tolerance and random seed.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// One of `rk4`, `semi_implicit`.
    pub scheme: String,
    /// Gradient norm below which a flow counts as converged; `0` disables
    /// early stopping.
    pub tol: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            scheme: "rk4".into(),
            tol: 1e-6,
            seed: 0,
        }
    }
}

/// Output directory and formats.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
    /// Subset of `csv`, `json`.
    pub formats: Vec<String>,
    /// Write a state snapshot every this many flow steps.
    pub snapshot_every: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: "runs".into(),
            formats: vec!["csv".into(), "json".into()],
            snapshot_every: 100,
        }
    }
}

/// Everything a command needs, built from a validated configuration.
pub struct Resolved {
    pub config: ProblemConfig,
    pub space: PathSpace,
    pub system: PdeSystem,
    pub hamiltonian: HamiltonianFamily,
    pub jfamily: AlmostComplexFamily,
    pub flow_params: FlowParams,
    pub seed: u64,
}

impl ProblemConfig {
    /// Parse a configuration document from a JSON file.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Parse a configuration document from a JSON string.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    /// Validate all invariants and build the working objects.  The
    /// returned [`Resolved`] carries a copy of the configuration with all
    /// defaults filled in.
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let torus = self.build_torus()?;
        let n = torus.n();

        if self.grid.nt < 8 {
            return Err(CliError::Usage(format!(
                "grid.nt: must be at least 8 (got {})",
                self.grid.nt
            )));
        }
        if !(self.grid.ds.is_finite() && self.grid.ds > 0.0) {
            return Err(CliError::Usage(format!(
                "grid.ds: must be a positive number (got {})",
                self.grid.ds
            )));
        }
        let bound = stability_bound(self.grid.nt, 1.0);
        if self.grid.ds > bound {
            return Err(CliError::Usage(format!(
                "grid.ds: {} exceeds the stability bound {:.6} for nt = {}",
                self.grid.ds, bound, self.grid.nt
            )));
        }
        if !(self.grid.s_max.is_finite() && self.grid.s_max >= self.grid.ds) {
            return Err(CliError::Usage(format!(
                "grid.s_max: must be at least grid.ds (got {})",
                self.grid.s_max
            )));
        }

        let system = match self.system.kind.as_str() {
            "higgs" => PdeSystem::GeneralizedHiggs {
                tau_double_shift: self.system.tau_double_shift,
            },
            "vortex" => PdeSystem::ClassicalVortex,
            "chern_simons" => {
                if !(self.system.epsilon.is_finite() && self.system.epsilon >= 0.0) {
                    return Err(CliError::Usage(format!(
                        "system.epsilon: must be a nonnegative number (got {})",
                        self.system.epsilon
                    )));
                }
                PdeSystem::ChernSimons {
                    epsilon: self.system.epsilon,
                }
            }
            other => {
                return Err(CliError::Usage(format!(
                    "system.kind: unknown kind {other:?} (expected higgs, vortex or chern_simons)"
                )))
            }
        };

        let hamiltonian = match self.hamiltonian.kind.as_str() {
            "zero" => HamiltonianFamily::Zero,
            "bump" => {
                let p = &self.hamiltonian.parameters;
                if p.center.len() != n {
                    return Err(CliError::Usage(format!(
                        "hamiltonian.parameters.center: expected {n} [re, im] pairs \
                         (one per coordinate), got {}",
                        p.center.len()
                    )));
                }
                if !(p.radius.is_finite() && p.radius > 0.0) {
                    return Err(CliError::Usage(format!(
                        "hamiltonian.parameters.radius: must be positive (got {})",
                        p.radius
                    )));
                }
                if !p.amplitude.is_finite() {
                    return Err(CliError::Usage(
                        "hamiltonian.parameters.amplitude: must be finite".into(),
                    ));
                }
                let profile = match p.profile.as_str() {
                    "one" => TimeProfile::One,
                    "sinsq" => TimeProfile::SinSq,
                    other => {
                        return Err(CliError::Usage(format!(
                            "hamiltonian.parameters.profile: unknown profile {other:?} \
                             (expected one or sinsq)"
                        )))
                    }
                };
                HamiltonianFamily::Bump {
                    amplitude: p.amplitude,
                    center: p
                        .center
                        .iter()
                        .map(|c| num_complex::Complex64::new(c[0], c[1]))
                        .collect(),
                    radius: p.radius,
                    profile,
                }
            }
            other => {
                return Err(CliError::Usage(format!(
                    "hamiltonian.kind: unknown kind {other:?} (expected zero or bump)"
                )))
            }
        };

        let jfamily = match self.jfamily.kind.as_str() {
            "standard" => AlmostComplexFamily::Standard,
            other => {
                return Err(CliError::Usage(format!(
                    "jfamily.kind: unknown kind {other:?} (expected standard)"
                )))
            }
        };

        let scheme = match self.solver.scheme.as_str() {
            "rk4" => Scheme::RungeKutta4,
            "semi_implicit" => Scheme::SemiImplicit,
            other => {
                return Err(CliError::Usage(format!(
                    "solver.scheme: unknown scheme {other:?} (expected rk4 or semi_implicit)"
                )))
            }
        };
        if !(self.solver.tol.is_finite() && self.solver.tol >= 0.0) {
            return Err(CliError::Usage(format!(
                "solver.tol: must be a nonnegative number (got {})",
                self.solver.tol
            )));
        }

        for f in &self.output.formats {
            if f != "csv" && f != "json" {
                return Err(CliError::Usage(format!(
                    "output.formats: unknown format {f:?} (expected csv or json)"
                )));
            }
        }
        if self.output.snapshot_every == 0 {
            return Err(CliError::Usage(
                "output.snapshot_every: must be at least 1".into(),
            ));
        }

        Ok(Resolved {
            config: self.clone(),
            space: PathSpace::new(TimeGrid::new(self.grid.nt), torus),
            system,
            hamiltonian,
            jfamily,
            flow_params: FlowParams {
                ds: self.grid.ds,
                s_max: self.grid.s_max,
                scheme,
                tol: self.solver.tol,
            },
            seed: self.solver.seed,
        })
    }

    fn build_torus(&self) -> Result<TorusAction, CliError> {
        let n = self.action.a.len();
        if n == 0 {
            return Err(CliError::Usage(
                "action.A: must have at least one row".into(),
            ));
        }
        let k = self.action.a[0].len();
        if self.action.a.iter().any(|row| row.len() != k) {
            return Err(CliError::Usage(
                "action.A: all rows must have the same length".into(),
            ));
        }
        if self.action.tau.len() != k {
            return Err(CliError::Usage(format!(
                "action.tau: expected {k} entries (one per torus factor), got {}",
                self.action.tau.len()
            )));
        }
        if self.action.tau.iter().any(|t| !t.is_finite()) {
            return Err(CliError::Usage("action.tau: entries must be finite".into()));
        }
        let flat: Vec<i64> = self.action.a.iter().flatten().copied().collect();
        TorusAction::new(n, k, flat, self.action.tau.clone())
            .map_err(|e| CliError::Usage(format!("action.A: {e}")))
    }

    /// The output formats as flags `(csv, json)`.
    pub fn wants(&self) -> (bool, bool) {
        let csv = self.output.formats.iter().any(|f| f == "csv");
        let json = self.output.formats.iter().any(|f| f == "json");
        (csv, json)
    }
}

/// Parse a critical-point label of the form `1,+` / `(0,-)` / `-2,+`.
pub fn parse_label(text: &str) -> Result<(i64, i8), CliError> {
    let trimmed = text.trim().trim_start_matches('(').trim_end_matches(')');
    let err = || {
        CliError::Usage(format!(
            "label {text:?}: expected WINDING,SIGN such as 1,+ or (0,-)"
        ))
    };
    let (m_part, s_part) = trimmed.split_once(',').ok_or_else(err)?;
    let winding: i64 = m_part.trim().parse().map_err(|_| err())?;
    let sign = match s_part.trim() {
        "+" | "+1" => 1i8,
        "-" | "-1" => -1i8,
        _ => return Err(err()),
    };
    Ok((winding, sign))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_resolves_with_defaults() {
        let cfg = ProblemConfig::from_json("{}").unwrap();
        let resolved = cfg.resolve().unwrap();
        assert_eq!(resolved.config.grid.nt, 64);
        assert!(resolved.space.torus().is_standard_circle());
        assert_eq!(resolved.seed, 0);
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let err = ProblemConfig::from_json(r#"{"grid": {"nt": 16, "dss": 0.001}}"#).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("dss"), "message should name the key: {msg}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn invariant_violations_name_the_key() {
        let small = ProblemConfig::from_json(r#"{"grid": {"nt": 4}}"#).unwrap();
        let msg = format!("{}", small.resolve().err().unwrap());
        assert!(msg.contains("grid.nt"), "{msg}");

        let big_ds = ProblemConfig::from_json(r#"{"grid": {"nt": 64, "ds": 0.5}}"#).unwrap();
        let msg = format!("{}", big_ds.resolve().err().unwrap());
        assert!(msg.contains("grid.ds"), "{msg}");
        assert!(msg.contains("stability"), "{msg}");

        let bad_kind = ProblemConfig::from_json(r#"{"system": {"kind": "maxwell"}}"#).unwrap();
        let msg = format!("{}", bad_kind.resolve().err().unwrap());
        assert!(msg.contains("system.kind"), "{msg}");
    }

    #[test]
    fn bump_center_length_is_checked_against_the_action() {
        let cfg = ProblemConfig::from_json(
            r#"{"action": {"A": [[1], [1]], "tau": [-0.5]},
                "hamiltonian": {"kind": "bump", "parameters": {"center": [[0.1, 0.0]]}}}"#,
        )
        .unwrap();
        let msg = format!("{}", cfg.resolve().err().unwrap());
        assert!(msg.contains("hamiltonian.parameters.center"), "{msg}");
    }

    #[test]
    fn labels_parse_in_both_spellings() {
        assert_eq!(parse_label("1,+").unwrap(), (1, 1));
        assert_eq!(parse_label("(0,-)").unwrap(), (0, -1));
        assert_eq!(parse_label(" -2 , + ").unwrap(), (-2, 1));
        assert!(parse_label("one,+").is_err());
        assert!(parse_label("1").is_err());
    }

    #[test]
    fn resolved_config_round_trips_through_json() {
        let cfg = ProblemConfig::from_json(r#"{"solver": {"seed": 9}}"#).unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        let back = ProblemConfig::from_json(&text).unwrap();
        assert_eq!(back, cfg);
    }
}
