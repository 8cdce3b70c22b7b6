//! Command-line driver for the vortex path-space laboratory.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use vortexlab_cli::commands::{
    cmd_audit, cmd_bvp, cmd_check_h, cmd_critical, cmd_flow, cmd_morse, AuditTarget, BvpArgs,
    FlowArgs, MorseArgs,
};
use vortexlab_cli::config::{parse_label, ProblemConfig};
use vortexlab_cli::CliError;

#[derive(Parser)]
#[command(
    name = "vortexlab",
    about = "Gradient-flow laboratory for abelian vortex equations on path space",
    version
)]
struct Cli {
    /// Path to a JSON problem configuration
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output base directory (overrides output.dir from the configuration)
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Random seed (overrides solver.seed from the configuration)
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Suppress progress output on stdout
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate critical loops and their action values over a winding range
    Critical {
        /// Smallest winding number to include
        #[arg(long, default_value_t = -2, allow_negative_numbers = true)]
        m_min: i64,
        /// Largest winding number to include
        #[arg(long, default_value_t = 2, allow_negative_numbers = true)]
        m_max: i64,
    },
    /// Integrate the downward gradient flow from an initial path
    Flow {
        /// Initial condition: a critical label like "1,+" or a JSON state file
        #[arg(long, value_name = "LABEL|PATH", allow_hyphen_values = true)]
        initial: Option<String>,
        /// Amplitude of a random tangent perturbation of the initial path
        #[arg(long, default_value_t = 0.0)]
        perturb: f64,
        /// Resume from a snapshot file instead of starting fresh
        #[arg(long, value_name = "PATH", conflicts_with = "initial")]
        resume: Option<PathBuf>,
    },
    /// Solve the two-point boundary value problem for connecting flow lines
    Bvp {
        /// Label of the departure critical loop, e.g. "1,+"
        #[arg(long, default_value = "1,+", allow_hyphen_values = true)]
        from: String,
        /// Label of an arrival critical loop; repeat for several targets
        #[arg(long, required = true, allow_hyphen_values = true)]
        to: Vec<String>,
        /// Restarts per target with distinct random seeds
        #[arg(long, default_value_t = 1)]
        seeds: usize,
        /// Interior flow-time samples of the connecting strip
        #[arg(long, default_value_t = 160)]
        ns: usize,
        /// Half-length of the flow-time interval
        #[arg(long, default_value_t = 12.0)]
        s_len: f64,
        /// Iteration budget per restart
        #[arg(long, default_value_t = 20000)]
        max_iters: usize,
    },
    /// Build the sphere flow complex, its free involution, and the quotient
    Morse {
        /// Three distinct quadratic coefficients, ascending
        #[arg(value_name = "L", num_args = 3, allow_negative_numbers = true)]
        lambda: Vec<f64>,
        /// Double the shooting resolution used to count connecting lines
        #[arg(long)]
        doubled_shooting: bool,
    },
    /// Check the energy identities of a finished run directory
    Audit {
        /// Run directory to audit
        #[arg(value_name = "DIR", required_unless_present = "demo")]
        dir: Option<PathBuf>,
        /// Generate and audit the double-well heteroclinic instead
        #[arg(long, conflicts_with = "dir")]
        demo: bool,
    },
    /// Probe the moment-map hypotheses: zero level, freeness, properness
    CheckH {
        /// Random sample count for the properness probe
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Radius of the sampling ball
        #[arg(long, default_value_t = 2.0)]
        radius: f64,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = match &cli.config {
        Some(path) => ProblemConfig::from_file(path)?,
        None => ProblemConfig::from_json("{}")?,
    };
    if let Some(seed) = cli.seed {
        config.solver.seed = seed;
    }
    let out_base = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.output.dir));
    let quiet = cli.quiet;

    match &cli.command {
        Command::Critical { m_min, m_max } => {
            cmd_critical(&config, *m_min, *m_max, &out_base, quiet)?;
        }
        Command::Flow {
            initial,
            perturb,
            resume,
        } => {
            let args = FlowArgs {
                initial: initial.clone(),
                perturb: *perturb,
                resume: resume.clone(),
            };
            cmd_flow(&config, &args, &out_base, quiet)?;
        }
        Command::Bvp {
            from,
            to,
            seeds,
            ns,
            s_len,
            max_iters,
        } => {
            let args = BvpArgs {
                from: parse_label(from)?,
                to: to
                    .iter()
                    .map(|label| parse_label(label))
                    .collect::<Result<Vec<_>, _>>()?,
                seeds: *seeds,
                ns: *ns,
                s_len: *s_len,
                max_iters: *max_iters,
            };
            cmd_bvp(&config, &args, &out_base, quiet)?;
        }
        Command::Morse {
            lambda,
            doubled_shooting,
        } => {
            let args = MorseArgs {
                lambda: [lambda[0], lambda[1], lambda[2]],
                doubled_shooting: *doubled_shooting,
            };
            cmd_morse(&config, &args, &out_base, quiet)?;
        }
        Command::Audit { dir, demo } => {
            let target = if *demo {
                AuditTarget::DemoDoubleWell
            } else {
                AuditTarget::Dir(dir.clone().expect("clap enforces dir without --demo"))
            };
            cmd_audit(&config, &target, &out_base, quiet)?;
        }
        Command::CheckH { samples, radius } => {
            cmd_check_h(&config, *samples, *radius, &out_base, quiet)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
