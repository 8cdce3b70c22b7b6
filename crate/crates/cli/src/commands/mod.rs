//! The six operations behind the command-line verbs.  Each takes a
//! parsed configuration plus its own arguments, writes artifacts into a
//! run directory under the output base, and returns the summary it wrote
//! so tests can inspect results without re-reading files.

mod audit;
mod bvp;
mod check_h;
mod critical;
mod flow;
mod morse;

pub use audit::{cmd_audit, AuditTarget};
pub use bvp::{cmd_bvp, BvpArgs};
pub use check_h::cmd_check_h;
pub use critical::cmd_critical;
pub use flow::{cmd_flow, FlowArgs};
pub use morse::{cmd_morse, MorseArgs};
