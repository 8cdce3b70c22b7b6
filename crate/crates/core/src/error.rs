//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide error enumeration.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A slice or matrix had the wrong length for the ambient dimensions.
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// An integer matrix did not have full column rank where it must.
    #[error("integer matrix has rank {rank} < {needed}; the isotropy group is not finite")]
    RankDeficient { rank: usize, needed: usize },

    /// Integer arithmetic overflowed during an exact lattice computation.
    #[error("integer overflow in exact lattice arithmetic")]
    IntegerOverflow,

    /// A path violated the real-boundary condition beyond tolerance.
    #[error("boundary condition violated: |Im v| = {worst:e} at a t-endpoint (tolerance {tol:e})")]
    BoundaryViolation { worst: f64, tol: f64 },

    /// A gauge transform's endpoint values do not lie in the isotropy group.
    #[error("gauge endpoint phase {value} is not an isotropy angle (residual {residual:e})")]
    GaugeEndpoint { value: f64, residual: f64 },

    /// Non-finite number encountered in input or during evolution.
    #[error("non-finite value encountered in {what}")]
    NonFinite { what: &'static str },

    /// An operation that requires a Coulomb-gauge path received a varying eta.
    #[error("eta is not constant in t (spread {spread:e}); apply the Coulomb projection first")]
    NonConstantEta { spread: f64 },

    /// Two discretised objects live on incompatible grids.
    #[error("grid mismatch: {what}")]
    GridMismatch { what: &'static str },

    /// An operation specific to the standard circle problem was invoked elsewhere.
    #[error("operation requires the standard circle data (n = k = 1, A = [1], tau = -1/2)")]
    NotStandardCircle,

    /// The explicit time stepper left the configured norm bound.
    #[error("flow diverged: state norm {norm:e} exceeded bound {bound:e} at s = {s}")]
    Instability { norm: f64, bound: f64, s: f64 },

    /// Step size violates the documented stability bound.
    #[error("step size {ds:e} exceeds the stability bound {bound:e} for nt = {nt}")]
    UnstableStep { ds: f64, bound: f64, nt: usize },

    /// A search (connecting orbit, shooting, feasibility) did not succeed.
    #[error("search failed: {what} (best residual {best:e})")]
    SearchFailed { what: &'static str, best: f64 },

    /// A linear system was singular or badly scaled beyond use.
    #[error("linear solve failed: {what}")]
    SingularSystem { what: &'static str },

    /// Invalid scalar parameter.
    #[error("invalid parameter {what}: {why}")]
    InvalidParameter { what: &'static str, why: String },

    /// Critical point structure degenerate (repeated eigenvalues etc.).
    #[error("degenerate Morse data: {why}")]
    DegenerateMorse { why: String },

    /// A claimed free group action has a fixed generator.
    #[error("group action is not free: element {element} fixes generator {generator}")]
    NonFreeAction { element: usize, generator: String },

    /// A group action fails to commute with the boundary operator.
    #[error("group action does not commute with the boundary operator at element {element}")]
    NonEquivariantAction { element: usize },

    /// A chain complex failed the boundary-squared check.
    #[error("boundary of boundary is nonzero between gradings {upper} and {lower}")]
    BoundarySquared { upper: usize, lower: usize },
}

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
