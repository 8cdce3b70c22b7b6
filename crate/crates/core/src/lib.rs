//! Numerical core for gauged vortex moduli: torus actions on `C^n`, twisted
//! loop spaces with their action functional, gauge fixing, gradient-flow
//! solvers, and mod-2 Morse chain complexes.

pub mod connect;
pub mod coulomb;
pub mod error;
pub mod families;
pub mod finite;
pub mod gauge;
pub mod grid;
pub mod linalg;
pub mod loopspace;
pub mod morse;
pub mod path;
pub mod pde;
pub mod sample;
pub mod snf;
pub mod torus;

pub use connect::{find_flow_line, ConnectParams, FlowLineResult, StripProblem};
pub use coulomb::{
    compute_coulomb_data, coulomb_flow_residual, coulomb_gradient, coulomb_metric_pair,
    coulomb_potential, coulomb_project, kappa_bound_constant, CoulombData,
};
pub use error::{Error, Result};
pub use families::{AlmostComplexFamily, HamiltonianFamily, TimeProfile};
pub use finite::{
    bogomolnyi_audit, euler_lagrange_residual, heteroclinic_between, integrate_flow_line,
    BogomolnyiAudit, MorseProblem, Trajectory,
};
pub use gauge::{gauge_equivalent, GaugeDecomposition, GaugeTransform};
pub use grid::TimeGrid;
pub use loopspace::{LabeledCritical, PathSpace};
pub use morse::{
    antipodal_generator_action, principle_check, quotient_complex, sphere_morse_complex,
    ChainComplexGf2, FreeGroupActionOnGenerators, Gf2Matrix, QuotientPrinciple, ShootingOptions,
};
pub use path::{PathState, PathTangent};
pub use pde::{
    flow_rhs, flow_step, run_flow, stability_bound, FlowOutcome, FlowParams, PdeSystem, Scheme,
};
pub use sample::{sample_path, sample_tangent};
pub use torus::{GroupElement, HypothesisReport, TorusAction};
