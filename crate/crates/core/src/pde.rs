//! Negative gradient flow of the action and its named variants.
//!
//! Three right-hand sides share one integrator: the generalized flow (any
//! compatible structure, any Hamiltonian, optional doubled level shift),
//! the classical first-order system (standard structure, no Hamiltonian),
//! and its scalar-warped variant whose `eta`-equation is multiplied by
//! `|v|² + epsilon`.  Time stepping is classical fourth-order Runge-Kutta
//! or a semi-implicit splitting; both guard against stepping past the
//! linear stability limit of the stiffest spectral mode.

use crate::error::{Error, Result};
use crate::families::{AlmostComplexFamily, HamiltonianFamily};
use crate::loopspace::PathSpace;
use crate::path::{PathState, PathTangent};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Which first-order system to integrate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PdeSystem {
    /// Negative gradient flow of the action under the supplied Hamiltonian
    /// and almost complex family.
    GeneralizedHiggs {
        /// Apply the moment-map level shift twice in the `eta`-equation.
        tau_double_shift: bool,
    },
    /// The unperturbed system with the standard structure; the supplied
    /// Hamiltonian and family are ignored.
    ClassicalVortex,
    /// Like the classical system, but the `eta`-equation carries the
    /// scalar factor `sum_j |v_j|^2 + epsilon`.
    ChernSimons { epsilon: f64 },
}

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Classical fourth-order Runge-Kutta.
    RungeKutta4,
    /// Explicit `v`-update followed by an `eta`-update evaluated at the new
    /// `v` (first order).
    SemiImplicit,
}

/// Flow integration parameters.
#[derive(Debug, Clone, Copy)]
pub struct FlowParams {
    /// Flow-parameter step.
    pub ds: f64,
    /// Total flow time to integrate.
    pub s_max: f64,
    pub scheme: Scheme,
    /// Stop early once the gradient norm falls below this; `0` disables.
    pub tol: f64,
}

/// Result of a flow run.
#[derive(Debug, Clone)]
pub struct FlowOutcome {
    pub final_state: PathState,
    /// Steps actually taken.
    pub steps: usize,
    /// Flow parameter reached.
    pub s_end: f64,
    /// Whether the gradient tolerance was met.
    pub converged: bool,
    /// Accumulated squared flow speed `sum ds ||du/ds||²`, the energy
    /// identity partner of the action drop.
    pub energy_accum: f64,
    /// `(s, gradient norm)` after every step, starting with `s = 0`.
    pub residual_log: Vec<(f64, f64)>,
    /// Action value after every step, aligned with `residual_log`.
    pub action_log: Vec<f64>,
    /// Labeled critical point the flow ended near, when identifiable.
    pub label: Option<(i64, i8)>,
}

/// Largest step the integrator accepts for a grid with `nt` intervals and
/// the given sup of the `eta`-equation warp factor.
///
/// The stiffest linear mode of the spectral derivative has frequency close
/// to `pi nt`; the classical Runge-Kutta stability interval on the real
/// axis ends near `2.785`, and a `0.8` safety factor covers the nonlinear
/// terms at moderate amplitude.
pub fn stability_bound(nt: usize, warp_sup: f64) -> f64 {
    0.8 * 2.785 / (PI * nt as f64 * warp_sup.max(1.0))
}

/// Sup over nodes of the scalar warp factor of a system at a state.
fn warp_sup(system: &PdeSystem, state: &PathState) -> f64 {
    match system {
        PdeSystem::ChernSimons { epsilon } => {
            let mut sup = 0.0f64;
            for i in 0..=state.nt() {
                let s: f64 = state.v_row(i).iter().map(|z| z.norm_sqr()).sum();
                sup = sup.max(s + epsilon);
            }
            sup
        }
        _ => 1.0,
    }
}

/// Flow direction (negative gradient) of a system at a state.
pub fn flow_rhs(
    space: &PathSpace,
    system: &PdeSystem,
    h: &HamiltonianFamily,
    jf: &AlmostComplexFamily,
    state: &PathState,
) -> Result<PathTangent> {
    let mut g = match system {
        PdeSystem::GeneralizedHiggs { tau_double_shift } => {
            space.action_gradient(state, h, jf, *tau_double_shift)?
        }
        PdeSystem::ClassicalVortex => space.action_gradient(
            state,
            &HamiltonianFamily::Zero,
            &AlmostComplexFamily::Standard,
            false,
        )?,
        PdeSystem::ChernSimons { epsilon } => {
            let mut g = space.action_gradient(
                state,
                &HamiltonianFamily::Zero,
                &AlmostComplexFamily::Standard,
                false,
            )?;
            for i in 0..g.etahat.len() {
                let warp: f64 =
                    state.v_row(i).iter().map(|z| z.norm_sqr()).sum::<f64>() + epsilon;
                for x in g.etahat[i].iter_mut() {
                    *x *= warp;
                }
            }
            g
        }
    };
    g.scale(-1.0);
    Ok(g)
}

/// The structure and Hamiltonian a system actually differentiates with,
/// for measuring gradient norms consistently.
fn effective_families<'a>(
    system: &PdeSystem,
    h: &'a HamiltonianFamily,
    jf: &'a AlmostComplexFamily,
) -> (&'a HamiltonianFamily, &'a AlmostComplexFamily) {
    match system {
        PdeSystem::GeneralizedHiggs { .. } => (h, jf),
        _ => (&HamiltonianFamily::Zero, &AlmostComplexFamily::Standard),
    }
}

/// Advance one step.  Checks the stability bound before moving and the
/// state magnitude after.
pub fn flow_step(
    space: &PathSpace,
    system: &PdeSystem,
    h: &HamiltonianFamily,
    jf: &AlmostComplexFamily,
    state: &PathState,
    ds: f64,
    scheme: Scheme,
) -> Result<PathState> {
    let nt = space.grid().nt();
    let bound = stability_bound(nt, warp_sup(system, state));
    if !(ds.is_finite() && ds > 0.0) || ds > bound {
        return Err(Error::UnstableStep { ds, bound, nt });
    }
    let next = match scheme {
        Scheme::RungeKutta4 => {
            let k1 = flow_rhs(space, system, h, jf, state)?;
            let s2 = state.offset(&k1, 0.5 * ds)?;
            let k2 = flow_rhs(space, system, h, jf, &s2)?;
            let s3 = state.offset(&k2, 0.5 * ds)?;
            let k3 = flow_rhs(space, system, h, jf, &s3)?;
            let s4 = state.offset(&k3, ds)?;
            let k4 = flow_rhs(space, system, h, jf, &s4)?;
            let mut incr = k1.add_scaled(&k4, 1.0);
            incr = incr.add_scaled(&k2, 2.0);
            incr = incr.add_scaled(&k3, 2.0);
            state.offset(&incr, ds / 6.0)?
        }
        Scheme::SemiImplicit => {
            let k = flow_rhs(space, system, h, jf, state)?;
            let mut vk = k.clone();
            for row in vk.etahat.iter_mut() {
                for x in row.iter_mut() {
                    *x = 0.0;
                }
            }
            let moved_v = state.offset(&vk, ds)?;
            let k_eta = flow_rhs(space, system, h, jf, &moved_v)?;
            let mut ek = k_eta;
            for row in ek.vhat.iter_mut() {
                for x in row.iter_mut() {
                    *x = Complex64::new(0.0, 0.0);
                }
            }
            moved_v.offset(&ek, ds)?
        }
    };
    let norm = state_sup(&next);
    if !norm.is_finite() || norm > 1e6 {
        return Err(Error::Instability {
            norm,
            bound: 1e6,
            s: ds,
        });
    }
    Ok(next)
}

fn state_sup(state: &PathState) -> f64 {
    let mut sup = 0.0f64;
    for i in 0..=state.nt() {
        for z in state.v_row(i) {
            sup = sup.max(z.norm());
        }
        for e in state.eta_row(i) {
            sup = sup.max(e.abs());
        }
    }
    sup
}

/// Integrate the flow from a start state.
///
/// Records the gradient norm and action after every step, accumulates the
/// squared flow speed with the metric evaluated at the midpoint of each
/// step, and on early convergence tries to label the limiting critical
/// point (standard circle data only).
pub fn run_flow(
    space: &PathSpace,
    system: &PdeSystem,
    h: &HamiltonianFamily,
    jf: &AlmostComplexFamily,
    start: &PathState,
    params: &FlowParams,
) -> Result<FlowOutcome> {
    space.check_state(start)?;
    if !(params.ds.is_finite() && params.ds > 0.0) {
        return Err(Error::InvalidParameter {
            what: "flow step",
            why: format!("{}", params.ds),
        });
    }
    if !(params.s_max.is_finite() && params.s_max >= params.ds) {
        return Err(Error::InvalidParameter {
            what: "flow horizon",
            why: format!("{}", params.s_max),
        });
    }
    let (he, je) = effective_families(system, h, jf);
    let steps = (params.s_max / params.ds).round().max(1.0) as usize;
    let grid = space.grid();
    let rows = grid.nodes();
    let mut state = start.clone();
    let mut energy = 0.0;
    let mut residual_log = Vec::with_capacity(steps + 1);
    let mut action_log = Vec::with_capacity(steps + 1);
    let grad0 = space.action_gradient(&state, he, je, false)?;
    residual_log.push((0.0, space.norm(&state, &grad0, je)));
    action_log.push(space.action_value(&state, he)?);
    let mut converged = false;
    let mut taken = 0usize;
    for step in 1..=steps {
        let next = flow_step(space, system, h, jf, &state, params.ds, params.scheme)?;
        // midpoint state for the speed metric
        let mid_v: Vec<Vec<Complex64>> = (0..rows)
            .map(|i| {
                state.v_row(i)
                    .iter()
                    .zip(next.v_row(i))
                    .map(|(a, b)| 0.5 * (a + b))
                    .collect()
            })
            .collect();
        let mut speed_sq = vec![0.0; rows];
        for (i, s) in speed_sq.iter_mut().enumerate() {
            let t = grid.node(i);
            let dv: Vec<Complex64> = state.v_row(i)
                .iter()
                .zip(next.v_row(i))
                .map(|(a, b)| (b - a) / params.ds)
                .collect();
            let de: f64 = state.eta_row(i)
                .iter()
                .zip(next.eta_row(i))
                .map(|(a, b)| ((b - a) / params.ds).powi(2))
                .sum();
            *s = je.metric(t, &mid_v[i], &dv, &dv) + de;
        }
        energy += params.ds * grid.trapz(&speed_sq);
        state = next;
        taken = step;
        let grad = space.action_gradient(&state, he, je, false)?;
        let gnorm = space.norm(&state, &grad, je);
        residual_log.push((step as f64 * params.ds, gnorm));
        action_log.push(space.action_value(&state, he)?);
        if params.tol > 0.0 && gnorm <= params.tol {
            converged = true;
            break;
        }
    }
    let label = if space.torus().is_standard_circle() {
        space.identify_vortex_label(&state, 1e-4).ok()
    } else {
        None
    };
    Ok(FlowOutcome {
        final_state: state,
        steps: taken,
        s_end: taken as f64 * params.ds,
        converged,
        energy_accum: energy,
        residual_log,
        action_log,
        label,
    })
}
