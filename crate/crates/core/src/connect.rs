//! Connecting orbits between critical points via strip-energy descent.
//!
//! A connecting orbit from one critical point to another is found by
//! minimizing the strip energy
//! `E[u] = ∫ (1/2)||du/ds||² + (1/2)||G(u)||² ds`
//! over discrete paths of states pinned to the two critical points.  The
//! energy dominates the action drop between the endpoints, with equality
//! exactly on negative-gradient trajectories, so a minimizer whose energy
//! matches the action drop is numerical evidence of a connecting orbit.
//! Restricted to the standard circle data with the flat structure, where
//! the action gradient `G` has an explicit self-adjoint linearization.

use crate::error::{Error, Result};
use crate::families::{AlmostComplexFamily, HamiltonianFamily};
use crate::loopspace::PathSpace;
use crate::path::{PathState, PathTangent};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Search parameters for the strip-energy minimization.
#[derive(Debug, Clone, Copy)]
pub struct ConnectParams {
    /// Number of strip intervals in the flow parameter.
    pub ns: usize,
    /// Length of the flow-parameter interval.
    pub s_len: f64,
    /// Iteration budget for the descent.
    pub max_iters: usize,
    /// Stop when the energy gradient norm falls below this.
    pub grad_tol: f64,
    /// Stop as soon as the energy falls below this, if set.
    pub target: Option<f64>,
    /// Seed for the symmetry-breaking noise in the initial strip.
    pub seed: u64,
    /// Amplitude of that noise.
    pub noise: f64,
}

impl Default for ConnectParams {
    fn default() -> Self {
        ConnectParams {
            ns: 240,
            s_len: 12.0,
            max_iters: 4000,
            grad_tol: 1e-6,
            target: None,
            seed: 7,
            noise: 1e-2,
        }
    }
}

/// Outcome of the minimization.
#[derive(Debug, Clone)]
pub struct FlowLineResult {
    /// The strip, endpoint states included.
    pub states: Vec<PathState>,
    pub energy: f64,
    /// Euclidean norm of the final energy gradient.
    pub grad_norm: f64,
    pub iterations: usize,
    /// Whether a stopping criterion (target or gradient tolerance) was met.
    pub converged: bool,
    /// Action difference between the pinned endpoints.
    pub action_drop: f64,
}

/// Discrete strip-energy functional between pinned endpoint states.
pub struct StripProblem<'a> {
    space: &'a PathSpace,
    ds: f64,
    ns: usize,
}

impl<'a> StripProblem<'a> {
    pub fn new(space: &'a PathSpace, ns: usize, s_len: f64) -> Result<Self> {
        if !space.torus().is_standard_circle() {
            return Err(Error::NotStandardCircle);
        }
        if ns < 2 || !(s_len.is_finite() && s_len > 0.0) {
            return Err(Error::InvalidParameter {
                what: "strip shape",
                why: format!("ns = {ns}, s_len = {s_len}"),
            });
        }
        Ok(StripProblem {
            space,
            ds: s_len / ns as f64,
            ns,
        })
    }

    pub fn ds(&self) -> f64 {
        self.ds
    }

    fn grad_action(&self, state: &PathState) -> PathTangent {
        self.space
            .action_gradient(
                state,
                &HamiltonianFamily::Zero,
                &AlmostComplexFamily::Standard,
                false,
            )
            .expect("state shape was checked on entry")
    }

    /// Exact linearization of the action gradient at `state` along `dir`
    /// (standard circle, flat structure, no Hamiltonian).  The action
    /// Hessian is self-adjoint, so applying it to the gradient itself
    /// yields the metric gradient of `(1/2)||G||²`.
    fn hessian_apply(&self, state: &PathState, dir: &PathTangent) -> PathTangent {
        let grid = self.space.grid();
        let rows = grid.nodes();
        let w_series: Vec<Complex64> = (0..rows).map(|i| dir.vhat[i][0]).collect();
        let dw = grid.deriv_reflected(&w_series);
        let mut out = PathTangent::zero(grid.nt(), 1, 1);
        for i in 0..rows {
            let v = state.v_row(i)[0];
            let eta = state.eta_row(i)[0];
            let w = dir.vhat[i][0];
            let e = dir.etahat[i][0];
            let mut dv = Complex64::new(0.0, 1.0) * dw[i] - eta * w - e * v;
            if i == 0 || i == rows - 1 {
                dv.im = 0.0;
            }
            out.vhat[i][0] = dv;
            out.etahat[i][0] = -(v.conj() * w).re;
        }
        out
    }

    /// Quadrature weight of time node `i` (trapezoid rule).
    fn t_weight(&self, i: usize) -> f64 {
        let grid = self.space.grid();
        let dt = grid.dt();
        if i == 0 || i == grid.nt() {
            0.5 * dt
        } else {
            dt
        }
    }

    fn w_norm_sq(&self, tangent: &PathTangent) -> f64 {
        let rows = self.space.grid().nodes();
        let mut s = 0.0;
        for i in 0..rows {
            let w = self.t_weight(i);
            s += w * (tangent.vhat[i][0].norm_sqr() + tangent.etahat[i][0].powi(2));
        }
        s
    }

    fn difference(a: &PathState, b: &PathState) -> PathTangent {
        let rows = a.v().len();
        let mut d = PathTangent::zero(rows - 1, 1, 1);
        for i in 0..rows {
            d.vhat[i][0] = b.v_row(i)[0] - a.v_row(i)[0];
            d.etahat[i][0] = b.eta_row(i)[0] - a.eta_row(i)[0];
        }
        d
    }

    /// Strip energy of a full configuration (endpoints included).
    pub fn energy(&self, states: &[PathState]) -> f64 {
        let mut kinetic = 0.0;
        for p in 0..self.ns {
            let d = Self::difference(&states[p], &states[p + 1]);
            kinetic += self.w_norm_sq(&d);
        }
        kinetic /= 2.0 * self.ds;
        let mut potential = 0.0;
        for (p, state) in states.iter().enumerate() {
            let c = if p == 0 || p == self.ns { 0.5 } else { 1.0 };
            let g = self.grad_action(state);
            potential += c * 0.5 * self.w_norm_sq(&g);
        }
        kinetic + self.ds * potential
    }

    /// Coordinate gradient of the energy with respect to the interior
    /// states; entries 0 and `ns` are zero (pinned).
    pub fn energy_gradient(&self, states: &[PathState]) -> Vec<PathTangent> {
        let grid = self.space.grid();
        let rows = grid.nodes();
        let nt = grid.nt();
        let mut grads = vec![PathTangent::zero(nt, 1, 1); self.ns + 1];
        for p in 1..self.ns {
            let g = self.grad_action(&states[p]);
            let hg = self.hessian_apply(&states[p], &g);
            let mut out = PathTangent::zero(nt, 1, 1);
            for i in 0..rows {
                let w = self.t_weight(i);
                let kin_v = (2.0 * states[p].v_row(i)[0]
                    - states[p - 1].v_row(i)[0]
                    - states[p + 1].v_row(i)[0])
                    / self.ds;
                let kin_e = (2.0 * states[p].eta_row(i)[0]
                    - states[p - 1].eta_row(i)[0]
                    - states[p + 1].eta_row(i)[0])
                    / self.ds;
                let mut gv = w * (kin_v + self.ds * hg.vhat[i][0]);
                if i == 0 || i == rows - 1 {
                    gv.im = 0.0;
                }
                out.vhat[i][0] = gv;
                out.etahat[i][0] = w * (kin_e + self.ds * hg.etahat[i][0]);
            }
            grads[p] = out;
        }
        grads
    }
}

fn dot(a: &[PathTangent], b: &[PathTangent]) -> f64 {
    let mut s = 0.0;
    for (ta, tb) in a.iter().zip(b) {
        for (ra, rb) in ta.vhat.iter().zip(&tb.vhat) {
            for (x, y) in ra.iter().zip(rb) {
                s += x.re * y.re + x.im * y.im;
            }
        }
        for (ra, rb) in ta.etahat.iter().zip(&tb.etahat) {
            for (x, y) in ra.iter().zip(rb) {
                s += x * y;
            }
        }
    }
    s
}

fn advance(states: &[PathState], dir: &[PathTangent], alpha: f64) -> Result<Vec<PathState>> {
    states
        .iter()
        .zip(dir)
        .map(|(u, d)| u.offset(d, alpha))
        .collect()
}

/// Initial strip: hyperbolic-tangent interpolation between the endpoint
/// states, with small seeded noise on the interior to break symmetry.
fn initial_strip(
    space: &PathSpace,
    from: &PathState,
    to: &PathState,
    params: &ConnectParams,
) -> Vec<PathState> {
    let grid = space.grid();
    let rows = grid.nodes();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut states = Vec::with_capacity(params.ns + 1);
    for p in 0..=params.ns {
        if p == 0 {
            states.push(from.clone());
            continue;
        }
        if p == params.ns {
            states.push(to.clone());
            continue;
        }
        let s = p as f64 / params.ns as f64;
        let theta = 0.5 * (1.0 + (4.0 * (2.0 * s - 1.0)).tanh());
        let mut v = Vec::with_capacity(rows);
        let mut eta = Vec::with_capacity(rows);
        let interior = true;
        for i in 0..rows {
            let mut z =
                (1.0 - theta) * from.v_row(i)[0] + theta * to.v_row(i)[0];
            if interior {
                let bump = (std::f64::consts::PI * grid.node(i)).sin();
                z += Complex64::new(
                    params.noise * (rng.gen::<f64>() - 0.5) * bump,
                    params.noise * (rng.gen::<f64>() - 0.5) * bump,
                );
            }
            if i == 0 || i == rows - 1 {
                z.im = 0.0;
            }
            v.push(vec![z]);
            eta.push(vec![
                (1.0 - theta) * from.eta_row(i)[0] + theta * to.eta_row(i)[0],
            ]);
        }
        states.push(PathState::new(v, eta).expect("interpolated strip is admissible"));
    }
    states
}

/// Minimize the strip energy between two labeled critical points with
/// nonlinear conjugate gradients (Polak-Ribiere, Armijo backtracking).
pub fn find_flow_line(
    space: &PathSpace,
    from: (i64, i8),
    to: (i64, i8),
    params: &ConnectParams,
) -> Result<FlowLineResult> {
    let problem = StripProblem::new(space, params.ns, params.s_len)?;
    let from_state = space.critical_representative(from.0, from.1)?;
    let to_state = space.critical_representative(to.0, to.1)?;
    let action_drop = space.action_value(&from_state, &HamiltonianFamily::Zero)?
        - space.action_value(&to_state, &HamiltonianFamily::Zero)?;
    let mut states = initial_strip(space, &from_state, &to_state, params);
    let mut energy = problem.energy(&states);
    let mut grad = problem.energy_gradient(&states);
    let mut gg = dot(&grad, &grad);
    let mut dir: Vec<PathTangent> = grad
        .iter()
        .map(|g| {
            let mut d = g.clone();
            d.scale(-1.0);
            d
        })
        .collect();
    let mut alpha: f64 = 1.0;
    let mut iterations = 0;
    let mut converged = false;
    for iter in 0..params.max_iters {
        iterations = iter + 1;
        let slope = dot(&grad, &dir);
        if slope >= 0.0 {
            // stale conjugate direction; restart along steepest descent
            for (d, g) in dir.iter_mut().zip(&grad) {
                *d = g.clone();
                d.scale(-1.0);
            }
        }
        let slope = dot(&grad, &dir);
        let mut step = alpha.max(1e-12);
        let mut accepted = false;
        for _ in 0..40 {
            match advance(&states, &dir, step) {
                Ok(trial) => {
                    let e_trial = problem.energy(&trial);
                    if e_trial <= energy + 1e-4 * step * slope {
                        states = trial;
                        energy = e_trial;
                        accepted = true;
                        break;
                    }
                }
                Err(_) => {}
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        alpha = step * 2.0;
        let grad_new = problem.energy_gradient(&states);
        let gg_new = dot(&grad_new, &grad_new);
        if params.target.is_some_and(|target| energy <= target)
            || gg_new.sqrt() <= params.grad_tol
        {
            gg = gg_new;
            converged = true;
            break;
        }
        let mut num = 0.0;
        for (gn, go) in grad_new.iter().zip(&grad) {
            let diff = gn.add_scaled(go, -1.0);
            num += dot(std::slice::from_ref(gn), std::slice::from_ref(&diff));
        }
        let beta = (num / gg).max(0.0);
        for (d, gn) in dir.iter_mut().zip(&grad_new) {
            let mut nd = gn.clone();
            nd.scale(-1.0);
            *d = nd.add_scaled(d, beta);
        }
        grad = grad_new;
        gg = gg_new;
    }
    Ok(FlowLineResult {
        states,
        energy,
        grad_norm: gg.sqrt(),
        iterations,
        converged,
        action_drop,
    })
}
