//! The discretized path space and its action functional.
//!
//! States are paths `(v, eta)` subject to the real boundary condition on
//! `v`.  The action combines a symplectic first-order term, a Hamiltonian
//! perturbation, and the moment-map pairing with `eta`; its negative
//! gradient flow is the parabolic system integrated by the flow module.
//!
//! The time derivative inside both the action and its gradient is the
//! reflection-doubled spectral derivative.  Summation by parts on the
//! doubled circle is exact for that operator, so the discrete gradient
//! returned here is the exact derivative of the discrete action along
//! admissible tangents — finite-difference checks close to near machine
//! precision rather than to the truncation order of the grid.

use crate::error::{Error, Result};
use crate::families::{AlmostComplexFamily, HamiltonianFamily};
use crate::grid::TimeGrid;
use crate::path::{PathState, PathTangent};
use crate::torus::TorusAction;
use num_complex::Complex64;
use std::f64::consts::PI;

/// A critical point of the unperturbed circle action, labeled by winding
/// number and boundary sign.
#[derive(Debug, Clone)]
pub struct LabeledCritical {
    /// Half-winding count `m`: the path is `σ e^{-i π m t}`.
    pub winding: i64,
    /// Boundary sign `σ = ±1`.
    pub sign: i8,
    /// The discretized representative.
    pub state: PathState,
    /// Action value of the representative (`π m / 2` up to roundoff).
    pub action: f64,
}

/// The path space over a fixed grid and torus action.
#[derive(Debug, Clone)]
pub struct PathSpace {
    grid: TimeGrid,
    torus: TorusAction,
}

impl PathSpace {
    pub fn new(grid: TimeGrid, torus: TorusAction) -> Self {
        PathSpace { grid, torus }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn torus(&self) -> &TorusAction {
        &self.torus
    }

    /// Confirm a state has this space's shape.
    pub fn check_state(&self, state: &PathState) -> Result<()> {
        if state.nt() != self.grid.nt() {
            return Err(Error::GridMismatch {
                what: "path rows versus grid",
            });
        }
        if state.n() != self.torus.n() {
            return Err(Error::DimensionMismatch {
                what: "path target dimension",
                expected: self.torus.n(),
                got: state.n(),
            });
        }
        if state.k() != self.torus.k() {
            return Err(Error::DimensionMismatch {
                what: "path group dimension",
                expected: self.torus.k(),
                got: state.k(),
            });
        }
        Ok(())
    }

    /// Spectral time derivative of every `v`-component, as node rows.
    pub fn velocity_rows(&self, state: &PathState) -> Vec<Vec<Complex64>> {
        let n = state.n();
        let rows = self.grid.nodes();
        let mut out = vec![vec![Complex64::new(0.0, 0.0); n]; rows];
        for j in 0..n {
            let d = self.grid.deriv_reflected(&state.v_component(j));
            for (i, row) in out.iter_mut().enumerate() {
                row[j] = d[i];
            }
        }
        out
    }

    /// Value of the action functional.
    pub fn action_value(&self, state: &PathState, h: &HamiltonianFamily) -> Result<f64> {
        self.check_state(state)?;
        let dv = self.velocity_rows(state);
        let rows = self.grid.nodes();
        let mut integrand = vec![0.0; rows];
        for i in 0..rows {
            let t = self.grid.node(i);
            let vi = state.v_row(i);
            let mut s = 0.0;
            for (vij, dvij) in vi.iter().zip(&dv[i]) {
                s += vij.im * dvij.re;
            }
            s -= h.value(t, vi);
            let mu = self.torus.moment_map(vi);
            s += mu
                .iter()
                .zip(state.eta_row(i))
                .map(|(a, b)| a * b)
                .sum::<f64>();
            integrand[i] = s;
        }
        Ok(self.grid.trapz(&integrand))
    }

    /// The first-order operator `F = ∂_t v + X_eta(v) - X_h(t, v)` whose
    /// zeros (together with the moment map) are the critical points.
    pub fn first_order_rows(
        &self,
        state: &PathState,
        h: &HamiltonianFamily,
    ) -> Vec<Vec<Complex64>> {
        let mut f = self.velocity_rows(state);
        let rows = self.grid.nodes();
        for i in 0..rows {
            let t = self.grid.node(i);
            let vi = state.v_row(i);
            let xeta = self.torus.l_operator(vi, state.eta_row(i));
            let xh = h.vector_field(t, vi);
            for (fj, (xe, xv)) in f[i].iter_mut().zip(xeta.iter().zip(&xh)) {
                *fj += xe - xv;
            }
        }
        f
    }

    /// Gradient of the action with respect to the `L²` metric induced by
    /// the almost complex family.
    ///
    /// The `v`-sector is `J(t, v) F` projected to satisfy the linearized
    /// boundary condition; since the family is standard at the interval
    /// ends and admissible variations are real there, the projection does
    /// not change the represented functional.  The `eta`-sector is the
    /// moment map, with the zero-level shift applied twice when
    /// `tau_double_shift` is set.
    pub fn action_gradient(
        &self,
        state: &PathState,
        h: &HamiltonianFamily,
        jf: &AlmostComplexFamily,
        tau_double_shift: bool,
    ) -> Result<PathTangent> {
        self.check_state(state)?;
        let f = self.first_order_rows(state, h);
        let rows = self.grid.nodes();
        let mut vhat = Vec::with_capacity(rows);
        let mut etahat = Vec::with_capacity(rows);
        for (i, fi) in f.iter().enumerate() {
            let t = self.grid.node(i);
            let vi = state.v_row(i);
            vhat.push(jf.apply(t, vi, fi));
            let mut mu = self.torus.moment_map(vi);
            if tau_double_shift {
                for (m, tl) in mu.iter_mut().zip(self.torus.tau()) {
                    *m -= tl;
                }
            }
            etahat.push(mu);
        }
        for i in [0, rows - 1] {
            for c in vhat[i].iter_mut() {
                c.im = 0.0;
            }
        }
        Ok(PathTangent { vhat, etahat })
    }

    /// Sup norm of the first-order operator and the moment map: zero
    /// exactly on critical points.
    pub fn critical_residual(&self, state: &PathState, h: &HamiltonianFamily) -> Result<f64> {
        self.check_state(state)?;
        let f = self.first_order_rows(state, h);
        let mut worst = 0.0f64;
        for (i, fi) in f.iter().enumerate() {
            for c in fi {
                worst = worst.max(c.norm());
            }
            for m in self.torus.moment_map(state.v_row(i)) {
                worst = worst.max(m.abs());
            }
        }
        Ok(worst)
    }

    /// `L²` metric on tangents at a state: the compatible metric on the
    /// `v`-sector plus the Euclidean pairing on the `eta`-sector.
    pub fn metric(
        &self,
        at: &PathState,
        u: &PathTangent,
        w: &PathTangent,
        jf: &AlmostComplexFamily,
    ) -> f64 {
        let rows = self.grid.nodes();
        let mut integrand = vec![0.0; rows];
        for i in 0..rows {
            let t = self.grid.node(i);
            integrand[i] = jf.metric(t, at.v_row(i), &u.vhat[i], &w.vhat[i])
                + u.etahat[i]
                    .iter()
                    .zip(&w.etahat[i])
                    .map(|(a, b)| a * b)
                    .sum::<f64>();
        }
        self.grid.trapz(&integrand)
    }

    /// Norm induced by [`PathSpace::metric`].
    pub fn norm(&self, at: &PathState, u: &PathTangent, jf: &AlmostComplexFamily) -> f64 {
        self.metric(at, u, u, jf).max(0.0).sqrt()
    }

    /// The exact critical representative `(σ e^{-i π m t}, π m)` of the
    /// standard circle action.
    pub fn critical_representative(&self, winding: i64, sign: i8) -> Result<PathState> {
        if !self.torus.is_standard_circle() {
            return Err(Error::NotStandardCircle);
        }
        let rows = self.grid.nodes();
        let s = f64::from(sign.signum());
        if s == 0.0 {
            return Err(Error::InvalidParameter {
                what: "critical point sign",
                why: "sign must be +1 or -1".into(),
            });
        }
        let m = winding as f64;
        let mut v = Vec::with_capacity(rows);
        let mut eta = Vec::with_capacity(rows);
        for i in 0..rows {
            let t = self.grid.node(i);
            let phase = PI * m * t;
            let mut z = Complex64::new(s * phase.cos(), -s * phase.sin());
            if i == 0 || i == rows - 1 {
                z.im = 0.0;
            }
            v.push(vec![z]);
            eta.push(vec![PI * m]);
        }
        Ok(PathState::from_rows_unchecked(v, eta))
    }

    /// All critical points with winding in `m_min..=m_max` and both signs,
    /// ordered by winding then sign.
    pub fn enumerate_vortex_critical(
        &self,
        m_min: i64,
        m_max: i64,
    ) -> Result<Vec<LabeledCritical>> {
        if m_min > m_max {
            return Err(Error::InvalidParameter {
                what: "winding range",
                why: format!("{m_min} > {m_max}"),
            });
        }
        let mut out = Vec::new();
        for m in m_min..=m_max {
            for sign in [1i8, -1i8] {
                let state = self.critical_representative(m, sign)?;
                let action = self.action_value(&state, &HamiltonianFamily::Zero)?;
                out.push(LabeledCritical {
                    winding: m,
                    sign,
                    state,
                    action,
                });
            }
        }
        Ok(out)
    }

    /// Identify which labeled critical point a state sits near, by the mean
    /// of `eta` and the boundary sign, verified within `tol` in sup norm.
    pub fn identify_vortex_label(&self, state: &PathState, tol: f64) -> Result<(i64, i8)> {
        self.check_state(state)?;
        if !self.torus.is_standard_circle() {
            return Err(Error::NotStandardCircle);
        }
        let eta_mean = self.grid.trapz(&state.eta_component(0));
        let m = (eta_mean / PI).round();
        if !m.is_finite() || m.abs() > 1e15 {
            return Err(Error::NonFinite {
                what: "winding estimate",
            });
        }
        let sign = if state.v_row(0)[0].re >= 0.0 { 1i8 } else { -1i8 };
        let reference = self.critical_representative(m as i64, sign)?;
        let dist = state.sup_distance(&reference);
        if dist > tol {
            return Err(Error::SearchFailed {
                what: "critical point identification",
                best: dist,
            });
        }
        Ok((m as i64, sign))
    }
}
