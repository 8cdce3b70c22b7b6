//! States and tangent vectors of the discretized path space.
//!
//! A state is a pair `(v, eta)`: a path `v` in `C^n` sampled on the time
//! grid, real at both endpoints, together with a path `eta` of Lie-algebra
//! vectors.  Tangent vectors carry the same shape with the linearized
//! boundary condition on the `v`-component.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// How far from exactly-real a boundary node may be before construction
/// refuses it; anything below is snapped to the real axis.
pub const BOUNDARY_SNAP_TOL: f64 = 1e-9;

/// A point of the path space: `(nt+1) × n` complex samples and
/// `(nt+1) × k` real samples.
#[derive(Debug, Clone, PartialEq)]
pub struct PathState {
    v: Vec<Vec<Complex64>>,
    eta: Vec<Vec<f64>>,
}

impl PathState {
    /// Validate and build a state.  Boundary imaginary parts within
    /// [`BOUNDARY_SNAP_TOL`] (relative to the path scale) are snapped to
    /// zero; larger violations are errors.
    pub fn new(v: Vec<Vec<Complex64>>, eta: Vec<Vec<f64>>) -> Result<Self> {
        if v.len() < 3 || v.len() != eta.len() {
            return Err(Error::GridMismatch {
                what: "path rows (v versus eta)",
            });
        }
        let n = v[0].len();
        let k = eta[0].len();
        if n == 0 || k == 0 {
            return Err(Error::GridMismatch {
                what: "empty path row",
            });
        }
        if v.iter().any(|row| row.len() != n) || eta.iter().any(|row| row.len() != k) {
            return Err(Error::GridMismatch {
                what: "ragged path rows",
            });
        }
        let finite = v
            .iter()
            .flatten()
            .all(|c| c.re.is_finite() && c.im.is_finite())
            && eta.iter().flatten().all(|x| x.is_finite());
        if !finite {
            return Err(Error::NonFinite { what: "path state" });
        }
        let scale = 1.0
            + v.iter()
                .flatten()
                .map(|c| c.norm())
                .fold(0.0, f64::max);
        let mut v = v;
        let last = v.len() - 1;
        for i in [0, last] {
            for c in v[i].iter_mut() {
                if c.im.abs() > BOUNDARY_SNAP_TOL * scale {
                    return Err(Error::BoundaryViolation {
                        worst: c.im.abs(),
                        tol: BOUNDARY_SNAP_TOL * scale,
                    });
                }
                c.im = 0.0;
            }
        }
        Ok(PathState { v, eta })
    }

    /// Constant path sitting at a point of `R^n` with constant `eta`.
    pub fn constant(nt: usize, point: &[f64], eta: &[f64]) -> Self {
        let v = vec![
            point
                .iter()
                .map(|x| Complex64::new(*x, 0.0))
                .collect::<Vec<_>>();
            nt + 1
        ];
        let eta = vec![eta.to_vec(); nt + 1];
        PathState { v, eta }
    }

    /// Number of grid intervals.
    pub fn nt(&self) -> usize {
        self.v.len() - 1
    }

    /// Complex dimension of the target.
    pub fn n(&self) -> usize {
        self.v[0].len()
    }

    /// Lie-algebra dimension.
    pub fn k(&self) -> usize {
        self.eta[0].len()
    }

    /// All `v` rows.
    pub fn v(&self) -> &[Vec<Complex64>] {
        &self.v
    }

    /// All `eta` rows.
    pub fn eta(&self) -> &[Vec<f64>] {
        &self.eta
    }

    /// The `v` row at node `i`.
    pub fn v_row(&self, i: usize) -> &[Complex64] {
        &self.v[i]
    }

    /// The `eta` row at node `i`.
    pub fn eta_row(&self, i: usize) -> &[f64] {
        &self.eta[i]
    }

    /// Single complex component `v_j` as a time series.
    pub fn v_component(&self, j: usize) -> Vec<Complex64> {
        self.v.iter().map(|row| row[j]).collect()
    }

    /// Single real component `eta_l` as a time series.
    pub fn eta_component(&self, l: usize) -> Vec<f64> {
        self.eta.iter().map(|row| row[l]).collect()
    }

    /// Largest pointwise distance to another state on the same grid.
    pub fn sup_distance(&self, other: &PathState) -> f64 {
        let dv = self
            .v
            .iter()
            .flatten()
            .zip(other.v.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let de = self
            .eta
            .iter()
            .flatten()
            .zip(other.eta.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        dv.max(de)
    }

    /// Add `eps` times a tangent, revalidating the boundary condition.
    pub fn offset(&self, tangent: &PathTangent, eps: f64) -> Result<PathState> {
        let v = self
            .v
            .iter()
            .zip(&tangent.vhat)
            .map(|(row, trow)| row.iter().zip(trow).map(|(a, b)| a + eps * b).collect())
            .collect();
        let eta = self
            .eta
            .iter()
            .zip(&tangent.etahat)
            .map(|(row, trow)| row.iter().zip(trow).map(|(a, b)| a + eps * b).collect())
            .collect();
        PathState::new(v, eta)
    }

    pub(crate) fn from_rows_unchecked(v: Vec<Vec<Complex64>>, eta: Vec<Vec<f64>>) -> Self {
        PathState { v, eta }
    }

    pub(crate) fn eta_rows_mut(&mut self) -> &mut Vec<Vec<f64>> {
        &mut self.eta
    }
}

/// A tangent vector at a path state, same grid shape as the state.
#[derive(Debug, Clone, PartialEq)]
pub struct PathTangent {
    pub vhat: Vec<Vec<Complex64>>,
    pub etahat: Vec<Vec<f64>>,
}

impl PathTangent {
    /// The zero tangent with the given shape.
    pub fn zero(nt: usize, n: usize, k: usize) -> Self {
        PathTangent {
            vhat: vec![vec![Complex64::new(0.0, 0.0); n]; nt + 1],
            etahat: vec![vec![0.0; k]; nt + 1],
        }
    }

    /// Componentwise linear combination `self + c * other`.
    pub fn add_scaled(&self, other: &PathTangent, c: f64) -> PathTangent {
        PathTangent {
            vhat: self
                .vhat
                .iter()
                .zip(&other.vhat)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + c * y).collect())
                .collect(),
            etahat: self
                .etahat
                .iter()
                .zip(&other.etahat)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + c * y).collect())
                .collect(),
        }
    }

    /// Scale in place.
    pub fn scale(&mut self, c: f64) {
        for row in &mut self.vhat {
            for x in row.iter_mut() {
                *x *= c;
            }
        }
        for row in &mut self.etahat {
            for x in row.iter_mut() {
                *x *= c;
            }
        }
    }

    /// Largest pointwise magnitude over both sectors.
    pub fn sup_norm(&self) -> f64 {
        let dv = self
            .vhat
            .iter()
            .flatten()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        let de = self
            .etahat
            .iter()
            .flatten()
            .map(|x| x.abs())
            .fold(0.0, f64::max);
        dv.max(de)
    }
}
