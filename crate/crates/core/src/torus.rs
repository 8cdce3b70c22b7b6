//! Linear torus actions on complex n-space and their moment maps.
//!
//! A rank-`k` torus acts on `C^n` through an integer weight matrix `A`
//! (`n x k`):  the element with angles `theta` multiplies coordinate `j` by
//! `exp(i (A theta)_j)`.  Lie-algebra vectors and moment map values are k
//! vectors of reals, stored as the coefficient of `i` in `i R^k`.  The moment
//! map convention is
//!
//! ```text
//! mu(z) = -A^T w - tau,     w_j = |z_j|^2 / 2,
//! ```
//!
//! so for the unit-weight circle with `tau = -1/2` its zero set is the unit
//! circle.

use crate::error::{Error, Result};
use crate::snf::smith_normal_form;
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::{PI, TAU};

/// Element of the rank-`k` torus, angles stored canonically in `[0, 2*pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    theta: Vec<f64>,
}

impl GroupElement {
    /// Build an element, normalising every angle into `[0, 2*pi)`.
    pub fn new(theta: Vec<f64>) -> Self {
        let theta = theta.into_iter().map(normalize_angle).collect();
        GroupElement { theta }
    }

    /// Identity of the rank-`k` torus.
    pub fn identity(k: usize) -> Self {
        GroupElement {
            theta: vec![0.0; k],
        }
    }

    /// Torus rank.
    pub fn rank(&self) -> usize {
        self.theta.len()
    }

    /// Canonical angles.
    pub fn angles(&self) -> &[f64] {
        &self.theta
    }

    /// Group composition (componentwise angle addition mod `2*pi`).
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        debug_assert_eq!(self.rank(), other.rank());
        GroupElement::new(
            self.theta
                .iter()
                .zip(&other.theta)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Group inverse.
    pub fn inverse(&self) -> GroupElement {
        GroupElement::new(self.theta.iter().map(|a| -a).collect())
    }

    /// Max angular distance to another element, shortest way around.
    pub fn distance(&self, other: &GroupElement) -> f64 {
        self.theta
            .iter()
            .zip(&other.theta)
            .map(|(a, b)| {
                let d = (a - b).rem_euclid(TAU);
                d.min(TAU - d)
            })
            .fold(0.0, f64::max)
    }
}

fn normalize_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(TAU);
    // rem_euclid may return TAU itself when the input is a tiny negative
    if r >= TAU {
        r -= TAU;
    }
    // snap values that are one rounding step away from a period boundary
    if TAU - r < 1e-12 {
        r = 0.0;
    }
    r
}

/// Linear torus action `rho(e^{i theta}) z = e^{i A theta} z` together with
/// the moment map shift `tau`.
#[derive(Debug, Clone)]
pub struct TorusAction {
    n: usize,
    k: usize,
    /// weights, row-major `n x k`
    a: Vec<i64>,
    /// moment map shift, coefficient of `i`
    tau: Vec<f64>,
    full_rank: bool,
}

impl TorusAction {
    /// Build an action from the weight matrix (row-major `n x k`) and shift.
    pub fn new(n: usize, k: usize, a: Vec<i64>, tau: Vec<f64>) -> Result<Self> {
        if n == 0 || k == 0 || k > n {
            return Err(Error::InvalidParameter {
                what: "torus dimensions",
                why: format!("need 1 <= k <= n, got n = {n}, k = {k}"),
            });
        }
        if a.len() != n * k {
            return Err(Error::DimensionMismatch {
                what: "weight matrix",
                expected: n * k,
                got: a.len(),
            });
        }
        if tau.len() != k {
            return Err(Error::DimensionMismatch {
                what: "tau",
                expected: k,
                got: tau.len(),
            });
        }
        if tau.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite { what: "tau" });
        }
        let full_rank = smith_normal_form(&a, n, k)?.rank() == k;
        Ok(TorusAction {
            n,
            k,
            a,
            tau,
            full_rank,
        })
    }

    /// The standard circle problem: `n = k = 1`, weight 1, shift `tau`.
    pub fn circle(tau: f64) -> Self {
        TorusAction::new(1, 1, vec![1], vec![tau]).expect("circle data is valid")
    }

    /// Complex dimension of the ambient space.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Torus rank.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Weight matrix entry `A[j][l]`.
    pub fn weight(&self, j: usize, l: usize) -> i64 {
        self.a[j * self.k + l]
    }

    /// Moment map shift.
    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    /// Whether the weight matrix has full column rank.
    pub fn full_rank(&self) -> bool {
        self.full_rank
    }

    /// True for the standard circle data used by the vortex enumeration.
    pub fn is_standard_circle(&self) -> bool {
        self.n == 1 && self.k == 1 && self.a == [1] && (self.tau[0] + 0.5).abs() <= 1e-12
    }

    /// `A theta` as a real n-vector.
    fn weight_apply(&self, theta: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|j| {
                (0..self.k)
                    .map(|l| self.a[j * self.k + l] as f64 * theta[l])
                    .sum()
            })
            .collect()
    }

    /// `A^T x` for a real n-vector `x`.
    fn weight_transpose_apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.k)
            .map(|l| {
                (0..self.n)
                    .map(|j| self.a[j * self.k + l] as f64 * x[j])
                    .sum()
            })
            .collect()
    }

    /// Apply the group element: coordinatewise phase rotation by `A theta`.
    pub fn rotate(&self, g: &GroupElement, z: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_point(z)?;
        if g.rank() != self.k {
            return Err(Error::DimensionMismatch {
                what: "group element rank",
                expected: self.k,
                got: g.rank(),
            });
        }
        let phases = self.weight_apply(g.angles());
        Ok(z.iter()
            .zip(&phases)
            .map(|(zj, p)| zj * Complex64::from_polar(1.0, *p))
            .collect())
    }

    /// Infinitesimal action `X_xi(z)_j = i (A xi)_j z_j`.
    pub fn infinitesimal_action(&self, xi: &[f64], z: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_point(z)?;
        if xi.len() != self.k {
            return Err(Error::DimensionMismatch {
                what: "Lie algebra vector",
                expected: self.k,
                got: xi.len(),
            });
        }
        let w = self.weight_apply(xi);
        Ok(z.iter()
            .zip(&w)
            .map(|(zj, wj)| Complex64::new(0.0, *wj) * zj)
            .collect())
    }

    /// Moment map including the `tau` shift: `-A^T w - tau`, `w_j = |z_j|^2/2`.
    pub fn moment_map(&self, z: &[Complex64]) -> Vec<f64> {
        assert_eq!(z.len(), self.n, "moment_map: point has wrong dimension");
        let w: Vec<f64> = z.iter().map(|zj| 0.5 * zj.norm_sqr()).collect();
        let atw = self.weight_transpose_apply(&w);
        atw.iter().zip(&self.tau).map(|(x, t)| -x - t).collect()
    }

    /// Moment map without the shift: `-A^T w`.
    pub fn moment_map_unshifted(&self, z: &[Complex64]) -> Vec<f64> {
        assert_eq!(z.len(), self.n, "moment_map: point has wrong dimension");
        let w: Vec<f64> = z.iter().map(|zj| 0.5 * zj.norm_sqr()).collect();
        self.weight_transpose_apply(&w).iter().map(|x| -x).collect()
    }

    /// `L_z eta = X_eta(z)`, the infinitesimal action as a linear map in eta.
    pub fn l_operator(&self, z: &[Complex64], eta: &[f64]) -> Vec<Complex64> {
        assert_eq!(z.len(), self.n);
        assert_eq!(eta.len(), self.k);
        let w = self.weight_apply(eta);
        z.iter()
            .zip(&w)
            .map(|(zj, wj)| Complex64::new(0.0, *wj) * zj)
            .collect()
    }

    /// Adjoint of `L_z` for the real inner product on `C^n`:
    /// `(L_z^* v)_l = sum_j A_{jl} Im(conj(z_j) v_j)`.
    pub fn l_adjoint(&self, z: &[Complex64], v: &[Complex64]) -> Vec<f64> {
        assert_eq!(z.len(), self.n);
        assert_eq!(v.len(), self.n);
        let imcz: Vec<f64> = z
            .iter()
            .zip(v)
            .map(|(zj, vj)| (zj.conj() * vj).im)
            .collect();
        self.weight_transpose_apply(&imcz)
    }

    /// `L_z^* L_z` as a dense `k x k` matrix: `A^T diag(|z_j|^2) A`.
    pub fn l_gram(&self, z: &[Complex64]) -> Vec<f64> {
        let mut m = vec![0.0; self.k * self.k];
        for j in 0..self.n {
            let r2 = z[j].norm_sqr();
            for l in 0..self.k {
                for l2 in 0..self.k {
                    m[l * self.k + l2] +=
                        r2 * self.a[j * self.k + l] as f64 * self.a[j * self.k + l2] as f64;
                }
            }
        }
        m
    }

    /// Elements of the torus that map the real locus `R^n` to itself.
    ///
    /// These are the angles with `A theta` in `pi Z^n`; the computation is
    /// exact integer lattice arithmetic through the Smith reduction.  For a
    /// primitive full-rank weight matrix the result is the `2^k` involutions
    /// with angle components 0 or pi.  The list is sorted lexicographically.
    pub fn isotropy_lagrangian(&self) -> Result<Vec<GroupElement>> {
        let s = smith_normal_form(&self.a, self.n, self.k)?;
        if s.rank() < self.k {
            return Err(Error::RankDeficient {
                rank: s.rank(),
                needed: self.k,
            });
        }
        let d: Vec<i64> = s.diag[..self.k].to_vec();
        // Solutions of A u integral are u = V y with y_l in (1/d_l) Z; list
        // representatives of that lattice modulo 2 Z^k and set theta = pi u.
        let mut elements = Vec::new();
        let mut y_index = vec![0i64; self.k];
        loop {
            let y: Vec<f64> = (0..self.k)
                .map(|l| y_index[l] as f64 / d[l] as f64)
                .collect();
            let u: Vec<f64> = (0..self.k)
                .map(|r| {
                    (0..self.k)
                        .map(|c| s.v[r * self.k + c] as f64 * y[c])
                        .sum()
                })
                .collect();
            elements.push(GroupElement::new(u.iter().map(|ui| PI * ui).collect()));
            // odometer over y_index[l] in 0..2*d[l]
            let mut carry = true;
            for l in 0..self.k {
                if carry {
                    y_index[l] += 1;
                    if y_index[l] >= 2 * d[l] {
                        y_index[l] = 0;
                    } else {
                        carry = false;
                    }
                }
            }
            if carry {
                break;
            }
        }
        elements.sort_by(|a, b| {
            a.angles()
                .iter()
                .zip(b.angles())
                .find_map(|(x, y)| x.partial_cmp(y).filter(|o| o.is_ne()))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        Ok(elements)
    }

    /// Basis of the lattice of admissible gauge-loop endpoint angles.
    ///
    /// A gauge path may end at any angle vector `theta` with `A theta` in
    /// `pi Z^n`; those form a lattice spanned by the returned `k` columns
    /// (each a `k`-vector, computed from the Smith reduction of the weight
    /// matrix).  Requires full column rank.
    pub fn winding_basis(&self) -> Result<Vec<Vec<f64>>> {
        let s = smith_normal_form(&self.a, self.n, self.k)?;
        if s.rank() < self.k {
            return Err(Error::RankDeficient {
                rank: s.rank(),
                needed: self.k,
            });
        }
        Ok((0..self.k)
            .map(|i| {
                (0..self.k)
                    .map(|r| PI * s.v[r * self.k + i] as f64 / s.diag[i] as f64)
                    .collect()
            })
            .collect())
    }

    /// Finite-difference check of the Hamiltonian property of the moment map:
    /// the directional derivative of `<mu(z), xi>` along `h` against
    /// `omega(X_xi(z), h)`.  Returns the absolute mismatch.
    pub fn hamiltonian_property_residual(
        &self,
        z: &[Complex64],
        xi: &[f64],
        h: &[Complex64],
        step: f64,
    ) -> Result<f64> {
        self.check_point(z)?;
        self.check_point(h)?;
        if xi.len() != self.k {
            return Err(Error::DimensionMismatch {
                what: "Lie algebra vector",
                expected: self.k,
                got: xi.len(),
            });
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidParameter {
                what: "finite difference step",
                why: format!("{step}"),
            });
        }
        let pair = |z: &[Complex64]| -> f64 {
            self.moment_map(z)
                .iter()
                .zip(xi)
                .map(|(m, x)| m * x)
                .sum()
        };
        let plus: Vec<Complex64> = z.iter().zip(h).map(|(a, b)| a + step * b).collect();
        let minus: Vec<Complex64> = z.iter().zip(h).map(|(a, b)| a - step * b).collect();
        let fd = (pair(&plus) - pair(&minus)) / (2.0 * step);
        let xz = self.infinitesimal_action(xi, z)?;
        let omega: f64 = xz.iter().zip(h).map(|(u, v)| (u.conj() * v).im).sum();
        Ok((fd - omega).abs())
    }

    fn check_point(&self, z: &[Complex64]) -> Result<()> {
        if z.len() != self.n {
            return Err(Error::DimensionMismatch {
                what: "point in C^n",
                expected: self.n,
                got: z.len(),
            });
        }
        if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite { what: "point in C^n" });
        }
        Ok(())
    }

    /// Sampled report on the standing hypotheses: a zero of the moment map,
    /// freeness of the action there, and a properness heuristic.
    pub fn check_hypothesis_h<R: Rng>(
        &self,
        rng: &mut R,
        sample_count: usize,
        radius: f64,
    ) -> HypothesisReport {
        // The moment map depends only on w_j = |z_j|^2/2 >= 0, so zeros are
        // found (up to torus phases) among real nonnegative points: solve
        // A^T w = -tau with w >= 0 by projected gradient descent.
        let target: Vec<f64> = self.tau.iter().map(|t| -t).collect();
        let mut best: Option<(Vec<f64>, f64)> = None;
        for attempt in 0..sample_count.max(1) {
            let mut w: Vec<f64> = if attempt == 0 {
                vec![0.1; self.n]
            } else {
                (0..self.n).map(|_| rng.gen_range(0.0..1.0)).collect()
            };
            for _ in 0..4000 {
                // residual r = A^T w - target; gradient of |r|^2/2 is A r
                let atw = self.weight_transpose_apply(&w);
                let r: Vec<f64> = atw.iter().zip(&target).map(|(a, b)| a - b).collect();
                let grad: Vec<f64> = (0..self.n)
                    .map(|j| {
                        (0..self.k)
                            .map(|l| self.a[j * self.k + l] as f64 * r[l])
                            .sum()
                    })
                    .collect();
                let gn: f64 = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
                if gn < 1e-14 {
                    break;
                }
                let step = 0.5
                    / self
                        .a
                        .iter()
                        .map(|x| (*x * *x) as f64)
                        .sum::<f64>()
                        .max(1.0);
                for j in 0..self.n {
                    w[j] = (w[j] - step * grad[j]).max(0.0);
                }
            }
            let atw = self.weight_transpose_apply(&w);
            let res: f64 = atw
                .iter()
                .zip(&target)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if best.as_ref().map_or(true, |(_, b)| res < *b) {
                best = Some((w.clone(), res));
            }
            if best.as_ref().unwrap().1 < 1e-10 && attempt >= 2 {
                break;
            }
        }
        let (w, residual) = best.unwrap();
        let zero_found = residual <= 1e-8;
        let zero_point: Option<Vec<Complex64>> = zero_found.then(|| {
            w.iter()
                .map(|wj| Complex64::new((2.0 * wj).sqrt(), 0.0))
                .collect()
        });

        // freeness at the found zero: the stabiliser is trivial iff the rows
        // of A supported on the nonvanishing coordinates span a primitive
        // full-rank lattice (all invariant factors 1).  The zero is only
        // located to residual 1e-8, which bounds spurious coordinates by
        // about 1e-4 in norm, so anything below 1e-3 counts as vanishing.
        let free_at_zero = zero_point.as_ref().map(|z| {
            let support: Vec<usize> = (0..self.n).filter(|j| z[*j].norm() > 1e-3).collect();
            if support.is_empty() {
                return false;
            }
            let sub: Vec<i64> = support
                .iter()
                .flat_map(|j| self.a[j * self.k..(j + 1) * self.k].iter().copied())
                .collect();
            match smith_normal_form(&sub, support.len(), self.k) {
                Ok(s) => s.rank() == self.k && s.diag[..self.k].iter().all(|d| *d == 1),
                Err(_) => false,
            }
        });

        // properness heuristic: preimages of a sampled ball stay bounded and
        // the recession cone {w >= 0 : A^T w = 0} looks trivial
        let mut sup_norm: f64 = 0.0;
        let mut all_bounded = true;
        for _ in 0..sample_count {
            let c: Vec<f64> = (0..self.k)
                .map(|_| rng.gen_range(-radius..radius))
                .collect();
            let shifted: Vec<f64> = target.iter().zip(&c).map(|(t, ci)| t + ci).collect();
            let mut w: Vec<f64> = (0..self.n).map(|_| rng.gen_range(0.0..1.0)).collect();
            for _ in 0..2000 {
                let atw = self.weight_transpose_apply(&w);
                let r: Vec<f64> = atw.iter().zip(&shifted).map(|(a, b)| a - b).collect();
                let grad: Vec<f64> = (0..self.n)
                    .map(|j| {
                        (0..self.k)
                            .map(|l| self.a[j * self.k + l] as f64 * r[l])
                            .sum()
                    })
                    .collect();
                let step = 0.5
                    / self
                        .a
                        .iter()
                        .map(|x| (*x * *x) as f64)
                        .sum::<f64>()
                        .max(1.0);
                for j in 0..self.n {
                    w[j] = (w[j] - step * grad[j]).max(0.0);
                }
            }
            let atw = self.weight_transpose_apply(&w);
            let feasible = atw
                .iter()
                .zip(&shifted)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                <= 1e-6;
            if feasible {
                let norm = w.iter().map(|x| (2.0 * x).sqrt()).fold(0.0, f64::max);
                sup_norm = sup_norm.max(norm);
                if !norm.is_finite() || norm > 1e6 {
                    all_bounded = false;
                }
            }
        }
        // recession direction test: maximise total mass subject to A^T w = 0
        let mut wr = vec![1.0; self.n];
        for _ in 0..3000 {
            let atw = self.weight_transpose_apply(&wr);
            let grad: Vec<f64> = (0..self.n)
                .map(|j| {
                    (0..self.k)
                        .map(|l| self.a[j * self.k + l] as f64 * atw[l])
                        .sum::<f64>()
                        - 0.05
                })
                .collect();
            let step = 0.2
                / self
                    .a
                    .iter()
                    .map(|x| (*x * *x) as f64)
                    .sum::<f64>()
                    .max(1.0);
            for j in 0..self.n {
                wr[j] = (wr[j] - step * grad[j]).max(0.0).min(1e3);
            }
        }
        let recession_mass: f64 = {
            let atw = self.weight_transpose_apply(&wr);
            let on_kernel = atw.iter().map(|x| x.abs()).fold(0.0, f64::max) < 1e-4;
            if on_kernel {
                wr.iter().sum()
            } else {
                0.0
            }
        };
        let proper_hint = all_bounded && recession_mass < 1e-3;

        HypothesisReport {
            zero_point,
            zero_residual: residual,
            free_at_zero,
            proper_hint,
            preimage_sup_norm: sup_norm,
            sample_count,
            radius,
        }
    }
}

/// Sampled evidence about the standing hypotheses on `(A, tau)`.
///
/// Everything here is heuristic except `free_at_zero`, which is an exact
/// lattice computation at the located zero.
#[derive(Debug, Clone)]
pub struct HypothesisReport {
    /// A located zero of the moment map (real nonnegative representative).
    pub zero_point: Option<Vec<Complex64>>,
    /// Feasibility residual of the located zero.
    pub zero_residual: f64,
    /// Whether the torus acts freely at the located zero (None if no zero).
    pub free_at_zero: Option<bool>,
    /// Heuristic verdict that moment map preimages of a ball stay bounded.
    pub proper_hint: bool,
    /// Largest coordinate norm seen over the sampled preimages.
    pub preimage_sup_norm: f64,
    /// Number of samples used.
    pub sample_count: usize,
    /// Radius of the sampled ball in the dual Lie algebra.
    pub radius: f64,
}

impl HypothesisReport {
    /// All three conditions supported by the evidence.
    pub fn satisfied(&self) -> bool {
        self.zero_point.is_some() && self.free_at_zero == Some(true) && self.proper_hint
    }
}
