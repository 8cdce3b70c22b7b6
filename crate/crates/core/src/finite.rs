//! Finite-dimensional Morse flow lines and their energy bookkeeping.
//!
//! Two model problems: a one-dimensional double well and a quadratic form
//! restricted to the unit two-sphere.  Flow lines are integrated with
//! Runge-Kutta, heteroclinic connections are assembled by flowing both
//! ways from a seed, and the energy of a curve is compared against its
//! completed-square form plus the potential drop — an identity that holds
//! for every curve and has zero completion term exactly on descending
//! flow lines.

use crate::error::{Error, Result};

/// A gradient-flow problem on a finite-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub enum MorseProblem {
    /// `f(x) = x^4/4 - x^2/2` on the line; minima at `±1`, maximum at `0`.
    DoubleWell,
    /// `f(x) = sum_i lambda_i x_i^2` restricted to the unit sphere in
    /// `R^3`; critical points at `±e_i`.
    SphereQuadratic { lambda: [f64; 3] },
}

impl MorseProblem {
    pub fn dim(&self) -> usize {
        match self {
            MorseProblem::DoubleWell => 1,
            MorseProblem::SphereQuadratic { .. } => 3,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            MorseProblem::DoubleWell => {
                let y = x[0];
                0.25 * y.powi(4) - 0.5 * y * y
            }
            MorseProblem::SphereQuadratic { lambda } => {
                lambda.iter().zip(x).map(|(l, xi)| l * xi * xi).sum()
            }
        }
    }

    /// Gradient of the restricted function: plain derivative on the line,
    /// tangentially projected gradient on the sphere.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match self {
            MorseProblem::DoubleWell => vec![x[0].powi(3) - x[0]],
            MorseProblem::SphereQuadratic { lambda } => {
                let amb: Vec<f64> = lambda.iter().zip(x).map(|(l, xi)| 2.0 * l * xi).collect();
                project_tangent(x, &amb)
            }
        }
    }

    /// Right-hand side of the second-order equation satisfied by flow
    /// lines: the (intrinsic) Hessian applied to the gradient.
    pub fn hessian_gradient(&self, x: &[f64]) -> Vec<f64> {
        match self {
            MorseProblem::DoubleWell => {
                let y = x[0];
                vec![(3.0 * y * y - 1.0) * (y.powi(3) - y)]
            }
            MorseProblem::SphereQuadratic { lambda } => {
                let g = self.gradient(x);
                let hg: Vec<f64> = lambda.iter().zip(&g).map(|(l, gi)| 2.0 * l * gi).collect();
                let phg = project_tangent(x, &hg);
                // second fundamental form correction <grad_ambient, x>
                let radial: f64 = lambda
                    .iter()
                    .zip(x)
                    .map(|(l, xi)| 2.0 * l * xi * xi)
                    .sum();
                phg.iter().zip(&g).map(|(a, gi)| a - radial * gi).collect()
            }
        }
    }

    /// All critical points of the problem.
    pub fn critical_points(&self) -> Vec<Vec<f64>> {
        match self {
            MorseProblem::DoubleWell => vec![vec![-1.0], vec![0.0], vec![1.0]],
            MorseProblem::SphereQuadratic { .. } => {
                let mut pts = Vec::with_capacity(6);
                for i in 0..3 {
                    for s in [1.0, -1.0] {
                        let mut p = vec![0.0; 3];
                        p[i] = s;
                        pts.push(p);
                    }
                }
                pts
            }
        }
    }

    /// Pull a point back onto the constraint manifold (no-op on the line).
    fn retract(&self, x: &mut [f64]) {
        if let MorseProblem::SphereQuadratic { .. } = self {
            let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            for v in x.iter_mut() {
                *v /= n;
            }
        }
    }
}

fn project_tangent(x: &[f64], u: &[f64]) -> Vec<f64> {
    let dot: f64 = x.iter().zip(u).map(|(a, b)| a * b).sum();
    u.iter().zip(x).map(|(ui, xi)| ui - dot * xi).collect()
}

fn norm(u: &[f64]) -> f64 {
    u.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// A flow line sampled at uniform parameter spacing.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Parameter spacing between consecutive samples.
    pub ds: f64,
    /// `+1` for descending flow, `-1` for ascending.
    pub direction: i8,
    pub samples: Vec<Vec<f64>>,
    /// Whether the gradient threshold was reached before the horizon.
    pub converged: bool,
}

/// Integrate `dx/ds = -direction * grad f` from `start` until the
/// gradient norm falls below `grad_tol` or the horizon `s_max` is hit.
pub fn integrate_flow_line(
    problem: &MorseProblem,
    start: &[f64],
    direction: i8,
    ds: f64,
    s_max: f64,
    grad_tol: f64,
) -> Result<Trajectory> {
    if start.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            what: "flow line start",
            expected: problem.dim(),
            got: start.len(),
        });
    }
    if !(ds.is_finite() && ds > 0.0 && s_max >= ds) {
        return Err(Error::InvalidParameter {
            what: "flow line step",
            why: format!("ds = {ds}, s_max = {s_max}"),
        });
    }
    let sign = -f64::from(direction.signum());
    if sign == 0.0 {
        return Err(Error::InvalidParameter {
            what: "flow direction",
            why: "direction must be +1 or -1".into(),
        });
    }
    let rhs = |x: &[f64]| -> Vec<f64> {
        problem
            .gradient(x)
            .into_iter()
            .map(|g| sign * g)
            .collect()
    };
    let steps = (s_max / ds).round() as usize;
    let mut samples = Vec::with_capacity(steps + 1);
    let mut x = start.to_vec();
    problem.retract(&mut x);
    samples.push(x.clone());
    let mut converged = norm(&problem.gradient(&x)) <= grad_tol;
    for step in 0..steps {
        if converged {
            break;
        }
        let k1 = rhs(&x);
        let x2: Vec<f64> = x.iter().zip(&k1).map(|(a, b)| a + 0.5 * ds * b).collect();
        let k2 = rhs(&x2);
        let x3: Vec<f64> = x.iter().zip(&k2).map(|(a, b)| a + 0.5 * ds * b).collect();
        let k3 = rhs(&x3);
        let x4: Vec<f64> = x.iter().zip(&k3).map(|(a, b)| a + ds * b).collect();
        let k4 = rhs(&x4);
        for i in 0..x.len() {
            x[i] += ds / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        problem.retract(&mut x);
        let sup = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if !sup.is_finite() || sup > 100.0 {
            return Err(Error::Instability {
                norm: sup,
                bound: 100.0,
                s: (step + 1) as f64 * ds,
            });
        }
        samples.push(x.clone());
        converged = norm(&problem.gradient(&x)) <= grad_tol;
    }
    Ok(Trajectory {
        ds,
        direction: direction.signum(),
        samples,
        converged,
    })
}

/// Assemble a descending connection through `seed` by flowing up to the
/// source critical point and down to the sink, then joining the halves.
pub fn heteroclinic_between(
    problem: &MorseProblem,
    seed: &[f64],
    ds: f64,
    s_max: f64,
    grad_tol: f64,
) -> Result<Trajectory> {
    let up = integrate_flow_line(problem, seed, -1, ds, s_max, grad_tol)?;
    let down = integrate_flow_line(problem, seed, 1, ds, s_max, grad_tol)?;
    let mut samples: Vec<Vec<f64>> = up.samples.into_iter().rev().collect();
    samples.extend(down.samples.into_iter().skip(1));
    Ok(Trajectory {
        ds,
        direction: 1,
        samples,
        converged: up.converged && down.converged,
    })
}

/// Energy bookkeeping of a sampled curve.
///
/// `energy` is `(1/2) ∫ (|dx/ds|² + |grad f|²)`, `completion` the
/// completed square `(1/2) ∫ |dx/ds + grad f|²`, and `potential_drop`
/// `f(start) - f(end)`.  The three satisfy
/// `energy = completion + potential_drop` for every curve; `residual`
/// reports the discretization defect of that identity.  A descending
/// flow line is exactly the case `completion = 0`, which pins the energy
/// to the potential drop.
#[derive(Debug, Clone, Copy)]
pub struct BogomolnyiAudit {
    pub energy: f64,
    pub completion: f64,
    pub potential_drop: f64,
    pub residual: f64,
}

/// Audit a trajectory's energy identity with central differences in the
/// interior and one-sided differences at the ends.
pub fn bogomolnyi_audit(problem: &MorseProblem, traj: &Trajectory) -> Result<BogomolnyiAudit> {
    let m = traj.samples.len();
    if m < 3 {
        return Err(Error::InvalidParameter {
            what: "trajectory length",
            why: format!("{m} samples"),
        });
    }
    let ds = traj.ds;
    let dim = problem.dim();
    let mut energy_sum = 0.0;
    let mut completion_sum = 0.0;
    for i in 0..m {
        let x = &traj.samples[i];
        let xdot: Vec<f64> = if i == 0 {
            (0..dim)
                .map(|d| (traj.samples[1][d] - traj.samples[0][d]) / ds)
                .collect()
        } else if i == m - 1 {
            (0..dim)
                .map(|d| (traj.samples[m - 1][d] - traj.samples[m - 2][d]) / ds)
                .collect()
        } else {
            (0..dim)
                .map(|d| (traj.samples[i + 1][d] - traj.samples[i - 1][d]) / (2.0 * ds))
                .collect()
        };
        let g = problem.gradient(x);
        let e: f64 = xdot.iter().map(|v| v * v).sum::<f64>()
            + g.iter().map(|v| v * v).sum::<f64>();
        let c: f64 = xdot
            .iter()
            .zip(&g)
            .map(|(a, b)| (a + b) * (a + b))
            .sum();
        let w = if i == 0 || i == m - 1 { 0.5 } else { 1.0 };
        energy_sum += w * 0.5 * e;
        completion_sum += w * 0.5 * c;
    }
    let energy = ds * energy_sum;
    let completion = ds * completion_sum;
    let potential_drop =
        problem.value(&traj.samples[0]) - problem.value(&traj.samples[m - 1]);
    let residual = (energy - completion - potential_drop).abs();
    Ok(BogomolnyiAudit {
        energy,
        completion,
        potential_drop,
        residual,
    })
}

/// Sup over interior samples of the second-order flow-line equation
/// residual, using a central second-difference stencil (second order in
/// `ds`).  On the sphere the second difference is corrected by the
/// curvature term `|dx/ds|² x` to form the covariant acceleration.
pub fn euler_lagrange_residual(problem: &MorseProblem, traj: &Trajectory) -> Result<f64> {
    let m = traj.samples.len();
    if m < 5 {
        return Err(Error::InvalidParameter {
            what: "trajectory length",
            why: format!("{m} samples"),
        });
    }
    let ds = traj.ds;
    let dim = problem.dim();
    let mut worst = 0.0f64;
    for i in 1..m - 1 {
        let x = &traj.samples[i];
        let accel: Vec<f64> = (0..dim)
            .map(|d| {
                (traj.samples[i + 1][d] - 2.0 * traj.samples[i][d] + traj.samples[i - 1][d])
                    / (ds * ds)
            })
            .collect();
        let xdot: Vec<f64> = (0..dim)
            .map(|d| (traj.samples[i + 1][d] - traj.samples[i - 1][d]) / (2.0 * ds))
            .collect();
        let speed_sq: f64 = xdot.iter().map(|v| v * v).sum();
        let covariant: Vec<f64> = match problem {
            MorseProblem::DoubleWell => accel,
            MorseProblem::SphereQuadratic { .. } => accel
                .iter()
                .zip(x)
                .map(|(a, xi)| a + speed_sq * xi)
                .collect(),
        };
        let rhs = problem.hessian_gradient(x);
        let r = covariant
            .iter()
            .zip(&rhs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst = worst.max(r);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sphere() -> MorseProblem {
        MorseProblem::SphereQuadratic {
            lambda: [1.0, 2.0, 4.0],
        }
    }

    #[test]
    fn gradients_vanish_at_critical_points() {
        for problem in [MorseProblem::DoubleWell, sphere()] {
            for p in problem.critical_points() {
                assert!(norm(&problem.gradient(&p)) < 1e-14, "{p:?}");
            }
        }
    }

    #[test]
    fn double_well_descent_reaches_the_minimum() {
        let traj = integrate_flow_line(
            &MorseProblem::DoubleWell,
            &[1e-3],
            1,
            1e-3,
            25.0,
            1e-10,
        )
        .unwrap();
        assert!(traj.converged);
        let end = traj.samples.last().unwrap()[0];
        assert_abs_diff_eq!(end, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn double_well_connection_carries_energy_one_quarter() {
        let problem = MorseProblem::DoubleWell;
        let traj = heteroclinic_between(&problem, &[1e-3], 1e-3, 25.0, 1e-10).unwrap();
        assert!(traj.converged);
        let audit = bogomolnyi_audit(&problem, &traj).unwrap();
        assert_abs_diff_eq!(audit.energy, 0.25, epsilon = 1e-5);
        assert!(audit.completion < 1e-8, "completion {}", audit.completion);
        assert!(audit.residual < 1e-6, "residual {}", audit.residual);
    }

    #[test]
    fn energy_identity_holds_for_curves_that_are_not_flow_lines() {
        let problem = MorseProblem::DoubleWell;
        let ds = 1e-3;
        let m = 2001;
        let samples: Vec<Vec<f64>> = (0..m)
            .map(|i| vec![0.5 + 0.3 * (i as f64 * ds).sin()])
            .collect();
        let traj = Trajectory {
            ds,
            direction: 1,
            samples,
            converged: false,
        };
        let audit = bogomolnyi_audit(&problem, &traj).unwrap();
        assert!(audit.completion > 1e-2, "not a flow line on purpose");
        assert!(audit.residual < 1e-6, "residual {}", audit.residual);
    }

    #[test]
    fn sphere_connection_energy_is_the_eigenvalue_gap() {
        let problem = sphere();
        let mut seed = vec![1e-3 * 0.9, 1e-3 * 0.2, 1.0];
        let n = norm(&seed);
        for v in seed.iter_mut() {
            *v /= n;
        }
        let traj = heteroclinic_between(&problem, &seed, 1e-3, 25.0, 1e-10).unwrap();
        assert!(traj.converged);
        for s in &traj.samples {
            assert_abs_diff_eq!(norm(s), 1.0, epsilon = 1e-12);
        }
        let audit = bogomolnyi_audit(&problem, &traj).unwrap();
        assert_abs_diff_eq!(audit.energy, 3.0, epsilon = 1e-4);
        assert!(audit.completion < 1e-7, "completion {}", audit.completion);
        // the identity defect is second order in ds; the sphere problem has
        // a larger third-derivative constant than the double well
        assert!(audit.residual < 2e-5, "residual {}", audit.residual);
    }

    #[test]
    fn flow_lines_satisfy_the_second_order_equation_at_second_order() {
        let problem = MorseProblem::DoubleWell;
        let r: Vec<f64> = [2e-3, 1e-3]
            .iter()
            .map(|&ds| {
                let traj = heteroclinic_between(&problem, &[1e-3], ds, 25.0, 1e-10).unwrap();
                euler_lagrange_residual(&problem, &traj).unwrap()
            })
            .collect();
        let ratio = r[0] / r[1];
        assert!((3.3..=4.7).contains(&ratio), "refinement ratio {ratio}");
    }

    #[test]
    fn sphere_flow_lines_satisfy_the_covariant_equation() {
        let problem = sphere();
        let mut seed = vec![1e-3, 5e-4, 1.0];
        let n = norm(&seed);
        for v in seed.iter_mut() {
            *v /= n;
        }
        let r: Vec<f64> = [2e-3, 1e-3]
            .iter()
            .map(|&ds| {
                let traj = heteroclinic_between(&problem, &seed, ds, 25.0, 1e-10).unwrap();
                euler_lagrange_residual(&problem, &traj).unwrap()
            })
            .collect();
        let ratio = r[0] / r[1];
        assert!((3.0..=5.0).contains(&ratio), "refinement ratio {ratio}");
    }

    #[test]
    fn ascending_flow_from_outside_the_wells_diverges() {
        let err = integrate_flow_line(&MorseProblem::DoubleWell, &[2.0], -1, 1e-3, 25.0, 0.0);
        assert!(matches!(err, Err(Error::Instability { .. })));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let p = MorseProblem::DoubleWell;
        assert!(integrate_flow_line(&p, &[0.5, 0.5], 1, 1e-3, 1.0, 0.0).is_err());
        assert!(integrate_flow_line(&p, &[0.5], 1, -1e-3, 1.0, 0.0).is_err());
        assert!(integrate_flow_line(&p, &[0.5], 0, 1e-3, 1.0, 0.0).is_err());
    }
}
