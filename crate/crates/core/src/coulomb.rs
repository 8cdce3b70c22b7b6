//! Coulomb gauge fixing: the constant-`eta` slice, its induced metric, and
//! the gauge-fixed flow equations.
//!
//! Projecting onto the slice uses the contractible gauge loop whose rate is
//! the `eta` fluctuation, so it never changes winding or action.  On the
//! slice, the flow couples to two derived potentials: `kappa`, the running
//! integral of the infinitesimal-action adjoint of the Hamiltonian
//! gradient, and `xi_v`, a Dirichlet potential built from the moment map
//! and `kappa`.  The slice metric solves a block-tridiagonal Poisson
//! problem per pairing.

use crate::error::{Error, Result};
use crate::families::HamiltonianFamily;
use crate::linalg::solve_block_tridiagonal;
use crate::loopspace::PathSpace;
use crate::path::{PathState, PathTangent};
use crate::torus::TorusAction;
use crate::gauge::GaugeTransform;
use num_complex::Complex64;

/// Derived Coulomb-slice quantities of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct CoulombData {
    /// Running integral of `L* grad H` along the path, one `k`-vector per
    /// node; identically zero for invariant Hamiltonians.
    pub kappa: Vec<Vec<f64>>,
    /// Time average of `kappa`.
    pub kappa_bar: Vec<f64>,
    /// Time average of the moment map along the path.
    pub mu_bar: Vec<f64>,
    /// Zero-boundary potential: the running integral of `mu + kappa` minus
    /// its linear-in-time mean, exactly zero at both interval ends.
    pub xi_v: Vec<Vec<f64>>,
}

/// Project a state onto the constant-`eta` slice.  Returns the projected
/// state together with the contractible gauge transformation used.
pub fn coulomb_project(
    space: &PathSpace,
    state: &PathState,
) -> Result<(PathState, GaugeTransform)> {
    space.check_state(state)?;
    let grid = space.grid();
    let k = state.k();
    let rows = grid.nodes();
    let mut eta_bar = vec![0.0; k];
    for (l, e) in eta_bar.iter_mut().enumerate() {
        *e = grid.trapz(&state.eta_component(l));
    }
    let rate: Vec<Vec<f64>> = (0..rows)
        .map(|i| {
            state.eta_row(i)
                .iter()
                .zip(&eta_bar)
                .map(|(e, b)| e - b)
                .collect()
        })
        .collect();
    let transform = GaugeTransform::from_rate(
        space.torus(),
        grid,
        rate,
        crate::torus::GroupElement::identity(k),
    )?;
    let mut projected = transform.apply(space.torus(), state)?;
    // the eta rows are analytically constant; store the constant itself so
    // downstream constancy checks see zero spread
    for row in projected.eta_rows_mut() {
        row.copy_from_slice(&eta_bar);
    }
    Ok((projected, transform))
}

/// Compute the slice potentials of a state under a Hamiltonian family.
pub fn compute_coulomb_data(
    space: &PathSpace,
    state: &PathState,
    h: &HamiltonianFamily,
) -> Result<CoulombData> {
    space.check_state(state)?;
    let grid = space.grid();
    let torus = space.torus();
    let rows = grid.nodes();
    let k = torus.k();
    // kappa: running integral of L* grad H
    let mut integrand = vec![vec![0.0; k]; rows];
    for (i, row) in integrand.iter_mut().enumerate() {
        let t = grid.node(i);
        let vi = state.v_row(i);
        let gh = h.gradient(t, vi);
        *row = torus.l_adjoint(vi, &gh);
    }
    let mut kappa = vec![vec![0.0; k]; rows];
    for l in 0..k {
        let col: Vec<f64> = integrand.iter().map(|r| r[l]).collect();
        let c = grid.cumtrapz(&col);
        for (i, row) in kappa.iter_mut().enumerate() {
            row[l] = c[i];
        }
    }
    let kappa_bar: Vec<f64> = (0..k)
        .map(|l| grid.trapz(&kappa.iter().map(|r| r[l]).collect::<Vec<f64>>()))
        .collect();
    let mu_rows: Vec<Vec<f64>> = (0..rows)
        .map(|i| torus.moment_map(state.v_row(i)))
        .collect();
    let mu_bar: Vec<f64> = (0..k)
        .map(|l| grid.trapz(&mu_rows.iter().map(|r| r[l]).collect::<Vec<f64>>()))
        .collect();
    // xi_v: running integral of mu + kappa, de-trended so both ends vanish
    // bitwise (the last node coordinate is exactly 1)
    let mut xi_v = vec![vec![0.0; k]; rows];
    for l in 0..k {
        let col: Vec<f64> = (0..rows).map(|i| mu_rows[i][l] + kappa[i][l]).collect();
        let c = grid.cumtrapz(&col);
        let total = c[rows - 1];
        for (i, row) in xi_v.iter_mut().enumerate() {
            row[l] = c[i] - grid.node(i) * total;
        }
    }
    Ok(CoulombData {
        kappa,
        kappa_bar,
        mu_bar,
        xi_v,
    })
}

/// Gradient of the action seen from the Coulomb slice: the `v`-sector picks
/// up the `xi_v` potential, and the `eta`-sector is the constant `mu_bar`
/// (replicated across rows for uniform tangent handling).
pub fn coulomb_gradient(
    space: &PathSpace,
    state: &PathState,
    h: &HamiltonianFamily,
) -> Result<PathTangent> {
    let data = compute_coulomb_data(space, state, h)?;
    let grid = space.grid();
    let torus = space.torus();
    let rows = grid.nodes();
    let dv = space.velocity_rows(state);
    let mut vhat = Vec::with_capacity(rows);
    for i in 0..rows {
        let t = grid.node(i);
        let vi = state.v_row(i);
        let leta = torus.l_operator(vi, state.eta_row(i));
        let xh = h.vector_field(t, vi);
        let lxi = torus.l_operator(vi, &data.xi_v[i]);
        let row: Vec<Complex64> = (0..vi.len())
            .map(|j| {
                let f = dv[i][j] + leta[j] - xh[j];
                lxi[j] + Complex64::new(-f.im, f.re)
            })
            .collect();
        vhat.push(row);
    }
    for i in [0, rows - 1] {
        for c in vhat[i].iter_mut() {
            c.im = 0.0;
        }
    }
    let etahat = vec![data.mu_bar.clone(); rows];
    Ok(PathTangent { vhat, etahat })
}

/// Solve the slice Poisson problem `(L*L - Laplacian) xi = source` with
/// zero Dirichlet data, where `L*L` is evaluated along the given state.
/// Returns full node rows including the zero ends.
pub fn coulomb_potential(
    space: &PathSpace,
    at: &PathState,
    source: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>> {
    space.check_state(at)?;
    let grid = space.grid();
    let torus = space.torus();
    let nt = grid.nt();
    let k = torus.k();
    if source.len() != grid.nodes() || source.iter().any(|r| r.len() != k) {
        return Err(Error::GridMismatch {
            what: "potential source rows",
        });
    }
    if nt < 2 {
        return Err(Error::GridMismatch {
            what: "potential grid (needs interior nodes)",
        });
    }
    let inv_dt2 = (nt * nt) as f64;
    let nb = nt - 1;
    let mut diag = vec![0.0; nb * k * k];
    let mut rhs = vec![0.0; nb * k];
    for b in 0..nb {
        let i = b + 1;
        let gram = torus.l_gram(at.v_row(i));
        for r in 0..k {
            for c in 0..k {
                let mut x = gram[r * k + c];
                if r == c {
                    x += 2.0 * inv_dt2;
                }
                diag[b * k * k + r * k + c] = x;
            }
        }
        rhs[b * k..(b + 1) * k].copy_from_slice(&source[i]);
    }
    let interior = solve_block_tridiagonal(&diag, -inv_dt2, &rhs, nb, k)?;
    let mut out = vec![vec![0.0; k]; grid.nodes()];
    for b in 0..nb {
        out[b + 1].copy_from_slice(&interior[b * k..(b + 1) * k]);
    }
    Ok(out)
}

/// The Coulomb-slice metric on tangents with constant `eta`-sector.
///
/// `g_c(u, w) = ∫ <u_v - L xi_u, w_v> dt + <u_eta, w_eta>` where `xi_u`
/// solves the slice Poisson problem sourced by `L* u_v`.  The discrete
/// Dirichlet Laplacian is symmetric under the uniform interior weights, so
/// this expression agrees with its mirror image exactly.
pub fn coulomb_metric_pair(
    space: &PathSpace,
    at: &PathState,
    u: &PathTangent,
    w: &PathTangent,
) -> Result<f64> {
    space.check_state(at)?;
    let grid = space.grid();
    let torus = space.torus();
    let rows = grid.nodes();
    let u_eta = constant_eta(u)?;
    let w_eta = constant_eta(w)?;
    let source: Vec<Vec<f64>> = (0..rows)
        .map(|i| torus.l_adjoint(at.v_row(i), &u.vhat[i]))
        .collect();
    let xi = coulomb_potential(space, at, &source)?;
    let mut integrand = vec![0.0; rows];
    for i in 0..rows {
        let lxi = torus.l_operator(at.v_row(i), &xi[i]);
        integrand[i] = u.vhat[i]
            .iter()
            .zip(&w.vhat[i])
            .zip(&lxi)
            .map(|((uj, wj), lj)| ((uj - lj).conj() * wj).re)
            .sum();
    }
    let eta_part: f64 = u_eta.iter().zip(&w_eta).map(|(a, b)| a * b).sum();
    Ok(grid.trapz(&integrand) + eta_part)
}

/// Residual of the gauge-fixed flow equations along a discretized flow
/// line with spacing `ds`, measured in sup norm.  The time derivative of
/// `xi_v` is substituted in closed form from its defining integrand.
pub fn coulomb_flow_residual(
    space: &PathSpace,
    h: &HamiltonianFamily,
    line: &[PathState],
    ds: f64,
) -> Result<f64> {
    if line.len() < 2 {
        return Err(Error::GridMismatch {
            what: "flow line length",
        });
    }
    if !(ds.is_finite() && ds > 0.0) {
        return Err(Error::InvalidParameter {
            what: "flow line spacing",
            why: format!("{ds}"),
        });
    }
    let grid = space.grid();
    let torus = space.torus();
    let rows = grid.nodes();
    let mut worst = 0.0f64;
    for p in 0..line.len() - 1 {
        let state = &line[p];
        let next = &line[p + 1];
        space.check_state(state)?;
        space.check_state(next)?;
        let data = compute_coulomb_data(space, state, h)?;
        let dv = space.velocity_rows(state);
        for i in 0..rows {
            let t = grid.node(i);
            let vi = state.v_row(i);
            let leta = torus.l_operator(vi, state.eta_row(i));
            let xh = h.vector_field(t, vi);
            let lxi = torus.l_operator(vi, &data.xi_v[i]);
            let mu = torus.moment_map(vi);
            for j in 0..vi.len() {
                let f = dv[i][j] + leta[j] - xh[j];
                let rhs = lxi[j] + Complex64::new(-f.im, f.re);
                let dsv = (next.v_row(i)[j] - vi[j]) / ds;
                worst = worst.max((dsv + rhs).norm());
            }
            for l in 0..torus.k() {
                // d/dt xi_v = (mu + kappa) - (mu_bar + kappa_bar), exact
                // from the defining integrand
                let dtxi =
                    (mu[l] + data.kappa[i][l]) - (data.mu_bar[l] + data.kappa_bar[l]);
                let dse = (next.eta_row(i)[l] - state.eta_row(i)[l]) / ds;
                let res = dse - dtxi + mu[l] + data.kappa[i][l] - data.kappa_bar[l];
                worst = worst.max(res.abs());
            }
        }
    }
    Ok(worst)
}

/// A certified constant dominating the sup-norm oscillation of `kappa`
/// along any path: `2 x 1.5 x` a dense deterministic sample of
/// `sup ||L* grad H||` over the support of the Hamiltonian.
pub fn kappa_bound_constant(torus: &TorusAction, h: &HamiltonianFamily) -> f64 {
    let radius = h.support_radius();
    if radius == 0.0 {
        return 0.0;
    }
    let n = torus.n();
    let mut state: u64 = 0x2545f4914f6cdd1d;
    let mut next = move || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    let mut sup = 0.0f64;
    for step in 0..4000 {
        let t = (step % 101) as f64 / 100.0;
        let z: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(next() * radius, next() * radius))
            .collect();
        let g = h.gradient(t, &z);
        for x in torus.l_adjoint(&z, &g) {
            sup = sup.max(x.abs());
        }
    }
    2.0 * 1.5 * sup
}

fn constant_eta(u: &PathTangent) -> Result<Vec<f64>> {
    let k = u.etahat.first().map(Vec::len).unwrap_or(0);
    let mut out = vec![0.0; k];
    let mut scale = 1.0f64;
    for row in &u.etahat {
        for (l, x) in row.iter().enumerate() {
            scale = scale.max(x.abs());
            let d = (x - u.etahat[0][l]).abs();
            if d > 1e-9 * scale {
                return Err(Error::NonConstantEta { spread: d });
            }
        }
        let _ = &mut out;
    }
    out.copy_from_slice(&u.etahat[0]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{AlmostComplexFamily, TimeProfile};
    use crate::grid::TimeGrid;
    use crate::sample::{sample_path, sample_tangent};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn circle_space(nt: usize) -> PathSpace {
        PathSpace::new(TimeGrid::new(nt), TorusAction::circle(-0.5))
    }

    fn offset_bump() -> HamiltonianFamily {
        HamiltonianFamily::bump(
            0.6,
            vec![Complex64::new(0.4, -0.2)],
            1.3,
            TimeProfile::SinSq,
        )
        .unwrap()
    }

    #[test]
    fn projection_gives_constant_eta_and_is_idempotent() {
        let space = circle_space(32);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..5 {
            let p = sample_path(space.grid(), 1, 1, 8, 1.0, &mut rng);
            let (q, _) = coulomb_project(&space, &p).unwrap();
            let col = q.eta_component(0);
            let spread = col.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
                - col.iter().fold(f64::INFINITY, |a, &b| a.min(b));
            assert_eq!(spread, 0.0);
            let (qq, again) = coulomb_project(&space, &q).unwrap();
            assert!(q.sup_distance(&qq) < 1e-12);
            assert!(again.endpoint()[0].abs() < 1e-12);
        }
    }

    #[test]
    fn slice_potentials_vanish_at_ends_bitwise() {
        let space = circle_space(24);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = sample_path(space.grid(), 1, 1, 6, 1.0, &mut rng);
        let data = compute_coulomb_data(&space, &p, &offset_bump()).unwrap();
        assert_eq!(data.xi_v[0][0], 0.0);
        assert_eq!(data.xi_v[24][0], 0.0);
        assert_eq!(data.kappa[0][0], 0.0);
        // means agree with direct quadrature
        let mu_direct = space.grid().trapz(
            &(0..25)
                .map(|i| space.torus().moment_map(p.v_row(i))[0])
                .collect::<Vec<f64>>(),
        );
        assert_abs_diff_eq!(data.mu_bar[0], mu_direct, epsilon = 1e-14);
    }

    #[test]
    fn invariant_hamiltonian_has_identically_zero_kappa() {
        let space = circle_space(16);
        let centered = HamiltonianFamily::bump(
            0.8,
            vec![Complex64::new(0.0, 0.0)],
            1.5,
            TimeProfile::One,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let p = sample_path(space.grid(), 1, 1, 6, 1.2, &mut rng);
            let data = compute_coulomb_data(&space, &p, &centered).unwrap();
            // the integrand Im(conj z · c z) is analytically zero; floats
            // leave one rounding step per product, so the running integral
            // sits at the accumulation floor rather than at bitwise zero
            let worst = data
                .kappa
                .iter()
                .flatten()
                .chain(data.kappa_bar.iter())
                .fold(0.0f64, |a, &x| a.max(x.abs()));
            assert!(worst < 1e-15, "kappa floor {worst:e}");
        }
    }

    #[test]
    fn gradient_vanishes_at_critical_points() {
        let space = circle_space(32);
        for (m, s) in [(0i64, 1i8), (1, 1), (-2, -1)] {
            let rep = space.critical_representative(m, s).unwrap();
            let g = coulomb_gradient(&space, &rep, &HamiltonianFamily::Zero).unwrap();
            assert!(g.sup_norm() < 1e-11, "m={m}: {:e}", g.sup_norm());
        }
    }

    #[test]
    fn potential_solution_satisfies_equation() {
        let space = circle_space(24);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let at = sample_path(space.grid(), 1, 1, 6, 1.0, &mut rng);
        let probe = sample_path(space.grid(), 1, 1, 6, 1.0, &mut rng);
        let source: Vec<Vec<f64>> = (0..25)
            .map(|i| space.torus().l_adjoint(at.v_row(i), probe.v_row(i)))
            .collect();
        let xi = coulomb_potential(&space, &at, &source).unwrap();
        assert_eq!(xi[0][0], 0.0);
        assert_eq!(xi[24][0], 0.0);
        let inv_dt2 = (24.0f64 * 24.0).powi(1);
        let mut worst = 0.0f64;
        for i in 1..24 {
            let gram = space.torus().l_gram(at.v_row(i));
            let lhs = gram[0] * xi[i][0]
                + inv_dt2 * (2.0 * xi[i][0] - xi[i - 1][0] - xi[i + 1][0]);
            worst = worst.max((lhs - source[i][0]).abs());
        }
        assert!(worst < 1e-9, "plug-back residual {worst:e}");
    }

    #[test]
    fn slice_metric_is_symmetric_and_positive() {
        let space = circle_space(24);
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let at = sample_path(space.grid(), 1, 1, 6, 1.0, &mut rng);
        let mut u = sample_tangent(space.grid(), 1, 1, 6, 1.0, &mut rng);
        let mut w = sample_tangent(space.grid(), 1, 1, 6, 1.0, &mut rng);
        let ue = u.etahat[0].clone();
        let we = w.etahat[0].clone();
        for row in u.etahat.iter_mut() {
            row.copy_from_slice(&ue);
        }
        for row in w.etahat.iter_mut() {
            row.copy_from_slice(&we);
        }
        let a = coulomb_metric_pair(&space, &at, &u, &w).unwrap();
        let b = coulomb_metric_pair(&space, &at, &w, &u).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-11 * (1.0 + a.abs()));
        assert!(coulomb_metric_pair(&space, &at, &u, &u).unwrap() > 0.0);
    }

    #[test]
    fn varying_eta_sector_is_rejected_by_slice_metric() {
        let space = circle_space(16);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let at = sample_path(space.grid(), 1, 1, 5, 1.0, &mut rng);
        let u = sample_tangent(space.grid(), 1, 1, 5, 1.0, &mut rng);
        assert!(matches!(
            coulomb_metric_pair(&space, &at, &u, &u),
            Err(Error::NonConstantEta { .. })
        ));
    }

    #[test]
    fn stationary_line_has_zero_flow_residual() {
        let space = circle_space(16);
        let rep = space.critical_representative(1, 1).unwrap();
        let line = vec![rep.clone(), rep.clone(), rep];
        let r = coulomb_flow_residual(&space, &HamiltonianFamily::Zero, &line, 0.01).unwrap();
        assert!(r < 1e-11, "residual {r:e}");
    }

    #[test]
    fn kappa_oscillation_obeys_certified_bound() {
        let space = circle_space(16);
        let h = offset_bump();
        let c = kappa_bound_constant(space.torus(), &h);
        assert!(c > 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for _ in 0..200 {
            let p = sample_path(space.grid(), 1, 1, 8, 1.0, &mut rng);
            let data = compute_coulomb_data(&space, &p, &h).unwrap();
            let osc = data
                .kappa
                .iter()
                .map(|r| (r[0] - data.kappa_bar[0]).abs())
                .fold(0.0, f64::max);
            assert!(osc <= c, "oscillation {osc} exceeds bound {c}");
        }
        assert_eq!(kappa_bound_constant(space.torus(), &HamiltonianFamily::Zero), 0.0);
    }

    #[test]
    fn slice_gradient_agrees_with_plain_gradient_plus_correction() {
        // the v-sector differs from the unconstrained gradient exactly by
        // the infinitesimal action of xi_v
        let space = circle_space(16);
        let h = offset_bump();
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let p = sample_path(space.grid(), 1, 1, 6, 1.0, &mut rng);
        let plain = space
            .action_gradient(&p, &h, &AlmostComplexFamily::Standard, false)
            .unwrap();
        let slice = coulomb_gradient(&space, &p, &h).unwrap();
        let data = compute_coulomb_data(&space, &p, &h).unwrap();
        for i in 0..=16 {
            let lxi = space.torus().l_operator(p.v_row(i), &data.xi_v[i]);
            for j in 0..1 {
                let want = plain.vhat[i][j] + lxi[j];
                let got = slice.vhat[i][j];
                let diff = if i == 0 || i == 16 {
                    // both sides are boundary-projected
                    (want.re - got.re).abs()
                } else {
                    (want - got).norm()
                };
                assert!(diff < 1e-12, "node {i}: {diff:e}");
            }
        }
    }
}
