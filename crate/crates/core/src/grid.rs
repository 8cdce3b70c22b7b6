//! Uniform grid on the unit interval with trapezoidal quadrature and a
//! reflection-spectral derivative.
//!
//! Paths carry the boundary condition "imaginary part vanishes at both
//! endpoints".  Such a path extends to a smooth periodic path on a doubled
//! interval by conjugate reflection, `v(-t) = conj(v(t))`, so its t-derivative
//! can be evaluated by a Fourier multiplier on the doubled grid.  On
//! trigonometric data (the closed-form critical paths) this derivative is
//! exact to rounding, which the critical-point enumeration relies on; on
//! merely smooth compatible data it converges faster than any fixed
//! difference stencil.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Discretisation of `[0, 1]` into `nt` equal intervals (`nt + 1` nodes).
#[derive(Clone)]
pub struct TimeGrid {
    nt: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for TimeGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TimeGrid").field("nt", &self.nt).finish()
    }
}

impl TimeGrid {
    /// Build a grid with `nt >= 2` intervals.
    pub fn new(nt: usize) -> Self {
        assert!(nt >= 2, "TimeGrid needs at least two intervals");
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(2 * nt);
        let inv = planner.plan_fft_inverse(2 * nt);
        TimeGrid { nt, fwd, inv }
    }

    /// Number of intervals.
    pub fn nt(&self) -> usize {
        self.nt
    }

    /// Number of nodes (`nt + 1`).
    pub fn nodes(&self) -> usize {
        self.nt + 1
    }

    /// Grid spacing `1/nt`.
    pub fn dt(&self) -> f64 {
        1.0 / self.nt as f64
    }

    /// Node coordinate `t_i = i/nt`.
    pub fn node(&self, i: usize) -> f64 {
        i as f64 / self.nt as f64
    }

    /// Trapezoidal integral of nodal values over `[0, 1]`.
    pub fn trapz(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.nodes());
        let inner: f64 = f[1..self.nt].iter().sum();
        (0.5 * (f[0] + f[self.nt]) + inner) * self.dt()
    }

    /// Cumulative trapezoidal integral; output node `i` holds the integral
    /// over `[0, t_i]`, so the first entry is exactly zero.
    pub fn cumtrapz(&self, f: &[f64]) -> Vec<f64> {
        debug_assert_eq!(f.len(), self.nodes());
        let mut out = Vec::with_capacity(self.nodes());
        let mut acc = 0.0;
        out.push(0.0);
        for i in 0..self.nt {
            acc += 0.5 * self.dt() * (f[i] + f[i + 1]);
            out.push(acc);
        }
        out
    }

    /// Spectral t-derivative of a single complex component sampled on the
    /// nodes, assuming the conjugate-reflection extension described in the
    /// module docs.  Input and output have `nt + 1` entries.
    pub fn deriv_reflected(&self, v: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(v.len(), self.nodes());
        let n2 = 2 * self.nt;
        let mut buf: Vec<Complex64> = Vec::with_capacity(n2);
        buf.extend_from_slice(&v[..self.nt + 1]);
        for i in self.nt + 1..n2 {
            buf.push(v[n2 - i].conj());
        }
        self.fwd.process(&mut buf);
        // Multiply mode j by i*pi*j (frequencies on the doubled interval of
        // length 2); drop the unmatched Nyquist mode.
        for (j, c) in buf.iter_mut().enumerate() {
            let freq = if j < self.nt {
                j as f64
            } else if j == self.nt {
                0.0
            } else {
                j as f64 - n2 as f64
            };
            *c *= Complex64::new(0.0, std::f64::consts::PI * freq);
        }
        self.inv.process(&mut buf);
        let scale = 1.0 / n2 as f64;
        buf[..self.nt + 1].iter().map(|c| c * scale).collect()
    }

    /// Adjoint of [`deriv_reflected`](Self::deriv_reflected) with respect to
    /// the trapezoidal real inner product `(a, b) -> trapz(Re(conj a * b))`.
    ///
    /// Needed when differentiating functionals that contain the spectral
    /// derivative: `<D v, w>_trapz = <v, D* w>_trapz` holds to rounding for
    /// arbitrary nodal vectors, with no symmetry assumption on the inputs.
    pub fn deriv_reflected_adjoint_trapz(&self, w: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(w.len(), self.nodes());
        let n2 = 2 * self.nt;
        // embed with trapezoidal-to-uniform weight transfer: interior nodes
        // carry weight 1, the shared endpoints 1/2, and the uniform circle
        // product carries 1/(2 nt)
        let mut buf: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n2];
        buf[0] = w[0];
        buf[self.nt] = w[self.nt];
        for i in 1..self.nt {
            buf[i] = 2.0 * w[i];
        }
        self.fwd.process(&mut buf);
        // negated derivative multiplier: the spectral derivative is
        // skew-adjoint on the doubled circle
        for (j, c) in buf.iter_mut().enumerate() {
            let freq = if j < self.nt {
                j as f64
            } else if j == self.nt {
                0.0
            } else {
                j as f64 - n2 as f64
            };
            *c *= Complex64::new(0.0, -std::f64::consts::PI * freq);
        }
        self.inv.process(&mut buf);
        let scale = 1.0 / n2 as f64;
        // fold the reflected half back: conjugate transpose of the embedding
        let mut out = Vec::with_capacity(self.nodes());
        out.push(buf[0] * scale);
        for i in 1..self.nt {
            out.push((buf[i] + buf[n2 - i].conj()) * (0.5 * scale));
        }
        out.push(buf[self.nt] * scale);
        out
    }

    /// Second-order finite-difference derivative of real nodal values:
    /// central in the interior, one-sided three-point at the endpoints.
    /// Exact on quadratics; used for quantities without a reflection
    /// structure, such as gauge-rotation angles.
    pub fn deriv_central(&self, f: &[f64]) -> Vec<f64> {
        debug_assert_eq!(f.len(), self.nodes());
        let n = self.nt;
        let h = self.dt();
        let mut out = Vec::with_capacity(self.nodes());
        out.push((-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h));
        for i in 1..n {
            out.push((f[i + 1] - f[i - 1]) / (2.0 * h));
        }
        out.push((3.0 * f[n] - 4.0 * f[n - 1] + f[n - 2]) / (2.0 * h));
        out
    }

    /// Trapezoidal node weight of node `i` (1/2 at the ends, 1 inside),
    /// without the `dt` factor.
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.nt {
            0.5
        } else {
            1.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn trapz_constant_and_linear() {
        let g = TimeGrid::new(7);
        let ones = vec![1.0; g.nodes()];
        assert_abs_diff_eq!(g.trapz(&ones), 1.0, epsilon = 1e-15);
        let lin: Vec<f64> = (0..g.nodes()).map(|i| g.node(i)).collect();
        assert_abs_diff_eq!(g.trapz(&lin), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn cumtrapz_starts_at_zero_and_ends_at_trapz() {
        let g = TimeGrid::new(33);
        let f: Vec<f64> = (0..g.nodes()).map(|i| (2.5 * g.node(i)).cos()).collect();
        let cum = g.cumtrapz(&f);
        assert_eq!(cum[0], 0.0);
        assert_abs_diff_eq!(cum[g.nt()], g.trapz(&f), epsilon = 1e-15);
    }

    #[test]
    fn derivative_exact_on_half_turn_exponentials() {
        // e^{-i pi m t} extends to a pure Fourier mode on the doubled grid,
        // so its derivative must come out exact to rounding.
        for nt in [8usize, 13, 256] {
            let g = TimeGrid::new(nt);
            for m in [-3i64, -1, 0, 1, 2, 5] {
                let v: Vec<Complex64> = (0..g.nodes())
                    .map(|i| Complex64::from_polar(1.0, -PI * m as f64 * g.node(i)))
                    .collect();
                let dv = g.deriv_reflected(&v);
                for i in 0..g.nodes() {
                    let exact = Complex64::new(0.0, -PI * m as f64) * v[i];
                    assert!((dv[i] - exact).norm() < 2e-11, "nt={nt} m={m} i={i}");
                }
            }
        }
    }

    #[test]
    fn derivative_exact_on_cos_sin_combinations() {
        let g = TimeGrid::new(16);
        // Real part even-extends, imaginary part odd-extends.
        let v: Vec<Complex64> = (0..g.nodes())
            .map(|i| {
                let t = g.node(i);
                Complex64::new(0.3 + (2.0 * PI * t).cos(), (3.0 * PI * t).sin())
            })
            .collect();
        let dv = g.deriv_reflected(&v);
        for i in 0..g.nodes() {
            let t = g.node(i);
            let exact = Complex64::new(
                -2.0 * PI * (2.0 * PI * t).sin(),
                3.0 * PI * (3.0 * PI * t).cos(),
            );
            assert!((dv[i] - exact).norm() < 1e-11);
        }
    }

    #[test]
    fn derivative_first_order_when_extension_has_curvature_jump() {
        // t - t^3 vanishes at both ends but its second derivative does not,
        // so the implied odd periodic extension has a curvature jump at t = 1
        // and the derivative converges at first order in 1/nt.
        let sample = |nt: usize| -> f64 {
            let g = TimeGrid::new(nt);
            let v: Vec<Complex64> = (0..g.nodes())
                .map(|i| {
                    let t = g.node(i);
                    Complex64::new((1.3 * t).exp(), t * (1.0 - t) * (1.0 + t))
                })
                .collect();
            let dv = g.deriv_reflected(&v);
            (0..g.nodes())
                .map(|i| {
                    let t = g.node(i);
                    let exact = 1.0 - 3.0 * t * t;
                    (dv[i].im - exact).abs()
                })
                .fold(0.0, f64::max)
        };
        let coarse = sample(32);
        let fine = sample(64);
        assert!(fine <= coarse / 1.8 + 1e-12, "coarse {coarse} fine {fine}");
        assert!(sample(128) <= coarse / 3.5 + 1e-12);
    }

    #[test]
    fn adjoint_pairing_identity_on_arbitrary_data() {
        // <D a, b> = <a, D* b> under the trapezoidal real pairing, for data
        // with no reflection symmetry at all
        for nt in [8usize, 13, 64] {
            let g = TimeGrid::new(nt);
            let a: Vec<Complex64> = (0..g.nodes())
                .map(|i| {
                    let x = i as f64;
                    Complex64::new((0.37 * x).sin() + 0.2, (0.81 * x).cos() - 0.4)
                })
                .collect();
            let b: Vec<Complex64> = (0..g.nodes())
                .map(|i| {
                    let x = i as f64 + 0.5;
                    Complex64::new((1.17 * x).cos(), (0.23 * x).sin() * 0.7)
                })
                .collect();
            let pair = |u: &[Complex64], w: &[Complex64]| -> f64 {
                let prod: Vec<f64> = u.iter().zip(w).map(|(x, y)| (x.conj() * y).re).collect();
                g.trapz(&prod)
            };
            let lhs = pair(&g.deriv_reflected(&a), &b);
            let rhs = pair(&a, &g.deriv_reflected_adjoint_trapz(&b));
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
        }
    }

    #[test]
    fn central_derivative_exact_on_quadratics() {
        let g = TimeGrid::new(11);
        let f: Vec<f64> = (0..g.nodes())
            .map(|i| {
                let t = g.node(i);
                2.0 - 1.5 * t + 0.75 * t * t
            })
            .collect();
        let df = g.deriv_central(&f);
        for i in 0..g.nodes() {
            let t = g.node(i);
            assert_abs_diff_eq!(df[i], -1.5 + 1.5 * t, epsilon = 1e-12);
        }
    }

    #[test]
    fn derivative_third_order_when_extension_matches_to_curvature() {
        // t - (10/7) t^3 + (3/7) t^5 has value and second derivative zero at
        // both ends, so the odd extension is C^3 and the derivative gains two
        // orders.  The real part is band-limited and must stay exact, which
        // also checks that real and imaginary channels do not mix.
        let sample = |nt: usize| -> (f64, f64) {
            let g = TimeGrid::new(nt);
            let v: Vec<Complex64> = (0..g.nodes())
                .map(|i| {
                    let t = g.node(i);
                    Complex64::new(
                        (PI * t).cos(),
                        t - 10.0 / 7.0 * t.powi(3) + 3.0 / 7.0 * t.powi(5),
                    )
                })
                .collect();
            let dv = g.deriv_reflected(&v);
            let mut err_im: f64 = 0.0;
            let mut err_re: f64 = 0.0;
            for i in 0..g.nodes() {
                let t = g.node(i);
                let exact_im = 1.0 - 30.0 / 7.0 * t * t + 15.0 / 7.0 * t.powi(4);
                let exact_re = -PI * (PI * t).sin();
                err_im = err_im.max((dv[i].im - exact_im).abs());
                err_re = err_re.max((dv[i].re - exact_re).abs());
            }
            (err_im, err_re)
        };
        let (coarse, re32) = sample(32);
        let (fine, re64) = sample(64);
        assert!(fine <= coarse / 6.0, "coarse {coarse} fine {fine}");
        assert!(re32 < 1e-12 && re64 < 1e-12, "band-limited channel drifted");
    }
}
