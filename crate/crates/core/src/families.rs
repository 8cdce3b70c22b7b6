//! Time-dependent Hamiltonian perturbations and almost complex structures.
//!
//! Both families are compactly supported deformations of trivial data: the
//! Hamiltonians vanish outside a ball, and the almost complex structures
//! equal the standard one outside a ball and at both ends of the time
//! interval.  The latter keeps the boundary projection of gradients the
//! plain real-part projection.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Smooth-in-time scalar profile multiplying a perturbation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeProfile {
    /// Constant 1.
    One,
    /// `sin²(pi t)`: vanishes at both ends of the interval.
    SinSq,
}

impl TimeProfile {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            TimeProfile::One => 1.0,
            TimeProfile::SinSq => {
                let s = (PI * t).sin();
                s * s
            }
        }
    }
}

/// `C²` bump profile `(1 - r²)³` on `[0, 1)`, zero beyond.
fn chi(r2: f64) -> f64 {
    if r2 >= 1.0 {
        0.0
    } else {
        let u = 1.0 - r2;
        u * u * u
    }
}

/// Derivative of `chi` with respect to `r²`.
fn chi_prime_r2(r2: f64) -> f64 {
    if r2 >= 1.0 {
        0.0
    } else {
        let u = 1.0 - r2;
        -3.0 * u * u
    }
}

/// A time-dependent Hamiltonian `h(t, z)` with compact support in `z`.
#[derive(Debug, Clone)]
pub enum HamiltonianFamily {
    /// Identically zero.
    Zero,
    /// `a · s(t) · chi(|z - z₀|²/R²)` — a smooth bump of amplitude `a` on the
    /// ball of radius `R` around `z₀`.
    Bump {
        amplitude: f64,
        center: Vec<Complex64>,
        radius: f64,
        profile: TimeProfile,
    },
}

impl HamiltonianFamily {
    /// Bump constructor with validation.
    pub fn bump(
        amplitude: f64,
        center: Vec<Complex64>,
        radius: f64,
        profile: TimeProfile,
    ) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter {
                what: "bump radius",
                why: format!("{radius}"),
            });
        }
        if !amplitude.is_finite() || center.iter().any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::NonFinite {
                what: "bump parameters",
            });
        }
        Ok(HamiltonianFamily::Bump {
            amplitude,
            center,
            radius,
            profile,
        })
    }

    /// Value `h(t, z)`.
    pub fn value(&self, t: f64, z: &[Complex64]) -> f64 {
        match self {
            HamiltonianFamily::Zero => 0.0,
            HamiltonianFamily::Bump {
                amplitude,
                center,
                radius,
                profile,
            } => {
                let r2 = dist_sqr(z, center) / (radius * radius);
                amplitude * profile.value(t) * chi(r2)
            }
        }
    }

    /// Gradient of `h(t, ·)` at `z` with respect to the standard real metric
    /// on `C^n ≅ R^{2n}`, returned as a complex n-vector.
    pub fn gradient(&self, t: f64, z: &[Complex64]) -> Vec<Complex64> {
        match self {
            HamiltonianFamily::Zero => vec![Complex64::new(0.0, 0.0); z.len()],
            HamiltonianFamily::Bump {
                amplitude,
                center,
                radius,
                profile,
            } => {
                let rr = radius * radius;
                let r2 = dist_sqr(z, center) / rr;
                let c = amplitude * profile.value(t) * chi_prime_r2(r2) * 2.0 / rr;
                z.iter()
                    .zip(center)
                    .map(|(zj, cj)| c * (zj - cj))
                    .collect()
            }
        }
    }

    /// Hamiltonian vector field `X_h = -i ∇h` (the sign that makes the
    /// standing flow equation the negative gradient flow of the action).
    pub fn vector_field(&self, t: f64, z: &[Complex64]) -> Vec<Complex64> {
        let g = self.gradient(t, z);
        g.into_iter().map(|v| Complex64::new(v.im, -v.re)).collect()
    }

    /// A radius `R` with `h(t, z) = 0` whenever `|z| >= R`.
    pub fn support_radius(&self) -> f64 {
        match self {
            HamiltonianFamily::Zero => 0.0,
            HamiltonianFamily::Bump { center, radius, .. } => {
                let c: f64 = center.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                c + radius
            }
        }
    }

    /// Whether the family is invariant under every diagonal torus action
    /// (true exactly when it depends on `|z|` alone).
    pub fn invariant(&self) -> bool {
        match self {
            HamiltonianFamily::Zero => true,
            HamiltonianFamily::Bump { center, .. } => {
                center.iter().all(|c| c.norm_sqr() == 0.0)
            }
        }
    }
}

fn dist_sqr(z: &[Complex64], c: &[Complex64]) -> f64 {
    debug_assert_eq!(z.len(), c.len());
    z.iter().zip(c).map(|(a, b)| (a - b).norm_sqr()).sum()
}

/// A time-dependent compatible almost complex structure on `C^n`, standard
/// outside a ball and at `t = 0, 1`.
///
/// The non-standard member stretches each coordinate plane by a common
/// factor `λ(t, z) = 1 + a · sin(pi t) · chi(|z|²/R²)`, acting as
/// `(x, y) ↦ (-λ y, x/λ)` on every coordinate; the associated metric is
/// `dx²/λ + λ dy²` per coordinate.
#[derive(Debug, Clone)]
pub enum AlmostComplexFamily {
    /// Multiplication by `i` everywhere.
    Standard,
    /// The stretched family described above; `|amplitude| < 1` keeps λ
    /// positive.
    Stretched { amplitude: f64, radius: f64 },
}

impl AlmostComplexFamily {
    /// Stretched constructor: validates the parameters and sample-certifies
    /// the square and compatibility conditions.
    pub fn stretched(amplitude: f64, radius: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude.abs() < 1.0) {
            return Err(Error::InvalidParameter {
                what: "stretch amplitude",
                why: format!("need |a| < 1, got {amplitude}"),
            });
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter {
                what: "stretch radius",
                why: format!("{radius}"),
            });
        }
        let family = AlmostComplexFamily::Stretched { amplitude, radius };
        family.certify()?;
        Ok(family)
    }

    fn lambda(&self, t: f64, z: &[Complex64]) -> f64 {
        match self {
            AlmostComplexFamily::Standard => 1.0,
            AlmostComplexFamily::Stretched { amplitude, radius } => {
                let r2 = z.iter().map(|c| c.norm_sqr()).sum::<f64>() / (radius * radius);
                1.0 + amplitude * (PI * t).sin() * chi(r2)
            }
        }
    }

    /// Whether this is the standard structure everywhere.
    pub fn is_standard(&self) -> bool {
        matches!(self, AlmostComplexFamily::Standard)
    }

    /// Apply `J(t, z)` to the tangent vector `u` at `z`.
    pub fn apply(&self, t: f64, z: &[Complex64], u: &[Complex64]) -> Vec<Complex64> {
        match self {
            AlmostComplexFamily::Standard => {
                u.iter().map(|c| Complex64::new(-c.im, c.re)).collect()
            }
            AlmostComplexFamily::Stretched { .. } => {
                let l = self.lambda(t, z);
                u.iter()
                    .map(|c| Complex64::new(-l * c.im, c.re / l))
                    .collect()
            }
        }
    }

    /// The compatible metric `g(u, w) = ω(u, J w)` at `(t, z)`.
    pub fn metric(&self, t: f64, z: &[Complex64], u: &[Complex64], w: &[Complex64]) -> f64 {
        match self {
            AlmostComplexFamily::Standard => {
                u.iter().zip(w).map(|(a, b)| (a.conj() * b).re).sum()
            }
            AlmostComplexFamily::Stretched { .. } => {
                let l = self.lambda(t, z);
                u.iter()
                    .zip(w)
                    .map(|(a, b)| a.re * b.re / l + l * a.im * b.im)
                    .sum()
            }
        }
    }

    /// Sample check of `J² = -1` and symmetry/positivity of `ω(·, J·)` on a
    /// deterministic point set.
    pub fn certify(&self) -> Result<()> {
        let n = 2usize;
        let scale = match self {
            AlmostComplexFamily::Standard => 1.0,
            AlmostComplexFamily::Stretched { radius, .. } => 2.0 * radius,
        };
        let mut state: u64 = 0x9e3779b97f4a7c15;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        for step in 0..40 {
            let t = step as f64 / 39.0;
            let z: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(next() * scale, next() * scale))
                .collect();
            let u: Vec<Complex64> = (0..n).map(|_| Complex64::new(next(), next())).collect();
            let w: Vec<Complex64> = (0..n).map(|_| Complex64::new(next(), next())).collect();
            let jju = self.apply(t, &z, &self.apply(t, &z, &u));
            let sq_defect: f64 = jju
                .iter()
                .zip(&u)
                .map(|(a, b)| (a + b).norm())
                .fold(0.0, f64::max);
            if sq_defect > 1e-10 {
                return Err(Error::InvalidParameter {
                    what: "almost complex structure",
                    why: format!("J² + 1 defect {sq_defect:.3e}"),
                });
            }
            let guw = self.metric(t, &z, &u, &w);
            let gwu = self.metric(t, &z, &w, &u);
            if (guw - gwu).abs() > 1e-10 {
                return Err(Error::InvalidParameter {
                    what: "almost complex structure",
                    why: format!("metric asymmetry {:.3e}", (guw - gwu).abs()),
                });
            }
            let guu = self.metric(t, &z, &u, &u);
            let unorm: f64 = u.iter().map(|c| c.norm_sqr()).sum();
            if guu <= 1e-12 * unorm {
                return Err(Error::InvalidParameter {
                    what: "almost complex structure",
                    why: format!("metric not positive: g(u,u) = {guu:.3e}"),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn bump_gradient_matches_finite_differences() {
        let h = HamiltonianFamily::bump(
            0.7,
            vec![cx(0.3, -0.2), cx(0.0, 0.5)],
            1.4,
            TimeProfile::SinSq,
        )
        .unwrap();
        let z = vec![cx(0.5, 0.1), cx(-0.4, 0.2)];
        let t = 0.37;
        let g = h.gradient(t, &z);
        let step = 1e-6;
        for j in 0..2 {
            for (re_dir, part) in [(true, g[j].re), (false, g[j].im)] {
                let mut zp = z.clone();
                let mut zm = z.clone();
                let delta = if re_dir { cx(step, 0.0) } else { cx(0.0, step) };
                zp[j] += delta;
                zm[j] -= delta;
                let fd = (h.value(t, &zp) - h.value(t, &zm)) / (2.0 * step);
                assert_abs_diff_eq!(fd, part, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn bump_vanishes_outside_support() {
        let h =
            HamiltonianFamily::bump(2.0, vec![cx(1.0, 0.0)], 0.5, TimeProfile::One).unwrap();
        let r = h.support_radius();
        assert_abs_diff_eq!(r, 1.5, epsilon = 1e-15);
        let far = vec![cx(r + 0.01, 0.0)];
        assert_eq!(h.value(0.5, &far), 0.0);
        assert!(h.gradient(0.5, &far).iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn bump_support_profile_is_c2_small_near_edge() {
        // triple zero at the support edge: values just inside are tiny
        let h =
            HamiltonianFamily::bump(1.0, vec![cx(0.0, 0.0)], 1.0, TimeProfile::One).unwrap();
        let v = h.value(0.0, &[cx(1.0 - 1e-4, 0.0)]);
        assert!(v > 0.0 && v < 1e-10, "value near edge: {v}");
    }

    #[test]
    fn invariance_flag_tracks_center() {
        let centered =
            HamiltonianFamily::bump(1.0, vec![cx(0.0, 0.0), cx(0.0, 0.0)], 1.0, TimeProfile::One)
                .unwrap();
        assert!(centered.invariant());
        let offset =
            HamiltonianFamily::bump(1.0, vec![cx(0.1, 0.0), cx(0.0, 0.0)], 1.0, TimeProfile::One)
                .unwrap();
        assert!(!offset.invariant());
        assert!(HamiltonianFamily::Zero.invariant());
    }

    #[test]
    fn hamiltonian_field_is_rotated_gradient() {
        let h = HamiltonianFamily::bump(0.9, vec![cx(0.2, 0.1)], 1.0, TimeProfile::One).unwrap();
        let z = vec![cx(0.4, -0.3)];
        let g = h.gradient(0.3, &z);
        let x = h.vector_field(0.3, &z);
        // x = -i g
        assert_abs_diff_eq!(x[0].re, g[0].im, epsilon = 1e-15);
        assert_abs_diff_eq!(x[0].im, -g[0].re, epsilon = 1e-15);
    }

    #[test]
    fn standard_structure_certifies_and_squares_to_minus_one() {
        let j = AlmostComplexFamily::Standard;
        j.certify().unwrap();
        let z = vec![cx(0.3, 0.4)];
        let u = vec![cx(1.0, -2.0)];
        let jju = j.apply(0.2, &z, &j.apply(0.2, &z, &u));
        assert!((jju[0] + u[0]).norm() < 1e-15);
        assert_abs_diff_eq!(j.metric(0.2, &z, &u, &u), 5.0, epsilon = 1e-15);
    }

    #[test]
    fn stretched_structure_compatible_and_standard_at_ends() {
        let j = AlmostComplexFamily::stretched(0.6, 1.5).unwrap();
        let z = vec![cx(0.3, 0.2), cx(-0.1, 0.4)];
        let u = vec![cx(0.5, -1.0), cx(0.2, 0.3)];
        // at t = 0 and 1 the structure is multiplication by i
        for t in [0.0, 1.0] {
            let ju = j.apply(t, &z, &u);
            for (a, b) in ju.iter().zip(&u) {
                assert!((a - Complex64::new(-b.im, b.re)).norm() < 1e-12);
            }
        }
        // in between it is genuinely different but still squares to -1
        let ju = j.apply(0.5, &z, &u);
        assert!((ju[0] - Complex64::new(-u[0].im, u[0].re)).norm() > 1e-3);
        let jju = j.apply(0.5, &z, &ju);
        assert!((jju[0] + u[0]).norm() < 1e-12);
        // compatibility identity omega(Ju, Jw) = omega(u, w)
        let w = vec![cx(-0.7, 0.1), cx(0.9, 0.6)];
        let omega = |a: &[Complex64], b: &[Complex64]| -> f64 {
            a.iter().zip(b).map(|(x, y)| (x.conj() * y).im).sum()
        };
        let jw = j.apply(0.5, &z, &w);
        assert_abs_diff_eq!(omega(&ju, &jw), omega(&u, &w), epsilon = 1e-12);
    }

    #[test]
    fn stretched_structure_rejects_degenerate_amplitude() {
        assert!(AlmostComplexFamily::stretched(1.0, 1.0).is_err());
        assert!(AlmostComplexFamily::stretched(-1.3, 1.0).is_err());
        assert!(AlmostComplexFamily::stretched(0.3, -1.0).is_err());
    }
}
