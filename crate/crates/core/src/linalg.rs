//! Small dense solves and the block-tridiagonal system behind the
//! gauge-fixed metric.
//!
//! The systems are tiny (`k x k` blocks with `k` the torus rank), so a plain
//! partially pivoted LU is all that is needed.

use crate::error::{Error, Result};

/// Solve `m x = b` in place for a dense row-major `dim x dim` matrix.
/// `m` and `b` are consumed as scratch.
pub fn solve_dense(mut m: Vec<f64>, mut b: Vec<f64>, dim: usize) -> Result<Vec<f64>> {
    debug_assert_eq!(m.len(), dim * dim);
    debug_assert_eq!(b.len(), dim);
    for col in 0..dim {
        // partial pivot
        let mut piv = col;
        for r in col + 1..dim {
            if m[r * dim + col].abs() > m[piv * dim + col].abs() {
                piv = r;
            }
        }
        if m[piv * dim + col].abs() < 1e-300 {
            return Err(Error::SingularSystem {
                what: "dense pivot vanished",
            });
        }
        if piv != col {
            for j in 0..dim {
                m.swap(col * dim + j, piv * dim + j);
            }
            b.swap(col, piv);
        }
        let d = m[col * dim + col];
        for r in col + 1..dim {
            let f = m[r * dim + col] / d;
            if f == 0.0 {
                continue;
            }
            for j in col..dim {
                m[r * dim + j] -= f * m[col * dim + j];
            }
            b[r] -= f * b[col];
        }
    }
    for col in (0..dim).rev() {
        let mut acc = b[col];
        for j in col + 1..dim {
            acc -= m[col * dim + j] * b[j];
        }
        b[col] = acc / m[col * dim + col];
    }
    Ok(b)
}

/// Solve a symmetric block-tridiagonal system with `nb` diagonal blocks of
/// size `dim x dim` and constant scalar off-diagonal blocks `off * I`:
///
/// ```text
/// [ D_0   off*I            ] [x_0]   [r_0]
/// [ off*I D_1   off*I      ] [x_1] = [r_1]
/// [        ...             ] [...]   [...]
/// [            off*I D_nb-1] [x_.]   [r_.]
/// ```
///
/// `diag` holds the blocks consecutively (row-major each), `rhs` the stacked
/// right-hand sides.  Standard block Thomas elimination.
pub fn solve_block_tridiagonal(
    diag: &[f64],
    off: f64,
    rhs: &[f64],
    nb: usize,
    dim: usize,
) -> Result<Vec<f64>> {
    debug_assert_eq!(diag.len(), nb * dim * dim);
    debug_assert_eq!(rhs.len(), nb * dim);
    if nb == 0 {
        return Ok(Vec::new());
    }
    // carried dense factors: c[i] = D_i' ^{-1} * (off * I), y[i] = D_i'^{-1} r_i'
    let mut carry_c: Vec<f64> = Vec::with_capacity(nb * dim * dim);
    let mut carry_y: Vec<f64> = Vec::with_capacity(nb * dim);
    let mut dcur = diag[..dim * dim].to_vec();
    let mut rcur = rhs[..dim].to_vec();
    for i in 0..nb {
        // solve D' [C | y] = [off*I | r]; do it column by column
        let mut cblock = vec![0.0; dim * dim];
        for col in 0..dim {
            let mut e = vec![0.0; dim];
            e[col] = off;
            let x = solve_dense(dcur.clone(), e, dim)?;
            for r in 0..dim {
                cblock[r * dim + col] = x[r];
            }
        }
        let y = solve_dense(dcur.clone(), rcur.clone(), dim)?;
        carry_c.extend_from_slice(&cblock);
        carry_y.extend_from_slice(&y);
        if i + 1 < nb {
            // D_{i+1}' = D_{i+1} - off * C ; r' = r_{i+1} - off * y
            let base = (i + 1) * dim * dim;
            dcur = diag[base..base + dim * dim].to_vec();
            for r in 0..dim {
                for c in 0..dim {
                    dcur[r * dim + c] -= off * cblock[r * dim + c];
                }
            }
            rcur = rhs[(i + 1) * dim..(i + 2) * dim].to_vec();
            for r in 0..dim {
                rcur[r] -= off * y[r];
            }
        }
    }
    // back substitution: x_i = y_i - C_i x_{i+1}
    let mut x = vec![0.0; nb * dim];
    x[(nb - 1) * dim..].copy_from_slice(&carry_y[(nb - 1) * dim..]);
    for i in (0..nb.saturating_sub(1)).rev() {
        for r in 0..dim {
            let mut acc = carry_y[i * dim + r];
            for c in 0..dim {
                acc -= carry_c[i * dim * dim + r * dim + c] * x[(i + 1) * dim + c];
            }
            x[i * dim + r] = acc;
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn dense_solve_roundtrip() {
        let m = vec![4.0, 1.0, 2.0, 1.0, 5.0, 1.0, 2.0, 1.0, 6.0];
        let x_true = vec![1.0, -2.0, 0.5];
        let b: Vec<f64> = (0..3)
            .map(|i| (0..3).map(|j| m[i * 3 + j] * x_true[j]).sum())
            .collect();
        let x = solve_dense(m, b, 3).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(x[i], x_true[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn dense_singular_reported() {
        let m = vec![1.0, 2.0, 2.0, 4.0];
        assert!(solve_dense(m, vec![1.0, 1.0], 2).is_err());
    }

    #[test]
    fn block_tridiagonal_matches_dense() {
        // assemble the full matrix and compare against the dense solve
        let nb = 5;
        let dim = 2;
        let off = -3.0;
        let mut diag = Vec::new();
        for i in 0..nb {
            let a = 10.0 + i as f64;
            diag.extend_from_slice(&[a, 1.0, 1.0, a + 2.0]);
        }
        let rhs: Vec<f64> = (0..nb * dim).map(|i| (i as f64 * 0.7).sin()).collect();

        let n = nb * dim;
        let mut full = vec![0.0; n * n];
        for i in 0..nb {
            for r in 0..dim {
                for c in 0..dim {
                    full[(i * dim + r) * n + i * dim + c] = diag[i * dim * dim + r * dim + c];
                }
                if i + 1 < nb {
                    full[(i * dim + r) * n + (i + 1) * dim + r] = off;
                    full[((i + 1) * dim + r) * n + i * dim + r] = off;
                }
            }
        }
        let want = solve_dense(full, rhs.clone(), n).unwrap();
        let got = solve_block_tridiagonal(&diag, off, &rhs, nb, dim).unwrap();
        for i in 0..n {
            assert_abs_diff_eq!(got[i], want[i], epsilon = 1e-10);
        }
    }
}
