//! Smith normal form over the integers, with transform matrices.
//!
//! Used to turn lattice preimage questions (`A u` integral) into diagonal
//! ones.  Arithmetic runs in `i128` and results are checked back into `i64`
//! so overflow surfaces as an error instead of silent wraparound.

use crate::error::{Error, Result};

/// Result of the reduction `U * A * V = D` with `U`, `V` unimodular and `D`
/// diagonal with each entry dividing the next.
#[derive(Debug, Clone)]
pub struct Smith {
    /// Row transform, `rows x rows`, row-major.
    pub u: Vec<i64>,
    /// Column transform, `cols x cols`, row-major.
    pub v: Vec<i64>,
    /// Nonnegative diagonal entries, length `min(rows, cols)`.
    pub diag: Vec<i64>,
    pub rows: usize,
    pub cols: usize,
}

impl Smith {
    /// Number of nonzero diagonal entries.
    pub fn rank(&self) -> usize {
        self.diag.iter().filter(|d| **d != 0).count()
    }
}

fn identity(n: usize) -> Vec<i128> {
    let mut m = vec![0i128; n * n];
    for i in 0..n {
        m[i * n + i] = 1;
    }
    m
}

/// Compute the Smith normal form of a `rows x cols` row-major integer matrix.
pub fn smith_normal_form(a: &[i64], rows: usize, cols: usize) -> Result<Smith> {
    if a.len() != rows * cols {
        return Err(Error::DimensionMismatch {
            what: "integer matrix",
            expected: rows * cols,
            got: a.len(),
        });
    }
    let mut m: Vec<i128> = a.iter().map(|&x| x as i128).collect();
    let mut u = identity(rows);
    let mut v = identity(cols);
    let at = |m: &Vec<i128>, i: usize, j: usize| m[i * cols + j];

    let steps = rows.min(cols);
    let mut t = 0;
    while t < steps {
        // locate the smallest-magnitude nonzero entry in the trailing block
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                let val = at(&m, i, j);
                if val != 0 && pivot.map_or(true, |(pi, pj)| val.abs() < at(&m, pi, pj).abs()) {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        swap_rows(&mut m, &mut u, cols, rows, t, pi);
        swap_cols(&mut m, &mut v, cols, t, pj);

        // clear row and column t; restart whenever a remainder shrinks the pivot
        let mut clean = true;
        for i in t + 1..rows {
            let q = div_round(at(&m, i, t), at(&m, t, t));
            if q != 0 {
                row_axpy(&mut m, &mut u, cols, rows, i, t, -q)?;
            }
            if at(&m, i, t) != 0 {
                clean = false;
            }
        }
        for j in t + 1..cols {
            let q = div_round(at(&m, t, j), at(&m, t, t));
            if q != 0 {
                col_axpy(&mut m, &mut v, cols, j, t, -q)?;
            }
            if at(&m, t, j) != 0 {
                clean = false;
            }
        }
        if !clean {
            // a nonzero remainder is strictly smaller than the pivot was,
            // so repeating the pivot selection terminates
            continue;
        }
        // enforce divisibility d_t | entries of the remaining block
        let d = at(&m, t, t);
        let mut fixed = true;
        'outer: for i in t + 1..rows {
            for j in t + 1..cols {
                if at(&m, i, j) % d != 0 {
                    // fold row i into row t and restart this pivot
                    row_axpy(&mut m, &mut u, cols, rows, t, i, 1)?;
                    fixed = false;
                    break 'outer;
                }
            }
        }
        if fixed {
            t += 1;
        }
    }

    let mut diag: Vec<i128> = (0..steps).map(|i| at(&m, i, i)).collect();
    // normalise signs, adjusting the row transform to keep U A V = D
    for (i, d) in diag.iter_mut().enumerate() {
        if *d < 0 {
            *d = -*d;
            for j in 0..rows {
                u[i * rows + j] = -u[i * rows + j];
            }
        }
    }

    let back = |m: Vec<i128>| -> Result<Vec<i64>> {
        m.into_iter()
            .map(|x| i64::try_from(x).map_err(|_| Error::IntegerOverflow))
            .collect()
    };
    Ok(Smith {
        u: back(u)?,
        v: back(v)?,
        diag: back(diag)?,
        rows,
        cols,
    })
}

/// Rounded integer division used to shrink remainders symmetrically.
fn div_round(a: i128, b: i128) -> i128 {
    debug_assert!(b != 0);
    let q = a / b;
    let r = a - q * b;
    if 2 * r.abs() > b.abs() {
        q + if (r > 0) == (b > 0) { 1 } else { -1 }
    } else {
        q
    }
}

fn swap_rows(m: &mut [i128], u: &mut [i128], cols: usize, rows: usize, a: usize, b: usize) {
    if a == b {
        return;
    }
    for j in 0..cols {
        m.swap(a * cols + j, b * cols + j);
    }
    for j in 0..rows {
        u.swap(a * rows + j, b * rows + j);
    }
}

fn swap_cols(m: &mut [i128], v: &mut [i128], cols: usize, a: usize, b: usize) {
    if a == b {
        return;
    }
    let rows = m.len() / cols;
    for i in 0..rows {
        m.swap(i * cols + a, i * cols + b);
    }
    let vc = cols;
    for i in 0..vc {
        v.swap(i * vc + a, i * vc + b);
    }
}

/// `row_a += q * row_b` on the working matrix and the row transform.
fn row_axpy(
    m: &mut [i128],
    u: &mut [i128],
    cols: usize,
    rows: usize,
    a: usize,
    b: usize,
    q: i128,
) -> Result<()> {
    for j in 0..cols {
        let add = at_checked(m[b * cols + j], q)?;
        m[a * cols + j] = m[a * cols + j].checked_add(add).ok_or(Error::IntegerOverflow)?;
    }
    for j in 0..rows {
        let add = at_checked(u[b * rows + j], q)?;
        u[a * rows + j] = u[a * rows + j].checked_add(add).ok_or(Error::IntegerOverflow)?;
    }
    Ok(())
}

/// `col_a += q * col_b` on the working matrix and the column transform.
fn col_axpy(m: &mut [i128], v: &mut [i128], cols: usize, a: usize, b: usize, q: i128) -> Result<()> {
    let rows = m.len() / cols;
    for i in 0..rows {
        let add = at_checked(m[i * cols + b], q)?;
        m[i * cols + a] = m[i * cols + a].checked_add(add).ok_or(Error::IntegerOverflow)?;
    }
    for i in 0..cols {
        let add = at_checked(v[i * cols + b], q)?;
        v[i * cols + a] = v[i * cols + a].checked_add(add).ok_or(Error::IntegerOverflow)?;
    }
    Ok(())
}

fn at_checked(x: i128, q: i128) -> Result<i128> {
    x.checked_mul(q).ok_or(Error::IntegerOverflow)
}
