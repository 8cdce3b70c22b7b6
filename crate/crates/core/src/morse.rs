//! Mod-2 Morse complexes, group-action quotients, and a shooting
//! construction of the sphere complex.
//!
//! Boundary operators live over GF(2) as bitset matrices.  A chain
//! complex validates `∂∘∂ = 0` on construction and reports homology
//! ranks.  A free group action permuting generators and commuting with
//! the boundary descends to a quotient complex on orbits.  For the
//! quadratic Morse function on the two-sphere the boundary operator is
//! also computed independently, by shooting trajectories out of each
//! critical point and refining separatrix crossings by bisection.

use crate::error::{Error, Result};
use crate::finite::{integrate_flow_line, MorseProblem};

/// Dense-free matrix over GF(2); rows are packed into 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    words: Vec<Vec<u64>>,
}

impl Gf2Matrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        let w = cols.div_ceil(64);
        Gf2Matrix {
            rows,
            cols,
            words: vec![vec![0; w]; rows],
        }
    }

    pub fn from_dense(entries: &[Vec<u8>]) -> Result<Self> {
        let rows = entries.len();
        let cols = entries.first().map_or(0, Vec::len);
        if entries.iter().any(|r| r.len() != cols) {
            return Err(Error::GridMismatch {
                what: "ragged matrix rows",
            });
        }
        let mut m = Gf2Matrix::zero(rows, cols);
        for (i, row) in entries.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                if x % 2 == 1 {
                    m.set(i, j, true);
                }
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.words[i][j / 64] >> (j % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        let mask = 1u64 << (j % 64);
        if value {
            self.words[i][j / 64] |= mask;
        } else {
            self.words[i][j / 64] &= !mask;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().flatten().all(|w| *w == 0)
    }

    /// Matrix product over GF(2).
    pub fn mul(&self, other: &Gf2Matrix) -> Result<Gf2Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                what: "matrix product",
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = Gf2Matrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self.get(i, k) {
                    for (w, o) in out.words[i].iter_mut().zip(&other.words[k]) {
                        *w ^= o;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Rank over GF(2) by row elimination on a working copy.
    pub fn rank(&self) -> usize {
        let mut work = self.words.clone();
        let mut rank = 0;
        for col in 0..self.cols {
            let word = col / 64;
            let mask = 1u64 << (col % 64);
            let Some(pivot) = (rank..self.rows).find(|&r| work[r][word] & mask != 0) else {
                continue;
            };
            work.swap(rank, pivot);
            let pivot_row = work[rank].clone();
            for (r, row) in work.iter_mut().enumerate() {
                if r != rank && row[word] & mask != 0 {
                    for (w, p) in row.iter_mut().zip(&pivot_row) {
                        *w ^= p;
                    }
                }
            }
            rank += 1;
            if rank == self.rows {
                break;
            }
        }
        rank
    }
}

/// A finite chain complex over GF(2) with named generators.
///
/// `boundaries[d]` maps grading `d + 1` to grading `d`; the constructor
/// checks shapes and that consecutive boundaries compose to zero.
#[derive(Debug, Clone)]
pub struct ChainComplexGf2 {
    generators: Vec<Vec<String>>,
    boundaries: Vec<Gf2Matrix>,
}

impl ChainComplexGf2 {
    pub fn new(generators: Vec<Vec<String>>, boundaries: Vec<Gf2Matrix>) -> Result<Self> {
        if generators.is_empty() || boundaries.len() + 1 != generators.len() {
            return Err(Error::GridMismatch {
                what: "chain complex gradings",
            });
        }
        for (d, b) in boundaries.iter().enumerate() {
            if b.rows() != generators[d].len() || b.cols() != generators[d + 1].len() {
                return Err(Error::DimensionMismatch {
                    what: "boundary matrix shape",
                    expected: generators[d].len(),
                    got: b.rows(),
                });
            }
        }
        for d in 0..boundaries.len().saturating_sub(1) {
            let square = boundaries[d].mul(&boundaries[d + 1])?;
            if !square.is_zero() {
                return Err(Error::BoundarySquared {
                    upper: d + 2,
                    lower: d,
                });
            }
        }
        Ok(ChainComplexGf2 {
            generators,
            boundaries,
        })
    }

    pub fn top_grading(&self) -> usize {
        self.generators.len() - 1
    }

    pub fn generators(&self, d: usize) -> &[String] {
        &self.generators[d]
    }

    pub fn generator_counts(&self) -> Vec<usize> {
        self.generators.iter().map(Vec::len).collect()
    }

    pub fn total_generators(&self) -> usize {
        self.generators.iter().map(Vec::len).sum()
    }

    pub fn boundary(&self, d: usize) -> Option<&Gf2Matrix> {
        // boundary out of grading d
        if d == 0 || d > self.boundaries.len() {
            None
        } else {
            Some(&self.boundaries[d - 1])
        }
    }

    /// Mod-2 homology rank in each grading.
    pub fn homology_ranks(&self) -> Vec<usize> {
        let top = self.top_grading();
        (0..=top)
            .map(|d| {
                let dim = self.generators[d].len();
                let out_rank = self.boundary(d).map_or(0, Gf2Matrix::rank);
                let in_rank = self.boundary(d + 1).map_or(0, Gf2Matrix::rank);
                dim - out_rank - in_rank
            })
            .collect()
    }

    /// Euler characteristic from the generator counts.
    pub fn euler_characteristic(&self) -> i64 {
        self.generators
            .iter()
            .enumerate()
            .map(|(d, g)| {
                let sign = if d % 2 == 0 { 1 } else { -1 };
                sign * g.len() as i64
            })
            .sum()
    }
}

/// A finite group acting freely on the generators of a complex.
///
/// `elements[e][d]` is the permutation of grading-`d` generator indices
/// by the `e`-th non-identity group element.
#[derive(Debug, Clone)]
pub struct FreeGroupActionOnGenerators {
    elements: Vec<Vec<Vec<usize>>>,
}

impl FreeGroupActionOnGenerators {
    /// Validate the action against a complex: every permutation must have
    /// the right shape, move every generator (freeness), and commute with
    /// the boundary operator.
    pub fn new(
        complex: &ChainComplexGf2,
        elements: Vec<Vec<Vec<usize>>>,
    ) -> Result<Self> {
        for (e, perms) in elements.iter().enumerate() {
            if perms.len() != complex.generators.len() {
                return Err(Error::GridMismatch {
                    what: "action gradings",
                });
            }
            for (d, perm) in perms.iter().enumerate() {
                let ng = complex.generators[d].len();
                if perm.len() != ng {
                    return Err(Error::DimensionMismatch {
                        what: "generator permutation",
                        expected: ng,
                        got: perm.len(),
                    });
                }
                let mut seen = vec![false; ng];
                for (i, &p) in perm.iter().enumerate() {
                    if p >= ng || seen[p] {
                        return Err(Error::InvalidParameter {
                            what: "generator permutation",
                            why: format!("element {e}, grading {d} is not a bijection"),
                        });
                    }
                    seen[p] = true;
                    if p == i {
                        return Err(Error::NonFreeAction {
                            element: e,
                            generator: complex.generators[d][i].clone(),
                        });
                    }
                }
            }
            // boundary equivariance: ∂(g x) = g ∂x
            for d in 1..=complex.boundaries.len() {
                let b = complex.boundary(d).expect("grading in range");
                for x in 0..complex.generators[d].len() {
                    let gx = perms[d][x];
                    for y in 0..complex.generators[d - 1].len() {
                        let gy = perms[d - 1][y];
                        if b.get(y, x) != b.get(gy, gx) {
                            return Err(Error::NonEquivariantAction { element: e });
                        }
                    }
                }
            }
        }
        Ok(FreeGroupActionOnGenerators { elements })
    }

    /// Order of the group (identity included).
    pub fn order(&self) -> usize {
        self.elements.len() + 1
    }

    /// Orbit partition of grading `d`: for each generator, the index of
    /// its orbit, together with one representative per orbit.
    fn orbits(&self, d: usize, count: usize) -> (Vec<usize>, Vec<usize>) {
        let mut orbit_of = vec![usize::MAX; count];
        let mut reps = Vec::new();
        for start in 0..count {
            if orbit_of[start] != usize::MAX {
                continue;
            }
            let orbit = reps.len();
            reps.push(start);
            let mut stack = vec![start];
            orbit_of[start] = orbit;
            while let Some(i) = stack.pop() {
                for perms in &self.elements {
                    let j = perms[d][i];
                    if orbit_of[j] == usize::MAX {
                        orbit_of[j] = orbit;
                        stack.push(j);
                    }
                }
            }
        }
        (orbit_of, reps)
    }
}

/// Quotient of a complex by a free generator action: generators become
/// orbits and boundary coefficients are summed over orbits mod 2.
pub fn quotient_complex(
    complex: &ChainComplexGf2,
    action: &FreeGroupActionOnGenerators,
) -> Result<ChainComplexGf2> {
    let top = complex.top_grading();
    let mut orbit_maps = Vec::with_capacity(top + 1);
    let mut names = Vec::with_capacity(top + 1);
    for d in 0..=top {
        let count = complex.generators[d].len();
        let (orbit_of, reps) = action.orbits(d, count);
        names.push(
            reps.iter()
                .map(|&r| format!("[{}]", complex.generators[d][r]))
                .collect::<Vec<String>>(),
        );
        orbit_maps.push((orbit_of, reps));
    }
    let mut boundaries = Vec::with_capacity(top);
    for d in 1..=top {
        let (ref lower_orbit_of, ref lower_reps) = orbit_maps[d - 1];
        let (_, ref upper_reps) = orbit_maps[d];
        let b = complex.boundary(d).expect("grading in range");
        let mut q = Gf2Matrix::zero(lower_reps.len(), upper_reps.len());
        for (qx, &x) in upper_reps.iter().enumerate() {
            let mut counts = vec![0usize; lower_reps.len()];
            for y in 0..complex.generators[d - 1].len() {
                if b.get(y, x) {
                    counts[lower_orbit_of[y]] += 1;
                }
            }
            for (qy, c) in counts.iter().enumerate() {
                if c % 2 == 1 {
                    q.set(qy, qx, true);
                }
            }
        }
        boundaries.push(q);
    }
    ChainComplexGf2::new(names, boundaries)
}

/// Cover-versus-quotient bookkeeping for a free action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuotientPrinciple {
    pub group_order: usize,
    pub cover_generators: usize,
    pub quotient_generators: usize,
    pub cover_euler: i64,
    pub quotient_euler: i64,
}

/// Check the counting identities relating a complex to its quotient:
/// generator totals and Euler characteristics both divide by the group
/// order.
pub fn principle_check(
    complex: &ChainComplexGf2,
    action: &FreeGroupActionOnGenerators,
) -> Result<QuotientPrinciple> {
    let quotient = quotient_complex(complex, action)?;
    let report = QuotientPrinciple {
        group_order: action.order(),
        cover_generators: complex.total_generators(),
        quotient_generators: quotient.total_generators(),
        cover_euler: complex.euler_characteristic(),
        quotient_euler: quotient.euler_characteristic(),
    };
    if report.cover_generators != report.group_order * report.quotient_generators {
        return Err(Error::SearchFailed {
            what: "generator count does not divide by the group order",
            best: report.cover_generators as f64,
        });
    }
    if report.cover_euler != report.group_order as i64 * report.quotient_euler {
        return Err(Error::SearchFailed {
            what: "Euler characteristic does not divide by the group order",
            best: report.cover_euler as f64,
        });
    }
    Ok(report)
}

/// Options for the shooting construction of the sphere complex.
#[derive(Debug, Clone, Copy)]
pub struct ShootingOptions {
    /// Radius of the seed displacement from each critical point.
    pub seed_radius: f64,
    /// Number of coarse angular samples around an index-2 point.
    pub coarse: usize,
    /// Integrator step.
    pub ds: f64,
    /// Integration horizon per shot.
    pub s_max: f64,
    /// Gradient threshold for declaring a shot converged.
    pub grad_tol: f64,
    /// Angular width at which separatrix bisection stops.
    pub bisection_tol: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions {
            seed_radius: 1e-3,
            coarse: 16,
            ds: 1e-3,
            s_max: 30.0,
            grad_tol: 1e-9,
            bisection_tol: 1e-10,
        }
    }
}

/// The antipodal involution on a complex whose generators are named with
/// `+`/`-` sign prefixes (as produced by [`sphere_morse_complex`]): each
/// generator is swapped with its opposite-sign partner in the same
/// grading.  Validation of freeness and boundary equivariance happens in
/// [`FreeGroupActionOnGenerators::new`].
pub fn antipodal_generator_action(
    complex: &ChainComplexGf2,
) -> Result<FreeGroupActionOnGenerators> {
    let mut perms = Vec::with_capacity(complex.top_grading() + 1);
    for d in 0..=complex.top_grading() {
        let names = complex.generators(d);
        let mut perm = Vec::with_capacity(names.len());
        for name in names {
            let partner = if let Some(rest) = name.strip_prefix('+') {
                format!("-{rest}")
            } else if let Some(rest) = name.strip_prefix('-') {
                format!("+{rest}")
            } else {
                return Err(Error::InvalidParameter {
                    what: "generator name",
                    why: format!("{name:?} has no +/- sign prefix"),
                });
            };
            let Some(j) = names.iter().position(|n| *n == partner) else {
                return Err(Error::InvalidParameter {
                    what: "generator name",
                    why: format!("{name:?} has no antipodal partner {partner:?}"),
                });
            };
            perm.push(j);
        }
        perms.push(perm);
    }
    FreeGroupActionOnGenerators::new(complex, vec![perms])
}

/// The six critical points of the sphere problem grouped by Morse index,
/// assuming the three coefficients are distinct.
fn sphere_criticals(lambda: &[f64; 3]) -> Result<Vec<Vec<(String, Vec<f64>)>>> {
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| lambda[a].total_cmp(&lambda[b]));
    let min_gap = (lambda[order[1]] - lambda[order[0]])
        .min(lambda[order[2]] - lambda[order[1]]);
    if min_gap <= 1e-9 {
        return Err(Error::DegenerateMorse {
            why: format!("coefficients {lambda:?} are not distinct"),
        });
    }
    Ok(order
        .iter()
        .map(|&axis| {
            [1.0f64, -1.0]
                .iter()
                .map(|&s| {
                    let mut p = vec![0.0; 3];
                    p[axis] = s;
                    let name = format!("{}e{}", if s > 0.0 { '+' } else { '-' }, axis + 1);
                    (name, p)
                })
                .collect()
        })
        .collect())
}

fn nearest_critical(points: &[(String, Vec<f64>)], x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, (_, p)) in points.iter().enumerate() {
        let d = p
            .iter()
            .zip(x)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn normalize(x: &mut [f64]) {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in x.iter_mut() {
        *v /= n;
    }
}

/// Shoot a descending trajectory and report which minimum it reaches and
/// the closest approach to each saddle along the way.
fn shoot(
    problem: &MorseProblem,
    minima: &[(String, Vec<f64>)],
    saddles: &[(String, Vec<f64>)],
    seed: &[f64],
    opts: &ShootingOptions,
) -> Result<(usize, Vec<f64>)> {
    let traj = integrate_flow_line(problem, seed, 1, opts.ds, opts.s_max, opts.grad_tol)?;
    let mut saddle_approach = vec![f64::INFINITY; saddles.len()];
    for sample in &traj.samples {
        for (i, d) in saddle_approach.iter_mut().enumerate() {
            let dist = saddles[i]
                .1
                .iter()
                .zip(sample)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            *d = d.min(dist);
        }
    }
    let end = traj.samples.last().expect("nonempty trajectory");
    let (idx, dist) = nearest_critical(minima, end);
    if !traj.converged || dist > 1e-4 {
        // ended on a separatrix or out of budget; caller decides
        return Ok((usize::MAX, saddle_approach));
    }
    Ok((idx, saddle_approach))
}

/// Build the mod-2 Morse complex of `sum_i lambda_i x_i^2` on the unit
/// sphere by shooting.
///
/// Index-1 boundaries come from the two unstable rays of each saddle.
/// Index-2 boundaries come from a coarse angular sweep around each
/// maximum followed by bisection of every separatrix crossing; the
/// crossing is attributed to the saddle the refined trajectory hugs.
pub fn sphere_morse_complex(
    lambda: [f64; 3],
    opts: &ShootingOptions,
) -> Result<ChainComplexGf2> {
    let problem = MorseProblem::SphereQuadratic { lambda };
    let criticals = sphere_criticals(&lambda)?;
    let (minima, saddles, maxima) = (&criticals[0], &criticals[1], &criticals[2]);
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| lambda[a].total_cmp(&lambda[b]));
    let (low_axis, mid_axis) = (order[0], order[1]);

    // saddle -> minima: two unstable rays along the low axis
    let mut d1 = vec![vec![0u8; saddles.len()]; minima.len()];
    for (js, (_, saddle)) in saddles.iter().enumerate() {
        for ray in [1.0, -1.0] {
            let mut seed = saddle.clone();
            seed[low_axis] += ray * opts.seed_radius;
            normalize(&mut seed);
            let (limit, _) = shoot(&problem, minima, saddles, &seed, opts)?;
            if limit == usize::MAX {
                return Err(Error::SearchFailed {
                    what: "saddle ray did not reach a minimum",
                    best: f64::NAN,
                });
            }
            d1[limit][js] ^= 1;
        }
    }

    // maximum -> saddles: sweep, then bisect each change of limit
    let mut d2 = vec![vec![0u8; maxima.len()]; saddles.len()];
    for (jm, (_, maximum)) in maxima.iter().enumerate() {
        let seed_at = |phi: f64| -> Vec<f64> {
            let mut seed = maximum.clone();
            seed[low_axis] += opts.seed_radius * phi.cos();
            seed[mid_axis] += opts.seed_radius * phi.sin();
            normalize(&mut seed);
            seed
        };
        let n = opts.coarse.max(4);
        let offset = 0.37; // keep coarse samples off the symmetry axes
        let angles: Vec<f64> = (0..n)
            .map(|j| 2.0 * std::f64::consts::PI * (j as f64 + offset) / n as f64)
            .collect();
        let mut limits = Vec::with_capacity(n);
        for &phi in &angles {
            let (limit, _) = shoot(&problem, minima, saddles, &seed_at(phi), opts)?;
            if limit == usize::MAX {
                return Err(Error::SearchFailed {
                    what: "coarse shot did not reach a minimum",
                    best: phi,
                });
            }
            limits.push(limit);
        }
        for j in 0..n {
            let (mut lo, mut hi) = (angles[j], angles[(j + 1) % n]);
            if j + 1 == n {
                hi += 2.0 * std::f64::consts::PI;
            }
            let (l_lo, l_hi) = (limits[j], limits[(j + 1) % n]);
            if l_lo == l_hi {
                continue;
            }
            let mut best_saddle = None;
            while hi - lo > opts.bisection_tol {
                let mid = 0.5 * (lo + hi);
                let (limit, approach) = shoot(&problem, minima, saddles, &seed_at(mid), opts)?;
                let (near, near_dist) = approach
                    .iter()
                    .enumerate()
                    .map(|(i, &d)| (i, d))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .expect("at least one saddle");
                if near_dist < 1e-3 {
                    best_saddle = Some(near);
                }
                if limit == l_lo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let Some(saddle) = best_saddle else {
                return Err(Error::SearchFailed {
                    what: "separatrix did not pass near any saddle",
                    best: lo,
                });
            };
            d2[saddle][jm] ^= 1;
        }
    }

    let names = criticals
        .iter()
        .map(|level| level.iter().map(|(n, _)| n.clone()).collect())
        .collect();
    ChainComplexGf2::new(
        names,
        vec![Gf2Matrix::from_dense(&d1)?, Gf2Matrix::from_dense(&d2)?],
    )
}
