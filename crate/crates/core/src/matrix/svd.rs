//! One-sided Jacobi SVD.
//!
//! Columns of a working copy of `A` are rotated pairwise until mutually
//! orthogonal; the accumulated rotations form `V`, the column norms are the
//! singular values. Pairs are visited in round-robin tournament order so
//! each step touches disjoint columns and can run on the rayon pool. The
//! arithmetic per pair is identical in both execution modes, so the result
//! is bit-for-bit the same with or without threads.
//!
//! Real inputs take a real-arithmetic path.

use std::ops::{Add, Mul, Sub};

use super::{DenseMatrix, C64};
use crate::error::{Error, Result};
use crate::par::{self, Parallelism};

/// Sweep budget before reporting non-convergence.
pub const MAX_SWEEPS: usize = 80;

/// Singular values and vectors of an `m x n` matrix.
///
/// `values` has `min(m, n)` entries in non-increasing order. `right_vectors`
/// is the full `n x n` unitary `V`: column `k < min(m, n)` pairs with
/// `values[k]`; for wide inputs the trailing columns complete the basis and
/// carry no singular value.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularSpectrum {
    values: Vec<f64>,
    right_vectors: DenseMatrix,
    left_vectors: DenseMatrix,
    source_rows: usize,
    source_cols: usize,
}

impl SingularSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest singular value (zero for the zero matrix).
    pub fn sigma_max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn sigma_min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn right_vectors(&self) -> &DenseMatrix {
        &self.right_vectors
    }

    /// Column `k` of `V`.
    pub fn right_vector(&self, k: usize) -> Vec<C64> {
        self.right_vectors.column(k)
    }

    /// `m x min(m, n)` left singular vectors; columns paired with a zero
    /// singular value are zero.
    pub fn left_vectors(&self) -> &DenseMatrix {
        &self.left_vectors
    }

    pub fn source_rows(&self) -> usize {
        self.source_rows
    }

    pub fn source_cols(&self) -> usize {
        self.source_cols
    }

    /// `U diag(sigma) V†`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let k = self.values.len();
        DenseMatrix::from_fn(self.source_rows, self.source_cols, |r, c| {
            (0..k)
                .map(|j| self.left_vectors[(r, j)] * self.values[j] * self.right_vectors[(c, j)].conj())
                .sum()
        })
    }
}

/// SVD with the default execution mode.
pub fn svd(a: &DenseMatrix) -> Result<SingularSpectrum> {
    svd_with(a, Parallelism::default())
}

pub fn svd_with(a: &DenseMatrix, mode: Parallelism) -> Result<SingularSpectrum> {
    if a.is_real() {
        let columns = (0..a.cols())
            .map(|c| (0..a.rows()).map(|r| a[(r, c)].re).collect())
            .collect();
        jacobi::<f64>(a.rows(), a.cols(), columns, mode)
    } else {
        let columns = (0..a.cols()).map(|c| a.column(c)).collect();
        jacobi::<C64>(a.rows(), a.cols(), columns, mode)
    }
}

trait Scalar: Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + 'static {
    const ZERO: Self;
    const ONE: Self;
    fn conj(self) -> Self;
    fn abs2(self) -> f64;
    fn scale(self, s: f64) -> Self;
    fn into_c64(self) -> C64;
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    #[inline]
    fn conj(self) -> Self {
        self
    }
    #[inline]
    fn abs2(self) -> f64 {
        self * self
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn into_c64(self) -> C64 {
        C64::new(self, 0.0)
    }
}

impl Scalar for C64 {
    const ZERO: Self = C64::new(0.0, 0.0);
    const ONE: Self = C64::new(1.0, 0.0);
    #[inline]
    fn conj(self) -> Self {
        C64::conj(&self)
    }
    #[inline]
    fn abs2(self) -> f64 {
        self.norm_sqr()
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn into_c64(self) -> C64 {
        self
    }
}

struct Column<T> {
    a: Vec<T>,
    v: Vec<T>,
}

#[inline]
fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).fold(T::ZERO, |acc, (&p, &q)| acc + p.conj() * q)
}

#[inline]
fn sq_norm<T: Scalar>(x: &[T]) -> f64 {
    x.iter().map(|z| z.abs2()).sum()
}

/// Rotate one column pair; returns whether a rotation was applied.
fn rotate_pair<T: Scalar>(p: &mut Column<T>, q: &mut Column<T>, tol: f64, floor: f64) -> bool {
    let alpha = sq_norm(&p.a);
    let beta = sq_norm(&q.a);
    let gamma = dot(&p.a, &q.a);
    let g = gamma.abs2().sqrt();
    if g == 0.0 || g <= tol * (alpha * beta).sqrt() || g <= floor {
        return false;
    }
    // Phase that makes <p, q * conj(phase)> real and positive.
    let phase_conj = gamma.conj().scale(1.0 / g);
    let zeta = (beta - alpha) / (2.0 * g);
    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = c * t;
    for (x, y) in p.a.iter_mut().zip(q.a.iter_mut()) {
        let yt = *y * phase_conj;
        let xp = *x;
        *x = xp.scale(c) - yt.scale(s);
        *y = xp.scale(s) + yt.scale(c);
    }
    for (x, y) in p.v.iter_mut().zip(q.v.iter_mut()) {
        let yt = *y * phase_conj;
        let xp = *x;
        *x = xp.scale(c) - yt.scale(s);
        *y = xp.scale(s) + yt.scale(c);
    }
    true
}

/// Two columns facing each other in one round; `None` pads odd counts.
type Seat<T> = (Option<Column<T>>, Option<Column<T>>);

fn jacobi<T: Scalar>(rows: usize, cols: usize, columns: Vec<Vec<T>>, mode: Parallelism) -> Result<SingularSpectrum> {
    let eps = f64::EPSILON;
    let tol = eps * (rows as f64).sqrt();
    let fro2: f64 = columns.iter().map(|c| sq_norm(c)).sum();
    // Pairs of columns both at roundoff level are left alone; otherwise wide
    // inputs, whose surplus columns cannot all be orthogonal, never settle.
    let floor = (rows.max(cols) as f64) * eps * eps * fro2;

    let mut slots: Vec<Option<Column<T>>> = columns
        .into_iter()
        .enumerate()
        .map(|(k, a)| {
            let mut v = vec![T::ZERO; cols];
            v[k] = T::ONE;
            Some(Column { a, v })
        })
        .collect();
    // Round-robin schedule over an even number of seats; seat `None` is a bye.
    if slots.len() % 2 == 1 {
        slots.push(None);
    }
    let seats = slots.len();
    let mut order: Vec<usize> = (0..seats).collect();

    let mut converged = cols < 2;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::Numerical {
                rows,
                cols,
                message: format!("jacobi svd did not converge in {MAX_SWEEPS} sweeps"),
            });
        }
        sweeps += 1;
        let mut rotated = false;
        for _round in 0..seats - 1 {
            let mut pairs: Vec<Seat<T>> = (0..seats / 2)
                .map(|k| (slots[order[k]].take(), slots[order[seats - 1 - k]].take()))
                .collect();
            let mut applied = vec![false; pairs.len()];
            {
                let mut work: Vec<_> = pairs.iter_mut().zip(applied.iter_mut()).collect();
                par::for_each_chunk_mut(mode, &mut work, 1, |chunk| {
                    for ((p, q), flag) in chunk.iter_mut() {
                        if let (Some(p), Some(q)) = (p.as_mut(), q.as_mut()) {
                            **flag = rotate_pair(p, q, tol, floor);
                        }
                    }
                });
            }
            rotated |= applied.iter().any(|&f| f);
            for (k, (p, q)) in pairs.into_iter().enumerate() {
                slots[order[k]] = p;
                slots[order[seats - 1 - k]] = q;
            }
            order[1..].rotate_right(1);
        }
        converged = !rotated;
    }

    let cols_out: Vec<Column<T>> = slots.into_iter().flatten().collect();
    let mut norms: Vec<(usize, f64)> = cols_out
        .iter()
        .enumerate()
        .map(|(k, c)| (k, sq_norm(&c.a).sqrt()))
        .collect();
    norms.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));

    let k = rows.min(cols);
    let values: Vec<f64> = norms[..k].iter().map(|&(_, s)| s).collect();
    let right_vectors = DenseMatrix::from_fn(cols, cols, |r, c| cols_out[norms[c].0].v[r].into_c64());
    let left_vectors = DenseMatrix::from_fn(rows, k, |r, c| {
        let (idx, s) = norms[c];
        if s > 0.0 {
            cols_out[idx].a[r].into_c64() / s
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok(SingularSpectrum {
        values,
        right_vectors,
        left_vectors,
        source_rows: rows,
        source_cols: cols,
    })
}
