//! Dense complex matrices, Kronecker products, vectorization and the SVD.

mod svd;

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub use svd::{svd, svd_with, SingularSpectrum, MAX_SWEEPS};

pub type C64 = Complex64;

/// Default upper bound on either dimension of a Kronecker product.
pub const MAX_KRON_DIM: usize = 4096;

/// Row-major dense complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    /// Build from row-major entries, validating shape and finiteness.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!("empty matrix shape {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "expected {} entries for {rows}x{cols}, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite entry at ({}, {})",
                k / cols,
                k % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Build from real row-major entries.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix shape {rows}x{cols}");
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| C64::new(0.0, 0.0))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| C64::new(if r == c { 1.0 } else { 0.0 }, 0.0))
    }

    /// Diagonal matrix from real values.
    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |r, c| C64::new(if r == c { values[r] } else { 0.0 }, 0.0))
    }

    /// Matrix whose columns are the given vectors (all the same length).
    pub fn from_columns(columns: &[Vec<C64>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::invalid("columns of unequal length"));
        }
        let mut data = vec![C64::new(0.0, 0.0); rows * cols];
        for (c, col) in columns.iter().enumerate() {
            for (r, z) in col.iter().enumerate() {
                data[r * cols + c] = *z;
            }
        }
        Self::new(rows, cols, data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::invalid(format!(
                "shape mismatch {:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::invalid(format!(
                "cannot multiply {:?} by {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let mut out = vec![C64::new(0.0, 0.0); self.rows * other.cols];
        for r in 0..self.rows {
            let dst = &mut out[r * other.cols..(r + 1) * other.cols];
            for (k, &a) in self.row(r).iter().enumerate() {
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for (d, &b) in dst.iter_mut().zip(other.row(k)) {
                    *d += a * b;
                }
            }
        }
        Ok(Self {
            rows: self.rows,
            cols: other.cols,
            data: out,
        })
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.cols {
            return Err(Error::invalid(format!(
                "vector length {} does not match {} columns",
                x.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry-wise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|k| self[(k, k)]).sum()
    }

    /// Entry-wise `max |M - M†|`; zero for Hermitian matrices.
    pub fn hermitian_defect(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for r in 0..self.rows {
            for c in r..self.cols {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// True when every imaginary part is exactly zero.
    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    /// Reorder rows so that output row `k` is input row `order[k]`.
    pub fn permute_rows(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.rows];
        if order.len() != self.rows
            || order
                .iter()
                .any(|&i| i >= self.rows || std::mem::replace(&mut seen[i], true))
        {
            return Err(Error::invalid("row order is not a permutation"));
        }
        let mut data = Vec::with_capacity(self.data.len());
        for &i in order {
            data.extend_from_slice(self.row(i));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Stack `self` on top of `other`.
    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::invalid("vstack: column counts differ"));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Self {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    /// Seeded matrix of i.i.d. standard complex Gaussian entries
    /// (real and imaginary parts each N(0, 1)).
    pub fn gaussian<R: rand::Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        Self::from_fn(rows, cols, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im)
        })
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows.min(8) {
            write!(f, "  ")?;
            for c in 0..self.cols.min(8) {
                let z = self[(r, c)];
                write!(f, "{:+.3e}{:+.3e}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product with the default size limit.
pub fn kron(x: &DenseMatrix, y: &DenseMatrix) -> Result<DenseMatrix> {
    kron_with_limit(x, y, MAX_KRON_DIM)
}

/// Kronecker product; entry `(a*q + c, b*s + e)` is `x[a,b] * y[c,e]`
/// for `y` of shape `q x s`.
pub fn kron_with_limit(x: &DenseMatrix, y: &DenseMatrix, max_dim: usize) -> Result<DenseMatrix> {
    let rows = x.rows.checked_mul(y.rows);
    let cols = x.cols.checked_mul(y.cols);
    let (rows, cols) = match (rows, cols) {
        (Some(r), Some(c)) if r <= max_dim && c <= max_dim => (r, c),
        _ => {
            return Err(Error::invalid(format!(
                "kronecker product of {:?} and {:?} exceeds {max_dim}x{max_dim}",
                x.shape(),
                y.shape()
            )))
        }
    };
    let mut data = vec![C64::new(0.0, 0.0); rows * cols];
    for a in 0..x.rows {
        for c in 0..y.rows {
            let dst = &mut data[(a * y.rows + c) * cols..(a * y.rows + c + 1) * cols];
            for b in 0..x.cols {
                let xab = x[(a, b)];
                for e in 0..y.cols {
                    dst[b * y.cols + e] = xab * y[(c, e)];
                }
            }
        }
    }
    Ok(DenseMatrix { rows, cols, data })
}

/// Column-major stacking into a column vector: output index `c*rows + r`
/// holds `x[r, c]`.
pub fn vec(x: &DenseMatrix) -> DenseMatrix {
    DenseMatrix {
        rows: x.rows * x.cols,
        cols: 1,
        data: vec_entries(x),
    }
}

/// Column-major entries of `x` as a plain vector.
pub fn vec_entries(x: &DenseMatrix) -> Vec<C64> {
    let mut out = Vec::with_capacity(x.rows * x.cols);
    for c in 0..x.cols {
        for r in 0..x.rows {
            out.push(x[(r, c)]);
        }
    }
    out
}

/// Seeded Haar-distributed unitary: Gram-Schmidt (applied twice) on a
/// complex Gaussian matrix, with positive diagonal of the implied R.
pub fn random_unitary(dim: usize, seed: u64) -> DenseMatrix {
    assert!(dim >= 1, "random_unitary needs dim >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DenseMatrix::gaussian(dim, dim, &mut rng);
    let mut cols: Vec<Vec<C64>> = (0..dim).map(|c| g.column(c)).collect();
    for k in 0..dim {
        for _ in 0..2 {
            for j in 0..k {
                let (done, rest) = cols.split_at_mut(k);
                let proj = inner(&done[j], &rest[0]);
                for (x, q) in rest[0].iter_mut().zip(&done[j]) {
                    *x -= proj * q;
                }
            }
        }
        let norm = cols[k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for x in cols[k].iter_mut() {
            *x /= norm;
        }
    }
    DenseMatrix::from_columns(&cols).expect("unitary columns are finite")
}

/// Hermitian inner product `<x, y> = sum conj(x_i) y_i`.
pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
