//! Independent oracles shared by the integration and acceptance tests.
//! Nothing here calls the crate's SVD or feature map.
#![allow(dead_code)]

use bilinear_rank::design::{BlockPartition, DesignBundle};
use bilinear_rank::{DenseMatrix, C64};
use nalgebra::DMatrix;

/// Membership test on `(a, b, e, c)` for the entry `E[a,b] * rho[e,c]`.
pub type Member = fn(&BlockPartition, usize, usize, usize, usize) -> bool;

/// Relative cutoff used by the span oracles.
pub const SPAN_TOL: f64 = 1e-10;

pub fn to_na(a: &DenseMatrix) -> DMatrix<C64> {
    DMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)])
}

/// Kronecker product straight from the block definition.
pub fn kron_brute(x: &DenseMatrix, y: &DenseMatrix) -> DenseMatrix {
    let (p, q) = y.shape();
    DenseMatrix::from_fn(x.rows() * p, x.cols() * q, |r, c| x[(r / p, c / q)] * y[(r % p, c % q)])
}

/// Stack columns top to bottom.
pub fn vec_brute(m: &DenseMatrix) -> Vec<C64> {
    let mut out = Vec::with_capacity(m.rows() * m.cols());
    for c in 0..m.cols() {
        for r in 0..m.rows() {
            out.push(m[(r, c)]);
        }
    }
    out
}

pub fn feature_brute(e: &DenseMatrix, rho: &DenseMatrix) -> Vec<C64> {
    vec_brute(&kron_brute(e, &rho.transpose()))
}

fn unit(d: usize, i: usize, j: usize) -> DenseMatrix {
    DenseMatrix::from_fn(d, d, |r, c| {
        if (r, c) == (i, j) {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Feature coordinate holding `E[a,b] * rho[e,c]`, found by probing with unit matrices.
pub fn coordinate_of(d: usize, a: usize, b: usize, e: usize, c: usize) -> usize {
    let f = feature_brute(&unit(d, a, b), &unit(d, e, c));
    let hits: Vec<usize> = f
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() != 0.0)
        .map(|(k, _)| k)
        .collect();
    assert_eq!(hits.len(), 1);
    hits[0]
}

/// Orthogonal projector onto the span of the given vectors, numerically
/// truncated at `SPAN_TOL` relative to the largest singular value.
pub fn span_projector(vectors: &[Vec<C64>]) -> (DMatrix<C64>, usize) {
    let n = vectors[0].len();
    let m = DMatrix::from_fn(n, vectors.len(), |i, j| vectors[j][i]);
    let svd = m.svd(true, false);
    let u = svd.u.unwrap();
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > SPAN_TOL * smax)
        .collect();
    let mut p = DMatrix::<C64>::zeros(n, n);
    for &k in &keep {
        let col = u.column(k);
        p += col * col.adjoint();
    }
    (p, keep.len())
}

pub fn span_dim(matrices: &[&DenseMatrix]) -> usize {
    span_projector(&matrices.iter().map(|m| vec_brute(m)).collect::<Vec<_>>()).1
}

/// Dimension of the row space of the design, from the two family spans.
pub fn product_span_dim(bundle: &DesignBundle) -> usize {
    let ops: Vec<&DenseMatrix> = bundle.operators.iter().map(|o| &o.matrix).collect();
    let sts: Vec<&DenseMatrix> = bundle.states.iter().map(|s| &s.matrix).collect();
    span_dim(&ops) * span_dim(&sts)
}

/// Exact sector weights from the projector trace of the nullspace.
///
/// The row space is span(E) ⊗ span(rho) coordinatewise, so the nullspace
/// projector has diagonal `1 - P_E[ab,ab] * P_rho[ec,ec]`.
pub fn projector_trace_weights(bundle: &DesignBundle, sectors: &[(&str, Member)]) -> Vec<(String, f64)> {
    let d = bundle.config.d;
    let (pe, _) = span_projector(
        &bundle
            .operators
            .iter()
            .map(|o| vec_brute(&o.matrix))
            .collect::<Vec<_>>(),
    );
    let (pr, _) = span_projector(&bundle.states.iter().map(|s| vec_brute(&s.matrix)).collect::<Vec<_>>());
    // vec_brute index of entry (r, c) is c*d + r.
    let diag = |p: &DMatrix<C64>, r: usize, c: usize| p[(c * d + r, c * d + r)].re;
    let mut sums = vec![0.0; sectors.len()];
    let mut total = 0.0;
    for a in 0..d {
        for b in 0..d {
            for e in 0..d {
                for c in 0..d {
                    let w = 1.0 - diag(&pe, a, b) * diag(&pr, e, c);
                    total += w;
                    for (k, (_, member)) in sectors.iter().enumerate() {
                        if member(&bundle.partition, a, b, e, c) {
                            sums[k] += w;
                        }
                    }
                }
            }
        }
    }
    sectors
        .iter()
        .zip(sums)
        .map(|((name, _), s)| (name.to_string(), s / total))
        .collect()
}

pub fn in_block_diagonal(p: &BlockPartition, a: usize, b: usize, e: usize, c: usize) -> bool {
    p.same_block(a, b) && p.same_block(e, c)
}

pub fn in_block_off_diagonal(p: &BlockPartition, a: usize, b: usize, e: usize, c: usize) -> bool {
    !in_block_diagonal(p, a, b, e, c)
}

pub const TWO_SECTORS: [(&str, Member); 2] = [
    ("block-diagonal", in_block_diagonal),
    ("block-off-diagonal", in_block_off_diagonal),
];

/// Numerical rank by the definition: count of sigma > tau * sigma_max,
/// singular values from nalgebra.
pub fn reference_rank(a: &DenseMatrix, tau: f64) -> usize {
    let s = to_na(a).singular_values();
    let smax = s.max();
    s.iter().filter(|&&v| v > tau * smax).count()
}
