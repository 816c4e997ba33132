//! Small complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CVec = DVector<Complex64>;
pub type CMat = DMatrix<Complex64>;

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let eig = m.clone().symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// Principal square root of a Hermitian PSD matrix. Eigenvalues slightly
/// below zero (numerical noise) are floored at zero.
pub fn hermitian_sqrt(m: &CMat) -> CMat {
    let n = m.nrows();
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    let eig = m.clone().symmetric_eigen();
    let mut out = CMat::zeros(n, n);
    for (j, &lam) in eig.eigenvalues.iter().enumerate() {
        let s = lam.max(0.0).sqrt();
        if s == 0.0 {
            continue;
        }
        let v = eig.eigenvectors.column(j);
        out += (v * v.adjoint()) * Complex64::from(s);
    }
    out
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.is_square() && (m - m.adjoint()).iter().all(|z| z.norm() <= tol)
}

/// Real trace of a (nominally Hermitian) matrix.
pub fn re_trace(m: &CMat) -> f64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)].re).sum()
}

/// Re tr(A B) without forming the product.
pub fn re_trace_product(a: &CMat, b: &CMat) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// x^H M x, real part.
pub fn quad_form(m: &CMat, x: &CVec) -> f64 {
    x.dotc(&(m * x)).re
}

pub fn outer(x: &CVec) -> CMat {
    x * x.adjoint()
}

pub fn block_diagonal(blocks: &[CMat]) -> CMat {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMat::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        let k = b.nrows();
        out.view_mut((off, off), (k, k)).copy_from(b);
        off += k;
    }
    out
}

pub fn stack(vectors: &[CVec]) -> CVec {
    let n: usize = vectors.iter().map(|v| v.len()).sum();
    let mut out = CVec::zeros(n);
    let mut off = 0;
    for v in vectors {
        out.rows_mut(off, v.len()).copy_from(v);
        off += v.len();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_squares_back() {
        let a = CMat::from_fn(3, 3, |i, j| Complex64::new((i + j) as f64, i as f64 - j as f64));
        let psd = &a * a.adjoint();
        let s = hermitian_sqrt(&psd);
        assert!(frobenius(&(&s * &s - &psd)) < 1e-9);
    }

    #[test]
    fn block_diag_eigs_are_union() {
        let a = CMat::from_diagonal(&CVec::from_vec(vec![1.0.into(), 2.0.into()]));
        let b = CMat::from_diagonal(&CVec::from_vec(vec![0.5.into()]));
        let e = hermitian_eigenvalues(&block_diagonal(&[a, b]));
        assert_eq!(e.len(), 3);
        assert!((e[0] - 0.5).abs() < 1e-12 && (e[2] - 2.0).abs() < 1e-12);
    }
}
