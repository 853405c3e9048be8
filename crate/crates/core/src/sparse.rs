//! Compressed sparse row matrices over `Complex64`.
//!
//! Every operator in this crate is a short product of ladder matrices, so the
//! row fill stays tiny even when the composite Hilbert space does not. The
//! kernels here (sparse x dense, dense x sparse, kron) are the hot paths of
//! the Lindblad right-hand side and of Liouvillian assembly.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

/// Complex CSR matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Csr {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<C64>,
}

impl Csr {
    /// Builds from (row, col, value) triplets; duplicates are summed,
    /// explicit zeros are kept so sparsity patterns stay stable across
    /// parameter changes.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, C64)]) -> Self {
        for &(r, c, _) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r},{c}) out of bounds {nrows}x{ncols}");
        }
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_unstable_by_key(|&k| (triplets[k].0, triplets[k].1));

        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for &k in &order {
            let (r, c, v) = triplets[k];
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { nrows, ncols, row_ptr, col_idx, vals }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, row_ptr: vec![0; nrows + 1], col_idx: Vec::new(), vals: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            vals: vec![C64::new(1.0, 0.0); n],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// Entries of row `r` as (col, value) pairs.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        self.col_idx[lo..hi].iter().copied().zip(self.vals[lo..hi].iter().copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.row(r).find(|&(cc, _)| cc == c).map_or(C64::new(0.0, 0.0), |(_, v)| v)
    }

    pub fn scale(&self, s: C64) -> Csr {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn add(&self, other: &Csr) -> Csr {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols), "shape mismatch in add");
        let mut trips = Vec::with_capacity(self.nnz() + other.nnz());
        trips.extend(self.iter());
        trips.extend(other.iter());
        Csr::from_triplets(self.nrows, self.ncols, &trips)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Csr {
        let trips: Vec<_> = self.iter().map(|(r, c, v)| (c, r, v.conj())).collect();
        Csr::from_triplets(self.ncols, self.nrows, &trips)
    }

    pub fn transpose(&self) -> Csr {
        let trips: Vec<_> = self.iter().map(|(r, c, v)| (c, r, v)).collect();
        Csr::from_triplets(self.ncols, self.nrows, &trips)
    }

    pub fn conj(&self) -> Csr {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v = v.conj());
        out
    }

    /// Sparse-sparse product.
    pub fn matmul(&self, other: &Csr) -> Csr {
        assert_eq!(self.ncols, other.nrows, "inner dimension mismatch in matmul");
        let mut trips = Vec::new();
        let mut acc: Vec<(usize, C64)> = Vec::new();
        for r in 0..self.nrows {
            acc.clear();
            for (k, va) in self.row(r) {
                for (c, vb) in other.row(k) {
                    acc.push((c, va * vb));
                }
            }
            acc.sort_unstable_by_key(|&(c, _)| c);
            let mut it = acc.iter().copied();
            if let Some((mut cc, mut cv)) = it.next() {
                for (c, v) in it {
                    if c == cc {
                        cv += v;
                    } else {
                        trips.push((r, cc, cv));
                        cc = c;
                        cv = v;
                    }
                }
                trips.push((r, cc, cv));
            }
        }
        Csr::from_triplets(self.nrows, other.ncols, &trips)
    }

    /// Kronecker product.
    pub fn kron(&self, other: &Csr) -> Csr {
        let mut trips = Vec::with_capacity(self.nnz() * other.nnz());
        for (ra, ca, va) in self.iter() {
            for (rb, cb, vb) in other.iter() {
                trips.push((ra * other.nrows + rb, ca * other.ncols + cb, va * vb));
            }
        }
        Csr::from_triplets(self.nrows * other.nrows, self.ncols * other.ncols, &trips)
    }

    /// `self * rho` with dense `rho`, row-parallel.
    pub fn mul_dense(&self, rho: &Array2<C64>) -> Array2<C64> {
        let mut out = Array2::zeros((self.nrows, rho.ncols()));
        self.mul_dense_into(rho, &mut out);
        out
    }

    /// `self * rho` written into `out` (overwritten).
    pub fn mul_dense_into(&self, rho: &Array2<C64>, out: &mut Array2<C64>) {
        assert_eq!(self.ncols, rho.nrows());
        assert_eq!((out.nrows(), out.ncols()), (self.nrows, rho.ncols()));
        let n = rho.ncols();
        let rho_s = rho.as_slice().expect("rho must be standard layout");
        let out_s = out.as_slice_mut().expect("out must be standard layout");
        out_s
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(r, orow)| {
                orow.fill(C64::new(0.0, 0.0));
                for (k, v) in self.row(r) {
                    let prow = &rho_s[k * n..(k + 1) * n];
                    for (o, p) in orow.iter_mut().zip(prow) {
                        *o += v * *p;
                    }
                }
            });
    }

    /// `rho * self` with dense `rho`, row-parallel over `rho`.
    pub fn dense_mul(&self, rho: &Array2<C64>) -> Array2<C64> {
        let mut out = Array2::zeros((rho.nrows(), self.ncols));
        self.dense_mul_into(rho, &mut out);
        out
    }

    /// `rho * self` written into `out` (overwritten).
    pub fn dense_mul_into(&self, rho: &Array2<C64>, out: &mut Array2<C64>) {
        assert_eq!(rho.ncols(), self.nrows);
        assert_eq!((out.nrows(), out.ncols()), (rho.nrows(), self.ncols));
        let n = self.ncols;
        let m = rho.ncols();
        let rho_s = rho.as_slice().expect("rho must be standard layout");
        let out_s = out.as_slice_mut().expect("out must be standard layout");
        out_s
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(i, orow)| {
                orow.fill(C64::new(0.0, 0.0));
                let prow = &rho_s[i * m..(i + 1) * m];
                for (k, &pv) in prow.iter().enumerate() {
                    if pv.re != 0.0 || pv.im != 0.0 {
                        for (c, v) in self.row(k) {
                            orow[c] += pv * v;
                        }
                    }
                }
            });
    }

    /// `out += scale * self * rho`.
    pub fn mul_dense_acc(&self, rho: &Array2<C64>, out: &mut Array2<C64>, scale: C64) {
        assert_eq!(self.ncols, rho.nrows());
        assert_eq!((out.nrows(), out.ncols()), (self.nrows, rho.ncols()));
        let n = rho.ncols();
        let rho_s = rho.as_slice().expect("rho must be standard layout");
        let out_s = out.as_slice_mut().expect("out must be standard layout");
        out_s
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(r, orow)| {
                for (k, v) in self.row(r) {
                    let sv = scale * v;
                    let prow = &rho_s[k * n..(k + 1) * n];
                    for (o, p) in orow.iter_mut().zip(prow) {
                        *o += sv * *p;
                    }
                }
            });
    }

    /// `out += scale * rho * self`.
    pub fn dense_mul_acc(&self, rho: &Array2<C64>, out: &mut Array2<C64>, scale: C64) {
        assert_eq!(rho.ncols(), self.nrows);
        assert_eq!((out.nrows(), out.ncols()), (rho.nrows(), self.ncols));
        let n = self.ncols;
        let m = rho.ncols();
        let rho_s = rho.as_slice().expect("rho must be standard layout");
        let out_s = out.as_slice_mut().expect("out must be standard layout");
        out_s
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(i, orow)| {
                let prow = &rho_s[i * m..(i + 1) * m];
                for (k, &pv) in prow.iter().enumerate() {
                    if pv.re != 0.0 || pv.im != 0.0 {
                        let spv = scale * pv;
                        for (c, v) in self.row(k) {
                            orow[c] += spv * v;
                        }
                    }
                }
            });
    }

    /// Sparse matrix-vector product.
    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(self.ncols, x.len());
        (0..self.nrows)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    pub fn to_dense(&self) -> Array2<C64> {
        let mut out = Array2::zeros((self.nrows, self.ncols));
        for (r, c, v) in self.iter() {
            out[(r, c)] += v;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Max-norm of `self - other` over the union pattern.
    pub fn max_abs_diff(&self, other: &Csr) -> f64 {
        self.add(&other.scale(C64::new(-1.0, 0.0))).max_abs()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    /// Drops entries with |v| <= tol (pattern compaction).
    pub fn prune(&self, tol: f64) -> Csr {
        let trips: Vec<_> = self.iter().filter(|&(_, _, v)| v.norm() > tol).collect();
        Csr::from_triplets(self.nrows, self.ncols, &trips)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn triplets_sum_duplicates() {
        let m = Csr::from_triplets(2, 2, &[(0, 1, c(1.0, 0.0)), (0, 1, c(0.5, -1.0)), (1, 0, c(2.0, 0.0))]);
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 1), c(1.5, -1.0));
        assert_eq!(m.get(1, 0), c(2.0, 0.0));
        assert_eq!(m.get(1, 1), c(0.0, 0.0));
    }

    #[test]
    fn matmul_matches_dense() {
        let a = Csr::from_triplets(3, 3, &[(0, 1, c(1.0, 1.0)), (1, 2, c(2.0, 0.0)), (2, 0, c(0.0, -1.0))]);
        let b = Csr::from_triplets(3, 3, &[(1, 1, c(3.0, 0.0)), (2, 1, c(1.0, 2.0)), (0, 0, c(1.0, 0.0))]);
        let ab = a.matmul(&b).to_dense();
        let ad = a.to_dense();
        let bd = b.to_dense();
        let mut expect = Array2::<C64>::zeros((3, 3));
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    expect[(i, j)] += ad[(i, k)] * bd[(k, j)];
                }
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                assert!((ab[(i, j)] - expect[(i, j)]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn adjoint_involutive() {
        let a = Csr::from_triplets(2, 3, &[(0, 2, c(1.0, -2.0)), (1, 0, c(0.5, 0.5))]);
        let aa = a.adjoint().adjoint();
        assert_eq!(a, aa);
    }

    #[test]
    fn kron_shape_and_values() {
        let a = Csr::from_triplets(2, 2, &[(0, 1, c(2.0, 0.0))]);
        let b = Csr::identity(3);
        let k = a.kron(&b);
        assert_eq!((k.nrows(), k.ncols()), (6, 6));
        for i in 0..3 {
            assert_eq!(k.get(i, 3 + i), c(2.0, 0.0));
        }
        assert_eq!(k.nnz(), 3);
    }

    #[test]
    fn sparse_dense_products_agree_with_dense() {
        let a = Csr::from_triplets(3, 3, &[(0, 0, c(1.0, 0.5)), (1, 2, c(-1.0, 0.0)), (2, 1, c(0.0, 2.0))]);
        let rho = Array2::from_shape_fn((3, 3), |(i, j)| c(i as f64, j as f64 * 0.5));
        let left = a.mul_dense(&rho);
        let right = a.dense_mul(&rho);
        let ad = a.to_dense();
        for i in 0..3 {
            for j in 0..3 {
                let mut l = c(0.0, 0.0);
                let mut r = c(0.0, 0.0);
                for k in 0..3 {
                    l += ad[(i, k)] * rho[(k, j)];
                    r += rho[(i, k)] * ad[(k, j)];
                }
                assert!((left[(i, j)] - l).norm() < 1e-14);
                assert!((right[(i, j)] - r).norm() < 1e-14);
            }
        }
    }
}
