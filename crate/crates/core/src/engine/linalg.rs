//! Dense linear-algebra kernels backed by faer: Hermitian eigenvalues for
//! positivity checks, general eigenvalues for small-system spectra, and the
//! scaling-and-squaring matrix exponential used as the brute-force
//! propagation oracle.

use crate::error::{Result, SqemError};
use crate::sparse::Csr;
use faer::linalg::solvers::Solve;
use faer::Mat;
use ndarray::Array2;
use num_complex::Complex64 as C64;

pub fn ndarray_to_faer(a: &Array2<C64>) -> Mat<C64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

pub fn faer_to_ndarray(a: &Mat<C64>) -> Array2<C64> {
    Array2::from_shape_fn((a.nrows(), a.ncols()), |(i, j)| a[(i, j)])
}

pub fn csr_to_faer(a: &Csr) -> Mat<C64> {
    let mut out = Mat::zeros(a.nrows(), a.ncols());
    for (r, c, v) in a.iter() {
        out[(r, c)] += v;
    }
    out
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: &Array2<C64>) -> Vec<f64> {
    let m = ndarray_to_faer(a);
    let mut ev = m
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .expect("self-adjoint eigensolver failed");
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

pub fn min_hermitian_eigenvalue(a: &Array2<C64>) -> f64 {
    hermitian_eigenvalues(a)[0]
}

/// Eigenvalues of a general complex matrix (small systems only).
pub fn general_eigenvalues(a: &Array2<C64>) -> Result<Vec<C64>> {
    let m = ndarray_to_faer(a);
    m.eigenvalues()
        .map_err(|e| SqemError::ModelInvalid(format!("eigensolver failed: {e:?}")))
}

fn one_norm(a: &Mat<C64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..a.ncols() {
        let mut s = 0.0;
        for i in 0..a.nrows() {
            s += a[(i, j)].norm();
        }
        best = best.max(s);
    }
    best
}

/// Matrix exponential by Pade-13 with scaling and squaring.
pub fn expm(a: &Mat<C64>) -> Mat<C64> {
    const THETA_13: f64 = 5.371_920_351_148_152;
    const B: [f64; 14] = [
        64_764_752_532_480_000.0,
        32_382_376_266_240_000.0,
        7_771_770_303_897_600.0,
        1_187_353_796_428_800.0,
        129_060_195_264_000.0,
        10_559_470_521_600.0,
        670_442_572_800.0,
        33_522_128_640.0,
        1_323_241_920.0,
        40_840_800.0,
        960_960.0,
        16_380.0,
        182.0,
        1.0,
    ];
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let norm = one_norm(a);
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as u32
    } else {
        0
    };
    let scale = C64::new(0.5f64.powi(s as i32), 0.0);
    let a1 = Mat::from_fn(n, n, |i, j| a[(i, j)] * scale);

    let id = Mat::<C64>::identity(n, n);
    let a2 = &a1 * &a1;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    let w1 = Mat::from_fn(n, n, |i, j| {
        a6[(i, j)] * B[13] + a4[(i, j)] * B[11] + a2[(i, j)] * B[9]
    });
    let w2 = Mat::from_fn(n, n, |i, j| {
        a6[(i, j)] * B[7]
            + a4[(i, j)] * B[5]
            + a2[(i, j)] * B[3]
            + id[(i, j)] * B[1]
    });
    let u = &a1 * &(&a6 * &w1 + w2);

    let z1 = Mat::from_fn(n, n, |i, j| {
        a6[(i, j)] * B[12] + a4[(i, j)] * B[10] + a2[(i, j)] * B[8]
    });
    let v = &a6 * &z1
        + Mat::from_fn(n, n, |i, j| {
            a6[(i, j)] * B[6]
                + a4[(i, j)] * B[4]
                + a2[(i, j)] * B[2]
                + id[(i, j)] * B[0]
        });

    let p = &v + &u;
    let q = &v - &u;
    let lu = q.partial_piv_lu();
    let mut r = lu.solve(&p);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// `expm(L * t)` applied to a vector (the brute-force propagation path).
pub fn expm_apply(l: &Csr, x: &[C64], t: f64) -> Vec<C64> {
    let n = l.nrows();
    assert_eq!(n, x.len());
    let lt = csr_to_faer(&l.scale(C64::new(t, 0.0)));
    let p = expm(&lt);
    let mut out = vec![C64::new(0.0, 0.0); n];
    for (o, i) in out.iter_mut().zip(0..n) {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..n {
            acc += p[(i, k)] * x[k];
        }
        *o = acc;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_of_diagonal() {
        let n = 4;
        let a = Mat::from_fn(n, n, |i, j| {
            if i == j { C64::new(-(i as f64), 0.5 * i as f64) } else { C64::new(0.0, 0.0) }
        });
        let e = expm(&a);
        for i in 0..n {
            let expect = C64::new(-(i as f64), 0.5 * i as f64).exp();
            assert!((e[(i, i)] - expect).norm() < 1e-13);
        }
    }

    #[test]
    fn expm_nilpotent() {
        // exp([[0,1],[0,0]]) = [[1,1],[0,1]]
        let mut a = Mat::<C64>::zeros(2, 2);
        a[(0, 1)] = C64::new(1.0, 0.0);
        let e = expm(&a);
        assert!((e[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((e[(0, 1)] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(e[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn expm_group_property() {
        // exp(A) * exp(A) = exp(2A), with a norm large enough to force squaring
        let a = Mat::from_fn(3, 3, |i, j| C64::new(2.0 * ((i + 2 * j) % 3) as f64 - 1.0, 0.3 * (i as f64 - j as f64)));
        let e1 = expm(&a);
        let e2 = expm(&Mat::from_fn(3, 3, |i, j| a[(i, j)] * C64::new(2.0, 0.0)));
        let prod = &e1 * &e1;
        for i in 0..3 {
            for j in 0..3 {
                assert!((prod[(i, j)] - e2[(i, j)]).norm() < 1e-10 * e2[(i, j)].norm().max(1.0));
            }
        }
    }

    #[test]
    fn hermitian_eigenvalues_of_projector() {
        let mut a = Array2::<C64>::zeros((3, 3));
        a[(1, 1)] = C64::new(1.0, 0.0);
        let ev = hermitian_eigenvalues(&a);
        assert!(ev[0].abs() < 1e-14 && ev[1].abs() < 1e-14);
        assert!((ev[2] - 1.0).abs() < 1e-14);
    }
}
