//! Steady states of a Liouvillian.
//!
//! The production path is a direct sparse LU solve of `L vec(rho) = 0` with
//! the redundant row for `rho_00` replaced by the trace functional. The
//! independent oracle path propagates `exp(L t)` built by dense scaling and
//! squaring, sharing nothing with either the LU solve or the Runge-Kutta
//! integrator.

use super::linalg;
use super::liouvillian::Liouvillian;
use crate::error::{Result, SqemError};
use crate::fock::QState;
use faer::sparse::{SparseColMat, Triplet};
use ndarray::Array2;
use num_complex::Complex64 as C64;

/// Steady state plus the residual `||L vec(rho)||_inf` of the returned
/// (hermitized, trace-normalized) state.
#[derive(Clone, Debug)]
pub struct SteadyState {
    pub state: QState,
    pub residual_inf: f64,
}

fn hermitize_normalize(mut rho: Array2<C64>) -> Array2<C64> {
    let d = rho.nrows();
    for i in 0..d {
        for j in i..d {
            let avg = 0.5 * (rho[(i, j)] + rho[(j, i)].conj());
            rho[(i, j)] = avg;
            rho[(j, i)] = avg.conj();
        }
    }
    let tr: C64 = (0..d).map(|i| rho[(i, i)]).sum();
    rho.mapv_inplace(|v| v / tr);
    rho
}

/// Direct solve of `L vec(rho) = 0` with the trace row replacing row 0.
pub fn steady_state(l: &Liouvillian) -> Result<SteadyState> {
    let d = l.dim();
    let dd = d * d;
    let mut trips: Vec<Triplet<usize, usize, C64>> = Vec::with_capacity(l.csr().nnz() + d);
    for (r, c, v) in l.csr().iter() {
        if r != 0 {
            trips.push(Triplet::new(r, c, v));
        }
    }
    for k in 0..d {
        trips.push(Triplet::new(0, k * d + k, C64::new(1.0, 0.0)));
    }
    let mat = SparseColMat::<usize, C64>::try_new_from_triplets(dd, dd, &trips)
        .map_err(|e| SqemError::NonUniqueSteadyState(format!("assembly failed: {e:?}")))?;
    let lu = mat
        .sp_lu()
        .map_err(|e| SqemError::NonUniqueSteadyState(format!("LU factorization failed: {e:?}")))?;
    let mut rhs = faer::Mat::<C64>::zeros(dd, 1);
    rhs[(0, 0)] = C64::new(1.0, 0.0);
    let x = faer::linalg::solvers::Solve::solve(&lu, &rhs);

    let mut rho = Array2::zeros((d, d));
    for c in 0..d {
        for r in 0..d {
            let v = x[(c * d + r, 0)];
            if !v.is_finite() {
                return Err(SqemError::NonUniqueSteadyState(
                    "solution not finite; the zero eigenvalue is degenerate or the solve broke down"
                        .into(),
                ));
            }
            rho[(r, c)] = v;
        }
    }
    let rho = hermitize_normalize(rho);

    let min_eig = linalg::min_hermitian_eigenvalue(&rho);
    if min_eig < -1e-8 {
        return Err(SqemError::TruncationTooSmall(format!(
            "steady state indefinite: min eigenvalue {min_eig:.3e}; enlarge the Fock cutoffs"
        )));
    }

    let vec: Vec<C64> = (0..dd).map(|k| rho[(k % d, k / d)]).collect();
    let residual_inf = l.apply_vec(&vec).iter().map(|v| v.norm()).fold(0.0, f64::max);

    let state = QState::from_density(l.spec().clone(), rho)?;
    Ok(SteadyState { state, residual_inf })
}

/// Propagates `rho0` to stationarity by repeated application of a dense
/// `exp(L t_block)`, stopping once successive states differ by less than
/// `tol` in sup norm.
pub fn dense_exponential_steady(
    l: &Liouvillian,
    rho0: &QState,
    t_block: f64,
    tol: f64,
    max_blocks: usize,
) -> Result<QState> {
    if rho0.spec() != l.spec() {
        return Err(SqemError::SpecMismatch("initial state spec".into()));
    }
    let d = l.dim();
    let dd = d * d;
    let p = linalg::expm(&linalg::csr_to_faer(&l.csr().scale(C64::new(t_block, 0.0))));
    let mut v: Vec<C64> = (0..dd).map(|k| rho0.rho()[(k % d, k / d)]).collect();
    let mut next = vec![C64::new(0.0, 0.0); dd];
    for _ in 0..max_blocks {
        for (i, slot) in next.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..dd {
                acc += p[(i, k)] * v[k];
            }
            *slot = acc;
        }
        let diff = v
            .iter()
            .zip(&next)
            .map(|(a, b)| (*a - *b).norm())
            .fold(0.0, f64::max);
        std::mem::swap(&mut v, &mut next);
        if diff < tol {
            let mut rho = Array2::zeros((d, d));
            for c in 0..d {
                for r in 0..d {
                    rho[(r, c)] = v[c * d + r];
                }
            }
            return QState::from_density(l.spec().clone(), hermitize_normalize(rho));
        }
    }
    Err(SqemError::NonUniqueSteadyState(format!(
        "exponential propagation did not settle within {max_blocks} blocks of t = {t_block}"
    )))
}

/// Dense `exp(L t)` applied to a state (the two-path propagation oracle).
pub fn expm_propagate(l: &Liouvillian, rho0: &QState, t: f64) -> Result<Array2<C64>> {
    if rho0.spec() != l.spec() {
        return Err(SqemError::SpecMismatch("initial state spec".into()));
    }
    let d = l.dim();
    let dd = d * d;
    let v: Vec<C64> = (0..dd).map(|k| rho0.rho()[(k % d, k / d)]).collect();
    let out = linalg::expm_apply(l.csr(), &v, t);
    let mut rho = Array2::zeros((d, d));
    for c in 0..d {
        for r in 0..d {
            rho[(r, c)] = out[c * d + r];
        }
    }
    Ok(rho)
}
