//! Vectorized Lindblad generators.
//!
//! Column-stacking convention throughout: `vec(rho)[c*d + r] = rho[r, c]`,
//! so `vec(A rho B) = (B^T kron A) vec(rho)`. Under it the generator reads
//!
//! `L = -i (I kron H - H^T kron I)
//!      + sum_k rate_k [ conj(B_k) kron A_k
//!                       - (I kron B_k^dag A_k + (B_k^dag A_k)^T kron I)/2 ]`.

use crate::error::{Result, SqemError};
use crate::fock::TruncationSpec;
use crate::model::ModelSpec;
use crate::sparse::Csr;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

/// Sparse superoperator on column-stacked density matrices.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    spec: TruncationSpec,
    dim: usize,
    csr: Csr,
}

impl Liouvillian {
    pub fn spec(&self) -> &TruncationSpec {
        &self.spec
    }

    /// Hilbert-space dimension `d`; the superoperator is `d^2 x d^2`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn csr(&self) -> &Csr {
        &self.csr
    }

    /// Sup-norm of the trace functional composed with `L`; exact trace
    /// preservation gives zero.
    pub fn trace_residual(&self) -> f64 {
        let d = self.dim;
        let mut acc = vec![C64::new(0.0, 0.0); d * d];
        for k in 0..d {
            let row = k * d + k; // vec index of rho_kk
            for (c, v) in self.csr.row(row) {
                acc[c] += v;
            }
        }
        acc.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Applies `L` to a column-stacked state.
    pub fn apply_vec(&self, x: &[C64]) -> Vec<C64> {
        self.csr.mul_vec(x)
    }
}

/// Builds the sparse superoperator for a model.
pub fn build_liouvillian(model: &ModelSpec) -> Result<Liouvillian> {
    let d = model.spec().total_dim();
    let h = model.hamiltonian().mat();
    if !h.is_hermitian(1e-12) {
        return Err(SqemError::ModelInvalid("hamiltonian not Hermitian".into()));
    }
    let id = Csr::identity(d);
    let minus_i = C64::new(0.0, -1.0);
    let plus_i = C64::new(0.0, 1.0);

    let mut l = id.kron(h).scale(minus_i);
    l = l.add(&h.transpose().kron(&id).scale(plus_i));

    for term in model.dissipators() {
        let a = term.left.mat();
        let b = term.right.mat();
        let rate = C64::new(term.rate, 0.0);
        let half = C64::new(-0.5 * term.rate, 0.0);
        let bdag_a = b.adjoint().matmul(a);
        l = l.add(&b.conj().kron(a).scale(rate));
        l = l.add(&id.kron(&bdag_a).scale(half));
        l = l.add(&bdag_a.transpose().kron(&id).scale(half));
    }
    Ok(Liouvillian { spec: model.spec().clone(), dim: d, csr: l })
}

/// Elementwise comparison of two generators compressed onto the subspace
/// with every mode occupation `<= max_occupation`.
///
/// The projected superoperator columns are assembled directly from sparse
/// matrix-unit images, so the full `d^2 x d^2` matrix never materializes.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct ProjectedComparison {
    /// Largest elementwise difference over all projected entries.
    pub max_abs_diff: f64,
    /// Largest magnitude of the first generator's projected entries.
    pub max_abs_ref: f64,
    /// `max_abs_diff / max_abs_ref`.
    pub relative: f64,
    /// Number of basis states kept by the projector.
    pub kept_states: usize,
}

struct TermOps {
    rate: f64,
    a_cols: Csr,    // A^T: row i holds column i of A
    b_cols: Csr,    // B^T
    k_rows: Csr,    // K = B^dag A
    k_cols: Csr,    // K^T
}

struct GeneratorCols {
    h_rows: Csr,
    h_cols: Csr,
    terms: Vec<TermOps>,
}

impl GeneratorCols {
    fn new(model: &ModelSpec) -> Self {
        let h = model.hamiltonian().mat().clone();
        let terms = model
            .dissipators()
            .iter()
            .map(|t| {
                let k = t.right.mat().adjoint().matmul(t.left.mat());
                TermOps {
                    rate: t.rate,
                    a_cols: t.left.mat().transpose(),
                    b_cols: t.right.mat().transpose(),
                    k_cols: k.transpose(),
                    k_rows: k,
                }
            })
            .collect();
        Self { h_cols: h.transpose(), h_rows: h, terms }
    }

    /// Entries of `L(|i><j|)` accumulated into `buf` keyed by `(row, col)`.
    fn unit_image(&self, i: usize, j: usize, buf: &mut Vec<((usize, usize), C64)>) {
        buf.clear();
        let mi = C64::new(0.0, -1.0);
        // -i H |i><j|
        for (r, v) in self.h_cols.row(i) {
            buf.push(((r, j), mi * v));
        }
        // +i |i><j| H
        for (c, v) in self.h_rows.row(j) {
            buf.push(((i, c), -mi * v));
        }
        for t in &self.terms {
            let rate = C64::new(t.rate, 0.0);
            let half = C64::new(-0.5 * t.rate, 0.0);
            // rate * (A e_i)(B e_j)^dag
            for (r, va) in t.a_cols.row(i) {
                for (c, vb) in t.b_cols.row(j) {
                    buf.push(((r, c), rate * va * vb.conj()));
                }
            }
            // -rate/2 * (K e_i) e_j^dag
            for (r, v) in t.k_cols.row(i) {
                buf.push(((r, j), half * v));
            }
            // -rate/2 * e_i (e_j^dag K)
            for (c, v) in t.k_rows.row(j) {
                buf.push(((i, c), half * v));
            }
        }
        buf.sort_unstable_by_key(|&(rc, _)| rc);
        // merge duplicates in place
        let mut w = 0usize;
        for r in 0..buf.len() {
            if w > 0 && buf[w - 1].0 == buf[r].0 {
                let v = buf[r].1;
                buf[w - 1].1 += v;
            } else {
                buf[w] = buf[r];
                w += 1;
            }
        }
        buf.truncate(w);
    }
}

/// Compares the generators of two models (same truncation) on the
/// low-excitation subspace.
pub fn projected_generator_comparison(
    model_a: &ModelSpec,
    model_b: &ModelSpec,
    max_occupation: usize,
) -> Result<ProjectedComparison> {
    if model_a.spec() != model_b.spec() {
        return Err(SqemError::SpecMismatch("models on different truncations".into()));
    }
    let spec = model_a.spec();
    let d = spec.total_dim();
    let kept: Vec<usize> = (0..d)
        .filter(|&idx| spec.occupations_of(idx).iter().all(|&n| n <= max_occupation))
        .collect();
    let in_kept: Vec<bool> = {
        let mut v = vec![false; d];
        for &k in &kept {
            v[k] = true;
        }
        v
    };

    let ga = GeneratorCols::new(model_a);
    let gb = GeneratorCols::new(model_b);

    let units: Vec<(usize, usize)> =
        kept.iter().flat_map(|&i| kept.iter().map(move |&j| (i, j))).collect();

    let (max_diff, max_ref) = units
        .par_iter()
        .fold(
            || (0.0f64, 0.0f64, Vec::new(), Vec::new()),
            |(mut md, mut mr, mut ba, mut bb), &(i, j)| {
                ga.unit_image(i, j, &mut ba);
                gb.unit_image(i, j, &mut bb);
                let (mut ka, mut kb) = (0usize, 0usize);
                // merge-walk the two sorted entry lists restricted to kept rows/cols
                while ka < ba.len() || kb < bb.len() {
                    let pick_a = kb >= bb.len() || (ka < ba.len() && ba[ka].0 <= bb[kb].0);
                    let pick_b = ka >= ba.len() || (kb < bb.len() && bb[kb].0 <= ba[ka].0);
                    let ((r, c), va, vb) = if pick_a && pick_b {
                        let e = (ba[ka].0, ba[ka].1, bb[kb].1);
                        ka += 1;
                        kb += 1;
                        e
                    } else if pick_a {
                        let e = (ba[ka].0, ba[ka].1, C64::new(0.0, 0.0));
                        ka += 1;
                        e
                    } else {
                        let e = (bb[kb].0, C64::new(0.0, 0.0), bb[kb].1);
                        kb += 1;
                        e
                    };
                    if in_kept[r] && in_kept[c] {
                        md = md.max((va - vb).norm());
                        mr = mr.max(va.norm());
                    }
                }
                (md, mr, ba, bb)
            },
        )
        .map(|(md, mr, _, _)| (md, mr))
        .reduce(|| (0.0, 0.0), |x, y| (x.0.max(y.0), x.1.max(y.1)));

    Ok(ProjectedComparison {
        max_abs_diff: max_diff,
        max_abs_ref: max_ref,
        relative: if max_ref > 0.0 { max_diff / max_ref } else { 0.0 },
        kept_states: kept.len(),
    })
}
