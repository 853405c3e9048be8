//! Truncated bosonic operators and states on composite Hilbert spaces.
//!
//! Mode order is fixed throughout the crate: mode 0 is the first cavity (or
//! first Bogoliubov mode), mode 1 the second, mode 2 the mechanics. Reduced
//! models may omit modes but never reorder them. The composite basis is the
//! Kronecker basis in that order, i.e. mode 0 carries the largest stride.
//!
//! Truncation-edge commutator violations are accepted as-is: no element of
//! the ladder matrices is renormalized, and correctness statements are made
//! on low-excitation subspaces away from the cutoff.

use crate::error::{Result, SqemError};
use crate::sparse::Csr;
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

/// Per-mode Fock cutoffs; mode k keeps levels `0..dims[k]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncationSpec {
    dims: Vec<usize>,
}

impl TruncationSpec {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() {
            return Err(SqemError::InvalidTruncation("no modes".into()));
        }
        for (k, &d) in dims.iter().enumerate() {
            if d < 2 {
                return Err(SqemError::InvalidTruncation(format!(
                    "mode {k} cutoff {d} < 2"
                )));
            }
        }
        Ok(Self { dims: dims.to_vec() })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_modes(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Flat basis index of an occupation tuple.
    pub fn index_of(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.dims.len() {
            return Err(SqemError::SpecMismatch(format!(
                "{} occupations for {} modes",
                occupations.len(),
                self.dims.len()
            )));
        }
        let mut idx = 0;
        for (k, (&n, &d)) in occupations.iter().zip(&self.dims).enumerate() {
            if n >= d {
                return Err(SqemError::InvalidParameter(format!(
                    "occupation {n} exceeds cutoff {d} on mode {k}"
                )));
            }
            idx = idx * d + n;
        }
        Ok(idx)
    }

    /// Occupation tuple of a flat basis index.
    pub fn occupations_of(&self, mut idx: usize) -> Vec<usize> {
        let mut occ = vec![0usize; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            occ[k] = idx % self.dims[k];
            idx /= self.dims[k];
        }
        occ
    }

    fn check_same(&self, other: &TruncationSpec) -> Result<()> {
        if self != other {
            return Err(SqemError::SpecMismatch(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }
}

/// Operator on the composite space, tagged with its truncation.
///
/// Stored sparse; model operators are short products of ladder matrices and
/// stay sparse at any Hilbert-space size this crate handles.
#[derive(Clone, Debug)]
pub struct QOperator {
    spec: TruncationSpec,
    mat: Csr,
}

impl QOperator {
    pub fn from_csr(spec: TruncationSpec, mat: Csr) -> Result<Self> {
        let d = spec.total_dim();
        if mat.nrows() != d || mat.ncols() != d {
            return Err(SqemError::SpecMismatch(format!(
                "matrix is {}x{}, spec total dim is {d}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Self { spec, mat })
    }

    pub fn spec(&self) -> &TruncationSpec {
        &self.spec
    }

    pub fn mat(&self) -> &Csr {
        &self.mat
    }

    pub fn total_dim(&self) -> usize {
        self.spec.total_dim()
    }

    /// Single-mode annihilation operator: `<n-1|a|n> = sqrt(n)`.
    pub fn annihilation(dim: usize) -> Result<Self> {
        let spec = TruncationSpec::new(&[dim])?;
        let trips: Vec<_> = (1..dim)
            .map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0)))
            .collect();
        Ok(Self { spec, mat: Csr::from_triplets(dim, dim, &trips) })
    }

    /// Single-mode creation operator.
    pub fn creation(dim: usize) -> Result<Self> {
        Ok(Self::annihilation(dim)?.adjoint())
    }

    /// Single-mode number operator diag(0, 1, ..).
    pub fn number(dim: usize) -> Result<Self> {
        let spec = TruncationSpec::new(&[dim])?;
        let trips: Vec<_> = (0..dim).map(|n| (n, n, C64::new(n as f64, 0.0))).collect();
        Ok(Self { spec, mat: Csr::from_triplets(dim, dim, &trips) })
    }

    pub fn identity(spec: &TruncationSpec) -> Self {
        Self { spec: spec.clone(), mat: Csr::identity(spec.total_dim()) }
    }

    pub fn zero(spec: &TruncationSpec) -> Self {
        let d = spec.total_dim();
        Self { spec: spec.clone(), mat: Csr::zeros(d, d) }
    }

    pub fn adjoint(&self) -> Self {
        Self { spec: self.spec.clone(), mat: self.mat.adjoint() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { spec: self.spec.clone(), mat: self.mat.scale(s) }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn add(&self, other: &QOperator) -> Self {
        self.spec.check_same(&other.spec).expect("TruncationSpec mismatch in add");
        Self { spec: self.spec.clone(), mat: self.mat.add(&other.mat) }
    }

    pub fn sub(&self, other: &QOperator) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn matmul(&self, other: &QOperator) -> Self {
        self.spec.check_same(&other.spec).expect("TruncationSpec mismatch in matmul");
        Self { spec: self.spec.clone(), mat: self.mat.matmul(&other.mat) }
    }

    pub fn commutator(&self, other: &QOperator) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.mat.is_hermitian(tol)
    }

    pub fn to_dense(&self) -> Array2<C64> {
        self.mat.to_dense()
    }

    /// `I (x) .. (x) op (x) .. (x) I` with `op` at `mode_index`.
    pub fn embed(single_mode_op: &QOperator, mode_index: usize, spec: &TruncationSpec) -> Result<Self> {
        if mode_index >= spec.n_modes() {
            return Err(SqemError::InvalidParameter(format!(
                "mode index {mode_index} out of range for {} modes",
                spec.n_modes()
            )));
        }
        if single_mode_op.spec.dims() != [spec.dims()[mode_index]] {
            return Err(SqemError::SpecMismatch(format!(
                "single-mode operator dims {:?} vs spec mode {} cutoff {}",
                single_mode_op.spec.dims(),
                mode_index,
                spec.dims()[mode_index]
            )));
        }
        let mut mat = Csr::identity(1);
        for (k, &d) in spec.dims().iter().enumerate() {
            if k == mode_index {
                mat = mat.kron(&single_mode_op.mat);
            } else {
                mat = mat.kron(&Csr::identity(d));
            }
        }
        Ok(Self { spec: spec.clone(), mat })
    }
}

/// Density matrix on the composite space.
#[derive(Clone, Debug)]
pub struct QState {
    spec: TruncationSpec,
    rho: Array2<C64>,
}

impl QState {
    /// Wraps a density matrix, enforcing Hermiticity (1e-12 elementwise) and
    /// unit trace (1e-10). Positivity is checked by [`QState::min_eigenvalue`]
    /// where callers need it; constructors in this module produce manifestly
    /// positive states.
    pub fn from_density(spec: TruncationSpec, rho: Array2<C64>) -> Result<Self> {
        let d = spec.total_dim();
        if rho.nrows() != d || rho.ncols() != d {
            return Err(SqemError::SpecMismatch(format!(
                "density is {}x{}, spec total dim is {d}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        let mut herm_err = 0.0f64;
        for i in 0..d {
            for j in i..d {
                herm_err = herm_err.max((rho[(i, j)] - rho[(j, i)].conj()).norm());
            }
        }
        if herm_err > 1e-12 {
            return Err(SqemError::ModelInvalid(format!(
                "density not Hermitian: max |rho - rho^dag| = {herm_err:.3e}"
            )));
        }
        let tr: C64 = (0..d).map(|i| rho[(i, i)]).sum();
        if (tr - C64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(SqemError::ModelInvalid(format!("trace {} != 1", tr.re)));
        }
        Ok(Self { spec, rho })
    }

    /// Pure state from a normalized ket.
    pub fn from_pure(spec: TruncationSpec, psi: &Array1<C64>) -> Result<Self> {
        let d = spec.total_dim();
        if psi.len() != d {
            return Err(SqemError::SpecMismatch(format!("ket length {} vs dim {d}", psi.len())));
        }
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(SqemError::InvalidParameter(format!("ket norm {norm} != 1")));
        }
        let rho = Array2::from_shape_fn((d, d), |(i, j)| psi[i] * psi[j].conj());
        Ok(Self { spec, rho })
    }

    /// Projector onto a Fock basis state.
    pub fn fock_state(spec: &TruncationSpec, occupations: &[usize]) -> Result<Self> {
        let idx = spec.index_of(occupations)?;
        let d = spec.total_dim();
        let mut rho = Array2::zeros((d, d));
        rho[(idx, idx)] = C64::new(1.0, 0.0);
        Ok(Self { spec: spec.clone(), rho })
    }

    /// Truncated, re-normalized single-mode coherent state.
    ///
    /// Requires `|alpha|^2 <= dim/4` so the discarded tail weight stays
    /// below 1e-6.
    pub fn coherent_state(dim: usize, alpha: C64) -> Result<Self> {
        let spec = TruncationSpec::new(&[dim])?;
        if alpha.norm_sqr() > dim as f64 / 4.0 {
            return Err(SqemError::InvalidParameter(format!(
                "|alpha|^2 = {:.3} too large for cutoff {dim}",
                alpha.norm_sqr()
            )));
        }
        let mut psi = Array1::zeros(dim);
        let mut amp = C64::new(1.0, 0.0);
        psi[0] = amp;
        for n in 1..dim {
            amp *= alpha / C64::new((n as f64).sqrt(), 0.0);
            psi[n] = amp;
        }
        let norm: f64 = psi.iter().map(|c: &C64| c.norm_sqr()).sum::<f64>().sqrt();
        psi.mapv_inplace(|c| c / norm);
        Self::from_pure(spec, &psi)
    }

    /// Single-mode thermal state with mean occupation `nbar`, built by direct
    /// Fock summation and re-normalized on the truncated space.
    pub fn thermal_state(dim: usize, nbar: f64) -> Result<Self> {
        let spec = TruncationSpec::new(&[dim])?;
        if nbar < 0.0 {
            return Err(SqemError::InvalidParameter(format!("nbar {nbar} < 0")));
        }
        let mut rho = Array2::zeros((dim, dim));
        let ratio = if nbar > 0.0 { nbar / (nbar + 1.0) } else { 0.0 };
        let mut p = 1.0;
        let mut norm = 0.0;
        for n in 0..dim {
            rho[(n, n)] = C64::new(p, 0.0);
            norm += p;
            p *= ratio;
        }
        rho.mapv_inplace(|c| c / norm);
        Ok(Self { spec, rho })
    }

    /// Tensor product of two states (spec is the concatenation of modes).
    pub fn kron(&self, other: &QState) -> Result<Self> {
        let mut dims = self.spec.dims().to_vec();
        dims.extend_from_slice(other.spec.dims());
        let spec = TruncationSpec::new(&dims)?;
        let (da, db) = (self.spec.total_dim(), other.spec.total_dim());
        let rho = Array2::from_shape_fn((da * db, da * db), |(i, j)| {
            self.rho[(i / db, j / db)] * other.rho[(i % db, j % db)]
        });
        Ok(Self { spec, rho })
    }

    pub fn spec(&self) -> &TruncationSpec {
        &self.spec
    }

    pub fn rho(&self) -> &Array2<C64> {
        &self.rho
    }

    pub fn trace(&self) -> C64 {
        (0..self.spec.total_dim()).map(|i| self.rho[(i, i)]).sum()
    }

    /// Smallest eigenvalue of the density matrix (numerical positivity probe).
    pub fn min_eigenvalue(&self) -> f64 {
        crate::engine::linalg::min_hermitian_eigenvalue(&self.rho)
    }

    /// Full invariant check: Hermitian within 1e-12, unit trace within 1e-10,
    /// minimum eigenvalue >= -1e-8.
    pub fn validate(&self) -> Result<()> {
        let s = Self::from_density(self.spec.clone(), self.rho.clone())?;
        let lam = s.min_eigenvalue();
        if lam < -1e-8 {
            return Err(SqemError::ModelInvalid(format!(
                "density indefinite: min eigenvalue {lam:.3e}"
            )));
        }
        Ok(())
    }
}

/// `tr(rho X)`; real up to 1e-10 imaginary part when `X` is Hermitian.
pub fn expectation(state: &QState, op: &QOperator) -> Result<C64> {
    state.spec.check_same(&op.spec)?;
    // tr(X rho) = sum_{r,c} X[r,c] rho[c,r]
    let mut acc = C64::new(0.0, 0.0);
    for (r, c, v) in op.mat.iter() {
        acc += v * state.rho[(c, r)];
    }
    Ok(acc)
}

/// Expectation against a raw density matrix (engine-internal paths).
pub fn expectation_dense(rho: &Array2<C64>, op: &Csr) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (r, c, v) in op.iter() {
        acc += v * rho[(c, r)];
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn annihilation_two_level() {
        let a = QOperator::annihilation(2).unwrap().to_dense();
        assert_eq!(a[(0, 1)], re(1.0));
        for &(i, j) in &[(0, 0), (1, 0), (1, 1)] {
            assert_eq!(a[(i, j)], re(0.0));
        }
    }

    #[test]
    fn ladder_matrix_elements() {
        let a = QOperator::annihilation(5).unwrap().to_dense();
        // <2|a|3> = sqrt(3)
        assert!((a[(2, 3)] - re(3.0f64.sqrt())).norm() < 1e-15);
        for n in 1..5 {
            assert!((a[(n - 1, n)] - re((n as f64).sqrt())).norm() < 1e-15);
        }
        assert!(matches!(QOperator::annihilation(1), Err(SqemError::InvalidTruncation(_))));
    }

    #[test]
    fn ladder_action_lowers_fock_state() {
        // a |1> = |0>: a rho a^dag maps |1><1| to |0><0|
        let a = QOperator::annihilation(3).unwrap();
        let one = QState::fock_state(a.spec(), &[1]).unwrap();
        let lowered = a.mat().mul_dense(&a.mat().adjoint().dense_mul(one.rho()));
        assert!((lowered[(0, 0)] - re(1.0)).norm() < 1e-15);
    }

    #[test]
    fn embed_places_operator_and_identity() {
        let spec = TruncationSpec::new(&[2, 2]).unwrap();
        let a0 = QOperator::embed(&QOperator::annihilation(2).unwrap(), 0, &spec).unwrap();
        // embed(a, 0) applied to |1,0> gives |0,0>
        let from = spec.index_of(&[1, 0]).unwrap();
        let to = spec.index_of(&[0, 0]).unwrap();
        assert_eq!(a0.to_dense()[(to, from)], re(1.0));
        // identity embeds to the global identity on any mode
        for k in 0..2 {
            let id = QOperator::embed(&QOperator::identity(&TruncationSpec::new(&[2]).unwrap()), k, &spec).unwrap();
            let d = id.to_dense();
            for i in 0..4 {
                for j in 0..4 {
                    assert_eq!(d[(i, j)], re(if i == j { 1.0 } else { 0.0 }));
                }
            }
        }
    }

    #[test]
    fn embedded_operators_on_distinct_modes_commute() {
        let spec = TruncationSpec::new(&[3, 4]).unwrap();
        let a0 = QOperator::embed(&QOperator::annihilation(3).unwrap(), 0, &spec).unwrap();
        let a1d = QOperator::embed(&QOperator::creation(4).unwrap(), 1, &spec).unwrap();
        assert!(a0.commutator(&a1d).mat().max_abs() < 1e-15);
    }

    #[test]
    fn embed_errors() {
        let spec = TruncationSpec::new(&[2, 3]).unwrap();
        let a = QOperator::annihilation(2).unwrap();
        assert!(QOperator::embed(&a, 2, &spec).is_err());
        assert!(QOperator::embed(&a, 1, &spec).is_err()); // dim mismatch
    }

    #[test]
    fn canonical_commutator_up_to_truncation_edge() {
        for dim in 2..10usize {
            let a = QOperator::annihilation(dim).unwrap();
            let comm = a.commutator(&a.adjoint()).to_dense();
            for n in 0..dim {
                let expect = if n == dim - 1 { 1.0 - dim as f64 } else { 1.0 };
                assert!((comm[(n, n)] - re(expect)).norm() < 1e-13);
                for m in 0..dim {
                    if m != n {
                        assert!(comm[(n, m)].norm() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn number_operator_from_ladder() {
        let a = QOperator::annihilation(6).unwrap();
        let n = a.adjoint().matmul(&a).to_dense();
        for k in 0..6 {
            assert!((n[(k, k)] - re(k as f64)).norm() < 1e-14);
        }
    }

    #[test]
    fn adjoint_distributes_over_sum() {
        let spec = TruncationSpec::new(&[3, 3]).unwrap();
        let x = QOperator::embed(&QOperator::annihilation(3).unwrap(), 0, &spec).unwrap();
        let y = QOperator::embed(&QOperator::creation(3).unwrap(), 1, &spec).unwrap().scale(C64::new(0.3, -1.2));
        let lhs = x.add(&y).adjoint();
        let rhs = x.adjoint().add(&y.adjoint());
        assert!(lhs.mat().max_abs_diff(rhs.mat()) < 1e-15);
        // adjoint is an involution
        assert!(x.adjoint().adjoint().mat().max_abs_diff(x.mat()) < 1e-15);
    }

    #[test]
    fn embed_preserves_spectrum_with_multiplicity() {
        let spec = TruncationSpec::new(&[3, 2, 2]).unwrap();
        let n_single = QOperator::number(3).unwrap();
        let embedded = QOperator::embed(&n_single, 0, &spec).unwrap();
        let mut expect: Vec<f64> = Vec::new();
        for ev in [0.0, 1.0, 2.0] {
            expect.extend(std::iter::repeat(ev).take(spec.total_dim() / 3));
        }
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let got = crate::engine::linalg::hermitian_eigenvalues(&embedded.to_dense());
        for (g, e) in got.iter().zip(&expect) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn fock_state_projectors() {
        let spec = TruncationSpec::new(&[3]).unwrap();
        let vac = QState::fock_state(&spec, &[0]).unwrap();
        assert_eq!(vac.rho()[(0, 0)], re(1.0));
        assert_eq!(vac.rho()[(1, 1)], re(0.0));
        assert_eq!(vac.rho()[(2, 2)], re(0.0));
        assert!(QState::fock_state(&spec, &[3]).is_err());
        vac.validate().unwrap();
    }

    #[test]
    fn coherent_state_mean_and_tail() {
        // tail bound by direct summation of the Poisson weights
        let alpha = 1.0f64;
        let mut term = (-alpha * alpha).exp();
        let mut tail = 1.0;
        for n in 0..20 {
            tail -= term;
            term *= alpha * alpha / (n as f64 + 1.0);
        }
        assert!(tail.abs() < 1e-6);

        let st = QState::coherent_state(20, re(alpha)).unwrap();
        let n_op = QOperator::number(20).unwrap();
        let mean = expectation(&st, &n_op).unwrap();
        assert!((mean.re - 1.0).abs() < 1e-6);
        assert!(mean.im.abs() < 1e-10);
        st.validate().unwrap();
    }

    #[test]
    fn coherent_state_limits_and_errors() {
        let vac = QState::coherent_state(20, re(0.0)).unwrap();
        assert_eq!(vac.rho()[(0, 0)], re(1.0));
        // |alpha|^2 > dim/4 rejected
        assert!(QState::coherent_state(8, re(1.5)).is_err());
    }

    #[test]
    fn thermal_state_mean() {
        let st = QState::thermal_state(40, 0.5).unwrap();
        let n_op = QOperator::number(40).unwrap();
        assert!((expectation(&st, &n_op).unwrap().re - 0.5).abs() < 1e-9);
        st.validate().unwrap();
    }

    #[test]
    fn expectation_facts() {
        let spec = TruncationSpec::new(&[4]).unwrap();
        let n_op = QOperator::number(4).unwrap();
        let vac = QState::fock_state(&spec, &[0]).unwrap();
        assert_eq!(expectation(&vac, &n_op).unwrap(), re(0.0));
        let two = QState::fock_state(&spec, &[2]).unwrap();
        assert_eq!(expectation(&two, &n_op).unwrap(), re(2.0));
        // spec mismatch is a hard error
        let other = QOperator::number(5).unwrap();
        assert!(expectation(&two, &other).is_err());
    }

    #[test]
    fn state_kron_layout() {
        let a = QState::fock_state(&TruncationSpec::new(&[2]).unwrap(), &[1]).unwrap();
        let b = QState::fock_state(&TruncationSpec::new(&[3]).unwrap(), &[0]).unwrap();
        let ab = a.kron(&b).unwrap();
        let idx = ab.spec().index_of(&[1, 0]).unwrap();
        assert_eq!(idx, 3);
        assert_eq!(ab.rho()[(idx, idx)], re(1.0));
        assert_eq!(ab.spec().occupations_of(idx), vec![1, 0]);
    }
}
