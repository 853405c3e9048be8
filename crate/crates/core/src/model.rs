//! Hamiltonians and dissipators of every frame the toolkit handles: lab
//! frame, exact Bogoliubov frame, effective RWA frame, and the reduced
//! driven-blockade model, each packaged as a [`ModelSpec`] for the engine.
//!
//! The exact Bogoliubov model is deliberately built in the lab Fock basis
//! (the Bogoliubov operators enter as composite-space matrices), so frame
//! equivalence is an operator identity testable against the lab model.

use crate::design::{bath_moments, DerivedParams, SystemParams, OMEGA_M};
use crate::error::{Result, SqemError};
use crate::fock::{QOperator, TruncationSpec};
use ndarray::Array1;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Which frame a model's operators are written in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameLabel {
    Lab,
    BogoliubovExact,
    EffectiveRwa,
    ReducedBlockade,
}

/// One generalized Lindblad term: contributes
/// `rate * (A rho B^dag - (B^dag A rho + rho B^dag A) / 2)`
/// with `A = left`, `B = right`.
///
/// Diagonal terms (`A = B`) need `rate >= 0`; cross terms must appear in
/// swap-conjugate pairs `(A, B)` and `(B, A)` with equal rates so the total
/// generator preserves Hermiticity.
#[derive(Clone, Debug)]
pub struct DissipatorTerm {
    pub label: String,
    pub left: QOperator,
    pub right: QOperator,
    pub rate: f64,
}

impl DissipatorTerm {
    pub fn diagonal(label: &str, op: QOperator, rate: f64) -> Self {
        Self { label: label.into(), left: op.clone(), right: op, rate }
    }

    pub fn cross(label: &str, left: QOperator, right: QOperator, rate: f64) -> Self {
        Self { label: label.into(), left, right, rate }
    }

    fn is_diagonal(&self) -> bool {
        let scale = self.left.mat().max_abs().max(1.0);
        self.left.mat().max_abs_diff(self.right.mat()) <= 1e-14 * scale
    }
}

/// A Hamiltonian plus dissipator list: the complete Lindblad generator of
/// one frame.
#[derive(Clone, Debug)]
pub struct ModelSpec {
    spec: TruncationSpec,
    hamiltonian: QOperator,
    dissipators: Vec<DissipatorTerm>,
    frame: FrameLabel,
    params_record: serde_json::Value,
}

impl ModelSpec {
    pub fn new(
        spec: TruncationSpec,
        hamiltonian: QOperator,
        dissipators: Vec<DissipatorTerm>,
        frame: FrameLabel,
        params_record: serde_json::Value,
    ) -> Result<Self> {
        if hamiltonian.spec() != &spec {
            return Err(SqemError::SpecMismatch("hamiltonian spec".into()));
        }
        if !hamiltonian.is_hermitian(1e-12) {
            return Err(SqemError::ModelInvalid("hamiltonian not Hermitian within 1e-12".into()));
        }
        for term in &dissipators {
            if term.left.spec() != &spec || term.right.spec() != &spec {
                return Err(SqemError::SpecMismatch(format!("dissipator term {}", term.label)));
            }
            if term.is_diagonal() && term.rate < 0.0 {
                return Err(SqemError::ModelInvalid(format!(
                    "diagonal dissipator {} has negative rate {}",
                    term.label, term.rate
                )));
            }
        }
        // Hermiticity preservation: every cross term needs its swap partner
        // at the same rate.
        for (i, t) in dissipators.iter().enumerate() {
            if t.is_diagonal() {
                continue;
            }
            let scale = t.left.mat().max_abs().max(1.0);
            let found = dissipators.iter().enumerate().any(|(j, u)| {
                j != i
                    && (u.rate - t.rate).abs() <= 1e-14 * t.rate.abs().max(1.0)
                    && u.left.mat().max_abs_diff(t.right.mat()) <= 1e-12 * scale
                    && u.right.mat().max_abs_diff(t.left.mat()) <= 1e-12 * scale
            });
            if !found {
                return Err(SqemError::ModelInvalid(format!(
                    "cross dissipator {} lacks its conjugate partner",
                    t.label
                )));
            }
        }
        Ok(Self { spec, hamiltonian, dissipators, frame, params_record })
    }

    pub fn spec(&self) -> &TruncationSpec {
        &self.spec
    }

    pub fn hamiltonian(&self) -> &QOperator {
        &self.hamiltonian
    }

    pub fn dissipators(&self) -> &[DissipatorTerm] {
        &self.dissipators
    }

    pub fn frame(&self) -> FrameLabel {
        self.frame
    }

    /// Reproducibility descriptor: frame, truncation, parameter record and
    /// the dissipator list by symbolic name and rate. Operators are rebuilt
    /// from this record, never serialized.
    pub fn descriptor(&self) -> serde_json::Value {
        serde_json::json!({
            "frame": self.frame,
            "dims": self.spec.dims(),
            "params": self.params_record,
            "dissipators": self.dissipators.iter().map(|t| {
                serde_json::json!({ "term": t.label, "rate": t.rate })
            }).collect::<Vec<_>>(),
        })
    }
}

fn ladder(spec: &TruncationSpec, mode: usize) -> Result<(QOperator, QOperator)> {
    let a = QOperator::embed(&QOperator::annihilation(spec.dims()[mode])?, mode, spec)?;
    let adag = a.adjoint();
    Ok((a, adag))
}

fn mech_terms(
    spec: &TruncationSpec,
    mech_mode: usize,
    gamma_m: f64,
    n_th: f64,
) -> Result<Vec<DissipatorTerm>> {
    if gamma_m < 0.0 || n_th < 0.0 {
        return Err(SqemError::InvalidParameter("gamma_m and n_th must be >= 0".into()));
    }
    let (b, bdag) = ladder(spec, mech_mode)?;
    let mut terms = Vec::new();
    if gamma_m > 0.0 {
        terms.push(DissipatorTerm::diagonal("gamma_m(n_th+1) D[b]", b, gamma_m * (n_th + 1.0)));
        if n_th > 0.0 {
            terms.push(DissipatorTerm::diagonal("gamma_m n_th D[b_dag]", bdag, gamma_m * n_th));
        }
    }
    Ok(terms)
}

/// Lab-frame model: bare cavities with the parametric coupling, radiation
/// pressure on cavity 1, the two-mode-squeezed cavity bath (including its
/// cross terms), and the thermal mechanical bath.
pub fn build_lab_model(
    params: &SystemParams,
    derived: &DerivedParams,
    spec: &TruncationSpec,
) -> Result<ModelSpec> {
    params.validate()?;
    if spec.n_modes() != 3 {
        return Err(SqemError::InvalidTruncation(format!(
            "lab model needs 3 modes, got {}",
            spec.n_modes()
        )));
    }
    let (m_chk, n_chk) = bath_moments(derived.r0);
    if (derived.m - m_chk).abs() > 1e-12 * m_chk.max(1.0)
        || (derived.n - n_chk).abs() > 1e-12 * n_chk.max(1.0)
    {
        return Err(SqemError::InconsistentParams(format!(
            "bath moments (M, N) = ({}, {}) do not match r0 = {}",
            derived.m, derived.n, derived.r0
        )));
    }

    let (a1, a1d) = ladder(spec, 0)?;
    let (a2, a2d) = ladder(spec, 1)?;
    let (b, bd) = ladder(spec, 2)?;
    let n1 = a1d.matmul(&a1);
    let n2 = a2d.matmul(&a2);
    let nb = bd.matmul(&b);
    let x_b = b.add(&bd);

    let pair = a1d.matmul(&a2d);
    let mut h = n1.scale_re(params.delta1).add(&n2.scale_re(params.delta2));
    h = h.add(&pair.add(&pair.adjoint()).scale_re(params.xi));
    h = h.add(&nb.scale_re(OMEGA_M));
    h = h.add(&n1.matmul(&x_b).scale_re(params.g));

    let kappa = params.kappa;
    let (m, n) = (derived.m, derived.n);
    let mut terms = vec![
        DissipatorTerm::diagonal("kappa(N+1) D[a1]", a1.clone(), kappa * (n + 1.0)),
        DissipatorTerm::diagonal("kappa(N+1) D[a2]", a2.clone(), kappa * (n + 1.0)),
    ];
    if n > 0.0 {
        terms.push(DissipatorTerm::diagonal("kappa N D[a1_dag]", a1d.clone(), kappa * n));
        terms.push(DissipatorTerm::diagonal("kappa N D[a2_dag]", a2d.clone(), kappa * n));
    }
    if m > 0.0 {
        // kappa M (a1 rho a2 + a2 rho a1 - a1 a2 rho - rho a1 a2 + H.c.)
        terms.push(DissipatorTerm::cross("kappa M (a1 . a2)", a1.clone(), a2d.clone(), kappa * m));
        terms.push(DissipatorTerm::cross("kappa M (a2 . a1)", a2.clone(), a1d.clone(), kappa * m));
        terms.push(DissipatorTerm::cross("kappa M (a1_dag . a2_dag)", a1d, a2, kappa * m));
        terms.push(DissipatorTerm::cross("kappa M (a2_dag . a1_dag)", a2d, a1, kappa * m));
    }
    terms.extend(mech_terms(spec, 2, params.gamma_m, params.n_th)?);

    ModelSpec::new(
        spec.clone(),
        h,
        terms,
        FrameLabel::Lab,
        serde_json::json!({
            "delta1": params.delta1, "delta2": params.delta2, "xi": params.xi,
            "g": params.g, "kappa": kappa, "gamma_m": params.gamma_m,
            "n_th": params.n_th, "r0": derived.r0, "M": m, "N": n,
        }),
    )
}

/// Bogoliubov mode matrices on the lab Fock basis:
/// `A1 = cosh r0 a1 + sinh r0 a2^dag`, `A2 = cosh r0 a2 + sinh r0 a1^dag`.
/// Works on any spec whose first two modes are the cavities.
pub fn bogoliubov_operators(r0: f64, spec: &TruncationSpec) -> Result<(QOperator, QOperator)> {
    if spec.n_modes() < 2 {
        return Err(SqemError::InvalidTruncation("need both cavity modes".into()));
    }
    let (a1, a1d) = ladder(spec, 0)?;
    let (a2, a2d) = ladder(spec, 1)?;
    let (c, s) = (r0.cosh(), r0.sinh());
    let big_a1 = a1.scale_re(c).add(&a2d.scale_re(s));
    let big_a2 = a2.scale_re(c).add(&a1d.scale_re(s));
    Ok((big_a1, big_a2))
}

/// Exact Bogoliubov-frame model on the lab Fock basis: transformed
/// Hamiltonian (pair terms already cancelled by the r0 selection rule,
/// counter-rotating radiation-pressure terms retained) with plain vacuum
/// damping of the Bogoliubov modes.
///
/// Generates the same dynamics as [`build_lab_model`] up to truncation
/// effects and a c-number shift of the Hamiltonian.
pub fn build_bogoliubov_exact_model(
    params: &SystemParams,
    derived: &DerivedParams,
    spec: &TruncationSpec,
) -> Result<ModelSpec> {
    params.validate()?;
    if spec.n_modes() != 3 {
        return Err(SqemError::InvalidTruncation(format!(
            "bogoliubov-exact model needs 3 modes, got {}",
            spec.n_modes()
        )));
    }
    let (m_chk, n_chk) = bath_moments(derived.r0);
    if (derived.m - m_chk).abs() > 1e-12 * m_chk.max(1.0)
        || (derived.n - n_chk).abs() > 1e-12 * n_chk.max(1.0)
    {
        return Err(SqemError::InconsistentParams("bath moments do not match r0".into()));
    }

    let (big_a1, big_a2) = bogoliubov_operators(derived.r0, spec)?;
    let (b, bd) = ladder(spec, 2)?;
    let nb = bd.matmul(&b);
    let x_b = b.add(&bd);
    let (c, s) = (derived.r0.cosh(), derived.r0.sinh());

    let n_a1 = big_a1.adjoint().matmul(&big_a1);
    let n_a2 = big_a2.adjoint().matmul(&big_a2);
    // A2 A2^dag kept un-normal-ordered, exactly as transformed
    let a2a2d = big_a2.matmul(&big_a2.adjoint());
    let pair = big_a1.adjoint().matmul(&big_a2.adjoint());

    let mut coupling = n_a1.scale_re(c * c).add(&a2a2d.scale_re(s * s));
    coupling = coupling.sub(&pair.add(&pair.adjoint()).scale_re(s * c));

    let mut h = n_a1.scale_re(derived.omega1).add(&n_a2.scale_re(derived.omega2));
    h = h.add(&nb.scale_re(OMEGA_M));
    h = h.add(&x_b.matmul(&coupling).scale_re(params.g));

    let mut terms = vec![
        DissipatorTerm::diagonal("kappa D[A1]", big_a1, params.kappa),
        DissipatorTerm::diagonal("kappa D[A2]", big_a2, params.kappa),
    ];
    terms.extend(mech_terms(spec, 2, params.gamma_m, params.n_th)?);

    ModelSpec::new(
        spec.clone(),
        h,
        terms,
        FrameLabel::BogoliubovExact,
        serde_json::json!({
            "delta1": params.delta1, "delta2": params.delta2, "xi": params.xi,
            "g": params.g, "kappa": params.kappa, "gamma_m": params.gamma_m,
            "n_th": params.n_th, "r0": derived.r0,
            "omega1": derived.omega1, "omega2": derived.omega2,
        }),
    )
}

/// Effective RWA model with the Bogoliubov modes as primitive modes of a
/// fresh 3-mode space: pure radiation-pressure coupling at the enhanced
/// strengths `G1`, `G2`, vacuum cavity damping.
pub fn build_effective_model(
    derived: &DerivedParams,
    omega_m: f64,
    kappa: f64,
    gamma_m: f64,
    n_th: f64,
    spec: &TruncationSpec,
) -> Result<ModelSpec> {
    if spec.n_modes() != 3 {
        return Err(SqemError::InvalidTruncation(format!(
            "effective model needs 3 modes, got {}",
            spec.n_modes()
        )));
    }
    let (a1, a1d) = ladder(spec, 0)?;
    let (a2, a2d) = ladder(spec, 1)?;
    let (b, bd) = ladder(spec, 2)?;
    let n1 = a1d.matmul(&a1);
    let n2 = a2d.matmul(&a2);
    let nb = bd.matmul(&b);
    let x_b = b.add(&bd);

    let mut h = n1.scale_re(derived.omega1).add(&n2.scale_re(derived.omega2));
    h = h.add(&nb.scale_re(omega_m));
    h = h.add(&x_b.matmul(&n1).scale_re(derived.g1));
    h = h.add(&x_b.matmul(&n2).scale_re(derived.g2));

    let mut terms = vec![
        DissipatorTerm::diagonal("kappa D[A1]", a1, kappa),
        DissipatorTerm::diagonal("kappa D[A2]", a2, kappa),
    ];
    terms.extend(mech_terms(spec, 2, gamma_m, n_th)?);

    ModelSpec::new(
        spec.clone(),
        h,
        terms,
        FrameLabel::EffectiveRwa,
        serde_json::json!({
            "omega1": derived.omega1, "omega2": derived.omega2, "omega_m": omega_m,
            "g1": derived.g1, "g2": derived.g2, "kappa": kappa,
            "gamma_m": gamma_m, "n_th": n_th,
        }),
    )
}

/// Driven single-Bogoliubov-mode blockade model on a (cavity, mechanics)
/// space, in the probe rotating frame.
///
/// `delta0` is the spectroscopy detuning axis: the cavity term enters the
/// rotating-frame Hamiltonian as `-delta0 * A^dag A`, so the phonon-order-n
/// resonances sit at `delta0 = n omega_m - G1^2/omega_m` and the zero-phonon
/// line is red-shifted to `delta0 = -G1^2/omega_m`.
#[allow(clippy::too_many_arguments)]
pub fn build_reduced_blockade_model(
    g1: f64,
    delta0: f64,
    omega_m: f64,
    kappa: f64,
    gamma_m: f64,
    n_th: f64,
    epsilon_eff: f64,
    spec: &TruncationSpec,
) -> Result<ModelSpec> {
    if spec.n_modes() != 2 {
        return Err(SqemError::InvalidTruncation(format!(
            "blockade model needs (cavity, mechanics), got {} modes",
            spec.n_modes()
        )));
    }
    if epsilon_eff < 0.0 {
        return Err(SqemError::InvalidParameter("epsilon_eff must be >= 0".into()));
    }
    let (a, ad) = ladder(spec, 0)?;
    let (b, bd) = ladder(spec, 1)?;
    let na = ad.matmul(&a);
    let nb = bd.matmul(&b);
    let x_b = b.add(&bd);

    let mut h = na.scale_re(-delta0).add(&nb.scale_re(omega_m));
    h = h.add(&x_b.matmul(&na).scale_re(g1));
    h = h.add(&a.add(&ad).scale_re(epsilon_eff));

    let mut terms = vec![DissipatorTerm::diagonal("kappa D[A1]", a, kappa)];
    terms.extend(mech_terms(spec, 1, gamma_m, n_th)?);

    ModelSpec::new(
        spec.clone(),
        h,
        terms,
        FrameLabel::ReducedBlockade,
        serde_json::json!({
            "g1": g1, "delta0": delta0, "omega_m": omega_m, "kappa": kappa,
            "gamma_m": gamma_m, "n_th": n_th, "epsilon_eff": epsilon_eff,
        }),
    )
}

/// Probe amplitude and rotating-frame probe frequency.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ProbeParams {
    pub epsilon: f64,
    pub omega_p_rot: f64,
}

/// Static probe operator in the probe rotating frame.
///
/// With `rwa`, only the co-rotating first-mode term survives:
/// `E cosh r0 (A1 + A1^dag)`. Without it the counter-term
/// `-E sinh r0 (A2^dag + A2)` is retained. The caller combines this with
/// the `omega_p_rot` frame shift of the mode frequencies.
pub fn build_probe_term(
    probe: &ProbeParams,
    r0: f64,
    spec: &TruncationSpec,
    rwa: bool,
) -> Result<QOperator> {
    if probe.epsilon < 0.0 {
        return Err(SqemError::InvalidParameter("epsilon must be >= 0".into()));
    }
    let (big_a1, big_a2) = bogoliubov_operators(r0, spec)?;
    let term = big_a1.add(&big_a1.adjoint()).scale_re(probe.epsilon * r0.cosh());
    if rwa {
        Ok(term)
    } else {
        Ok(term.sub(&big_a2.adjoint().add(&big_a2).scale_re(probe.epsilon * r0.sinh())))
    }
}

/// Bogoliubov vacuum ket in the lab Fock basis: the two-mode squeezed state
/// `sqrt(1 - tanh^2 r0) sum_n (-tanh r0)^n |n, n>` on the cavity modes,
/// with any further modes in their ground state.
pub fn bogoliubov_vacuum_ket(r0: f64, spec: &TruncationSpec) -> Result<Array1<C64>> {
    if spec.n_modes() < 2 {
        return Err(SqemError::InvalidTruncation("need both cavity modes".into()));
    }
    let d = spec.total_dim();
    let t = r0.tanh();
    let mut psi = Array1::zeros(d);
    let n_max = spec.dims()[0].min(spec.dims()[1]);
    let mut occ = vec![0usize; spec.n_modes()];
    let mut amp = 1.0;
    let mut norm = 0.0;
    for n in 0..n_max {
        occ[0] = n;
        occ[1] = n;
        psi[spec.index_of(&occ)?] = C64::new(amp, 0.0);
        norm += amp * amp;
        amp *= -t;
    }
    let norm = norm.sqrt();
    psi.mapv_inplace(|c| c / norm);
    Ok(psi)
}

/// Normalized single-excitation state `A1^dag |vac_B>` in the lab basis.
pub fn bogoliubov_excited_ket(r0: f64, spec: &TruncationSpec) -> Result<Array1<C64>> {
    let vac = bogoliubov_vacuum_ket(r0, spec)?;
    let (big_a1, _) = bogoliubov_operators(r0, spec)?;
    let mut psi = Array1::zeros(spec.total_dim());
    let a1d = big_a1.adjoint();
    for (r, c, v) in a1d.mat().iter() {
        psi[r] += v * vac[c];
    }
    let norm: f64 = psi.iter().map(|c: &C64| c.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return Err(SqemError::TruncationTooSmall("A1^dag annihilated the squeezed vacuum".into()));
    }
    psi.mapv_inplace(|c| c / norm);
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::derive;
    use crate::fock::QState;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn params(xi: f64, g: f64) -> (SystemParams, DerivedParams) {
        let p = SystemParams {
            delta1: 1000.0,
            delta2: 1000.0,
            xi,
            g,
            kappa: 0.02,
            gamma_m: 1e-3,
            n_th: 0.0,
            omega_d: None,
        };
        let d = derive(&p).unwrap();
        (p, d)
    }

    #[test]
    fn lab_model_matrix_elements() {
        let spec = TruncationSpec::new(&[3, 3, 3]).unwrap();
        let (p, d) = params(800.0, 0.001);
        let m = build_lab_model(&p, &d, &spec).unwrap();
        let h = m.hamiltonian().to_dense();
        let i110 = spec.index_of(&[1, 1, 0]).unwrap();
        let i000 = spec.index_of(&[0, 0, 0]).unwrap();
        assert!((h[(i110, i000)] - re(p.xi)).norm() < 1e-12);
        let i101 = spec.index_of(&[1, 0, 1]).unwrap();
        let i100 = spec.index_of(&[1, 0, 0]).unwrap();
        assert!((h[(i101, i100)] - re(p.g)).norm() < 1e-12);
        assert!(m.hamiltonian().is_hermitian(1e-12));
    }

    #[test]
    fn lab_model_cross_terms_vanish_without_squeezing() {
        let spec = TruncationSpec::new(&[3, 3, 2]).unwrap();
        // r0 = 0 exactly: M = N = 0, two vacuum-damped cavities remain
        let (p, d) = params(1e-12, 0.001);
        let d0 = DerivedParams { r0: 0.0, m: 0.0, n: 0.0, ..d };
        let m = build_lab_model(&p, &d0, &spec).unwrap();
        assert_eq!(m.dissipators().len(), 3); // kappa D[a1], kappa D[a2], mech
        let (p8, d8) = params(800.0, 0.001);
        let m8 = build_lab_model(&p8, &d8, &spec).unwrap();
        assert_eq!(m8.dissipators().len(), 9); // + 2 heating + 4 cross terms
    }

    #[test]
    fn lab_model_errors() {
        let (p, d) = params(800.0, 0.001);
        let two_modes = TruncationSpec::new(&[3, 3]).unwrap();
        assert!(build_lab_model(&p, &d, &two_modes).is_err());
        let spec = TruncationSpec::new(&[3, 3, 2]).unwrap();
        let bad = DerivedParams { m: d.m + 1e-3, ..d };
        assert!(matches!(
            build_lab_model(&p, &bad, &spec),
            Err(SqemError::InconsistentParams(_))
        ));
    }

    #[test]
    fn bogoliubov_operators_reduce_and_commute() {
        let spec = TruncationSpec::new(&[6, 6]).unwrap();
        let (b1, b2) = bogoliubov_operators(0.0, &spec).unwrap();
        let a1 = QOperator::embed(&QOperator::annihilation(6).unwrap(), 0, &spec).unwrap();
        let a2 = QOperator::embed(&QOperator::annihilation(6).unwrap(), 1, &spec).unwrap();
        assert!(b1.mat().max_abs_diff(a1.mat()) < 1e-15);
        assert!(b2.mat().max_abs_diff(a2.mat()) < 1e-15);

        // canonical on the interior subspace (both occupations < cutoff - 1)
        let (b1, b2) = bogoliubov_operators(0.5, &spec).unwrap();
        let comm = b1.commutator(&b1.adjoint()).to_dense();
        let cross = b1.commutator(&b2).to_dense();
        for i in 0..spec.total_dim() {
            let occ = spec.occupations_of(i);
            if occ[0] < 4 && occ[1] < 4 {
                assert!((comm[(i, i)] - re(1.0)).norm() < 1e-12, "occ {occ:?}");
                for j in 0..spec.total_dim() {
                    let oj = spec.occupations_of(j);
                    if oj[0] < 4 && oj[1] < 4 {
                        if j != i {
                            assert!(comm[(i, j)].norm() < 1e-12);
                        }
                        assert!(cross[(i, j)].norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn bogoliubov_model_reduces_to_lab_at_zero_coupling() {
        // xi -> 0: the transform degenerates to the identity and the two
        // Hamiltonians agree elementwise
        let spec = TruncationSpec::new(&[4, 4, 3]).unwrap();
        let (p, d) = params(1e-12, 0.3);
        let lab = build_lab_model(&p, &d, &spec).unwrap();
        let bog = build_bogoliubov_exact_model(&p, &d, &spec).unwrap();
        assert!(lab.hamiltonian().mat().max_abs_diff(bog.hamiltonian().mat()) < 1e-7);
    }

    #[test]
    fn a2_a2dag_keeps_constant_shift() {
        let spec = TruncationSpec::new(&[5, 5]).unwrap();
        let r0 = 0.4;
        let (_, b2) = bogoliubov_operators(r0, &spec).unwrap();
        let prod = b2.matmul(&b2.adjoint()).to_dense();
        // <0,0| A2 A2^dag |0,0> = cosh^2 r0
        assert!((prod[(0, 0)] - re(r0.cosh().powi(2))).norm() < 1e-12);
        // interior identity A2 A2^dag = A2^dag A2 + 1
        let normal = b2.adjoint().matmul(&b2).to_dense();
        for i in 0..spec.total_dim() {
            let occ = spec.occupations_of(i);
            if occ[0] < 3 && occ[1] < 3 {
                assert!((prod[(i, i)] - normal[(i, i)] - re(1.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn effective_model_elements_and_decoupling() {
        let spec = TruncationSpec::new(&[3, 3, 4]).unwrap();
        let (_, d) = params(800.0, 0.001);
        let m = build_effective_model(&d, 1.0, 0.02, 1e-3, 0.0, &spec).unwrap();
        let h = m.hamiltonian().to_dense();
        let i101 = spec.index_of(&[1, 0, 1]).unwrap();
        let i100 = spec.index_of(&[1, 0, 0]).unwrap();
        assert!((h[(i101, i100)] - re(d.g1)).norm() < 1e-14);

        // r0 = 0: G2 = 0, second mode decouples from mechanics
        let (_, d0) = params(1e-12, 0.001);
        let m0 = build_effective_model(&d0, 1.0, 0.02, 1e-3, 0.0, &spec).unwrap();
        let h0 = m0.hamiltonian().to_dense();
        let i011 = spec.index_of(&[0, 1, 1]).unwrap();
        let i010 = spec.index_of(&[0, 1, 0]).unwrap();
        assert!(h0[(i011, i010)].norm() < 1e-15);

        // zero-excitation cavity sector: free mechanics spectrum omega_m * n
        for nb in 0..4 {
            let i = spec.index_of(&[0, 0, nb]).unwrap();
            assert!((h[(i, i)] - re(nb as f64)).norm() < 1e-14);
            for j in 0..spec.total_dim() {
                if j != i && spec.occupations_of(j)[0] == 0 && spec.occupations_of(j)[1] == 0 {
                    assert!(h[(i, j)].norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn blockade_model_detuning_sign_and_drive() {
        let spec = TruncationSpec::new(&[3, 4]).unwrap();
        let delta0 = -1.0;
        let m = build_reduced_blockade_model(1.0, delta0, 1.0, 0.1, 1e-3, 0.0, 0.01, &spec).unwrap();
        let h = m.hamiltonian().to_dense();
        let i10 = spec.index_of(&[1, 0]).unwrap();
        let i00 = spec.index_of(&[0, 0]).unwrap();
        // cavity detuning enters as -delta0 * n
        assert!((h[(i10, i10)] - re(-delta0)).norm() < 1e-14);
        assert!((h[(i10, i00)] - re(0.01)).norm() < 1e-14);
        assert!(m.hamiltonian().is_hermitian(1e-13));
    }

    #[test]
    fn probe_term_is_exactly_the_lab_drive() {
        // the Bogoliubov rewrite of the probe is exact: the full (non-RWA)
        // operator must coincide elementwise with E (a1 + a1^dag)
        let spec = TruncationSpec::new(&[5, 5]).unwrap();
        let probe = ProbeParams { epsilon: 0.3, omega_p_rot: 0.0 };
        let full = build_probe_term(&probe, 0.549306, &spec, false).unwrap();
        let a1 = QOperator::embed(&QOperator::annihilation(5).unwrap(), 0, &spec).unwrap();
        let lab = a1.add(&a1.adjoint()).scale_re(probe.epsilon);
        assert!(full.mat().max_abs_diff(lab.mat()) < 1e-12);
        assert!(full.is_hermitian(1e-13));

        // with the RWA the A2^dag counter-term (coefficient -E sinh r0) is
        // dropped and the two forms differ by exactly that term
        let rwa = build_probe_term(&probe, 0.549306, &spec, true).unwrap();
        let (_, b2) = bogoliubov_operators(0.549306, &spec).unwrap();
        let dropped = b2.adjoint().add(&b2).scale_re(-probe.epsilon * 0.549306f64.sinh());
        assert!(rwa.add(&dropped).mat().max_abs_diff(full.mat()) < 1e-12);
        // sinh^2 r0 = 1/3 at this r0
        assert!((0.549306f64.sinh().powi(2) - 1.0 / 3.0).abs() < 1e-6);

        // r0 = 0: both forms couple only mode 1 at bare amplitude
        let bare = build_probe_term(&probe, 0.0, &spec, false).unwrap();
        let bare_rwa = build_probe_term(&probe, 0.0, &spec, true).unwrap();
        assert!(bare.mat().max_abs_diff(lab.mat()) < 1e-15);
        assert!(bare_rwa.mat().max_abs_diff(lab.mat()) < 1e-15);
    }

    #[test]
    fn squeezed_vacuum_is_annihilated_by_bogoliubov_modes() {
        let spec = TruncationSpec::new(&[12, 12]).unwrap();
        let r0 = 0.5;
        let vac = bogoliubov_vacuum_ket(r0, &spec).unwrap();
        let (b1, b2) = bogoliubov_operators(r0, &spec).unwrap();
        for op in [&b1, &b2] {
            let mut out = Array1::<C64>::zeros(spec.total_dim());
            for (r, c, v) in op.mat().iter() {
                out[r] += v * vac[c];
            }
            let norm: f64 = out.iter().map(|c: &C64| c.norm_sqr()).sum::<f64>().sqrt();
            assert!(norm < 1e-6, "residual {norm:.2e}");
        }
        // lab-frame photon number of the squeezed vacuum is sinh^2 r0
        let rho = QState::from_pure(spec.clone(), &vac).unwrap();
        let n1 = {
            let a = QOperator::embed(&QOperator::annihilation(12).unwrap(), 0, &spec).unwrap();
            a.adjoint().matmul(&a)
        };
        let got = crate::fock::expectation(&rho, &n1).unwrap().re;
        assert!((got - r0.sinh().powi(2)).abs() < 1e-6);
    }

    #[test]
    fn excited_ket_has_unit_bogoliubov_occupation() {
        let spec = TruncationSpec::new(&[12, 12]).unwrap();
        let r0 = 0.5;
        let psi = bogoliubov_excited_ket(r0, &spec).unwrap();
        let rho = QState::from_pure(spec.clone(), &psi).unwrap();
        let (b1, _) = bogoliubov_operators(r0, &spec).unwrap();
        let n_b1 = b1.adjoint().matmul(&b1);
        let got = crate::fock::expectation(&rho, &n_b1).unwrap().re;
        assert!((got - 1.0).abs() < 1e-5, "got {got}");
    }

    #[test]
    fn model_validation_rejects_bad_input() {
        let spec = TruncationSpec::new(&[3, 3]).unwrap();
        let a1 = QOperator::embed(&QOperator::annihilation(3).unwrap(), 0, &spec).unwrap();
        let a2 = QOperator::embed(&QOperator::annihilation(3).unwrap(), 1, &spec).unwrap();
        // non-Hermitian Hamiltonian
        assert!(matches!(
            ModelSpec::new(spec.clone(), a1.clone(), vec![], FrameLabel::Lab, serde_json::json!({})),
            Err(SqemError::ModelInvalid(_))
        ));
        // unpaired cross term
        let h = QOperator::zero(&spec);
        let term = DissipatorTerm::cross("lonely", a1.clone(), a2.clone(), 0.1);
        assert!(matches!(
            ModelSpec::new(spec.clone(), h.clone(), vec![term], FrameLabel::Lab, serde_json::json!({})),
            Err(SqemError::ModelInvalid(_))
        ));
        // paired cross terms pass
        let t1 = DissipatorTerm::cross("x", a1.clone(), a2.clone(), 0.1);
        let t2 = DissipatorTerm::cross("y", a2, a1, 0.1);
        assert!(ModelSpec::new(spec, h, vec![t1, t2], FrameLabel::Lab, serde_json::json!({})).is_ok());
    }
}
