//! Engine behavior against analytic oracles: Liouvillian spectra, decay
//! laws, linear-response steady states, squeezed-bath fixed points and
//! photon statistics.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use sqem::design::{derive, SystemParams};
use sqem::engine::{
    build_liouvillian, dense_exponential_steady, evolve, evolve_observables, expm_propagate,
    franck_condon_oracle, g2_trajectory, g2_zero, steady_state, Tolerances,
};
use sqem::engine::linalg::general_eigenvalues;
use sqem::fock::{expectation, QOperator, QState, TruncationSpec};
use sqem::model::{
    bogoliubov_operators, build_lab_model, build_reduced_blockade_model, DissipatorTerm,
    FrameLabel, ModelSpec,
};
use sqem::SqemError;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Single decaying mode with no Hamiltonian.
fn decay_model(dim: usize, kappa: f64) -> ModelSpec {
    let spec = TruncationSpec::new(&[dim]).unwrap();
    let a = QOperator::embed(&QOperator::annihilation(dim).unwrap(), 0, &spec).unwrap();
    ModelSpec::new(
        spec.clone(),
        QOperator::zero(&spec),
        vec![DissipatorTerm::diagonal("kappa D[a]", a, kappa)],
        FrameLabel::Lab,
        serde_json::json!({"kappa": kappa}),
    )
    .unwrap()
}

fn lab_fixture(xi: f64, g: f64, kappa: f64, dims: &[usize]) -> (ModelSpec, TruncationSpec) {
    let p = SystemParams {
        delta1: 1.5,
        delta2: 1.5,
        xi,
        g,
        kappa,
        gamma_m: 1e-3,
        n_th: 0.0,
        omega_d: None,
    };
    let d = derive(&p).unwrap();
    let spec = TruncationSpec::new(dims).unwrap();
    (build_lab_model(&p, &d, &spec).unwrap(), spec)
}

#[test]
fn two_level_decay_spectrum() {
    // amplitude damping at kappa = 1: eigenvalues {0, -1/2, -1/2, -1}
    let model = decay_model(2, 1.0);
    let l = build_liouvillian(&model).unwrap();
    let mut ev: Vec<f64> = general_eigenvalues(&l.csr().to_dense())
        .unwrap()
        .iter()
        .map(|z| z.re)
        .collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let expect = [-1.0, -0.5, -0.5, 0.0];
    for (g, e) in ev.iter().zip(&expect) {
        assert!((g - e).abs() < 1e-12, "{ev:?}");
    }

    // known eigenvectors, asserted directly on the superoperator action:
    // |0><1| decays at kappa/2, |1><1| - |0><0| at kappa
    let d = 2;
    let vec_of = |entries: &[((usize, usize), f64)]| {
        let mut v = vec![re(0.0); d * d];
        for &((r, c), x) in entries {
            v[c * d + r] = re(x);
        }
        v
    };
    let coh = vec_of(&[((0, 1), 1.0)]);
    let out = l.apply_vec(&coh);
    for (o, i) in out.iter().zip(coh.iter()) {
        assert!((*o + 0.5 * *i).norm() < 1e-14);
    }
    let pop = vec_of(&[((1, 1), 1.0), ((0, 0), -1.0)]);
    let out = l.apply_vec(&pop);
    for (o, i) in out.iter().zip(pop.iter()) {
        assert!((*o + *i).norm() < 1e-14);
    }
}

#[test]
fn zero_generator_for_trivial_model() {
    let spec = TruncationSpec::new(&[3]).unwrap();
    let model = ModelSpec::new(
        spec.clone(),
        QOperator::zero(&spec),
        vec![],
        FrameLabel::Lab,
        serde_json::json!({}),
    )
    .unwrap();
    let l = build_liouvillian(&model).unwrap();
    assert_eq!(l.csr().max_abs(), 0.0);
}

#[test]
fn lab_liouvillian_preserves_trace_and_stability() {
    let (model, _) = lab_fixture(0.55, 0.2, 0.7, &[4, 4, 2]);
    let l = build_liouvillian(&model).unwrap();
    assert!(l.trace_residual() < 1e-10, "residual {}", l.trace_residual());
    // no eigenvalue with positive real part beyond 1e-8
    let max_re = general_eigenvalues(&l.csr().to_dense())
        .unwrap()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(max_re < 1e-8, "spectral abscissa {max_re}");
}

#[test]
fn generator_maps_hermitian_to_hermitian() {
    let (model, spec) = lab_fixture(0.55, 0.2, 0.7, &[3, 3, 2]);
    let gen = sqem::engine::Generator::new(&model);
    let d = spec.total_dim();
    // pseudo-random Hermitian input
    let mut h = Array2::<C64>::zeros((d, d));
    let mut state = 88172645463325252u64;
    let mut rnd = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state as f64 / u64::MAX as f64) - 0.5
    };
    for i in 0..d {
        for j in i..d {
            let v = if i == j { C64::new(rnd(), 0.0) } else { C64::new(rnd(), rnd()) };
            h[(i, j)] = v;
            h[(j, i)] = v.conj();
        }
    }
    let out = gen.apply(&h);
    for i in 0..d {
        for j in 0..d {
            assert!((out[(i, j)] - out[(j, i)].conj()).norm() < 1e-12);
        }
    }
    // and annihilates the trace
    let tr: C64 = (0..d).map(|i| out[(i, i)]).sum();
    assert!(tr.norm() < 1e-12);
}

#[test]
fn exponential_decay_law() {
    // <n>(t) = e^{-kappa t} from |1><1| at kappa = 0.1, within 1e-6 on [0, 50]
    let model = decay_model(4, 0.1);
    let spec = model.spec().clone();
    let rho0 = QState::fock_state(&spec, &[1]).unwrap();
    let times: Vec<f64> = (0..=100).map(|k| 0.5 * k as f64).collect();
    let traj = evolve(&model, &rho0, &times, Tolerances::default()).unwrap();
    let n_op = QOperator::number(4).unwrap();
    for (t, state) in times.iter().zip(&traj.states) {
        let n = expectation(state, &n_op).unwrap().re;
        assert!((n - (-0.1 * t).exp()).abs() < 1e-6, "t = {t}");
        state.validate().unwrap();
    }
    for drift in &traj.trace_err {
        assert!(*drift < 1e-8);
    }
}

#[test]
fn undriven_cavity_settles_to_vacuum() {
    let model = decay_model(4, 0.5);
    let l = build_liouvillian(&model).unwrap();
    let ss = steady_state(&l).unwrap();
    assert!((ss.state.rho()[(0, 0)] - re(1.0)).norm() < 1e-12);
    assert!(ss.residual_inf < 1e-10 * 0.5);
}

#[test]
fn driven_cavity_linear_response() {
    // G1 = 0: steady <n> = eps^2 / (delta0^2 + kappa^2/4) for either sign
    let spec = TruncationSpec::new(&[12, 2]).unwrap();
    let (kappa, eps) = (0.1, 0.02);
    for &delta0 in &[0.0, 0.17, -0.28] {
        let model =
            build_reduced_blockade_model(0.0, delta0, 1.0, kappa, 1e-3, 0.0, eps, &spec).unwrap();
        let l = build_liouvillian(&model).unwrap();
        let ss = steady_state(&l).unwrap();
        let a = QOperator::embed(&QOperator::annihilation(12).unwrap(), 0, &spec).unwrap();
        let n = expectation(&ss.state, &a.adjoint().matmul(&a)).unwrap().re;
        let expect = eps * eps / (delta0 * delta0 + kappa * kappa / 4.0);
        assert!((n - expect).abs() < 1e-6 * expect.max(1e-3), "delta0 = {delta0}: {n} vs {expect}");
        assert!(ss.residual_inf < 1e-10 * kappa);
    }
}

#[test]
fn squeezed_bath_fixed_point_occupation() {
    // lab model, g = 0, r0 = 0.3: steady <a1^dag a1> = sinh^2(0.3);
    // the detunings follow from inverting the r0 selection: a = 2/tanh(2 r0)
    let p = SystemParams {
        delta1: 1.0 / 0.6f64.tanh(),
        delta2: 1.0 / 0.6f64.tanh(),
        xi: 1.0,
        g: 0.0,
        kappa: 0.7,
        gamma_m: 1e-3,
        n_th: 0.0,
        omega_d: None,
    };
    let d = derive(&p).unwrap();
    assert!((d.r0 - 0.3).abs() < 1e-12, "fixture wants r0 = 0.3, got {}", d.r0);
    let spec = TruncationSpec::new(&[8, 8, 2]).unwrap();
    let model = build_lab_model(&p, &d, &spec).unwrap();
    let l = build_liouvillian(&model).unwrap();
    let ss = steady_state(&l).unwrap();
    let a1 = QOperator::embed(&QOperator::annihilation(8).unwrap(), 0, &spec).unwrap();
    let n1 = expectation(&ss.state, &a1.adjoint().matmul(&a1)).unwrap().re;
    let expect = d.r0.sinh().powi(2);
    assert!((n1 - expect).abs() < 1e-4, "n1 = {n1}, sinh^2 r0 = {expect}");

    // the Bogoliubov modes see a vacuum bath: their occupation vanishes
    let (b1, b2) = bogoliubov_operators(d.r0, &spec).unwrap();
    for b in [&b1, &b2] {
        let nb = expectation(&ss.state, &b.adjoint().matmul(b)).unwrap().re;
        assert!(nb.abs() < 1e-4, "Bogoliubov occupation {nb}");
    }

    // steady state is a fixed point of the dynamics
    let times = vec![0.0, 5.0 / p.kappa];
    let traj = evolve(&model, &ss.state, &times, Tolerances::default()).unwrap();
    let diff = traj.states[1]
        .rho()
        .iter()
        .zip(ss.state.rho().iter())
        .map(|(a, b)| (*a - *b).norm())
        .fold(0.0, f64::max);
    assert!(diff < 1e-7, "fixed-point drift {diff}");

    // long-horizon evolution from vacuum approaches the same occupation
    let vac = QState::fock_state(&spec, &[0, 0, 0]).unwrap();
    let times: Vec<f64> = vec![0.0, 20.0 / p.kappa];
    let n_b1_op = b1.adjoint().matmul(&b1);
    let traj = evolve_observables(&model, &vac, &times, &[&n_b1_op], Tolerances::default()).unwrap();
    assert!(traj.values[1][0].re.abs() < 1e-5);
}

#[test]
fn g2_reference_states() {
    // coherent: 1, Fock |1>: 0, thermal: 2
    let coherent = QState::coherent_state(20, re(1.0)).unwrap();
    let a20 = QOperator::embed(&QOperator::annihilation(20).unwrap(), 0, coherent.spec()).unwrap();
    assert!((g2_zero(&coherent, &a20).unwrap() - 1.0).abs() < 1e-5);

    let spec4 = TruncationSpec::new(&[4]).unwrap();
    let one = QState::fock_state(&spec4, &[1]).unwrap();
    let a4 = QOperator::embed(&QOperator::annihilation(4).unwrap(), 0, &spec4).unwrap();
    assert!(g2_zero(&one, &a4).unwrap().abs() < 1e-14);

    let thermal = QState::thermal_state(40, 0.5).unwrap();
    let a40 = QOperator::embed(&QOperator::annihilation(40).unwrap(), 0, thermal.spec()).unwrap();
    assert!((g2_zero(&thermal, &a40).unwrap() - 2.0).abs() < 1e-6);

    let vac = QState::fock_state(&spec4, &[0]).unwrap();
    assert!(matches!(g2_zero(&vac, &a4), Err(SqemError::UndefinedCorrelation { .. })));
}

#[test]
fn g2_trajectory_linear_cavity_goes_coherent() {
    // driven linear cavity: g2 -> 1; the vacuum start is recorded as absent
    let spec = TruncationSpec::new(&[8, 2]).unwrap();
    let model = build_reduced_blockade_model(0.0, 0.0, 1.0, 0.25, 1e-3, 0.0, 0.04, &spec).unwrap();
    let rho0 = QState::fock_state(&spec, &[0, 0]).unwrap();
    let a = QOperator::embed(&QOperator::annihilation(8).unwrap(), 0, &spec).unwrap();
    let times: Vec<f64> = (0..=60).map(|k| k as f64).collect();
    let traj = g2_trajectory(&model, &rho0, &times, &a, &[], Tolerances::default()).unwrap();
    assert!(traj.g2[0].is_none(), "vacuum start must be absent");
    let last = traj.g2.last().unwrap().unwrap();
    assert!((last - 1.0).abs() < 1e-3, "late g2 = {last}");
}

#[test]
fn integrator_agrees_with_dense_exponential() {
    // two-path agreement at t = 5/kappa, elementwise 1e-6
    let (model, spec) = lab_fixture(0.55, 0.2, 0.4, &[3, 3, 2]);
    let l = build_liouvillian(&model).unwrap();
    let rho0 = QState::fock_state(&spec, &[1, 0, 0]).unwrap();
    let t = 5.0 / 0.4;
    let traj = evolve(&model, &rho0, &[0.0, t], Tolerances { rtol: 1e-10, atol: 1e-12 }).unwrap();
    let brute = expm_propagate(&l, &rho0, t).unwrap();
    let mut max_diff = 0.0f64;
    for (a, b) in traj.states[1].rho().iter().zip(brute.iter()) {
        max_diff = max_diff.max((*a - *b).norm());
    }
    assert!(max_diff < 1e-6, "two-path disagreement {max_diff:.2e}");
}

#[test]
fn dense_exponential_steady_matches_direct_solve() {
    let spec = TruncationSpec::new(&[5, 6]).unwrap();
    let model = build_reduced_blockade_model(1.0, -1.0, 1.0, 0.1, 1e-3, 0.0, 0.01, &spec).unwrap();
    let l = build_liouvillian(&model).unwrap();
    let direct = steady_state(&l).unwrap();
    let rho0 = QState::fock_state(&spec, &[0, 0]).unwrap();
    let oracle = dense_exponential_steady(&l, &rho0, 30.0, 1e-12, 4000).unwrap();
    let mut max_diff = 0.0f64;
    for (a, b) in direct.state.rho().iter().zip(oracle.rho().iter()) {
        max_diff = max_diff.max((*a - *b).norm());
    }
    assert!(max_diff < 1e-8, "steady-state mismatch {max_diff:.2e}");
}

#[test]
fn franck_condon_oracle_shapes() {
    // G1 = 0 is a bare Lorentzian of height 4 at delta0 = 0
    let grid: Vec<f64> = (-200..=200).map(|k| k as f64 * 0.01).collect();
    let flat = franck_condon_oracle(0.0, 1.0, 0.1, &grid);
    let peak = flat.iter().cloned().fold((0.0, 0.0), |b, p| if p.1 > b.1 { p } else { b });
    assert!((peak.0).abs() < 1e-12 && (peak.1 - 4.0).abs() < 1e-9);

    // beta = 1: the n = 1 sideband weight equals the zero-phonon line
    let comb = franck_condon_oracle(1.0, 1.0, 0.01, &grid);
    let at = |x: f64| {
        comb.iter()
            .min_by(|a, b| (a.0 - x).abs().partial_cmp(&(b.0 - x).abs()).unwrap())
            .unwrap()
            .1
    };
    assert!((at(-1.0) - at(0.0)).abs() < 1e-3 * at(-1.0));

    // beta = 0.25: ZPL weight e^{-1/4} of the bare height
    let zpl = franck_condon_oracle(0.5, 1.0, 0.01, &grid);
    let expect = 4.0 * (-0.25f64).exp();
    assert!((at_of(&zpl, -0.25) - expect).abs() < 2e-2 * expect);
}

fn at_of(curve: &[(f64, f64)], x: f64) -> f64 {
    curve
        .iter()
        .min_by(|a, b| (a.0 - x).abs().partial_cmp(&(b.0 - x).abs()).unwrap())
        .unwrap()
        .1
}

#[test]
fn trace_drift_stays_tiny_over_long_horizons() {
    let (model, spec) = lab_fixture(0.55, 0.2, 0.4, &[3, 3, 2]);
    let rho0 = QState::fock_state(&spec, &[1, 0, 1]).unwrap();
    let times: Vec<f64> = (0..=50).map(|k| k as f64 * (10.0 / 0.4) / 50.0).collect();
    let traj = evolve(&model, &rho0, &times, Tolerances::default()).unwrap();
    for drift in &traj.trace_err {
        assert!(*drift < 1e-8, "drift {drift:.2e}");
    }
    // positivity floor on recorded states
    for state in &traj.states {
        assert!(state.min_eigenvalue() >= -1e-8);
    }
}
