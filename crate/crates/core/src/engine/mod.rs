//! Lindblad engine: generator application, adaptive time evolution, steady
//! states, correlation functions and excitation spectra.

pub mod linalg;
pub mod liouvillian;
pub mod ode;
pub mod spectrum;
pub mod steady;

pub use liouvillian::{build_liouvillian, projected_generator_comparison, Liouvillian, ProjectedComparison};
pub use ode::{OdeOptions, OdeStats};
pub use spectrum::{excitation_spectrum, franck_condon_oracle,BlockadeParams, SpectrumPoint};
pub use steady::{dense_exponential_steady, expm_propagate, steady_state, SteadyState};

use crate::error::{Result, SqemError};
use crate::fock::{expectation_dense, QOperator, QState};
use crate::model::ModelSpec;
use crate::sparse::Csr;
use ndarray::Array2;
use num_complex::Complex64 as C64;

/// Integrator tolerances `(relative, absolute)`.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10 }
    }
}

impl From<Tolerances> for OdeOptions {
    fn from(t: Tolerances) -> Self {
        OdeOptions { rtol: t.rtol, atol: t.atol, ..Default::default() }
    }
}

/// Precomputed right-hand side of a model:
/// `drho/dt = D rho + rho D^dag + sum_k rate_k A_k rho B_k^dag`
/// with the drift `D = -iH - sum_k rate_k B_k^dag A_k / 2`.
pub struct Generator {
    drift: Csr,
    drift_adj: Csr,
    jumps: Vec<(Csr, Csr, f64)>,
    dim: usize,
}

impl Generator {
    pub fn new(model: &ModelSpec) -> Self {
        let mut drift = model.hamiltonian().mat().scale(C64::new(0.0, -1.0));
        let mut jumps = Vec::new();
        for term in model.dissipators() {
            let a = term.left.mat().clone();
            let bdag = term.right.mat().adjoint();
            drift = drift.add(&bdag.matmul(&a).scale(C64::new(-0.5 * term.rate, 0.0)));
            jumps.push((a, bdag, term.rate));
        }
        Self { drift_adj: drift.adjoint(), drift, jumps, dim: model.spec().total_dim() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Writes `L(rho)` into `out`; `tmp` is scratch of the same shape.
    pub fn apply_into(&self, rho: &Array2<C64>, out: &mut Array2<C64>, tmp: &mut Array2<C64>) {
        self.drift.mul_dense_into(rho, out);
        self.drift_adj.dense_mul_acc(rho, out, C64::new(1.0, 0.0));
        for (a, bdag, rate) in &self.jumps {
            a.mul_dense_into(rho, tmp);
            bdag.dense_mul_acc(tmp, out, C64::new(*rate, 0.0));
        }
    }

    pub fn apply(&self, rho: &Array2<C64>) -> Array2<C64> {
        let mut out = Array2::zeros((self.dim, self.dim));
        let mut tmp = Array2::zeros((self.dim, self.dim));
        self.apply_into(rho, &mut out, &mut tmp);
        out
    }
}

fn hermitize(rho: &Array2<C64>) -> (Array2<C64>, f64) {
    let d = rho.nrows();
    let mut out = rho.clone();
    for i in 0..d {
        for j in i..d {
            let avg = 0.5 * (out[(i, j)] + out[(j, i)].conj());
            out[(i, j)] = avg;
            out[(j, i)] = avg.conj();
        }
    }
    let tr: C64 = (0..d).map(|i| out[(i, i)]).sum();
    let drift = (tr - C64::new(1.0, 0.0)).norm();
    out.mapv_inplace(|v| v / tr);
    (out, drift)
}

/// Time-evolved states at the requested times (units `1/omega_m`).
///
/// Recorded states are hermitized and renormalized in trace only; the
/// internal integration state is never touched. `trace_err` keeps the
/// pre-normalization drift per output point.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<QState>,
    pub trace_err: Vec<f64>,
    pub stats: OdeStats,
}

pub fn evolve(model: &ModelSpec, rho0: &QState, times: &[f64], tol: Tolerances) -> Result<Trajectory> {
    if rho0.spec() != model.spec() {
        return Err(SqemError::SpecMismatch("initial state spec".into()));
    }
    let gen = Generator::new(model);
    let d = gen.dim();
    let mut tmp = Array2::zeros((d, d));
    let (raw, stats) = ode::integrate_dopri5(
        |y, out| gen.apply_into(y, out, &mut tmp),
        rho0.rho(),
        times,
        &tol.into(),
    )?;
    let mut states = Vec::with_capacity(raw.len());
    let mut trace_err = Vec::with_capacity(raw.len());
    for (k, rho) in raw.into_iter().enumerate() {
        let (h, drift) = hermitize(&rho);
        if drift > 1e-6 {
            return Err(SqemError::Accuracy { t: times[k], drift });
        }
        trace_err.push(drift);
        states.push(QState::from_density(model.spec().clone(), h)?);
    }
    Ok(Trajectory { times: times.to_vec(), states, trace_err, stats })
}

/// Expectation-value records along a trajectory, for spaces too large to
/// keep full states per time point. `values[t][k]` is `tr(rho(t) ops[k])`.
#[derive(Clone, Debug)]
pub struct ObservableTrajectory {
    pub times: Vec<f64>,
    pub values: Vec<Vec<C64>>,
    pub trace_err: Vec<f64>,
    pub stats: OdeStats,
}

pub fn evolve_observables(
    model: &ModelSpec,
    rho0: &QState,
    times: &[f64],
    ops: &[&QOperator],
    tol: Tolerances,
) -> Result<ObservableTrajectory> {
    if rho0.spec() != model.spec() {
        return Err(SqemError::SpecMismatch("initial state spec".into()));
    }
    for op in ops {
        if op.spec() != model.spec() {
            return Err(SqemError::SpecMismatch("observable spec".into()));
        }
    }
    let gen = Generator::new(model);
    let d = gen.dim();
    let mut tmp = Array2::zeros((d, d));

    // record on the fly instead of keeping each state
    let mut values = Vec::with_capacity(times.len());
    let mut trace_err = Vec::with_capacity(times.len());
    let stats = ode::integrate_dopri5_cb(
        |y, out| gen.apply_into(y, out, &mut tmp),
        rho0.rho(),
        times,
        &tol.into(),
        |idx, rho| {
            let (h, drift) = hermitize(rho);
            if drift > 1e-6 {
                return Err(SqemError::Accuracy { t: times[idx], drift });
            }
            trace_err.push(drift);
            values.push(ops.iter().map(|op| expectation_dense(&h, op.mat())).collect());
            Ok(())
        },
    )?;
    Ok(ObservableTrajectory { times: times.to_vec(), values, trace_err, stats })
}

/// Zero-delay second-order correlation
/// `g2 = <A^dag A^dag A A> / <A^dag A>^2` of a state, for the mode whose
/// annihilation-like operator is `mode_op`.
pub fn g2_zero(state: &QState, mode_op: &QOperator) -> Result<f64> {
    if state.spec() != mode_op.spec() {
        return Err(SqemError::SpecMismatch("g2 operator spec".into()));
    }
    let n_op = mode_op.adjoint().matmul(mode_op);
    let aa = mode_op.matmul(mode_op);
    let pair = aa.adjoint().matmul(&aa);
    let n = expectation_dense(state.rho(), n_op.mat()).re;
    if n < 1e-12 {
        return Err(SqemError::UndefinedCorrelation { occupation: n });
    }
    Ok(expectation_dense(state.rho(), pair.mat()).re / (n * n))
}

/// g2(0) along a trajectory. Points whose occupation sits below the 1e-12
/// floor are recorded as absent rather than zero.
#[derive(Clone, Debug)]
pub struct G2Trajectory {
    pub times: Vec<f64>,
    pub g2: Vec<Option<f64>>,
    pub occupation: Vec<f64>,
    /// Real parts of the requested extra observables per time point.
    pub extras: Vec<Vec<f64>>,
    pub trace_err: Vec<f64>,
    pub stats: OdeStats,
}

pub fn g2_trajectory(
    model: &ModelSpec,
    rho0: &QState,
    times: &[f64],
    mode_op: &QOperator,
    extra_ops: &[&QOperator],
    tol: Tolerances,
) -> Result<G2Trajectory> {
    let n_op = mode_op.adjoint().matmul(mode_op);
    let aa = mode_op.matmul(mode_op);
    let pair = aa.adjoint().matmul(&aa);
    let mut ops: Vec<&QOperator> = vec![&n_op, &pair];
    ops.extend_from_slice(extra_ops);
    let traj = evolve_observables(model, rho0, times, &ops, tol)?;
    let mut g2 = Vec::with_capacity(times.len());
    let mut occupation = Vec::with_capacity(times.len());
    let mut extras = Vec::with_capacity(times.len());
    for row in &traj.values {
        let n = row[0].re;
        occupation.push(n);
        g2.push(if n >= 1e-12 { Some(row[1].re / (n * n)) } else { None });
        extras.push(row[2..].iter().map(|v| v.re).collect());
    }
    Ok(G2Trajectory {
        times: times.to_vec(),
        g2,
        occupation,
        extras,
        trace_err: traj.trace_err,
        stats: traj.stats,
    })
}
