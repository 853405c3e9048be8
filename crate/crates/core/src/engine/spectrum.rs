//! Steady-state excitation spectrum of the driven blockade model and the
//! closed-form weak-drive oracle it is checked against.

use super::liouvillian::build_liouvillian;
use super::steady::steady_state;
use crate::error::{Result, SqemError};
use crate::fock::{expectation_dense, QOperator, TruncationSpec};
use crate::model::{build_reduced_blockade_model, ModelSpec};
use rayon::prelude::*;
use serde::Serialize;

/// Parameters of the reduced driven model, rates in units of `omega_m`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BlockadeParams {
    pub g1: f64,
    pub omega_m: f64,
    pub kappa: f64,
    pub gamma_m: f64,
    pub n_th: f64,
    pub eps_eff: f64,
    /// (cavity cutoff, phonon cutoff)
    pub dims: (usize, usize),
}

impl BlockadeParams {
    pub fn truncation(&self) -> Result<TruncationSpec> {
        TruncationSpec::new(&[self.dims.0, self.dims.1])
    }

    pub fn model(&self, delta0: f64) -> Result<ModelSpec> {
        build_reduced_blockade_model(
            self.g1,
            delta0,
            self.omega_m,
            self.kappa,
            self.gamma_m,
            self.n_th,
            self.eps_eff,
            &self.truncation()?,
        )
    }

    /// Weak-drive normalization `n0 = eps_eff^2 / kappa^2`.
    pub fn n0(&self) -> f64 {
        (self.eps_eff / self.kappa).powi(2)
    }
}

/// One spectrum sample.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SpectrumPoint {
    pub delta0: f64,
    /// Normalized excitation `<A^dag A>_ss / n0`.
    pub s1: f64,
    pub n_cav: f64,
    pub n_mech: f64,
}

/// Steady-state spectrum over a detuning grid. Each grid point is an
/// independent steady-state solve; per-point failures are reported in place
/// and the sweep continues. Enforces the weak-drive bound
/// `eps_eff <= 0.2 kappa`.
pub fn excitation_spectrum(
    params: &BlockadeParams,
    delta0_grid: &[f64],
) -> Result<Vec<(f64, std::result::Result<SpectrumPoint, String>)>> {
    if params.eps_eff > 0.2 * params.kappa {
        return Err(SqemError::InvalidParameter(format!(
            "eps_eff = {} exceeds the weak-drive bound 0.2 kappa = {}",
            params.eps_eff,
            0.2 * params.kappa
        )));
    }
    let spec = params.truncation()?;
    let a_op = QOperator::embed(&QOperator::annihilation(params.dims.0)?, 0, &spec)?;
    let b_op = QOperator::embed(&QOperator::annihilation(params.dims.1)?, 1, &spec)?;
    let n_cav_op = a_op.adjoint().matmul(&a_op);
    let n_mech_op = b_op.adjoint().matmul(&b_op);
    let n0 = params.n0();

    let points: Vec<(f64, std::result::Result<SpectrumPoint, String>)> = delta0_grid
        .par_iter()
        .map(|&delta0| {
            let run = || -> Result<SpectrumPoint> {
                let model = params.model(delta0)?;
                let liouv = build_liouvillian(&model)?;
                let ss = steady_state(&liouv)?;
                let n_cav = expectation_dense(ss.state.rho(), n_cav_op.mat()).re;
                let n_mech = expectation_dense(ss.state.rho(), n_mech_op.mat()).re;
                Ok(SpectrumPoint { delta0, s1: n_cav / n0, n_cav, n_mech })
            };
            (delta0, run().map_err(|e| e.to_string()))
        })
        .collect();
    Ok(points)
}

/// Closed-form weak-drive, zero-temperature spectrum: a Poisson comb of
/// Lorentzians
///
/// `S(delta0) = 4 sum_n e^{-beta} beta^n / n! *
///              (kappa^2/4) / ((delta0 + beta omega_m - n omega_m)^2 + kappa^2/4)`
///
/// with `beta = (G1/omega_m)^2`, normalized so the `G1 = 0` limit is the
/// bare Lorentzian of peak height 4.
pub fn franck_condon_oracle(
    g1: f64,
    omega_m: f64,
    kappa: f64,
    delta0_grid: &[f64],
) -> Vec<(f64, f64)> {
    let beta = (g1 / omega_m).powi(2);
    let hw2 = kappa * kappa / 4.0;
    let mut weights = Vec::new();
    let mut w = (-beta).exp();
    let mut n = 0usize;
    while w > 1e-12 || n <= beta as usize + 1 {
        weights.push(w);
        n += 1;
        w *= beta / n as f64;
        if n > 400 {
            break;
        }
    }
    delta0_grid
        .iter()
        .map(|&d0| {
            let s: f64 = weights
                .iter()
                .enumerate()
                .map(|(k, &wk)| {
                    let center = k as f64 * omega_m - beta * omega_m;
                    wk * hw2 / ((d0 - center).powi(2) + hw2)
                })
                .sum();
            (d0, 4.0 * s)
        })
        .collect()
}

/// Local maxima with three-point quadratic refinement of position and
/// height; peaks below `min_height` are ignored.
pub fn find_peaks(xs: &[f64], ys: &[f64], min_height: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for i in 1..xs.len().saturating_sub(1) {
        if ys[i] >= ys[i - 1] && ys[i] > ys[i + 1] && ys[i] >= min_height {
            let (x0, x1, x2) = (xs[i - 1], xs[i], xs[i + 1]);
            let (y0, y1, y2) = (ys[i - 1], ys[i], ys[i + 1]);
            // Newton parabola p(x) = y0 + d1 (x-x0) + c (x-x0)(x-x1)
            let d1 = (y1 - y0) / (x1 - x0);
            let d2 = (y2 - y1) / (x2 - x1);
            let c = (d2 - d1) / (x2 - x0);
            if c < 0.0 {
                let xp = 0.5 * (x0 + x1) - 0.5 * d1 / c;
                let yp = y0 + d1 * (xp - x0) + c * (xp - x0) * (xp - x1);
                if xp.is_finite() && yp.is_finite() && xp > x0 && xp < x2 {
                    out.push((xp, yp.max(y1)));
                    continue;
                }
            }
            out.push((x1, y1));
        }
    }
    out
}
