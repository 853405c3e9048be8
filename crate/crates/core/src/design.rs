//! Closed-form design calculator: squeezing parameter, Bogoliubov
//! frequencies, effective couplings, bath moments, validity ratios and the
//! parameter sweeps behind the design curves.
//!
//! All frequencies are in units of the mechanical frequency `omega_m = 1`.

use crate::error::{Result, SqemError};
use serde::{Deserialize, Serialize};

/// Mechanical frequency; the unit of every rate in this crate.
pub const OMEGA_M: f64 = 1.0;

/// RWA validity threshold on `(Omega1 + Omega2) / max(g sinh r0 cosh r0, omega_m)`.
/// At ratio 20 the dropped-term correction to occupations is below ~5%.
pub const RWA_RATIO_THRESHOLD: f64 = 20.0;

/// Physical rates and detunings, in units of `omega_m`.
///
/// `omega_d` (the lab-frame flux drive frequency) is metadata only: dynamics
/// depend on it solely through the detunings `delta_j = omega_j - omega_d/2`,
/// so it never enters any computation here.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SystemParams {
    pub delta1: f64,
    pub delta2: f64,
    pub xi: f64,
    pub g: f64,
    pub kappa: f64,
    pub gamma_m: f64,
    pub n_th: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_d: Option<f64>,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) {
            return Err(SqemError::InvalidParameter(format!("kappa = {} must be > 0", self.kappa)));
        }
        if self.gamma_m < 0.0 || self.n_th < 0.0 || self.g < 0.0 {
            return Err(SqemError::InvalidParameter(
                "gamma_m, n_th and g must be non-negative".into(),
            ));
        }
        if self.delta1 + self.delta2 <= 0.0 {
            return Err(SqemError::InvalidParameter(format!(
                "delta1 + delta2 = {} must be > 0",
                self.delta1 + self.delta2
            )));
        }
        Ok(())
    }

    /// Critical parametric coupling `xi0 = (delta1 + delta2) / 2`.
    pub fn xi_critical(&self) -> f64 {
        0.5 * (self.delta1 + self.delta2)
    }
}

/// Bogoliubov-frame quantities derived from [`SystemParams`].
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct DerivedParams {
    /// `(delta1 + delta2) / xi`, > 2 below the critical coupling.
    pub a: f64,
    /// Squeezing parameter `r0 = ln((a+2)/(a-2)) / 4`.
    pub r0: f64,
    /// Bath cross-correlation `M = sinh r0 cosh r0`.
    pub m: f64,
    /// Bath occupation `N = sinh^2 r0`.
    pub n: f64,
    pub omega1: f64,
    pub omega2: f64,
    /// Effective coupling `G1 = g cosh^2 r0`.
    pub g1: f64,
    /// Effective coupling `G2 = g sinh^2 r0`.
    pub g2: f64,
    /// `(Omega1 + Omega2) / max(g M, omega_m)`.
    pub rwa_ratio: f64,
}

/// Squeezing parameter selected so the pair-creation terms cancel:
/// returns `(a, r0)` with `a = (delta1 + delta2)/xi` and
/// `r0 = ln((a+2)/(a-2))/4`.
pub fn squeeze_parameter(delta1: f64, delta2: f64, xi: f64) -> Result<(f64, f64)> {
    if !(xi > 0.0) {
        return Err(SqemError::InvalidParameter(format!("xi = {xi} must be > 0")));
    }
    let sum = delta1 + delta2;
    let a = sum / xi;
    if a <= 2.0 {
        return Err(SqemError::CriticalCouplingExceeded { xi, xi0: 0.5 * sum });
    }
    Ok((a, 0.25 * ((a + 2.0) / (a - 2.0)).ln()))
}

/// Two-mode squeezed vacuum moments `(M, N) = (sinh r0 cosh r0, sinh^2 r0)`.
pub fn bath_moments(r0: f64) -> (f64, f64) {
    let (s, c) = (r0.sinh(), r0.cosh());
    (s * c, s * s)
}

/// `(G1, G2) = (g cosh^2 r0, g sinh^2 r0)`.
pub fn effective_couplings(g: f64, r0: f64) -> (f64, f64) {
    let c2 = r0.cosh().powi(2);
    let s2 = r0.sinh().powi(2);
    (g * c2, g * s2)
}

/// Bogoliubov mode frequencies
/// `Omega_{1,2} = [(delta1 + delta2 - 2 xi) e^{2 r0} +/- (delta1 - delta2)] / 2`.
///
/// `r0` must reproduce [`squeeze_parameter`] for the same detunings within
/// 1e-10; anything else is an inconsistent caller.
pub fn bogoliubov_frequencies(delta1: f64, delta2: f64, xi: f64, r0: f64) -> Result<(f64, f64)> {
    let (_, r0_check) = squeeze_parameter(delta1, delta2, xi)?;
    if (r0 - r0_check).abs() > 1e-10 * r0_check.abs().max(1.0) {
        return Err(SqemError::InvalidParameter(format!(
            "r0 = {r0} inconsistent with detunings (expected {r0_check})"
        )));
    }
    let e2r = (2.0 * r0).exp();
    let common = (delta1 + delta2 - 2.0 * xi) * e2r;
    Ok((0.5 * (common + delta1 - delta2), 0.5 * (common + delta2 - delta1)))
}

/// All Bogoliubov-frame quantities for one parameter point.
pub fn derive(params: &SystemParams) -> Result<DerivedParams> {
    params.validate()?;
    let (a, r0) = squeeze_parameter(params.delta1, params.delta2, params.xi)?;
    let (m, n) = bath_moments(r0);
    let (omega1, omega2) = bogoliubov_frequencies(params.delta1, params.delta2, params.xi, r0)?;
    let (g1, g2) = effective_couplings(params.g, r0);
    let rwa_ratio = (omega1 + omega2) / (params.g * m).max(OMEGA_M);
    Ok(DerivedParams { a, r0, m, n, omega1, omega2, g1, g2, rwa_ratio })
}

/// Pass/fail summary of the rotating-wave validity condition.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ValidityReport {
    pub rwa_ratio: f64,
    /// `rwa_ratio >= 20`.
    pub rwa_ok: bool,
    /// The bath moments saturate `M^2 = N(N+1)` (always true for the
    /// perfect-squeezing closed forms; reported for completeness).
    pub squeezing_perfect: bool,
}

pub fn validity_check(derived: &DerivedParams, g: f64, omega_m: f64) -> ValidityReport {
    let ratio = (derived.omega1 + derived.omega2) / (g * derived.m).max(omega_m);
    let mm = derived.m * derived.m;
    let nn = derived.n * (derived.n + 1.0);
    ValidityReport {
        rwa_ratio: ratio,
        rwa_ok: ratio >= RWA_RATIO_THRESHOLD,
        squeezing_perfect: (mm - nn).abs() <= 1e-12 * nn.max(1.0),
    }
}

/// One row of the coupling-vs-xi design sweep.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub xi: f64,
    /// Derived quantities, or the per-row failure (grid point at or beyond
    /// the critical coupling). The sweep itself always completes.
    pub derived: std::result::Result<DerivedParams, String>,
}

/// Sweep of every derived quantity over a grid of parametric couplings.
/// `G1` and `r0` are strictly increasing in xi; rows at or beyond `xi0`
/// carry an error marker instead of aborting the sweep.
pub fn sweep_xi(params: &SystemParams, xi_grid: &[f64]) -> Vec<SweepRow> {
    xi_grid
        .iter()
        .map(|&xi| {
            let p = SystemParams { xi, ..params.clone() };
            SweepRow { xi, derived: derive(&p).map_err(|e| e.to_string()) }
        })
        .collect()
}

/// `G1 = g cosh^2 r0` over a squeezing-parameter grid (design-curve inset).
pub fn sweep_r0(g: f64, r0_grid: &[f64]) -> Vec<(f64, f64)> {
    r0_grid.iter().map(|&r0| (r0, effective_couplings(g, r0).0)).collect()
}

/// Grid on `(xi_min, xi0)` logarithmically dense toward the critical point,
/// where all the interesting structure lives.
pub fn log_dense_xi_grid(params: &SystemParams, n: usize, xi_min: f64, closest: f64) -> Result<Vec<f64>> {
    let xi0 = params.xi_critical();
    if !(xi_min > 0.0 && xi_min < xi0) {
        return Err(SqemError::InvalidParameter(format!(
            "xi_min = {xi_min} outside (0, {xi0})"
        )));
    }
    if !(closest > 0.0 && closest < 1.0) {
        return Err(SqemError::InvalidParameter(
            "closest must be the final relative distance to xi0, in (0, 1)".into(),
        ));
    }
    if n < 2 {
        return Err(SqemError::InvalidParameter("grid needs at least 2 points".into()));
    }
    // distance to critical decays geometrically from (xi0 - xi_min) to closest*xi0
    let s0 = (xi0 - xi_min) / xi0;
    let ratio = (closest / s0).powf(1.0 / (n - 1) as f64);
    Ok((0..n).map(|k| xi0 * (1.0 - s0 * ratio.powi(k as i32))).collect())
}

/// The balanced operating point: the xi maximizing
/// `min(G1 / (weight * kappa), Omega1 / omega_m)` on `(0, xi0)`.
///
/// `G1` rises and `Omega1` falls monotonically in xi, so the objective is
/// unimodal and golden-section search converges to the crossing.
pub fn find_operating_point(params: &SystemParams, weight: f64) -> Result<(f64, DerivedParams)> {
    params.validate()?;
    if !(weight > 0.0) {
        return Err(SqemError::InvalidParameter(format!("weight = {weight} must be > 0")));
    }
    if params.g <= 0.0 {
        return Err(SqemError::NotFound("g = 0 gives a vanishing objective".into()));
    }
    let xi0 = params.xi_critical();
    let objective = |xi: f64| -> f64 {
        match derive(&SystemParams { xi, ..params.clone() }) {
            Ok(d) => (d.g1 / (weight * params.kappa)).min(d.omega1 / OMEGA_M),
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let inv_phi = 0.618_033_988_749_894_8;
    let mut lo = xi0 * 1e-12;
    let mut hi = xi0 * (1.0 - 1e-14);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = objective(x1);
    let mut f2 = objective(x2);
    for _ in 0..300 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = objective(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = objective(x1);
        }
        if (hi - lo) <= 1e-13 * xi0 {
            break;
        }
    }
    let xi_star = 0.5 * (lo + hi);
    let d = derive(&SystemParams { xi: xi_star, ..params.clone() })?;
    if !objective(xi_star).is_finite() || objective(xi_star) <= 0.0 {
        return Err(SqemError::NotFound("objective has no positive interior maximum".into()));
    }
    Ok((xi_star, d))
}
