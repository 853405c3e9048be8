//! The experiment runners behind the CLI subcommands: design sweeps,
//! excitation spectra, blockade demos and the verification suite. Each run
//! writes plot-ready CSVs plus a manifest with embedded invariant checks.

use super::config::{symmetric_detuning_for_r0, Experiment, ExperimentConfig};
use super::csvio::{opt_sig9, sig9, CsvWriter};
use super::manifest::{CheckResult, RunManifest};
use crate::design::{
    self, derive, log_dense_xi_grid, sweep_r0, sweep_xi, validity_check, DerivedParams,
    SystemParams, OMEGA_M,
};
use crate::engine::{
    build_liouvillian, dense_exponential_steady, evolve_observables, excitation_spectrum,
    find_peaks, franck_condon_oracle, g2_trajectory, g2_zero, steady_state, BlockadeParams,
    Tolerances,
};
use crate::error::{Result, SqemError};
use crate::fock::{QOperator, QState, TruncationSpec};
use crate::model::{
    bogoliubov_excited_ket, bogoliubov_operators, build_bogoliubov_exact_model,
    build_effective_model, build_lab_model,
};
use std::path::Path;
use std::time::Instant;

fn linspace(t_end: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| t_end * k as f64 / n as f64).collect()
}

fn gamma_from_q(q: f64) -> f64 {
    OMEGA_M / q
}

/// Symmetric-detuning system parameters pinned by `(r0, xi)`.
fn params_for_r0(r0: f64, xi: f64, g: f64, kappa: f64, q: f64, n_th: f64) -> SystemParams {
    let delta = symmetric_detuning_for_r0(r0, xi);
    SystemParams {
        delta1: delta,
        delta2: delta,
        xi,
        g,
        kappa,
        gamma_m: gamma_from_q(q),
        n_th,
        omega_d: None,
    }
}

/// Design-curve sweeps plus the balanced operating point.
pub fn run_design(cfg: &ExperimentConfig, outdir: &Path) -> Result<RunManifest> {
    let start = Instant::now();
    let mut manifest = RunManifest::new(Experiment::Design.name(), cfg.to_value());
    let dc = &cfg.design;
    dc.params.validate()?;

    let grid = log_dense_xi_grid(&dc.params, dc.xi_grid.n, dc.xi_grid.xi_min, dc.xi_grid.closest)?;
    let rows = sweep_xi(&dc.params, &grid);

    let path = outdir.join("design_xi.csv");
    let mut csv = CsvWriter::create(&path, "xi,a,r0,M,N,G1,G2,Omega1,Omega2,rwa_ratio,valid")?;
    let mut row_errors = Vec::new();
    for row in &rows {
        match &row.derived {
            Ok(d) => {
                let valid = validity_check(d, dc.params.g, OMEGA_M).rwa_ok;
                csv.row(&[
                    sig9(row.xi),
                    sig9(d.a),
                    sig9(d.r0),
                    sig9(d.m),
                    sig9(d.n),
                    sig9(d.g1),
                    sig9(d.g2),
                    sig9(d.omega1),
                    sig9(d.omega2),
                    sig9(d.rwa_ratio),
                    if valid { "1" } else { "0" }.into(),
                ])?;
            }
            Err(e) => {
                row_errors.push(format!("xi = {}: {e}", row.xi));
                csv.row(&[
                    sig9(row.xi),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    "0".into(),
                ])?;
            }
        }
    }
    csv.finish()?;
    manifest.outputs.push("design_xi.csv".into());

    let r0_points = dc.r0_grid.points()?;
    let inset = sweep_r0(dc.params.g, &r0_points);
    let path = outdir.join("design_r0.csv");
    let mut csv = CsvWriter::create(&path, "r0,G1")?;
    for (r0, g1) in &inset {
        csv.row(&[sig9(*r0), sig9(*g1)])?;
    }
    csv.finish()?;
    manifest.outputs.push("design_r0.csv".into());

    // embedded invariants over the sweep
    let ok_rows: Vec<(f64, DerivedParams)> = rows
        .iter()
        .filter_map(|r| r.derived.as_ref().ok().map(|d| (r.xi, *d)))
        .collect();
    let mut monotone = true;
    for w in ok_rows.windows(2) {
        if !(w[1].1.g1 > w[0].1.g1 && w[1].1.r0 > w[0].1.r0) {
            monotone = false;
        }
    }
    manifest.checks.push(CheckResult::new(
        "G1 and r0 strictly increase in xi",
        monotone,
        format!("{} computable rows", ok_rows.len()),
    ));

    let mut moment_err = 0.0f64;
    let mut freq_err = 0.0f64;
    for (xi, d) in &ok_rows {
        let target = d.n * (d.n + 1.0);
        moment_err = moment_err.max((d.m * d.m - target).abs() / target.max(1e-300));
        let expect = xi * (d.a * d.a - 4.0).sqrt();
        freq_err = freq_err.max(((d.omega1 + d.omega2) - expect).abs() / expect);
    }
    manifest.checks.push(CheckResult::new(
        "M^2 = N(N+1) on every row",
        moment_err <= 1e-12,
        format!("max relative error {moment_err:.2e}"),
    ));
    manifest.checks.push(CheckResult::new(
        "Omega1 + Omega2 = xi sqrt(a^2 - 4) on every row",
        freq_err <= 1e-10,
        format!("max relative error {freq_err:.2e}"),
    ));

    // near-critical product law (symmetric detunings only)
    let symmetric = (dc.params.delta1 - dc.params.delta2).abs() < 1e-12;
    if symmetric {
        let sum = dc.params.delta1 + dc.params.delta2;
        let target = sum * dc.params.g / 4.0;
        let mut worst = 0.0f64;
        for k in 0..40 {
            let eps = 4e-4 * 0.7f64.powi(k);
            let p = SystemParams { xi: sum / (2.0 + eps), ..dc.params.clone() };
            let d = derive(&p)?;
            worst = worst.max((d.g1 * d.omega1 - target).abs() / target);
        }
        manifest.checks.push(CheckResult::new(
            "near-critical product law G1*Omega1 = (delta1+delta2) g/4 within 2%",
            worst < 0.02,
            format!("max deviation {worst:.4} for a - 2 <= 4e-4"),
        ));
    }

    let op = design::find_operating_point(&dc.params, dc.weight);
    match op {
        Ok((xi_star, d)) => {
            manifest.summary = serde_json::json!({
                "operating_point": {
                    "xi": xi_star,
                    "g1": d.g1,
                    "omega1": d.omega1,
                    "g1_over_kappa": d.g1 / dc.params.kappa,
                    "r0": d.r0,
                    "rwa_ratio": d.rwa_ratio,
                },
                "rows": rows.len(),
                "row_errors": row_errors,
            });
            manifest.checks.push(CheckResult::new(
                "balanced operating point exists",
                d.g1 / (dc.weight * dc.params.kappa) > 0.0 && d.omega1 > 0.0,
                format!(
                    "xi* = {xi_star:.6}, G1/kappa = {:.4}, Omega1 = {:.4}",
                    d.g1 / dc.params.kappa,
                    d.omega1
                ),
            ));
        }
        Err(e) => {
            manifest.summary = serde_json::json!({ "rows": rows.len(), "row_errors": row_errors });
            manifest.checks.push(CheckResult::new(
                "balanced operating point exists",
                false,
                e.to_string(),
            ));
        }
    }

    manifest.duration_seconds = start.elapsed().as_secs_f64();
    manifest.write(&outdir.join("manifest_design.json"))?;
    Ok(manifest)
}

fn blockade_params(g1: f64, kappa: f64, q: f64, n_th: f64, eps_eff: f64, dims: &[usize]) -> Result<BlockadeParams> {
    if dims.len() != 2 {
        return Err(SqemError::Config(format!("blockade dims must be 2 modes, got {dims:?}")));
    }
    Ok(BlockadeParams {
        g1,
        omega_m: OMEGA_M,
        kappa,
        gamma_m: gamma_from_q(q),
        n_th,
        eps_eff,
        dims: (dims[0], dims[1]),
    })
}

/// Excitation spectra, one curve per requested coupling.
pub fn run_spectrum(cfg: &ExperimentConfig, outdir: &Path) -> Result<RunManifest> {
    let start = Instant::now();
    let mut manifest = RunManifest::new(Experiment::Spectrum.name(), cfg.to_value());
    let sc = &cfg.spectrum;

    if sc.kappa >= 0.5 * OMEGA_M {
        eprintln!(
            "warning: kappa = {} is outside the resolved-sideband regime; sidebands will overlap",
            sc.kappa
        );
        manifest.checks.push(CheckResult::new(
            "resolved-sideband regime (warning only)",
            true,
            format!("kappa = {} >= 0.5 omega_m", sc.kappa),
        ));
    }

    let mut peak_tables = Vec::new();
    for &g1 in &sc.g1_values {
        let beta = (g1 / OMEGA_M).powi(2);
        let lo = -beta - sc.delta0_margin_low;
        let hi = -beta + sc.delta0_margin_high;
        let n = ((hi - lo) / sc.delta0_step).round() as usize;
        let grid: Vec<f64> = (0..=n).map(|k| lo + sc.delta0_step * k as f64).collect();

        let params = blockade_params(g1, sc.kappa, sc.q, sc.n_th, sc.eps_eff_frac * sc.kappa, &sc.dims)?;
        let points = excitation_spectrum(&params, &grid)?;

        let fname = format!("spectrum_g1_{g1:.2}.csv");
        let mut csv = CsvWriter::create(&outdir.join(&fname), "delta0,S1,n_cav,n_mech")?;
        let mut failures = Vec::new();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (d0, point) in &points {
            match point {
                Ok(p) => {
                    csv.row(&[sig9(p.delta0), sig9(p.s1), sig9(p.n_cav), sig9(p.n_mech)])?;
                    xs.push(*d0);
                    ys.push(p.s1);
                }
                Err(e) => {
                    failures.push(format!("delta0 = {d0}: {e}"));
                    csv.row(&[sig9(*d0), String::new(), String::new(), String::new()])?;
                }
            }
        }
        csv.finish()?;
        manifest.outputs.push(fname);

        let max_s = ys.iter().cloned().fold(0.0, f64::max);
        let peaks = find_peaks(&xs, &ys, 0.02 * max_s);
        manifest.checks.push(CheckResult::new(
            &format!("G1 = {g1}: all steady-state solves succeeded"),
            failures.is_empty(),
            format!("{} failures", failures.len()),
        ));
        if g1 > 0.0 {
            let zpl = peaks
                .iter()
                .cloned()
                .min_by(|a, b| {
                    (a.0 + beta).abs().partial_cmp(&(b.0 + beta).abs()).unwrap()
                })
                .unwrap_or((f64::NAN, 0.0));
            manifest.checks.push(CheckResult::new(
                &format!("G1 = {g1}: zero-phonon line at delta0 = -G1^2/omega_m within 0.05"),
                (zpl.0 + beta).abs() <= 0.05,
                format!("found {:.4}, expected {:.4}", zpl.0, -beta),
            ));
            let mut spacing_ok = true;
            let mut detail = String::new();
            let mut main_peaks: Vec<&(f64, f64)> =
                peaks.iter().filter(|p| p.1 >= 0.05 * max_s).collect();
            main_peaks.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            for w in main_peaks.windows(2) {
                let gap = w[1].0 - w[0].0;
                if (gap - OMEGA_M).abs() > 0.05 {
                    spacing_ok = false;
                }
                detail.push_str(&format!("{gap:.4} "));
            }
            manifest.checks.push(CheckResult::new(
                &format!("G1 = {g1}: sidebands spaced by omega_m within 0.05"),
                spacing_ok,
                format!("gaps: {detail}"),
            ));
            let global_max = peaks
                .iter()
                .cloned()
                .fold((f64::NAN, f64::NEG_INFINITY), |b, p| if p.1 > b.1 { p } else { b });
            manifest.checks.push(CheckResult::new(
                &format!("G1 = {g1}: global spectrum maximum red-shifted (delta0 < 0)"),
                global_max.0 < 0.0,
                format!("max at delta0 = {:.4}", global_max.0),
            ));
        }
        peak_tables.push(serde_json::json!({
            "g1": g1,
            "peaks": peaks.iter().map(|p| serde_json::json!({
                "delta0": p.0, "height": p.1,
            })).collect::<Vec<_>>(),
            "failures": failures,
        }));
    }

    manifest.summary = serde_json::json!({ "curves": peak_tables });
    manifest.duration_seconds = start.elapsed().as_secs_f64();
    manifest.write(&outdir.join("manifest_spectrum.json"))?;
    Ok(manifest)
}

/// Blockade demo: g2(0) trajectory from vacuum plus the direct steady
/// solve, the linear control and the dense-exponentiation oracle.
pub fn run_g2(cfg: &ExperimentConfig, outdir: &Path) -> Result<RunManifest> {
    let start = Instant::now();
    let mut manifest = RunManifest::new(Experiment::G2.name(), cfg.to_value());
    let gc = &cfg.g2;

    let params = blockade_params(gc.g1, gc.kappa, gc.q, gc.n_th, gc.eps_eff, &gc.dims)?;
    let spec = params.truncation()?;
    let model = params.model(gc.delta0)?;
    let a_op = QOperator::embed(&QOperator::annihilation(gc.dims[0])?, 0, &spec)?;
    let b_op = QOperator::embed(&QOperator::annihilation(gc.dims[1])?, 1, &spec)?;
    let n_mech_op = b_op.adjoint().matmul(&b_op);

    let rho0 = QState::fock_state(&spec, &[0, 0])?;
    let times = linspace(gc.t_end_over_kappa / gc.kappa, gc.n_times);
    let traj = g2_trajectory(&model, &rho0, &times, &a_op, &[&n_mech_op], cfg.tolerances)?;

    let mut csv = CsvWriter::create(&outdir.join("g2_trajectory.csv"), "t,g2,n_cav,n_mech,trace_err")?;
    for k in 0..traj.times.len() {
        csv.row(&[
            sig9(traj.times[k]),
            opt_sig9(traj.g2[k]),
            sig9(traj.occupation[k]),
            sig9(traj.extras[k][0]),
            sig9(traj.trace_err[k]),
        ])?;
    }
    csv.finish()?;
    manifest.outputs.push("g2_trajectory.csv".into());

    let liouv = build_liouvillian(&model)?;
    let ss = steady_state(&liouv)?;
    let g2_steady = g2_zero(&ss.state, &a_op)?;
    manifest.checks.push(CheckResult::new(
        "steady-state residual below 1e-10 kappa",
        ss.residual_inf < 1e-10 * gc.kappa,
        format!("residual {:.2e}", ss.residual_inf),
    ));
    manifest.checks.push(CheckResult::new(
        "steady g2(0) < 1 (antibunching)",
        g2_steady < 1.0,
        format!("g2 = {g2_steady:.6}"),
    ));
    let g2_end = traj.g2.last().copied().flatten();
    manifest.checks.push(CheckResult::new(
        "trajectory converges to the direct steady solve within 0.01",
        g2_end.map(|v| (v - g2_steady).abs() < 0.01).unwrap_or(false),
        format!("g2(t_end) = {g2_end:?}, steady {g2_steady:.6}"),
    ));

    let mut summary = serde_json::json!({
        "g2_steady": g2_steady,
        "n_cav_steady": crate::fock::expectation(&ss.state, &a_op.adjoint().matmul(&a_op))?.re,
        "solver_stats": traj.stats,
        "model": model.descriptor(),
    });

    if gc.run_oracle {
        // linear control: G1 = 0 must give coherent light
        let control = blockade_params(0.0, gc.kappa, gc.q, gc.n_th, gc.eps_eff, &gc.dims)?;
        let l_control = build_liouvillian(&control.model(gc.delta0)?)?;
        let ss_control = steady_state(&l_control)?;
        let g2_control = g2_zero(&ss_control.state, &a_op)?;
        manifest.checks.push(CheckResult::new(
            "linear control g2 = 1 within 1e-3",
            (g2_control - 1.0).abs() <= 1e-3,
            format!("g2 = {g2_control:.6}"),
        ));

        // independent dense-exponentiation steady solve on the oracle cutoffs
        let oracle_params = blockade_params(gc.g1, gc.kappa, gc.q, gc.n_th, gc.eps_eff, &gc.oracle_dims)?;
        let oracle_spec = oracle_params.truncation()?;
        let oracle_model = oracle_params.model(gc.delta0)?;
        let l_oracle = build_liouvillian(&oracle_model)?;
        let a_oracle = QOperator::embed(&QOperator::annihilation(gc.oracle_dims[0])?, 0, &oracle_spec)?;
        let direct = steady_state(&l_oracle)?;
        let g2_direct = g2_zero(&direct.state, &a_oracle)?;
        let vac = QState::fock_state(&oracle_spec, &[0, 0])?;
        let expm_ss = dense_exponential_steady(&l_oracle, &vac, 25.0 / gc.kappa, 1e-12, 4000)?;
        let g2_oracle = g2_zero(&expm_ss, &a_oracle)?;
        manifest.checks.push(CheckResult::new(
            "direct solve matches dense-exponentiation oracle within 1e-4",
            (g2_direct - g2_oracle).abs() <= 1e-4,
            format!("direct {g2_direct:.8}, oracle {g2_oracle:.8}"),
        ));
        summary["g2_control"] = serde_json::json!(g2_control);
        summary["g2_oracle_dims"] = serde_json::json!({
            "direct": g2_direct, "exponentiation": g2_oracle,
        });
    }

    manifest.summary = summary;
    manifest.duration_seconds = start.elapsed().as_secs_f64();
    manifest.write(&outdir.join("manifest_g2.json"))?;
    Ok(manifest)
}

/// Time-averaged relative deviation between two observable records.
fn averaged_relative_deviation(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
    let den: f64 = a.iter().sum();
    num / den
}

pub struct FrameCheckOutcome {
    pub deviation: f64,
    pub check: CheckResult,
}

/// Lab vs exact-Bogoliubov dynamics on `<A1^dag A1>`.
pub fn verify_frames(cfg: &ExperimentConfig) -> Result<FrameCheckOutcome> {
    let vc = &cfg.verify_frames;
    if vc.r0 > 0.5 {
        return Err(SqemError::Config(format!(
            "verify-frames requires r0 <= 0.5 for truncation feasibility, got {}",
            vc.r0
        )));
    }
    let p = params_for_r0(vc.r0, vc.xi, vc.g, vc.kappa, vc.q, vc.n_th);
    let d = derive(&p)?;
    let spec = TruncationSpec::new(&vc.dims)?;
    let lab = build_lab_model(&p, &d, &spec)?;
    let bog = build_bogoliubov_exact_model(&p, &d, &spec)?;
    let (b1, _) = bogoliubov_operators(d.r0, &spec)?;
    let n_b1 = b1.adjoint().matmul(&b1);
    let rho0 = QState::fock_state(&spec, &vec![0; spec.n_modes()])?;
    let times = linspace(vc.t_end_over_kappa / vc.kappa, vc.n_times);
    let lab_traj = evolve_observables(&lab, &rho0, &times, &[&n_b1], cfg.tolerances)?;
    let bog_traj = evolve_observables(&bog, &rho0, &times, &[&n_b1], cfg.tolerances)?;
    let lab_vals: Vec<f64> = lab_traj.values.iter().map(|v| v[0].re).collect();
    let bog_vals: Vec<f64> = bog_traj.values.iter().map(|v| v[0].re).collect();
    let deviation = averaged_relative_deviation(&lab_vals, &bog_vals);
    Ok(FrameCheckOutcome {
        deviation,
        check: CheckResult::new(
            "frame equivalence: lab vs Bogoliubov-exact <A1^dag A1> (time-averaged)",
            deviation <= vc.tol_rel,
            format!("deviation {deviation:.3e}, tolerance {:.1e}", vc.tol_rel),
        ),
    })
}

pub struct DissipatorCheckOutcome {
    pub relative: f64,
    pub kept_states: usize,
    pub check: CheckResult,
}

/// Projected generator identity between the lab and Bogoliubov pictures.
pub fn verify_dissipator(cfg: &ExperimentConfig) -> Result<DissipatorCheckOutcome> {
    let vc = &cfg.verify_dissipator;
    if vc.r0 > 0.5 {
        return Err(SqemError::Config(format!(
            "verify-dissipator requires r0 <= 0.5, got {}",
            vc.r0
        )));
    }
    let p = params_for_r0(vc.r0, vc.xi, vc.g, vc.kappa, vc.q, vc.n_th);
    let d = derive(&p)?;
    let spec = TruncationSpec::new(&vc.dims)?;
    let lab = build_lab_model(&p, &d, &spec)?;
    let bog = build_bogoliubov_exact_model(&p, &d, &spec)?;
    let cmp = crate::engine::projected_generator_comparison(&lab, &bog, vc.max_occupation)?;
    Ok(DissipatorCheckOutcome {
        relative: cmp.relative,
        kept_states: cmp.kept_states,
        check: CheckResult::new(
            "dissipator identity: projected lab vs Bogoliubov generator",
            cmp.relative < vc.tol_rel,
            format!(
                "relative {:.3e} over {} kept states, tolerance {:.1e}",
                cmp.relative, cmp.kept_states, vc.tol_rel
            ),
        ),
    })
}

pub struct RwaCheckOutcome {
    pub deviation_pass: f64,
    pub deviation_fail: f64,
    pub checks: Vec<CheckResult>,
}

/// Effective RWA model vs exact Bogoliubov dynamics at a ratio where the
/// approximation must hold and one where it must visibly break.
pub fn verify_rwa(cfg: &ExperimentConfig) -> Result<RwaCheckOutcome> {
    let vc = &cfg.verify_rwa;
    let g = vc.g_m_product / (vc.r0.sinh() * vc.r0.cosh());
    let root = {
        let a = 2.0 / (2.0 * vc.r0).tanh();
        (a * a - 4.0).sqrt()
    };

    let mut deviations = Vec::new();
    for &ratio in &[vc.ratio_pass, vc.ratio_fail] {
        // Omega1 + Omega2 = xi sqrt(a^2 - 4) = ratio * max(g M, omega_m)
        let scale = (g * vc.r0.sinh() * vc.r0.cosh()).max(OMEGA_M);
        let xi = ratio * scale / root;
        let p = params_for_r0(vc.r0, xi, g, vc.kappa, vc.q, vc.n_th);
        let d = derive(&p)?;

        let spec_ex = TruncationSpec::new(&vc.dims_exact)?;
        let model_ex = build_bogoliubov_exact_model(&p, &d, &spec_ex)?;
        let psi = bogoliubov_excited_ket(d.r0, &spec_ex)?;
        let rho0_ex = QState::from_pure(spec_ex.clone(), &psi)?;
        let (b1, _) = bogoliubov_operators(d.r0, &spec_ex)?;
        let n_ex = b1.adjoint().matmul(&b1);

        let spec_eff = TruncationSpec::new(&vc.dims_effective)?;
        let model_eff = build_effective_model(&d, OMEGA_M, vc.kappa, gamma_from_q(vc.q), vc.n_th, &spec_eff)?;
        let mut occ = vec![0usize; spec_eff.n_modes()];
        occ[0] = 1;
        let rho0_eff = QState::fock_state(&spec_eff, &occ)?;
        let a1 = QOperator::embed(&QOperator::annihilation(vc.dims_effective[0])?, 0, &spec_eff)?;
        let n_eff = a1.adjoint().matmul(&a1);

        let times = linspace(vc.t_end_over_kappa / vc.kappa, vc.n_times);
        let tr_ex = evolve_observables(&model_ex, &rho0_ex, &times, &[&n_ex], cfg.tolerances)?;
        let tr_eff = evolve_observables(&model_eff, &rho0_eff, &times, &[&n_eff], cfg.tolerances)?;
        let ex: Vec<f64> = tr_ex.values.iter().map(|v| v[0].re).collect();
        let eff: Vec<f64> = tr_eff.values.iter().map(|v| v[0].re).collect();
        deviations.push(averaged_relative_deviation(&ex, &eff));
    }

    let (dev_pass, dev_fail) = (deviations[0], deviations[1]);
    let checks = vec![
        CheckResult::new(
            &format!("RWA holds at rwa_ratio = {}", vc.ratio_pass),
            dev_pass <= vc.tol_rel,
            format!("deviation {dev_pass:.4}, tolerance {:.2}", vc.tol_rel),
        ),
        CheckResult::expected_fail(
            &format!("RWA visibly breaks at rwa_ratio = {}", vc.ratio_fail),
            dev_fail > vc.tol_rel,
            format!("deviation {dev_fail:.4} (must exceed {:.2})", vc.tol_rel),
        ),
    ];
    Ok(RwaCheckOutcome { deviation_pass: dev_pass, deviation_fail: dev_fail, checks })
}

/// The verification suite; `only` restricts to a single sub-experiment.
pub fn run_verifications(
    cfg: &ExperimentConfig,
    outdir: &Path,
    only: Option<Experiment>,
) -> Result<RunManifest> {
    let start = Instant::now();
    let name = only.map_or("verify", |e| e.name());
    let mut manifest = RunManifest::new(name, cfg.to_value());
    let mut summary = serde_json::Map::new();

    let want = |e: Experiment| only.is_none() || only == Some(e);

    if want(Experiment::VerifyDissipator) {
        let out = verify_dissipator(cfg)?;
        summary.insert(
            "dissipator".into(),
            serde_json::json!({ "relative": out.relative, "kept_states": out.kept_states }),
        );
        manifest.checks.push(out.check);
    }
    if want(Experiment::VerifyFrames) {
        let out = verify_frames(cfg)?;
        summary.insert("frames".into(), serde_json::json!({ "deviation": out.deviation }));
        manifest.checks.push(out.check);
    }
    if want(Experiment::VerifyRwa) {
        let out = verify_rwa(cfg)?;
        summary.insert(
            "rwa".into(),
            serde_json::json!({
                "deviation_at_pass_ratio": out.deviation_pass,
                "deviation_at_fail_ratio": out.deviation_fail,
            }),
        );
        manifest.checks.extend(out.checks);
    }

    for check in &manifest.checks {
        let tag = if check.passed {
            if check.expected_fail { "PASS (expected-fail observed)" } else { "PASS" }
        } else {
            "FAIL"
        };
        println!("{tag} {}: {}", check.name, check.detail);
    }

    manifest.summary = serde_json::Value::Object(summary);
    manifest.duration_seconds = start.elapsed().as_secs_f64();
    manifest.write(&outdir.join(format!("manifest_{name}.json")))?;
    Ok(manifest)
}

/// Weak-drive spectrum weights against the Franck-Condon oracle; used by
/// the acceptance suite and available as a library check.
pub struct WeightComparison {
    pub g1: f64,
    pub eps_frac: f64,
    /// (order n, measured S1 at the predicted peak, oracle S1)
    pub entries: Vec<(usize, f64, f64)>,
    pub max_relative_deviation: f64,
}

pub fn compare_fc_weights(
    g1: f64,
    kappa: f64,
    q: f64,
    eps_frac: f64,
    dims: &[usize],
    orders: usize,
) -> Result<WeightComparison> {
    let beta = (g1 / OMEGA_M).powi(2);
    let params = blockade_params(g1, kappa, q, 0.0, eps_frac * kappa, dims)?;
    let grid: Vec<f64> = (0..orders).map(|n| n as f64 * OMEGA_M - beta).collect();
    let points = excitation_spectrum(&params, &grid)?;
    let oracle = franck_condon_oracle(g1, OMEGA_M, kappa, &grid);
    let mut entries = Vec::new();
    let mut worst = 0.0f64;
    for (n, ((_, point), (_, s_oracle))) in points.iter().zip(&oracle).enumerate() {
        let p = point
            .as_ref()
            .map_err(|e| SqemError::NonUniqueSteadyState(e.clone()))?;
        let rel = (p.s1 - s_oracle).abs() / s_oracle;
        worst = worst.max(rel);
        entries.push((n, p.s1, *s_oracle));
    }
    Ok(WeightComparison { g1, eps_frac, entries, max_relative_deviation: worst })
}
