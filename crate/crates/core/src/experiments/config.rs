//! Experiment configuration: JSON with a fully documented defaults table,
//! named presets for the headline parameter sets, dotted-path overrides,
//! and hard errors on unknown keys.

use crate::design::SystemParams;
use crate::engine::Tolerances;
use crate::error::{Result, SqemError};
use serde::{Deserialize, Serialize};

/// Which experiment a config drives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Design,
    SweepXi,
    SweepR0,
    Spectrum,
    G2,
    VerifyFrames,
    VerifyDissipator,
    VerifyRwa,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Design => "design",
            Experiment::SweepXi => "sweep-xi",
            Experiment::SweepR0 => "sweep-r0",
            Experiment::Spectrum => "spectrum",
            Experiment::G2 => "g2",
            Experiment::VerifyFrames => "verify-frames",
            Experiment::VerifyDissipator => "verify-dissipator",
            Experiment::VerifyRwa => "verify-rwa",
        }
    }
}

fn default_one() -> f64 {
    1.0
}

/// Design sweeps (the coupling-vs-xi curves and their inset).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    pub params: SystemParams,
    /// Grid on (0, xi0), geometrically dense toward the critical point.
    pub xi_grid: XiGrid,
    pub r0_grid: LinearGrid,
    /// Weight in the operating-point objective `min(G1/(weight kappa), Omega1)`.
    #[serde(default = "default_one")]
    pub weight: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XiGrid {
    pub n: usize,
    pub xi_min: f64,
    /// Final relative distance of the grid to xi0.
    pub closest: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearGrid {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl LinearGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        if self.n < 2 || !(self.max > self.min) {
            return Err(SqemError::Config(format!(
                "grid needs n >= 2 and max > min, got n = {}, [{}, {}]",
                self.n, self.min, self.max
            )));
        }
        let step = (self.max - self.min) / (self.n - 1) as f64;
        Ok((0..self.n).map(|k| self.min + step * k as f64).collect())
    }
}

/// Excitation-spectrum runs of the reduced driven model.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub g1_values: Vec<f64>,
    pub kappa: f64,
    /// Mechanical quality factor; `gamma_m = omega_m / q`.
    pub q: f64,
    pub n_th: f64,
    /// Probe strength as a fraction of kappa (weak-drive bound: <= 0.2).
    pub eps_eff_frac: f64,
    /// Detuning grid `[-beta - margin_low, -beta + margin_high]` per curve,
    /// beta = (G1/omega_m)^2.
    pub delta0_margin_low: f64,
    pub delta0_margin_high: f64,
    pub delta0_step: f64,
    pub dims: Vec<usize>,
}

/// Photon-blockade run: g2 trajectory plus direct steady solve.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct G2Config {
    pub g1: f64,
    pub delta0: f64,
    pub kappa: f64,
    pub q: f64,
    pub n_th: f64,
    pub eps_eff: f64,
    pub dims: Vec<usize>,
    /// Truncation for the independent dense-exponentiation oracle.
    pub oracle_dims: Vec<usize>,
    pub t_end_over_kappa: f64,
    pub n_times: usize,
    /// Also run the dense-exponentiation oracle and the linear control.
    pub run_oracle: bool,
}

/// Frame-equivalence dynamics check (lab vs exact Bogoliubov).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyFramesConfig {
    pub r0: f64,
    pub xi: f64,
    pub g: f64,
    pub kappa: f64,
    pub q: f64,
    pub n_th: f64,
    pub dims: Vec<usize>,
    pub t_end_over_kappa: f64,
    pub n_times: usize,
    /// Time-averaged relative tolerance on `<A1^dag A1>`.
    pub tol_rel: f64,
}

/// Projected dissipator/Hamiltonian identity check.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyDissipatorConfig {
    pub r0: f64,
    pub xi: f64,
    pub g: f64,
    pub kappa: f64,
    pub q: f64,
    pub n_th: f64,
    pub dims: Vec<usize>,
    pub max_occupation: usize,
    pub tol_rel: f64,
}

/// RWA validity check: effective vs exact Bogoliubov dynamics at a passing
/// ratio and at a ratio where failure is expected.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyRwaConfig {
    pub r0: f64,
    /// `g * sinh r0 cosh r0`, the counter-rotating coupling scale.
    pub g_m_product: f64,
    pub kappa: f64,
    pub q: f64,
    pub n_th: f64,
    pub ratio_pass: f64,
    pub ratio_fail: f64,
    pub dims_exact: Vec<usize>,
    pub dims_effective: Vec<usize>,
    pub t_end_over_kappa: f64,
    pub n_times: usize,
    pub tol_rel: f64,
}

/// Complete resolved configuration of one invocation.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    pub output: String,
    pub threads: usize,
    pub tolerances: Tolerances,
    pub design: DesignConfig,
    pub spectrum: SpectrumConfig,
    pub g2: G2Config,
    pub verify_frames: VerifyFramesConfig,
    pub verify_dissipator: VerifyDissipatorConfig,
    pub verify_rwa: VerifyRwaConfig,
}

/// Detunings giving squeezing parameter `r0` at coupling `xi` with
/// symmetric detunings: `delta1 = delta2 = xi / tanh(2 r0)`.
pub fn symmetric_detuning_for_r0(r0: f64, xi: f64) -> f64 {
    xi / (2.0 * r0).tanh()
}

impl ExperimentConfig {
    /// The documented defaults: design sweeps on the headline
    /// enhanced-coupling parameter set, the resolved-sideband spectrum
    /// curves, the blockade demo, and the three verification suites.
    pub fn defaults() -> Self {
        Self {
            experiment: None,
            output: "out".into(),
            threads: 0, // 0 = library default (all cores)
            tolerances: Tolerances::default(),
            design: DesignConfig {
                params: SystemParams {
                    delta1: 1000.0,
                    delta2: 1000.0,
                    xi: 800.0,
                    g: 0.001,
                    kappa: 0.02,
                    gamma_m: 0.0,
                    n_th: 0.0,
                    omega_d: None,
                },
                xi_grid: XiGrid { n: 600, xi_min: 1.0, closest: 1e-8 },
                r0_grid: LinearGrid { min: 0.0, max: 6.5, n: 261 },
                weight: 1.0,
            },
            spectrum: SpectrumConfig {
                g1_values: vec![0.25, 0.5, 1.0],
                kappa: 0.1,
                q: 1e3,
                n_th: 0.0,
                eps_eff_frac: 0.1,
                delta0_margin_low: 0.6,
                delta0_margin_high: 2.4,
                delta0_step: 0.02,
                dims: vec![6, 14],
            },
            g2: G2Config {
                g1: 1.0,
                delta0: -1.0,
                kappa: 0.1,
                q: 1e3,
                n_th: 0.0,
                eps_eff: 0.01,
                dims: vec![6, 14],
                oracle_dims: vec![5, 12],
                t_end_over_kappa: 20.0,
                n_times: 400,
                run_oracle: true,
            },
            verify_frames: VerifyFramesConfig {
                r0: 0.5,
                xi: 1.0,
                g: 0.1,
                kappa: 1.0,
                q: 1e3,
                n_th: 0.0,
                dims: vec![12, 12, 8],
                t_end_over_kappa: 10.0,
                n_times: 120,
                tol_rel: 0.01,
            },
            verify_dissipator: VerifyDissipatorConfig {
                r0: 0.3,
                xi: 1.0,
                g: 0.3,
                kappa: 0.7,
                q: 1e3,
                n_th: 0.2,
                dims: vec![15, 15, 8],
                max_occupation: 5,
                tol_rel: 1e-10,
            },
            verify_rwa: VerifyRwaConfig {
                r0: 0.5,
                g_m_product: 0.8,
                kappa: 1.0,
                q: 1e3,
                n_th: 0.0,
                ratio_pass: 20.0,
                ratio_fail: 5.0,
                dims_exact: vec![8, 8, 14],
                dims_effective: vec![5, 4, 14],
                t_end_over_kappa: 10.0,
                n_times: 120,
                tol_rel: 0.05,
            },
        }
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serialization cannot fail")
    }

    pub fn validate(&self) -> Result<()> {
        if self.spectrum.eps_eff_frac > 0.2 {
            return Err(SqemError::Config(format!(
                "spectrum.eps_eff_frac = {} exceeds the weak-drive bound 0.2",
                self.spectrum.eps_eff_frac
            )));
        }
        if self.spectrum.delta0_step <= 0.0 {
            return Err(SqemError::Config("spectrum.delta0_step must be > 0".into()));
        }
        for (name, q) in [("spectrum.q", self.spectrum.q), ("g2.q", self.g2.q)] {
            if !(q > 0.0) {
                return Err(SqemError::Config(format!("{name} must be > 0")));
            }
        }
        Ok(())
    }
}

/// Recursively checks a config value against the known key tree, producing
/// `path.to.key: unknown key` diagnostics before the typed parse runs.
fn check_keys(value: &serde_json::Value, schema: &serde_json::Value, path: &str) -> Result<()> {
    if let (Some(obj), Some(schema_obj)) = (value.as_object(), schema.as_object()) {
        for (key, sub) in obj {
            let sub_path = if path.is_empty() { key.clone() } else { format!("{path}.{key}") };
            match schema_obj.get(key) {
                None => {
                    return Err(SqemError::Config(format!("{sub_path}: unknown key")));
                }
                Some(sub_schema) => check_keys(sub, sub_schema, &sub_path)?,
            }
        }
    }
    Ok(())
}

/// Merges `overlay` onto `base` (objects recursively, everything else by
/// replacement).
fn merge(base: &mut serde_json::Value, overlay: serde_json::Value) {
    match (base, overlay) {
        (serde_json::Value::Object(b), serde_json::Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Applies one `--set key.path=value` override; values parse as JSON first
/// and fall back to strings.
pub fn apply_override(config: &mut serde_json::Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment.split_once('=').ok_or_else(|| {
        SqemError::Config(format!("override '{assignment}' is not of the form key.path=value"))
    })?;
    let parsed: serde_json::Value =
        serde_json::from_str(raw).unwrap_or(serde_json::Value::String(raw.to_string()));
    let mut slot = config;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = slot.as_object_mut().ok_or_else(|| {
            SqemError::Config(format!("override path '{path}' descends into a non-object"))
        })?;
        if i == parts.len() - 1 {
            obj.insert((*part).to_string(), parsed);
            return Ok(());
        }
        slot = obj
            .entry((*part).to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    Ok(())
}

/// Resolves a configuration: defaults, then the optional config file (or a
/// manifest's `resolved_config`), then `--set` overrides; unknown keys are
/// hard errors with their full path.
pub fn resolve_config(
    file_contents: Option<&str>,
    overrides: &[String],
) -> Result<ExperimentConfig> {
    let mut value = ExperimentConfig::defaults().to_value();
    // fields skipped when None still belong to the schema
    let schema = {
        let mut s = value.clone();
        s["experiment"] = serde_json::Value::Null;
        s["design"]["params"]["omega_d"] = serde_json::Value::Null;
        s
    };
    if let Some(text) = file_contents {
        let mut from_file: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| SqemError::Config(format!("config is not valid JSON: {e}")))?;
        // accept a manifest in place of a config
        if let Some(resolved) = from_file.get_mut("resolved_config") {
            from_file = resolved.take();
        }
        check_keys(&from_file, &schema, "")?;
        merge(&mut value, from_file);
    }
    for assignment in overrides {
        apply_override(&mut value, assignment)?;
    }
    check_keys(&value, &schema, "")?;
    let config: ExperimentConfig = serde_json::from_value(value)
        .map_err(|e| SqemError::Config(format!("config does not typecheck: {e}")))?;
    config.validate()?;
    Ok(config)
}

/// Renders the defaults table for `--help`.
pub fn defaults_table() -> String {
    serde_json::to_string_pretty(&ExperimentConfig::defaults().to_value())
        .expect("defaults serialize")
}
