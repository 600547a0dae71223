//! Physical parameters, unit conversions and the flat key-value config format.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod units {
    /// Speed of light in cm/ps.
    pub const SPEED_OF_LIGHT_CM_PER_PS: f64 = 0.029_979_245_8;
    /// Boltzmann constant in cm⁻¹/K.
    pub const BOLTZMANN_CM_PER_K: f64 = 0.695_034_8;

    /// cm⁻¹ → rad/ps.
    pub fn cm_to_rad_per_ps(nu: f64) -> f64 {
        2.0 * std::f64::consts::PI * SPEED_OF_LIGHT_CM_PER_PS * nu
    }

    /// rad/ps (or ps⁻¹ rates) → cm⁻¹.
    pub fn rad_per_ps_to_cm(omega: f64) -> f64 {
        omega / (2.0 * std::f64::consts::PI * SPEED_OF_LIGHT_CM_PER_PS)
    }

    /// Physical time in ps → internal time in units of 1/cm⁻¹.
    pub fn ps_to_internal_time(t_ps: f64) -> f64 {
        cm_to_rad_per_ps(t_ps)
    }

    /// Thermal energy k_B·T in cm⁻¹.
    pub fn thermal_energy(temperature_k: f64) -> f64 {
        BOLTZMANN_CM_PER_K * temperature_k
    }
}

/// Physical constants of the emitter and its two environments.
///
/// Energies are in cm⁻¹, temperatures in K. The bare emission rate is kept
/// in ps⁻¹ as supplied; [`ModelParams::gamma0_cm`] gives the internal value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub epsilon: f64,
    pub alpha: f64,
    pub nu0: f64,
    pub gamma: f64,
    pub gamma0_per_ps: f64,
    pub t_residual: f64,
    pub t_em: f64,
    pub fock_dim: usize,
}

impl Default for ModelParams {
    /// Room-temperature emitter with a 100 ps radiative lifetime and α = 0.1ε.
    fn default() -> Self {
        Self {
            epsilon: 8065.0,
            alpha: 806.5,
            nu0: 400.0,
            gamma: 80.0,
            gamma0_per_ps: 1.0 / 100.0,
            t_residual: 300.0,
            t_em: 300.0,
            fock_dim: 8,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        fn positive(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, reason: format!("must be > 0, got {v}") })
            }
        }
        fn non_negative(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, reason: format!("must be ≥ 0, got {v}") })
            }
        }
        positive("epsilon", self.epsilon)?;
        positive("nu0", self.nu0)?;
        non_negative("gamma", self.gamma)?;
        non_negative("alpha", self.alpha)?;
        non_negative("gamma0", self.gamma0_per_ps)?;
        positive("t_residual", self.t_residual)?;
        positive("t_em", self.t_em)?;
        if self.fock_dim < 2 {
            return Err(Error::InvalidParameter {
                name: "fock_dim",
                reason: format!("must be ≥ 2, got {}", self.fock_dim),
            });
        }
        Ok(())
    }

    /// Bare emission rate Γ₀ in cm⁻¹.
    pub fn gamma0_cm(&self) -> f64 {
        units::rad_per_ps_to_cm(self.gamma0_per_ps)
    }

    pub fn with_alpha_over_epsilon(mut self, ratio: f64) -> Self {
        self.alpha = ratio * self.epsilon;
        self
    }

    pub fn with_fock_dim(mut self, m: usize) -> Self {
        self.fock_dim = m;
        self
    }

    pub fn with_t_em(mut self, t: f64) -> Self {
        self.t_em = t;
        self
    }

    pub fn alpha_over_epsilon(&self) -> f64 {
        self.alpha / self.epsilon
    }
}

/// Shape of the electromagnetic spectral density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmSpectralShape {
    /// 𝒥(ω) = Γ₀ω³ / (2πε³).
    #[default]
    Cubic,
    /// 𝒥(ω) = Γ₀/2π for every ω > 0.
    Flat,
}

/// Which frequency the electromagnetic rates Γ↓, Γ↑ are sampled at for each
/// eigenbasis element σ_jk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyConvention {
    /// Positive gap magnitude |ψ_j − ψ_k|; 𝒥(ω ≤ 0) = 0.
    #[default]
    PositiveGap,
    /// Signed λ_jk = ψ_j − ψ_k with 𝒥 clamped to zero for ω ≤ 0.
    SignedClamped,
    /// Signed λ_jk with the odd extension 𝒥(−ω) = −𝒥(ω) and n(−ω) = −(n(ω)+1).
    SignedOdd,
}

/// Index reading of the golden-rule double sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoldenRuleIndexing {
    /// Thermal weights over the initial displaced excited-manifold states m̃,
    /// summed over final ground-manifold states n; gap ε + (m − n)Ω.
    #[default]
    ExcitedThermal,
    /// Thermal weights p_n attached to the undisplaced index n, as the
    /// double sum is typeset; gap ε + (m − n)Ω.
    AsPrinted,
}

/// Modelling choices that are not physical constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub em_shape: EmSpectralShape,
    pub frequency: FrequencyConvention,
    /// Adds the residual-bath counter term κ(b† + b)² to the unitary part,
    /// with κ = ∫₀^cutoff J_R(ν)/ν dν.
    pub include_residual_counterterm: bool,
    pub residual_cutoff: f64,
    pub golden_rule: GoldenRuleIndexing,
}

impl Default for Conventions {
    fn default() -> Self {
        Self {
            em_shape: EmSpectralShape::Cubic,
            frequency: FrequencyConvention::PositiveGap,
            include_residual_counterterm: false,
            residual_cutoff: 4000.0,
            golden_rule: GoldenRuleIndexing::ExcitedThermal,
        }
    }
}

/// Truncation-convergence controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSettings {
    pub relative_tol: f64,
    pub step: usize,
    pub max_fock_dim: usize,
}

impl Default for ConvergenceSettings {
    fn default() -> Self {
        Self { relative_tol: 5e-3, step: 2, max_fock_dim: 40 }
    }
}

/// Everything a run needs, as read from a config file plus overrides.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Config {
    pub params: ModelParams,
    pub conventions: Conventions,
    pub convergence: ConvergenceSettings,
}

/// On-disk representation: a flat table of optional keys.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    epsilon_cm: Option<f64>,
    alpha_over_epsilon: Option<f64>,
    alpha_cm: Option<f64>,
    nu0_cm: Option<f64>,
    gamma_cm: Option<f64>,
    gamma0_inv_ps: Option<f64>,
    t_r_k: Option<f64>,
    t_em_k: Option<f64>,
    fock_dim: Option<usize>,
    em_spectral_shape: Option<EmSpectralShape>,
    frequency_convention: Option<FrequencyConvention>,
    include_residual_counterterm: Option<bool>,
    residual_cutoff_cm: Option<f64>,
    golden_rule_indexing: Option<GoldenRuleIndexing>,
    convergence_tol: Option<f64>,
    max_fock_dim: Option<usize>,
}

impl Config {
    /// Parses a flat `key = value` document. Unknown keys are rejected.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e| Error::Config(format!("{e}")))?;
        Self::from_table(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Loads `path` (or the defaults) and applies `key=value` overrides in order.
    pub fn load_with_overrides(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
                text.parse::<toml::Table>().map_err(|e| Error::Config(format!("{e}")))?
            }
            None => toml::Table::new(),
        };
        for item in overrides {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override `{item}` is not key=value")))?;
            table.insert(key.trim().to_string(), parse_scalar(value.trim()));
        }
        Self::from_table(table)
    }

    fn from_table(table: toml::Table) -> Result<Self> {
        let raw: RawConfig = table.try_into().map_err(|e| Error::Config(format!("{e}")))?;
        let mut params = ModelParams::default();
        let mut conventions = Conventions::default();
        let mut convergence = ConvergenceSettings::default();

        if let Some(v) = raw.epsilon_cm {
            params.epsilon = v;
        }
        match (raw.alpha_over_epsilon, raw.alpha_cm) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "set at most one of alpha_over_epsilon and alpha_cm".into(),
                ))
            }
            (Some(r), None) => params.alpha = r * params.epsilon,
            (None, Some(a)) => params.alpha = a,
            (None, None) => params.alpha = 0.1 * params.epsilon,
        }
        if let Some(v) = raw.nu0_cm {
            params.nu0 = v;
        }
        if let Some(v) = raw.gamma_cm {
            params.gamma = v;
        }
        if let Some(v) = raw.gamma0_inv_ps {
            if !(v > 0.0) {
                return Err(Error::Config(format!("gamma0_inv_ps must be > 0, got {v}")));
            }
            params.gamma0_per_ps = 1.0 / v;
        }
        if let Some(v) = raw.t_r_k {
            params.t_residual = v;
        }
        if let Some(v) = raw.t_em_k {
            params.t_em = v;
        }
        if let Some(v) = raw.fock_dim {
            params.fock_dim = v;
        }
        if let Some(v) = raw.em_spectral_shape {
            conventions.em_shape = v;
        }
        if let Some(v) = raw.frequency_convention {
            conventions.frequency = v;
        }
        if let Some(v) = raw.include_residual_counterterm {
            conventions.include_residual_counterterm = v;
        }
        if let Some(v) = raw.residual_cutoff_cm {
            conventions.residual_cutoff = v;
        }
        if let Some(v) = raw.golden_rule_indexing {
            conventions.golden_rule = v;
        }
        if let Some(v) = raw.convergence_tol {
            convergence.relative_tol = v;
        }
        if let Some(v) = raw.max_fock_dim {
            convergence.max_fock_dim = v;
        }
        params.validate()?;
        if !(convergence.relative_tol > 0.0) {
            return Err(Error::Config("convergence_tol must be > 0".into()));
        }
        Ok(Self { params, conventions, convergence })
    }

    /// Flat key → value listing that reproduces this config; embedded in
    /// every CSV header.
    pub fn to_key_values(&self) -> BTreeMap<&'static str, String> {
        let p = &self.params;
        let c = &self.conventions;
        let mut map = BTreeMap::new();
        map.insert("epsilon_cm", format!("{}", p.epsilon));
        map.insert("alpha_cm", format!("{}", p.alpha));
        map.insert("nu0_cm", format!("{}", p.nu0));
        map.insert("gamma_cm", format!("{}", p.gamma));
        map.insert("gamma0_inv_ps", format!("{}", 1.0 / p.gamma0_per_ps));
        map.insert("t_r_k", format!("{}", p.t_residual));
        map.insert("t_em_k", format!("{}", p.t_em));
        map.insert("fock_dim", format!("{}", p.fock_dim));
        map.insert("em_spectral_shape", enum_name(&c.em_shape));
        map.insert("frequency_convention", enum_name(&c.frequency));
        map.insert("include_residual_counterterm", format!("{}", c.include_residual_counterterm));
        map.insert("residual_cutoff_cm", format!("{}", c.residual_cutoff));
        map.insert("golden_rule_indexing", enum_name(&c.golden_rule));
        map.insert("convergence_tol", format!("{}", self.convergence.relative_tol));
        map.insert("max_fock_dim", format!("{}", self.convergence.max_fock_dim));
        map
    }
}

fn enum_name<T: Serialize>(value: &T) -> String {
    toml::Value::try_from(value)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

/// Interprets an override value as a TOML scalar, falling back to a bare string.
fn parse_scalar(text: &str) -> toml::Value {
    let doc = format!("v = {text}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(text.into())),
        Err(_) => toml::Value::String(text.trim_matches('"').to_string()),
    }
}

/// Default config document shipped with the CLI.
pub const DEFAULT_CONFIG: &str = include_str!("../config/default.toml");
