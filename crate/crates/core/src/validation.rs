//! Structural invariant suite with an optional injected fault.

use std::fmt::Write;

use rand::rngs::StdRng;
use rand::SeedableRng;

use crate::dynamics::{emission_rate, steady_state, uniform_grid};
use crate::error::Result;
use crate::experiments::{initial_fock_dim, IBM_ALPHA_GRID, IBM_POPULATION_TOLERANCE, IBM_TOLERANCE, RATE_ALPHA_GRID, STEADY_ALPHA_GRID};
use crate::liouvillian::{build, EmMode};
use crate::operators::{hermiticity_defect, max_abs, random_hermitian, DenseOperator, Electronic, HilbertSpace};
use crate::oracles::{fc_factors, golden_rule_rate, validate_ccme_vs_ibm};
use crate::params::{Config, FrequencyConvention};
use crate::spectral::bose_occupation;

pub const TRACE_TOL: f64 = 1e-10;
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const DETAILED_BALANCE_TOL: f64 = 1e-8;
pub const RESIDUAL_TOL: f64 = 1e-10;
pub const INVARIANCE_TOL: f64 = 1e-10;
pub const FC_TOL: f64 = 1e-8;
pub const COLLAPSE_TOL: f64 = 1e-12;
/// Relative change allowed between consecutive truncations.
pub const TRUNCATION_TOL: f64 = 5e-3;

/// Deliberate faults used to confirm that the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Samples the optical rates with the odd extension 𝒥(−ω) = −𝒥(ω) of the
    /// signed eigenvalue gaps.
    CorruptFrequencySign,
    /// Starts the truncation check at this Fock cut-off.
    ForceFockDim(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    pub note: String,
}

impl CheckResult {
    /// Passes when `value < tolerance`.
    pub fn below(name: impl Into<String>, value: f64, tolerance: f64, note: impl Into<String>) -> Self {
        Self { name: name.into(), passed: value < tolerance, value, tolerance, note: note.into() }
    }

    fn failed(name: impl Into<String>, note: impl Into<String>) -> Self {
        Self { name: name.into(), passed: false, value: f64::NAN, tolerance: f64::NAN, note: note.into() }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Fixed-width pass/fail table.
    pub fn render(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
        let mut s = String::new();
        let _ = writeln!(s, "{:<width$}  {:<6}  {:>11}  {:>9}  note", "check", "result", "value", "tolerance");
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{:<width$}  {:<6}  {:>11.3e}  {:>9.1e}  {}",
                c.name,
                if c.passed { "PASS" } else { "FAIL" },
                c.value,
                c.tolerance,
                c.note
            );
        }
        let failed = self.failures().count();
        let _ = writeln!(s, "{} checks, {} failed", self.checks.len(), failed);
        s
    }
}

#[derive(Debug, Clone)]
pub struct ValidationOptions {
    pub trials: usize,
    pub seed: u64,
    pub fault: Option<Fault>,
    /// Also runs the exact-solution comparison, the slowest check.
    pub include_ibm: bool,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self { trials: 1000, seed: 20170817, fault: None, include_ibm: true }
    }
}

fn faulty_config(config: &Config, fault: Option<Fault>) -> Config {
    let mut c = *config;
    if fault == Some(Fault::CorruptFrequencySign) {
        c.conventions.frequency = FrequencyConvention::SignedOdd;
    }
    c
}

/// Reduced 2×2 electronic state Σ_n ⟨a,n|ρ|b,n⟩.
pub fn electronic_state(rho: &DenseOperator, space: &HilbertSpace) -> DenseOperator {
    let els = [Electronic::Ground, Electronic::Excited];
    DenseOperator::from_fn(2, 2, |a, b| {
        (0..space.fock_dim).map(|n| rho[(space.index(els[a], n), space.index(els[b], n))]).sum()
    })
}

/// |Tr ℒ[ρ]| and the Hermiticity defect of ℒ[ρ] over random Hermitian ρ,
/// both relative to max |ℒ[ρ]|.
pub fn check_trace_preservation(config: &Config, mode: EmMode, trials: usize, seed: u64) -> Result<Vec<CheckResult>> {
    let p = config.params;
    let p = p.with_fock_dim(initial_fock_dim(&p));
    let l = build(mode, &p, &config.conventions)?;
    let mut rng = StdRng::seed_from_u64(seed);
    let (mut worst_trace, mut worst_herm) = (0.0f64, 0.0f64);
    for _ in 0..trials {
        let rho = random_hermitian(l.dim(), &mut rng);
        let out = l.apply(&rho);
        let scale = max_abs(&out);
        let tr: crate::C64 = (0..l.dim()).map(|i| out[(i, i)]).sum();
        worst_trace = worst_trace.max(tr.norm() / scale);
        worst_herm = worst_herm.max(hermiticity_defect(&out) / scale);
    }
    let note = format!("{trials} inputs, M = {}", p.fock_dim);
    Ok(vec![
        CheckResult::below(format!("trace preservation ({})", mode.label()), worst_trace, TRACE_TOL, note.clone()),
        CheckResult::below(format!("hermiticity ({})", mode.label()), worst_herm, HERMITICITY_TOL, note),
    ])
}

/// At α = 0 the electronic steady state is the Gibbs state at T_EM.
pub fn check_detailed_balance(config: &Config, mode: EmMode, t_em: f64) -> Result<CheckResult> {
    let p = config.params.with_alpha_over_epsilon(0.0).with_t_em(t_em);
    let name = format!("detailed balance ({}, T_EM = {t_em} K)", mode.label());
    let l = build(mode, &p, &config.conventions)?;
    let ss = match steady_state(&l) {
        Ok(ss) => ss,
        Err(e) => return Ok(CheckResult::failed(name, e.to_string())),
    };
    let n = bose_occupation(p.epsilon, t_em)?;
    let pe = n / (2.0 * n + 1.0);
    let gibbs = DenseOperator::from_diagonal(&nalgebra::DVector::from_vec(vec![(1.0 - pe).into(), pe.into()]));
    let dev = max_abs(&(electronic_state(&ss.rho, &l.system.space) - gibbs));
    Ok(CheckResult::below(name, dev, DETAILED_BALANCE_TOL, format!("⟨σ†σ⟩ = {:.10}", ss.excited_population)))
}

fn spread(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (hi - lo) / hi.abs()
}

/// Additive rate and steady population do not depend on α.
pub fn check_additive_invariance(config: &Config, t_em: f64) -> Result<Vec<CheckResult>> {
    let mut rates = Vec::new();
    for &a in &RATE_ALPHA_GRID {
        let p = config.params.with_alpha_over_epsilon(a);
        let p = p.with_fock_dim(initial_fock_dim(&p));
        rates.push(emission_rate(&build(EmMode::Additive, &p, &config.conventions)?)?.over_gamma0);
    }
    let mut pops = Vec::new();
    for &a in &STEADY_ALPHA_GRID {
        let p = config.params.with_alpha_over_epsilon(a).with_t_em(t_em);
        let p = p.with_fock_dim(initial_fock_dim(&p));
        pops.push(steady_state(&build(EmMode::Additive, &p, &config.conventions)?)?.excited_population);
    }
    Ok(vec![
        CheckResult::below("additive rate α-invariance", spread(&rates), INVARIANCE_TOL, format!("rate/Γ₀ = {:.12}", rates[0])),
        CheckResult::below(
            format!("additive steady state α-invariance (T_EM = {t_em} K)"),
            spread(&pops),
            INVARIANCE_TOL,
            format!("⟨σ†σ⟩ = {:.12}", pops[0]),
        ),
    ])
}

/// Laguerre closed form against the truncated displacement operator.
pub fn check_fc_cross_method() -> CheckResult {
    let worst = (1..=6).map(|k| fc_factors(0.5 * k as f64, 40).1).fold(0.0, f64::max);
    CheckResult::below("FC cross-method agreement", worst, FC_TOL, "d = 0.5 … 3, M = 40")
}

/// Collective-coordinate dynamics with Γ₀ = 0 against the exact solution.
pub fn check_ibm(config: &Config) -> Result<Vec<CheckResult>> {
    let times = uniform_grid(1.0, 401);
    let mut out = Vec::new();
    for &a in &IBM_ALPHA_GRID {
        let p = config.params.with_alpha_over_epsilon(a);
        let p = p.with_fock_dim(initial_fock_dim(&p));
        let c = validate_ccme_vs_ibm(&p, &config.conventions, &times)?;
        out.push(CheckResult::below(
            format!("exact-solution coherence (α = {a}ε)"),
            c.max_deviation(),
            IBM_TOLERANCE,
            format!("M = {}, t ≤ 1 ps", c.fock_dim),
        ));
        out.push(CheckResult::below(
            format!("static populations (α = {a}ε)"),
            c.population_drift,
            IBM_POPULATION_TOLERANCE,
            "Γ₀ = 0",
        ));
    }
    Ok(out)
}

/// Relative change of the emission rate and steady population between
/// M and M + step at α = 0.3ε, plus the steady-state residual.
pub fn check_truncation(config: &Config, fock_dim: Option<usize>, t_em: f64) -> Result<Vec<CheckResult>> {
    let p = config.params.with_alpha_over_epsilon(0.3).with_t_em(t_em);
    let m = fock_dim.unwrap_or_else(|| initial_fock_dim(&p));
    let step = config.convergence.step;
    let mut rate = Vec::new();
    let mut pop = Vec::new();
    let mut residual: f64 = 0.0;
    for mm in [m, m + step] {
        let l = build(EmMode::NonAdditive, &p.with_fock_dim(mm), &config.conventions)?;
        rate.push(emission_rate(&l)?.over_gamma0);
        match steady_state(&l) {
            Ok(ss) => {
                pop.push(ss.excited_population);
                residual = residual.max(ss.residual);
            }
            Err(e) => {
                return Ok(vec![CheckResult::failed("truncation convergence (steady state)", e.to_string())]);
            }
        }
    }
    let rel = |v: &[f64]| (v[1] - v[0]).abs() / v[1].abs();
    let note = format!("α = 0.3ε, M = {m} → {}", m + step);
    Ok(vec![
        CheckResult::below("truncation convergence (emission rate)", rel(&rate), TRUNCATION_TOL, note.clone()),
        CheckResult::below(format!("truncation convergence (⟨σ†σ⟩, T_EM = {t_em} K)"), rel(&pop), TRUNCATION_TOL, note.clone()),
        CheckResult::below("steady-state residual [cm⁻¹]", residual, RESIDUAL_TOL, note),
    ])
}

/// Frozen-𝒥 golden rule is flat in d; with the true 𝒥 it decreases.
pub fn check_golden_rule(config: &Config) -> Result<Vec<CheckResult>> {
    let ds: Vec<f64> = (0..=6).map(|k| 0.5 * k as f64).collect();
    let frozen: Vec<f64> = ds
        .iter()
        .map(|&d| golden_rule_rate(&config.params, d, &config.conventions, true).map(|g| g.over_gamma0))
        .collect::<Result<_>>()?;
    let exact: Vec<f64> = ds
        .iter()
        .map(|&d| golden_rule_rate(&config.params, d, &config.conventions, false).map(|g| g.over_gamma0))
        .collect::<Result<_>>()?;
    let worst_step = exact.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    Ok(vec![
        CheckResult::below("golden rule collapse (𝒥 frozen at ε)", spread(&frozen), COLLAPSE_TOL, "d = 0 … 3"),
        CheckResult::below("golden rule decreasing in d", worst_step, 0.0, "largest consecutive change"),
    ])
}

/// Runs every check and collects the results. Errors from the underlying
/// solvers are propagated; a check that cannot be evaluated for a physical
/// reason is recorded as failed.
pub fn run_all_validations(config: &Config, opts: &ValidationOptions) -> Result<ValidationReport> {
    let cfg = faulty_config(config, opts.fault);
    let mut checks = Vec::new();
    for mode in [EmMode::Additive, EmMode::NonAdditive] {
        checks.extend(check_trace_preservation(&cfg, mode, opts.trials, opts.seed)?);
    }
    for mode in [EmMode::Additive, EmMode::NonAdditive] {
        for t_em in [6000.0, 60000.0] {
            checks.push(check_detailed_balance(&cfg, mode, t_em)?);
        }
    }
    checks.extend(check_additive_invariance(&cfg, 60000.0)?);
    checks.push(check_fc_cross_method());
    checks.extend(check_golden_rule(&cfg)?);
    let forced = match opts.fault {
        Some(Fault::ForceFockDim(m)) => Some(m),
        _ => None,
    };
    checks.extend(check_truncation(&cfg, forced, 60000.0)?);
    if opts.include_ibm {
        checks.extend(check_ibm(&cfg)?);
    }
    Ok(ValidationReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_inputs_preserve_trace() {
        let checks = check_trace_preservation(&Config::default(), EmMode::NonAdditive, 50, 1).unwrap();
        assert!(checks.iter().all(|c| c.passed), "{checks:?}");
    }

    #[test]
    fn detailed_balance_detects_sign_fault() {
        let cfg = Config::default();
        assert!(check_detailed_balance(&cfg, EmMode::NonAdditive, 60000.0).unwrap().passed);
        let bad = faulty_config(&cfg, Some(Fault::CorruptFrequencySign));
        assert!(!check_detailed_balance(&bad, EmMode::NonAdditive, 60000.0).unwrap().passed);
    }

    #[test]
    fn forced_small_cutoff_fails_truncation() {
        let checks = check_truncation(&Config::default(), Some(3), 60000.0).unwrap();
        assert!(checks.iter().any(|c| !c.passed), "{checks:?}");
    }

    #[test]
    fn report_table() {
        let r = ValidationReport {
            checks: vec![CheckResult::below("a", 1e-12, 1e-10, ""), CheckResult::below("bb", 1.0, 0.5, "x")],
        };
        assert!(!r.all_passed());
        let text = r.render();
        assert!(text.contains("PASS") && text.contains("FAIL") && text.ends_with("2 checks, 1 failed\n"));
    }

    #[test]
    fn golden_rule_checks_pass() {
        assert!(check_golden_rule(&Config::default()).unwrap().iter().all(|c| c.passed));
        assert!(check_fc_cross_method().passed);
    }
}
