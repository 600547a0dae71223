//! Named experiments: parameter sweeps, decay dynamics, the exact-solution
//! comparison and the golden-rule table, each written as a CSV (and
//! optionally an SVG) into an output directory.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::{info, warn};
use rayon::prelude::*;

use crate::cc::map_cc;
use crate::dynamics::{
    converge_truncation, emission_rate, fit_exponential_rate, propagate, steady_state, uniform_grid,
    Converged, EmissionRate, InitialState, PropagationOptions, RateFit, SteadyState, TimeSeries,
};
use crate::error::{Error, Result};
use crate::liouvillian::{build, EmMode};
use crate::oracles::{containment_dim, displaced_overlap, golden_rule_rate, validate_ccme_vs_ibm, IbmComparison};
use crate::params::{Config, Conventions, GoldenRuleIndexing, ModelParams};
use crate::report::{write_atomic, Table};
use crate::svg::{Plot, Series};

/// α/ε values of the emission-rate sweep.
pub const RATE_ALPHA_GRID: [f64; 6] = [0.025, 0.05, 0.1, 0.15, 0.2, 0.25];
/// α/ε values of the steady-state sweep.
pub const STEADY_ALPHA_GRID: [f64; 7] = [0.025, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3];
/// T_EM values (K) of the steady-state α sweep.
pub const STEADY_T_EM: [f64; 3] = [6000.0, 12000.0, 60000.0];
/// α/ε of the temperature sweep.
pub const TEMPERATURE_SWEEP_ALPHA: f64 = 0.3;
/// α/ε values of the exact-solution comparison.
pub const IBM_ALPHA_GRID: [f64; 2] = [0.1, 0.25];
/// Largest tolerated |Δ⟨σ_x⟩|, |Δ⟨σ_y⟩| against the exact solution.
pub const IBM_TOLERANCE: f64 = 0.05;
/// Largest tolerated drift of the populations with Γ₀ = 0.
pub const IBM_POPULATION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentName {
    DecayDynamics,
    RateSweep,
    SteadySweepAlpha,
    SteadySweepTemperature,
    IbmValidate,
    GoldenRuleTable,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 6] = [
        ExperimentName::DecayDynamics,
        ExperimentName::RateSweep,
        ExperimentName::SteadySweepAlpha,
        ExperimentName::SteadySweepTemperature,
        ExperimentName::IbmValidate,
        ExperimentName::GoldenRuleTable,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::DecayDynamics => "decay-dynamics",
            ExperimentName::RateSweep => "rate-sweep",
            ExperimentName::SteadySweepAlpha => "steady-sweep-alpha",
            ExperimentName::SteadySweepTemperature => "steady-sweep-temperature",
            ExperimentName::IbmValidate => "ibm-validate",
            ExperimentName::GoldenRuleTable => "golden-rule-table",
        }
    }
}

impl FromStr for ExperimentName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|e| e.as_str() == s).ok_or_else(|| Error::UnknownExperiment(s.to_string()))
    }
}

impl std::fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModeSelection {
    #[default]
    Both,
    Additive,
    NonAdditive,
}

impl ModeSelection {
    pub fn modes(self) -> Vec<EmMode> {
        match self {
            ModeSelection::Both => vec![EmMode::Additive, EmMode::NonAdditive],
            ModeSelection::Additive => vec![EmMode::Additive],
            ModeSelection::NonAdditive => vec![EmMode::NonAdditive],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModeSelection::Both => "both",
            ModeSelection::Additive => "additive",
            ModeSelection::NonAdditive => "nonadditive",
        }
    }
}

impl FromStr for ModeSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "both" => Ok(Self::Both),
            "additive" => Ok(Self::Additive),
            "nonadditive" | "non-additive" => Ok(Self::NonAdditive),
            other => Err(Error::Config(format!("unknown mode `{other}`"))),
        }
    }
}

/// One experiment run as requested from the command line.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub name: ExperimentName,
    pub config: Config,
    pub mode: ModeSelection,
    pub out_dir: PathBuf,
    pub svg: bool,
    pub workers: usize,
}

/// Files written by a run, and whether its built-in check passed.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub passed: bool,
    pub table: Table,
}

/// Smallest Fock cut-off that contains the displaced excited-manifold
/// oscillator, and never below the configured one.
pub fn initial_fock_dim(p: &ModelParams) -> usize {
    p.fock_dim.max(containment_dim(map_cc(p).displacement()))
}

fn check_start(p: &ModelParams, config: &Config) -> Result<usize> {
    let m = initial_fock_dim(p);
    if m + config.convergence.step > config.convergence.max_fock_dim {
        return Err(Error::NoConvergence { max_dim: config.convergence.max_fock_dim, last: vec![] });
    }
    Ok(m)
}

/// Emission rate converged in the Fock cut-off.
pub fn converged_emission_rate(p: &ModelParams, config: &Config, mode: EmMode) -> Result<Converged<EmissionRate>> {
    let start = check_start(p, config)?;
    converge_truncation(
        |m| {
            let l = build(mode, &p.with_fock_dim(m), &config.conventions)?;
            let r = emission_rate(&l)?;
            Ok((r, r.over_gamma0))
        },
        start,
        &config.convergence,
    )
}

/// Steady state converged in the Fock cut-off (on ⟨σ†σ⟩).
pub fn converged_steady_state(p: &ModelParams, config: &Config, mode: EmMode) -> Result<Converged<SteadyState>> {
    let start = check_start(p, config)?;
    converge_truncation(
        |m| {
            let l = build(mode, &p.with_fock_dim(m), &config.conventions)?;
            let ss = steady_state(&l)?;
            let pop = ss.excited_population;
            Ok((ss, pop))
        },
        start,
        &config.convergence,
    )
}

/// Scalar outputs over a one-dimensional parameter grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub parameter: String,
    pub grid: Vec<f64>,
    pub columns: Vec<SweepColumn>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepColumn {
    pub name: String,
    pub values: Vec<f64>,
    /// Fock cut-off at which each value converged.
    pub fock_dims: Vec<usize>,
}

impl SweepResult {
    pub fn column(&self, name: &str) -> Option<&SweepColumn> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn to_table(&self) -> Table {
        let mut names = vec![self.parameter.clone()];
        for c in &self.columns {
            names.push(c.name.clone());
        }
        for c in &self.columns {
            names.push(format!("M_{}", c.name));
        }
        let mut t = Table::new(names);
        for (i, &g) in self.grid.iter().enumerate() {
            let mut row = vec![g];
            row.extend(self.columns.iter().map(|c| c.values[i]));
            row.extend(self.columns.iter().map(|c| c.fock_dims[i] as f64));
            t.push_row(row);
        }
        t
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Evaluates `task` on every (point, mode) pair in parallel, keeping order.
fn sweep<F>(
    parameter: &str,
    grid: &[f64],
    columns: &[(String, EmMode)],
    workers: usize,
    task: F,
) -> Result<SweepResult>
where
    F: Fn(f64, EmMode) -> Result<(f64, usize)> + Sync,
{
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config(format!("{parameter} grid must be strictly increasing")));
    }
    let jobs: Vec<(usize, usize)> =
        (0..columns.len()).flat_map(|c| (0..grid.len()).map(move |g| (c, g))).collect();
    let results: Vec<Result<(f64, usize)>> =
        pool(workers)?.install(|| jobs.par_iter().map(|&(c, g)| task(grid[g], columns[c].1)).collect());
    let mut out = SweepResult {
        parameter: parameter.to_string(),
        grid: grid.to_vec(),
        columns: columns
            .iter()
            .map(|(name, _)| SweepColumn { name: name.clone(), values: Vec::new(), fock_dims: Vec::new() })
            .collect(),
    };
    for (&(c, _), r) in jobs.iter().zip(results) {
        let (v, m) = r?;
        out.columns[c].values.push(v);
        out.columns[c].fock_dims.push(m);
    }
    Ok(out)
}

/// Converged emission rate in units of Γ₀ over α/ε.
pub fn rate_sweep(config: &Config, alpha_grid: &[f64], modes: ModeSelection, workers: usize) -> Result<SweepResult> {
    let columns: Vec<(String, EmMode)> =
        modes.modes().into_iter().map(|m| (format!("rate_{}_over_gamma0", m.label()), m)).collect();
    sweep("alpha_over_eps", alpha_grid, &columns, workers, |ratio, mode| {
        let p = config.params.with_alpha_over_epsilon(ratio);
        let c = converged_emission_rate(&p, config, mode)?;
        Ok((c.scalar, c.fock_dim))
    })
}

/// Converged steady ⟨σ†σ⟩ over α/ε, one column per (T_EM, mode).
pub fn steady_sweep_alpha(
    config: &Config,
    alpha_grid: &[f64],
    t_em_grid: &[f64],
    modes: ModeSelection,
    workers: usize,
) -> Result<SweepResult> {
    let mut merged: Option<SweepResult> = None;
    for &t_em in t_em_grid {
        let columns: Vec<(String, EmMode)> = modes
            .modes()
            .into_iter()
            .map(|m| (format!("pop_{}_T{}K", m.label(), t_em), m))
            .collect();
        let part = sweep("alpha_over_eps", alpha_grid, &columns, workers, |ratio, mode| {
            let p = config.params.with_alpha_over_epsilon(ratio).with_t_em(t_em);
            let c = converged_steady_state(&p, config, mode)?;
            Ok((c.scalar, c.fock_dim))
        })?;
        match merged.as_mut() {
            None => merged = Some(part),
            Some(m) => m.columns.extend(part.columns),
        }
    }
    merged.ok_or_else(|| Error::Config("empty T_EM grid".into()))
}

/// Converged steady ⟨σ†σ⟩ over T_EM at fixed α/ε.
pub fn steady_sweep_temperature(
    config: &Config,
    alpha_over_eps: f64,
    t_em_grid: &[f64],
    modes: ModeSelection,
    workers: usize,
) -> Result<SweepResult> {
    let columns: Vec<(String, EmMode)> =
        modes.modes().into_iter().map(|m| (format!("pop_{}", m.label()), m)).collect();
    sweep("t_em_k", t_em_grid, &columns, workers, |t_em, mode| {
        let p = config.params.with_alpha_over_epsilon(alpha_over_eps).with_t_em(t_em);
        let c = converged_steady_state(&p, config, mode)?;
        Ok((c.scalar, c.fock_dim))
    })
}

/// `n` points log-spaced on [lo, hi].
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| match k {
            0 => lo,
            _ if k + 1 == n => hi,
            _ => (a + (b - a) * k as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

/// One trajectory of the decay experiment.
#[derive(Debug, Clone)]
pub struct DecayTrace {
    pub alpha_over_eps: f64,
    pub mode: EmMode,
    pub fock_dim: usize,
    pub series: TimeSeries,
    pub fit: RateFit,
    pub rate: EmissionRate,
}

impl DecayTrace {
    /// |fit − single-application rate| relative to the latter.
    pub fn fit_discrepancy(&self) -> f64 {
        (self.fit.rate_per_ps - self.rate.rate_per_ps).abs() / self.rate.rate_per_ps.abs()
    }
}

/// ⟨σ†σ⟩(t) from |e⟩⟨e| ⊗ ρ_th, at the cut-off where the emission rate
/// converged, with an exponential fit cross-checked against the rate.
pub fn decay_dynamics(
    config: &Config,
    alpha_grid: &[f64],
    modes: ModeSelection,
    times_ps: &[f64],
    workers: usize,
) -> Result<Vec<DecayTrace>> {
    let jobs: Vec<(EmMode, f64)> =
        modes.modes().into_iter().flat_map(|m| alpha_grid.iter().map(move |&a| (m, a))).collect();
    let results: Vec<Result<DecayTrace>> = pool(workers)?.install(|| {
        jobs.par_iter()
            .map(|&(mode, ratio)| {
                let p = config.params.with_alpha_over_epsilon(ratio);
                let rate = converged_emission_rate(&p, config, mode)?;
                let p = p.with_fock_dim(rate.fock_dim);
                let l = build(mode, &p, &config.conventions)?;
                let rho0 = InitialState::ExcitedThermal.build(&p, &l.system.space)?;
                let series = propagate(&l, &rho0, times_ps, &PropagationOptions::default())?;
                let fit = fit_exponential_rate(&series.times_ps, &series.excited_population)?;
                let trace = DecayTrace {
                    alpha_over_eps: ratio,
                    mode,
                    fock_dim: rate.fock_dim,
                    series,
                    fit,
                    rate: rate.value,
                };
                if trace.fit_discrepancy() > 0.05 {
                    warn!(
                        "{} α/ε = {ratio}: fitted rate {:.4e} ps⁻¹ differs from {:.4e} ps⁻¹ by more than 5%",
                        mode.label(),
                        trace.fit.rate_per_ps,
                        trace.rate.rate_per_ps
                    );
                }
                Ok(trace)
            })
            .collect()
    });
    results.into_iter().collect()
}

/// Exact-solution comparisons over α/ε with Γ₀ = 0.
pub fn ibm_validate(config: &Config, alpha_grid: &[f64], times_ps: &[f64], workers: usize) -> Result<Vec<IbmComparison>> {
    let results: Vec<Result<IbmComparison>> = pool(workers)?.install(|| {
        alpha_grid
            .par_iter()
            .map(|&ratio| {
                let p = config.params.with_alpha_over_epsilon(ratio);
                let p = p.with_fock_dim(initial_fock_dim(&p));
                validate_ccme_vs_ibm(&p, &config.conventions, times_ps)
            })
            .collect()
    });
    results.into_iter().collect()
}

/// One row of the golden-rule table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenRuleRow {
    pub displacement: f64,
    pub alpha_over_eps: f64,
    pub zero_phonon_fc: f64,
    pub rate: f64,
    pub rate_frozen: f64,
    pub rate_as_printed: f64,
}

/// Golden-rule rates over the displacement d = η/Ω, in units of Γ₀.
pub fn golden_rule_table(config: &Config, displacements: &[f64]) -> Result<Vec<GoldenRuleRow>> {
    let p = config.params;
    let printed = Conventions { golden_rule: GoldenRuleIndexing::AsPrinted, ..config.conventions };
    let thermal = Conventions { golden_rule: GoldenRuleIndexing::ExcitedThermal, ..config.conventions };
    displacements
        .iter()
        .map(|&d| {
            // η²/Ω² = πα/2ν₀
            let alpha = 2.0 * p.nu0 * d * d / std::f64::consts::PI;
            Ok(GoldenRuleRow {
                displacement: d,
                alpha_over_eps: alpha / p.epsilon,
                zero_phonon_fc: displaced_overlap(d, 0, 0).powi(2),
                rate: golden_rule_rate(&p, d, &thermal, false)?.over_gamma0,
                rate_frozen: golden_rule_rate(&p, d, &thermal, true)?.over_gamma0,
                rate_as_printed: golden_rule_rate(&p, d, &printed, false)?.over_gamma0,
            })
        })
        .collect()
}

/// Displacement grid of the golden-rule table.
pub fn default_displacements() -> Vec<f64> {
    (0..=12).map(|k| 0.25 * k as f64).collect()
}

fn write_outputs(
    spec: &ExperimentSpec,
    mut table: Table,
    plot: Option<Plot>,
    passed: bool,
) -> Result<RunSummary> {
    let specific = std::mem::take(&mut table.metadata);
    table.describe_config(spec.name.as_str(), &spec.config);
    table.meta("mode", spec.mode.as_str());
    table.metadata.extend(specific);
    let mut files = vec![table.write(&spec.out_dir, spec.name.as_str())?];
    if spec.svg {
        if let Some(plot) = plot {
            let path = spec.out_dir.join(format!("{}.svg", spec.name));
            write_atomic(&path, plot.render().as_bytes())?;
            files.push(path);
        }
    }
    for f in &files {
        info!("wrote {}", f.display());
    }
    Ok(RunSummary { files, passed, table })
}

fn sweep_plot(result: &SweepResult, title: &str, x_label: &str, y_label: &str, x_log: bool) -> Plot {
    Plot {
        title: title.into(),
        x_label: x_label.into(),
        y_label: y_label.into(),
        x_log,
        y_log: false,
        series: result
            .columns
            .iter()
            .map(|c| Series {
                label: c.name.clone(),
                x: result.grid.clone(),
                y: c.values.clone(),
                dashed: c.name.contains("_additive"),
            })
            .collect(),
    }
}

/// Runs one named experiment with its default grids and writes its outputs.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunSummary> {
    let cfg = &spec.config;
    match spec.name {
        ExperimentName::RateSweep => {
            let r = rate_sweep(cfg, &RATE_ALPHA_GRID, spec.mode, spec.workers)?;
            let plot = sweep_plot(&r, "Emission rate", "alpha / epsilon", "rate / Gamma0", false);
            write_outputs(spec, r.to_table(), Some(plot), true)
        }
        ExperimentName::SteadySweepAlpha => {
            let r = steady_sweep_alpha(cfg, &STEADY_ALPHA_GRID, &STEADY_T_EM, spec.mode, spec.workers)?;
            let plot = sweep_plot(&r, "Steady-state population", "alpha / epsilon", "<sigma+ sigma>", false);
            write_outputs(spec, r.to_table(), Some(plot), true)
        }
        ExperimentName::SteadySweepTemperature => {
            let grid = log_grid(300.0, 60000.0, 12);
            let r = steady_sweep_temperature(cfg, TEMPERATURE_SWEEP_ALPHA, &grid, spec.mode, spec.workers)?;
            let plot = sweep_plot(&r, "Steady-state population, alpha = 0.3 epsilon", "T_EM [K]", "<sigma+ sigma>", true);
            let mut table = r.to_table();
            table.meta("alpha_over_epsilon_sweep", TEMPERATURE_SWEEP_ALPHA);
            write_outputs(spec, table, Some(plot), true)
        }
        ExperimentName::DecayDynamics => {
            let times = uniform_grid(400.0, 2000);
            let traces = decay_dynamics(cfg, &RATE_ALPHA_GRID, spec.mode, &times, spec.workers)?;
            let mut names = vec!["time_ps".to_string()];
            for tr in &traces {
                names.push(format!("pop_{}_a{}", tr.mode.label(), tr.alpha_over_eps));
            }
            let mut table = Table::new(names);
            for (k, &t) in times.iter().enumerate() {
                let mut row = vec![t];
                row.extend(traces.iter().map(|tr| tr.series.excited_population[k]));
                table.push_row(row);
            }
            for tr in &traces {
                let key = format!("{}_a{}", tr.mode.label(), tr.alpha_over_eps);
                table.meta(format!("M_{key}"), tr.fock_dim);
                table.meta(format!("fit_rate_per_ps_{key}"), format!("{:.10e}", tr.fit.rate_per_ps));
                table.meta(format!("rate_per_ps_{key}"), format!("{:.10e}", tr.rate.rate_per_ps));
                table.meta(format!("min_eigenvalue_{key}"), format!("{:.3e}", tr.series.worst_positivity_violation()));
            }
            let plot = Plot {
                title: "Excited-state population".into(),
                x_label: "t [ps]".into(),
                y_label: "<sigma+ sigma>".into(),
                series: traces
                    .iter()
                    .map(|tr| Series {
                        label: format!("{} {}", tr.mode.label(), tr.alpha_over_eps),
                        x: times.clone(),
                        y: tr.series.excited_population.clone(),
                        dashed: tr.mode == EmMode::Additive,
                    })
                    .collect(),
                ..Default::default()
            };
            write_outputs(spec, table, Some(plot), true)
        }
        ExperimentName::IbmValidate => {
            let times = uniform_grid(1.0, 401);
            let cmps = ibm_validate(cfg, &IBM_ALPHA_GRID, &times, spec.workers)?;
            let mut names = vec!["time_ps".to_string()];
            for (a, _) in IBM_ALPHA_GRID.iter().zip(&cmps) {
                for col in ["sigma_x_ccme", "sigma_x_exact", "sigma_y_ccme", "sigma_y_exact"] {
                    names.push(format!("{col}_a{a}"));
                }
            }
            let mut table = Table::new(names);
            let exact: Vec<(Vec<f64>, Vec<f64>)> = cmps.iter().map(|c| (c.exact.sigma_x(), c.exact.sigma_y())).collect();
            for (k, &t) in times.iter().enumerate() {
                let mut row = vec![t];
                for (c, (ex, ey)) in cmps.iter().zip(&exact) {
                    row.extend([c.ccme.sigma_x[k], ex[k], c.ccme.sigma_y[k], ey[k]]);
                }
                table.push_row(row);
            }
            let mut passed = true;
            for (a, c) in IBM_ALPHA_GRID.iter().zip(&cmps) {
                table.meta(format!("M_a{a}"), c.fock_dim);
                table.meta(format!("max_deviation_a{a}"), format!("{:.6e}", c.max_deviation()));
                table.meta(format!("population_drift_a{a}"), format!("{:.3e}", c.population_drift));
                passed &= c.max_deviation() < IBM_TOLERANCE && c.population_drift < IBM_POPULATION_TOLERANCE;
            }
            table.meta("tolerance", IBM_TOLERANCE);
            table.meta("passed", passed);
            let mut series = Vec::new();
            for (a, (c, (ex, _))) in IBM_ALPHA_GRID.iter().zip(cmps.iter().zip(&exact)) {
                series.push(Series { label: format!("CC-ME {a}"), x: times.clone(), y: c.ccme.sigma_x.clone(), dashed: false });
                series.push(Series { label: format!("exact {a}"), x: times.clone(), y: ex.clone(), dashed: true });
            }
            let plot = Plot {
                title: "Coherence with Gamma0 = 0".into(),
                x_label: "t [ps]".into(),
                y_label: "<sigma_x>".into(),
                series,
                ..Default::default()
            };
            write_outputs(spec, table, Some(plot), passed)
        }
        ExperimentName::GoldenRuleTable => {
            let rows = golden_rule_table(cfg, &default_displacements())?;
            let mut table = Table::new(
                ["displacement", "alpha_over_eps", "fc_00", "rate_over_gamma0", "rate_frozen_over_gamma0", "rate_as_printed_over_gamma0"]
                    .map(String::from)
                    .to_vec(),
            );
            for r in &rows {
                table.push_row(vec![r.displacement, r.alpha_over_eps, r.zero_phonon_fc, r.rate, r.rate_frozen, r.rate_as_printed]);
            }
            let xs: Vec<f64> = rows.iter().map(|r| r.displacement).collect();
            let plot = Plot {
                title: "Golden-rule emission rate".into(),
                x_label: "d = eta / Omega".into(),
                y_label: "rate / Gamma0".into(),
                series: vec![
                    Series { label: "J(gap)".into(), x: xs.clone(), y: rows.iter().map(|r| r.rate).collect(), dashed: false },
                    Series { label: "J frozen at eps".into(), x: xs, y: rows.iter().map(|r| r.rate_frozen).collect(), dashed: true },
                ],
                ..Default::default()
            };
            write_outputs(spec, table, Some(plot), true)
        }
    }
}

/// Default output directory for a run.
pub fn default_out_dir() -> &'static Path {
    Path::new("results")
}
