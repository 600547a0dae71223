//! Acceptance criteria 1–8, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed; exits non-zero on any failure.

use std::process::ExitCode;
use std::time::Instant;

use ccme::dynamics::{Converged, SteadyState};
use ccme::experiments::{
    converged_emission_rate, converged_steady_state, ibm_validate, log_grid, IBM_ALPHA_GRID, IBM_POPULATION_TOLERANCE,
    IBM_TOLERANCE, RATE_ALPHA_GRID, STEADY_ALPHA_GRID, STEADY_T_EM, TEMPERATURE_SWEEP_ALPHA,
};
use ccme::dynamics::uniform_grid;
use ccme::liouvillian::EmMode;
use ccme::oracles::golden_rule_rate;
use ccme::params::Config;
use ccme::spectral::bose_occupation;
use ccme::validation::{check_detailed_balance, check_fc_cross_method, check_trace_preservation, CheckResult};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn spread(v: &[f64]) -> f64 {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (hi - lo) / hi.abs()
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

/// Relative change between the last two truncations.
fn last_change<T>(c: &Converged<T>) -> f64 {
    let it = &c.iterates;
    let (a, b) = (it[it.len() - 2].1, it[it.len() - 1].1);
    (b - a).abs() / b.abs().max(1e-12)
}

struct Steady {
    /// values[t][a] for the α sweep.
    alpha_additive: Vec<Vec<Converged<SteadyState>>>,
    alpha_nonadditive: Vec<Vec<Converged<SteadyState>>>,
    temperature_grid: Vec<f64>,
    temp_additive: Vec<Converged<SteadyState>>,
    temp_nonadditive: Vec<Converged<SteadyState>>,
}

fn steady_runs(cfg: &Config) -> Steady {
    let solve = |ratio: f64, t_em: f64, mode: EmMode| {
        let p = cfg.params.with_alpha_over_epsilon(ratio).with_t_em(t_em);
        converged_steady_state(&p, cfg, mode).expect("steady state")
    };
    let sweep = |mode| {
        STEADY_T_EM.iter().map(|&t| STEADY_ALPHA_GRID.iter().map(|&a| solve(a, t, mode)).collect()).collect()
    };
    let temperature_grid = log_grid(300.0, 60000.0, 12);
    let temp = |mode| temperature_grid.iter().map(|&t| solve(TEMPERATURE_SWEEP_ALPHA, t, mode)).collect();
    Steady {
        alpha_additive: sweep(EmMode::Additive),
        alpha_nonadditive: sweep(EmMode::NonAdditive),
        temp_additive: temp(EmMode::Additive),
        temp_nonadditive: temp(EmMode::NonAdditive),
        temperature_grid,
    }
}

fn main() -> ExitCode {
    let cfg = Config::default();
    let p = cfg.params;
    let mut results: Vec<(u8, &str, Outcome)> = Vec::new();
    let mut convergence: Vec<f64> = Vec::new();
    let mut residuals: Vec<f64> = Vec::new();

    // 1
    let start = Instant::now();
    let add: Vec<_> = RATE_ALPHA_GRID
        .iter()
        .map(|&a| converged_emission_rate(&p.with_alpha_over_epsilon(a), &cfg, EmMode::Additive).expect("rate"))
        .collect();
    let elapsed = start.elapsed().as_secs_f64();
    let rates: Vec<f64> = add.iter().map(|c| c.scalar).collect();
    convergence.extend(add.iter().map(last_change));
    let n = bose_occupation(p.epsilon, p.t_em).expect("n(ε)");
    let expected = 1.0 + 2.0 * n;
    let dev = rates.iter().map(|r| (r - expected).abs() / expected).fold(0.0, f64::max);
    results.push((
        1,
        "additive rate flat in α",
        outcome(
            spread(&rates) < 1e-10 && dev < 1e-3 && elapsed < 1.0,
            format!("spread {:.2e}, |rate/Γ₀ − (1+2n)| {:.2e}, {elapsed:.2} s", spread(&rates), dev),
        ),
    ));

    // 2
    let start = Instant::now();
    let non: Vec<_> = RATE_ALPHA_GRID
        .iter()
        .map(|&a| converged_emission_rate(&p.with_alpha_over_epsilon(a), &cfg, EmMode::NonAdditive).expect("rate"))
        .collect();
    let weak = converged_emission_rate(&p.with_alpha_over_epsilon(1e-4), &cfg, EmMode::NonAdditive).expect("rate");
    let elapsed = start.elapsed().as_secs_f64();
    convergence.extend(non.iter().map(last_change));
    convergence.push(last_change(&weak));
    let rates: Vec<f64> = non.iter().map(|c| c.scalar).collect();
    let max_m = non.iter().map(|c| c.fock_dim).max().unwrap_or(0);
    results.push((
        2,
        "non-additive rate suppressed",
        outcome(
            strictly_decreasing(&rates) && (weak.scalar - 1.0).abs() < 0.02 && elapsed < 30.0,
            format!(
                "rate/Γ₀ {:.4} → {:.4}, α = 1e-4ε gives {:.6}, M ≤ {max_m}, {elapsed:.2} s",
                rates[0],
                rates[rates.len() - 1],
                weak.scalar
            ),
        ),
    ));

    let start = Instant::now();
    let steady = steady_runs(&cfg);
    let steady_time = start.elapsed().as_secs_f64();
    for c in steady
        .alpha_additive
        .iter()
        .chain(&steady.alpha_nonadditive)
        .flatten()
        .chain(&steady.temp_additive)
        .chain(&steady.temp_nonadditive)
    {
        convergence.push(last_change(c));
        residuals.push(c.value.residual);
    }

    // 3
    let mut ok = true;
    let (mut worst_spread, mut worst_dev) = (0.0f64, 0.0f64);
    for (t_em, row) in STEADY_T_EM.iter().zip(&steady.alpha_additive) {
        let pops: Vec<f64> = row.iter().map(|c| c.scalar).collect();
        let n = bose_occupation(p.epsilon, *t_em).expect("n");
        let target = n / (2.0 * n + 1.0);
        worst_spread = worst_spread.max(spread(&pops));
        worst_dev = pops.iter().map(|v| (v - target).abs()).fold(worst_dev, f64::max);
    }
    ok &= worst_spread < 1e-10 && worst_dev < 1e-8;
    let max_add = steady.temp_additive.iter().map(|c| c.scalar).fold(0.0, f64::max);
    ok &= max_add < 0.5;
    results.push((
        3,
        "additive steady state flat and below 1/2",
        outcome(ok, format!("spread {worst_spread:.2e}, |Δ| from n/(2n+1) {worst_dev:.2e}, max over T_EM {max_add:.4}")),
    ));

    // 4
    let inverted: Vec<f64> = steady
        .temperature_grid
        .iter()
        .zip(steady.temp_nonadditive.iter().zip(&steady.temp_additive))
        .filter(|(_, (n, a))| n.scalar > 0.5 && a.scalar < 0.5)
        .map(|(t, _)| *t)
        .collect();
    let top = steady.temp_nonadditive.last().map_or(f64::NAN, |c| c.scalar);
    results.push((
        4,
        "population inversion at α = 0.3ε",
        outcome(
            !inverted.is_empty(),
            format!(
                "inverted at {} of {} T_EM points from {:.0} K, ⟨σ†σ⟩ = {top:.4} at 60000 K",
                inverted.len(),
                steady.temperature_grid.len(),
                inverted.first().copied().unwrap_or(f64::NAN)
            ),
        ),
    ));

    // 5
    let mut ok = true;
    let mut detail = Vec::new();
    for (t_em, row) in STEADY_T_EM.iter().zip(&steady.alpha_nonadditive) {
        let pops: Vec<f64> = row.iter().map(|c| c.scalar).collect();
        ok &= strictly_increasing(&pops);
        detail.push(format!("{t_em} K: {:.4} → {:.4}", pops[0], pops[pops.len() - 1]));
    }
    results.push((
        5,
        "non-additive steady state increasing in α",
        outcome(ok, format!("{}; steady sweeps {steady_time:.1} s", detail.join(", "))),
    ));

    // 6
    let start = Instant::now();
    let cmps = ibm_validate(&cfg, &IBM_ALPHA_GRID, &uniform_grid(1.0, 401), 1).expect("exact-solution comparison");
    let elapsed = start.elapsed().as_secs_f64();
    let dev = cmps.iter().map(|c| c.max_deviation()).fold(0.0, f64::max);
    let drift = cmps.iter().map(|c| c.population_drift).fold(0.0, f64::max);
    results.push((
        6,
        "exact-solution coherence with Γ₀ = 0",
        outcome(
            dev < IBM_TOLERANCE && drift < IBM_POPULATION_TOLERANCE && elapsed < 10.0,
            format!("max |Δσ| {dev:.3e}, population drift {drift:.2e}, α/ε ∈ {IBM_ALPHA_GRID:?}, {elapsed:.2} s"),
        ),
    ));

    // 7
    let ds: Vec<f64> = (0..=6).map(|k| 0.5 * k as f64).collect();
    let frozen: Vec<f64> =
        ds.iter().map(|&d| golden_rule_rate(&p, d, &cfg.conventions, true).expect("golden rule").over_gamma0).collect();
    let exact: Vec<f64> =
        ds.iter().map(|&d| golden_rule_rate(&p, d, &cfg.conventions, false).expect("golden rule").over_gamma0).collect();
    results.push((
        7,
        "golden-rule collapse with 𝒥 frozen at ε",
        outcome(
            spread(&frozen) < 8.0 * f64::EPSILON && strictly_decreasing(&exact[1..]),
            format!("frozen spread {:.2e}, true 𝒥 {:.4} → {:.4} over d = 0.5 … 3", spread(&frozen), exact[1], exact[6]),
        ),
    ));

    // 8
    let mut checks: Vec<CheckResult> = Vec::new();
    for mode in [EmMode::Additive, EmMode::NonAdditive] {
        checks.extend(check_trace_preservation(&cfg, mode, 1000, 7).expect("trace check"));
        for t_em in [6000.0, 60000.0] {
            checks.push(check_detailed_balance(&cfg, mode, t_em).expect("detailed balance"));
        }
    }
    checks.push(check_fc_cross_method());
    let worst_conv = convergence.iter().copied().fold(0.0, f64::max);
    let worst_res = residuals.iter().copied().fold(0.0, f64::max);
    checks.push(CheckResult::below("truncation convergence", worst_conv, 5e-3, ""));
    checks.push(CheckResult::below("steady-state residual", worst_res, 1e-10, ""));
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    let worst = |prefix: &str| {
        checks.iter().filter(|c| c.name.starts_with(prefix)).map(|c| c.value).fold(0.0, f64::max)
    };
    results.push((
        8,
        "structural invariants",
        outcome(
            failed.is_empty(),
            format!(
                "trace {:.1e}, detailed balance {:.1e}, residual {worst_res:.1e} cm⁻¹ over {} solves, truncation {worst_conv:.1e} over {} scalars, FC {:.1e}{}",
                worst("trace"),
                worst("detailed"),
                residuals.len(),
                convergence.len(),
                worst("FC"),
                if failed.is_empty() { String::new() } else { format!("; failed: {}", failed.join(", ")) }
            ),
        ),
    ));

    println!();
    for (id, title, o) in &results {
        println!("criterion {id} ({title}): {} | {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    let failures = results.iter().filter(|(_, _, o)| !o.passed).count();
    println!("acceptance: {} of {} criteria passed", results.len() - failures, results.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
