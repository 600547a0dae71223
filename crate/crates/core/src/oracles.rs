//! Independent references: Franck–Condon factors, the golden-rule emission
//! rate and the exact independent-boson-model (Γ₀ = 0) coherence.

use std::f64::consts::PI;

use log::warn;
use nalgebra::DMatrix;

use crate::cc::map_cc;
use crate::dynamics::{propagate, InitialState, PropagationOptions, TimeSeries};
use crate::error::{Error, Result};
use crate::liouvillian::{build, EmMode};
use crate::operators::thermal_populations;
use crate::params::{units, Conventions, GoldenRuleIndexing, ModelParams};
use crate::quadrature::{integrate, QuadOptions};
use crate::spectral::{bose_occupation, em_sd, phonon_sd};
use crate::C64;

/// ln n! by direct summation; exact enough for n in the hundreds.
fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Generalized Laguerre polynomial L_n^{(k)}(x) by upward recurrence.
fn laguerre(n: usize, k: usize, x: f64) -> f64 {
    let k = k as f64;
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + k - x;
    for j in 1..n {
        let j = j as f64;
        let next = ((2.0 * j + 1.0 + k - x) * cur - (j + k) * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// ⟨m|D(d)|n⟩ for real d from the associated-Laguerre closed form.
pub fn displaced_overlap(d: f64, m: usize, n: usize) -> f64 {
    if d == 0.0 {
        return if m == n { 1.0 } else { 0.0 };
    }
    let x = d * d;
    let (lo, hi, sign) = if m >= n { (n, m, 1.0) } else { (m, n, if (n - m).is_multiple_of(2) { 1.0 } else { -1.0 }) };
    let k = hi - lo;
    let lag = laguerre(lo, k, x);
    if lag == 0.0 {
        return 0.0;
    }
    let log_mag = 0.5 * (ln_factorial(lo) - ln_factorial(hi)) + k as f64 * d.abs().ln() - 0.5 * x + lag.abs().ln();
    let d_sign = if d < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
    sign * d_sign * lag.signum() * log_mag.exp()
}

/// Squared overlaps |⟨m̃|n⟩|² between displaced and undisplaced Fock states.
#[derive(Debug, Clone)]
pub struct FcTable {
    pub displacement: f64,
    /// Entry (m, n) is |⟨m̃|n⟩|²; rows index displaced states.
    pub factors: DMatrix<f64>,
}

impl FcTable {
    /// Closed-form table with `rows` displaced and `cols` undisplaced states.
    pub fn closed_form(d: f64, rows: usize, cols: usize) -> Self {
        let factors = DMatrix::from_fn(rows, cols, |m, n| displaced_overlap(d, m, n).powi(2));
        Self { displacement: d, factors }
    }

    /// Table from the matrix exponential of d(b† − b) on a padded Fock space,
    /// keeping the leading M×M block.
    pub fn padded_exponential(d: f64, fock_dim: usize) -> Self {
        let pad = 2 * fock_dim + (4.0 * d * d).ceil() as usize + 20;
        let mut gen = DMatrix::<f64>::zeros(pad, pad);
        for n in 1..pad {
            let s = (n as f64).sqrt();
            gen[(n, n - 1)] = d * s;
            gen[(n - 1, n)] = -d * s;
        }
        let disp = gen.exp();
        let factors = DMatrix::from_fn(fock_dim, fock_dim, |m, n| disp[(m, n)].powi(2));
        Self { displacement: d, factors }
    }

    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.factors[(m, n)]
    }
}

/// Fock cut-off below which a displaced state is not contained.
pub fn containment_dim(d: f64) -> usize {
    (d * d + 6.0 * d.abs() + 4.0).ceil() as usize
}

/// M×M Franck–Condon table, computed in closed form and cross-checked
/// against the padded matrix exponential. Returns the table together with
/// the largest elementwise difference between the two methods.
pub fn fc_factors(d: f64, fock_dim: usize) -> (FcTable, f64) {
    if fock_dim < containment_dim(d) {
        warn!("M = {fock_dim} is below the containment heuristic {} for d = {d}", containment_dim(d));
    }
    let closed = FcTable::closed_form(d, fock_dim, fock_dim);
    let padded = FcTable::padded_exponential(d, fock_dim);
    let diff = (&closed.factors - &padded.factors).amax();
    (closed, diff)
}

/// Golden-rule emission rate and its ingredients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenRule {
    pub displacement: f64,
    pub rate_cm: f64,
    pub rate_per_ps: f64,
    pub over_gamma0: f64,
}

/// Thermal populations below this weight are left out of the golden-rule sum.
const GOLDEN_RULE_WEIGHT_FLOOR: f64 = 1e-18;

/// Γ = 2π Σ p 𝒥(ε + (m − n)Ω) |⟨m̃|n⟩|² for displacement `d`.
///
/// With [`GoldenRuleIndexing::ExcitedThermal`] the weights p_m are thermal
/// populations of the displaced excited-manifold states m̃ at T_R; with
/// [`GoldenRuleIndexing::AsPrinted`] they attach to the undisplaced index n.
/// When `freeze_at_epsilon` is set every gap is replaced by ε, which reduces
/// the sum to Γ₀ by completeness of the overlaps. The sums run over enough
/// states that every retained row of overlaps is complete to rounding.
pub fn golden_rule_rate(
    p: &ModelParams,
    d: f64,
    conventions: &Conventions,
    freeze_at_epsilon: bool,
) -> Result<GoldenRule> {
    p.validate()?;
    let omega = p.nu0;
    let mut weights = thermal_populations(omega, p.t_residual, 400);
    let keep = weights.iter().position(|&w| w < GOLDEN_RULE_WEIGHT_FLOOR).unwrap_or(weights.len()).max(1);
    weights.truncate(keep);
    let other = ((keep as f64).sqrt() + d.abs() + 10.0).powi(2).ceil() as usize + 10;
    let table = FcTable::closed_form(d, keep.max(other), keep.max(other));
    let j = |gap: f64| em_sd(if freeze_at_epsilon { p.epsilon } else { gap }, p, conventions.em_shape);

    let mut total = 0.0;
    for (thermal_index, &w) in weights.iter().enumerate() {
        let mut row = 0.0;
        for other_index in 0..other {
            let (m, n) = match conventions.golden_rule {
                GoldenRuleIndexing::ExcitedThermal => (thermal_index, other_index),
                GoldenRuleIndexing::AsPrinted => (other_index, thermal_index),
            };
            let gap = p.epsilon + (m as f64 - n as f64) * omega;
            row += j(gap) * table.get(m, n);
        }
        total += w * row;
    }
    let rate_cm = 2.0 * PI * total;
    let g0 = p.gamma0_cm();
    Ok(GoldenRule {
        displacement: d,
        rate_cm,
        rate_per_ps: units::cm_to_rad_per_ps(rate_cm),
        over_gamma0: if g0 > 0.0 { rate_cm / g0 } else { f64::NAN },
    })
}

/// Golden-rule rate at the displacement implied by the model parameters.
pub fn golden_rule_for_params(p: &ModelParams, conventions: &Conventions) -> Result<GoldenRule> {
    golden_rule_rate(p, map_cc(p).displacement(), conventions, false)
}

/// Exact Γ₀ = 0 dynamics of the emitter coherence.
#[derive(Debug, Clone, PartialEq)]
pub struct IbmSolution {
    pub times_ps: Vec<f64>,
    /// Decoherence function Γ(t) ≥ 0.
    pub decoherence: Vec<f64>,
    /// Phase Φ(t) = ∫ J(ω)/ω² sin ωt dω.
    pub phase: Vec<f64>,
    pub rho_eg: Vec<C64>,
    pub rho_gg: f64,
    pub rho_ee: f64,
}

impl IbmSolution {
    /// ⟨σ_x⟩ = ρ_eg + ρ_ge.
    pub fn sigma_x(&self) -> Vec<f64> {
        self.rho_eg.iter().map(|z| 2.0 * z.re).collect()
    }

    /// ⟨σ_y⟩ = i(ρ_eg − ρ_ge).
    pub fn sigma_y(&self) -> Vec<f64> {
        self.rho_eg.iter().map(|z| -2.0 * z.im).collect()
    }
}

fn ibm_quad_options(t_int: f64, cut: f64) -> QuadOptions {
    // One initial panel per half oscillation of cos ωt.
    let panels = ((cut * t_int / PI).ceil() as usize).max(64);
    QuadOptions { rel_tol: 1e-9, abs_tol: 1e-15, max_intervals: 4 * panels + 20_000, initial_panels: panels }
}

/// Upper integration limit with the 1/ω⁵ tail below 1e-12 of `scale`.
fn ibm_cutoff(p: &ModelParams, scale: f64) -> f64 {
    // Beyond a few ν₀, J(ω)/ω² ≲ αν₀²γ/ω⁵ and (1 − cos)·coth ≤ 2·coth(ω/2kT).
    let c = p.alpha * p.nu0 * p.nu0 * p.gamma;
    let mut cut = 20.0 * p.nu0.max(p.gamma);
    loop {
        let coth = 1.0 + 2.0 * bose_occupation(cut, p.t_residual).unwrap_or(0.0);
        let tail = 2.0 * coth * c / (4.0 * cut.powi(4));
        if tail <= 1e-12 * scale.max(1e-300) || cut > 1e9 {
            return cut;
        }
        cut *= 2.0;
    }
}

/// Γ(t) = ∫₀^∞ J(ω)/ω² coth(ω/2k_BT)(1 − cos ωt) dω by adaptive quadrature,
/// with 1 − cos written as 2 sin²(ωt/2) so small ωt loses no digits.
/// `t_int` is internal time. The cost grows linearly with t.
pub fn decoherence_function_quadrature(p: &ModelParams, t_int: f64) -> Result<f64> {
    if t_int == 0.0 {
        return Ok(0.0);
    }
    let kt = units::thermal_energy(p.t_residual);
    let integrand = |w: f64| {
        if w <= 0.0 {
            return 0.0;
        }
        let coth = 1.0 / (w / (2.0 * kt)).tanh();
        let s = (0.5 * w * t_int).sin();
        (phonon_sd(w, p) / w) * coth * 2.0 * s * s / w
    };
    // The small-t quadratic estimate sets the tail target.
    let head = 20.0 * p.nu0.max(p.gamma);
    let rough = integrate(integrand, 0.0, head, &ibm_quad_options(t_int, head))?.value;
    let cut = ibm_cutoff(p, rough);
    Ok(integrate(integrand, 0.0, cut, &ibm_quad_options(t_int, cut))?.value)
}

/// Φ(t) = ∫₀^∞ J(ω)/ω² sin ωt dω by adaptive quadrature.
pub fn phase_function_quadrature(p: &ModelParams, t_int: f64) -> Result<f64> {
    if t_int == 0.0 {
        return Ok(0.0);
    }
    let integrand = |w: f64| if w <= 0.0 { 0.0 } else { (phonon_sd(w, p) / w) * (w * t_int).sin() / w };
    let head = 20.0 * p.nu0.max(p.gamma);
    let rough = integrate(integrand, 0.0, head, &ibm_quad_options(t_int, head))?.value;
    let cut = ibm_cutoff(p, rough.abs());
    Ok(integrate(integrand, 0.0, cut, &ibm_quad_options(t_int, cut))?.value)
}

/// Poles of J(ω) in the upper half plane, ω = ±Ω₁ + iγ/2, with the
/// residue of J at each.
fn phonon_poles(p: &ModelParams) -> [(C64, C64); 2] {
    let half = 0.5 * p.gamma;
    // Ω₁ may be imaginary for an overdamped mode; the complex root covers it.
    let omega1 = C64::new(p.nu0 * p.nu0 - half * half, 0.0).sqrt();
    let i = C64::new(0.0, 1.0);
    [omega1 + i * half, -omega1 + i * half].map(|z| {
        // P(ω) = (ω² − ν₀²)² + γ²ω², P′(ω) = 4ω(ω² − ν₀²) + 2γ²ω.
        let dp = z * 4.0 * (z * z - p.nu0 * p.nu0) + z * 2.0 * p.gamma * p.gamma;
        (z, z * (p.alpha * p.nu0 * p.nu0 * p.gamma) / dp)
    })
}

/// Γ(t) by contour integration: the integrand is even in ω, so Γ is half
/// the principal-value integral over the real line, closed in the upper
/// half plane. Contributions: the ω = 0 pole (linear growth πak_BTt with
/// a = αγ/ν₀²), the two poles of J, and the Matsubara poles of coth at
/// iν_k, ν_k = 2πk k_BT.
pub fn decoherence_function(p: &ModelParams, t_int: f64) -> Result<f64> {
    if t_int == 0.0 {
        return Ok(0.0);
    }
    if p.alpha == 0.0 {
        return Ok(0.0);
    }
    let kt = units::thermal_energy(p.t_residual);
    let a = p.alpha * p.gamma / (p.nu0 * p.nu0);
    let i = C64::new(0.0, 1.0);
    let mut total = PI * a * kt * t_int;
    for (z, res_j) in phonon_poles(p) {
        let w = z / (2.0 * kt);
        let coth = w.cosh() / w.sinh();
        let residue = res_j * coth / (z * z) * (C64::new(1.0, 0.0) - (i * z * t_int).exp());
        total += (i * PI * residue).re;
    }
    let c = p.alpha * p.nu0 * p.nu0 * p.gamma;
    let nu1 = 2.0 * PI * kt;
    let mut k = 1usize;
    loop {
        let nu = nu1 * k as f64;
        let q = (nu * nu + p.nu0 * p.nu0).powi(2) - p.gamma * p.gamma * nu * nu;
        let term = nu1 * c * (-(-nu * t_int).exp_m1()) / (nu * q);
        total += term;
        if term.abs() <= 1e-17 * total.abs() || k > 1_000_000 {
            break;
        }
        k += 1;
    }
    Ok(total)
}

/// Φ(t) by contour integration: πa/2 from the ω = 0 pole plus the poles
/// of J; decays to πa/2 at long times.
pub fn phase_function(p: &ModelParams, t_int: f64) -> Result<f64> {
    if t_int == 0.0 || p.alpha == 0.0 {
        return Ok(0.0);
    }
    let a = p.alpha * p.gamma / (p.nu0 * p.nu0);
    let i = C64::new(0.0, 1.0);
    let mut total = 0.5 * PI * a;
    for (z, res_j) in phonon_poles(p) {
        let residue = res_j / (z * z) * (i * z * t_int).exp();
        total += (i * PI * residue).im;
    }
    Ok(total)
}

/// ρ_eg(t) = ρ_eg(0) e^{−iεt} e^{−Γ(t)} e^{−iΦ(t)} with static populations.
///
/// The phase Φ(t) arises from the polaron displacement of the initial
/// thermal bath; it vanishes for a bath prepared in the displaced state.
pub fn ibm_exact(
    p: &ModelParams,
    rho_eg0: C64,
    populations: (f64, f64),
    times_ps: &[f64],
) -> Result<IbmSolution> {
    let mut sol = IbmSolution {
        times_ps: times_ps.to_vec(),
        decoherence: Vec::with_capacity(times_ps.len()),
        phase: Vec::with_capacity(times_ps.len()),
        rho_eg: Vec::with_capacity(times_ps.len()),
        rho_gg: populations.0,
        rho_ee: populations.1,
    };
    for &t in times_ps {
        let t_int = units::ps_to_internal_time(t);
        let gamma = decoherence_function(p, t_int)?;
        let phi = phase_function(p, t_int)?;
        let z = rho_eg0 * C64::from_polar((-gamma).exp(), -(p.epsilon * t_int + phi));
        sol.decoherence.push(gamma);
        sol.phase.push(phi);
        sol.rho_eg.push(z);
    }
    Ok(sol)
}

/// Comparison of the Γ₀ = 0 collective-coordinate dynamics with [`ibm_exact`].
#[derive(Debug, Clone)]
pub struct IbmComparison {
    pub fock_dim: usize,
    pub max_dev_sigma_x: f64,
    pub max_dev_sigma_y: f64,
    /// max |ρ_ee(t) − ρ_ee(0)| along the master-equation trajectory.
    pub population_drift: f64,
    pub ccme: TimeSeries,
    pub exact: IbmSolution,
}

impl IbmComparison {
    pub fn max_deviation(&self) -> f64 {
        self.max_dev_sigma_x.max(self.max_dev_sigma_y)
    }
}

/// Runs the collective-coordinate master equation with Γ₀ = 0 from the
/// |+⟩ state and compares ⟨σ_x⟩, ⟨σ_y⟩ with the exact solution.
pub fn validate_ccme_vs_ibm(
    p: &ModelParams,
    conventions: &Conventions,
    times_ps: &[f64],
) -> Result<IbmComparison> {
    let mut p = *p;
    p.gamma0_per_ps = 0.0;
    let l = build(EmMode::NonAdditive, &p, conventions)?;
    let rho0 = InitialState::PlusCoherence.build(&p, &l.system.space)?;
    let opts = PropagationOptions { monitor_positivity: false, ..Default::default() };
    let ccme = propagate(&l, &rho0, times_ps, &opts)?;
    let exact = ibm_exact(&p, C64::new(0.5, 0.0), (0.5, 0.5), times_ps)?;
    let dev = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let max_dev_sigma_x = dev(&ccme.sigma_x, &exact.sigma_x());
    let max_dev_sigma_y = dev(&ccme.sigma_y, &exact.sigma_y());
    let population_drift = ccme.excited_population.iter().map(|v| (v - 0.5).abs()).fold(0.0, f64::max);
    if !max_dev_sigma_x.is_finite() || !max_dev_sigma_y.is_finite() {
        return Err(Error::Validation("non-finite deviation in IBM comparison".into()));
    }
    Ok(IbmComparison { fock_dim: p.fock_dim, max_dev_sigma_x, max_dev_sigma_y, population_drift, ccme, exact })
}
