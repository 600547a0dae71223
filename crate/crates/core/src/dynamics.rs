//! Time evolution, steady states, emission rates and truncation convergence.
//!
//! Everything works on the real sector generators from [`crate::sector`]:
//! the populations sector carries the trace and the steady state, the
//! coherences sector carries ⟨σ_x⟩ and ⟨σ_y⟩.

use log::{debug, warn};
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::liouvillian::Liouvillian;
use crate::operators::{
    displacement, max_abs, thermal_fock_state, DenseOperator, Electronic, HilbertSpace,
};
use crate::params::{units, ConvergenceSettings, ModelParams};
use crate::sector::{split_sectors, RealGenerator, Sector};
use crate::C64;

/// Initial density matrices used by the experiments.
#[derive(Debug, Clone)]
pub enum InitialState {
    /// |e⟩⟨e| ⊗ ρ_th(Ω, T_R).
    ExcitedThermal,
    /// |e⟩⟨e| ⊗ e^{−X} ρ_th e^{X}: the excited manifold in its own equilibrium.
    ExcitedDisplacedThermal,
    /// |+⟩⟨+| ⊗ ρ_th(Ω, T_R) with |+⟩ = (|g⟩ + |e⟩)/√2.
    PlusCoherence,
    Custom(DenseOperator),
}

impl InitialState {
    pub fn build(&self, p: &ModelParams, space: &HilbertSpace) -> Result<DenseOperator> {
        let m = space.fock_dim;
        let thermal = thermal_fock_state(p.nu0, p.t_residual, m)?;
        let emitter = |g: f64, e: f64, coh: f64| {
            DenseOperator::from_row_slice(
                2,
                2,
                &[C64::new(g, 0.0), C64::new(coh, 0.0), C64::new(coh, 0.0), C64::new(e, 0.0)],
            )
        };
        let rho = match self {
            InitialState::ExcitedThermal => emitter(0.0, 1.0, 0.0).kronecker(&thermal),
            InitialState::ExcitedDisplacedThermal => {
                emitter(0.0, 1.0, 0.0).kronecker(&displaced_thermal(p, m)?)
            }
            InitialState::PlusCoherence => emitter(0.5, 0.5, 0.5).kronecker(&thermal),
            InitialState::Custom(rho) => {
                if rho.nrows() != space.dim() || rho.ncols() != space.dim() {
                    return Err(Error::DimensionMismatch { expected: space.dim(), found: rho.nrows() });
                }
                rho.clone()
            }
        };
        Ok(rho)
    }
}

/// e^{−X} ρ_th e^{X} with X = (η/Ω)(b† − b), the thermal state of the
/// displaced excited-manifold oscillator.
pub fn displaced_thermal(p: &ModelParams, fock_dim: usize) -> Result<DenseOperator> {
    let d = crate::cc::map_cc(p).displacement();
    let thermal = thermal_fock_state(p.nu0, p.t_residual, fock_dim)?;
    let shift = displacement(-d, fock_dim);
    Ok(&shift * thermal * shift.adjoint())
}

/// Observables sampled along a trajectory. Times are in ps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimeSeries {
    pub times_ps: Vec<f64>,
    pub excited_population: Vec<f64>,
    pub sigma_x: Vec<f64>,
    pub sigma_y: Vec<f64>,
    pub trace: Vec<f64>,
    /// Smallest eigenvalue of ρ(t); NaN when positivity was not monitored.
    pub min_eigenvalue: Vec<f64>,
}

impl TimeSeries {
    fn push(&mut self, t: f64, rho: &DenseOperator, space: &HilbertSpace, monitor: bool) {
        let m = space.fock_dim;
        let (mut pe, mut tr, mut coh) = (0.0, 0.0, C64::new(0.0, 0.0));
        for n in 0..m {
            let g = space.index(Electronic::Ground, n);
            let e = space.index(Electronic::Excited, n);
            pe += rho[(e, e)].re;
            tr += rho[(e, e)].re + rho[(g, g)].re;
            coh += rho[(g, e)];
        }
        self.times_ps.push(t);
        self.excited_population.push(pe);
        self.trace.push(tr);
        // ⟨σ_x⟩ = 2 Re ρ_ge, ⟨σ_y⟩ = 2 Im ρ_ge with σ = |g⟩⟨e|.
        self.sigma_x.push(2.0 * coh.re);
        self.sigma_y.push(2.0 * coh.im);
        let min_eig = if monitor {
            rho.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
        } else {
            f64::NAN
        };
        self.min_eigenvalue.push(min_eig);
    }

    pub fn len(&self) -> usize {
        self.times_ps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times_ps.is_empty()
    }

    /// Most negative eigenvalue encountered, or zero.
    pub fn worst_positivity_violation(&self) -> f64 {
        self.min_eigenvalue.iter().filter(|v| v.is_finite()).fold(0.0f64, |a, &v| a.min(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    /// Exponential on uniform grids, RK4 otherwise.
    Auto,
    Exponential,
    RungeKutta4,
}

#[derive(Debug, Clone, Copy)]
pub struct PropagationOptions {
    pub integrator: Integrator,
    pub monitor_positivity: bool,
    /// Tolerated |Tr ρ − 1| before the step is halved.
    pub trace_tol: f64,
    pub max_halvings: u32,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self { integrator: Integrator::Auto, monitor_positivity: true, trace_tol: 1e-8, max_halvings: 6 }
    }
}

/// Integrates dρ/dt = ℒ[ρ] and samples observables at every grid time.
pub fn propagate(
    l: &Liouvillian,
    rho0: &DenseOperator,
    times_ps: &[f64],
    opts: &PropagationOptions,
) -> Result<TimeSeries> {
    if times_ps.is_empty() || times_ps.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::TimeGrid);
    }
    let space = l.system.space;
    let (pop, coh) = split_sectors(rho0, &space);
    let mut sectors = Vec::new();
    for (part, sector) in [(pop, Sector::Populations), (coh, Sector::Coherences)] {
        if max_abs(&part) > 0.0 {
            let gen = RealGenerator::build(l, sector);
            let v0 = gen.coords.encode(&part)?;
            sectors.push((gen, v0));
        }
    }
    let uniform = is_uniform(times_ps);
    let integrator = match opts.integrator {
        Integrator::Auto if uniform => Integrator::Exponential,
        Integrator::Auto => Integrator::RungeKutta4,
        Integrator::Exponential if !uniform => {
            warn!("exponential integrator needs a uniform grid; falling back to RK4");
            Integrator::RungeKutta4
        }
        other => other,
    };
    let trace0: f64 = (0..space.dim()).map(|i| rho0[(i, i)].re).sum();

    let mut drift = 0.0;
    for halvings in 0..=opts.max_halvings {
        let substeps = 1usize << halvings;
        let trajectories: Vec<Vec<DVector<f64>>> = sectors
            .iter()
            .map(|(gen, v0)| match integrator {
                Integrator::Exponential => exponential_trajectory(gen, v0, times_ps, substeps),
                _ => rk4_trajectory(gen, v0, times_ps, substeps),
            })
            .collect();
        let mut series = TimeSeries::default();
        let mut stable = true;
        drift = 0.0;
        for (step, &t) in times_ps.iter().enumerate() {
            let mut rho = DenseOperator::zeros(space.dim(), space.dim());
            for ((gen, _), traj) in sectors.iter().zip(&trajectories) {
                gen.coords.decode_into(&traj[step], &mut rho);
            }
            series.push(t, &rho, &space, opts.monitor_positivity);
            let d = (series.trace[step] - trace0).abs();
            let size = rho.norm();
            if !d.is_finite() || !size.is_finite() || size > 1.5 * trace0.abs().max(1.0) {
                stable = false;
                drift = f64::INFINITY;
                break;
            }
            drift = f64::max(drift, d);
        }
        if stable && drift <= opts.trace_tol {
            let worst = series.worst_positivity_violation();
            if worst < -1e-8 {
                warn!("density matrix lost positivity: min eigenvalue {worst:.3e}");
            }
            return Ok(series);
        }
        debug!("trace drift {drift:.3e} with {substeps} substeps; halving");
    }
    Err(Error::Propagation { drift, halvings: opts.max_halvings })
}

fn is_uniform(t: &[f64]) -> bool {
    if t.len() < 3 {
        return true;
    }
    let h = t[1] - t[0];
    t.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(t[t.len() - 1].abs()))
}

/// Index sets of the diagonal blocks of `m` (connected components of its
/// sparsity graph), each sorted.
fn diagonal_blocks(m: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for c in 0..n {
        for r in 0..n {
            if r != c && m[(r, c)] != 0.0 {
                let (a, b) = (root(&mut parent, r), root(&mut parent, c));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[slot[r]].push(i);
    }
    blocks
}

fn exponential_trajectory(
    gen: &RealGenerator,
    v0: &DVector<f64>,
    times_ps: &[f64],
    substeps: usize,
) -> Vec<DVector<f64>> {
    let mut out = vec![v0.clone()];
    if times_ps.len() < 2 {
        return out;
    }
    let h = units::ps_to_internal_time(times_ps[1] - times_ps[0]) / substeps as f64;
    // Exponentiating independent blocks separately is exact and cheaper.
    let steps: Vec<(Vec<usize>, DMatrix<f64>)> = diagonal_blocks(&gen.matrix)
        .into_iter()
        .filter(|b| b.iter().any(|&i| v0[i] != 0.0))
        .map(|b| {
            let sub = gen.matrix.select_rows(b.iter()).select_columns(b.iter());
            let step = (sub * h).exp();
            (b, step)
        })
        .collect();
    let mut v = v0.clone();
    for _ in 1..times_ps.len() {
        for (block, step) in &steps {
            let mut x = DVector::from_iterator(block.len(), block.iter().map(|&i| v[i]));
            for _ in 0..substeps {
                x = step * &x;
            }
            for (k, &i) in block.iter().enumerate() {
                v[i] = x[k];
            }
        }
        out.push(v.clone());
    }
    out
}

const RK4_STEP_NORM: f64 = 0.02;

fn rk4_trajectory(
    gen: &RealGenerator,
    v0: &DVector<f64>,
    times_ps: &[f64],
    substeps: usize,
) -> Vec<DVector<f64>> {
    // Row-sum norm bounds the spectral radius; h·‖G‖ ≤ 0.02 keeps the local
    // error of the fast optical phase near 1e-11 per step.
    let norm = gen.matrix.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let g = &gen.matrix;
    let mut out = vec![v0.clone()];
    let mut v = v0.clone();
    for w in times_ps.windows(2) {
        let dt = units::ps_to_internal_time(w[1] - w[0]);
        let n = ((dt * norm / RK4_STEP_NORM).ceil() as usize).max(1) * substeps;
        let h = dt / n as f64;
        for _ in 0..n {
            let k1 = g * &v;
            let k2 = g * (&v + &k1 * (0.5 * h));
            let k3 = g * (&v + &k2 * (0.5 * h));
            let k4 = g * (&v + &k3 * h);
            v += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
        out.push(v.clone());
    }
    out
}

/// A normalized steady state together with its diagnostics.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho: DenseOperator,
    /// max |ℒ[ρ_ss]| in cm⁻¹.
    pub residual: f64,
    pub excited_population: f64,
    pub fock_dim: usize,
}

impl SteadyState {
    fn finish(l: &Liouvillian, rho: DenseOperator) -> Result<Self> {
        let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
        let tr: f64 = (0..rho.nrows()).map(|i| rho[(i, i)].re).sum();
        let rho = rho / C64::new(tr, 0.0);
        let residual = max_abs(&l.apply(&rho));
        let space = l.system.space;
        let excited_population =
            (0..space.fock_dim).map(|n| rho[(space.index(Electronic::Excited, n), space.index(Electronic::Excited, n))].re).sum();
        Ok(Self { rho, residual, excited_population, fock_dim: space.fock_dim })
    }
}

/// Residual above which a steady-state solve is reported as failed.
pub const STEADY_STATE_HARD_TOL: f64 = 1e-6;

/// Kernel of ℒ restricted to the populations sector, normalized to unit trace.
///
/// One diagonal row of the generator is replaced by the trace functional and
/// the bordered system is solved by LU with one step of iterative refinement.
/// Uniqueness is checked through the smallest-magnitude eigenvalue of the
/// bordered matrix, estimated by inverse iteration; when it is suspiciously
/// small the two smallest singular values of the generator are computed and
/// reported.
pub fn steady_state(l: &Liouvillian) -> Result<SteadyState> {
    let gen = RealGenerator::build(l, Sector::Populations);
    let n = gen.len();
    let mut bordered = gen.matrix.clone();
    let row = gen.coords.diagonal_coordinate(0).expect("ground state lies in the populations sector");
    bordered.set_row(row, &gen.coords.trace_functional().transpose());
    let mut rhs = DVector::zeros(n);
    rhs[row] = 1.0;

    let scale = gen.matrix.amax();
    let threshold = f64::max(1e-6 * l.params.gamma0_cm(), 1e-10 * scale);
    let lu = bordered.clone().lu();
    let Some(mut x) = lu.solve(&rhs) else {
        return Err(degenerate(&gen.matrix));
    };
    let correction = lu.solve(&(&rhs - &bordered * &x)).unwrap_or_else(|| DVector::zeros(n));
    x += correction;

    let smallest = smallest_eigenvalue_estimate(&lu, n);
    debug!("bordered steady-state matrix: |λ_min| ≈ {smallest:.3e}, threshold {threshold:.3e}");
    if !(smallest > threshold) || x.iter().any(|v| !v.is_finite()) {
        return Err(degenerate(&gen.matrix));
    }
    let ss = SteadyState::finish(l, gen.coords.decode(&x))?;
    if ss.residual > STEADY_STATE_HARD_TOL {
        return Err(Error::SteadyStateResidual { residual: ss.residual, tolerance: STEADY_STATE_HARD_TOL });
    }
    Ok(ss)
}

/// |λ|_min of the bordered matrix via inverse power iteration.
fn smallest_eigenvalue_estimate(lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>, n: usize) -> f64 {
    let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.37 * ((i * 7919) % 101) as f64 / 101.0);
    v /= v.norm();
    let mut growth = 0.0;
    for _ in 0..12 {
        let Some(w) = lu.solve(&v) else { return 0.0 };
        growth = w.norm();
        if !growth.is_finite() || growth == 0.0 {
            return 0.0;
        }
        v = w / growth;
    }
    1.0 / growth
}

fn degenerate(matrix: &DMatrix<f64>) -> Error {
    let mut sv: Vec<f64> = matrix.clone().singular_values().iter().copied().collect();
    sv.sort_by(f64::total_cmp);
    Error::DegenerateSteadyState { sigma_min: sv[0], sigma_next: sv.get(1).copied().unwrap_or(f64::NAN) }
}

/// Steady state from the right-singular vector of the smallest singular value
/// of the populations-sector generator. Slower than [`steady_state`]; used as
/// an independent check at small truncations.
pub fn steady_state_svd(l: &Liouvillian) -> Result<SteadyState> {
    let gen = RealGenerator::build(l, Sector::Populations);
    let svd = gen.matrix.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let (s0, s1) = (svd.singular_values[order[0]], svd.singular_values[order[1]]);
    let gap_floor = 1e-6 * l.params.gamma0_cm();
    if !(s1 > gap_floor) || s1 <= 1e3 * s0 {
        return Err(Error::DegenerateSteadyState { sigma_min: s0, sigma_next: s1 });
    }
    let x = v_t.row(order[0]).transpose();
    SteadyState::finish(l, gen.coords.decode(&x))
}

/// Emission rate from the excited manifold in its own equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionRate {
    pub rate_cm: f64,
    pub rate_per_ps: f64,
    /// Rate in units of Γ₀ (NaN when Γ₀ = 0).
    pub over_gamma0: f64,
}

/// Γ_{e→g} = Σ_n ⟨g,n| ℒ[ρ_X] |g,n⟩ with ρ_X = |e⟩⟨e| ⊗ e^{−X}ρ_th e^{X}.
pub fn emission_rate(l: &Liouvillian) -> Result<EmissionRate> {
    let space = l.system.space;
    let rho = InitialState::ExcitedDisplacedThermal.build(&l.params, &space)?;
    let out = l.apply(&rho);
    let rate_cm: f64 = (0..space.fock_dim)
        .map(|n| {
            let g = space.index(Electronic::Ground, n);
            out[(g, g)].re
        })
        .sum();
    let g0 = l.params.gamma0_cm();
    Ok(EmissionRate {
        rate_cm,
        rate_per_ps: units::cm_to_rad_per_ps(rate_cm),
        over_gamma0: if g0 > 0.0 { rate_cm / g0 } else { f64::NAN },
    })
}

/// Exponential fit of a decaying population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub rate_per_ps: f64,
    pub window_ps: (f64, f64),
    /// True when the default window was moved later to reach a monotone region.
    pub window_shifted: bool,
}

/// Least-squares slope of ln p(t) over [t_max/10, t_max/2]. When p is not
/// monotonically decreasing there, the window slides later in steps of
/// t_max/10 until it is.
pub fn fit_exponential_rate(times_ps: &[f64], population: &[f64]) -> Result<RateFit> {
    if times_ps.len() != population.len() || times_ps.len() < 3 {
        return Err(Error::Fit("need at least three samples of equal length".into()));
    }
    let t_max = *times_ps.last().expect("non-empty");
    let width = 0.4 * t_max;
    let mut start = 0.1 * t_max;
    let mut shifted = false;
    while start + width <= t_max * (1.0 + 1e-12) {
        let end = start + width;
        let idx: Vec<usize> = (0..times_ps.len()).filter(|&i| times_ps[i] >= start && times_ps[i] <= end).collect();
        if idx.len() < 3 {
            return Err(Error::Fit(format!("fewer than three samples in [{start}, {end}] ps")));
        }
        let monotone = idx.windows(2).all(|w| population[w[1]] < population[w[0]]);
        if monotone && idx.iter().all(|&i| population[i] > 0.0) {
            let xs: Vec<f64> = idx.iter().map(|&i| times_ps[i]).collect();
            let ys: Vec<f64> = idx.iter().map(|&i| population[i].ln()).collect();
            let slope = least_squares_slope(&xs, &ys);
            if shifted {
                warn!("rate fit window moved to [{start:.3}, {end:.3}] ps");
            }
            return Ok(RateFit { rate_per_ps: -slope, window_ps: (start, end), window_shifted: shifted });
        }
        start += 0.1 * t_max;
        shifted = true;
    }
    Err(Error::Fit("population is not monotonically decreasing in any fit window".into()))
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Result of a truncation-convergence loop.
#[derive(Debug, Clone, PartialEq)]
pub struct Converged<T> {
    pub value: T,
    pub scalar: f64,
    pub fock_dim: usize,
    /// (M, scalar) for every truncation tried.
    pub iterates: Vec<(usize, f64)>,
}

/// Values below this magnitude are compared absolutely.
const CONVERGENCE_ABS_FLOOR: f64 = 1e-12;

/// Evaluates `f` at M = `m_start`, `m_start + step`, … until the scalar
/// output changes by less than the relative tolerance between consecutive
/// truncations. Returns the value at the larger of the last two M.
pub fn converge_truncation<T, F>(mut f: F, m_start: usize, settings: &ConvergenceSettings) -> Result<Converged<T>>
where
    F: FnMut(usize) -> Result<(T, f64)>,
{
    let step = settings.step.max(1);
    let mut m = m_start;
    let (_, mut prev) = f(m)?;
    let mut iterates = vec![(m, prev)];
    loop {
        let next = m + step;
        if next > settings.max_fock_dim {
            let last = iterates.iter().rev().take(3).rev().copied().collect();
            return Err(Error::NoConvergence { max_dim: settings.max_fock_dim, last });
        }
        m = next;
        let (value, scalar) = f(m)?;
        iterates.push((m, scalar));
        let change = (scalar - prev).abs();
        if change <= settings.relative_tol * scalar.abs().max(CONVERGENCE_ABS_FLOOR) {
            debug!("converged at M = {m}: {scalar:.6e}");
            return Ok(Converged { value, scalar, fock_dim: m, iterates });
        }
        prev = scalar;
    }
}

/// Uniform grid of `n` points on [0, t_max] in ps.
pub fn uniform_grid(t_max_ps: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![0.0];
    }
    (0..n).map(|k| t_max_ps * k as f64 / (n - 1) as f64).collect()
}
