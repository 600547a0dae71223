//! Liouvillian assembly: coherent part, residual-bath dissipator built from
//! the rate operator ζ, and the electromagnetic dissipator in either the
//! non-additive (eigenbasis rate operators χ₁, χ₂) or additive (bare
//! Lindblad) form.
//!
//! Principal-value (Lamb-shift) parts are dropped and no secular
//! approximation is made.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::cc::AugmentedSystem;
use crate::error::Result;
use crate::operators::{identity, max_abs, DenseOperator, EigenSystem, SuperOperator};
use crate::params::{units, Conventions, EmSpectralShape, FrequencyConvention, ModelParams};
use crate::spectral::{bose_occupation, em_sd, residual_sd};
use crate::C64;

/// Relative size (in units of ε) below which an eigenvalue gap counts as zero.
pub const ZERO_GAP_REL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EmMode {
    NonAdditive,
    Additive,
}

impl EmMode {
    pub fn label(self) -> &'static str {
        match self {
            EmMode::NonAdditive => "nonadditive",
            EmMode::Additive => "additive",
        }
    }
}

/// Rate operators of the non-additive master equation.
#[derive(Debug, Clone)]
pub struct RateOperators {
    pub zeta: DenseOperator,
    pub chi1: DenseOperator,
    pub chi2: DenseOperator,
    /// Γ↓ sampled for each eigenbasis element (j, k).
    pub gamma_down: DMatrix<f64>,
    /// Γ↑ sampled for each eigenbasis element (j, k).
    pub gamma_up: DMatrix<f64>,
}

/// J_R(λ)[coth(λ/2k_BT_R) + 1], with the λ → 0 limit γk_BT_R/πν₀.
fn residual_weight(lambda: f64, p: &ModelParams) -> f64 {
    if lambda.abs() < ZERO_GAP_REL * p.epsilon {
        return p.gamma * units::thermal_energy(p.t_residual) / (PI * p.nu0);
    }
    // coth(x/2) + 1 = 2(n(x) + 1)
    let n = bose_occupation(lambda, p.t_residual).expect("non-zero gap");
    2.0 * residual_sd(lambda, p) * (n + 1.0)
}

/// ζ = (π/2) Σ_jk J_R(λ_jk)[coth(λ_jk/2k_BT_R) + 1] S_jk |ψ_j⟩⟨ψ_k|.
pub fn build_zeta(es: &EigenSystem, p: &ModelParams) -> DenseOperator {
    let s = es.s_elements.as_ref().expect("eigensystem must carry S_jk");
    let n = es.dim();
    let in_basis = DMatrix::from_fn(n, n, |j, k| {
        s[(j, k)] * (0.5 * PI * residual_weight(es.gaps[(j, k)], p))
    });
    es.from_eigenbasis(&in_basis)
}

/// (Γ↓, Γ↑) for one eigenbasis element with signed gap λ_jk.
fn em_rates(
    lambda: f64,
    p: &ModelParams,
    shape: EmSpectralShape,
    convention: FrequencyConvention,
) -> (f64, f64) {
    if lambda.abs() < ZERO_GAP_REL * p.epsilon {
        return (0.0, 0.0);
    }
    let (j, n) = match convention {
        FrequencyConvention::PositiveGap => {
            let w = lambda.abs();
            (em_sd(w, p, shape), bose_occupation(w, p.t_em).expect("non-zero gap"))
        }
        FrequencyConvention::SignedClamped => {
            if lambda <= 0.0 {
                return (0.0, 0.0);
            }
            (em_sd(lambda, p, shape), bose_occupation(lambda, p.t_em).expect("non-zero gap"))
        }
        FrequencyConvention::SignedOdd => {
            let j = lambda.signum() * em_sd(lambda.abs(), p, shape);
            (j, bose_occupation(lambda, p.t_em).expect("non-zero gap"))
        }
    };
    (PI * j * (n + 1.0), PI * j * n)
}

/// χ₁ = Σ σ_jk Γ↓ |ψ_j⟩⟨ψ_k| and χ₂ = Σ σ*_jk Γ↑ |ψ_k⟩⟨ψ_j|, together with
/// the sampled rate tables.
pub fn build_chi(
    es: &EigenSystem,
    p: &ModelParams,
    conventions: &Conventions,
) -> (DenseOperator, DenseOperator, DMatrix<f64>, DMatrix<f64>) {
    let sigma = es.sigma_elements.as_ref().expect("eigensystem must carry σ_jk");
    let n = es.dim();
    let mut down = DMatrix::zeros(n, n);
    let mut up = DMatrix::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            if sigma[(j, k)].norm() == 0.0 {
                continue;
            }
            let (d, u) = em_rates(es.gaps[(j, k)], p, conventions.em_shape, conventions.frequency);
            down[(j, k)] = d;
            up[(j, k)] = u;
        }
    }
    let chi1_eig = DMatrix::from_fn(n, n, |j, k| sigma[(j, k)] * down[(j, k)]);
    let chi2_eig = DMatrix::from_fn(n, n, |j, k| sigma[(j, k)] * up[(j, k)]).adjoint();
    (es.from_eigenbasis(&chi1_eig), es.from_eigenbasis(&chi2_eig), down, up)
}

pub fn build_rate_operators(
    es: &EigenSystem,
    p: &ModelParams,
    conventions: &Conventions,
) -> RateOperators {
    let zeta = build_zeta(es, p);
    let (chi1, chi2, gamma_down, gamma_up) = build_chi(es, p, conventions);
    RateOperators { zeta, chi1, chi2, gamma_down, gamma_up }
}

/// 𝒦_R[ρ] = [S, ρζ] + [ζ†ρ, S].
pub fn apply_k_r(rho: &DenseOperator, s: &DenseOperator, zeta: &DenseOperator) -> DenseOperator {
    let rho_zeta = rho * zeta;
    let zeta_d_rho = zeta.adjoint() * rho;
    s * &rho_zeta - &rho_zeta * s + &zeta_d_rho * s - s * &zeta_d_rho
}

/// 𝒦_EM[ρ] = −[σ†, χ₁ρ] − [σ, χ₂ρ] + h.c., for Hermitian ρ.
pub fn apply_k_em_nonadditive(
    rho: &DenseOperator,
    sigma: &DenseOperator,
    chi1: &DenseOperator,
    chi2: &DenseOperator,
) -> DenseOperator {
    let sigma_d = sigma.adjoint();
    let c1 = chi1 * rho;
    let c2 = chi2 * rho;
    let x = -(&sigma_d * &c1 - &c1 * &sigma_d) - (sigma * &c2 - &c2 * sigma);
    &x + x.adjoint()
}

/// ℒ_O[ρ] = 2OρO† − {O†O, ρ}.
fn lindblad(o: &DenseOperator, rho: &DenseOperator) -> DenseOperator {
    let od = o.adjoint();
    let odo = &od * o;
    (o * rho * &od) * C64::new(2.0, 0.0) - &odo * rho - rho * &odo
}

/// Bare Lindblad rates (Γ₀/2)(n(ε)+1) and (Γ₀/2)n(ε), in cm⁻¹.
pub fn additive_rates(p: &ModelParams) -> (f64, f64) {
    let n = bose_occupation(p.epsilon, p.t_em).expect("ε > 0");
    let half = 0.5 * p.gamma0_cm();
    (half * (n + 1.0), half * n)
}

/// (Γ₀/2)(n(ε)+1)ℒ_σ[ρ] + (Γ₀/2)n(ε)ℒ_σ†[ρ]; independent of the vibrational coupling.
pub fn apply_k_em_additive(rho: &DenseOperator, sigma: &DenseOperator, p: &ModelParams) -> DenseOperator {
    let (down, up) = additive_rates(p);
    lindblad(sigma, rho) * C64::new(down, 0.0) + lindblad(&sigma.adjoint(), rho) * C64::new(up, 0.0)
}

/// A Liouvillian written as ρ ↦ Lρ + ρR + Σ_t A_t ρ B_t.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    pub mode: EmMode,
    pub params: ModelParams,
    pub system: AugmentedSystem,
    pub rates: RateOperators,
    pub left: DenseOperator,
    pub right: DenseOperator,
    pub sandwiches: Vec<(DenseOperator, DenseOperator)>,
}

impl Liouvillian {
    pub fn dim(&self) -> usize {
        self.left.nrows()
    }

    pub fn fock_dim(&self) -> usize {
        self.system.space.fock_dim
    }

    /// Matrix-free application.
    pub fn apply(&self, rho: &DenseOperator) -> DenseOperator {
        let mut out = &self.left * rho + rho * &self.right;
        for (a, b) in &self.sandwiches {
            out += a * rho * b;
        }
        out
    }

    /// Dense column-stacked superoperator of dimension D² × D².
    pub fn superoperator(&self) -> SuperOperator {
        let d = self.dim();
        let id = identity(d);
        let mut matrix = id.kronecker(&self.left) + self.right.transpose().kronecker(&id);
        for (a, b) in &self.sandwiches {
            matrix += b.transpose().kronecker(a);
        }
        SuperOperator { dim: d, matrix }
    }
}

fn push_nonzero(
    terms: &mut Vec<(DenseOperator, DenseOperator)>,
    a: DenseOperator,
    b: DenseOperator,
) {
    if max_abs(&a) > 0.0 && max_abs(&b) > 0.0 {
        terms.push((a, b));
    }
}

/// ℒ[ρ] = −i[H_S′, ρ] + 𝒦_R[ρ] + 𝒦_EM[ρ] with 𝒦_EM chosen by `mode`.
pub fn assemble_liouvillian(
    mode: EmMode,
    p: &ModelParams,
    conventions: &Conventions,
    system: &AugmentedSystem,
) -> Result<Liouvillian> {
    p.validate()?;
    let i = C64::new(0.0, 1.0);
    let h = &system.hamiltonian;
    let s = &system.s;
    let sigma = &system.sigma;
    let sigma_d = sigma.adjoint();
    let rates = build_rate_operators(&system.eigen, p, conventions);

    let mut left = h * (-i);
    let mut right = h * i;
    if conventions.include_residual_counterterm {
        let kappa = p.gamma * conventions.residual_cutoff / (2.0 * PI * p.nu0);
        let s2 = s * s * C64::new(kappa, 0.0);
        left -= &s2 * i;
        right += &s2 * i;
    }

    let mut sandwiches = Vec::new();
    let zeta = &rates.zeta;
    let zeta_d = zeta.adjoint();
    left -= s * &zeta_d;
    right -= zeta * s;
    push_nonzero(&mut sandwiches, s.clone(), zeta.clone());
    push_nonzero(&mut sandwiches, zeta_d, s.clone());

    match mode {
        EmMode::NonAdditive => {
            let (chi1, chi2) = (&rates.chi1, &rates.chi2);
            left -= &sigma_d * chi1 + sigma * chi2;
            right -= chi1.adjoint() * sigma + chi2.adjoint() * &sigma_d;
            push_nonzero(&mut sandwiches, chi1.clone(), sigma_d.clone());
            push_nonzero(&mut sandwiches, chi2.clone(), sigma.clone());
            push_nonzero(&mut sandwiches, sigma.clone(), chi1.adjoint());
            push_nonzero(&mut sandwiches, sigma_d.clone(), chi2.adjoint());
        }
        EmMode::Additive => {
            let (down, up) = additive_rates(p);
            let sds = &sigma_d * sigma;
            let ssd = sigma * &sigma_d;
            let anti = &sds * C64::new(down, 0.0) + &ssd * C64::new(up, 0.0);
            left -= &anti;
            right -= &anti;
            push_nonzero(&mut sandwiches, sigma * C64::new(2.0 * down, 0.0), sigma_d.clone());
            push_nonzero(&mut sandwiches, &sigma_d * C64::new(2.0 * up, 0.0), sigma.clone());
        }
    }

    Ok(Liouvillian {
        mode,
        params: *p,
        system: system.clone(),
        rates,
        left,
        right,
        sandwiches,
    })
}

/// Builds the augmented system at `p.fock_dim` and assembles the Liouvillian.
pub fn build(mode: EmMode, p: &ModelParams, conventions: &Conventions) -> Result<Liouvillian> {
    let system = AugmentedSystem::build(p)?;
    assemble_liouvillian(mode, p, conventions, &system)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{hermiticity_defect, tensor, thermal_fock_state, HilbertSpace};

    fn fig2(alpha_ratio: f64, m: usize) -> ModelParams {
        ModelParams::default().with_alpha_over_epsilon(alpha_ratio).with_fock_dim(m)
    }

    fn random_density(dim: usize, seed: u64) -> DenseOperator {
        let mut state = seed.wrapping_add(0x9E3779B97F4A7C15);
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let a = DMatrix::from_fn(dim, dim, |_, _| C64::new(next(), next()));
        let rho = &a * a.adjoint();
        let tr = rho.trace();
        rho / tr
    }

    #[test]
    fn zeta_vanishes_without_residual_coupling() {
        let mut p = fig2(0.1, 6);
        p.gamma = 0.0;
        let sys = AugmentedSystem::build(&p).unwrap();
        assert_eq!(max_abs(&build_zeta(&sys.eigen, &p)), 0.0);
    }

    #[test]
    fn residual_weight_limits() {
        let p = fig2(0.1, 6);
        let kt = units::thermal_energy(p.t_residual);
        let at_zero = residual_weight(0.0, &p);
        assert!((at_zero - p.gamma * kt / (PI * p.nu0)).abs() < 1e-12);
        // (π/2) × limit = γ k_B T_R / (2ν₀)
        assert!((0.5 * PI * at_zero - p.gamma * kt / (2.0 * p.nu0)).abs() < 1e-12);
        // continuity into the limit
        let near = residual_weight(1e-3, &p);
        assert!(((near - at_zero) / at_zero).abs() < 1e-5);
        // Uphill weight equals J_R(|λ|)[coth(|λ|/2kT) − 1] ≥ 0.
        for &l in &[10.0, 400.0, 3000.0] {
            let coth = 1.0 / (l / (2.0 * kt)).tanh();
            let expected = residual_sd(l, &p) * (coth - 1.0);
            let got = residual_weight(-l, &p);
            assert!(got >= 0.0);
            assert!(((got - expected) / expected).abs() < 1e-10);
        }
    }

    #[test]
    fn chi_reduces_to_bare_forms_without_phonons() {
        let p = fig2(0.0, 4).with_t_em(6000.0);
        let sys = AugmentedSystem::build(&p).unwrap();
        let (chi1, chi2, _, _) = build_chi(&sys.eigen, &p, &Conventions::default());
        let n = bose_occupation(p.epsilon, p.t_em).unwrap();
        let g0 = p.gamma0_cm();
        let expected1 = &sys.sigma * C64::new(0.5 * g0 * (n + 1.0), 0.0);
        let expected2 = sys.sigma.adjoint() * C64::new(0.5 * g0 * n, 0.0);
        assert!(max_abs(&(chi1 - expected1)) < 1e-14 * g0);
        assert!(max_abs(&(chi2 - expected2)) < 1e-14 * g0);

        // Cold field: no absorption.
        let cold = fig2(0.1, 6).with_t_em(1.0);
        let sys = AugmentedSystem::build(&cold).unwrap();
        let (_, chi2, _, _) = build_chi(&sys.eigen, &cold, &Conventions::default());
        assert_eq!(max_abs(&chi2), 0.0);

        let mut dark = fig2(0.1, 6);
        dark.gamma0_per_ps = 0.0;
        let sys = AugmentedSystem::build(&dark).unwrap();
        let (chi1, chi2, _, _) = build_chi(&sys.eigen, &dark, &Conventions::default());
        assert_eq!(max_abs(&chi1) + max_abs(&chi2), 0.0);
    }

    #[test]
    fn dissipators_are_traceless_and_hermitian() {
        let p = fig2(0.1, 6).with_t_em(6000.0);
        let sys = AugmentedSystem::build(&p).unwrap();
        let rates = build_rate_operators(&sys.eigen, &p, &Conventions::default());
        for seed in 0..20 {
            let rho = random_density(sys.space.dim(), seed);
            let kr = apply_k_r(&rho, &sys.s, &rates.zeta);
            let kem = apply_k_em_nonadditive(&rho, &sys.sigma, &rates.chi1, &rates.chi2);
            let kadd = apply_k_em_additive(&rho, &sys.sigma, &p);
            for k in [&kr, &kem, &kadd] {
                assert!(k.trace().norm() < 1e-12 * max_abs(k).max(1.0));
                assert!(hermiticity_defect(k) < 1e-12 * max_abs(k).max(1.0));
            }
        }
        let zero = DenseOperator::zeros(12, 12);
        let rho = random_density(12, 99);
        assert_eq!(max_abs(&apply_k_r(&rho, &sys.s, &zero)), 0.0);
    }

    #[test]
    fn residual_dissipator_nearly_stationary_on_thermal_state() {
        let mut p = fig2(0.1, 8);
        p.gamma0_per_ps = 0.0;
        let sys = AugmentedSystem::build(&p).unwrap();
        let rates = build_rate_operators(&sys.eigen, &p, &Conventions::default());
        let kt = units::thermal_energy(p.t_residual);
        let weights: Vec<f64> = sys.eigen.values.iter().map(|v| (-(v - sys.eigen.values[0]) / kt).exp()).collect();
        let z: f64 = weights.iter().sum();
        let diag = DMatrix::from_fn(sys.space.dim(), sys.space.dim(), |j, k| {
            if j == k { C64::new(weights[j] / z, 0.0) } else { C64::new(0.0, 0.0) }
        });
        let thermal = sys.eigen.from_eigenbasis(&diag);
        let out = apply_k_r(&thermal, &sys.s, &rates.zeta);
        let scale = max_abs(&rates.zeta) * max_abs(&sys.s);
        assert!(max_abs(&out) < 1e-3 * scale, "{} vs {}", max_abs(&out), scale);
    }

    #[test]
    fn bare_decay_rates() {
        // α = 0, cold field, excited emitter: d⟨σ†σ⟩/dt = −Γ₀ρ_ee.
        let p = fig2(0.0, 4).with_t_em(1.0);
        let sys = AugmentedSystem::build(&p).unwrap();
        let rates = build_rate_operators(&sys.eigen, &p, &Conventions::default());
        let hs = HilbertSpace::new(4).unwrap();
        let mut e = DenseOperator::zeros(2, 2);
        e[(1, 1)] = C64::new(1.0, 0.0);
        let rho = tensor(&e, &thermal_fock_state(p.nu0, p.t_residual, 4).unwrap());
        let proj = hs.excited_projector();
        for k in [
            apply_k_em_nonadditive(&rho, &sys.sigma, &rates.chi1, &rates.chi2),
            apply_k_em_additive(&rho, &sys.sigma, &p),
        ] {
            let d_pop = (&proj * k).trace().re;
            assert!((d_pop + p.gamma0_cm()).abs() < 1e-14);
        }
    }

    #[test]
    fn additive_dissipator_ignores_vibrations() {
        let p0 = fig2(0.0, 6).with_t_em(6000.0);
        let p1 = fig2(0.25, 6).with_t_em(6000.0);
        let sys = AugmentedSystem::build(&p0).unwrap();
        let rho = random_density(12, 5);
        assert_eq!(apply_k_em_additive(&rho, &sys.sigma, &p0), apply_k_em_additive(&rho, &sys.sigma, &p1));
    }

    #[test]
    fn sandwich_form_matches_direct_application() {
        let p = fig2(0.15, 5).with_t_em(12000.0);
        let conv = Conventions::default();
        for mode in [EmMode::NonAdditive, EmMode::Additive] {
            let l = build(mode, &p, &conv).unwrap();
            let sys = &l.system;
            for seed in 0..5 {
                let rho = random_density(10, seed);
                let i = C64::new(0.0, 1.0);
                let mut direct = (&sys.hamiltonian * &rho - &rho * &sys.hamiltonian) * (-i)
                    + apply_k_r(&rho, &sys.s, &l.rates.zeta);
                direct += match mode {
                    EmMode::NonAdditive => apply_k_em_nonadditive(&rho, &sys.sigma, &l.rates.chi1, &l.rates.chi2),
                    EmMode::Additive => apply_k_em_additive(&rho, &sys.sigma, &p),
                };
                let via_terms = l.apply(&rho);
                let via_matrix = l.superoperator().apply(&rho).unwrap();
                let scale = max_abs(&direct);
                assert!(max_abs(&(&via_terms - &direct)) < 1e-12 * scale);
                assert!(max_abs(&(&via_matrix - &direct)) < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn spectrum_has_single_stationary_mode() {
        let l = build(EmMode::NonAdditive, &fig2(0.1, 8), &Conventions::default()).unwrap();
        let sup = l.superoperator();
        assert_eq!(sup.matrix.nrows(), 256);
        let eig = sup.matrix.clone().schur().eigenvalues().expect("triangular complex Schur form");
        let scale = sup.matrix.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let tol = 1e-10 * scale;
        let zero = eig.iter().filter(|z| z.norm() < tol).count();
        let max_re = eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(zero, 1, "max Re λ = {max_re:e}");
        assert!(max_re < tol, "{max_re:e}");
    }

    #[test]
    fn additive_and_nonadditive_coincide_without_phonons() {
        let c = Conventions::default();
        let p = fig2(0.0, 6);
        let diff = build(EmMode::NonAdditive, &p, &c).unwrap().superoperator().matrix
            - build(EmMode::Additive, &p, &c).unwrap().superoperator().matrix;
        let worst = diff.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        assert!(worst < 1e-8 * p.gamma0_cm(), "{worst:e}");
    }

    #[test]
    fn additive_limit_is_approached_as_sqrt_alpha() {
        // The leading correction is linear in η ∝ √α.
        let c = Conventions::default();
        let gap = |ratio: f64| {
            let p = fig2(0.0, 8).with_alpha_over_epsilon(ratio);
            let d = build(EmMode::NonAdditive, &p, &c).unwrap().superoperator().matrix
                - build(EmMode::Additive, &p, &c).unwrap().superoperator().matrix;
            d.iter().fold(0.0f64, |m, z| m.max(z.norm())) / p.gamma0_cm()
        };
        let (a, b) = (gap(1e-4), gap(1e-6));
        assert!(((a / b) - 10.0).abs() < 0.1, "{a:e} {b:e}");
    }
}
