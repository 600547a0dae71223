//! Collective-coordinate mapping of the phonon bath.
//!
//! The Drude–Lorentz bath J(ν) is replaced by a single mode of frequency
//! Ω = ν₀ coupled to the excited state with strength η, η² = πα ν₀/2. The
//! mode in turn couples to an Ohmic residual bath J_R(ν) = γν/2πν₀.

use std::f64::consts::PI;

use crate::error::Result;
use crate::operators::{
    annihilator, hermitian_eig, identity, qubit_sigma, DenseOperator, EigenSystem, HilbertSpace,
};
use crate::params::ModelParams;
use crate::C64;

/// Parameters of the collective coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CCParams {
    /// Emitter–CC coupling η (cm⁻¹).
    pub eta: f64,
    /// CC frequency Ω (cm⁻¹).
    pub omega: f64,
    /// Reorganization energy πα/2 (cm⁻¹).
    pub reorg: f64,
}

impl CCParams {
    /// Dimensionless displacement η/Ω between the two vibronic manifolds.
    pub fn displacement(&self) -> f64 {
        if self.omega == 0.0 {
            0.0
        } else {
            self.eta / self.omega
        }
    }
}

pub fn map_cc(p: &ModelParams) -> CCParams {
    CCParams {
        eta: (PI * p.alpha * p.nu0 / 2.0).sqrt(),
        omega: p.nu0,
        reorg: PI * p.alpha / 2.0,
    }
}

/// H_S′ = ε|e⟩⟨e| + η|e⟩⟨e|(b† + b) + (πα/2)|e⟩⟨e| + Ωb†b.
pub fn augmented_hamiltonian(p: &ModelParams, cc: &CCParams, hs: &HilbertSpace) -> DenseOperator {
    let m = hs.fock_dim;
    let b = annihilator(m);
    let x = &b + b.adjoint();
    let number = b.adjoint() * &b;
    let excited_block =
        identity(m) * C64::new(p.epsilon + cc.reorg, 0.0) + x * C64::new(cc.eta, 0.0);

    let d = hs.dim();
    let mut h = DenseOperator::zeros(d, d);
    h.view_mut((m, m), (m, m)).copy_from(&excited_block);
    h += hs.on_mode(&(number * C64::new(cc.omega, 0.0)));
    h
}

/// System-side coupling operators: S = 1 ⊗ (b† + b) for the residual bath
/// and σ = |g⟩⟨e| ⊗ 1 for the field.
pub fn coupling_operators(hs: &HilbertSpace) -> (DenseOperator, DenseOperator) {
    let b = annihilator(hs.fock_dim);
    let s = hs.on_mode(&(&b + b.adjoint()));
    let sigma = hs.on_emitter(&qubit_sigma());
    (s, sigma)
}

/// Everything downstream needs about the augmented system at one truncation.
#[derive(Debug, Clone)]
pub struct AugmentedSystem {
    pub space: HilbertSpace,
    pub cc: CCParams,
    pub hamiltonian: DenseOperator,
    pub s: DenseOperator,
    pub sigma: DenseOperator,
    /// Eigensystem of H_S′ with S_jk and σ_jk populated.
    pub eigen: EigenSystem,
}

impl AugmentedSystem {
    pub fn build(p: &ModelParams) -> Result<Self> {
        p.validate()?;
        let space = HilbertSpace::new(p.fock_dim)?;
        let cc = map_cc(p);
        let hamiltonian = augmented_hamiltonian(p, &cc, &space);
        let (s, sigma) = coupling_operators(&space);
        let mut eigen = hermitian_eig(&hamiltonian)?;
        eigen.populate(&s, &sigma);
        Ok(Self { space, cc, hamiltonian, s, sigma, eigen })
    }

    /// ⟨ψ_j|(σ†σ ⊗ 1)|ψ_j⟩ for every eigenstate.
    pub fn excited_weights(&self) -> Vec<f64> {
        let proj = self.space.excited_projector();
        let in_basis = self.eigen.to_eigenbasis(&proj);
        (0..self.eigen.dim()).map(|j| in_basis[(j, j)].re).collect()
    }

    /// Gap between the lowest excited-manifold eigenstate (excited weight
    /// above one half) and the ground state.
    pub fn zero_phonon_gap(&self) -> Option<f64> {
        let weights = self.excited_weights();
        let lowest_excited =
            weights.iter().zip(&self.eigen.values).find(|(w, _)| **w > 0.5).map(|(_, v)| *v)?;
        Some(lowest_excited - self.eigen.values[0])
    }
}
