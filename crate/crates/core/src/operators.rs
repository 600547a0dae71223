//! Dense operators on the truncated emitter ⊗ Fock space.
//!
//! Basis ordering: index `i = elec·M + n` with `elec = 0` for |g⟩ and
//! `elec = 1` for |e⟩, `n` the Fock index. Superoperators use column-stacking
//! vectorization, vec(AρB) = (Bᵀ ⊗ A) vec(ρ), which coincides with the
//! column-major storage of [`DMatrix`].

use log::warn;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::params::units;
use crate::C64;

pub type DenseOperator = DMatrix<C64>;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Electronic {
    Ground = 0,
    Excited = 1,
}

/// Emitter ⊗ truncated Fock space with D = 2M.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertSpace {
    pub fock_dim: usize,
}

impl HilbertSpace {
    pub fn new(fock_dim: usize) -> Result<Self> {
        if fock_dim < 2 {
            return Err(Error::InvalidParameter {
                name: "fock_dim",
                reason: format!("must be ≥ 2, got {fock_dim}"),
            });
        }
        Ok(Self { fock_dim })
    }

    pub fn dim(&self) -> usize {
        2 * self.fock_dim
    }

    pub fn index(&self, elec: Electronic, fock: usize) -> usize {
        debug_assert!(fock < self.fock_dim);
        elec as usize * self.fock_dim + fock
    }

    pub fn split(&self, index: usize) -> (Electronic, usize) {
        let elec = if index / self.fock_dim == 0 { Electronic::Ground } else { Electronic::Excited };
        (elec, index % self.fock_dim)
    }

    /// Lifts a 2×2 emitter operator to A ⊗ 1.
    pub fn on_emitter(&self, op: &DenseOperator) -> DenseOperator {
        tensor(op, &identity(self.fock_dim))
    }

    /// Lifts an M×M mode operator to 1 ⊗ B.
    pub fn on_mode(&self, op: &DenseOperator) -> DenseOperator {
        tensor(&identity(2), op)
    }

    /// σ†σ ⊗ 1, the excited-state projector.
    pub fn excited_projector(&self) -> DenseOperator {
        let s = qubit_sigma();
        self.on_emitter(&(s.adjoint() * s))
    }
}

pub fn identity(dim: usize) -> DenseOperator {
    DMatrix::identity(dim, dim)
}

/// Truncated annihilation operator, b|n⟩ = √n |n−1⟩.
pub fn annihilator(fock_dim: usize) -> DenseOperator {
    let mut b = DMatrix::zeros(fock_dim, fock_dim);
    for n in 1..fock_dim {
        b[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    b
}

/// σ = |g⟩⟨e| on the bare emitter.
pub fn qubit_sigma() -> DenseOperator {
    let mut s = DMatrix::zeros(2, 2);
    s[(0, 1)] = ONE;
    s
}

/// Kronecker product A ⊗ B in the electronic-major ordering.
pub fn tensor(a: &DenseOperator, b: &DenseOperator) -> DenseOperator {
    a.kronecker(b)
}

pub fn dagger(a: &DenseOperator) -> DenseOperator {
    a.adjoint()
}

pub fn commutator(a: &DenseOperator, b: &DenseOperator) -> DenseOperator {
    a * b - b * a
}

pub fn max_abs(a: &DenseOperator) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Hermitian matrix with entries uniform in [−½, ½] + i[−½, ½], symmetrized.
pub fn random_hermitian<R: rand::Rng + ?Sized>(d: usize, rng: &mut R) -> DenseOperator {
    let a = DenseOperator::from_fn(d, d, |_, _| C64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)));
    (&a + a.adjoint()) * C64::new(0.5, 0.0)
}

pub fn hermiticity_defect(a: &DenseOperator) -> f64 {
    max_abs(&(a - a.adjoint()))
}

pub fn trace(a: &DenseOperator) -> C64 {
    a.trace()
}

/// Displacement operator D(d) = exp(d(b† − b)) for real d, from the matrix
/// exponential of the truncated generator.
///
/// The truncated generator is anti-Hermitian, so the result is unitary to
/// rounding; a warning is logged when the top two Fock levels of D|0⟩ carry
/// more than 1e-6 of the weight, which signals that `fock_dim` is too small
/// for this displacement.
pub fn displacement(d: f64, fock_dim: usize) -> DenseOperator {
    let mut gen = DMatrix::<f64>::zeros(fock_dim, fock_dim);
    for n in 1..fock_dim {
        let s = (n as f64).sqrt();
        gen[(n, n - 1)] = d * s; // b†
        gen[(n - 1, n)] = -d * s; // −b
    }
    let real = gen.exp();
    let op = real.map(|x| C64::new(x, 0.0));
    let top: f64 = (fock_dim.saturating_sub(2)..fock_dim).map(|n| op[(n, 0)].norm_sqr()).sum();
    if top > 1e-6 {
        warn!("displacement d = {d} leaks {top:.2e} into the top Fock levels at M = {fock_dim}");
    }
    let defect = max_abs(&(op.adjoint() * &op - identity(fock_dim)));
    if defect > 1e-6 {
        warn!("truncated displacement operator has unitarity defect {defect:.2e}");
    }
    op
}

/// Thermal state exp(−Ω b†b / k_BT)/Z on M Fock levels.
pub fn thermal_fock_state(omega: f64, temperature: f64, fock_dim: usize) -> Result<DenseOperator> {
    if !(omega > 0.0) || !(temperature > 0.0) {
        return Err(Error::InvalidParameter {
            name: "thermal_fock_state",
            reason: format!("need Ω > 0 and T > 0, got Ω = {omega}, T = {temperature}"),
        });
    }
    let pops = thermal_populations(omega, temperature, fock_dim);
    if pops[fock_dim - 1] > 1e-8 {
        warn!("thermal state at Ω = {omega}, T = {temperature} puts {:.2e} in |M−1⟩", pops[fock_dim - 1]);
    }
    Ok(DMatrix::from_diagonal(&DVector::from_iterator(
        fock_dim,
        pops.iter().map(|&p| C64::new(p, 0.0)),
    )))
}

/// Normalized Boltzmann weights p_m ∝ exp(−mΩ/k_BT), m < M.
pub fn thermal_populations(omega: f64, temperature: f64, fock_dim: usize) -> Vec<f64> {
    let beta_omega = omega / units::thermal_energy(temperature);
    let weights: Vec<f64> = (0..fock_dim).map(|m| (-(m as f64) * beta_omega).exp()).collect();
    let z: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / z).collect()
}

/// Eigen-decomposition of a Hermitian operator with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    /// Columns are the eigenvectors |ψ_j⟩.
    pub vectors: DenseOperator,
    /// λ_jk = ψ_j − ψ_k.
    pub gaps: DMatrix<f64>,
    /// S_jk = ⟨ψ_j|S|ψ_k⟩, once populated.
    pub s_elements: Option<DenseOperator>,
    /// σ_jk = ⟨ψ_j|σ|ψ_k⟩, once populated.
    pub sigma_elements: Option<DenseOperator>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// ⟨ψ_j|A|ψ_k⟩ for all j, k.
    pub fn to_eigenbasis(&self, a: &DenseOperator) -> DenseOperator {
        self.vectors.adjoint() * a * &self.vectors
    }

    /// Σ_jk A_jk |ψ_j⟩⟨ψ_k|.
    pub fn from_eigenbasis(&self, a: &DenseOperator) -> DenseOperator {
        &self.vectors * a * self.vectors.adjoint()
    }

    pub fn populate(&mut self, s: &DenseOperator, sigma: &DenseOperator) {
        self.s_elements = Some(self.to_eigenbasis(s));
        self.sigma_elements = Some(self.to_eigenbasis(sigma));
    }

    /// max |H − VΛV†|.
    pub fn reconstruction_error(&self, h: &DenseOperator) -> f64 {
        let lambda = DMatrix::from_diagonal(&DVector::from_iterator(
            self.dim(),
            self.values.iter().map(|&v| C64::new(v, 0.0)),
        ));
        max_abs(&(h - self.from_eigenbasis(&lambda)))
    }
}

/// Eigen-decomposition of `h`; rejects input whose Hermiticity defect
/// exceeds 1e-10·max(1, ‖H‖_max).
pub fn hermitian_eig(h: &DenseOperator) -> Result<EigenSystem> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch { expected: h.nrows(), found: h.ncols() });
    }
    let defect = hermiticity_defect(h);
    if defect > 1e-10 * max_abs(h).max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    let sym = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    let gaps = DMatrix::from_fn(n, n, |j, k| values[j] - values[k]);
    Ok(EigenSystem { values, vectors, gaps, s_elements: None, sigma_elements: None })
}

/// Column-stacked vec(ρ).
pub fn vectorize(rho: &DenseOperator) -> DVector<C64> {
    DVector::from_column_slice(rho.as_slice())
}

pub fn unvectorize(v: &DVector<C64>, dim: usize) -> Result<DenseOperator> {
    if v.len() != dim * dim {
        return Err(Error::DimensionMismatch { expected: dim * dim, found: v.len() });
    }
    Ok(DMatrix::from_column_slice(dim, dim, v.as_slice()))
}

/// Matrix representation of a linear map on D×D operators.
#[derive(Debug, Clone)]
pub struct SuperOperator {
    pub dim: usize,
    pub matrix: DMatrix<C64>,
}

impl SuperOperator {
    /// Builds the matrix column by column from the map's action on E_kl.
    pub fn from_map<F: Fn(&DenseOperator) -> DenseOperator>(dim: usize, f: F) -> Self {
        let n = dim * dim;
        let mut matrix = DMatrix::zeros(n, n);
        let mut basis = DMatrix::zeros(dim, dim);
        for col in 0..n {
            let (k, l) = (col % dim, col / dim);
            basis[(k, l)] = ONE;
            let image = f(&basis);
            matrix.set_column(col, &vectorize(&image));
            basis[(k, l)] = ZERO;
        }
        Self { dim, matrix }
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, matrix: DMatrix::identity(dim * dim, dim * dim) }
    }

    /// ρ ↦ AρB as Bᵀ ⊗ A.
    pub fn sandwich(a: &DenseOperator, b: &DenseOperator) -> Self {
        Self { dim: a.nrows(), matrix: b.transpose().kronecker(a) }
    }

    pub fn apply(&self, rho: &DenseOperator) -> Result<DenseOperator> {
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: rho.nrows() });
        }
        unvectorize(&(&self.matrix * vectorize(rho)), self.dim)
    }

    /// Row vector whose product with vec(ρ) is Tr ρ, applied on the left.
    /// Returns max_k |Σ_i L_(ii),k|, zero for a trace-preserving map.
    pub fn trace_defect(&self) -> f64 {
        let d = self.dim;
        let n = d * d;
        (0..n)
            .map(|col| (0..d).map(|i| self.matrix[(i + i * d, col)]).sum::<C64>().norm())
            .fold(0.0, f64::max)
    }
}
