//! Real coordinates for Hermitian density matrices and the real matrix of a
//! Liouvillian acting on them.
//!
//! The Liouvillian conserves the difference of electronic excitation
//! between bra and ket, so block-diagonal operators (populations sector)
//! and g–e off-diagonal blocks (coherences sector) evolve independently.
//! Each sector is parametrized by the real diagonal entries plus the real and
//! imaginary parts of the upper-triangle entries it contains.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::liouvillian::Liouvillian;
use crate::operators::{DenseOperator, HilbertSpace};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sector {
    Full,
    /// Entries ρ_ij with i, j in the same electronic manifold.
    Populations,
    /// Entries ρ_ij between the ground and excited manifolds.
    Coherences,
}

impl Sector {
    fn contains(self, space: &HilbertSpace, i: usize, j: usize) -> bool {
        let same = space.split(i).0 == space.split(j).0;
        match self {
            Sector::Full => true,
            Sector::Populations => same,
            Sector::Coherences => !same,
        }
    }
}

/// Layout of the real coordinate vector of one sector.
#[derive(Debug, Clone)]
pub struct HermitianCoords {
    pub sector: Sector,
    pub dim: usize,
    /// Upper-triangle pairs (i ≤ j) in the sector.
    pairs: Vec<(usize, usize)>,
    /// Offset of each pair's first coordinate.
    offsets: Vec<usize>,
    len: usize,
}

impl HermitianCoords {
    pub fn new(space: &HilbertSpace, sector: Sector) -> Self {
        let dim = space.dim();
        let mut pairs = Vec::new();
        let mut offsets = Vec::new();
        let mut len = 0;
        for i in 0..dim {
            for j in i..dim {
                if sector.contains(space, i, j) {
                    pairs.push((i, j));
                    offsets.push(len);
                    len += if i == j { 1 } else { 2 };
                }
            }
        }
        Self { sector, dim, pairs, offsets, len }
    }

    /// Number of real coordinates.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Coordinates of the sector part of `rho`, which is assumed Hermitian.
    pub fn encode(&self, rho: &DenseOperator) -> Result<DVector<f64>> {
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: rho.nrows() });
        }
        let mut v = DVector::zeros(self.len);
        for (&(i, j), &o) in self.pairs.iter().zip(&self.offsets) {
            let z = rho[(i, j)];
            v[o] = z.re;
            if i != j {
                v[o + 1] = z.im;
            }
        }
        Ok(v)
    }

    /// The Hermitian operator with these coordinates (zero outside the sector).
    pub fn decode(&self, v: &DVector<f64>) -> DenseOperator {
        let mut rho = DenseOperator::zeros(self.dim, self.dim);
        self.decode_into(v, &mut rho);
        rho
    }

    /// Adds the decoded operator to `rho`.
    pub fn decode_into(&self, v: &DVector<f64>, rho: &mut DenseOperator) {
        for (&(i, j), &o) in self.pairs.iter().zip(&self.offsets) {
            if i == j {
                rho[(i, i)] += C64::new(v[o], 0.0);
            } else {
                let z = C64::new(v[o], v[o + 1]);
                rho[(i, j)] += z;
                rho[(j, i)] += z.conj();
            }
        }
    }

    /// Row vector t with t·v = Tr ρ.
    pub fn trace_functional(&self) -> DVector<f64> {
        let mut t = DVector::zeros(self.len);
        for (&(i, j), &o) in self.pairs.iter().zip(&self.offsets) {
            if i == j {
                t[o] = 1.0;
            }
        }
        t
    }

    /// Coordinate index of the diagonal entry ρ_ii, if it lies in the sector.
    pub fn diagonal_coordinate(&self, i: usize) -> Option<usize> {
        self.pairs.iter().position(|&p| p == (i, i)).map(|k| self.offsets[k])
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.pairs.iter().zip(&self.offsets).map(|(&(i, j), &o)| (i, j, o))
    }
}

/// The real matrix G with d/dt v = G v for one sector of a Liouvillian.
#[derive(Debug, Clone)]
pub struct RealGenerator {
    pub coords: HermitianCoords,
    pub matrix: DMatrix<f64>,
}

impl RealGenerator {
    pub fn build(l: &Liouvillian, sector: Sector) -> Self {
        let coords = HermitianCoords::new(&l.system.space, sector);
        let n = coords.len();
        let mut matrix = DMatrix::zeros(n, n);
        // L[E_kl]_ij = Left_ik δ_lj + δ_ik Right_lj + Σ_t A_ik B_lj
        let image = |k: usize, l_: usize, i: usize, j: usize| -> C64 {
            let mut z = C64::new(0.0, 0.0);
            if l_ == j {
                z += l.left[(i, k)];
            }
            if i == k {
                z += l.right[(l_, j)];
            }
            for (a, b) in &l.sandwiches {
                z += a[(i, k)] * b[(l_, j)];
            }
            z
        };
        let i_unit = C64::new(0.0, 1.0);
        let mut column = vec![C64::new(0.0, 0.0); coords.pairs.len()];
        for (k, l_, oc) in coords.pairs() {
            // Real part, or the diagonal element itself.
            for (slot, (i, j, _)) in column.iter_mut().zip(coords.pairs()) {
                *slot = if k == l_ { image(k, k, i, j) } else { image(k, l_, i, j) + image(l_, k, i, j) };
            }
            write_column(&coords, &column, &mut matrix, oc);
            if k != l_ {
                for (slot, (i, j, _)) in column.iter_mut().zip(coords.pairs()) {
                    *slot = i_unit * (image(k, l_, i, j) - image(l_, k, i, j));
                }
                write_column(&coords, &column, &mut matrix, oc + 1);
            }
        }
        Self { coords, matrix }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.matrix * v
    }
}

fn write_column(coords: &HermitianCoords, values: &[C64], matrix: &mut DMatrix<f64>, col: usize) {
    for (z, (i, j, o)) in values.iter().zip(coords.pairs()) {
        matrix[(o, col)] = z.re;
        if i != j {
            matrix[(o + 1, col)] = z.im;
        }
    }
}

/// Splits a Hermitian operator into its populations and coherences parts.
pub fn split_sectors(rho: &DenseOperator, space: &HilbertSpace) -> (DenseOperator, DenseOperator) {
    let d = space.dim();
    let mut pop = DenseOperator::zeros(d, d);
    let mut coh = DenseOperator::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            if Sector::Populations.contains(space, i, j) {
                pop[(i, j)] = rho[(i, j)];
            } else {
                coh[(i, j)] = rho[(i, j)];
            }
        }
    }
    (pop, coh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouvillian::{build, EmMode};
    use crate::operators::max_abs;
    use rand::rngs::StdRng;
    use rand::SeedableRng;
    use crate::params::{Conventions, ModelParams};

    fn random_hermitian(d: usize, seed: u64) -> DenseOperator {
        crate::operators::random_hermitian(d, &mut StdRng::seed_from_u64(seed))
    }

    #[test]
    fn encode_decode_round_trip() {
        let space = HilbertSpace::new(3).unwrap();
        let rho = random_hermitian(6, 7);
        let full = HermitianCoords::new(&space, Sector::Full);
        assert_eq!(full.len(), 36);
        assert!(max_abs(&(full.decode(&full.encode(&rho).unwrap()) - &rho)) < 1e-15);

        let pop = HermitianCoords::new(&space, Sector::Populations);
        let coh = HermitianCoords::new(&space, Sector::Coherences);
        assert_eq!(pop.len() + coh.len(), 36);
        assert_eq!(coh.len(), 18);
        let mut sum = pop.decode(&pop.encode(&rho).unwrap());
        coh.decode_into(&coh.encode(&rho).unwrap(), &mut sum);
        assert!(max_abs(&(sum - &rho)) < 1e-15);
        let tr: f64 = (0..6).map(|i| rho[(i, i)].re).sum();
        assert!((pop.trace_functional().dot(&pop.encode(&rho).unwrap()) - tr).abs() < 1e-14);
    }

    #[test]
    fn generator_matches_direct_application() {
        for mode in [EmMode::NonAdditive, EmMode::Additive] {
            let p = ModelParams::default().with_alpha_over_epsilon(0.2).with_fock_dim(4).with_t_em(20000.0);
            let l = build(mode, &p, &Conventions::default()).unwrap();
            let rho = random_hermitian(8, 11);
            let direct = l.apply(&rho);
            let scale = max_abs(&direct);

            let full = RealGenerator::build(&l, Sector::Full);
            let v = full.coords.encode(&rho).unwrap();
            let via_full = full.coords.decode(&full.apply(&v));
            assert!(max_abs(&(via_full - &direct)) < 1e-12 * scale);

            let pop = RealGenerator::build(&l, Sector::Populations);
            let coh = RealGenerator::build(&l, Sector::Coherences);
            let mut sum = pop.coords.decode(&pop.apply(&pop.coords.encode(&rho).unwrap()));
            coh.coords.decode_into(&coh.apply(&coh.coords.encode(&rho).unwrap()), &mut sum);
            assert!(max_abs(&(sum - &direct)) < 1e-12 * scale, "{mode:?}");
        }
    }

    #[test]
    fn sectors_are_invariant() {
        let p = ModelParams::default().with_alpha_over_epsilon(0.15).with_fock_dim(4).with_t_em(60000.0);
        let l = build(EmMode::NonAdditive, &p, &Conventions::default()).unwrap();
        let rho = random_hermitian(8, 3);
        let (pop, coh) = split_sectors(&rho, &l.system.space);
        let (pp, pc) = split_sectors(&l.apply(&pop), &l.system.space);
        let (cp, cc) = split_sectors(&l.apply(&coh), &l.system.space);
        assert!(max_abs(&pc) < 1e-12 * max_abs(&pp));
        assert!(max_abs(&cp) < 1e-12 * max_abs(&cc));
    }

    #[test]
    fn trace_row_of_generator_vanishes() {
        let p = ModelParams::default().with_alpha_over_epsilon(0.1).with_fock_dim(5).with_t_em(6000.0);
        let l = build(EmMode::NonAdditive, &p, &Conventions::default()).unwrap();
        let g = RealGenerator::build(&l, Sector::Populations);
        let t = g.coords.trace_functional();
        let row = g.matrix.tr_mul(&t);
        assert!(row.amax() < 1e-10 * g.matrix.amax());
    }
}
