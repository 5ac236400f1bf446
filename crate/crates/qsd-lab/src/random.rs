//! Seeded random constructions: Ginibre density operators, Haar unitaries,
//! random pure states. Everything is driven by an explicit seed so property
//! suites and scenario runs are reproducible.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::operator::ComplexMatrix;
use crate::states::{DensityOperator, Povm};

/// Derives independent deterministic generators from one base seed.
pub struct SeedStream {
    base: u64,
    counter: u64,
}

impl SeedStream {
    pub fn new(base: u64) -> Self {
        SeedStream { base, counter: 0 }
    }

    /// Fresh generator; the k-th call always yields the same stream for a
    /// given base seed, independent of what earlier generators consumed.
    pub fn rng(&mut self) -> ChaCha8Rng {
        self.counter += 1;
        ChaCha8Rng::seed_from_u64(
            self.base
                .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                .wrapping_add(self.counter),
        )
    }
}

/// Standard normal via Box-Muller.
pub fn standard_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Complex standard normal (independent N(0,1) real and imaginary parts).
pub fn complex_normal(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(standard_normal(rng), standard_normal(rng))
}

fn complex_normal_vec(dim: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    (0..dim).map(|_| complex_normal(rng)).collect()
}

/// Random Hermitian matrix (G + G†)/2 with Ginibre G.
pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, |_, _| complex_normal(rng));
    g.hermitian_part()
}

/// Normalized Haar-like random pure state.
pub fn random_pure_state(dim: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    let v = complex_normal_vec(dim, rng);
    let norm = crate::operator::vec_norm(&v);
    v.into_iter().map(|z| z / norm).collect()
}

/// Ginibre construction ρ = GG†/Tr{GG†} with `rank` independent columns.
pub fn random_density(dim: usize, rank: usize, rng: &mut impl Rng) -> DensityOperator {
    assert!(rank >= 1);
    let mut m = ComplexMatrix::zeros(dim);
    for _ in 0..rank {
        let col = complex_normal_vec(dim, rng);
        m.add_scaled_outer(1.0, &col);
    }
    let tr = m.trace().re;
    DensityOperator::trusted(m.scale_re(1.0 / tr))
}

/// Haar-distributed unitary: modified Gram-Schmidt on a Ginibre matrix with
/// the positive-diagonal convention.
pub fn haar_unitary(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let mut cols: Vec<Vec<Complex64>> = (0..dim).map(|_| complex_normal_vec(dim, rng)).collect();
    for k in 0..dim {
        let (done, rest) = cols.split_at_mut(k);
        let col = &mut rest[0];
        for prev in done.iter() {
            let proj = crate::operator::inner(prev, col);
            for (x, y) in col.iter_mut().zip(prev) {
                *x -= proj * y;
            }
        }
        let norm = crate::operator::vec_norm(col);
        for z in col.iter_mut() {
            *z /= norm;
        }
    }
    ComplexMatrix::from_fn(dim, |i, j| cols[j][i])
}

/// Random projective POVM: the rank-1 projectors onto the columns of a Haar
/// unitary.
pub fn random_projective_povm(dim: usize, rng: &mut impl Rng) -> Povm {
    let u = haar_unitary(dim, rng);
    let projectors: Vec<ComplexMatrix> = (0..dim)
        .map(|k| {
            let col: Vec<Complex64> = (0..dim).map(|i| u[(i, k)]).collect();
            crate::operator::outer(&col, &col)
        })
        .collect();
    Povm::new(projectors).expect("projectors onto an orthonormal basis resolve the identity")
}
