//! Shared helpers for unit tests and the verification suite.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dense::CMatrix;
use crate::pauli::{Pauli, PauliString};
use crate::statevec::StateVector;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_state<R: Rng>(n: usize, rng: &mut R) -> StateVector {
    let amps: Vec<Complex64> = (0..1usize << n)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let mut s = StateVector::from_amplitudes(n, amps).unwrap();
    s.normalize();
    s
}

pub fn random_string<R: Rng>(n: usize, rng: &mut R) -> PauliString {
    let letters = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    let sites: Vec<(usize, Pauli)> = (0..n)
        .map(|i| (i, letters[rng.random_range(0..4)]))
        .collect();
    PauliString::from_sites(n, &sites)
}

/// Dense matrix of an arbitrary state transformation, built column by
/// column from basis states.
pub fn matrix_of<F>(n: usize, mut apply: F) -> CMatrix
where
    F: FnMut(&mut StateVector),
{
    let dim = 1usize << n;
    let mut m = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut s = StateVector::basis(n, col as u64);
        apply(&mut s);
        for row in 0..dim {
            m[(row, col)] = s.amplitudes()[row];
        }
    }
    m
}
