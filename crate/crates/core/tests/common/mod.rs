#![allow(dead_code)]

use bp_core::dense::{c, CMatrix};
use bp_core::majorana::parity_operator;
use bp_core::PauliSumOperator;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn ginibre(n: usize, rng: &mut TestRng) -> CMatrix {
    let d = 1 << n;
    CMatrix::from_fn(d, d, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

pub fn random_operator(n: usize, rng: &mut TestRng) -> PauliSumOperator {
    PauliSumOperator::from_dense(&ginibre(n, rng)).unwrap()
}

pub fn random_hermitian(n: usize, rng: &mut TestRng) -> PauliSumOperator {
    let g = ginibre(n, rng);
    PauliSumOperator::from_dense(&((&g + g.adjoint()) * c(0.5, 0.0))).unwrap()
}

pub fn random_density(n: usize, rng: &mut TestRng) -> PauliSumOperator {
    let g = ginibre(n, rng);
    let m = &g * g.adjoint();
    let tr = m.trace();
    PauliSumOperator::from_dense(&(m / tr)).unwrap()
}

pub fn random_pure_state(n: usize, rng: &mut TestRng) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..1 << n).map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// `(M + P M P)/2`, which commutes with the parity operator.
pub fn parity_symmetrize(m: &PauliSumOperator) -> PauliSumOperator {
    let p = PauliSumOperator::from_term(&parity_operator(m.n()).unwrap(), c(1.0, 0.0));
    let conj = &(&p * m) * &p;
    (m + &conj).scale(c(0.5, 0.0))
}

pub fn random_fermionic_density(n: usize, rng: &mut TestRng) -> PauliSumOperator {
    parity_symmetrize(&random_density(n, rng))
}
