//! Dense-matrix helpers shared by the oracles.
//!
//! Basis-state indexing follows the Kronecker convention: qubit 1 is the most
//! significant bit of a basis index, so `kron(A, B)` acts with `A` on qubit 1.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{BpError, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const DEFAULT_DENSE_LIMIT: usize = 10;

/// Largest qubit count for which dense `2ⁿ × 2ⁿ` matrices are built.
///
/// Reads `BP_DENSE_LIMIT` from the environment, falling back to 10.
pub fn dense_limit() -> usize {
    std::env::var("BP_DENSE_LIMIT")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_DENSE_LIMIT)
}

pub fn check_dense(what: &'static str, n: usize) -> Result<()> {
    let limit = dense_limit();
    if n > limit {
        return Err(BpError::DenseLimit { what, n, limit });
    }
    Ok(())
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Maps a qubit mask (bit q = qubit q+1) to a basis-index mask.
pub fn index_mask(n: usize, qubit_mask: u64) -> usize {
    if n == 0 {
        return 0;
    }
    (qubit_mask.reverse_bits() >> (64 - n)) as usize
}

/// Inverse of [`index_mask`].
pub fn qubit_mask(n: usize, index_mask: usize) -> u64 {
    if n == 0 {
        return 0;
    }
    (index_mask as u64).reverse_bits() >> (64 - n)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `Tr[A B]` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    assert_eq!(a.ncols(), b.nrows());
    assert_eq!(a.nrows(), b.ncols());
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    frobenius_norm(&(m - m.adjoint()))
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Qubit count of a square `2ⁿ × 2ⁿ` matrix.
pub fn qubits_of(m: &CMatrix) -> Result<usize> {
    let d = m.nrows();
    if m.ncols() != d || d == 0 || !d.is_power_of_two() {
        return Err(BpError::InvalidInput(format!(
            "expected a square 2^n x 2^n matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(d.trailing_zeros() as usize)
}

/// Expands a dense matrix in the unsigned Pauli basis.
///
/// Returns `(x_mask, z_mask, coefficient)` triples with
/// `M = Σ coefficient · σ(x, z)`, masks in qubit convention. The transform is a
/// Walsh–Hadamard sweep per X-pattern, `O(n·4ⁿ)` overall. Entries with
/// modulus below `prune` are dropped.
pub fn pauli_coefficients(m: &CMatrix, prune: f64) -> Result<Vec<(u64, u64, Complex64)>> {
    let n = qubits_of(m)?;
    check_dense("Pauli transform", n)?;
    let d = 1usize << n;
    let scale = 1.0 / d as f64;
    let mut out = Vec::new();
    let mut w = vec![Complex64::new(0.0, 0.0); d];
    for xi in 0..d {
        // σ(x,z) has entries σ[r, r^x] = i^{|x&z|} (-1)^{|(r^x)&z|}.
        // Tr[σ M] = Σ_r σ[r, r^x] M[r^x, r]; substitute c = r^x.
        for (cidx, slot) in w.iter_mut().enumerate() {
            *slot = m[(cidx, cidx ^ xi)];
        }
        walsh_hadamard(&mut w);
        for (zi, &val) in w.iter().enumerate() {
            let y = (xi & zi).count_ones();
            let coef = val * i_pow(y) * scale;
            if coef.norm() > prune {
                out.push((qubit_mask(n, xi), qubit_mask(n, zi), coef));
            }
        }
    }
    Ok(out)
}

fn walsh_hadamard(v: &mut [Complex64]) {
    let len = v.len();
    let mut h = 1;
    while h < len {
        for start in (0..len).step_by(2 * h) {
            for k in start..start + h {
                let a = v[k];
                let b = v[k + h];
                v[k] = a + b;
                v[k + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// `i^k` for any integer exponent.
pub fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Hermitian eigen-decomposition; eigenvalues ascending with matching columns.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), order.len(), |r, col| eig.eigenvectors[(r, order[col])]);
    (values, vectors)
}

pub fn outer(psi: &[Complex64]) -> CMatrix {
    let d = psi.len();
    CMatrix::from_fn(d, d, |r, col| psi[r] * psi[col].conj())
}
