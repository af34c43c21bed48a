//! Named input states and observables used by the benchmark families.
//!
//! State vectors are indexed with qubit 1 as the most significant bit.

use num_complex::Complex64;

use crate::dense::c;
use crate::error::{BpError, Result};
use crate::majorana::parity_operator;
use crate::operator::PauliSumOperator;
use crate::pauli::{Pauli1, PauliTerm};

/// Largest qubit count for which named states are built as vectors.
pub const STATE_LIMIT: usize = 24;

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > STATE_LIMIT {
        return Err(BpError::OutOfRange(format!("state vectors need 1 <= n <= {STATE_LIMIT}, got {n}")));
    }
    Ok(())
}

/// `|0…0⟩`.
pub fn computational_zero(n: usize) -> Result<Vec<Complex64>> {
    check_n(n)?;
    let mut psi = vec![c(0.0, 0.0); 1 << n];
    psi[0] = c(1.0, 0.0);
    Ok(psi)
}

/// `|ψ(τ)⟩^{⊗n/4}` with `|ψ(τ)⟩ = (|0000⟩ + |0011⟩ + |1100⟩ + e^{iτ}|1111⟩)/2`.
pub fn magic_state(n: usize, tau: f64) -> Result<Vec<Complex64>> {
    check_n(n)?;
    if n % 4 != 0 {
        return Err(BpError::InvalidInput(format!("magic state needs n divisible by 4, got {n}")));
    }
    let block = [
        (0b0000usize, c(0.5, 0.0)),
        (0b0011, c(0.5, 0.0)),
        (0b1100, c(0.5, 0.0)),
        (0b1111, Complex64::from_polar(0.5, tau)),
    ];
    let mut psi = vec![c(1.0, 0.0)];
    for _ in 0..n / 4 {
        let mut next = vec![c(0.0, 0.0); psi.len() * 16];
        for (i, a) in psi.iter().enumerate() {
            for &(j, b) in &block {
                next[i * 16 + j] = a * b;
            }
        }
        psi = next;
    }
    Ok(psi)
}

/// `α|0…0⟩ + β|10…0⟩` with the flip on qubit 1.
pub fn superposition(n: usize, alpha: Complex64, beta: Complex64) -> Result<Vec<Complex64>> {
    check_n(n)?;
    let norm = alpha.norm_sqr() + beta.norm_sqr();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(BpError::InvalidInput(format!("|α|² + |β|² = {norm}, expected 1")));
    }
    let mut psi = vec![c(0.0, 0.0); 1 << n];
    psi[0] = alpha;
    psi[1 << (n - 1)] = beta;
    Ok(psi)
}

pub fn density(psi: &[Complex64]) -> Result<PauliSumOperator> {
    PauliSumOperator::from_state(psi)
}

/// `Z_1 ⋯ Z_m`.
pub fn z_string(n: usize, m: usize) -> Result<PauliSumOperator> {
    if m == 0 || m > n {
        return Err(BpError::OutOfRange(format!("Z-string length {m} outside 1..={n}")));
    }
    let mask = (0..m).fold(0u64, |acc, q| acc | 1 << q);
    Ok(PauliSumOperator::from_term(&PauliTerm::new(n, 0, mask, 0)?, c(1.0, 0.0)))
}

pub fn z(n: usize, qubit: usize) -> Result<PauliSumOperator> {
    Ok(PauliSumOperator::from_term(&PauliTerm::single(n, qubit, Pauli1::Z)?, c(1.0, 0.0)))
}

pub fn x(n: usize, qubit: usize) -> Result<PauliSumOperator> {
    Ok(PauliSumOperator::from_term(&PauliTerm::single(n, qubit, Pauli1::X)?, c(1.0, 0.0)))
}

/// `Z^{⊗n}`.
pub fn parity(n: usize) -> Result<PauliSumOperator> {
    Ok(PauliSumOperator::from_term(&parity_operator(n)?, c(1.0, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn magic_state_is_normalized_and_gaussian_at_zero() {
        for n in [4, 8] {
            let psi = magic_state(n, 1.3).unwrap();
            let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-14);
        }
        let psi = magic_state(4, 0.0).unwrap();
        assert_eq!(psi.iter().filter(|z| z.norm() > 0.0).count(), 4);
        assert!(magic_state(6, 0.0).is_err());
    }

    #[test]
    fn superposition_flips_first_qubit() {
        let s = 0.5f64.sqrt();
        let psi = superposition(3, c(s, 0.0), c(s, 0.0)).unwrap();
        assert!((psi[4].re - s).abs() < 1e-15);
        assert!(superposition(3, c(1.0, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn observables_have_expected_labels() {
        let o = z_string(4, 2).unwrap();
        assert_eq!(o.sorted_terms()[0].0.label(), "ZZII");
        assert_eq!(x(3, 2).unwrap().sorted_terms()[0].0.label(), "IXI");
        assert!(z_string(3, 4).is_err());
    }
}
