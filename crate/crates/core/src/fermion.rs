//! Two-point contraction matrices and the linear entropy of the Dirac
//! contraction matrix.
//!
//! With `d_i = (c_{2i−1} + i c_{2i})/2` and `γ = (d_1, …, d_n, d_1†, …, d_n†)ᵗ`,
//! the Majorana matrix is `C = i(⟨c cᵗ⟩ − 𝟙)` and the Dirac matrix is
//! `D = 𝟙 − ⟨γ γ†⟩`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::dense::{self, c, CMatrix};
use crate::error::{BpError, Result};
use crate::majorana::{majorana_unchecked, parity_operator};
use crate::modules::kappa_purity;
use crate::operator::PauliSumOperator;

/// Slack for eigenvalue and entropy range checks.
pub const RANGE_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct ContractionMatrices {
    /// Majorana contraction matrix, `2n × 2n`.
    pub c: CMatrix,
    /// Dirac contraction matrix, `2n × 2n`.
    pub d: CMatrix,
}

impl ContractionMatrices {
    pub fn n(&self) -> usize {
        self.c.nrows() / 2
    }

    /// Eigenvalues of `D`, ascending.
    pub fn d_eigenvalues(&self) -> Vec<f64> {
        dense::hermitian_eigen(&self.d).0
    }
}

/// `γ = W c`.
pub fn dirac_transform(n: usize) -> CMatrix {
    let mut w = CMatrix::zeros(2 * n, 2 * n);
    for a in 0..n {
        w[(a, 2 * a)] = c(0.5, 0.0);
        w[(a, 2 * a + 1)] = c(0.0, 0.5);
        w[(n + a, 2 * a)] = c(0.5, 0.0);
        w[(n + a, 2 * a + 1)] = c(0.0, -0.5);
    }
    w
}

/// `Ω = ⊕ᵢ (1/√2)[[1, i], [1, −i]]`, so that `(d_1, d_1†, d_2, …)ᵗ = Ω c / √2`.
pub fn omega(n: usize) -> CMatrix {
    let s = 0.5f64.sqrt();
    let mut m = CMatrix::zeros(2 * n, 2 * n);
    for a in 0..n {
        m[(2 * a, 2 * a)] = c(s, 0.0);
        m[(2 * a, 2 * a + 1)] = c(0.0, s);
        m[(2 * a + 1, 2 * a)] = c(s, 0.0);
        m[(2 * a + 1, 2 * a + 1)] = c(0.0, -s);
    }
    m
}

/// Permutation taking `(d_1, …, d_n, d_1†, …, d_n†)` to `(d_1, d_1†, d_2, …)`.
pub fn interleave(n: usize) -> CMatrix {
    let mut m = CMatrix::zeros(2 * n, 2 * n);
    for a in 0..n {
        m[(2 * a, a)] = c(1.0, 0.0);
        m[(2 * a + 1, n + a)] = c(1.0, 0.0);
    }
    m
}

fn check_state(rho: &PauliSumOperator) -> Result<()> {
    let n = rho.n();
    let defect = rho.hermiticity_defect();
    if defect > RANGE_TOL {
        return Err(BpError::InvalidInput(format!("state is not Hermitian (defect {defect:.3e})")));
    }
    let tr = rho.trace().re;
    if (tr - 1.0).abs() > 1e-8 {
        return Err(BpError::InvalidInput(format!("state has trace {tr}, expected 1")));
    }
    if n <= dense::dense_limit() {
        let (eigs, _) = dense::hermitian_eigen(&rho.to_dense()?);
        if let Some(&low) = eigs.first() {
            if low < -RANGE_TOL {
                return Err(BpError::InvalidInput(format!("state is not positive (eigenvalue {low:.3e})")));
            }
        }
    }
    Ok(())
}

/// `C` from Pauli expectation values of Majorana pairs, and `D = ½𝟙 + i W C W†`.
pub fn contraction_matrices(rho: &PauliSumOperator) -> Result<ContractionMatrices> {
    let n = rho.n();
    dense::check_dense("contraction matrices", n)?;
    check_state(rho)?;
    let d = rho.dim();
    let mut cm = CMatrix::zeros(2 * n, 2 * n);
    for mu in 1..=2 * n {
        for nu in mu + 1..=2 * n {
            let pair = majorana_unchecked(n, mu).mul_unchecked(&majorana_unchecked(n, nu));
            // Tr[ρ i^k σ] = i^k d ρ_σ
            let expect = pair.phase_factor() * rho.coefficient(pair.x_mask(), pair.z_mask()) * d;
            let entry = Complex64::i() * expect;
            cm[(mu - 1, nu - 1)] = entry;
            cm[(nu - 1, mu - 1)] = -entry;
        }
    }
    let w = dirac_transform(n);
    let dm = CMatrix::identity(2 * n, 2 * n).scale(0.5) + (&w * &cm * w.adjoint()) * Complex64::i();
    Ok(ContractionMatrices { c: cm, d: dm })
}

/// `‖C − iΩ† Π(𝟙 − 2D)Πᵗ Ω‖_F`, with `Π` the interleaving permutation.
pub fn cd_relation_defect(m: &ContractionMatrices) -> f64 {
    let n = m.n();
    let om = omega(n);
    let pi = interleave(n);
    let one = CMatrix::identity(2 * n, 2 * n);
    let inner = &pi * (&one - m.d.scale(2.0)) * pi.transpose();
    let rebuilt = om.adjoint() * inner * &om * Complex64::i();
    dense::frobenius_norm(&(&m.c - rebuilt))
}

/// `S₂ = 2 Tr[D(𝟙 − D)]`.
pub fn linear_entropy(d: &CMatrix) -> Result<f64> {
    if d.nrows() != d.ncols() || d.nrows() % 2 != 0 {
        return Err(BpError::InvalidInput(format!("Dirac matrix must be 2n × 2n, got {} × {}", d.nrows(), d.ncols())));
    }
    let n = (d.nrows() / 2) as f64;
    let one = CMatrix::identity(d.nrows(), d.ncols());
    let s2 = 2.0 * dense::trace_product(d, &(one - d)).re;
    if !(-RANGE_TOL..=n + RANGE_TOL).contains(&s2) {
        return Err(BpError::InvalidInput(format!("linear entropy {s2} outside [0, {n}]")));
    }
    Ok(s2)
}

/// `(n − S₂)/d`, the purity of `ρ` in the span of Majorana pairs when `ρ` is fermionic.
pub fn g_purity_via_entropy(rho: &PauliSumOperator) -> Result<f64> {
    let m = contraction_matrices(rho)?;
    let s2 = linear_entropy(&m.d)?;
    Ok((rho.n() as f64 - s2) / rho.dim())
}

#[derive(Clone, Debug, Serialize)]
pub struct FermionReport {
    #[serde(rename = "S2")]
    pub s2: f64,
    pub g_purity: f64,
    #[serde(rename = "D_eigenvalues")]
    pub d_eigenvalues: Vec<f64>,
    /// Whether `ρ` commutes with the parity operator.
    pub fermionic: bool,
}

pub fn fermion_report(rho: &PauliSumOperator) -> Result<FermionReport> {
    let m = contraction_matrices(rho)?;
    let s2 = linear_entropy(&m.d)?;
    let n = rho.n();
    let comm = rho.commutator_norm_with(&parity_operator(n)?)?;
    Ok(FermionReport {
        s2,
        g_purity: (n as f64 - s2) / rho.dim(),
        d_eigenvalues: m.d_eigenvalues(),
        fermionic: comm < RANGE_TOL * rho.norm_sqr().sqrt().max(1.0),
    })
}

/// Difference between the entropy route and the direct degree-2 purity.
pub fn bridge_defect(rho: &PauliSumOperator) -> Result<f64> {
    Ok((g_purity_via_entropy(rho)? - kappa_purity(rho, 2)?).abs())
}

/// Real antisymmetry defect `max |C + Cᵗ|, max |Im C|`.
pub fn antisymmetry_defect(cm: &CMatrix) -> f64 {
    let sym: DMatrix<Complex64> = cm + cm.transpose();
    let asym = sym.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let imag = cm.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    asym.max(imag)
}
