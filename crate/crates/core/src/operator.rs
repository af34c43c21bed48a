//! Sparse operators as complex combinations of unsigned Pauli strings.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dense::{self, CMatrix};
use crate::error::{ensure_same_n, BpError, Result};
use crate::pauli::PauliTerm;

/// Coefficients with modulus at or below this are dropped.
pub const PRUNE_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct PauliSumOperator {
    n: usize,
    /// Keyed by `(x_mask, z_mask)` of the unsigned string.
    terms: BTreeMap<(u64, u64), Complex64>,
}

impl PauliSumOperator {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_term(&PauliTerm::identity(n), Complex64::new(1.0, 0.0))
    }

    /// `coef · term`, with the term's phase folded into the coefficient.
    pub fn from_term(term: &PauliTerm, coef: Complex64) -> Self {
        let mut op = Self::zero(term.n());
        op.add_term(term, coef);
        op
    }

    pub fn from_terms<'a>(n: usize, terms: impl IntoIterator<Item = (&'a PauliTerm, Complex64)>) -> Result<Self> {
        let mut op = Self::zero(n);
        for (t, c) in terms {
            ensure_same_n(n, t.n())?;
            op.add_term(t, c);
        }
        Ok(op)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> f64 {
        (self.n as f64).exp2()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `coef · term` in place.
    pub fn add_term(&mut self, term: &PauliTerm, coef: Complex64) {
        debug_assert_eq!(term.n(), self.n);
        let value = coef * term.phase_factor();
        let key = (term.x_mask(), term.z_mask());
        let entry = self.terms.entry(key).or_insert(Complex64::new(0.0, 0.0));
        *entry += value;
        if entry.norm() <= PRUNE_TOL {
            self.terms.remove(&key);
        }
    }

    /// Coefficient of the unsigned string `(x, z)`.
    pub fn coefficient(&self, x: u64, z: u64) -> Complex64 {
        self.terms.get(&(x, z)).copied().unwrap_or_default()
    }

    /// Iterates `(unsigned string, coefficient)` in mask order.
    pub fn iter(&self) -> impl Iterator<Item = (PauliTerm, Complex64)> + '_ {
        self.terms.iter().map(move |(&(x, z), &c)| (PauliTerm::from_raw(self.n, x, z, 0), c))
    }

    /// Terms sorted by their text label.
    pub fn sorted_terms(&self) -> Vec<(PauliTerm, Complex64)> {
        let mut v: Vec<_> = self.iter().collect();
        v.sort_by(|a, b| a.0.cmp_label(&b.0));
        v
    }

    pub fn prune(&mut self, tol: f64) {
        self.terms.retain(|_, c| c.norm() > tol);
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= s;
        }
        out.prune(PRUNE_TOL);
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.conj();
        }
        out
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        ensure_same_n(self.n, other.n)?;
        let mut out = self.clone();
        for (t, c) in other.iter() {
            out.add_term(&t, c);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Operator product `self · other`.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        ensure_same_n(self.n, other.n)?;
        let mut out = Self::zero(self.n);
        for (a, ca) in self.iter() {
            for (b, cb) in other.iter() {
                out.add_term(&a.mul_unchecked(&b), ca * cb);
            }
        }
        Ok(out)
    }

    /// Left multiplication by a single Pauli term.
    pub fn left_mul_term(&self, term: &PauliTerm) -> Result<Self> {
        ensure_same_n(self.n, term.n())?;
        let mut out = Self::zero(self.n);
        for (b, cb) in self.iter() {
            out.add_term(&term.mul_unchecked(&b), cb);
        }
        Ok(out)
    }

    pub fn trace(&self) -> Complex64 {
        self.coefficient(0, 0) * self.dim()
    }

    /// `Tr[self† other]`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        ensure_same_n(self.n, other.n)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, a) in &self.terms {
            if let Some(b) = other.terms.get(k) {
                acc += a.conj() * b;
            }
        }
        Ok(acc * self.dim())
    }

    /// `Tr[self · other]`.
    pub fn trace_product(&self, other: &Self) -> Result<Complex64> {
        self.adjoint().inner(other)
    }

    /// `Tr[M† M]`.
    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum::<f64>() * self.dim()
    }

    /// Largest imaginary part among coefficients; zero iff Hermitian.
    pub fn hermiticity_defect(&self) -> f64 {
        self.terms.values().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Frobenius norm of `[self, term]`.
    pub fn commutator_norm_with(&self, term: &PauliTerm) -> Result<f64> {
        ensure_same_n(self.n, term.n())?;
        let mut out = Self::zero(self.n);
        for (b, cb) in self.iter() {
            if !b.commutes_unchecked(term) {
                out.add_term(&b.mul_unchecked(term), cb * 2.0);
            }
        }
        Ok(out.norm_sqr().sqrt())
    }

    pub fn to_dense(&self) -> Result<CMatrix> {
        dense::check_dense("PauliSumOperator::to_dense", self.n)?;
        let d = 1usize << self.n;
        let mut m = CMatrix::zeros(d, d);
        for (t, c) in self.iter() {
            for col in 0..d {
                let (row, f) = t.act_on_basis(col);
                m[(row, col)] += c * f;
            }
        }
        Ok(m)
    }

    pub fn from_dense(m: &CMatrix) -> Result<Self> {
        let n = dense::qubits_of(m)?;
        let mut op = Self::zero(n);
        for (x, z, c) in dense::pauli_coefficients(m, PRUNE_TOL)? {
            op.terms.insert((x, z), c);
        }
        Ok(op)
    }

    /// `|ψ⟩⟨ψ|` for a state vector in the Kronecker index convention.
    pub fn from_state(psi: &[Complex64]) -> Result<Self> {
        Self::from_dense(&dense::outer(psi))
    }

    pub fn to_json(&self) -> OperatorFile {
        OperatorFile::Terms {
            n: self.n,
            terms: self
                .sorted_terms()
                .into_iter()
                .map(|(t, c)| TermEntry { pauli: t.label(), re: c.re, im: c.im })
                .collect(),
        }
    }

    pub fn from_json(file: &OperatorFile) -> Result<Self> {
        match file {
            OperatorFile::Terms { n, terms } => {
                let mut op = Self::zero(*n);
                for entry in terms {
                    let t: PauliTerm = entry.pauli.parse()?;
                    ensure_same_n(*n, t.n())?;
                    op.add_term(&t, Complex64::new(entry.re, entry.im));
                }
                Ok(op)
            }
            OperatorFile::Dense { n, dense_re, dense_im } => {
                let d = 1usize << n;
                if dense_re.len() != d || dense_re.iter().any(|r| r.len() != d) {
                    return Err(BpError::InvalidInput(format!("dense_re must be {d}x{d}")));
                }
                let im_ok = match dense_im {
                    None => true,
                    Some(rows) => rows.len() == d && rows.iter().all(|r| r.len() == d),
                };
                if !im_ok {
                    return Err(BpError::InvalidInput(format!("dense_im must be {d}x{d}")));
                }
                let m = CMatrix::from_fn(d, d, |r, col| {
                    let im = dense_im.as_ref().map_or(0.0, |rows| rows[r][col]);
                    Complex64::new(dense_re[r][col], im)
                });
                Self::from_dense(&m)
            }
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: OperatorFile = serde_json::from_str(&text)?;
        Self::from_json(&file)
    }
}

/// JSON layout for operators, either as Pauli terms or as a dense matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperatorFile {
    Terms { n: usize, terms: Vec<TermEntry> },
    Dense { n: usize, dense_re: Vec<Vec<f64>>, dense_im: Option<Vec<Vec<f64>>> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermEntry {
    pub pauli: String,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl Add for &PauliSumOperator {
    type Output = PauliSumOperator;

    fn add(self, rhs: &PauliSumOperator) -> PauliSumOperator {
        self.try_add(rhs).expect("qubit count mismatch in operator sum")
    }
}

impl Sub for &PauliSumOperator {
    type Output = PauliSumOperator;

    fn sub(self, rhs: &PauliSumOperator) -> PauliSumOperator {
        self.try_sub(rhs).expect("qubit count mismatch in operator difference")
    }
}

impl Mul for &PauliSumOperator {
    type Output = PauliSumOperator;

    fn mul(self, rhs: &PauliSumOperator) -> PauliSumOperator {
        self.try_mul(rhs).expect("qubit count mismatch in operator product")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::c;

    fn p(s: &str) -> PauliTerm {
        s.parse().unwrap()
    }

    #[test]
    fn phase_folds_into_coefficient() {
        let op = PauliSumOperator::from_term(&p("-iZX"), c(2.0, 0.0));
        let t = &p("ZX");
        assert_eq!(op.coefficient(t.x_mask(), t.z_mask()), c(0.0, -2.0));
    }

    #[test]
    fn cancellation_prunes() {
        let a = PauliSumOperator::from_term(&p("XY"), c(1.0, 0.0));
        let b = PauliSumOperator::from_term(&p("-XY"), c(1.0, 0.0));
        assert!((&a + &b).is_empty());
    }

    #[test]
    fn product_and_trace() {
        let x = PauliSumOperator::from_term(&p("X"), c(1.0, 0.0));
        let y = PauliSumOperator::from_term(&p("Y"), c(1.0, 0.0));
        let xy = &x * &y;
        assert_eq!(xy.coefficient(0, 1), c(0.0, 1.0));
        assert_eq!(x.trace_product(&x).unwrap(), c(2.0, 0.0));
        assert_eq!(xy.trace(), c(0.0, 0.0));
    }

    #[test]
    fn dense_round_trip() {
        let mut op = PauliSumOperator::zero(3);
        op.add_term(&p("XYZ"), c(0.3, -0.1));
        op.add_term(&p("IIZ"), c(1.5, 0.0));
        op.add_term(&p("+iYYI"), c(0.2, 0.0));
        let back = PauliSumOperator::from_dense(&op.to_dense().unwrap()).unwrap();
        for (t, coef) in op.iter() {
            assert!((back.coefficient(t.x_mask(), t.z_mask()) - coef).norm() < 1e-14);
        }
        assert_eq!(back.len(), op.len());
    }

    #[test]
    fn json_round_trip() {
        let mut op = PauliSumOperator::zero(2);
        op.add_term(&p("ZI"), c(0.5, 0.0));
        op.add_term(&p("XY"), c(0.0, 0.25));
        let text = serde_json::to_string(&op.to_json()).unwrap();
        let parsed: OperatorFile = serde_json::from_str(&text).unwrap();
        assert_eq!(PauliSumOperator::from_json(&parsed).unwrap(), op);
    }

    #[test]
    fn dense_json_input() {
        let text = r#"{"n":1,"dense_re":[[1,0],[0,0]]}"#;
        let parsed: OperatorFile = serde_json::from_str(text).unwrap();
        let op = PauliSumOperator::from_json(&parsed).unwrap();
        assert!((op.coefficient(0, 0) - c(0.5, 0.0)).norm() < 1e-15);
        assert!((op.coefficient(0, 1) - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn hermiticity() {
        let op = PauliSumOperator::from_term(&p("+iZ"), c(1.0, 0.0));
        assert!(!op.is_hermitian(1e-12));
        assert!(PauliSumOperator::from_term(&p("Y"), c(1.0, 0.0)).is_hermitian(1e-12));
    }

    #[test]
    fn mismatched_sum_is_an_error() {
        let a = PauliSumOperator::identity(1);
        let b = PauliSumOperator::identity(2);
        assert!(a.try_add(&b).is_err());
        assert!(a.inner(&b).is_err());
    }
}
