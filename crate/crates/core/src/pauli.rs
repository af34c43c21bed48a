//! Scaled Pauli strings in symplectic form.
//!
//! A [`PauliTerm`] is `i^phase · σ` where `σ` is an unsigned tensor product of
//! `I, X, Y, Z`. Bit `q` of each mask refers to qubit `q + 1`, i.e. the
//! leftmost factor in tensor notation and the leftmost character of the text
//! form. The unsigned string is `σ = ⊗_q i^{x_q z_q} X^{x_q} Z^{z_q}`, so a set
//! pair of bits is `Y`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_complex::Complex64;

use crate::dense::{self, CMatrix};
use crate::error::{ensure_same_n, BpError, Result};

pub const MAX_QUBITS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli1 {
    I,
    X,
    Y,
    Z,
}

impl Pauli1 {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli1::I => (false, false),
            Pauli1::X => (true, false),
            Pauli1::Y => (true, true),
            Pauli1::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli1::I,
            (true, false) => Pauli1::X,
            (true, true) => Pauli1::Y,
            (false, true) => Pauli1::Z,
        }
    }

    fn letter(self) -> char {
        match self {
            Pauli1::I => 'I',
            Pauli1::X => 'X',
            Pauli1::Y => 'Y',
            Pauli1::Z => 'Z',
        }
    }

    fn rank(self) -> u8 {
        self as u8
    }
}

pub(crate) fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliTerm {
    n: usize,
    x: u64,
    z: u64,
    phase: u8,
}

impl PauliTerm {
    pub fn new(n: usize, x: u64, z: u64, phase: u8) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(BpError::OutOfRange(format!("qubit count {n} outside 1..={MAX_QUBITS}")));
        }
        let mask = low_mask(n);
        if x & !mask != 0 || z & !mask != 0 {
            return Err(BpError::OutOfRange(format!("masks use bits beyond n = {n}")));
        }
        Ok(Self { n, x, z, phase: phase % 4 })
    }

    pub(crate) fn from_raw(n: usize, x: u64, z: u64, phase: u8) -> Self {
        debug_assert!(x & !low_mask(n) == 0 && z & !low_mask(n) == 0);
        Self { n, x, z, phase: phase & 3 }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_raw(n, 0, 0, 0)
    }

    /// Single-qubit Pauli on `qubit` (1-based).
    pub fn single(n: usize, qubit: usize, p: Pauli1) -> Result<Self> {
        if qubit == 0 || qubit > n {
            return Err(BpError::OutOfRange(format!("qubit {qubit} outside 1..={n}")));
        }
        let (x, z) = p.bits();
        let bit = 1u64 << (qubit - 1);
        Self::new(n, if x { bit } else { 0 }, if z { bit } else { 0 }, 0)
    }

    pub fn from_letters(letters: &[Pauli1]) -> Result<Self> {
        let mut x = 0;
        let mut z = 0;
        for (q, p) in letters.iter().enumerate() {
            let (bx, bz) = p.bits();
            x |= (bx as u64) << q;
            z |= (bz as u64) << q;
        }
        Self::new(letters.len(), x, z, 0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn phase_factor(&self) -> Complex64 {
        dense::i_pow(self.phase as u32)
    }

    pub fn unsigned(&self) -> Self {
        Self { phase: 0, ..*self }
    }

    pub fn with_phase(&self, phase: u8) -> Self {
        Self { phase: phase & 3, ..*self }
    }

    /// Multiplies by `i^k`.
    pub fn times_i_pow(&self, k: u8) -> Self {
        Self { phase: (self.phase + k) & 3, ..*self }
    }

    pub fn negate(&self) -> Self {
        self.times_i_pow(2)
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// Factor on `qubit` (1-based).
    pub fn letter(&self, qubit: usize) -> Pauli1 {
        let bit = 1u64 << (qubit - 1);
        Pauli1::from_bits(self.x & bit != 0, self.z & bit != 0)
    }

    pub fn letters(&self) -> Vec<Pauli1> {
        (1..=self.n).map(|q| self.letter(q)).collect()
    }

    /// Unsigned string as text, without the phase prefix.
    pub fn label(&self) -> String {
        self.letters().into_iter().map(Pauli1::letter).collect()
    }

    /// Hermitian conjugate; unsigned strings are Hermitian, so only the phase flips.
    pub fn adjoint(&self) -> Self {
        Self { phase: (4 - self.phase) & 3, ..*self }
    }

    /// Dense packing `x | z << n`, used to enumerate all `4ⁿ` strings.
    pub fn packed_index(&self) -> usize {
        debug_assert!(self.n <= 31);
        (self.x | (self.z << self.n)) as usize
    }

    pub fn from_packed_index(n: usize, index: usize) -> Self {
        let m = low_mask(n);
        Self::from_raw(n, index as u64 & m, (index as u64 >> n) & m, 0)
    }

    /// Exact product `self · other`.
    pub fn multiply(&self, other: &PauliTerm) -> Result<PauliTerm> {
        ensure_same_n(self.n, other.n)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &PauliTerm) -> PauliTerm {
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        // σ = i^{|x&z|} X^x Z^z; moving Z^{z1} past X^{x2} costs (-1)^{|z1&x2|}.
        let e = self.phase as u32
            + other.phase as u32
            + (self.x & self.z).count_ones()
            + (other.x & other.z).count_ones()
            + 2 * (self.z & other.x).count_ones()
            + 3 * (x & z).count_ones();
        PauliTerm { n: self.n, x, z, phase: (e & 3) as u8 }
    }

    /// True iff the two strings commute; parity of the symplectic form.
    pub fn commutes(&self, other: &PauliTerm) -> Result<bool> {
        ensure_same_n(self.n, other.n)?;
        Ok(self.commutes_unchecked(other))
    }

    pub(crate) fn commutes_unchecked(&self, other: &PauliTerm) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    /// `(1/2)[self, other]`, which is `self · other` when the strings anticommute.
    pub fn half_commutator(&self, other: &PauliTerm) -> Result<Option<PauliTerm>> {
        ensure_same_n(self.n, other.n)?;
        Ok(self.half_commutator_unchecked(other))
    }

    pub(crate) fn half_commutator_unchecked(&self, other: &PauliTerm) -> Option<PauliTerm> {
        if self.commutes_unchecked(other) {
            None
        } else {
            Some(self.mul_unchecked(other))
        }
    }

    /// Action on a computational basis state: `σ|b⟩ = factor · |b'⟩`.
    ///
    /// `b` uses the dense (Kronecker) index convention.
    pub fn act_on_basis(&self, b: usize) -> (usize, Complex64) {
        let xi = dense::index_mask(self.n, self.x);
        let zi = dense::index_mask(self.n, self.z);
        let e = self.phase as u32 + (self.x & self.z).count_ones() + 2 * (b & zi).count_ones();
        (b ^ xi, dense::i_pow(e))
    }

    /// Exact `2ⁿ × 2ⁿ` matrix, including the phase.
    pub fn to_dense(&self) -> Result<CMatrix> {
        dense::check_dense("PauliTerm::to_dense", self.n)?;
        let d = 1usize << self.n;
        let mut m = CMatrix::zeros(d, d);
        for col in 0..d {
            let (row, f) = self.act_on_basis(col);
            m[(row, col)] = f;
        }
        Ok(m)
    }

    /// Lexicographic order of the text labels, with `I < X < Y < Z` and
    /// qubit 1 most significant.
    pub fn cmp_label(&self, other: &PauliTerm) -> Ordering {
        self.n.cmp(&other.n).then_with(|| {
            for q in 1..=self.n {
                let o = self.letter(q).rank().cmp(&other.letter(q).rank());
                if o != Ordering::Equal {
                    return o;
                }
            }
            Ordering::Equal
        })
    }
}

impl Mul for PauliTerm {
    type Output = PauliTerm;

    /// Panics on mismatched qubit counts; use [`PauliTerm::multiply`] to get an error instead.
    fn mul(self, rhs: PauliTerm) -> PauliTerm {
        self.multiply(&rhs).expect("qubit count mismatch in PauliTerm product")
    }
}

impl PartialOrd for PauliTerm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PauliTerm {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_label(other).then(self.phase.cmp(&other.phase))
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}{}", self.label())
    }
}

impl FromStr for PauliTerm {
    type Err = BpError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else if let Some(rest) = s.strip_prefix('i') {
            (1, rest)
        } else {
            (0, s)
        };
        if body.is_empty() {
            return Err(BpError::Parse(format!("empty Pauli string in {s:?}")));
        }
        let letters = body
            .chars()
            .map(|ch| match ch {
                'I' => Ok(Pauli1::I),
                'X' => Ok(Pauli1::X),
                'Y' => Ok(Pauli1::Y),
                'Z' => Ok(Pauli1::Z),
                other => Err(BpError::Parse(format!("unexpected character {other:?} in Pauli string {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliTerm::from_letters(&letters)?.with_phase(phase))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliTerm {
        s.parse().unwrap()
    }

    #[test]
    fn single_qubit_table() {
        assert_eq!(p("X") * p("Y"), p("+iZ"));
        assert_eq!(p("Y") * p("X"), p("-iZ"));
        assert_eq!(p("Z") * p("Z"), p("I"));
        assert_eq!(p("Z") * p("X"), p("+iY"));
        assert_eq!(p("Y") * p("Z"), p("+iX"));
    }

    #[test]
    fn two_qubit_product() {
        assert_eq!(p("ZX") * p("ZI"), p("IX"));
    }

    #[test]
    fn commutation_examples() {
        assert!(!p("Z").commutes(&p("X")).unwrap());
        assert!(p("ZZ").commutes(&p("XX")).unwrap());
        assert!(p("XI").commutes(&p("IX")).unwrap());
    }

    #[test]
    fn half_commutator_examples() {
        assert_eq!(p("Z").half_commutator(&p("X")).unwrap(), Some(p("+iY")));
        assert_eq!(p("ZI").half_commutator(&p("IZ")).unwrap(), None);
        assert_eq!(p("XX").half_commutator(&p("ZI")).unwrap(), Some(p("-iYX")));
    }

    #[test]
    fn mismatched_sizes_are_rejected() {
        assert!(matches!(p("X").multiply(&p("XX")), Err(BpError::DimensionMismatch { .. })));
        assert!(p("X").commutes(&p("XX")).is_err());
        assert!(p("X").half_commutator(&p("XX")).is_err());
    }

    #[test]
    fn text_round_trip_and_prefixes() {
        for s in ["-iZXI", "+iY", "-XX", "IZ"] {
            assert_eq!(p(s).to_string(), s);
        }
        assert_eq!(p("+ZZ"), p("ZZ"));
        assert!("XAZ".parse::<PauliTerm>().is_err());
        assert!("-i".parse::<PauliTerm>().is_err());
    }

    #[test]
    fn qubit_one_is_leftmost_and_bit_zero() {
        let t = p("XIZ");
        assert_eq!(t.x_mask(), 0b001);
        assert_eq!(t.z_mask(), 0b100);
        assert_eq!(t.letter(1), Pauli1::X);
    }

    #[test]
    fn dense_small_cases() {
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let id = p("I").to_dense().unwrap();
        assert_eq!(id, CMatrix::identity(2, 2));
        let iz = p("+iZ").to_dense().unwrap();
        assert_eq!(iz[(0, 0)], i);
        assert_eq!(iz[(1, 1)], -i);
        assert_eq!(iz[(0, 1)], Complex64::new(0.0, 0.0));
        let zx = p("ZX").to_dense().unwrap();
        // Z ⊗ X: +X block on top, -X block at the bottom.
        assert_eq!(zx[(0, 1)], one);
        assert_eq!(zx[(1, 0)], one);
        assert_eq!(zx[(2, 3)], -one);
        assert_eq!(zx[(3, 2)], -one);
    }

    #[test]
    fn dense_limit_enforced() {
        let big = PauliTerm::identity(40);
        assert!(matches!(big.to_dense(), Err(BpError::DenseLimit { .. })));
    }

    #[test]
    fn label_order() {
        let mut v = vec![p("Z"), p("I"), p("Y"), p("X")];
        v.sort();
        assert_eq!(v, vec![p("I"), p("X"), p("Y"), p("Z")]);
        assert_eq!(p("XZ").cmp_label(&p("YI")), Ordering::Less);
    }
}
