//! Jordan–Wigner dictionary between Pauli strings and Majorana monomials.
//!
//! Majoranas are indexed `1..=2n` with `c_{2i-1} = Z^{⊗(i-1)} X_i` and
//! `c_{2i} = Z^{⊗(i-1)} Y_i`. A monomial is the ordered product of a strictly
//! increasing index subset.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{BpError, Result};
use crate::operator::PauliSumOperator;
use crate::pauli::{low_mask, PauliTerm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MajoranaMonomial {
    n: usize,
    /// Bit `μ - 1` set iff `c_μ` is a factor.
    bits: u128,
}

impl MajoranaMonomial {
    pub fn new(n: usize, indices: &[usize]) -> Result<Self> {
        check_n(n)?;
        let mut bits = 0u128;
        let mut last = 0;
        for &mu in indices {
            if mu <= last {
                return Err(BpError::InvalidInput(format!(
                    "Majorana indices must be strictly increasing, got {indices:?}"
                )));
            }
            if mu > 2 * n {
                return Err(BpError::OutOfRange(format!("Majorana index {mu} exceeds 2n = {}", 2 * n)));
            }
            bits |= 1u128 << (mu - 1);
            last = mu;
        }
        Ok(Self { n, bits })
    }

    pub fn from_bits(n: usize, bits: u128) -> Result<Self> {
        check_n(n)?;
        let limit = if 2 * n >= 128 { u128::MAX } else { (1u128 << (2 * n)) - 1 };
        if bits & !limit != 0 {
            return Err(BpError::OutOfRange(format!("monomial bits exceed 2n = {}", 2 * n)));
        }
        Ok(Self { n, bits })
    }

    pub fn empty(n: usize) -> Self {
        Self { n, bits: 0 }
    }

    /// The full product `c_1 ⋯ c_{2n}`.
    pub fn full(n: usize) -> Self {
        let bits = if 2 * n >= 128 { u128::MAX } else { (1u128 << (2 * n)) - 1 };
        Self { n, bits }
    }

    /// Parses `"{1,4,5}"`.
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        let inner = text
            .trim()
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .ok_or_else(|| BpError::Parse(format!("monomial must be written as {{i,j,…}}, got {text:?}")))?;
        let indices = inner
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<usize>().map_err(|e| BpError::Parse(format!("bad index {t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, &indices)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> u128 {
        self.bits
    }

    pub fn degree(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn indices(&self) -> Vec<usize> {
        (1..=2 * self.n).filter(|&mu| self.bits >> (mu - 1) & 1 == 1).collect()
    }

    /// Sum of the indices, whose parity gives the reordering signs of the commutant bases.
    pub fn index_sum(&self) -> usize {
        self.indices().iter().sum()
    }

    /// Complementary subset `{1..2n} \ s`.
    pub fn complement(&self) -> Self {
        Self { n: self.n, bits: Self::full(self.n).bits & !self.bits }
    }

    pub fn contains(&self, mu: usize) -> bool {
        mu >= 1 && mu <= 2 * self.n && self.bits >> (mu - 1) & 1 == 1
    }
}

impl PartialOrd for MajoranaMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Ordered by degree, then lexicographically by index list.
impl Ord for MajoranaMonomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then(self.degree().cmp(&other.degree()))
            .then_with(|| self.indices().cmp(&other.indices()))
    }
}

impl fmt::Display for MajoranaMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.indices().iter().map(usize::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// `i^phase · c^s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ScaledMonomial {
    pub monomial: MajoranaMonomial,
    pub phase: u8,
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > 64 {
        return Err(BpError::OutOfRange(format!("qubit count {n} outside 1..=64")));
    }
    Ok(())
}

/// Jordan–Wigner image of `c_μ`.
pub fn majorana(n: usize, mu: usize) -> Result<PauliTerm> {
    check_n(n)?;
    if mu == 0 || mu > 2 * n {
        return Err(BpError::OutOfRange(format!("Majorana index {mu} outside 1..={}", 2 * n)));
    }
    Ok(majorana_unchecked(n, mu))
}

pub(crate) fn majorana_unchecked(n: usize, mu: usize) -> PauliTerm {
    let site = (mu - 1) / 2;
    let bit = 1u64 << site;
    let z_string = bit - 1;
    let z = if mu % 2 == 0 { z_string | bit } else { z_string };
    PauliTerm::from_raw(n, bit, z, 0)
}

/// Ordered product `c_{ν₁} ⋯ c_{ν_κ}` with its exact phase.
pub fn monomial_to_pauli(m: &MajoranaMonomial) -> PauliTerm {
    let mut acc = PauliTerm::identity(m.n);
    let mut bits = m.bits;
    while bits != 0 {
        let mu = bits.trailing_zeros() as usize + 1;
        acc = acc.mul_unchecked(&majorana_unchecked(m.n, mu));
        bits &= bits - 1;
    }
    acc
}

/// Monomial whose Pauli image has the same unsigned string as `p`.
pub fn monomial_support(p: &PauliTerm) -> MajoranaMonomial {
    let mut bits = 0u128;
    // Sweeping from the last site, `tail` is the parity of X-support to the
    // right, i.e. the number of Majoranas whose Z-string covers this site.
    let mut tail = false;
    for site in (0..p.n()).rev() {
        let x = p.x_mask() >> site & 1 == 1;
        let z = p.z_mask() >> site & 1 == 1;
        let even = z ^ tail;
        let odd = x ^ even;
        if odd {
            bits |= 1u128 << (2 * site);
        }
        if even {
            bits |= 1u128 << (2 * site + 1);
        }
        tail ^= x;
    }
    MajoranaMonomial { n: p.n(), bits }
}

/// Majorana degree of the unsigned string of `p`.
pub fn degree_of(p: &PauliTerm) -> usize {
    monomial_support(p).degree()
}

/// Inverse of [`monomial_to_pauli`]: `p = i^phase · monomial_to_pauli(monomial)`.
pub fn pauli_to_monomial(p: &PauliTerm) -> ScaledMonomial {
    let monomial = monomial_support(p);
    let base = monomial_to_pauli(&monomial);
    debug_assert_eq!(base.unsigned(), p.unsigned());
    ScaledMonomial { monomial, phase: (p.phase() + 4 - base.phase()) & 3 }
}

/// Phase `k` with `B_s = i^k c^s / √d` Hermitian and orthonormal.
pub fn hermitian_phase(degree: usize) -> u8 {
    ((degree / 2) % 4) as u8
}

/// `B_s = i^{⌊κ/2⌋} c^s / √d` as a single-term operator.
pub fn hermitian_basis_element(m: &MajoranaMonomial) -> PauliSumOperator {
    let term = monomial_to_pauli(m).times_i_pow(hermitian_phase(m.degree()));
    let scale = (-(m.n as f64) * 0.5).exp2();
    PauliSumOperator::from_term(&term, scale.into())
}

/// Fermionic parity `Z^{⊗n}`.
pub fn parity_operator(n: usize) -> Result<PauliTerm> {
    check_n(n)?;
    PauliTerm::new(n, 0, low_mask(n), 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense;

    fn p(s: &str) -> PauliTerm {
        s.parse().unwrap()
    }

    #[test]
    fn jordan_wigner_strings() {
        assert_eq!(majorana(2, 1).unwrap(), p("XI"));
        assert_eq!(majorana(2, 4).unwrap(), p("ZY"));
        assert_eq!(majorana(3, 5).unwrap(), p("ZZX"));
        assert_eq!(majorana(3, 6).unwrap(), p("ZZY"));
        assert!(majorana(2, 5).is_err());
        assert!(majorana(2, 0).is_err());
    }

    #[test]
    fn pair_products() {
        let m = MajoranaMonomial::new(1, &[1, 2]).unwrap();
        assert_eq!(monomial_to_pauli(&m), p("+iZ"));
        let hop = MajoranaMonomial::new(2, &[2, 3]).unwrap();
        assert_eq!(monomial_to_pauli(&hop), p("+iXX"));
        assert_eq!(monomial_to_pauli(&MajoranaMonomial::empty(3)), p("III"));
    }

    #[test]
    fn three_index_product_matches_dense() {
        let m = MajoranaMonomial::new(2, &[1, 2, 3]).unwrap();
        let got = monomial_to_pauli(&m).to_dense().unwrap();
        let want = &(&majorana(2, 1).unwrap().to_dense().unwrap() * &majorana(2, 2).unwrap().to_dense().unwrap())
            * &majorana(2, 3).unwrap().to_dense().unwrap();
        assert!(dense::frobenius_norm(&(got - &want)) < 1e-14);
        assert_eq!(monomial_to_pauli(&m), p("+iIX"));
    }

    #[test]
    fn inversion_examples() {
        let z1 = pauli_to_monomial(&p("ZI"));
        assert_eq!(z1.monomial.indices(), vec![1, 2]);
        assert_eq!(z1.phase, 3);
        let x2 = pauli_to_monomial(&p("IX"));
        assert_eq!(x2.monomial.indices(), vec![1, 2, 3]);
        let id = pauli_to_monomial(&p("III"));
        assert_eq!(id.monomial.degree(), 0);
        assert_eq!(id.phase, 0);
    }

    #[test]
    fn hermitian_basis_examples() {
        let pair = hermitian_basis_element(&MajoranaMonomial::new(1, &[1, 2]).unwrap());
        let m = pair.to_dense().unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!((m[(0, 0)].re + s).abs() < 1e-15 && (m[(1, 1)].re - s).abs() < 1e-15);
        assert!(dense::hermiticity_defect(&m) < 1e-15);
        let id = hermitian_basis_element(&MajoranaMonomial::empty(2)).to_dense().unwrap();
        assert!((id[(0, 0)].re - 0.5).abs() < 1e-15);
        let x = hermitian_basis_element(&MajoranaMonomial::new(1, &[1]).unwrap()).to_dense().unwrap();
        assert!((x[(0, 1)].re - s).abs() < 1e-15);
    }

    #[test]
    fn parity_is_scaled_full_product() {
        for n in 1..=5 {
            let full = monomial_to_pauli(&MajoranaMonomial::full(n));
            // (−i)ⁿ = i^{3n}
            let scaled = full.times_i_pow(((3 * n) % 4) as u8);
            assert_eq!(scaled, parity_operator(n).unwrap());
        }
    }

    #[test]
    fn text_form() {
        let m = MajoranaMonomial::parse(3, "{1, 4,5}").unwrap();
        assert_eq!(m.to_string(), "{1,4,5}");
        assert_eq!(MajoranaMonomial::parse(3, "{}").unwrap().degree(), 0);
        assert!(MajoranaMonomial::parse(2, "{3,1}").is_err());
        assert!(MajoranaMonomial::parse(2, "{1,9}").is_err());
        assert!(MajoranaMonomial::parse(2, "1,2").is_err());
    }
}
