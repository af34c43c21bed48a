//! Decomposition of operators into the Majorana-degree modules `B_κ` and
//! into the parity sectors of `B_κ ⊕ B_{2n-κ}`.
//!
//! Purities and coherences are computed directly from Pauli coefficients:
//! each unsigned Pauli string is, up to a phase, exactly one Majorana
//! monomial, so `P_κ(M) = d · Σ_{deg σ = κ} |m_σ|²`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::combinatorics::{binomial, subsets};
use crate::dense::i_pow;
use crate::error::{BpError, Result};
use crate::majorana::{
    degree_of, hermitian_basis_element, hermitian_phase, monomial_support, monomial_to_pauli, parity_operator,
    pauli_to_monomial, MajoranaMonomial,
};
use crate::operator::PauliSumOperator;

/// Coefficients `Tr[B_s M]` over the Hermitian monomial basis, grouped by degree.
#[derive(Clone, Debug)]
pub struct ModuleDecomposition {
    n: usize,
    by_degree: Vec<BTreeMap<MajoranaMonomial, Complex64>>,
}

impl ModuleDecomposition {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Nonzero coefficients at degree `κ`.
    pub fn coefficients(&self, kappa: usize) -> &BTreeMap<MajoranaMonomial, Complex64> {
        &self.by_degree[kappa]
    }

    /// `dim B_κ = C(2n, κ)`.
    pub fn dim(&self, kappa: usize) -> u128 {
        binomial(2 * self.n as u64, kappa as u64)
    }

    /// Full coefficient vector at degree `κ`, ordered lexicographically by subset.
    pub fn dense_vector(&self, kappa: usize) -> Vec<Complex64> {
        subsets(2 * self.n, kappa)
            .into_iter()
            .map(|s| {
                let m = MajoranaMonomial::new(self.n, &s).expect("subset within range");
                self.by_degree[kappa].get(&m).copied().unwrap_or_default()
            })
            .collect()
    }

    pub fn purity(&self, kappa: usize) -> f64 {
        self.by_degree[kappa].values().map(|c| c.norm_sqr()).sum()
    }

    /// `Σ_κ Σ_s coef · B_s`.
    pub fn reconstruct(&self) -> PauliSumOperator {
        let mut out = PauliSumOperator::zero(self.n);
        for level in &self.by_degree {
            for (m, &coef) in level {
                for (t, c) in hermitian_basis_element(m).iter() {
                    out.add_term(&t, c * coef);
                }
            }
        }
        out
    }
}

fn check_kappa(n: usize, kappa: usize) -> Result<()> {
    if kappa > 2 * n {
        return Err(BpError::OutOfRange(format!("degree {kappa} outside 0..={}", 2 * n)));
    }
    Ok(())
}

pub fn decompose(m: &PauliSumOperator) -> ModuleDecomposition {
    let n = m.n();
    let sqrt_d = (n as f64 * 0.5).exp2();
    let mut by_degree = vec![BTreeMap::new(); 2 * n + 1];
    for (sigma, a) in m.iter() {
        let sm = pauli_to_monomial(&sigma);
        let kappa = sm.monomial.degree();
        // σ = i^φ c^s and B_s = i^k c^s/√d with k = ⌊κ/2⌋; Tr[c^s c^s] = (−1)^k d.
        let k = hermitian_phase(kappa) as u32;
        let overlap = i_pow(3 * k + sm.phase as u32) * sqrt_d;
        by_degree[kappa].insert(sm.monomial, a * overlap);
    }
    ModuleDecomposition { n, by_degree }
}

/// Projection `M_κ` of `M` onto `B_κ`.
pub fn module_component(m: &PauliSumOperator, kappa: usize) -> Result<PauliSumOperator> {
    check_kappa(m.n(), kappa)?;
    let mut out = PauliSumOperator::zero(m.n());
    for (t, c) in m.iter() {
        if degree_of(&t) == kappa {
            out.add_term(&t, c);
        }
    }
    Ok(out)
}

/// `P_κ(M) = Tr[M_κ† M_κ]`.
pub fn kappa_purity(m: &PauliSumOperator, kappa: usize) -> Result<f64> {
    check_kappa(m.n(), kappa)?;
    let sum: f64 = m.iter().filter(|(t, _)| degree_of(t) == kappa).map(|(_, c)| c.norm_sqr()).sum();
    Ok(sum * m.dim())
}

/// `i^{κ mod 2} Tr[P M_κ† M_{2n−κ}]` without discarding the imaginary part.
pub fn kappa_coherence_complex(m: &PauliSumOperator, kappa: usize) -> Result<Complex64> {
    check_kappa(m.n(), kappa)?;
    let parity = parity_operator(m.n())?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (sigma, a) in m.iter() {
        if degree_of(&sigma) != kappa {
            continue;
        }
        // P σ = i^ph τ, and only the τ component of M survives the trace.
        let image = parity.mul_unchecked(&sigma);
        let b = m.coefficient(image.x_mask(), image.z_mask());
        acc += a.conj() * b * image.phase_factor();
    }
    Ok(acc * m.dim() * i_pow((kappa % 2) as u32))
}

/// Real part of [`kappa_coherence_complex`]; Hermitian inputs have no imaginary part.
pub fn kappa_coherence(m: &PauliSumOperator, kappa: usize) -> Result<f64> {
    Ok(kappa_coherence_complex(m, kappa)?.re)
}

#[derive(Clone, Debug, Serialize)]
pub struct PuritySpectrum {
    pub purities: Vec<f64>,
    pub coherences: Vec<f64>,
    /// Largest imaginary part dropped from a coherence.
    pub residual_imag: f64,
}

impl PuritySpectrum {
    pub fn total(&self) -> f64 {
        self.purities.iter().sum()
    }
}

pub fn purity_spectrum(m: &PauliSumOperator) -> PuritySpectrum {
    let n = m.n();
    let mut purities = Vec::with_capacity(2 * n + 1);
    let mut coherences = Vec::with_capacity(2 * n + 1);
    let mut residual_imag: f64 = 0.0;
    for kappa in 0..=2 * n {
        purities.push(kappa_purity(m, kappa).expect("degree in range"));
        let c = kappa_coherence_complex(m, kappa).expect("degree in range");
        residual_imag = residual_imag.max(c.im.abs());
        coherences.push(c.re);
    }
    PuritySpectrum { purities, coherences, residual_imag }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub const BOTH: [Parity; 2] = [Parity::Even, Parity::Odd];
}

fn check_sector_kappa(n: usize, kappa: usize) -> Result<()> {
    if kappa % 2 != 0 || kappa > n {
        return Err(BpError::OutOfRange(format!(
            "parity sectors need an even degree in 0..={n}, got {kappa}"
        )));
    }
    Ok(())
}

/// Number of independent sector elements of each parity at degree `κ`.
pub fn sector_dim(n: usize, kappa: usize) -> u128 {
    let full = binomial(2 * n as u64, kappa as u64);
    if kappa == n {
        full / 2
    } else {
        full
    }
}

/// Subsets labelling the sector basis: all `κ`-subsets, or those containing 1 when `κ = n`.
pub fn sector_labels(n: usize, kappa: usize) -> Vec<MajoranaMonomial> {
    subsets(2 * n, kappa)
        .into_iter()
        .filter(|s| kappa != n || s.first() == Some(&1))
        .map(|s| MajoranaMonomial::new(n, &s).expect("subset within range"))
        .collect()
}

/// `B^p_{κ,s} = i^{⌊κ/2⌋}(c^s ± P c^s)/√(2d)`, with the product `P c^s` taken exactly.
pub fn sector_basis_element(s: &MajoranaMonomial, parity: Parity) -> PauliSumOperator {
    let n = s.n();
    let cs = monomial_to_pauli(s).times_i_pow(hermitian_phase(s.degree()));
    let pcs = parity_operator(n).expect("valid n").mul_unchecked(&cs);
    let scale = 1.0 / ((n + 1) as f64 * 0.5).exp2();
    let mut op = PauliSumOperator::from_term(&cs, scale.into());
    op.add_term(&pcs, (parity.sign() * scale).into());
    op
}

/// Canonical sector label of a degree-`κ` or degree-`(2n−κ)` monomial.
fn sector_label(n: usize, kappa: usize, m: &MajoranaMonomial) -> MajoranaMonomial {
    if kappa == n {
        if m.contains(1) {
            *m
        } else {
            m.complement()
        }
    } else if m.degree() == kappa {
        *m
    } else {
        m.complement()
    }
}

/// Coefficients of `M` over the two sector bases at even degree `κ ≤ n`.
#[derive(Clone, Debug)]
pub struct SectorDecomposition {
    n: usize,
    kappa: usize,
    even: BTreeMap<MajoranaMonomial, Complex64>,
    odd: BTreeMap<MajoranaMonomial, Complex64>,
}

impl SectorDecomposition {
    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn coefficients(&self, parity: Parity) -> &BTreeMap<MajoranaMonomial, Complex64> {
        match parity {
            Parity::Even => &self.even,
            Parity::Odd => &self.odd,
        }
    }

    /// `M_{κ,p} = Σ_s M^p_s B^p_{κ,s}`.
    pub fn component(&self, parity: Parity) -> PauliSumOperator {
        let mut out = PauliSumOperator::zero(self.n);
        for (s, &coef) in self.coefficients(parity) {
            for (t, c) in sector_basis_element(s, parity).iter() {
                out.add_term(&t, c * coef);
            }
        }
        out
    }

    pub fn purity(&self, parity: Parity) -> f64 {
        self.coefficients(parity).values().map(|c| c.norm_sqr()).sum()
    }

    /// `Σ_s M^p_s M^{p̄}_s`, equal to `Tr[T_κ(M_{κ,p}) M_{κ,p̄}]` away from `κ = n`.
    pub fn coherence(&self, parity: Parity) -> f64 {
        if self.kappa == self.n {
            return 0.0;
        }
        let other = self.coefficients(parity.flip());
        self.coefficients(parity)
            .iter()
            .filter_map(|(s, a)| other.get(s).map(|b| (a * b).re))
            .sum()
    }
}

pub fn parity_sector_decompose(m: &PauliSumOperator, kappa: usize) -> Result<SectorDecomposition> {
    let n = m.n();
    check_sector_kappa(n, kappa)?;
    let mut labels = std::collections::BTreeSet::new();
    for (t, _) in m.iter() {
        let support = monomial_support(&t);
        let deg = support.degree();
        if deg == kappa || deg == 2 * n - kappa {
            labels.insert(sector_label(n, kappa, &support));
        }
    }
    let mut even = BTreeMap::new();
    let mut odd = BTreeMap::new();
    for s in labels {
        for parity in Parity::BOTH {
            let coef = sector_basis_element(&s, parity).inner(m)?;
            if coef.norm() > crate::operator::PRUNE_TOL {
                match parity {
                    Parity::Even => even.insert(s, coef),
                    Parity::Odd => odd.insert(s, coef),
                };
            }
        }
    }
    Ok(SectorDecomposition { n, kappa, even, odd })
}

/// `P_{κ,p}(M) = Tr[M_{κ,p}† M_{κ,p}]`.
pub fn sector_purity(m: &PauliSumOperator, kappa: usize, parity: Parity) -> Result<f64> {
    Ok(parity_sector_decompose(m, kappa)?.purity(parity))
}

/// `C_{κ,p}(M) = Tr[T_κ(M_{κ,p}) M_{κ,p̄}]`.
pub fn sector_coherence(m: &PauliSumOperator, kappa: usize, parity: Parity) -> Result<f64> {
    let sectors = parity_sector_decompose(m, kappa)?;
    let mapped = apply_t(&sectors.component(parity), kappa)?;
    Ok(mapped.trace_product(&sectors.component(parity.flip()))?.re)
}

/// `T_κ(M) = M_κ − M_{2n−κ}`, identically zero at `κ = n`.
pub fn apply_t(m: &PauliSumOperator, kappa: usize) -> Result<PauliSumOperator> {
    let n = m.n();
    if kappa > n {
        return Err(BpError::OutOfRange(format!("T map defined for degrees 0..={n}, got {kappa}")));
    }
    if kappa == n {
        return Ok(PauliSumOperator::zero(n));
    }
    let mut out = PauliSumOperator::zero(n);
    for (t, c) in m.iter() {
        let deg = degree_of(&t);
        if deg == kappa {
            out.add_term(&t, c);
        } else if deg == 2 * n - kappa {
            out.add_term(&t, -c);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::c;
    use crate::pauli::PauliTerm;

    fn op(n: usize, terms: &[(&str, f64)]) -> PauliSumOperator {
        let mut m = PauliSumOperator::zero(n);
        for (s, v) in terms {
            m.add_term(&s.parse::<PauliTerm>().unwrap(), c(*v, 0.0));
        }
        m
    }

    fn zero_state(n: usize) -> PauliSumOperator {
        let mut psi = vec![c(0.0, 0.0); 1 << n];
        psi[0] = c(1.0, 0.0);
        PauliSumOperator::from_state(&psi).unwrap()
    }

    #[test]
    fn single_z_sits_in_degree_two() {
        let dec = decompose(&op(2, &[("ZI", 1.0)]));
        let level = dec.coefficients(2);
        assert_eq!(level.len(), 1);
        let (m, coef) = level.iter().next().unwrap();
        assert_eq!(m.indices(), vec![1, 2]);
        assert!((coef.norm() - 2.0).abs() < 1e-14);
        assert!(coef.im.abs() < 1e-15);
        assert_eq!(dec.dense_vector(2).len(), 6);
    }

    #[test]
    fn identity_sits_in_degree_zero() {
        let dec = decompose(&PauliSumOperator::identity(3));
        for kappa in 1..=6 {
            assert!(dec.coefficients(kappa).is_empty());
        }
        assert_eq!(dec.coefficients(0).len(), 1);
    }

    #[test]
    fn zero_projector_coefficients() {
        let dec = decompose(&zero_state(2));
        let mags: Vec<(Vec<usize>, f64)> = (0..=4)
            .flat_map(|k| dec.coefficients(k).iter().map(|(m, c)| (m.indices(), c.norm())).collect::<Vec<_>>())
            .collect();
        assert_eq!(mags.len(), 4);
        for (idx, mag) in &mags {
            assert!((mag - 0.5).abs() < 1e-14, "{idx:?} -> {mag}");
        }
        let sets: Vec<Vec<usize>> = mags.into_iter().map(|(i, _)| i).collect();
        assert_eq!(sets, vec![vec![], vec![1, 2], vec![3, 4], vec![1, 2, 3, 4]]);
    }

    #[test]
    fn zero_state_purities() {
        for n in 1..=5 {
            let spec = purity_spectrum(&zero_state(n));
            let d = (1u64 << n) as f64;
            for kappa in 0..=2 * n {
                let want = if kappa % 2 == 0 { binomial(n as u64, kappa as u64 / 2) as f64 / d } else { 0.0 };
                assert!((spec.purities[kappa] - want).abs() < 1e-13);
                if kappa % 2 == 0 {
                    assert!((spec.coherences[kappa] - spec.purities[kappa]).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn plus_state_at_degree_one() {
        let rho = op(1, &[("I", 0.5), ("X", 0.5)]);
        assert!((kappa_purity(&rho, 1).unwrap() - 0.5).abs() < 1e-15);
        assert!(kappa_coherence(&rho, 1).unwrap().abs() < 1e-15);
        assert!(kappa_purity(&PauliSumOperator::identity(2), 3).unwrap().abs() < 1e-15);
    }

    #[test]
    fn degree_out_of_range() {
        let m = PauliSumOperator::identity(2);
        assert!(kappa_purity(&m, 5).is_err());
        assert!(kappa_coherence(&m, 5).is_err());
        assert!(parity_sector_decompose(&m, 1).is_err());
        assert!(parity_sector_decompose(&m, 4).is_err());
        assert!(apply_t(&m, 3).is_err());
    }

    #[test]
    fn reconstruction() {
        let m = op(3, &[("XYZ", 0.3), ("ZII", -1.2), ("IIX", 0.7), ("III", 0.1)]);
        let back = decompose(&m).reconstruct();
        assert!((&back - &m).norm_sqr() < 1e-24);
    }

    #[test]
    fn even_sector_of_identity_plus_parity() {
        let m = op(2, &[("II", 1.0), ("ZZ", 1.0)]).scale(c(1.0 / 8f64.sqrt(), 0.0));
        let sec = parity_sector_decompose(&m, 0).unwrap();
        assert!((sec.purity(Parity::Even) - 1.0).abs() < 1e-14);
        assert!(sec.purity(Parity::Odd).abs() < 1e-14);
    }

    #[test]
    fn single_z_splits_evenly() {
        let m = op(2, &[("ZI", 1.0)]);
        let sec = parity_sector_decompose(&m, 2).unwrap();
        let e = sec.purity(Parity::Even);
        let o = sec.purity(Parity::Odd);
        assert!((e - o).abs() < 1e-14);
        assert!((e + o - kappa_purity(&m, 2).unwrap()).abs() < 1e-14);
        assert!(sector_coherence(&m, 2, Parity::Even).unwrap().abs() < 1e-14);
        let m3 = op(3, &[("ZII", 1.0), ("IZI", 0.5)]);
        let sec = parity_sector_decompose(&m3, 2).unwrap();
        for p in Parity::BOTH {
            let literal = sector_coherence(&m3, 2, p).unwrap();
            assert!((sec.coherence(p) - literal).abs() < 1e-13);
            assert!(literal.abs() > 0.1);
        }
    }

    #[test]
    fn t_map_swaps_sectors() {
        for n in 2..=4 {
            for kappa in (0..n).step_by(2) {
                for s in sector_labels(n, kappa).into_iter().take(5) {
                    let e = sector_basis_element(&s, Parity::Even);
                    let o = sector_basis_element(&s, Parity::Odd);
                    assert!((&apply_t(&e, kappa).unwrap() - &o).norm_sqr() < 1e-26);
                }
            }
            assert!(apply_t(&op(n, &[("X".repeat(n).as_str(), 1.0)]), n).unwrap().is_empty());
        }
    }

    #[test]
    fn sector_elements_have_definite_parity() {
        let n = 4;
        let parity = PauliSumOperator::from_term(&parity_operator(n).unwrap(), c(1.0, 0.0));
        for kappa in [0, 2, 4] {
            for s in sector_labels(n, kappa) {
                for p in Parity::BOTH {
                    let b = sector_basis_element(&s, p);
                    let pb = &parity * &b;
                    assert!((&pb - &b.scale(c(p.sign(), 0.0))).norm_sqr() < 1e-26);
                    assert!(b.is_hermitian(1e-15));
                    assert!((b.norm_sqr() - 1.0).abs() < 1e-14);
                }
            }
            assert_eq!(sector_labels(n, kappa).len() as u128, sector_dim(n, kappa));
        }
    }
}
