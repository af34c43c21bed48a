//! Exact loss means and variances over the matchgate group, a dense
//! Weingarten oracle, and the closed forms for the three benchmark families.

use std::fmt;
use std::str::FromStr;

use log::warn;
use num_complex::Complex64;
use serde::Serialize;

use crate::combinatorics::{binomial, binomial_f64, subsets};
use crate::dense::{self, c, CMatrix};
use crate::dla::{QBasisFlavor, QUADRATIC_DENSE_LIMIT};
use crate::error::{ensure_same_n, BpError, Result};
use crate::majorana::parity_operator;
use crate::modules::{parity_sector_decompose, purity_spectrum, sector_dim, Parity};
use crate::operator::PauliSumOperator;

/// Variances below zero by less than this are float noise and clamp to zero.
pub const NEGATIVE_TOL: f64 = 1e-12;

/// Tolerance for Hermiticity and parity-commutation checks.
pub const INPUT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    ParityExact,
    Oracle,
    ClosedForm,
    MonteCarlo,
}

#[derive(Clone, Debug, Serialize)]
pub struct KappaTerm {
    pub kappa: usize,
    pub purity_term: f64,
    pub coherence_term: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VarianceReport {
    pub mean: f64,
    pub variance: f64,
    pub method: Method,
    pub per_kappa: Vec<KappaTerm>,
    pub stderr: Option<f64>,
}

fn clamp_variance(v: f64) -> Result<f64> {
    if v < -NEGATIVE_TOL {
        return Err(BpError::Tolerance(format!("variance {v:.3e} is negative beyond float noise")));
    }
    if v < 0.0 {
        warn!("clamping variance {v:.3e} to zero");
        return Ok(0.0);
    }
    Ok(v)
}

fn validate(rho: &PauliSumOperator, o: &PauliSumOperator) -> Result<()> {
    ensure_same_n(rho.n(), o.n())?;
    let defect = rho.hermiticity_defect();
    if defect > INPUT_TOL {
        return Err(BpError::Precondition(format!("state is not Hermitian (defect {defect:.3e})")));
    }
    let defect = o.hermiticity_defect();
    if defect > INPUT_TOL {
        return Err(BpError::Precondition(format!("observable is not Hermitian (defect {defect:.3e})")));
    }
    let tr = rho.trace().re;
    if (tr - 1.0).abs() > INPUT_TOL {
        warn!("state trace is {tr}, not 1");
    }
    Ok(())
}

fn parity_overlap(m: &PauliSumOperator) -> f64 {
    let z = crate::pauli::low_mask(m.n());
    m.coefficient(0, z).re * m.dim()
}

/// `E[ℓ] = (Tr[ρ]Tr[O] + Tr[ρP]Tr[OP]) / d`.
pub fn mean_exact(rho: &PauliSumOperator, o: &PauliSumOperator) -> Result<f64> {
    validate(rho, o)?;
    let d = rho.dim();
    Ok((rho.trace().re * o.trace().re + parity_overlap(rho) * parity_overlap(o)) / d)
}

/// `Var = Σ_{κ=1}^{2n−1} [P_κ(ρ)P_κ(O) + C_κ(ρ)C_κ(O)] / C(2n, κ)`.
pub fn variance_exact(rho: &PauliSumOperator, o: &PauliSumOperator) -> Result<VarianceReport> {
    let mean = mean_exact(rho, o)?;
    let n = rho.n();
    let sr = purity_spectrum(rho);
    let so = purity_spectrum(o);
    let mut per_kappa = Vec::with_capacity(2 * n - 1);
    let mut total = 0.0;
    for kappa in 1..2 * n {
        let dim = binomial_f64(2 * n as u64, kappa as u64);
        let purity_term = sr.purities[kappa] * so.purities[kappa] / dim;
        let coherence_term = sr.coherences[kappa] * so.coherences[kappa] / dim;
        total += purity_term + coherence_term;
        per_kappa.push(KappaTerm { kappa, purity_term, coherence_term });
    }
    Ok(VarianceReport { mean, variance: clamp_variance(total)?, method: Method::Exact, per_kappa, stderr: None })
}

/// Shortcut variance for an observable supported on one or two modules.
///
/// One degree `κ ≠ n`: `P_κ(ρ)P_κ(O)/C(2n,κ)`. Two degrees: both purity terms
/// plus `2 C_κ(ρ)C_κ(O)/C(2n,κ)` when they sum to `2n`.
pub fn variance_corollary(rho: &PauliSumOperator, o: &PauliSumOperator, degrees: &[usize]) -> Result<VarianceReport> {
    let mean = mean_exact(rho, o)?;
    let n = rho.n();
    if degrees.is_empty() || degrees.len() > 2 || (degrees.len() == 2 && degrees[0] == degrees[1]) {
        return Err(BpError::InvalidInput("give one degree or two distinct degrees".into()));
    }
    if let Some(&k) = degrees.iter().find(|&&k| k > 2 * n) {
        return Err(BpError::OutOfRange(format!("degree {k} outside 0..={}", 2 * n)));
    }
    if degrees.contains(&n) {
        return Err(BpError::Precondition(format!("degree n = {n} carries in-module coherences; use variance_exact")));
    }
    let mut inside = PauliSumOperator::zero(n);
    for &k in degrees {
        inside = &inside + &crate::modules::module_component(o, k)?;
    }
    let leak = (o - &inside).norm_sqr().sqrt();
    if leak > 1e-12 * o.norm_sqr().sqrt().max(1.0) {
        return Err(BpError::ModuleMembership { leak });
    }
    let sr = purity_spectrum(rho);
    let so = purity_spectrum(o);
    let mut per_kappa = Vec::new();
    let mut total = 0.0;
    let mut sorted = degrees.to_vec();
    sorted.sort_unstable();
    let paired = sorted.len() == 2 && sorted[0] + sorted[1] == 2 * n;
    for &k in &sorted {
        if k == 0 || k == 2 * n {
            continue;
        }
        let dim = binomial_f64(2 * n as u64, k as u64);
        let purity_term = sr.purities[k] * so.purities[k] / dim;
        let coherence_term = if paired && k == sorted[0] { 2.0 * sr.coherences[k] * so.coherences[k] / dim } else { 0.0 };
        total += purity_term + coherence_term;
        per_kappa.push(KappaTerm { kappa: k, purity_term, coherence_term });
    }
    Ok(VarianceReport { mean, variance: clamp_variance(total)?, method: Method::Exact, per_kappa, stderr: None })
}

/// Frobenius norm of `[M, P]`.
pub fn parity_commutator_norm(m: &PauliSumOperator) -> Result<f64> {
    m.commutator_norm_with(&parity_operator(m.n())?)
}

/// Variance in the parity-resolved decomposition of operator space.
///
/// Even degrees `2q ≤ n` contribute sector purities and, for `2q < n`, sector
/// coherences; odd degrees contribute as in [`variance_exact`]. Inputs of
/// definite parity have vanishing sector coherences and odd components, so the
/// result reduces to `Σ_q Σ_p P_{2q,p}(ρ)P_{2q,p}(O)/dim(B^p_{2q})`.
pub fn variance_parity_basis(rho: &PauliSumOperator, o: &PauliSumOperator) -> Result<VarianceReport> {
    validate(rho, o)?;
    let n = rho.n();
    let cr = parity_commutator_norm(rho)?;
    let co = parity_commutator_norm(o)?;
    let scale_r = rho.norm_sqr().sqrt().max(1.0);
    let scale_o = o.norm_sqr().sqrt().max(1.0);
    if cr > INPUT_TOL * scale_r && co > INPUT_TOL * scale_o {
        return Err(BpError::Precondition(format!(
            "neither input commutes with the parity operator (‖[ρ,P]‖ = {cr:.3e}, ‖[O,P]‖ = {co:.3e})"
        )));
    }
    let s0r = parity_sector_decompose(rho, 0)?;
    let s0o = parity_sector_decompose(o, 0)?;
    let mut mean = 0.0;
    for p in Parity::BOTH {
        let a = s0r.coefficients(p).values().next().copied().unwrap_or_default();
        let b = s0o.coefficients(p).values().next().copied().unwrap_or_default();
        mean += (a * b).re;
    }
    let sr = purity_spectrum(rho);
    let so = purity_spectrum(o);
    let mut per_kappa = Vec::new();
    let mut total = 0.0;
    for kappa in 1..2 * n {
        let (purity_term, coherence_term) = if kappa % 2 == 1 {
            let dim = binomial_f64(2 * n as u64, kappa as u64);
            (sr.purities[kappa] * so.purities[kappa] / dim, sr.coherences[kappa] * so.coherences[kappa] / dim)
        } else if kappa <= n {
            let dim = sector_dim(n, kappa) as f64;
            let ar = parity_sector_decompose(rho, kappa)?;
            let ao = parity_sector_decompose(o, kappa)?;
            let mut pt = 0.0;
            let mut ct = 0.0;
            for p in Parity::BOTH {
                pt += ar.purity(p) * ao.purity(p) / dim;
                if kappa != n {
                    ct += ar.coherence(p) * ao.coherence(p) / dim;
                }
            }
            (pt, ct)
        } else {
            continue;
        };
        total += purity_term + coherence_term;
        per_kappa.push(KappaTerm { kappa, purity_term, coherence_term });
    }
    Ok(VarianceReport { mean, variance: clamp_variance(total)?, method: Method::ParityExact, per_kappa, stderr: None })
}

/// Dense Majorana operators built directly from 2×2 Pauli matrices.
pub fn dense_majoranas(n: usize) -> Result<Vec<CMatrix>> {
    dense::check_dense("dense Majorana operators", n)?;
    let zero = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let id = CMatrix::identity(2, 2);
    let x = CMatrix::from_row_slice(2, 2, &[zero, one, one, zero]);
    let y = CMatrix::from_row_slice(2, 2, &[zero, c(0.0, -1.0), c(0.0, 1.0), zero]);
    let z = CMatrix::from_row_slice(2, 2, &[one, zero, zero, -one]);
    let mut out = Vec::with_capacity(2 * n);
    for site in 0..n {
        for head in [&x, &y] {
            let mut m = CMatrix::identity(1, 1);
            for q in 0..n {
                let f = match q.cmp(&site) {
                    std::cmp::Ordering::Less => &z,
                    std::cmp::Ordering::Equal => head,
                    std::cmp::Ordering::Greater => &id,
                };
                m = dense::kron(&m, f);
            }
            out.push(m);
        }
    }
    Ok(out)
}

/// A matrix with one nonzero entry per column: `M e_col = value[col] e_{row[col]}`.
struct Monomial {
    row: Vec<usize>,
    value: Vec<Complex64>,
}

impl Monomial {
    fn from_dense(m: &CMatrix) -> Self {
        let d = m.ncols();
        let mut row = vec![0; d];
        let mut value = vec![c(0.0, 0.0); d];
        for col in 0..d {
            for r in 0..d {
                if m[(r, col)].norm() > 0.5 {
                    row[col] = r;
                    value[col] = m[(r, col)];
                }
            }
        }
        Self { row, value }
    }

}

/// `Σ_terms w · A ⊗ B` accumulated into a dense `d² × d²` matrix.
fn accumulate_kron(target: &mut CMatrix, a: &Monomial, b: &Monomial, w: Complex64) {
    let d = a.row.len();
    for ca in 0..d {
        let ra = a.row[ca];
        let va = a.value[ca] * w;
        for cb in 0..d {
            target[(ra * d + b.row[cb], ca * d + cb)] += va * b.value[cb];
        }
    }
}

/// Dense orthonormal bases of the matchgate quadratic symmetries, built from
/// products of dense Majorana matrices. Labels match [`crate::dla::matchgate_q_basis`].
pub fn dense_q_basis(n: usize, flavor: QBasisFlavor) -> Result<Vec<(String, usize, CMatrix)>> {
    if n > QUADRATIC_DENSE_LIMIT {
        return Err(BpError::DenseLimit { what: "dense quadratic symmetries", n, limit: QUADRATIC_DENSE_LIMIT });
    }
    let d = 1usize << n;
    let cs = dense_majoranas(n)?;
    let product = |s: &[usize]| dense_product(&cs, s, d);
    let mut out = Vec::new();
    match flavor {
        QBasisFlavor::Standard => {
            for kappa in 0..=2 * n {
                let norm = 1.0 / (d as f64 * binomial_f64(2 * n as u64, kappa as u64).sqrt());
                let global = dense::i_pow((3 * n + kappa % 2) as u32);
                let mut q0 = CMatrix::zeros(d * d, d * d);
                let mut q1 = CMatrix::zeros(d * d, d * d);
                for s in subsets(2 * n, kappa) {
                    let comp: Vec<usize> = (1..=2 * n).filter(|mu| !s.contains(mu)).collect();
                    let a = Monomial::from_dense(&product(&s));
                    let b = Monomial::from_dense(&product(&comp));
                    let sign = if s.iter().sum::<usize>() % 2 == 0 { 1.0 } else { -1.0 };
                    accumulate_kron(&mut q0, &a, &a, c(norm, 0.0));
                    accumulate_kron(&mut q1, &a, &b, global * sign * norm);
                }
                out.push((format!("{kappa}0"), kappa, q0));
                out.push((format!("{kappa}1"), kappa, q1));
            }
        }
        QBasisFlavor::Parity => {
            for kappa in 0..=n {
                for (lambda, gamma) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    if !parity_element_kept(n, kappa, lambda, gamma) {
                        continue;
                    }
                    let q = dense_parity_q(n, kappa, lambda, gamma)?;
                    out.push((parity_label(kappa, lambda, gamma), kappa, q));
                }
            }
        }
    }
    Ok(out)
}

/// Whether `Q_κ^{λγ}` is a nonzero member of the parity-flavored basis.
///
/// At `κ = n` the terms for `s` and its complement either add or cancel: for
/// even `n` the pairs with `λ = γ` survive, for odd `n` those with `λ ≠ γ`.
pub fn parity_element_kept(n: usize, kappa: usize, lambda: usize, gamma: usize) -> bool {
    kappa != n || ((lambda == gamma) == (n % 2 == 0))
}

pub(crate) fn parity_label(kappa: usize, lambda: usize, gamma: usize) -> String {
    let tag = |b: usize| if b == 0 { '+' } else { '-' };
    format!("{kappa}{}{}", tag(lambda), tag(gamma))
}

/// Dense `Q_κ^{λγ} = M_κ Σ_s (c^s + (−1)^λ P c^s) ⊗ (c^s + (−1)^γ P c^s)`,
/// including the members that vanish at `κ = n`.
pub fn dense_parity_q(n: usize, kappa: usize, lambda: usize, gamma: usize) -> Result<CMatrix> {
    if n > QUADRATIC_DENSE_LIMIT {
        return Err(BpError::DenseLimit { what: "dense quadratic symmetries", n, limit: QUADRATIC_DENSE_LIMIT });
    }
    if kappa > n {
        return Err(BpError::OutOfRange(format!("parity basis degrees run over 0..={n}, got {kappa}")));
    }
    let d = 1usize << n;
    let cs = dense_majoranas(n)?;
    let parity = dense_parity(&cs, n);
    let extra = if kappa == n { 2f64.sqrt() } else { 1.0 };
    let m_norm = 1.0 / (d as f64 * binomial_f64(2 * n as u64, kappa as u64).sqrt() * 2.0 * extra);
    let sl = if lambda == 0 { 1.0 } else { -1.0 };
    let sg = if gamma == 0 { 1.0 } else { -1.0 };
    let mut q = CMatrix::zeros(d * d, d * d);
    for s in subsets(2 * n, kappa) {
        let cs_m = dense_product(&cs, &s, d);
        let plus = Monomial::from_dense(&cs_m);
        let pc = Monomial::from_dense(&(&parity * &cs_m));
        accumulate_kron(&mut q, &plus, &plus, c(m_norm, 0.0));
        accumulate_kron(&mut q, &plus, &pc, c(sg * m_norm, 0.0));
        accumulate_kron(&mut q, &pc, &plus, c(sl * m_norm, 0.0));
        accumulate_kron(&mut q, &pc, &pc, c(sl * sg * m_norm, 0.0));
    }
    Ok(q)
}

fn dense_product(cs: &[CMatrix], s: &[usize], d: usize) -> CMatrix {
    let mut m = CMatrix::identity(d, d);
    for &mu in s {
        m = m * &cs[mu - 1];
    }
    m
}

/// `P = (−i)ⁿ c_1 ⋯ c_{2n}`.
fn dense_parity(cs: &[CMatrix], n: usize) -> CMatrix {
    let d = 1usize << n;
    let all: Vec<usize> = (1..=2 * n).collect();
    dense_product(cs, &all, d) * dense::i_pow((3 * n) as u32)
}

/// Dense Weingarten projection onto the group commutant.
///
/// With an orthonormal basis `{Q_η}` of the quadratic symmetries,
/// `E[ℓ²] = Σ_η Tr[Q_η† (ρ⊗ρ)] Tr[Q_η (O⊗O)]`, and the mean uses the
/// orthonormal linear symmetries `I/√d, P/√d`.
pub fn weingarten_oracle(rho: &PauliSumOperator, o: &PauliSumOperator, flavor: QBasisFlavor) -> Result<VarianceReport> {
    validate(rho, o)?;
    let n = rho.n();
    let basis = dense_q_basis(n, flavor)?;
    let rd = rho.to_dense()?;
    let od = o.to_dense()?;
    let d = rd.nrows();
    let mut parity = CMatrix::zeros(d, d);
    for b in 0..d {
        parity[(b, b)] = if b.count_ones() % 2 == 0 { c(1.0, 0.0) } else { c(-1.0, 0.0) };
    }
    let mean = ((dense::trace(&rd) * dense::trace(&od) + dense::trace(&(&rd * &parity)) * dense::trace(&(&od * &parity)))
        / d as f64)
        .re;
    let rr = dense::kron(&rd, &rd);
    let oo = dense::kron(&od, &od);
    let mut second = 0.0;
    let mut per: std::collections::BTreeMap<usize, (f64, f64)> = std::collections::BTreeMap::new();
    for (label, kappa, q) in &basis {
        let contribution = (dense::trace_product(&q.adjoint(), &rr) * dense::trace_product(q, &oo)).re;
        second += contribution;
        let coherence = match flavor {
            QBasisFlavor::Standard => label.ends_with('1'),
            QBasisFlavor::Parity => {
                let tags: Vec<char> = label.chars().rev().take(2).collect();
                tags[0] != tags[1]
            }
        };
        let entry = per.entry(*kappa).or_default();
        if coherence {
            entry.1 += contribution;
        } else {
            entry.0 += contribution;
        }
    }
    let per_kappa = per
        .into_iter()
        .filter(|(k, _)| *k != 0 && *k != 2 * n)
        .map(|(kappa, (purity_term, coherence_term))| KappaTerm { kappa, purity_term, coherence_term })
        .collect();
    let variance = clamp_variance(second - mean * mean)?;
    Ok(VarianceReport { mean, variance, method: Method::Oracle, per_kappa, stderr: None })
}

/// Benchmark families with known variances.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ClosedForm {
    /// `ρ = |0⟩⟨0|^{⊗n}`, `O = Z^{⊗m} ⊗ I`.
    Gaussian { n: usize, m: usize },
    /// Tensor power of the four-qubit state with phase `τ`, `O = Z_1`.
    Magic { n: usize, tau: f64 },
    /// `α|0…0⟩ + β|10…0⟩`, `O = X_j`.
    NonFermionic { n: usize, j: usize, alpha: f64, beta: f64 },
    /// Fermionic extent of the magic state.
    Extent { n: usize, tau: f64 },
}

impl fmt::Display for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClosedForm::Gaussian { n, m } => write!(f, "gaussian(n={n}, m={m})"),
            ClosedForm::Magic { n, tau } => write!(f, "magic(n={n}, tau={tau})"),
            ClosedForm::NonFermionic { n, j, alpha, beta } => {
                write!(f, "nonfermionic(n={n}, j={j}, alpha={alpha}, beta={beta})")
            }
            ClosedForm::Extent { n, tau } => write!(f, "extent(n={n}, tau={tau})"),
        }
    }
}

fn ratio(num: u128, den: u128) -> f64 {
    num as f64 / den as f64
}

/// Evaluates a closed form.
///
/// The Gaussian family returns 0 at `m = n`: there `O` is the parity operator,
/// which is invariant, although the binomial expression evaluates to 1.
pub fn closed_form(family: ClosedForm) -> Result<f64> {
    match family {
        ClosedForm::Gaussian { n, m } => {
            if n == 0 || m == 0 || m > n {
                return Err(BpError::OutOfRange(format!("gaussian family needs 1 <= m <= n, got n={n}, m={m}")));
            }
            if m == n {
                return Ok(0.0);
            }
            Ok(ratio(binomial(n as u64, m as u64), binomial(2 * n as u64, 2 * m as u64)))
        }
        ClosedForm::Magic { n, tau } => {
            check_magic_n(n)?;
            Ok((tau / 2.0).cos().powi(2) / (2 * n - 1) as f64)
        }
        ClosedForm::NonFermionic { n, j, alpha, beta } => {
            if n == 0 || j == 0 || j > n {
                return Err(BpError::OutOfRange(format!("nonfermionic family needs 1 <= j <= n, got n={n}, j={j}")));
            }
            if (alpha * alpha + beta * beta - 1.0).abs() > INPUT_TOL {
                return Err(BpError::InvalidInput(format!("alpha^2 + beta^2 must be 1, got {}", alpha * alpha + beta * beta)));
            }
            let r = ratio(binomial(n as u64 - 1, j as u64 - 1), binomial(2 * n as u64, 2 * j as u64 - 1));
            Ok(4.0 * alpha * alpha * beta * beta * r)
        }
        ClosedForm::Extent { n, tau } => {
            check_magic_n(n)?;
            Ok((1.0 + (tau / 2.0).sin()).powf(n as f64 / 4.0))
        }
    }
}

fn check_magic_n(n: usize) -> Result<()> {
    if n == 0 || n % 4 != 0 {
        return Err(BpError::OutOfRange(format!("magic family needs n divisible by 4, got {n}")));
    }
    Ok(())
}

impl FromStr for Method {
    type Err = BpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Method::Exact),
            "parity" | "parity_exact" => Ok(Method::ParityExact),
            "oracle" => Ok(Method::Oracle),
            "closed_form" => Ok(Method::ClosedForm),
            "mc" | "monte_carlo" => Ok(Method::MonteCarlo),
            other => Err(BpError::Parse(format!("unknown method {other:?}"))),
        }
    }
}
