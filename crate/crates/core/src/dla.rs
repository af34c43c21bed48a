//! Lie closure, symmetries, commutator graphs and quadratic-symmetry bases for
//! circuits generated by Pauli strings.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::combinatorics::{binomial, subsets};
use crate::dense::{self, i_pow, CMatrix};
use crate::error::{BpError, Result};
use crate::majorana::{monomial_to_pauli, parity_operator, MajoranaMonomial};
use crate::operator::PauliSumOperator;
use crate::pauli::{Pauli1, PauliTerm};

/// Largest qubit count for exhaustive scans over all `4ⁿ` strings.
pub const SCAN_LIMIT: usize = 8;

/// Largest qubit count for densifying `d² × d²` quadratic symmetries.
pub const QUADRATIC_DENSE_LIMIT: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSet {
    n: usize,
    generators: Vec<PauliTerm>,
}

impl GeneratorSet {
    /// Generators are stored unsigned and deduplicated, preserving first occurrence.
    pub fn new(n: usize, generators: Vec<PauliTerm>) -> Result<Self> {
        if n == 0 || n > crate::pauli::MAX_QUBITS {
            return Err(BpError::OutOfRange(format!("qubit count {n} outside 1..=64")));
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for g in generators {
            crate::error::ensure_same_n(n, g.n())?;
            let g = g.unsigned();
            if g.is_identity() {
                continue;
            }
            if seen.insert(g) {
                out.push(g);
            }
        }
        Ok(Self { n, generators: out })
    }

    /// `{Z_i} ∪ {X_i X_{i+1}}`.
    pub fn matchgate(n: usize) -> Result<Self> {
        let mut gens = Vec::with_capacity(2 * n - 1);
        for q in 1..=n {
            gens.push(PauliTerm::single(n, q, Pauli1::Z)?);
        }
        for q in 1..n {
            let a = PauliTerm::single(n, q, Pauli1::X)?;
            let b = PauliTerm::single(n, q + 1, Pauli1::X)?;
            gens.push(a.mul_unchecked(&b));
        }
        Self::new(n, gens)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliTerm] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }
}

/// One Pauli string per line; blank lines and `#` comments are ignored.
impl FromStr for GeneratorSet {
    type Err = BpError;

    fn from_str(text: &str) -> Result<Self> {
        let mut n = None;
        let mut gens = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let term: PauliTerm = line
                .parse()
                .map_err(|e: BpError| BpError::ParseLine { line: idx + 1, message: e.to_string() })?;
            match n {
                None => n = Some(term.n()),
                Some(m) if m != term.n() => {
                    return Err(BpError::ParseLine {
                        line: idx + 1,
                        message: format!("expected {m} qubits, found {}", term.n()),
                    })
                }
                _ => {}
            }
            gens.push(term);
        }
        let n = n.ok_or_else(|| BpError::Parse("generator file contains no Pauli strings".into()))?;
        Self::new(n, gens)
    }
}

fn sort_by_label(v: &mut [PauliTerm]) {
    v.sort_by(|a, b| a.cmp_label(b));
}

/// Pauli-string basis of the Lie closure of `iG`, sorted by label.
pub fn lie_closure(g: &GeneratorSet, max_dim: usize) -> Result<Vec<PauliTerm>> {
    let mut basis: Vec<PauliTerm> = Vec::new();
    let mut seen: HashSet<PauliTerm> = HashSet::new();
    for &gen in g.generators() {
        if seen.insert(gen) {
            basis.push(gen);
        }
    }
    if basis.len() > max_dim {
        return Err(BpError::ClosureBudget { limit: max_dim, reached: basis.len() });
    }
    // Every pair is visited once: element `i` is bracketed with all earlier ones.
    let mut i = 0;
    while i < basis.len() {
        let a = basis[i];
        for j in 0..i {
            if let Some(c) = a.half_commutator_unchecked(&basis[j]) {
                let c = c.unsigned();
                if seen.insert(c) {
                    basis.push(c);
                    if basis.len() > max_dim {
                        return Err(BpError::ClosureBudget { limit: max_dim, reached: basis.len() });
                    }
                }
            }
        }
        i += 1;
    }
    sort_by_label(&mut basis);
    Ok(basis)
}

fn check_scan(n: usize) -> Result<()> {
    if n > SCAN_LIMIT {
        return Err(BpError::DenseLimit { what: "exhaustive Pauli scan", n, limit: SCAN_LIMIT });
    }
    Ok(())
}

/// Unsigned Pauli strings commuting with every generator, sorted by label.
pub fn linear_symmetries(g: &GeneratorSet) -> Result<Vec<PauliTerm>> {
    let n = g.n();
    check_scan(n)?;
    let mut out: Vec<PauliTerm> = (0..1usize << (2 * n))
        .map(|idx| PauliTerm::from_packed_index(n, idx))
        .filter(|p| g.generators().iter().all(|h| p.commutes_unchecked(h)))
        .collect();
    sort_by_label(&mut out);
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct CommutatorGraph {
    n: usize,
    /// Component id per packed Pauli index.
    component_of: Vec<usize>,
    components: Vec<Vec<PauliTerm>>,
}

impl CommutatorGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn component_of(&self, p: &PauliTerm) -> usize {
        self.component_of[p.unsigned().packed_index()]
    }

    /// Components sorted by their smallest label; members sorted by label.
    pub fn components(&self) -> &[Vec<PauliTerm>] {
        &self.components
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.components.iter().map(Vec::len).collect()
    }
}

pub fn commutator_graph(g: &GeneratorSet) -> Result<CommutatorGraph> {
    let n = g.n();
    check_scan(n)?;
    let total = 1usize << (2 * n);
    let mut raw_id = vec![usize::MAX; total];
    let mut raw: Vec<Vec<PauliTerm>> = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..total {
        if raw_id[start] != usize::MAX {
            continue;
        }
        let id = raw.len();
        let mut members = Vec::new();
        raw_id[start] = id;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            let p = PauliTerm::from_packed_index(n, v);
            members.push(p);
            for h in g.generators() {
                if let Some(next) = p.half_commutator_unchecked(h) {
                    let w = next.unsigned().packed_index();
                    if raw_id[w] == usize::MAX {
                        raw_id[w] = id;
                        queue.push_back(w);
                    }
                }
            }
        }
        sort_by_label(&mut members);
        raw.push(members);
    }
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&a, &b| raw[a][0].cmp_label(&raw[b][0]));
    let mut renumber = vec![0; raw.len()];
    for (new, &old) in order.iter().enumerate() {
        renumber[old] = new;
    }
    let component_of = raw_id.iter().map(|&id| renumber[id]).collect();
    let mut slots: Vec<Option<Vec<PauliTerm>>> = raw.into_iter().map(Some).collect();
    let components = order.iter().map(|&old| slots[old].take().expect("each component moved once")).collect();
    Ok(CommutatorGraph { n, component_of, components })
}

/// A weighted sum `Σ w · A ⊗ B` acting on two copies of the register.
#[derive(Clone, Debug)]
pub struct QuadraticSymmetry {
    pub label: String,
    pub n: usize,
    pub terms: Vec<(PauliTerm, PauliTerm, Complex64)>,
}

impl QuadraticSymmetry {
    fn new(label: String, n: usize) -> Self {
        Self { label, n, terms: Vec::new() }
    }

    /// Sums the phases of both factors into the weights, merging repeated pairs.
    pub fn canonical_terms(&self) -> BTreeMap<(PauliTerm, PauliTerm), Complex64> {
        let mut map: BTreeMap<(PauliTerm, PauliTerm), Complex64> = BTreeMap::new();
        for (a, b, w) in &self.terms {
            let phase = a.phase_factor() * b.phase_factor();
            *map.entry((a.unsigned(), b.unsigned())).or_default() += w * phase;
        }
        map.retain(|_, w| w.norm() > 1e-14);
        map
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let terms = self.terms.iter().map(|&(a, b, w)| (a, b, w * s)).collect();
        Self { label: self.label.clone(), n: self.n, terms }
    }

    pub fn adjoint(&self) -> Self {
        let terms = self.terms.iter().map(|&(a, b, w)| (a.adjoint(), b.adjoint(), w.conj())).collect();
        Self { label: self.label.clone(), n: self.n, terms }
    }

    /// `Tr[Q† Q']` computed from Pauli coefficients.
    pub fn inner(&self, other: &QuadraticSymmetry) -> Complex64 {
        let d2 = (2.0 * self.n as f64).exp2();
        let mine = self.canonical_terms();
        let mut acc = Complex64::new(0.0, 0.0);
        for (key, w) in other.canonical_terms() {
            if let Some(v) = mine.get(&key) {
                acc += v.conj() * w;
            }
        }
        acc * d2
    }

    /// Largest coefficient of `Q − Q†`.
    pub fn hermiticity_defect(&self) -> f64 {
        let q = self.canonical_terms();
        let qd = self.adjoint().canonical_terms();
        let mut keys: HashSet<&(PauliTerm, PauliTerm)> = q.keys().collect();
        keys.extend(qd.keys());
        keys.into_iter()
            .map(|k| (q.get(k).copied().unwrap_or_default() - qd.get(k).copied().unwrap_or_default()).norm())
            .fold(0.0, f64::max)
    }

    /// Largest coefficient of `[Q, H ⊗ I + I ⊗ H]`.
    pub fn commutator_defect(&self, h: &PauliTerm) -> f64 {
        let h = h.unsigned();
        let mut acc: HashMap<(PauliTerm, PauliTerm), Complex64> = HashMap::new();
        for ((a, b), w) in self.canonical_terms() {
            if !a.commutes_unchecked(&h) {
                let p = a.mul_unchecked(&h);
                *acc.entry((p.unsigned(), b)).or_default() += w * 2.0 * p.phase_factor();
            }
            if !b.commutes_unchecked(&h) {
                let p = b.mul_unchecked(&h);
                *acc.entry((a, p.unsigned())).or_default() += w * 2.0 * p.phase_factor();
            }
        }
        acc.values().map(|w| w.norm()).fold(0.0, f64::max)
    }

    /// `Tr[Q (A ⊗ B)]`.
    pub fn trace_against(&self, a: &PauliSumOperator, b: &PauliSumOperator) -> Result<Complex64> {
        crate::error::ensure_same_n(self.n, a.n())?;
        crate::error::ensure_same_n(self.n, b.n())?;
        let d = (self.n as f64).exp2();
        let mut acc = Complex64::new(0.0, 0.0);
        for ((s, t), w) in self.canonical_terms() {
            acc += w * a.coefficient(s.x_mask(), s.z_mask()) * b.coefficient(t.x_mask(), t.z_mask());
        }
        Ok(acc * d * d)
    }

    /// Dense `d² × d²` matrix.
    pub fn to_dense(&self) -> Result<CMatrix> {
        if self.n > QUADRATIC_DENSE_LIMIT {
            return Err(BpError::DenseLimit {
                what: "dense quadratic symmetry",
                n: self.n,
                limit: QUADRATIC_DENSE_LIMIT,
            });
        }
        let d = 1usize << self.n;
        let mut m = CMatrix::zeros(d * d, d * d);
        for ((a, b), w) in self.canonical_terms() {
            for col in 0..d * d {
                let (ra, fa) = a.act_on_basis(col / d);
                let (rb, fb) = b.act_on_basis(col % d);
                m[(ra * d + rb, col)] += w * fa * fb;
            }
        }
        Ok(m)
    }
}

impl fmt::Display for QuadraticSymmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.label)?;
        for ((a, b), w) in self.canonical_terms() {
            write!(f, " ({:+.6}{:+.6}i) {}⊗{}", w.re, w.im, a, b)?;
        }
        Ok(())
    }
}

/// Raw operators `Q_κ^j = Σ_{S ∈ C_κ} S ⊗ L_j S` for every component and
/// linear symmetry, components in graph order, symmetries in label order.
pub fn quadratic_symmetries_raw(g: &GeneratorSet) -> Result<Vec<QuadraticSymmetry>> {
    let graph = commutator_graph(g)?;
    let syms = linear_symmetries(g)?;
    let mut out = Vec::with_capacity(graph.components().len() * syms.len());
    for (k, comp) in graph.components().iter().enumerate() {
        for (j, l) in syms.iter().enumerate() {
            let mut q = QuadraticSymmetry::new(format!("component {k}, symmetry {j} ({l})"), g.n());
            for s in comp {
                q.terms.push((*s, l.mul_unchecked(s), Complex64::new(1.0, 0.0)));
            }
            out.push(q);
        }
    }
    Ok(out)
}

/// Hermitian orthonormal quadratic symmetries.
///
/// A symmetry `L` commutes either with every string of a component or with
/// none, so each raw operator satisfies `Q† = ±Q`; anti-Hermitian ones are
/// multiplied by `−i`. Distinct raw operators are already orthogonal, and the
/// norm is `d·√|C_κ|`.
pub fn quadratic_symmetry_basis(g: &GeneratorSet) -> Result<Vec<QuadraticSymmetry>> {
    let d = (g.n() as f64).exp2();
    quadratic_symmetries_raw(g)?
        .into_iter()
        .map(|q| {
            let size = q.terms.len() as f64;
            let commuting = q.terms.iter().all(|(s, ls, _)| s.commutes_unchecked(ls));
            let phase = if commuting { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, -1.0) };
            let q = q.scale(phase / (d * size.sqrt()));
            if q.hermiticity_defect() > 1e-12 {
                return Err(BpError::Tolerance(format!("{} is not Hermitian after phase fixing", q.label)));
            }
            Ok(q)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum QBasisFlavor {
    Standard,
    Parity,
}

impl FromStr for QBasisFlavor {
    type Err = BpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Self::Standard),
            "parity" => Ok(Self::Parity),
            other => Err(BpError::Parse(format!("unknown basis flavor {other:?}"))),
        }
    }
}

fn normalization(n: usize, kappa: usize) -> f64 {
    let d = (n as f64).exp2();
    1.0 / (d * (binomial(2 * n as u64, kappa as u64) as f64).sqrt())
}

/// Orthonormal bases of the quadratic symmetries of the matchgate group.
///
/// `Standard` yields `Q_κ^0, Q_κ^1` for `κ = 0..2n` (labels `"k0"`, `"k1"`);
/// `Parity` yields `Q_κ^{λγ}` for `κ = 0..n` (labels like `"k++"`), omitting the
/// two members that vanish at `κ = n` (see [`crate::variance::parity_element_kept`]).
pub fn matchgate_q_basis(n: usize, flavor: QBasisFlavor) -> Result<Vec<QuadraticSymmetry>> {
    let parity = parity_operator(n)?;
    let mut out = Vec::new();
    match flavor {
        QBasisFlavor::Standard => {
            for kappa in 0..=2 * n {
                let norm = normalization(n, kappa);
                let mut q0 = QuadraticSymmetry::new(format!("{kappa}0"), n);
                let mut q1 = QuadraticSymmetry::new(format!("{kappa}1"), n);
                // (−i)ⁿ i^{κ mod 2}
                let global = i_pow((3 * n + kappa % 2) as u32);
                for s in subsets(2 * n, kappa) {
                    let m = MajoranaMonomial::new(n, &s)?;
                    let cs = monomial_to_pauli(&m);
                    let cbar = monomial_to_pauli(&m.complement());
                    let sign = if m.index_sum() % 2 == 0 { 1.0 } else { -1.0 };
                    q0.terms.push((cs, cs, norm.into()));
                    q1.terms.push((cs, cbar, global * sign * norm));
                }
                out.push(q0);
                out.push(q1);
            }
        }
        QBasisFlavor::Parity => {
            for kappa in 0..=n {
                let half_extra = if kappa == n { 2f64.sqrt() } else { 1.0 };
                let m_norm = normalization(n, kappa) / (2.0 * half_extra);
                for (lambda, gamma) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    if !crate::variance::parity_element_kept(n, kappa, lambda, gamma) {
                        continue;
                    }
                    let mut q = QuadraticSymmetry::new(crate::variance::parity_label(kappa, lambda, gamma), n);
                    let sl = if lambda == 0 { 1.0 } else { -1.0 };
                    let sg = if gamma == 0 { 1.0 } else { -1.0 };
                    for s in subsets(2 * n, kappa) {
                        let cs = monomial_to_pauli(&MajoranaMonomial::new(n, &s)?);
                        let pcs = parity.mul_unchecked(&cs);
                        q.terms.push((cs, cs, m_norm.into()));
                        q.terms.push((cs, pcs, (sg * m_norm).into()));
                        q.terms.push((pcs, cs, (sl * m_norm).into()));
                        q.terms.push((pcs, pcs, (sl * sg * m_norm).into()));
                    }
                    out.push(q);
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentSummary {
    pub size: usize,
    pub min_pauli: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct DlaReport {
    pub dla_dim: usize,
    pub linear_symmetries: Vec<String>,
    pub components: Vec<ComponentSummary>,
    pub quadratic_count: usize,
}

pub fn dla_report(g: &GeneratorSet, max_dim: usize) -> Result<DlaReport> {
    let closure = lie_closure(g, max_dim)?;
    let syms = linear_symmetries(g)?;
    let graph = commutator_graph(g)?;
    let components: Vec<ComponentSummary> = graph
        .components()
        .iter()
        .map(|c| ComponentSummary { size: c.len(), min_pauli: c[0].label() })
        .collect();
    Ok(DlaReport {
        dla_dim: closure.len(),
        quadratic_count: syms.len() * components.len(),
        linear_symmetries: syms.iter().map(PauliTerm::label).collect(),
        components,
    })
}

/// Dense `H ⊗ I + I ⊗ H`.
pub fn doubled_generator(h: &PauliTerm) -> Result<CMatrix> {
    let hd = h.to_dense()?;
    let id = CMatrix::identity(hd.nrows(), hd.ncols());
    Ok(dense::kron(&hd, &id) + dense::kron(&id, &hd))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliTerm {
        s.parse().unwrap()
    }

    fn single_x() -> GeneratorSet {
        GeneratorSet::new(1, vec![p("X")]).unwrap()
    }

    #[test]
    fn closure_examples() {
        assert_eq!(lie_closure(&GeneratorSet::matchgate(3).unwrap(), 1000).unwrap().len(), 15);
        assert_eq!(lie_closure(&GeneratorSet::new(1, vec![p("Z")]).unwrap(), 10).unwrap(), vec![p("Z")]);
        let two = lie_closure(&GeneratorSet::matchgate(2).unwrap(), 100).unwrap();
        let labels: Vec<String> = two.iter().map(|t| t.label()).collect();
        assert_eq!(labels, vec!["IZ", "XX", "XY", "YX", "YY", "ZI"]);
    }

    #[test]
    fn closure_budget() {
        let err = lie_closure(&GeneratorSet::matchgate(3).unwrap(), 10).unwrap_err();
        assert!(matches!(err, BpError::ClosureBudget { limit: 10, .. }));
    }

    #[test]
    fn symmetry_examples() {
        for n in 1..=5 {
            let syms = linear_symmetries(&GeneratorSet::matchgate(n).unwrap()).unwrap();
            assert_eq!(syms, vec![PauliTerm::identity(n), parity_operator(n).unwrap()]);
        }
        assert_eq!(linear_symmetries(&single_x()).unwrap(), vec![p("I"), p("X")]);
        assert_eq!(linear_symmetries(&GeneratorSet::new(2, vec![]).unwrap()).unwrap().len(), 16);
    }

    #[test]
    fn graph_of_single_x() {
        let graph = commutator_graph(&single_x()).unwrap();
        let comps: Vec<Vec<String>> =
            graph.components().iter().map(|c| c.iter().map(|t| t.label()).collect()).collect();
        assert_eq!(comps, vec![vec!["I"], vec!["X"], vec!["Y", "Z"]]);
        assert_eq!(graph.component_of(&p("Z")), 2);
    }

    #[test]
    fn matchgate_components() {
        let graph = commutator_graph(&GeneratorSet::matchgate(3).unwrap()).unwrap();
        let mut sizes = graph.sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 1, 6, 6, 15, 15, 20]);
    }

    #[test]
    fn generator_file_parsing() {
        let g: GeneratorSet = "# matchgate n=2\nZI\nIZ\n\nXX  # hopping\n".parse().unwrap();
        assert_eq!(g, GeneratorSet::matchgate(2).unwrap());
        let err = "ZI\nXXX\n".parse::<GeneratorSet>().unwrap_err();
        assert!(matches!(err, BpError::ParseLine { line: 2, .. }));
        let err = "ZI\n\nQX\n".parse::<GeneratorSet>().unwrap_err();
        assert!(matches!(err, BpError::ParseLine { line: 3, .. }));
        assert!("# nothing\n".parse::<GeneratorSet>().is_err());
    }

    #[test]
    fn single_x_quadratic_basis() {
        let raw = quadratic_symmetries_raw(&single_x()).unwrap();
        assert_eq!(raw.len(), 6);
        let basis = quadratic_symmetry_basis(&single_x()).unwrap();
        for (i, a) in basis.iter().enumerate() {
            assert!(a.hermiticity_defect() < 1e-14);
            assert!(a.commutator_defect(&p("X")) < 1e-14);
            for (j, b) in basis.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((a.inner(b) - Complex64::new(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn report_for_matchgate() {
        let r = dla_report(&GeneratorSet::matchgate(3).unwrap(), 1000).unwrap();
        assert_eq!(r.dla_dim, 15);
        assert_eq!(r.quadratic_count, 14);
        assert_eq!(r.linear_symmetries, vec!["III", "ZZZ"]);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["components"][0]["min_pauli"], "III");
    }

    #[test]
    fn standard_basis_at_one_qubit() {
        let basis = matchgate_q_basis(1, QBasisFlavor::Standard).unwrap();
        let q10 = basis.iter().find(|q| q.label == "10").unwrap();
        let terms = q10.canonical_terms();
        assert_eq!(terms.len(), 2);
        let half = 0.5 / 2f64.sqrt();
        assert!((terms[&(p("X"), p("X"))] - Complex64::new(half, 0.0)).norm() < 1e-15);
        assert!((terms[&(p("Y"), p("Y"))] - Complex64::new(half, 0.0)).norm() < 1e-15);
    }
}
